//! Synthetic labeled Mueller-matrix material dataset.
//!
//! Stands in for a measured polarimetric reflectance dataset: each sample
//! is one per-point Mueller matrix labeled with one of five material
//! categories. Materials are built from a three-parameter Fresnel
//! reflection model blended with an ideal depolarizer, with per-category
//! parameter distributions and a small per-sample perturbation.

mod augment;
mod fresnel;
mod io;
mod synth;

pub use augment::{augment_intensity, augment_rotation};
pub use fresnel::{fresnel_mueller, FresnelParams};
pub use io::{read_dataset, write_dataset, IoError, Manifest, SplitIds};
pub use synth::{
    generate_dataset, is_physical_map, synthesize_material, CategoryDistribution, Dataset,
    DatasetSpec, MaterialCategory, MaterialSample, SynthConfig, SynthError,
};
