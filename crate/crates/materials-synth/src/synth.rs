use crate::{fresnel_mueller, FresnelParams};
use mueller_core::{rotate_mueller, Angle, MuellerMatrix, StokesVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid Fresnel parameters r_s={r_s}, r_p={r_p}, delta={delta}")]
    InvalidFresnel { r_s: f64, r_p: f64, delta: f64 },
    #[error("category {0:?} failed to produce a physical sample after 100 draws; its parameter distribution is misconfigured")]
    CategoryMisconfigured(MaterialCategory),
    #[error("dataset spec counts must be at least 1")]
    EmptySpec,
}

/// The five material categories of the classification task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialCategory {
    Wood,
    Metal,
    Resin,
    Fabric,
    Stone,
}

impl MaterialCategory {
    pub const ALL: [MaterialCategory; 5] = [
        MaterialCategory::Wood,
        MaterialCategory::Metal,
        MaterialCategory::Resin,
        MaterialCategory::Fabric,
        MaterialCategory::Stone,
    ];

    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        match self {
            MaterialCategory::Wood => 0,
            MaterialCategory::Metal => 1,
            MaterialCategory::Resin => 2,
            MaterialCategory::Fabric => 3,
            MaterialCategory::Stone => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MaterialCategory::Wood => "wood",
            MaterialCategory::Metal => "metal",
            MaterialCategory::Resin => "resin",
            MaterialCategory::Fabric => "fabric",
            MaterialCategory::Stone => "stone",
        }
    }
}

/// One labeled Mueller-matrix record.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSample {
    pub mueller: MuellerMatrix,
    pub category: MaterialCategory,
    pub material_id: u32,
}

/// Parameter ranges for drawing one material of a category.
///
/// `alpha` weighs the rotated Fresnel (specular) part, `beta` the ideal
/// depolarizing diffuse part; alpha + beta ≤ 1 must hold over the whole
/// range. `rp_ratio` draws r_p as a fraction of r_s.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub r_s: (f64, f64),
    pub rp_ratio: (f64, f64),
    pub delta: (f64, f64),
    /// Orientation range of the specular axis. Kept narrow by default:
    /// targets face the rig consistently, and orientation robustness is
    /// the job of the training-time rotation augmentation.
    pub psi: (f64, f64),
}

/// Per-category distributions plus the perturbation scale. These are
/// tunable configuration, not measured ground truth; the defaults spread
/// the categories along both the linear-diattenuation axis and the
/// retardance (circular) axis so that rotating wave plates carry real
/// discriminative value. Two pairs are confusable without the circular
/// channel: wood/fabric share every range except the sign of sin δ, and
/// resin/stone share everything but δ, whose cos δ ranges mostly
/// overlap while sin δ has opposite sign. A linear-only instrument
/// cannot tell wood from fabric at all and separates resin from stone
/// only weakly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub wood: CategoryDistribution,
    pub metal: CategoryDistribution,
    pub resin: CategoryDistribution,
    pub fabric: CategoryDistribution,
    pub stone: CategoryDistribution,
    /// Gaussian entry-wise perturbation, as a fraction of m[0][0].
    pub perturbation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            wood: CategoryDistribution {
                alpha: (0.05, 0.30),
                beta: (0.50, 0.65),
                r_s: (0.30, 0.70),
                rp_ratio: (0.80, 0.95),
                delta: (1.2, 1.9),
                psi: (0.0, 0.25),
            },
            metal: CategoryDistribution {
                alpha: (0.60, 0.84),
                beta: (0.08, 0.14),
                r_s: (0.70, 0.95),
                rp_ratio: (0.85, 1.0),
                delta: (PI - 0.5, PI + 0.5),
                psi: (0.0, 0.25),
            },
            resin: CategoryDistribution {
                alpha: (0.30, 0.60),
                beta: (0.15, 0.35),
                r_s: (0.50, 0.90),
                rp_ratio: (0.40, 0.80),
                delta: (0.3, 1.0),
                psi: (0.0, 0.25),
            },
            fabric: CategoryDistribution {
                alpha: (0.05, 0.30),
                beta: (0.50, 0.65),
                r_s: (0.30, 0.70),
                rp_ratio: (0.80, 0.95),
                delta: (4.4, 5.1),
                psi: (0.0, 0.25),
            },
            stone: CategoryDistribution {
                alpha: (0.30, 0.60),
                beta: (0.15, 0.35),
                r_s: (0.50, 0.90),
                rp_ratio: (0.40, 0.80),
                delta: (TAU - 1.2, TAU - 0.4),
                psi: (0.0, 0.25),
            },
            perturbation: 0.01,
        }
    }
}

impl SynthConfig {
    pub fn category(&self, c: MaterialCategory) -> &CategoryDistribution {
        match c {
            MaterialCategory::Wood => &self.wood,
            MaterialCategory::Metal => &self.metal,
            MaterialCategory::Resin => &self.resin,
            MaterialCategory::Fabric => &self.fabric,
            MaterialCategory::Stone => &self.stone,
        }
    }
}

/// Latent parameters of one material instance. Samples of the same
/// material share these and differ only by the perturbation draw.
#[derive(Debug, Clone, Copy)]
struct MaterialParams {
    alpha: f64,
    beta: f64,
    fresnel: FresnelParams,
    /// Orientation of the specular axis.
    psi: f64,
}

fn draw_material_params(
    dist: &CategoryDistribution,
    rng: &mut ChaCha8Rng,
) -> Result<MaterialParams, SynthError> {
    let alpha = rng.gen_range(dist.alpha.0..=dist.alpha.1);
    let beta = rng.gen_range(dist.beta.0..=dist.beta.1);
    let r_s = rng.gen_range(dist.r_s.0..=dist.r_s.1);
    let r_p = r_s * rng.gen_range(dist.rp_ratio.0..=dist.rp_ratio.1);
    let delta = rng.gen_range(dist.delta.0..=dist.delta.1).rem_euclid(TAU);
    let fresnel = FresnelParams::new(r_s, r_p, delta)?;
    let psi = rng.gen_range(dist.psi.0..=dist.psi.1);
    Ok(MaterialParams {
        alpha,
        beta,
        fresnel,
        psi,
    })
}

fn clean_matrix(p: &MaterialParams) -> MuellerMatrix {
    let specular = rotate_mueller(&fresnel_mueller(&p.fresnel), Angle(p.psi)).scale(p.alpha);
    let diffuse = MuellerMatrix::depolarizer().scale(p.beta);
    specular + diffuse
}

/// Tests whether `m` maps physical Stokes states to physical states, on
/// the 26 lattice directions of full polarization plus the unpolarized
/// state, with tolerance 1e-9.
pub fn is_physical_map(m: &MuellerMatrix) -> bool {
    if !m.is_passive() {
        return false;
    }
    if !m.apply(StokesVector::unpolarized(1.0)).is_physical() {
        return false;
    }
    probe_directions()
        .iter()
        .all(|&[s1, s2, s3]| m.apply(StokesVector::new(1.0, s1, s2, s3)).is_physical())
}

fn probe_directions() -> Vec<[f64; 3]> {
    let mut dirs = Vec::with_capacity(26);
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let v = [a as f64, b as f64, c as f64];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                dirs.push([v[0] / n, v[1] / n, v[2] / n]);
            }
        }
    }
    dirs
}

/// Stricter internal acceptance: passivity plus a dense sweep of fully
/// polarized input directions, so perturbed samples stay physical with
/// margin rather than just at the 26 probes.
fn accept_matrix(m: &MuellerMatrix, rng: &mut ChaCha8Rng) -> bool {
    if !is_physical_map(m) {
        return false;
    }
    for _ in 0..200 {
        let v = [
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-6 {
            continue;
        }
        let s = StokesVector::new(1.0, v[0] / n, v[1] / n, v[2] / n);
        if !m.apply(s).is_physical() {
            return false;
        }
    }
    true
}

fn perturbed_sample(
    params: &MaterialParams,
    category: MaterialCategory,
    material_id: u32,
    perturbation: f64,
    rng: &mut ChaCha8Rng,
) -> Result<MaterialSample, SynthError> {
    let clean = clean_matrix(params);
    if perturbation == 0.0 {
        return Ok(MaterialSample {
            mueller: clean,
            category,
            material_id,
        });
    }
    let sigma = perturbation * clean[(0, 0)];
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
    for _ in 0..100 {
        let mut m = clean;
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += normal.sample(rng);
            }
        }
        if accept_matrix(&m, rng) {
            return Ok(MaterialSample {
                mueller: m,
                category,
                material_id,
            });
        }
    }
    Err(SynthError::CategoryMisconfigured(category))
}

/// Draws a fresh material of the category and emits one perturbed
/// sample of it.
pub fn synthesize_material(
    category: MaterialCategory,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<MaterialSample, SynthError> {
    let params = draw_material_params(config.category(category), rng)?;
    perturbed_sample(&params, category, 0, config.perturbation, rng)
}

/// Generation counts and seed for one dataset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub materials_per_category: u32,
    pub samples_per_material: u32,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        // 40 materials per category: enough held-out materials (12 per
        // category under the 70/30 split) that test accuracy is not
        // dominated by which few materials land in the test split.
        DatasetSpec {
            materials_per_category: 40,
            samples_per_material: 10,
            seed: 7,
        }
    }
}

/// Labeled samples plus a train/test split by material instance.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<MaterialSample>,
    pub train_ids: Vec<u32>,
    pub test_ids: Vec<u32>,
}

impl Dataset {
    pub fn train_samples(&self) -> Vec<&MaterialSample> {
        self.split_samples(&self.train_ids)
    }

    pub fn test_samples(&self) -> Vec<&MaterialSample> {
        self.split_samples(&self.test_ids)
    }

    fn split_samples(&self, ids: &[u32]) -> Vec<&MaterialSample> {
        self.samples
            .iter()
            .filter(|s| ids.contains(&s.material_id))
            .collect()
    }
}

fn mix_seed(seed: u64, material_id: u64, sample_index: u64) -> u64 {
    // splitmix-style mix so every (material, sample) pair gets its own
    // reproducible stream.
    let mut z = seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(material_id.wrapping_mul(0xbf58476d1ce4e5b9))
        .wrapping_add(sample_index.wrapping_mul(0x94d049bb133111eb));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic dataset generation: same spec, same bytes.
///
/// Materials are drawn per category; samples of one material share its
/// latent parameters and differ by the perturbation draw. The 70/30
/// train/test split is by material id, stratified per category, so
/// generalization is across material instances.
pub fn generate_dataset(spec: &DatasetSpec, config: &SynthConfig) -> Result<Dataset, SynthError> {
    if spec.materials_per_category < 1 || spec.samples_per_material < 1 {
        return Err(SynthError::EmptySpec);
    }
    let mut samples = Vec::new();
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for category in MaterialCategory::ALL {
        let cat_idx = category.index() as u32;
        let mut cat_ids = Vec::new();
        for local in 0..spec.materials_per_category {
            let material_id = cat_idx * spec.materials_per_category + local;
            let mut mat_rng =
                ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, material_id as u64, u64::MAX));
            let params = draw_material_params(config.category(category), &mut mat_rng)?;
            for s in 0..spec.samples_per_material {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, material_id as u64, s as u64));
                samples.push(perturbed_sample(
                    &params,
                    category,
                    material_id,
                    config.perturbation,
                    &mut rng,
                )?);
            }
            cat_ids.push(material_id);
        }
        // Stratified split, shuffled per category.
        let mut split_rng =
            ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, 0xc0ffee + cat_idx as u64, 0));
        for i in (1..cat_ids.len()).rev() {
            let j = split_rng.gen_range(0..=i);
            cat_ids.swap(i, j);
        }
        let n_test = ((cat_ids.len() as f64) * 0.3).floor() as usize;
        let n_test = n_test.min(cat_ids.len().saturating_sub(1));
        test_ids.extend_from_slice(&cat_ids[..n_test]);
        train_ids.extend_from_slice(&cat_ids[n_test..]);
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(Dataset {
        samples,
        train_ids,
        test_ids,
    })
}
