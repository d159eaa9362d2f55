use mueller_core::{rotate_mueller, Angle, MuellerMatrix};
use rand::Rng;
use std::f64::consts::PI;

/// Intensity augmentation: scales the whole matrix by a uniform random
/// factor in [0.01, 10.0].
pub fn augment_intensity<R: Rng>(m: &MuellerMatrix, rng: &mut R) -> MuellerMatrix {
    m.scale(rng.gen_range(0.01..=10.0))
}

/// Rotation augmentation: rotates the sample about the optical axis by
/// a uniform random angle in [0, π).
pub fn augment_rotation<R: Rng>(m: &MuellerMatrix, rng: &mut R) -> MuellerMatrix {
    rotate_mueller(m, Angle(rng.gen_range(0.0..PI)))
}
