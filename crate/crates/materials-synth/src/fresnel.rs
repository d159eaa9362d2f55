use crate::SynthError;
use mueller_core::MuellerMatrix;
use std::f64::consts::TAU;

/// Three-parameter Fresnel reflection: s- and p-polarized reflectances
/// and the phase delay between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelParams {
    /// s-polarized reflectance, in [0, 1].
    pub r_s: f64,
    /// p-polarized reflectance, in [0, r_s]. The ordering r_p ≤ r_s is
    /// canonical; the swapped case is the same element rotated by 90°.
    pub r_p: f64,
    /// Phase delay in [0, 2π).
    pub delta: f64,
}

impl FresnelParams {
    pub fn new(r_s: f64, r_p: f64, delta: f64) -> Result<Self, SynthError> {
        if !(0.0..=1.0).contains(&r_s) || !(0.0..=1.0).contains(&r_p) || r_p > r_s {
            return Err(SynthError::InvalidFresnel { r_s, r_p, delta });
        }
        if !(0.0..TAU).contains(&delta) {
            return Err(SynthError::InvalidFresnel { r_s, r_p, delta });
        }
        Ok(FresnelParams { r_s, r_p, delta })
    }
}

/// Mueller matrix of a Fresnel reflection: a diattenuating retarder with
/// transmittances (r_s, r_p) and retardance `delta`.
pub fn fresnel_mueller(p: &FresnelParams) -> MuellerMatrix {
    let a = (p.r_s + p.r_p) / 2.0;
    let b = (p.r_s - p.r_p) / 2.0;
    let g = (p.r_s * p.r_p).sqrt();
    let (sd, cd) = p.delta.sin_cos();
    MuellerMatrix::new([
        [a, b, 0.0, 0.0],
        [b, a, 0.0, 0.0],
        [0.0, 0.0, g * cd, g * sd],
        [0.0, 0.0, -g * sd, g * cd],
    ])
}
