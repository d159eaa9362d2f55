use std::f64::consts::PI;

/// Rotation angle of an optical element about the optical axis, in radians.
///
/// Every element matrix depends on the angle only through `cos 2θ` and
/// `sin 2θ`, so angles are equivalent modulo π. [`Angle::canonical`] maps
/// into `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl Angle {
    pub fn from_radians(value: f64) -> Self {
        Angle(value)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Equivalent angle in `[0, π)`. Idempotent: canonical values pass
    /// through bit-exactly.
    pub fn canonical(self) -> Self {
        if (0.0..PI).contains(&self.0) {
            return self;
        }
        let mut v = self.0.rem_euclid(PI);
        // rem_euclid can return PI when the input is a tiny negative number.
        if v >= PI {
            v -= PI;
        }
        Angle(v)
    }

    /// `cos 2θ` and `sin 2θ`, the only trigonometric forms the element
    /// matrices use.
    pub fn cos_sin_2theta(self) -> (f64, f64) {
        let t = 2.0 * self.0;
        (t.cos(), t.sin())
    }
}
