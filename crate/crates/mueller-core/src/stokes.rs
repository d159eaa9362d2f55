/// Polarization state of a light beam: intensity `s0`, the two linear
/// components `s1`, `s2`, and the circular component `s3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        StokesVector { s0, s1, s2, s3 }
    }

    /// Unpolarized beam of the given intensity.
    pub fn unpolarized(intensity: f64) -> Self {
        StokesVector::new(intensity, 0.0, 0.0, 0.0)
    }

    pub fn as_array(self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        StokesVector::new(v[0], v[1], v[2], v[3])
    }

    /// Degree of polarization, `√(s1²+s2²+s3²)/s0`.
    pub fn degree_of_polarization(self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt() / self.s0
    }

    /// Physical states have nonnegative intensity and degree of
    /// polarization at most 1, with tolerance 1e-9.
    pub fn is_physical(self) -> bool {
        let tol = 1e-9;
        if self.s0 < -tol {
            return false;
        }
        let p2 = self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3;
        p2.sqrt() <= self.s0 + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physicality() {
        assert!(StokesVector::unpolarized(1.0).is_physical());
        assert!(StokesVector::new(1.0, 1.0, 0.0, 0.0).is_physical());
        assert!(!StokesVector::new(1.0, 1.1, 0.0, 0.0).is_physical());
        assert!(!StokesVector::new(-1.0, 0.0, 0.0, 0.0).is_physical());
        // Tolerance admits roundoff-level violations.
        assert!(StokesVector::new(1.0, 1.0 + 1e-12, 0.0, 0.0).is_physical());
    }

    #[test]
    fn dop() {
        let s = StokesVector::new(2.0, 1.0, 0.0, 0.0);
        assert!((s.degree_of_polarization() - 0.5).abs() < 1e-15);
    }
}
