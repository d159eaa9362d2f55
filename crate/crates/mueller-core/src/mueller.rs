use crate::{Angle, StokesVector};
use std::ops::{Add, Index, IndexMut, Mul};

/// Real 4×4 transfer operator for Stokes vectors, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuellerMatrix {
    pub m: [[f64; 4]; 4],
}

impl MuellerMatrix {
    pub fn new(m: [[f64; 4]; 4]) -> Self {
        MuellerMatrix { m }
    }

    pub fn zeros() -> Self {
        MuellerMatrix::new([[0.0; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        MuellerMatrix::new(m)
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = d[i];
        }
        MuellerMatrix::new(m)
    }

    /// Ideal depolarizer: passes intensity, erases all polarization.
    pub fn depolarizer() -> Self {
        MuellerMatrix::diagonal([1.0, 0.0, 0.0, 0.0])
    }

    /// Row-major flattening, `vec(M)[4i+j] = m[i][j]`.
    pub fn flatten(&self) -> [f64; 16] {
        let mut v = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                v[4 * i + j] = self.m[i][j];
            }
        }
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        assert_eq!(v.len(), 16, "flattened Mueller matrix needs 16 entries");
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = v[4 * i + j];
            }
        }
        MuellerMatrix::new(m)
    }

    /// Passive elements never amplify: `|m[i][j]| ≤ m[0][0]` for all
    /// entries, tolerance 1e-9.
    pub fn is_passive(&self) -> bool {
        let bound = self.m[0][0] + 1e-9;
        self.m.iter().flatten().all(|&x| x.abs() <= bound)
    }

    pub fn apply(&self, s: StokesVector) -> StokesVector {
        let v = s.as_array();
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = (0..4).map(|j| self.m[i][j] * v[j]).sum();
        }
        StokesVector::from_array(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for x in row {
                *x *= c;
            }
        }
        MuellerMatrix::new(m)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}

impl Mul for MuellerMatrix {
    type Output = MuellerMatrix;

    fn mul(self, rhs: MuellerMatrix) -> MuellerMatrix {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        MuellerMatrix::new(out)
    }
}

impl Add for MuellerMatrix {
    type Output = MuellerMatrix;

    fn add(self, rhs: MuellerMatrix) -> MuellerMatrix {
        let mut out = self.m;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += rhs.m[i][j];
            }
        }
        MuellerMatrix::new(out)
    }
}

impl Index<(usize, usize)> for MuellerMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for MuellerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.m[i][j]
    }
}

/// Ideal linear polarizer rotated by `theta`.
pub fn linear_polarizer(theta: Angle) -> MuellerMatrix {
    let (c, s) = theta.cos_sin_2theta();
    MuellerMatrix::new([
        [1.0, c, s, 0.0],
        [c, c * c, s * c, 0.0],
        [s, s * c, s * s, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
    .scale(0.5)
}

/// Quarter-wave plate with fast axis rotated by `theta`.
pub fn quarter_wave_plate(theta: Angle) -> MuellerMatrix {
    let (c, s) = theta.cos_sin_2theta();
    MuellerMatrix::new([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c * c, s * c, -s],
        [0.0, s * c, s * s, c],
        [0.0, s, -c, 0.0],
    ])
}

/// Coordinate rotation about the optical axis.
pub fn rotator(theta: Angle) -> MuellerMatrix {
    let (c, s) = theta.cos_sin_2theta();
    MuellerMatrix::new([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, -s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Mueller matrix of the element `m` rotated by `theta`:
/// `C(−θ)·m·C(θ)`.
pub fn rotate_mueller(m: &MuellerMatrix, theta: Angle) -> MuellerMatrix {
    rotator(Angle(-theta.0)) * *m * rotator(theta)
}
