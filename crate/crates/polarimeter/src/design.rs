use crate::forward::{analyzer_row, generator_stokes};
use crate::MeasurementPlan;
use mueller_core::MuellerMatrix;
use nalgebra::{DMatrix, DVector};

/// Relative cutoff below which singular values count as zero.
const RANK_TOL: f64 = 1e-10;

/// K×16 linearization of the forward model: `f_k = w_k · vec(M)` with
/// row-major `vec`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    rows: Vec<[f64; 16]>,
}

#[derive(Debug, Clone)]
pub struct PlanDiagnostics {
    pub rank: usize,
    /// σ_max/σ_min over the nonzero singular values.
    pub condition_number: f64,
    /// All 16 singular values, zero-padded when K < 16, descending.
    pub singular_values: [f64; 16],
}

impl DesignMatrix {
    /// Row k is the flattened outer product of the analyzer's first row
    /// and the generator output state, so the linear functional
    /// reproduces `intensity()` exactly.
    pub fn build(plan: &MeasurementPlan) -> Self {
        let rows = plan
            .captures
            .iter()
            .map(|c| {
                let a = analyzer_row(c, plan.condition);
                let p = generator_stokes(c, plan.condition, plan.source_intensity);
                let mut w = [0.0; 16];
                for i in 0..4 {
                    for j in 0..4 {
                        w[4 * i + j] = a[i] * p[j];
                    }
                }
                w
            })
            .collect();
        DesignMatrix { rows }
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; 16]] {
        &self.rows
    }

    /// Predicted intensities for a known sample.
    pub fn predict(&self, m: &MuellerMatrix) -> Vec<f64> {
        let v = m.flatten();
        self.rows
            .iter()
            .map(|w| w.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn as_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), 16, |i, j| self.rows[i][j])
    }

    pub fn diagnostics(&self) -> PlanDiagnostics {
        let svd = self.as_dmatrix().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sigma_max = sv.first().copied().unwrap_or(0.0);
        let cutoff = RANK_TOL * sigma_max;
        let rank = sv.iter().filter(|&&s| s > cutoff).count();
        let sigma_min_nonzero = sv
            .iter()
            .filter(|&&s| s > cutoff)
            .last()
            .copied()
            .unwrap_or(0.0);
        let condition_number = if sigma_min_nonzero > 0.0 {
            sigma_max / sigma_min_nonzero
        } else {
            f64::INFINITY
        };
        let mut singular_values = [0.0; 16];
        for (dst, src) in singular_values.iter_mut().zip(sv.iter()) {
            *dst = *src;
        }
        PlanDiagnostics {
            rank,
            condition_number,
            singular_values,
        }
    }
}

/// Minimum-norm least-squares estimate of the sample Mueller matrix
/// from measured intensities, with the residual 2-norm.
///
/// Rank deficiency is not an error: unobserved components come back as
/// zero and the design diagnostics report the rank.
pub fn estimate_mueller(plan: &MeasurementPlan, f: &[f64]) -> (MuellerMatrix, f64) {
    assert_eq!(
        f.len(),
        plan.len(),
        "intensity vector length must match the plan's capture count"
    );
    let design = DesignMatrix::build(plan);
    let w = design.as_dmatrix();
    let b = DVector::from_column_slice(f);
    let svd = w.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd
        .solve(&b, RANK_TOL * sigma_max)
        .expect("SVD solve on a computed decomposition");
    let residual = (&w * &x - &b).norm();
    (MuellerMatrix::from_flat(x.as_slice()), residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{CaptureConfig, ConditionTag};
    use mueller_core::Angle;

    fn lp_plan(pairs: &[(f64, f64)]) -> MeasurementPlan {
        let captures = pairs
            .iter()
            .map(|&(lg, la)| CaptureConfig {
                theta_lg: Angle::from_degrees(lg),
                theta_qg: Angle(0.0),
                theta_qa: Angle(0.0),
                theta_la: Angle::from_degrees(la),
            })
            .collect();
        MeasurementPlan::new(ConditionTag::Lp, captures, 1.0).unwrap()
    }

    #[test]
    fn lp_rows_never_touch_index_three() {
        let plan = lp_plan(&[(0.0, 0.0), (10.0, 70.0), (33.0, 120.0)]);
        let d = DesignMatrix::build(&plan);
        for w in d.rows() {
            for i in 0..4 {
                assert_eq!(w[4 * i + 3], 0.0);
                assert_eq!(w[4 * 3 + i], 0.0);
            }
        }
    }

    #[test]
    fn single_capture_has_rank_one() {
        let plan = lp_plan(&[(12.0, 95.0)]);
        assert_eq!(DesignMatrix::build(&plan).diagnostics().rank, 1);
    }

    #[test]
    fn lp_rank_is_at_most_nine() {
        let pairs: Vec<(f64, f64)> = (0..20)
            .map(|i| (17.0 * i as f64 % 180.0, 53.0 * i as f64 % 180.0))
            .collect();
        let plan = lp_plan(&pairs);
        assert!(DesignMatrix::build(&plan).diagnostics().rank <= 9);
    }

    #[test]
    fn estimate_rejects_length_mismatch() {
        let plan = lp_plan(&[(0.0, 0.0), (45.0, 0.0)]);
        let result = std::panic::catch_unwind(|| estimate_mueller(&plan, &[1.0]));
        assert!(result.is_err());
    }
}
