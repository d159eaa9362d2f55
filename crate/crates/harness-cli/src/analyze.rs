//! Angle-distribution analysis of optimized plans.
//!
//! Optimized plans are permutation- and reference-invariant: relabeling
//! captures or rotating the whole apparatus leaves the measurements
//! unchanged. The analysis quotients both symmetries out so angle
//! clusters across independent trials become comparable.

use crate::sweep::mean_std;
use mueller_core::Angle;
use polarimeter::{ConditionTag, MeasurementPlan};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::Path;

/// One capture after alignment and sorting. Angles in radians; unused
/// elements stay at zero.
#[derive(Debug, Clone, Copy)]
pub struct AngleRecord {
    pub trial: usize,
    /// Position after sorting within the trial's plan.
    pub rank: usize,
    pub theta_lg: f64,
    pub theta_la: f64,
    pub theta_qg: f64,
    pub theta_qa: f64,
    /// Wrapped generator-minus-analyzer angle.
    pub relative: f64,
}

/// Per-rank statistics over trials: mean/std of
/// `[θ_Lg, θ_La, θ_Qg, θ_Qa, relative]`.
#[derive(Debug, Clone)]
pub struct RankStats {
    pub rank: usize,
    pub mean: [f64; 5],
    pub std: [f64; 5],
}

#[derive(Debug, Clone)]
pub struct AngleAnalysis {
    pub condition: ConditionTag,
    pub records: Vec<AngleRecord>,
    pub per_rank: Vec<RankStats>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("expected a {expected:?} plan, got {got:?}")]
    WrongCondition {
        expected: ConditionTag,
        got: ConditionTag,
    },
    #[error("plans disagree on the capture count ({0} vs {1})")]
    MixedK(usize, usize),
}

/// Wraps an angle difference into (-π/2, π/2].
pub fn wrap_half(theta: f64) -> f64 {
    let x = theta.rem_euclid(PI);
    if x > FRAC_PI_2 {
        x - PI
    } else {
        x
    }
}

fn per_rank_stats(records: &[AngleRecord], k: usize) -> Vec<RankStats> {
    (0..k)
        .map(|rank| {
            let of = |f: fn(&AngleRecord) -> f64| -> Vec<f64> {
                records.iter().filter(|r| r.rank == rank).map(f).collect()
            };
            let columns = [
                of(|r| r.theta_lg),
                of(|r| r.theta_la),
                of(|r| r.theta_qg),
                of(|r| r.theta_qa),
                of(|r| r.relative),
            ];
            let mut mean = [0.0; 5];
            let mut std = [0.0; 5];
            for (i, col) in columns.iter().enumerate() {
                let (m, s) = mean_std(col);
                mean[i] = m;
                std[i] = s;
            }
            RankStats { rank, mean, std }
        })
        .collect()
}

/// Aligns optimized LP plans to a common reference and aggregates.
///
/// Per plan: the relative angle of capture i is
/// `θ_Ld = wrap(θ_Lg - θ_La)`; the capture with the smallest θ_Ld
/// (lowest index on ties) defines the reference, its θ_Lg is subtracted
/// from every polarizer angle (canonicalized to [0, π)), and captures
/// are sorted by θ_Ld. Statistics are taken per sort rank, so applying
/// the alignment twice is the identity.
pub fn align_lp_angles(plans: &[MeasurementPlan]) -> Result<AngleAnalysis, AnalyzeError> {
    let mut k = None;
    let mut records = Vec::new();
    for (trial, plan) in plans.iter().enumerate() {
        if plan.condition != ConditionTag::Lp {
            return Err(AnalyzeError::WrongCondition {
                expected: ConditionTag::Lp,
                got: plan.condition,
            });
        }
        match k {
            None => k = Some(plan.len()),
            Some(k) if k != plan.len() => return Err(AnalyzeError::MixedK(k, plan.len())),
            _ => {}
        }
        let mut rows: Vec<(f64, f64, f64)> = plan
            .captures
            .iter()
            .map(|c| {
                let d = wrap_half(c.theta_lg.0 - c.theta_la.0);
                (d, c.theta_lg.0, c.theta_la.0)
            })
            .collect();
        let i_min = rows
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.0.partial_cmp(&b.0).unwrap())
            .map(|(i, _)| i)
            .expect("plans are nonempty");
        let reference = rows[i_min].1;
        for row in &mut rows {
            row.1 = Angle(row.1 - reference).canonical().0;
            row.2 = Angle(row.2 - reference).canonical().0;
            // Recomputed from the aligned values so a second alignment
            // reproduces the same keys bit for bit.
            row.0 = wrap_half(row.1 - row.2);
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        records.extend(rows.into_iter().enumerate().map(|(rank, (d, lg, la))| {
            AngleRecord {
                trial,
                rank,
                theta_lg: lg,
                theta_la: la,
                theta_qg: 0.0,
                theta_qa: 0.0,
                relative: d,
            }
        }));
    }
    let k = k.unwrap_or(0);
    Ok(AngleAnalysis {
        condition: ConditionTag::Lp,
        per_rank: per_rank_stats(&records, k),
        records,
    })
}

/// Scatter data for optimized QWP plans: per capture, the canonicalized
/// `(θ_Qg, θ_Qa)` pair, sorted within each trial by θ_Qa.
pub fn qwp_angle_scatter(plans: &[MeasurementPlan]) -> Result<AngleAnalysis, AnalyzeError> {
    let mut k = 0;
    let mut records = Vec::new();
    for (trial, plan) in plans.iter().enumerate() {
        if plan.condition != ConditionTag::Qwp {
            return Err(AnalyzeError::WrongCondition {
                expected: ConditionTag::Qwp,
                got: plan.condition,
            });
        }
        k = k.max(plan.len());
        let mut rows: Vec<(f64, f64)> = plan
            .captures
            .iter()
            .map(|c| (c.theta_qg.canonical().0, c.theta_qa.canonical().0))
            .collect();
        rows.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        records.extend(rows.into_iter().enumerate().map(|(rank, (qg, qa))| {
            AngleRecord {
                trial,
                rank,
                theta_lg: 0.0,
                theta_la: 0.0,
                theta_qg: qg,
                theta_qa: qa,
                relative: wrap_half(qg - qa),
            }
        }));
    }
    Ok(AngleAnalysis {
        condition: ConditionTag::Qwp,
        per_rank: per_rank_stats(&records, k),
        records,
    })
}

/// Angle CSV, one row per capture per trial, in degrees.
pub fn write_angles_csv(path: &Path, analysis: &AngleAnalysis) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "condition,trial,rank,theta_lg_deg,theta_la_deg,theta_qg_deg,theta_qa_deg,relative_deg"
    )?;
    for r in &analysis.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            analysis.condition.label(),
            r.trial,
            r.rank,
            r.theta_lg.to_degrees(),
            r.theta_la.to_degrees(),
            r.theta_qg.to_degrees(),
            r.theta_qa.to_degrees(),
            r.relative.to_degrees()
        )?;
    }
    w.flush()
}
