//! Differentiable forward measurement: the same optical stack as
//! `polarimeter`, rebuilt as tape ops so gradients flow into the
//! rotation angles.

use crate::tape::{NodeId, Tape};
use mueller_core::{Angle, MuellerMatrix};
use polarimeter::{CaptureConfig, ConditionTag, MeasurementPlan};

/// Free rotation angles registered as tape leaves, capture-major.
///
/// Per-capture order: LP `[θ_Lg, θ_La]`, QWP `[θ_Qg, θ_Qa]`, LP+QWP
/// `[θ_Lg, θ_Qg, θ_Qa, θ_La]`. Angles are unconstrained reals; the trig
/// ops make the loss π-periodic in each of them.
pub struct AnglePack {
    pub tag: ConditionTag,
    pub leaves: Vec<NodeId>,
}

impl AnglePack {
    pub fn captures(&self) -> usize {
        self.leaves.len() / self.tag.free_angles()
    }
}

/// Flattens a plan's free angles into the capture-major layout.
pub fn angles_from_plan(plan: &MeasurementPlan) -> Vec<f64> {
    let mut out = Vec::with_capacity(plan.len() * plan.condition.free_angles());
    for c in &plan.captures {
        match plan.condition {
            ConditionTag::Lp => out.extend([c.theta_lg.0, c.theta_la.0]),
            ConditionTag::Qwp => out.extend([c.theta_qg.0, c.theta_qa.0]),
            ConditionTag::LpQwp => {
                out.extend([c.theta_lg.0, c.theta_qg.0, c.theta_qa.0, c.theta_la.0])
            }
        }
    }
    out
}

/// Rebuilds a plan from the capture-major angle layout.
pub fn plan_from_angles(
    tag: ConditionTag,
    values: &[f64],
    source_intensity: f64,
) -> MeasurementPlan {
    let per = tag.free_angles();
    assert_eq!(values.len() % per, 0, "angle count must be a multiple of {per}");
    let captures = values
        .chunks(per)
        .map(|chunk| {
            let mut c = CaptureConfig::reference();
            match tag {
                ConditionTag::Lp => {
                    c.theta_lg = Angle(chunk[0]);
                    c.theta_la = Angle(chunk[1]);
                }
                ConditionTag::Qwp => {
                    c.theta_qg = Angle(chunk[0]);
                    c.theta_qa = Angle(chunk[1]);
                }
                ConditionTag::LpQwp => {
                    c.theta_lg = Angle(chunk[0]);
                    c.theta_qg = Angle(chunk[1]);
                    c.theta_qa = Angle(chunk[2]);
                    c.theta_la = Angle(chunk[3]);
                }
            }
            c
        })
        .collect();
    MeasurementPlan::new(tag, captures, source_intensity).expect("nonempty plan")
}

/// Registers one scalar leaf per free angle.
pub fn register_angles(tape: &mut Tape, tag: ConditionTag, values: &[f64]) -> AnglePack {
    assert_eq!(values.len() % tag.free_angles(), 0);
    let leaves = values.iter().map(|&v| tape.scalar(v)).collect();
    AnglePack { tag, leaves }
}

/// Quarter-wave plate matrix as a 4x4 tape node built from the angle
/// leaf.
fn qwp_node(tape: &mut Tape, theta: NodeId) -> NodeId {
    let t2 = tape.scale(theta, 2.0);
    let c = tape.cos(t2);
    let s = tape.sin(t2);
    let c2 = tape.mul(c, c);
    let sc = tape.mul(s, c);
    let s2 = tape.mul(s, s);
    let ns = tape.scale(s, -1.0);
    let nc = tape.scale(c, -1.0);
    let one = tape.scalar(1.0);
    let zero = tape.scalar(0.0);
    let entries = [
        one, zero, zero, zero, //
        zero, c2, sc, ns, //
        zero, sc, s2, c, //
        zero, s, nc, zero,
    ];
    let col = tape.concat_rows(&entries);
    tape.reshape(col, 4, 4)
}

/// Stokes state leaving the generator, as a 4x1 node.
fn generator_node(
    tape: &mut Tape,
    tag: ConditionTag,
    chunk: &[NodeId],
    source: f64,
) -> NodeId {
    let lp_column = |tape: &mut Tape, theta: NodeId| {
        let t2 = tape.scale(theta, 2.0);
        let c = tape.cos(t2);
        let s = tape.sin(t2);
        let one = tape.scalar(1.0);
        let zero = tape.scalar(0.0);
        let col = tape.concat_rows(&[one, c, s, zero]);
        tape.scale(col, 0.5 * source)
    };
    match tag {
        ConditionTag::Lp => lp_column(tape, chunk[0]),
        ConditionTag::Qwp => {
            // Fixed polarizer at reference: L(0)·[L,0,0,0] = (L/2)[1,1,0,0].
            let base = tape.leaf(4, 1, vec![0.5 * source, 0.5 * source, 0.0, 0.0]);
            let q = qwp_node(tape, chunk[0]);
            tape.matmul(q, base)
        }
        ConditionTag::LpQwp => {
            let lp = lp_column(tape, chunk[0]);
            let q = qwp_node(tape, chunk[1]);
            tape.matmul(q, lp)
        }
    }
}

/// First row of the analyzer stack, as a 1x4 node.
fn analyzer_node(tape: &mut Tape, tag: ConditionTag, chunk: &[NodeId]) -> NodeId {
    let lp_row = |tape: &mut Tape, theta: NodeId| {
        let t2 = tape.scale(theta, 2.0);
        let c = tape.cos(t2);
        let s = tape.sin(t2);
        let one = tape.scalar(1.0);
        let zero = tape.scalar(0.0);
        let col = tape.concat_rows(&[one, c, s, zero]);
        let row = tape.transpose(col);
        tape.scale(row, 0.5)
    };
    match tag {
        ConditionTag::Lp => lp_row(tape, chunk[1]),
        ConditionTag::Qwp => {
            let base = tape.leaf(1, 4, vec![0.5, 0.5, 0.0, 0.0]);
            let q = qwp_node(tape, chunk[1]);
            tape.matmul(base, q)
        }
        ConditionTag::LpQwp => {
            let row = lp_row(tape, chunk[3]);
            let q = qwp_node(tape, chunk[2]);
            tape.matmul(row, q)
        }
    }
}

/// K x 16 sensing matrix on the tape. Row k is the flattened outer
/// product of the analyzer row and the generator Stokes state, so the
/// predicted intensities for a flattened sample are `vec(M)·Wᵀ`.
pub fn sensing_matrix(tape: &mut Tape, pack: &AnglePack, source: f64) -> NodeId {
    let per = pack.tag.free_angles();
    assert!(!pack.leaves.is_empty(), "plan needs at least one capture");
    let rows: Vec<NodeId> = pack
        .leaves
        .chunks(per)
        .map(|chunk| {
            let p = generator_node(tape, pack.tag, chunk, source);
            let a = analyzer_node(tape, pack.tag, chunk);
            let a_col = tape.transpose(a);
            let p_row = tape.transpose(p);
            let outer = tape.matmul(a_col, p_row);
            tape.reshape(outer, 1, 16)
        })
        .collect();
    tape.concat_rows(&rows)
}

/// Simulated intensity vector (1xK) for one sample through the sensing
/// matrix. Matches `polarimeter::intensity` at the same angles to 1e-12
/// while staying differentiable with respect to them.
pub fn forward_measure(tape: &mut Tape, m: &MuellerMatrix, sensing: NodeId) -> NodeId {
    let flat = tape.leaf(1, 16, m.flatten().to_vec());
    let wt = tape.transpose(sensing);
    tape.matmul(flat, wt)
}
