//! End-to-end training: joint optimization of plan angles and the
//! classifier, plus the frozen-angle baselines and evaluation.

use crate::adam::AdamState;
use crate::batch::{make_minibatch, BATCH_SIZE};
use crate::measure::{plan_from_angles, register_angles, sensing_matrix};
use crate::mlp::{argmax, mlp_forward_tape, register_classifier, ClassifierParams, NUM_CLASSES};
use crate::tape::Tape;
use materials_synth::{Dataset, MaterialSample};
use mueller_core::Angle;
use polarimeter::{intensity, CaptureConfig, ConditionTag, MeasurementPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the plan angles are chosen.
///
/// * `Random` - drawn once per trial, frozen.
/// * `Uniform` - fixed classical schedule, frozen.
/// * `Optimized` - trained jointly with the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Random,
    Uniform,
    Optimized,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Random => "Random",
            Regime::Uniform => "Uniform",
            Regime::Optimized => "Optimized",
        }
    }
}

/// Training hyperparameters. Defaults: 5000 steps, batch 128, Adam with
/// classifier lr 1e-3 and angle lr 1e-2; the angle rate decays linearly
/// to zero over the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyper {
    pub steps: usize,
    pub batch_size: usize,
    pub classifier_lr: f64,
    pub angle_lr: f64,
    pub source_intensity: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            steps: 5000,
            batch_size: BATCH_SIZE,
            classifier_lr: 1e-3,
            angle_lr: 1e-2,
            source_intensity: 1.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("a plan needs at least one capture")]
    ZeroCaptures,
    #[error("the uniform schedule is not defined for LP+QWP")]
    UniformUnsupported,
    #[error("the LP uniform grid has 16 entries, requested {0}")]
    GridExhausted(usize),
    #[error("split is empty")]
    EmptySplit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    pub loss: f64,
    pub batch_accuracy: f64,
}

pub struct TrainOutput {
    pub plan: MeasurementPlan,
    pub classifier: ClassifierParams,
    pub history: Vec<HistoryEntry>,
}

/// Classical fixed schedules.
///
/// LP: the first K pairs of the lexicographic product
/// {0°,45°,90°,135°} x {0°,45°,90°,135°} (generator-major), at most 16.
/// QWP: the dual-rotating-compensator schedule θ_Qg = k·180°/K with the
/// analyzer-side plate at five times the generator angle, mod 180°.
pub fn uniform_plan(tag: ConditionTag, k: usize) -> Result<MeasurementPlan, TrainError> {
    if k == 0 {
        return Err(TrainError::ZeroCaptures);
    }
    let captures = match tag {
        ConditionTag::LpQwp => return Err(TrainError::UniformUnsupported),
        ConditionTag::Lp => {
            if k > 16 {
                return Err(TrainError::GridExhausted(k));
            }
            let grid = [0.0, 45.0, 90.0, 135.0];
            (0..k)
                .map(|i| {
                    let mut c = CaptureConfig::reference();
                    c.theta_lg = Angle::from_degrees(grid[i / 4]);
                    c.theta_la = Angle::from_degrees(grid[i % 4]);
                    c
                })
                .collect()
        }
        ConditionTag::Qwp => (0..k)
            .map(|i| {
                let qg = i as f64 * 180.0 / k as f64;
                let mut c = CaptureConfig::reference();
                c.theta_qg = Angle::from_degrees(qg);
                c.theta_qa = Angle::from_degrees((5.0 * qg).rem_euclid(180.0));
                c
            })
            .collect(),
    };
    MeasurementPlan::new(tag, captures, 1.0).map_err(|_| TrainError::ZeroCaptures)
}

/// Loss and batch accuracy of one recorded step, plus the flat
/// gradients for both parameter groups.
struct StepResult {
    loss: f64,
    batch_accuracy: f64,
    angle_grads: Vec<f64>,
    classifier_grads: Vec<f64>,
}

fn run_step(
    tag: ConditionTag,
    angles: &[f64],
    classifier: &ClassifierParams,
    batch: &crate::batch::Minibatch,
    source: f64,
) -> StepResult {
    let b = batch.matrices.len();
    let mut tape = Tape::new();
    let pack = register_angles(&mut tape, tag, angles);
    let w = sensing_matrix(&mut tape, &pack, source);
    let flat: Vec<f64> = batch
        .matrices
        .iter()
        .flat_map(|m| m.flatten())
        .collect();
    let mats = tape.leaf(b, 16, flat);
    let wt = tape.transpose(w);
    let x = tape.matmul(mats, wt);
    let leaves = register_classifier(&mut tape, classifier);
    let logits = mlp_forward_tape(&mut tape, &leaves, x);
    let divisor: f64 = batch.labels.iter().map(|&y| batch.class_weights[y]).sum();
    let loss = tape.weighted_cross_entropy(logits, &batch.labels, &batch.class_weights, divisor);

    let correct = batch
        .labels
        .iter()
        .enumerate()
        .filter(|(i, &y)| argmax(&tape.value(logits)[i * NUM_CLASSES..(i + 1) * NUM_CLASSES]) == y)
        .count();

    let g = tape.backward(loss);
    let angle_grads = pack.leaves.iter().map(|&id| g.wrt(id)[0]).collect();
    let mut classifier_grads = Vec::with_capacity(classifier.flat_len());
    for l in 0..classifier.num_layers() {
        classifier_grads.extend_from_slice(g.wrt(leaves.weights[l]));
        classifier_grads.extend_from_slice(g.wrt(leaves.biases[l]));
    }
    StepResult {
        loss: tape.scalar_value(loss),
        batch_accuracy: correct as f64 / b as f64,
        angle_grads,
        classifier_grads,
    }
}

/// Runs one training trial. Deterministic given `seed`; the returned
/// plan carries the frozen or trained angles (not canonicalized, so
/// frozen regimes return the initial draw bit-exactly).
pub fn train(
    dataset: &Dataset,
    tag: ConditionTag,
    regime: Regime,
    k: usize,
    seed: u64,
    hyper: &Hyper,
) -> Result<TrainOutput, TrainError> {
    if k == 0 {
        return Err(TrainError::ZeroCaptures);
    }
    let train_split = dataset.train_samples();
    if train_split.is_empty() {
        return Err(TrainError::EmptySplit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut angles: Vec<f64> = match regime {
        Regime::Uniform => {
            let plan = uniform_plan(tag, k)?;
            crate::measure::angles_from_plan(&plan)
        }
        // Least-informative initialization over the angular period.
        Regime::Random | Regime::Optimized => (0..k * tag.free_angles())
            .map(|_| rng.gen_range(0.0..PI))
            .collect(),
    };
    let mut classifier = ClassifierParams::init(k, &mut rng);
    let mut classifier_flat = classifier.to_flat();
    let mut adam_classifier = AdamState::new(classifier_flat.len(), hyper.classifier_lr);
    let mut adam_angles = AdamState::new(angles.len(), hyper.angle_lr);

    let mut history = Vec::with_capacity(hyper.steps);
    for step in 0..hyper.steps {
        let batch = make_minibatch(&train_split, &mut rng, hyper.batch_size);
        let result = run_step(tag, &angles, &classifier, &batch, hyper.source_intensity);
        history.push(HistoryEntry {
            step,
            loss: result.loss,
            batch_accuracy: result.batch_accuracy,
        });
        adam_classifier.step(&mut classifier_flat, &result.classifier_grads);
        classifier = ClassifierParams::from_flat(k, &classifier_flat);
        if regime == Regime::Optimized {
            // Linear decay to zero: the design explores early and
            // freezes late, so the classifier finishes converging
            // against stable angles just like the frozen regimes.
            adam_angles.lr = hyper.angle_lr * (1.0 - step as f64 / hyper.steps as f64);
            adam_angles.step(&mut angles, &result.angle_grads);
        }
    }

    Ok(TrainOutput {
        plan: plan_from_angles(tag, &angles, hyper.source_intensity),
        classifier,
        history,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `confusion[true][predicted]` counts.
    pub confusion: [[u32; NUM_CLASSES]; NUM_CLASSES],
}

/// Accuracy and confusion counts on a split, no augmentation.
pub fn evaluate(
    classifier: &ClassifierParams,
    plan: &MeasurementPlan,
    split: &[&MaterialSample],
) -> Result<EvalReport, TrainError> {
    evaluate_with_rotations(classifier, plan, split, 0)
}

/// Robustness variant: when `rotations > 0`, every sample is also
/// scored at that many evenly spaced in-plane orientations and all
/// orientations count toward accuracy.
pub fn evaluate_with_rotations(
    classifier: &ClassifierParams,
    plan: &MeasurementPlan,
    split: &[&MaterialSample],
    rotations: usize,
) -> Result<EvalReport, TrainError> {
    if split.is_empty() {
        return Err(TrainError::EmptySplit);
    }
    assert_eq!(
        classifier.input_width(),
        plan.len(),
        "classifier width must match the capture count"
    );
    let orientations: Vec<f64> = if rotations == 0 {
        vec![0.0]
    } else {
        (0..rotations).map(|j| j as f64 * PI / rotations as f64).collect()
    };
    let mut confusion = [[0u32; NUM_CLASSES]; NUM_CLASSES];
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in split {
        for &rho in &orientations {
            let m = if rho == 0.0 {
                s.mueller
            } else {
                mueller_core::rotate_mueller(&s.mueller, Angle(rho))
            };
            let x: Vec<f64> = plan
                .captures
                .iter()
                .map(|c| intensity(&m, c, plan.condition, plan.source_intensity))
                .collect();
            let pred = classifier.predict(&x);
            let truth = s.category.index();
            confusion[truth][pred] += 1;
            if pred == truth {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(EvalReport {
        accuracy: correct as f64 / total as f64,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mueller_core::MuellerMatrix;

    #[test]
    fn uniform_lp_16_is_the_full_grid() {
        let plan = uniform_plan(ConditionTag::Lp, 16).unwrap();
        let grid = [0.0, 45.0, 90.0, 135.0];
        for (i, c) in plan.captures.iter().enumerate() {
            assert!((c.theta_lg.degrees() - grid[i / 4]).abs() < 1e-12);
            assert!((c.theta_la.degrees() - grid[i % 4]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_lp_17_is_exhausted() {
        assert!(matches!(
            uniform_plan(ConditionTag::Lp, 17),
            Err(TrainError::GridExhausted(17))
        ));
    }

    #[test]
    fn uniform_qwp_4_cycles_through_45_degree_steps() {
        let plan = uniform_plan(ConditionTag::Qwp, 4).unwrap();
        let expect = [0.0, 45.0, 90.0, 135.0];
        for (i, c) in plan.captures.iter().enumerate() {
            assert!((c.theta_qg.degrees() - expect[i]).abs() < 1e-12);
            // 5θ mod 180 revisits the same four angles.
            assert!((c.theta_qa.degrees() - (5.0 * expect[i]).rem_euclid(180.0)).abs() < 1e-12);
        }
        assert!((plan.captures[1].theta_qa.degrees() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_lp_qwp_is_unsupported() {
        assert!(matches!(
            uniform_plan(ConditionTag::LpQwp, 4),
            Err(TrainError::UniformUnsupported)
        ));
    }

    #[test]
    fn always_class_zero_classifier_scores_chance() {
        let mut classifier = ClassifierParams::zeros(1);
        classifier.biases[4][0] = 1.0;
        let plan = uniform_plan(ConditionTag::Qwp, 1).unwrap();
        let samples: Vec<MaterialSample> = (0..NUM_CLASSES)
            .map(|c| MaterialSample {
                mueller: MuellerMatrix::depolarizer(),
                category: materials_synth::MaterialCategory::ALL[c],
                material_id: c as u32,
            })
            .collect();
        let refs: Vec<&MaterialSample> = samples.iter().collect();
        let report = evaluate(&classifier, &plan, &refs).unwrap();
        assert!((report.accuracy - 0.2).abs() < 1e-12);
        for (truth, row) in report.confusion.iter().enumerate() {
            assert_eq!(row[0], 1, "row {truth} concentrated in column 0");
            assert_eq!(row[1..].iter().sum::<u32>(), 0);
        }
    }

    #[test]
    fn empty_split_is_an_error() {
        let classifier = ClassifierParams::zeros(1);
        let plan = uniform_plan(ConditionTag::Qwp, 1).unwrap();
        assert!(matches!(
            evaluate(&classifier, &plan, &[]),
            Err(TrainError::EmptySplit)
        ));
    }
}
