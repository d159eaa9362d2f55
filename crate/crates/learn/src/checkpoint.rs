//! Checkpoint file: the trained plan, classifier, and loss history.

use crate::mlp::ClassifierParams;
use crate::train::{HistoryEntry, TrainOutput};
use polarimeter::MeasurementPlan;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct ClassifierWire {
    widths: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LossPoint {
    step: usize,
    loss: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointWire {
    plan: MeasurementPlan,
    classifier: ClassifierWire,
    history: Vec<LossPoint>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("checkpoint widths do not match the stored weight count")]
    Inconsistent,
}

pub fn save_checkpoint(path: &Path, output: &TrainOutput) -> Result<(), CheckpointError> {
    let wire = CheckpointWire {
        plan: output.plan.clone(),
        classifier: ClassifierWire {
            widths: output.classifier.widths.clone(),
            weights: output.classifier.to_flat(),
        },
        history: output
            .history
            .iter()
            .map(|h| LossPoint {
                step: h.step,
                loss: h.loss,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&wire)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<TrainOutput, CheckpointError> {
    let wire: CheckpointWire = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let input = *wire.classifier.widths.first().ok_or(CheckpointError::Inconsistent)?;
    let template = ClassifierParams::zeros(input);
    if wire.classifier.widths != template.widths
        || wire.classifier.weights.len() != template.flat_len()
    {
        return Err(CheckpointError::Inconsistent);
    }
    Ok(TrainOutput {
        plan: wire.plan,
        classifier: ClassifierParams::from_flat(input, &wire.classifier.weights),
        history: wire
            .history
            .iter()
            .map(|p| HistoryEntry {
                step: p.step,
                loss: p.loss,
                batch_accuracy: f64::NAN,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::uniform_plan;
    use polarimeter::ConditionTag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_preserves_plan_and_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let output = TrainOutput {
            plan: uniform_plan(ConditionTag::Qwp, 3).unwrap(),
            classifier: ClassifierParams::init(3, &mut rng),
            history: vec![HistoryEntry {
                step: 0,
                loss: 1.25,
                batch_accuracy: 0.5,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&path, &output).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.classifier.weights, output.classifier.weights);
        assert_eq!(back.classifier.biases, output.classifier.biases);
        assert_eq!(back.plan.condition, output.plan.condition);
        assert_eq!(back.history.len(), 1);
        assert_eq!(back.history[0].loss, 1.25);
    }

    #[test]
    fn truncated_weight_vector_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let output = TrainOutput {
            plan: uniform_plan(ConditionTag::Qwp, 2).unwrap(),
            classifier: ClassifierParams::init(2, &mut rng),
            history: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&path, &output).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut wire: serde_json::Value = serde_json::from_str(&text).unwrap();
        wire["classifier"]["weights"]
            .as_array_mut()
            .unwrap()
            .pop();
        std::fs::write(&path, serde_json::to_string(&wire).unwrap()).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::Inconsistent)
        ));
    }
}
