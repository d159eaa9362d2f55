//! Learnable measurement design: reverse-mode autodiff, a differentiable
//! ellipsometer forward model, an MLP material classifier, and the
//! training loop that optimizes rotation angles jointly with the
//! classifier weights.

mod adam;
mod batch;
mod checkpoint;
mod measure;
mod mlp;
mod tape;
mod train;

pub use adam::AdamState;
pub use batch::{class_weights, make_minibatch, Minibatch, BATCH_SIZE};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use measure::{
    angles_from_plan, forward_measure, plan_from_angles, register_angles, sensing_matrix,
    AnglePack,
};
pub use mlp::{
    argmax, mlp_forward_tape, register_classifier, ClassifierParams, MlpLeaves, HIDDEN_WIDTHS,
    NUM_CLASSES,
};
pub use tape::{Gradients, NodeId, Tape};
pub use train::{
    evaluate, evaluate_with_rotations, train, uniform_plan, EvalReport, HistoryEntry, Hyper,
    Regime, TrainError, TrainOutput,
};
