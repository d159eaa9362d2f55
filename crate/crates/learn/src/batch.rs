//! Minibatch assembly with per-batch class weights.

use materials_synth::{augment_intensity, augment_rotation, MaterialSample};
use mueller_core::MuellerMatrix;
use rand::Rng;

pub const BATCH_SIZE: usize = 128;

/// One training minibatch: augmented matrices, labels, and the
/// per-batch class weights.
pub struct Minibatch {
    pub matrices: Vec<MuellerMatrix>,
    pub labels: Vec<usize>,
    pub class_weights: [f64; 5],
}

/// Per-batch weights: for a present class `c`, `w_c = B/(P·n_c)` with
/// `P` the number of classes present; absent classes get weight 0. A
/// balanced batch therefore reduces to unit weights.
pub fn class_weights(labels: &[usize]) -> [f64; 5] {
    let mut counts = [0usize; 5];
    for &y in labels {
        counts[y] += 1;
    }
    let present = counts.iter().filter(|&&n| n > 0).count();
    let mut w = [0.0; 5];
    for c in 0..5 {
        if counts[c] > 0 {
            w[c] = labels.len() as f64 / (present as f64 * counts[c] as f64);
        }
    }
    w
}

/// Draws `batch_size` samples uniformly with replacement from the
/// training split and augments each by a random intensity scale
/// followed by a random in-plane rotation.
pub fn make_minibatch<R: Rng>(
    train: &[&MaterialSample],
    rng: &mut R,
    batch_size: usize,
) -> Minibatch {
    assert!(!train.is_empty(), "train split is empty");
    let mut matrices = Vec::with_capacity(batch_size);
    let mut labels = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let s = train[rng.gen_range(0..train.len())];
        let m = augment_intensity(&s.mueller, rng);
        let m = augment_rotation(&m, rng);
        matrices.push(m);
        labels.push(s.category.index());
    }
    let class_weights = class_weights(&labels);
    Minibatch {
        matrices,
        labels,
        class_weights,
    }
}
