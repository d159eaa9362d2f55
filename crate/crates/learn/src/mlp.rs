//! The material classifier: a fixed-shape MLP with ReLU activations.
//! Hidden widths 64, 32, 32, 16; output width 5 (one logit per
//! category). The input width equals the number of captures K.

use crate::tape::{NodeId, Tape};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub const HIDDEN_WIDTHS: [usize; 4] = [64, 32, 32, 16];
pub const NUM_CLASSES: usize = 5;

/// Weights and biases of the five affine layers. `weights[l]` is stored
/// row-major with shape `widths[l] x widths[l+1]` so a batch of row
/// vectors propagates as `x·W + b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub widths: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl ClassifierParams {
    pub fn layer_widths(input: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(HIDDEN_WIDTHS);
        w.push(NUM_CLASSES);
        w
    }

    pub fn zeros(input: usize) -> Self {
        let widths = Self::layer_widths(input);
        let weights = widths
            .windows(2)
            .map(|p| vec![0.0; p[0] * p[1]])
            .collect();
        let biases = widths[1..].iter().map(|&n| vec![0.0; n]).collect();
        ClassifierParams {
            widths,
            weights,
            biases,
        }
    }

    /// He-normal initialization, biases zero.
    pub fn init<R: Rng>(input: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input);
        for (l, w) in p.weights.iter_mut().enumerate() {
            let fan_in = p.widths[l] as f64;
            let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).unwrap();
            for x in w.iter_mut() {
                *x = normal.sample(rng);
            }
        }
        p
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    /// Total parameter count (weights then biases, layer by layer).
    pub fn flat_len(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flattening order: per layer, weights then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        for l in 0..self.num_layers() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    pub fn from_flat(input: usize, flat: &[f64]) -> Self {
        let mut p = Self::zeros(input);
        assert_eq!(flat.len(), p.flat_len(), "flat parameter length mismatch");
        let mut at = 0;
        for l in 0..p.num_layers() {
            let wl = p.weights[l].len();
            p.weights[l].copy_from_slice(&flat[at..at + wl]);
            at += wl;
            let bl = p.biases[l].len();
            p.biases[l].copy_from_slice(&flat[at..at + bl]);
            at += bl;
        }
        p
    }

    /// Plain (non-tape) forward pass for evaluation.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_width(), "input width mismatch");
        let mut h = x.to_vec();
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut z = self.biases[l].clone();
            for i in 0..n_in {
                let hv = h[i];
                if hv == 0.0 {
                    continue;
                }
                let row = &self.weights[l][i * n_out..(i + 1) * n_out];
                for j in 0..n_out {
                    z[j] += hv * row[j];
                }
            }
            if l < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            h = z;
        }
        h
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let logits = self.forward(x);
        argmax(&logits)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Classifier parameters registered as tape leaves.
pub struct MlpLeaves {
    pub weights: Vec<NodeId>,
    pub biases: Vec<NodeId>,
}

pub fn register_classifier(tape: &mut Tape, params: &ClassifierParams) -> MlpLeaves {
    let weights = (0..params.num_layers())
        .map(|l| {
            tape.leaf(
                params.widths[l],
                params.widths[l + 1],
                params.weights[l].clone(),
            )
        })
        .collect();
    let biases = (0..params.num_layers())
        .map(|l| tape.leaf(1, params.widths[l + 1], params.biases[l].clone()))
        .collect();
    MlpLeaves { weights, biases }
}

/// Batched forward pass on the tape: `x` is B x K, the result B x 5.
pub fn mlp_forward_tape(tape: &mut Tape, leaves: &MlpLeaves, x: NodeId) -> NodeId {
    let last = leaves.weights.len() - 1;
    let mut h = x;
    for l in 0..leaves.weights.len() {
        let z = tape.matmul(h, leaves.weights[l]);
        let z = tape.add_row(z, leaves.biases[l]);
        h = if l < last { tape.relu(z) } else { z };
    }
    h
}
