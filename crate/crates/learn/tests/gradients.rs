//! End-to-end gradient exactness: the tape derivative of the full
//! pipeline (angles -> sensing matrix -> intensities -> MLP -> weighted
//! cross-entropy) against central finite differences.

use learn::{
    class_weights, mlp_forward_tape, register_angles, register_classifier, sensing_matrix,
    ClassifierParams, NodeId, Tape,
};
use polarimeter::ConditionTag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

struct Pipeline {
    tape: Tape,
    loss: NodeId,
    leaves: Vec<NodeId>,
}

/// Random minibatch-of-two loss with every parameter registered as a
/// leaf. Labels and weights are fixed so only continuous inputs vary.
fn build_pipeline(rng: &mut ChaCha8Rng, tag: ConditionTag, k: usize) -> Pipeline {
    let batch = 2;
    let mut tape = Tape::new();
    let angles: Vec<f64> = (0..k * tag.free_angles())
        .map(|_| rng.gen_range(0.0..PI))
        .collect();
    let pack = register_angles(&mut tape, tag, &angles);
    let w = sensing_matrix(&mut tape, &pack, 1.0);

    let flat: Vec<f64> = (0..batch * 16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mats = tape.leaf(batch, 16, flat);
    let wt = tape.transpose(w);
    let x = tape.matmul(mats, wt);

    let params = ClassifierParams::init(k, rng);
    let mlp = register_classifier(&mut tape, &params);
    let logits = mlp_forward_tape(&mut tape, &mlp, x);

    let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..5)).collect();
    let weights = class_weights(&labels);
    let divisor: f64 = labels.iter().map(|&y| weights[y]).sum();
    let loss = tape.weighted_cross_entropy(logits, &labels, &weights, divisor);

    let mut leaves = pack.leaves.clone();
    leaves.push(mats);
    leaves.extend(&mlp.weights);
    leaves.extend(&mlp.biases);
    Pipeline { tape, loss, leaves }
}

#[test]
fn tape_gradients_match_central_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tags = [ConditionTag::Lp, ConditionTag::Qwp, ConditionTag::LpQwp];
    for config in 0..50 {
        let tag = tags[config % 3];
        let k = 1 + config % 4;
        let mut p = build_pipeline(&mut rng, tag, k);
        let grads = p.tape.backward(p.loss);
        let h = 1e-6;
        for &leaf in &p.leaves {
            let base = p.tape.value(leaf).to_vec();
            let analytic = grads.wrt(leaf).to_vec();
            for i in 0..base.len() {
                let mut probe = base.clone();
                probe[i] = base[i] + h;
                p.tape.set_leaf(leaf, &probe);
                p.tape.replay();
                let fp = p.tape.scalar_value(p.loss);
                probe[i] = base[i] - h;
                p.tape.set_leaf(leaf, &probe);
                p.tape.replay();
                let fm = p.tape.scalar_value(p.loss);
                let fd = (fp - fm) / (2.0 * h);
                let g = analytic[i];
                if g.abs() < 1e-4 {
                    assert!(
                        (g - fd).abs() < 1e-8,
                        "config {config} entry {i}: tape {g} fd {fd}"
                    );
                } else {
                    let rel = (g - fd).abs() / g.abs();
                    assert!(
                        rel < 1e-4,
                        "config {config} entry {i}: tape {g} fd {fd} rel {rel}"
                    );
                }
            }
            p.tape.set_leaf(leaf, &base);
            p.tape.replay();
        }
    }
}

#[test]
fn gradient_of_masked_relu_paths_is_zero_end_to_end() {
    // A classifier whose first layer drives every unit negative blocks
    // all gradient flow into the angles.
    let mut tape = Tape::new();
    let pack = register_angles(&mut tape, ConditionTag::Qwp, &[0.3, 1.1]);
    let w = sensing_matrix(&mut tape, &pack, 1.0);
    let mats = tape.leaf(1, 16, vec![0.5; 16]);
    let wt = tape.transpose(w);
    let x = tape.matmul(mats, wt);
    let mut params = ClassifierParams::zeros(1);
    for b in &mut params.biases[0] {
        *b = -10.0;
    }
    let mlp = register_classifier(&mut tape, &params);
    let logits = mlp_forward_tape(&mut tape, &mlp, x);
    let loss = tape.weighted_cross_entropy(logits, &[0], &[1.0; 5], 1.0);
    let g = tape.backward(loss);
    for &leaf in &pack.leaves {
        assert_eq!(g.wrt(leaf)[0], 0.0);
    }
}
