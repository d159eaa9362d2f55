//! Reverse-mode autodiff over a flat tape of tensor-valued nodes.
//!
//! Nodes are pushed in topological order, so the backward sweep is a
//! single reverse pass. Values are dense row-major buffers; scalars are
//! 1x1 tensors. The contract is gradient exactness with respect to the
//! recorded computation, validated against central finite differences.

/// Handle to a node on a [`Tape`]. Only valid for the tape it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sin(NodeId),
    Cos(NodeId),
    Relu(NodeId),
    MatMul(NodeId, NodeId),
    Transpose(NodeId),
    Reshape(NodeId),
    AddRow(NodeId, NodeId),
    ConcatRows(Vec<NodeId>),
    WeightedCe {
        logits: NodeId,
        labels: Vec<usize>,
        weights: Vec<f64>,
        divisor: f64,
    },
}

struct Node {
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints of every node after a backward pass, indexed by [`NodeId`].
pub struct Gradients {
    adjoints: Vec<Vec<f64>>,
}

impl Gradients {
    /// Gradient of the loss with respect to the node's value buffer.
    pub fn wrt(&self, id: NodeId) -> &[f64] {
        &self.adjoints[id.0]
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * m..(p + 1) * m];
            let orow = &mut out[i * m..(i + 1) * m];
            for j in 0..m {
                orow[j] += av * brow[j];
            }
        }
    }
    out
}

fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    /// Scalar value of a 1x1 node.
    pub fn scalar_value(&self, id: NodeId) -> f64 {
        let n = &self.nodes[id.0];
        assert_eq!((n.rows, n.cols), (1, 1), "node is not a scalar");
        n.value[0]
    }

    /// Overwrites a leaf's value in place, keeping the node graph. Used
    /// by the finite-difference checks; shapes must match.
    pub fn set_leaf(&mut self, id: NodeId, data: &[f64]) {
        let n = &mut self.nodes[id.0];
        assert!(matches!(n.op, Op::Leaf), "only leaves can be reset");
        assert_eq!(n.value.len(), data.len());
        n.value.copy_from_slice(data);
    }

    /// Recomputes every non-leaf value in tape order. Valid because the
    /// tape is topologically sorted by construction.
    pub fn replay(&mut self) {
        for i in 0..self.nodes.len() {
            if matches!(self.nodes[i].op, Op::Leaf) {
                continue;
            }
            let value = self.eval(i);
            self.nodes[i].value = value;
        }
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<f64>, op: Op) -> NodeId {
        assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            rows,
            cols,
            value,
            op,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, rows: usize, cols: usize, data: Vec<f64>) -> NodeId {
        self.push(rows, cols, data, Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> NodeId {
        self.leaf(1, 1, vec![v])
    }

    fn binary_same_shape(&self, a: NodeId, b: NodeId) -> (usize, usize) {
        let (ra, ca) = self.shape(a);
        let (rb, cb) = self.shape(b);
        assert_eq!((ra, ca), (rb, cb), "shape mismatch");
        (ra, ca)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.binary_same_shape(a, b);
        let v = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x + y)
            .collect();
        self.push(r, c, v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.binary_same_shape(a, b);
        let v = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x - y)
            .collect();
        self.push(r, c, v, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.binary_same_shape(a, b);
        let v = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x * y)
            .collect();
        self.push(r, c, v, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let (r, c) = self.shape(a);
        let v = self.value(a).iter().map(|x| k * x).collect();
        self.push(r, c, v, Op::Scale(a, k))
    }

    pub fn sin(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let v = self.value(a).iter().map(|x| x.sin()).collect();
        self.push(r, c, v, Op::Sin(a))
    }

    pub fn cos(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let v = self.value(a).iter().map(|x| x.cos()).collect();
        self.push(r, c, v, Op::Cos(a))
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let v = self.value(a).iter().map(|x| x.max(0.0)).collect();
        self.push(r, c, v, Op::Relu(a))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (n, ka) = self.shape(a);
        let (kb, m) = self.shape(b);
        assert_eq!(ka, kb, "inner dimension mismatch");
        let v = matmul(self.value(a), self.value(b), n, ka, m);
        self.push(n, m, v, Op::MatMul(a, b))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let v = transpose(self.value(a), r, c);
        self.push(c, r, v, Op::Transpose(a))
    }

    /// Row-major reinterpretation; element count must be preserved.
    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> NodeId {
        let (r, c) = self.shape(a);
        assert_eq!(r * c, rows * cols, "reshape changes element count");
        let v = self.value(a).to_vec();
        self.push(rows, cols, v, Op::Reshape(a))
    }

    /// Adds a 1xC row vector to every row of an RxC matrix.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let (rr, rc) = self.shape(row);
        assert_eq!((rr, rc), (1, c), "broadcast row shape mismatch");
        let rv = self.value(row).to_vec();
        let v = self
            .value(a)
            .iter()
            .enumerate()
            .map(|(i, x)| x + rv[i % c])
            .collect();
        self.push(r, c, v, Op::AddRow(a, row))
    }

    /// Stacks nodes with a common column count along the row axis.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty());
        let (_, cols) = self.shape(parts[0]);
        let mut rows = 0;
        let mut v = Vec::new();
        for &p in parts {
            let (r, c) = self.shape(p);
            assert_eq!(c, cols, "column count mismatch in concat");
            rows += r;
            v.extend_from_slice(self.value(p));
        }
        self.push(rows, cols, v, Op::ConcatRows(parts.to_vec()))
    }

    /// Weighted cross-entropy over a batch of logit rows.
    ///
    /// Per-sample loss is `w_{y_i} * (logsumexp(z_i) - z_i[y_i])`; the
    /// node value is the sum divided by `divisor`. Pass `divisor = 1`
    /// for the raw weighted sum, or the weight total for the
    /// weight-normalized mean.
    pub fn weighted_cross_entropy(
        &mut self,
        logits: NodeId,
        labels: &[usize],
        class_weights: &[f64],
        divisor: f64,
    ) -> NodeId {
        let (b, c) = self.shape(logits);
        assert_eq!(labels.len(), b, "one label per logit row");
        assert_eq!(class_weights.len(), c, "one weight per class");
        assert!(divisor != 0.0);
        let z = self.value(logits);
        let mut total = 0.0;
        for (i, &y) in labels.iter().enumerate() {
            assert!(y < c, "label out of range");
            let row = &z[i * c..(i + 1) * c];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            total += class_weights[y] * (lse - row[y]);
        }
        self.push(
            1,
            1,
            vec![total / divisor],
            Op::WeightedCe {
                logits,
                labels: labels.to_vec(),
                weights: class_weights.to_vec(),
                divisor,
            },
        )
    }

    fn eval(&self, i: usize) -> Vec<f64> {
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => node.value.clone(),
            Op::Add(a, b) => self
                .value(*a)
                .iter()
                .zip(self.value(*b))
                .map(|(x, y)| x + y)
                .collect(),
            Op::Sub(a, b) => self
                .value(*a)
                .iter()
                .zip(self.value(*b))
                .map(|(x, y)| x - y)
                .collect(),
            Op::Mul(a, b) => self
                .value(*a)
                .iter()
                .zip(self.value(*b))
                .map(|(x, y)| x * y)
                .collect(),
            Op::Scale(a, k) => self.value(*a).iter().map(|x| k * x).collect(),
            Op::Sin(a) => self.value(*a).iter().map(|x| x.sin()).collect(),
            Op::Cos(a) => self.value(*a).iter().map(|x| x.cos()).collect(),
            Op::Relu(a) => self.value(*a).iter().map(|x| x.max(0.0)).collect(),
            Op::MatMul(a, b) => {
                let (n, k) = self.shape(*a);
                let (_, m) = self.shape(*b);
                matmul(self.value(*a), self.value(*b), n, k, m)
            }
            Op::Transpose(a) => {
                let (r, c) = self.shape(*a);
                transpose(self.value(*a), r, c)
            }
            Op::Reshape(a) => self.value(*a).to_vec(),
            Op::AddRow(a, row) => {
                let (_, c) = self.shape(*a);
                let rv = self.value(*row);
                self.value(*a)
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x + rv[i % c])
                    .collect()
            }
            Op::ConcatRows(parts) => {
                let mut v = Vec::new();
                for p in parts {
                    v.extend_from_slice(self.value(*p));
                }
                v
            }
            Op::WeightedCe {
                logits,
                labels,
                weights,
                divisor,
            } => {
                let (_, c) = self.shape(*logits);
                let z = self.value(*logits);
                let mut total = 0.0;
                for (i, &y) in labels.iter().enumerate() {
                    let row = &z[i * c..(i + 1) * c];
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                    total += weights[y] * (lse - row[y]);
                }
                vec![total / divisor]
            }
        }
    }

    /// Backpropagates from a scalar loss node; returns every node's
    /// adjoint. The tape itself is left untouched and can be replayed.
    pub fn backward(&self, loss: NodeId) -> Gradients {
        let n = &self.nodes[loss.0];
        assert_eq!((n.rows, n.cols), (1, 1), "loss must be scalar");
        let mut adj: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|n| vec![0.0; n.value.len()])
            .collect();
        adj[loss.0][0] = 1.0;

        for i in (0..=loss.0).rev() {
            if adj[i].iter().all(|&g| g == 0.0) {
                continue;
            }
            // Taken to appease the borrow checker; restored after the match.
            let grad = std::mem::take(&mut adj[i]);
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    for (d, g) in adj[a.0].iter_mut().zip(&grad) {
                        *d += g;
                    }
                    for (d, g) in adj[b.0].iter_mut().zip(&grad) {
                        *d += g;
                    }
                }
                Op::Sub(a, b) => {
                    for (d, g) in adj[a.0].iter_mut().zip(&grad) {
                        *d += g;
                    }
                    for (d, g) in adj[b.0].iter_mut().zip(&grad) {
                        *d -= g;
                    }
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a).to_vec();
                    let bv = self.value(*b).to_vec();
                    for ((d, g), y) in adj[a.0].iter_mut().zip(&grad).zip(&bv) {
                        *d += g * y;
                    }
                    for ((d, g), x) in adj[b.0].iter_mut().zip(&grad).zip(&av) {
                        *d += g * x;
                    }
                }
                Op::Scale(a, k) => {
                    for (d, g) in adj[a.0].iter_mut().zip(&grad) {
                        *d += k * g;
                    }
                }
                Op::Sin(a) => {
                    let av = self.value(*a).to_vec();
                    for ((d, g), x) in adj[a.0].iter_mut().zip(&grad).zip(&av) {
                        *d += g * x.cos();
                    }
                }
                Op::Cos(a) => {
                    let av = self.value(*a).to_vec();
                    for ((d, g), x) in adj[a.0].iter_mut().zip(&grad).zip(&av) {
                        *d -= g * x.sin();
                    }
                }
                Op::Relu(a) => {
                    let av = self.value(*a).to_vec();
                    for ((d, g), x) in adj[a.0].iter_mut().zip(&grad).zip(&av) {
                        if *x > 0.0 {
                            *d += g;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (n, k) = self.shape(*a);
                    let (_, m) = self.shape(*b);
                    let bt = transpose(self.value(*b), k, m);
                    let da = matmul(&grad, &bt, n, m, k);
                    for (d, g) in adj[a.0].iter_mut().zip(&da) {
                        *d += g;
                    }
                    let at = transpose(self.value(*a), n, k);
                    let db = matmul(&at, &grad, k, n, m);
                    for (d, g) in adj[b.0].iter_mut().zip(&db) {
                        *d += g;
                    }
                }
                Op::Transpose(a) => {
                    let (r, c) = (node.rows, node.cols);
                    let gt = transpose(&grad, r, c);
                    for (d, g) in adj[a.0].iter_mut().zip(&gt) {
                        *d += g;
                    }
                }
                Op::Reshape(a) => {
                    for (d, g) in adj[a.0].iter_mut().zip(&grad) {
                        *d += g;
                    }
                }
                Op::AddRow(a, row) => {
                    let (_, c) = (node.rows, node.cols);
                    for (d, g) in adj[a.0].iter_mut().zip(&grad) {
                        *d += g;
                    }
                    for (j, g) in grad.iter().enumerate() {
                        adj[row.0][j % c] += g;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p.0].value.len();
                        for (d, g) in adj[p.0].iter_mut().zip(&grad[offset..offset + len]) {
                            *d += g;
                        }
                        offset += len;
                    }
                }
                Op::WeightedCe {
                    logits,
                    labels,
                    weights,
                    divisor,
                } => {
                    let (_, c) = self.shape(*logits);
                    let z = self.value(*logits).to_vec();
                    let g = grad[0] / divisor;
                    for (i, &y) in labels.iter().enumerate() {
                        let row = &z[i * c..(i + 1) * c];
                        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let exps: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
                        let s: f64 = exps.iter().sum();
                        let w = weights[y];
                        for j in 0..c {
                            let softmax = exps[j] / s;
                            let ind = if j == y { 1.0 } else { 0.0 };
                            adj[logits.0][i * c + j] += g * w * (softmax - ind);
                        }
                    }
                }
            }
            adj[i] = grad;
        }
        Gradients { adjoints: adj }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_chain_gradient() {
        // d/dx sin(x)*cos(x) = cos(2x)
        let mut t = Tape::new();
        let x = t.scalar(0.7);
        let s = t.sin(x);
        let c = t.cos(x);
        let y = t.mul(s, c);
        let g = t.backward(y);
        assert!((g.wrt(x)[0] - (2.0 * 0.7f64).cos()).abs() < 1e-14);
    }

    #[test]
    fn matmul_gradient_matches_finite_differences() {
        let mut t = Tape::new();
        let a = t.leaf(2, 3, vec![0.3, -1.2, 0.5, 2.0, 0.1, -0.7]);
        let b = t.leaf(3, 2, vec![1.0, 0.4, -0.3, 0.8, 0.2, -1.5]);
        let c = t.matmul(a, b);
        let sq = t.mul(c, c);
        let ones = t.leaf(4, 1, vec![1.0; 4]);
        let flat = t.reshape(sq, 1, 4);
        let loss = t.matmul(flat, ones);
        let g = t.backward(loss);

        let base: Vec<f64> = t.value(a).to_vec();
        for i in 0..base.len() {
            let h = 1e-6;
            let mut plus = base.clone();
            plus[i] += h;
            t.set_leaf(a, &plus);
            t.replay();
            let fp = t.scalar_value(loss);
            let mut minus = base.clone();
            minus[i] -= h;
            t.set_leaf(a, &minus);
            t.replay();
            let fm = t.scalar_value(loss);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (g.wrt(a)[i] - fd).abs() < 1e-6,
                "entry {i}: tape {} fd {}",
                g.wrt(a)[i],
                fd
            );
        }
    }

    #[test]
    fn relu_masks_gradient_exactly() {
        let mut t = Tape::new();
        let x = t.leaf(1, 3, vec![-1.0, 0.0, 2.0]);
        let r = t.relu(x);
        let w = t.leaf(3, 1, vec![1.0, 1.0, 1.0]);
        let loss = t.matmul(r, w);
        let g = t.backward(loss);
        assert_eq!(g.wrt(x), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn uniform_logits_unit_weights_give_ln5() {
        let mut t = Tape::new();
        let z = t.leaf(1, 5, vec![0.0; 5]);
        let loss = t.weighted_cross_entropy(z, &[2], &[1.0; 5], 1.0);
        assert!((t.scalar_value(loss) - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logit_gives_near_zero_loss() {
        let mut t = Tape::new();
        let mut z = vec![0.0; 5];
        z[3] = 1e6;
        let z = t.leaf(1, 5, z);
        let loss = t.weighted_cross_entropy(z, &[3], &[1.0; 5], 1.0);
        assert!(t.scalar_value(loss).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_gradient_is_softmax_minus_onehot() {
        let mut t = Tape::new();
        let z = t.leaf(1, 3, vec![0.2, -0.5, 1.3]);
        let loss = t.weighted_cross_entropy(z, &[1], &[1.0, 2.0, 1.0], 1.0);
        let g = t.backward(loss);
        let raw = [0.2f64, -0.5, 1.3];
        let s: f64 = raw.iter().map(|v| v.exp()).sum();
        for j in 0..3 {
            let soft = raw[j].exp() / s;
            let ind = if j == 1 { 1.0 } else { 0.0 };
            assert!((g.wrt(z)[j] - 2.0 * (soft - ind)).abs() < 1e-12);
        }
    }

    #[test]
    fn add_row_broadcast_and_backward() {
        let mut t = Tape::new();
        let a = t.leaf(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let b = t.leaf(1, 2, vec![10.0, 20.0]);
        let c = t.add_row(a, b);
        assert_eq!(t.value(c), &[11.0, 22.0, 13.0, 24.0]);
        let ones = t.leaf(2, 1, vec![1.0, 1.0]);
        let rowsum = t.matmul(c, ones);
        let onesl = t.leaf(1, 2, vec![1.0, 1.0]);
        let loss = t.matmul(onesl, rowsum);
        let g = t.backward(loss);
        assert_eq!(g.wrt(b), &[2.0, 2.0]);
        assert_eq!(g.wrt(a), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn concat_rows_splits_adjoint() {
        let mut t = Tape::new();
        let a = t.scalar(1.0);
        let b = t.scalar(2.0);
        let v = t.concat_rows(&[a, b]);
        let w = t.leaf(1, 2, vec![3.0, 5.0]);
        let loss = t.matmul(w, v);
        assert!((t.scalar_value(loss) - 13.0).abs() < 1e-15);
        let g = t.backward(loss);
        assert_eq!(g.wrt(a), &[3.0]);
        assert_eq!(g.wrt(b), &[5.0]);
    }

    #[test]
    fn replay_after_leaf_update_recomputes_everything() {
        let mut t = Tape::new();
        let x = t.scalar(1.0);
        let y = t.sin(x);
        let z = t.mul(y, y);
        assert!((t.scalar_value(z) - 1f64.sin().powi(2)).abs() < 1e-15);
        t.set_leaf(x, &[2.0]);
        t.replay();
        assert!((t.scalar_value(z) - 2f64.sin().powi(2)).abs() < 1e-15);
    }
}
