use std::sync::Arc;

use super::{shape_err, AutodiffError, Tensor};
use crate::graph::Graph;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Directed edge list grouped by receiving node.
///
/// Edges `offsets[i]..offsets[i + 1]` carry messages into node `i`; their
/// senders are listed in ascending order, so a strict `>` scan keeps the
/// lowest-index sender on ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
    offsets: Vec<usize>,
    receiver: Vec<usize>,
    sender: Vec<usize>,
}

impl EdgeIndex {
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut receiver = Vec::new();
        let mut sender = Vec::new();
        offsets.push(0);
        for i in 0..n {
            for &j in g.neighbors(i) {
                receiver.push(i);
                sender.push(j);
            }
            offsets.push(sender.len());
        }
        EdgeIndex {
            n,
            offsets,
            receiver,
            sender,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.sender.len()
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Linear { x: Var, w: Var, b: Option<Var> },
    Relu(Var),
    Concat(Var, Var),
    PairLinear { h: Var, w: Var, b: Var, edges: Arc<EdgeIndex> },
    NeighborMax { msg: Var, argmax: Vec<usize> },
    Add(Var, Var),
    Broadcast(Var),
    MaskedSoftmax { x: Var, mask: Vec<bool> },
    PickLog { p: Var, index: usize },
    Sum(Var),
    Scale(Var, f64),
    AddN(Vec<Var>),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Records a forward computation for a single reverse pass.
///
/// A tape is owned by one thread; independent tapes can run in parallel.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
    visits: usize,
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zeros if `v` did not
    /// influence the loss.
    pub fn get(&self, v: Var) -> Tensor {
        let shape = &self.shapes[v.0];
        match &self.grads[v.0] {
            Some(g) => Tensor::new(shape.clone(), g.clone()).expect("gradient shape"),
            None => Tensor::zeros(shape),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yy, xx) in y.iter_mut().zip(x) {
        *yy += a * xx;
    }
}

/// `out[rows x m] += x[rows x k] * w[k x m]`.
fn matmul_acc(x: &[f64], rows: usize, k: usize, w: &[f64], m: usize, out: &mut [f64]) {
    for i in 0..rows {
        let o = &mut out[i * m..(i + 1) * m];
        for (kk, &a) in x[i * k..(i + 1) * k].iter().enumerate() {
            if a != 0.0 {
                axpy(a, &w[kk * m..(kk + 1) * m], o);
            }
        }
    }
}

/// `dx[rows x k] += g[rows x m] * w[k x m]^T`.
fn matmul_bt_acc(g: &[f64], rows: usize, m: usize, w: &[f64], k: usize, dx: &mut [f64]) {
    for i in 0..rows {
        let gi = &g[i * m..(i + 1) * m];
        for kk in 0..k {
            dx[i * k + kk] += dot(gi, &w[kk * m..(kk + 1) * m]);
        }
    }
}

/// `dw[k x m] += x[rows x k]^T * g[rows x m]`.
fn matmul_at_acc(x: &[f64], rows: usize, k: usize, g: &[f64], m: usize, dw: &mut [f64]) {
    for i in 0..rows {
        let gi = &g[i * m..(i + 1) * m];
        for (kk, &a) in x[i * k..(i + 1) * k].iter().enumerate() {
            if a != 0.0 {
                axpy(a, gi, &mut dw[kk * m..(kk + 1) * m]);
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes whose backward rule ran in the last backward pass.
    pub fn backward_visits(&self) -> usize {
        self.visits
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool, name: &'static str) -> Result<Var, AutodiffError> {
        if !value.is_finite() {
            return Err(AutodiffError::NonFiniteValue(name));
        }
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Result<Var, AutodiffError> {
        self.push(Op::Leaf, t, true, "param")
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&mut self, t: Tensor) -> Result<Var, AutodiffError> {
        self.push(Op::Leaf, t, false, "constant")
    }

    /// `x * w + b` with `x: rows x k`, `w: k x m`, `b: m`.
    pub fn linear(&mut self, w: Var, b: Option<Var>, x: Var) -> Result<Var, AutodiffError> {
        let (xv, wv) = (self.value(x), self.value(w));
        let (rows, k, m) = (xv.rows(), xv.cols(), wv.cols());
        if wv.rows() != k || wv.shape().len() != 2 {
            return Err(shape_err(
                "linear",
                format!("input {:?} vs weight {:?}", xv.shape(), wv.shape()),
            ));
        }
        let mut out = vec![0.0; rows * m];
        if let Some(b) = b {
            let bv = self.value(b);
            if bv.len() != m {
                return Err(shape_err("linear", format!("bias {:?} vs width {m}", bv.shape())));
            }
            for row in out.chunks_exact_mut(m) {
                row.copy_from_slice(bv.data());
            }
        }
        matmul_acc(xv.data(), rows, k, wv.data(), m, &mut out);
        let needs = self.needs(x) || self.needs(w) || b.is_some_and(|b| self.needs(b));
        let value = Tensor::matrix(rows, m, out)?;
        self.push(Op::Linear { x, w, b }, value, needs, "linear")
    }

    pub fn relu(&mut self, x: Var) -> Result<Var, AutodiffError> {
        let xv = self.value(x);
        let data = xv.data().iter().map(|&v| v.max(0.0)).collect();
        let value = Tensor::new(xv.shape().to_vec(), data)?;
        let needs = self.needs(x);
        self.push(Op::Relu(x), value, needs, "relu")
    }

    /// Column-wise concatenation of two matrices with equal row counts.
    pub fn concat(&mut self, x: Var, y: Var) -> Result<Var, AutodiffError> {
        let (xv, yv) = (self.value(x), self.value(y));
        if xv.rows() != yv.rows() {
            return Err(shape_err(
                "concat",
                format!("{:?} vs {:?}", xv.shape(), yv.shape()),
            ));
        }
        let (rows, a, b) = (xv.rows(), xv.cols(), yv.cols());
        let mut out = Vec::with_capacity(rows * (a + b));
        for r in 0..rows {
            out.extend_from_slice(xv.row(r));
            out.extend_from_slice(yv.row(r));
        }
        let value = Tensor::matrix(rows, a + b, out)?;
        let needs = self.needs(x) || self.needs(y);
        self.push(Op::Concat(x, y), value, needs, "concat")
    }

    /// Message pre-activations `w^T (h_i ++ h_j) + b` for every directed
    /// edge `j -> i`, rows ordered as in `edges`.
    ///
    /// Computed as `h W_top` and `h W_bottom` per node and summed per edge,
    /// which is exact by linearity.
    pub fn pair_linear(
        &mut self,
        w: Var,
        b: Var,
        h: Var,
        edges: &Arc<EdgeIndex>,
    ) -> Result<Var, AutodiffError> {
        let (hv, wv, bv) = (self.value(h), self.value(w), self.value(b));
        let (n, d, m) = (hv.rows(), hv.cols(), wv.cols());
        if wv.rows() != 2 * d || bv.len() != m || n != edges.n {
            return Err(shape_err(
                "pair_linear",
                format!(
                    "h {:?}, w {:?}, b {:?}, {} graph nodes",
                    hv.shape(),
                    wv.shape(),
                    bv.shape(),
                    edges.n
                ),
            ));
        }
        let (top, bottom) = wv.data().split_at(d * m);
        let mut p = vec![0.0; n * m];
        let mut q = vec![0.0; n * m];
        matmul_acc(hv.data(), n, d, top, m, &mut p);
        matmul_acc(hv.data(), n, d, bottom, m, &mut q);
        let e = edges.edge_count();
        let mut out = vec![0.0; e * m];
        for (k, row) in out.chunks_exact_mut(m).enumerate() {
            let (i, j) = (edges.receiver[k], edges.sender[k]);
            let pi = &p[i * m..(i + 1) * m];
            let qj = &q[j * m..(j + 1) * m];
            for c in 0..m {
                row[c] = pi[c] + qj[c] + bv.data()[c];
            }
        }
        let value = Tensor::matrix(e, m, out)?;
        let needs = self.needs(h) || self.needs(w) || self.needs(b);
        self.push(
            Op::PairLinear {
                h,
                w,
                b,
                edges: Arc::clone(edges),
            },
            value,
            needs,
            "pair_linear",
        )
    }

    /// Per-node coordinate-wise maximum over incoming edge messages.
    /// Ties resolve to the lowest-index sender.
    pub fn neighbor_max(&mut self, msg: Var, edges: &EdgeIndex) -> Result<Var, AutodiffError> {
        let mv = self.value(msg);
        if mv.rows() != edges.edge_count() || mv.shape().len() != 2 {
            return Err(shape_err(
                "neighbor_max",
                format!("{:?} messages for {} edges", mv.shape(), edges.edge_count()),
            ));
        }
        let m = mv.cols();
        let mut out = vec![0.0; edges.n * m];
        let mut argmax = vec![0usize; edges.n * m];
        for i in 0..edges.n {
            let (lo, hi) = (edges.offsets[i], edges.offsets[i + 1]);
            if lo == hi {
                return Err(AutodiffError::EmptyReduction("neighbor_max"));
            }
            let o = &mut out[i * m..(i + 1) * m];
            let a = &mut argmax[i * m..(i + 1) * m];
            o.copy_from_slice(mv.row(lo));
            a.fill(lo);
            for k in lo + 1..hi {
                for (c, &v) in mv.row(k).iter().enumerate() {
                    if v > o[c] {
                        o[c] = v;
                        a[c] = k;
                    }
                }
            }
        }
        let value = Tensor::matrix(edges.n, m, out)?;
        let needs = self.needs(msg);
        self.push(Op::NeighborMax { msg, argmax }, value, needs, "neighbor_max")
    }

    pub fn add(&mut self, x: Var, y: Var) -> Result<Var, AutodiffError> {
        let (xv, yv) = (self.value(x), self.value(y));
        if xv.shape() != yv.shape() {
            return Err(shape_err("add", format!("{:?} vs {:?}", xv.shape(), yv.shape())));
        }
        let data = xv.data().iter().zip(yv.data()).map(|(a, b)| a + b).collect();
        let value = Tensor::new(xv.shape().to_vec(), data)?;
        let needs = self.needs(x) || self.needs(y);
        self.push(Op::Add(x, y), value, needs, "add")
    }

    /// Repeats a vector as `rows` identical rows.
    pub fn broadcast_rows(&mut self, v: Var, rows: usize) -> Result<Var, AutodiffError> {
        let vv = self.value(v);
        if vv.rows() != 1 {
            return Err(shape_err("broadcast_rows", format!("{:?}", vv.shape())));
        }
        let d = vv.cols();
        let mut out = Vec::with_capacity(rows * d);
        for _ in 0..rows {
            out.extend_from_slice(vv.data());
        }
        let value = Tensor::matrix(rows, d, out)?;
        let needs = self.needs(v);
        self.push(Op::Broadcast(v), value, needs, "broadcast_rows")
    }

    /// Softmax over the entries where `mask` is true; other entries are
    /// exactly zero and receive no gradient. Accepts a vector or an
    /// `n x 1` matrix and returns a vector.
    pub fn masked_softmax(&mut self, x: Var, mask: &[bool]) -> Result<Var, AutodiffError> {
        let xv = self.value(x);
        if xv.len() != mask.len() || (xv.shape().len() == 2 && xv.cols() != 1) {
            return Err(shape_err(
                "masked_softmax",
                format!("{:?} vs mask of {}", xv.shape(), mask.len()),
            ));
        }
        let max = xv
            .data()
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(AutodiffError::EmptyReduction("masked_softmax"));
        }
        let mut out: Vec<f64> = xv
            .data()
            .iter()
            .zip(mask)
            .map(|(&v, &m)| if m { (v - max).exp() } else { 0.0 })
            .collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= total);
        let needs = self.needs(x);
        self.push(
            Op::MaskedSoftmax {
                x,
                mask: mask.to_vec(),
            },
            Tensor::vector(out),
            needs,
            "masked_softmax",
        )
    }

    /// `ln p[index]` as a scalar.
    pub fn pick_log(&mut self, p: Var, index: usize) -> Result<Var, AutodiffError> {
        let pv = self.value(p);
        if index >= pv.len() {
            return Err(shape_err("pick_log", format!("index {index} of {}", pv.len())));
        }
        let value = Tensor::scalar(pv.data()[index].ln());
        let needs = self.needs(p);
        self.push(Op::PickLog { p, index }, value, needs, "pick_log")
    }

    pub fn sum(&mut self, x: Var) -> Result<Var, AutodiffError> {
        let value = Tensor::scalar(self.value(x).data().iter().sum());
        let needs = self.needs(x);
        self.push(Op::Sum(x), value, needs, "sum")
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var, AutodiffError> {
        let xv = self.value(x);
        let value = Tensor::new(xv.shape().to_vec(), xv.data().iter().map(|v| v * c).collect())?;
        let needs = self.needs(x);
        self.push(Op::Scale(x, c), value, needs, "scale")
    }

    /// Elementwise sum of equally shaped tensors.
    pub fn add_n(&mut self, xs: &[Var]) -> Result<Var, AutodiffError> {
        let first = xs.first().ok_or(AutodiffError::EmptyReduction("add_n"))?;
        let shape = self.value(*first).shape().to_vec();
        let mut out = vec![0.0; self.value(*first).len()];
        for &x in xs {
            let xv = self.value(x);
            if xv.shape() != shape {
                return Err(shape_err("add_n", format!("{:?} vs {shape:?}", xv.shape())));
            }
            out.iter_mut().zip(xv.data()).for_each(|(o, v)| *o += v);
        }
        let needs = xs.iter().any(|&x| self.needs(x));
        let value = Tensor::new(shape, out)?;
        self.push(Op::AddN(xs.to_vec()), value, needs, "add_n")
    }

    /// Reverse pass from a scalar `loss`. A tape supports one pass.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients, AutodiffError> {
        if self.consumed {
            return Err(AutodiffError::TapeConsumed);
        }
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(AutodiffError::NonScalarLoss(lv.shape().to_vec()));
        }
        self.consumed = true;
        self.visits = 0;
        let nodes = &self.nodes;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        // Returns the adjoint buffer of `v`, allocating it on first use.
        fn slot<'a>(grads: &'a mut [Option<Vec<f64>>], nodes: &[Node], v: Var) -> Option<&'a mut Vec<f64>> {
            if !nodes[v.0].needs_grad {
                return None;
            }
            Some(grads[v.0].get_or_insert_with(|| vec![0.0; nodes[v.0].value.len()]))
        }

        for idx in (0..=loss.0).rev() {
            let node = &nodes[idx];
            if matches!(node.op, Op::Leaf) || grads[idx].is_none() {
                continue;
            }
            let g = grads[idx].take().expect("checked above");
            self.visits += 1;
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::Linear { x, w, b } => {
                    let (xv, wv) = (&nodes[x.0].value, &nodes[w.0].value);
                    let (rows, k, m) = (xv.rows(), xv.cols(), wv.cols());
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        matmul_bt_acc(&g, rows, m, wv.data(), k, dx);
                    }
                    if let Some(dw) = slot(&mut grads, nodes, *w) {
                        matmul_at_acc(xv.data(), rows, k, &g, m, dw);
                    }
                    if let Some(b) = b {
                        if let Some(db) = slot(&mut grads, nodes, *b) {
                            for row in g.chunks_exact(m) {
                                axpy(1.0, row, db);
                            }
                        }
                    }
                }
                Op::Relu(x) => {
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        for ((d, &gi), &out) in dx.iter_mut().zip(&g).zip(node.value.data()) {
                            if out > 0.0 {
                                *d += gi;
                            }
                        }
                    }
                }
                Op::Concat(x, y) => {
                    let rows = node.value.rows();
                    let a = nodes[x.0].value.cols();
                    let width = node.value.cols();
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        for r in 0..rows {
                            axpy(1.0, &g[r * width..r * width + a], &mut dx[r * a..(r + 1) * a]);
                        }
                    }
                    let b = width - a;
                    if let Some(dy) = slot(&mut grads, nodes, *y) {
                        for r in 0..rows {
                            axpy(1.0, &g[r * width + a..(r + 1) * width], &mut dy[r * b..(r + 1) * b]);
                        }
                    }
                }
                Op::PairLinear { h, w, b, edges } => {
                    let (hv, wv) = (&nodes[h.0].value, &nodes[w.0].value);
                    let (n, d, m) = (hv.rows(), hv.cols(), wv.cols());
                    let mut dp = vec![0.0; n * m];
                    let mut dq = vec![0.0; n * m];
                    for (k, gk) in g.chunks_exact(m).enumerate() {
                        let (i, j) = (edges.receiver[k], edges.sender[k]);
                        axpy(1.0, gk, &mut dp[i * m..(i + 1) * m]);
                        axpy(1.0, gk, &mut dq[j * m..(j + 1) * m]);
                    }
                    if let Some(db) = slot(&mut grads, nodes, *b) {
                        for row in dp.chunks_exact(m) {
                            axpy(1.0, row, db);
                        }
                    }
                    let (top, bottom) = wv.data().split_at(d * m);
                    if let Some(dh) = slot(&mut grads, nodes, *h) {
                        matmul_bt_acc(&dp, n, m, top, d, dh);
                        matmul_bt_acc(&dq, n, m, bottom, d, dh);
                    }
                    if let Some(dw) = slot(&mut grads, nodes, *w) {
                        let (dtop, dbottom) = dw.split_at_mut(d * m);
                        matmul_at_acc(hv.data(), n, d, &dp, m, dtop);
                        matmul_at_acc(hv.data(), n, d, &dq, m, dbottom);
                    }
                }
                Op::NeighborMax { msg, argmax } => {
                    let m = node.value.cols();
                    if let Some(dm) = slot(&mut grads, nodes, *msg) {
                        for (pos, (&k, &gi)) in argmax.iter().zip(&g).enumerate() {
                            dm[k * m + pos % m] += gi;
                        }
                    }
                }
                Op::Add(x, y) => {
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        axpy(1.0, &g, dx);
                    }
                    if let Some(dy) = slot(&mut grads, nodes, *y) {
                        axpy(1.0, &g, dy);
                    }
                }
                Op::Broadcast(v) => {
                    if let Some(dv) = slot(&mut grads, nodes, *v) {
                        let d = dv.len();
                        for row in g.chunks_exact(d) {
                            axpy(1.0, row, dv);
                        }
                    }
                }
                Op::MaskedSoftmax { x, mask } => {
                    let p = node.value.data();
                    let inner: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        for i in 0..p.len() {
                            if mask[i] {
                                dx[i] += p[i] * (g[i] - inner);
                            }
                        }
                    }
                }
                Op::PickLog { p, index } => {
                    let pi = nodes[p.0].value.data()[*index];
                    if let Some(dp) = slot(&mut grads, nodes, *p) {
                        dp[*index] += g[0] / pi;
                    }
                }
                Op::Sum(x) => {
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        dx.iter_mut().for_each(|d| *d += g[0]);
                    }
                }
                Op::Scale(x, c) => {
                    if let Some(dx) = slot(&mut grads, nodes, *x) {
                        axpy(*c, &g, dx);
                    }
                }
                Op::AddN(xs) => {
                    for x in xs {
                        if let Some(dx) = slot(&mut grads, nodes, *x) {
                            axpy(1.0, &g, dx);
                        }
                    }
                }
            }
        }
        let shapes = nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }
}
