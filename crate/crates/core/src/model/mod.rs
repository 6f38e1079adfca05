//! Encode–process–decode message-passing network that scores the next node
//! of a partial walk.
//!
//! One application maps a walk encoding `x` and persistent node features
//! `h` to next-step probabilities and updated features:
//!
//! ```text
//! z_i  = W_E (x_i ++ h_i) + b_E                     encoder
//! h_i  = z_i ++ r_i,   r ~ U[0,1]^(n x d_r)
//! for each layer k:                                 processor
//!     m_i = max_{j ~ i} relu(W_M^k (h_i ++ h_j) + b_M^k)
//!     h_i = h_i + relu(W_P^k (h_i ++ m_i) + b_P^k)
//! l_i  = W_D (z_i ++ h_i) + b_D                     decoder
//! p    = softmax of l over the neighbors of the walk's last node
//! ```

mod checkpoint;
mod gradcheck;
mod train;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint, CheckpointMeta, FORMAT_VERSION,
};
pub use gradcheck::{gradcheck, relative_error, CoordinateCheck, GradcheckConfig, GradcheckReport};
pub use train::{train, train_with_progress, validation_score, TrainConfig, TrainEvent, TrainReport};

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, EdgeIndex, Tape, Tensor, Var};
use crate::gen::GenError;
use crate::graph::{encode_walk, is_hamiltonian_cycle, Graph, Walk, WalkEncoding};
use crate::rng::{rng_from, Rng};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("supervision walk is not a Hamiltonian cycle of the graph")]
    InvalidSupervision,
    #[error("target node {node} at step {step} is outside the mask")]
    MaskExcludesTarget { step: usize, node: usize },
    #[error("checkpoint format version {found}, expected {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Network dimensions and ablation switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperParams {
    pub d_in: usize,
    pub d_h: usize,
    pub d_r: usize,
    pub n_p: usize,
    pub use_persistent_features: bool,
    pub use_random_features: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            d_in: WalkEncoding::WIDTH,
            d_h: 32,
            d_r: 4,
            n_p: 5,
            use_persistent_features: true,
            use_random_features: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.d_r >= self.d_h {
            return Err(ModelError::InvalidHyper(format!(
                "d_r = {} must be below d_h = {}",
                self.d_r, self.d_h
            )));
        }
        if self.n_p == 0 {
            return Err(ModelError::InvalidHyper("n_p must be at least 1".into()));
        }
        if self.d_in == 0 {
            return Err(ModelError::InvalidHyper("d_in must be at least 1".into()));
        }
        Ok(())
    }

    /// Width of the encoder output `z`.
    pub fn d_z(&self) -> usize {
        self.d_h - self.d_r
    }

    pub fn parameter_count(&self) -> usize {
        let (d_in, d_h, d_z) = (self.d_in, self.d_h, self.d_z());
        let encoder = (d_in + d_h) * d_z + d_z;
        let layer = 2 * (2 * d_h * d_h + d_h);
        let decoder = (d_z + d_h) + 1;
        encoder + d_h + self.n_p * layer + decoder
    }

    /// `(name, shape)` of every parameter tensor, in canonical order.
    pub fn tensor_layout(&self) -> Vec<(String, Vec<usize>)> {
        let (d_in, d_h, d_z) = (self.d_in, self.d_h, self.d_z());
        let mut out = vec![
            ("encoder.weight".to_string(), vec![d_in + d_h, d_z]),
            ("encoder.bias".to_string(), vec![d_z]),
            ("initial_h".to_string(), vec![d_h]),
        ];
        for k in 0..self.n_p {
            out.push((format!("processor.{k}.message.weight"), vec![2 * d_h, d_h]));
            out.push((format!("processor.{k}.message.bias"), vec![d_h]));
            out.push((format!("processor.{k}.update.weight"), vec![2 * d_h, d_h]));
            out.push((format!("processor.{k}.update.bias"), vec![d_h]));
        }
        out.push(("decoder.weight".to_string(), vec![d_z + d_h, 1]));
        out.push(("decoder.bias".to_string(), vec![1]));
        out
    }
}

/// All trainable tensors, stored flat in the order of
/// [`HyperParams::tensor_layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    tensors: Vec<Tensor>,
}

const ENC_W: usize = 0;
const ENC_B: usize = 1;
const INIT_H: usize = 2;
const LAYER_BASE: usize = 3;

impl ModelParams {
    pub fn zeros(hyper: &HyperParams) -> Self {
        ModelParams {
            tensors: hyper
                .tensor_layout()
                .iter()
                .map(|(_, shape)| Tensor::zeros(shape))
                .collect(),
        }
    }

    /// Weights and biases uniform on `±1/sqrt(fan_in)` where `fan_in` is the
    /// input width of the layer; the initial persistent vector starts at zero.
    pub fn init(hyper: &HyperParams, seed: u64) -> Result<Self, ModelError> {
        hyper.validate()?;
        let mut params = Self::zeros(hyper);
        let mut rng = rng_from(seed);
        let layout = hyper.tensor_layout();
        for i in 0..params.tensors.len() {
            if i == INIT_H {
                continue;
            }
            // Biases follow their weight matrix in the layout.
            let weight_shape = if layout[i].1.len() == 2 {
                &layout[i].1
            } else {
                &layout[i - 1].1
            };
            let bound = 1.0 / (weight_shape[0] as f64).sqrt();
            for v in params.tensors[i].data_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        }
        Ok(params)
    }

    /// Builds parameters from tensors in layout order, checking shapes.
    pub fn from_tensors(hyper: &HyperParams, tensors: Vec<Tensor>) -> Result<Self, ModelError> {
        let layout = hyper.tensor_layout();
        if layout.len() != tensors.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "expected {} tensors, got {}",
                layout.len(),
                tensors.len()
            )));
        }
        for ((name, shape), t) in layout.iter().zip(&tensors) {
            if t.shape() != shape.as_slice() {
                return Err(ModelError::ShapeMismatch(format!(
                    "{name}: expected {shape:?}, got {:?}",
                    t.shape()
                )));
            }
        }
        Ok(ModelParams { tensors })
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.tensors.iter_mut().collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }

    fn register(&self, tape: &mut Tape, trainable: bool) -> Result<Vec<Var>, AutodiffError> {
        self.tensors
            .iter()
            .map(|t| {
                if trainable {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect()
    }
}

/// A network: dimensions plus weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub hyper: HyperParams,
    pub params: ModelParams,
}

impl GnnModel {
    pub fn new(hyper: HyperParams, seed: u64) -> Result<Self, ModelError> {
        Ok(GnnModel {
            params: ModelParams::init(&hyper, seed)?,
            hyper,
        })
    }

    pub fn zeros(hyper: HyperParams) -> Self {
        GnnModel {
            params: ModelParams::zeros(&hyper),
            hyper,
        }
    }

    /// Persistent features before the first decoding step: the learned
    /// initial vector on every node, or zeros when persistence is disabled.
    pub fn initial_state(&self, n: usize) -> PersistentState {
        let d_h = self.hyper.d_h;
        if !self.hyper.use_persistent_features {
            return PersistentState(Tensor::zeros(&[n, d_h]));
        }
        let h0 = self.params.tensors[INIT_H].data();
        let data = (0..n).flat_map(|_| h0.iter().copied()).collect();
        PersistentState(Tensor::matrix(n, d_h, data).expect("n x d_h"))
    }

    /// One network application outside of training.
    pub fn apply(
        &self,
        g: &Graph,
        x: &WalkEncoding,
        h: &PersistentState,
        rng: &mut Rng,
    ) -> Result<(Vec<f64>, PersistentState), ModelError> {
        let edges = Arc::new(EdgeIndex::from_graph(g));
        let mut tape = Tape::new();
        let vars = self.params.register(&mut tape, false)?;
        let h_in = tape.constant(h.0.clone())?;
        let (p, h_out) = forward(&mut tape, &self.hyper, &vars, g, &edges, x, h_in, rng)?;
        let probs = tape.value(p).data().to_vec();
        let next = if self.hyper.use_persistent_features {
            PersistentState(tape.value(h_out).clone())
        } else {
            PersistentState(Tensor::zeros(&[g.node_count(), self.hyper.d_h]))
        };
        Ok((probs, next))
    }
}

/// Node features carried between decoding steps, `n x d_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistentState(pub Tensor);

/// Free-function form of [`GnnModel::apply`].
pub fn apply_gnn(
    g: &Graph,
    x: &WalkEncoding,
    h: &PersistentState,
    model: &GnnModel,
    rng: &mut Rng,
) -> Result<(Vec<f64>, PersistentState), ModelError> {
    model.apply(g, x, h, rng)
}

/// Nodes the next step may move to: neighbors of the last node, or every
/// node for the empty walk. Visited neighbors stay allowed so the decoder
/// can close the cycle.
pub fn step_mask(g: &Graph, last: Option<usize>) -> Vec<bool> {
    match last {
        None => vec![true; g.node_count()],
        Some(v) => {
            let mut mask = vec![false; g.node_count()];
            for &u in g.neighbors(v) {
                mask[u] = true;
            }
            mask
        }
    }
}

/// Records one network application on `tape`; returns `(p, h_out)`.
#[allow(clippy::too_many_arguments)]
fn forward(
    tape: &mut Tape,
    hyper: &HyperParams,
    vars: &[Var],
    g: &Graph,
    edges: &Arc<EdgeIndex>,
    x: &WalkEncoding,
    h_in: Var,
    rng: &mut Rng,
) -> Result<(Var, Var), ModelError> {
    let n = g.node_count();
    if x.node_count() != n || hyper.d_in != WalkEncoding::WIDTH {
        return Err(ModelError::ShapeMismatch(format!(
            "walk encoding {} x {} for graph of {} nodes (d_in = {})",
            x.node_count(),
            WalkEncoding::WIDTH,
            n,
            hyper.d_in
        )));
    }
    if tape.value(h_in).shape() != [n, hyper.d_h] {
        return Err(ModelError::ShapeMismatch(format!(
            "persistent state {:?}, expected [{n}, {}]",
            tape.value(h_in).shape(),
            hyper.d_h
        )));
    }
    if let Some(v) = g.isolated_node() {
        return Err(ModelError::IsolatedNode(v));
    }

    let x_var = tape.constant(Tensor::matrix(n, WalkEncoding::WIDTH, x.as_slice().to_vec())?)?;
    let enc_in = tape.concat(x_var, h_in)?;
    let z = tape.linear(vars[ENC_W], Some(vars[ENC_B]), enc_in)?;

    let noise: Vec<f64> = if hyper.use_random_features {
        (0..n * hyper.d_r).map(|_| rng.gen::<f64>()).collect()
    } else {
        vec![0.0; n * hyper.d_r]
    };
    let r = tape.constant(Tensor::matrix(n, hyper.d_r, noise)?)?;
    let mut h = tape.concat(z, r)?;

    for k in 0..hyper.n_p {
        let base = LAYER_BASE + 4 * k;
        let pre = tape.pair_linear(vars[base], vars[base + 1], h, edges)?;
        // relu is monotone, so max_j relu(a_j) = relu(max_j a_j).
        let m = tape.neighbor_max(pre, edges)?;
        let m = tape.relu(m)?;
        let hm = tape.concat(h, m)?;
        let upd = tape.linear(vars[base + 2], Some(vars[base + 3]), hm)?;
        let upd = tape.relu(upd)?;
        h = tape.add(h, upd)?;
    }

    let dec_base = LAYER_BASE + 4 * hyper.n_p;
    let zh = tape.concat(z, h)?;
    let logits = tape.linear(vars[dec_base], Some(vars[dec_base + 1]), zh)?;
    let p = tape.masked_softmax(logits, &step_mask(g, x.last_node()))?;
    Ok((p, h))
}

/// Teacher-forced negative log-likelihood of a planted cycle, with its
/// gradient for every parameter tensor (layout order).
///
/// Runs `n + 1` steps: the first sees the empty walk and only advances the
/// persistent state, step `i >= 2` scores `v_i` given `v_1 .. v_{i-1}`,
/// and the last step scores the return to `v_1`. Gradients flow through
/// the persistent state across all steps.
pub fn teacher_forced_loss(
    g: &Graph,
    cycle: &Walk,
    model: &GnnModel,
    rng: &mut Rng,
) -> Result<(f64, Vec<Tensor>), ModelError> {
    if !is_hamiltonian_cycle(g, cycle) {
        return Err(ModelError::InvalidSupervision);
    }
    let n = g.node_count();
    let hyper = &model.hyper;
    let edges = Arc::new(EdgeIndex::from_graph(g));
    let mut tape = Tape::new();
    let vars = model.params.register(&mut tape, true)?;
    let zeros = Tensor::zeros(&[n, hyper.d_h]);
    let mut h = if hyper.use_persistent_features {
        tape.broadcast_rows(vars[INIT_H], n)?
    } else {
        tape.constant(zeros.clone())?
    };
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n + 1 {
        let prefix = cycle.prefix(i - 1);
        let x = encode_walk(g, &prefix);
        let (p, h_out) = forward(&mut tape, hyper, &vars, g, &edges, &x, h, rng)?;
        if i >= 2 {
            let target = cycle.nodes()[i - 1];
            if tape.value(p).data()[target] <= 0.0 {
                return Err(ModelError::MaskExcludesTarget { step: i, node: target });
            }
            terms.push(tape.pick_log(p, target)?);
        }
        h = if hyper.use_persistent_features {
            h_out
        } else {
            tape.constant(zeros.clone())?
        };
    }
    let total = tape.add_n(&terms)?;
    let loss = tape.scale(total, -1.0)?;
    let value = tape.value(loss).data()[0];
    let grads = tape.backward(loss)?;
    Ok((value, vars.iter().map(|&v| grads.get(v)).collect()))
}

/// Loss only, without a backward pass.
pub fn teacher_forced_loss_value(
    g: &Graph,
    cycle: &Walk,
    model: &GnnModel,
    rng: &mut Rng,
) -> Result<f64, ModelError> {
    if !is_hamiltonian_cycle(g, cycle) {
        return Err(ModelError::InvalidSupervision);
    }
    let n = g.node_count();
    let mut h = model.initial_state(n);
    let mut loss = 0.0;
    for i in 1..=n + 1 {
        let x = encode_walk(g, &cycle.prefix(i - 1));
        let (p, next) = model.apply(g, &x, &h, rng)?;
        if i >= 2 {
            let target = cycle.nodes()[i - 1];
            if p[target] <= 0.0 {
                return Err(ModelError::MaskExcludesTarget { step: i, node: target });
            }
            loss -= p[target].ln();
        }
        h = next;
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_train_example;
    use crate::graph::Walk;

    #[test]
    fn default_parameter_count() {
        let hyper = HyperParams::default();
        assert_eq!(hyper.parameter_count(), 21_901);
        assert_eq!(1008 + 32 + 5 * 4160 + 61, 21_901);
        let params = ModelParams::init(&hyper, 0).unwrap();
        assert_eq!(params.parameter_count(), 21_901);
    }

    #[test]
    fn parameter_count_formula_matches_layout() {
        for (d_h, d_r, n_p) in [(8, 2, 1), (16, 3, 2), (5, 1, 7)] {
            let hyper = HyperParams {
                d_h,
                d_r,
                n_p,
                ..HyperParams::default()
            };
            assert_eq!(ModelParams::zeros(&hyper).parameter_count(), hyper.parameter_count());
        }
    }

    #[test]
    fn invalid_hyper() {
        let bad = HyperParams {
            d_r: 32,
            ..HyperParams::default()
        };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidHyper(_))));
        let bad = HyperParams {
            n_p: 0,
            ..HyperParams::default()
        };
        assert!(matches!(ModelParams::init(&bad, 1), Err(ModelError::InvalidHyper(_))));
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let hyper = HyperParams::default();
        let a = ModelParams::init(&hyper, 7).unwrap();
        let b = ModelParams::init(&hyper, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, ModelParams::init(&hyper, 8).unwrap());
        let layout = hyper.tensor_layout();
        for (i, t) in a.tensors().iter().enumerate() {
            if layout[i].0 == "initial_h" {
                assert!(t.data().iter().all(|&v| v == 0.0));
                continue;
            }
            let fan_in = if layout[i].1.len() == 2 { layout[i].1[0] } else { layout[i - 1].1[0] };
            let bound = 1.0 / (fan_in as f64).sqrt();
            assert!(t.data().iter().all(|v| v.abs() <= bound), "{}", layout[i].0);
        }
    }

    #[test]
    fn zero_params_uniform_over_neighbors() {
        let model = GnnModel::zeros(HyperParams::default());
        let g = Graph::cycle(5).unwrap();
        let x = encode_walk(&g, &Walk::new(&g, vec![0]).unwrap());
        let h = model.initial_state(5);
        let (p, h2) = model.apply(&g, &x, &h, &mut rng_from(1)).unwrap();
        assert_eq!(p, vec![0.0, 0.5, 0.0, 0.0, 0.5]);
        assert_eq!(h2.0.shape(), &[5, 32]);
    }

    #[test]
    fn empty_walk_scores_all_nodes() {
        let model = GnnModel::new(HyperParams::default(), 3).unwrap();
        let g = gen_train_example(10, 0.2, 3).unwrap().graph;
        let x = encode_walk(&g, &Walk::empty());
        let (p, _) = model.apply(&g, &x, &model.initial_state(10), &mut rng_from(2)).unwrap();
        assert!(p.iter().all(|&v| v > 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_respect_mask() {
        let model = GnnModel::new(HyperParams::default(), 11).unwrap();
        for s in 0..5 {
            let ex = gen_train_example(12, 0.15, s).unwrap();
            let mut h = model.initial_state(12);
            let mut rng = rng_from(s);
            for len in 0..=12 {
                let w = ex.cycle.prefix(len);
                let x = encode_walk(&ex.graph, &w);
                let (p, next) = model.apply(&ex.graph, &x, &h, &mut rng).unwrap();
                let mask = step_mask(&ex.graph, w.last());
                let total: f64 = p.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(p.iter().zip(&mask).all(|(&v, &m)| m || v == 0.0));
                assert!(next.0.is_finite());
                h = next;
            }
        }
    }

    #[test]
    fn isolated_node_rejected() {
        let model = GnnModel::new(HyperParams::default(), 0).unwrap();
        let g = Graph::new(4, &[(0, 1), (1, 2)]).unwrap();
        let x = encode_walk(&g, &Walk::empty());
        let err = model.apply(&g, &x, &model.initial_state(4), &mut rng_from(0));
        assert!(matches!(err, Err(ModelError::IsolatedNode(3))));
    }

    #[test]
    fn deterministic_without_random_features() {
        let hyper = HyperParams {
            use_random_features: false,
            ..HyperParams::default()
        };
        let model = GnnModel::new(hyper, 5).unwrap();
        let ex = gen_train_example(9, 0.2, 1).unwrap();
        let x = encode_walk(&ex.graph, &ex.cycle.prefix(3));
        let h = model.initial_state(9);
        let a = model.apply(&ex.graph, &x, &h, &mut rng_from(1)).unwrap();
        let b = model.apply(&ex.graph, &x, &h, &mut rng_from(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_params_loss_on_c5() {
        let model = GnnModel::zeros(HyperParams::default());
        let g = Graph::cycle(5).unwrap();
        let c = Walk::new(&g, vec![0, 1, 2, 3, 4, 0]).unwrap();
        let (loss, _) = teacher_forced_loss(&g, &c, &model, &mut rng_from(0)).unwrap();
        assert!((loss - 5.0 * 2f64.ln()).abs() < 1e-9, "{loss}");
    }

    #[test]
    fn invalid_supervision() {
        let model = GnnModel::zeros(HyperParams::default());
        let g = Graph::cycle(5).unwrap();
        let open = Walk::new(&g, vec![0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(
            teacher_forced_loss(&g, &open, &model, &mut rng_from(0)),
            Err(ModelError::InvalidSupervision)
        ));
    }

    #[test]
    fn tape_loss_matches_inference_path() {
        let model = GnnModel::new(HyperParams::default(), 21).unwrap();
        let ex = gen_train_example(10, 0.2, 4).unwrap();
        let (a, _) = teacher_forced_loss(&ex.graph, &ex.cycle, &model, &mut rng_from(9)).unwrap();
        let b = teacher_forced_loss_value(&ex.graph, &ex.cycle, &model, &mut rng_from(9)).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        assert!(a >= 0.0);
    }

    #[test]
    fn persistence_off_ignores_initial_h() {
        let hyper = HyperParams {
            use_persistent_features: false,
            ..HyperParams::default()
        };
        let model = GnnModel::new(hyper, 2).unwrap();
        let ex = gen_train_example(8, 0.2, 2).unwrap();
        let (_, grads) = teacher_forced_loss(&ex.graph, &ex.cycle, &model, &mut rng_from(1)).unwrap();
        assert!(grads[INIT_H].data().iter().all(|&v| v == 0.0));
        assert!(grads[ENC_W].data().iter().any(|&v| v != 0.0));
    }
}
