//! The reverse-mode tape on a single message-passing step: one round of
//! max-aggregated messages over a triangle with a pendant node, a masked
//! softmax readout and the gradient of a log-likelihood.

use std::sync::Arc;

use hamlab::autodiff::{EdgeIndex, Tape, Tensor};
use hamlab::graph::Graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::new(4, &[(0, 1), (1, 2), (0, 2), (2, 3)])?;
    let edges = Arc::new(EdgeIndex::from_graph(&g));

    let mut tape = Tape::new();
    let h = tape.constant(Tensor::matrix(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.5, 0.5, -1.0, 2.0])?)?;
    let w_msg = tape.param(Tensor::matrix(4, 2, vec![0.3, -0.2, 0.1, 0.4, -0.5, 0.2, 0.3, 0.1])?)?;
    let b_msg = tape.param(Tensor::vector(vec![0.05, -0.05]))?;
    let w_out = tape.param(Tensor::matrix(2, 1, vec![1.0, -1.0])?)?;

    let msg = tape.pair_linear(w_msg, b_msg, h, &edges)?;
    let pooled = tape.neighbor_max(msg, &edges)?;
    let pooled = tape.relu(pooled)?;
    let logits = tape.linear(w_out, None, pooled)?;
    // Next step from node 2: its neighbors 0, 1 and 3 are allowed.
    let p = tape.masked_softmax(logits, &[true, true, false, true])?;
    let log_p = tape.pick_log(p, 3)?;
    let loss = tape.scale(log_p, -1.0)?;

    println!("p = {:?}", tape.value(p).data());
    println!("loss = {:.6}", tape.value(loss).item().unwrap_or(f64::NAN));
    let grads = tape.backward(loss)?;
    println!("d loss / d W_msg = {:?}", grads.get(w_msg).data());
    println!("d loss / d W_out = {:?}", grads.get(w_out).data());
    println!("{} tape nodes, {} visited backwards", tape.len(), tape.backward_visits());
    Ok(())
}
