use super::{shape_err, AutodiffError, Tensor};

/// Adam hyperparameters. Defaults: `lr = 1e-4`, `beta1 = 0.9`,
/// `beta2 = 0.999`, `eps = 1e-8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
    pub step: u64,
}

impl AdamState {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Tensor>) -> Self {
        let first: Vec<_> = params.into_iter().map(|p| Tensor::zeros(p.shape())).collect();
        AdamState {
            second: first.clone(),
            first,
            step: 0,
        }
    }
}

/// One bias-corrected Adam update applied in place.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<(), AutodiffError> {
    if params.len() != grads.len() || params.len() != state.first.len() {
        return Err(shape_err(
            "adam",
            format!(
                "{} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                state.first.len()
            ),
        ));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.first[i].shape() {
            return Err(shape_err(
                "adam",
                format!("param {i}: {:?} vs grad {:?}", p.shape(), g.shape()),
            ));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = state.first[i].data_mut();
        let v = state.second[i].data_mut();
        for (j, (w, &gj)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(p0: f64, g: f64, steps: usize, cfg: &AdamConfig) -> (f64, AdamState) {
        let mut p = Tensor::scalar(p0);
        let mut st = AdamState::new([&p]);
        let grads = [Tensor::scalar(g)];
        for _ in 0..steps {
            adam_step(&mut [&mut p], &grads, &mut st, cfg).unwrap();
        }
        (p.data()[0], st)
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let cfg = AdamConfig::default();
        let mut p = Tensor::vector(vec![1.0, -2.0]);
        let mut st = AdamState::new([&p]);
        st.first[0].data_mut().copy_from_slice(&[0.5, 0.5]);
        st.second[0].data_mut().copy_from_slice(&[1e-12, 1e-12]);
        adam_step(&mut [&mut p], &[Tensor::vector(vec![0.0, 0.0])], &mut st, &cfg).unwrap();
        assert_eq!(st.first[0].data(), &[0.45, 0.45]);
        assert!(st.second[0].data()[0] < 1e-12);
        assert_eq!(st.step, 1);
        // Zero fresh gradient: only the decayed moment moves the parameter.
        let (p2, _) = run(3.0, 0.0, 10, &cfg);
        assert_eq!(p2, 3.0);
    }

    #[test]
    fn first_step_hand_value() {
        // t = 1: m_hat = g, v_hat = g^2, so delta = -lr * g / (|g| + eps).
        let cfg = AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        };
        let (p, st) = run(0.0, 1.0, 1, &cfg);
        assert!((p + 0.1 / (1.0 + 1e-8)).abs() < 1e-15, "{p}");
        assert_eq!(st.step, 1);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let cfg = AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        };
        let (before, _) = run(0.0, -3.0, 5000, &cfg);
        let (after, _) = run(0.0, -3.0, 5001, &cfg);
        assert!(((after - before) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = Tensor::vector(vec![0.0; 3]);
        let mut st = AdamState::new([&p]);
        let err = adam_step(
            &mut [&mut p],
            &[Tensor::vector(vec![0.0; 2])],
            &mut st,
            &AdamConfig::default(),
        );
        assert!(matches!(err, Err(AutodiffError::ShapeMismatch { .. })));
    }
}
