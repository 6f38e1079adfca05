//! Central finite-difference check of [`teacher_forced_loss`] gradients.

use rand::seq::index::sample;
use serde::Serialize;

use super::{teacher_forced_loss, teacher_forced_loss_value, GnnModel, HyperParams, ModelError};
use crate::gen::gen_train_example;
use crate::rng::{mix, rng_from};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckConfig {
    pub n: usize,
    pub p_edge: f64,
    pub coordinates: usize,
    pub step: f64,
    /// Denominator floor of the relative error.
    pub floor: f64,
    pub seed: u64,
    pub hyper: HyperParams,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            n: 8,
            p_edge: 0.25,
            coordinates: 200,
            step: 1e-5,
            floor: 1e-6,
            seed: 0,
            hyper: HyperParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateCheck {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub loss: f64,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub checks: Vec<CoordinateCheck>,
}

impl GradcheckReport {
    pub fn worst(&self) -> Option<&CoordinateCheck> {
        self.checks.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }
}

/// `|a - f| / max(|a|, |f|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares analytic and central-difference gradients of the teacher-forced
/// loss at randomly chosen parameter coordinates of a freshly initialized
/// model on a random planted-cycle graph. Random node features are
/// replayed identically for every evaluation.
pub fn gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport, ModelError> {
    let example = gen_train_example(cfg.n, cfg.p_edge, mix(cfg.seed, &[1]))?;
    let mut model = GnnModel::new(cfg.hyper, mix(cfg.seed, &[2]))?;
    let feature_seed = mix(cfg.seed, &[3]);
    let (loss, grads) = teacher_forced_loss(&example.graph, &example.cycle, &model, &mut rng_from(feature_seed))?;

    let layout = cfg.hyper.tensor_layout();
    let total = model.params.parameter_count();
    let picks = sample(&mut rng_from(mix(cfg.seed, &[4])), total, cfg.coordinates.min(total)).into_vec();
    let mut flat_to_tensor = Vec::with_capacity(layout.len());
    let mut offset = 0;
    for (name, shape) in &layout {
        let len: usize = shape.iter().product();
        flat_to_tensor.push((offset, len, name.clone()));
        offset += len;
    }

    let mut checks = Vec::with_capacity(picks.len());
    for flat in {
        let mut p = picks;
        p.sort_unstable();
        p
    } {
        let t = flat_to_tensor
            .iter()
            .position(|&(start, len, _)| flat >= start && flat < start + len)
            .expect("index within parameters");
        let index = flat - flat_to_tensor[t].0;
        let original = model.params.tensors()[t].data()[index];
        let mut eval_at = |value: f64| -> Result<f64, ModelError> {
            model.params.tensors_mut()[t].data_mut()[index] = value;
            teacher_forced_loss_value(&example.graph, &example.cycle, &model, &mut rng_from(feature_seed))
        };
        let plus = eval_at(original + cfg.step)?;
        let minus = eval_at(original - cfg.step)?;
        eval_at(original)?;
        let numeric = (plus - minus) / (2.0 * cfg.step);
        let analytic = grads[t].data()[index];
        checks.push(CoordinateCheck {
            tensor: flat_to_tensor[t].2.clone(),
            index,
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric, cfg.floor),
        });
    }
    Ok(GradcheckReport {
        loss,
        max_rel_error: checks.iter().map(|c| c.rel_error).fold(0.0, f64::max),
        max_abs_error: checks.iter().map(|c| (c.analytic - c.numeric).abs()).fold(0.0, f64::max),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0, 1e-6), 0.0);
        assert_eq!(relative_error(2.0, 1.0, 1e-6), 0.5);
        assert_eq!(relative_error(1e-9, 0.0, 1e-6), 1e-3);
    }

    #[test]
    fn small_check_passes() {
        let cfg = GradcheckConfig {
            coordinates: 40,
            seed: 11,
            ..GradcheckConfig::default()
        };
        let report = gradcheck(&cfg).unwrap();
        assert_eq!(report.checks.len(), 40);
        assert!(report.max_rel_error <= 1e-4, "{:?}", report.worst());
    }
}
