//! Teacher-forced training on planted-cycle graphs.

use rayon::prelude::*;

use super::{teacher_forced_loss, GnnModel, HyperParams, ModelError};
use crate::autodiff::{adam_step, AdamConfig, AdamState, Tensor};
use crate::gen::gen_train_example;
use crate::rng::{mix, rng_from};
use crate::solvers::{greedy_decode, GnnScorer};

const INIT_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const FEATURE_STREAM: u64 = 3;
const VALIDATION_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Size of the generated training graphs.
    pub n: usize,
    pub p_edge: f64,
    pub batch: usize,
    pub lr: f64,
    pub max_updates: usize,
    pub seed: u64,
    /// Validate every this many updates; 0 disables validation.
    pub val_every: usize,
    pub val_size: usize,
    pub hyper: HyperParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n: 25,
            p_edge: 0.125,
            batch: 8,
            lr: 1e-4,
            max_updates: 20_000,
            seed: 0,
            val_every: 1000,
            val_size: 200,
            hyper: HyperParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.hyper.validate()?;
        if self.batch == 0 {
            return Err(ModelError::InvalidHyper("batch must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(ModelError::InvalidHyper(format!("learning rate {} must be positive", self.lr)));
        }
        if self.n < 3 {
            return Err(ModelError::InvalidHyper(format!("training size {} below 3", self.n)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainEvent {
    Update { update: usize, loss: f64 },
    Validation { update: usize, score: f64, best: bool },
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Parameters with the best validation score (the final ones when
    /// validation is disabled).
    pub model: GnnModel,
    pub final_model: GnnModel,
    pub best_update: usize,
    pub best_score: Option<f64>,
    /// Mean batch loss per update.
    pub losses: Vec<f64>,
    pub validations: Vec<(usize, f64)>,
}

/// Fraction of planted-cycle validation graphs solved by greedy decoding.
pub fn validation_score(model: &GnnModel, n: usize, p_edge: f64, size: usize, seed: u64) -> Result<f64, ModelError> {
    let solved = (0..size)
        .into_par_iter()
        .map(|i| {
            let ex = gen_train_example(n, p_edge, mix(seed, &[VALIDATION_STREAM, i as u64]))?;
            let res = greedy_decode(&ex.graph, &GnnScorer::new(model), mix(seed, &[VALIDATION_STREAM, i as u64, 1]))
                .map_err(|e| ModelError::ShapeMismatch(e.to_string()))?;
            Ok(res.is_solution as usize)
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(solved.iter().sum::<usize>() as f64 / size.max(1) as f64)
}

pub fn train(cfg: &TrainConfig) -> Result<TrainReport, ModelError> {
    train_with_progress(cfg, |_| {})
}

/// Runs `cfg.max_updates` Adam updates, each on the mean gradient of
/// `cfg.batch` fresh planted-cycle examples.
pub fn train_with_progress(cfg: &TrainConfig, mut progress: impl FnMut(&TrainEvent)) -> Result<TrainReport, ModelError> {
    cfg.validate()?;
    let mut model = GnnModel::new(cfg.hyper, mix(cfg.seed, &[INIT_STREAM]))?;
    let adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let mut state = AdamState::new(model.params.tensors());
    let mut best: Option<(f64, usize, GnnModel)> = None;
    let mut losses = Vec::with_capacity(cfg.max_updates);
    let mut validations = Vec::new();

    for update in 1..=cfg.max_updates {
        let per_example = (0..cfg.batch)
            .into_par_iter()
            .map(|b| {
                let key = [update as u64, b as u64];
                let ex = gen_train_example(cfg.n, cfg.p_edge, mix(cfg.seed, &[TRAIN_STREAM, key[0], key[1]]))?;
                let mut rng = rng_from(mix(cfg.seed, &[FEATURE_STREAM, key[0], key[1]]));
                teacher_forced_loss(&ex.graph, &ex.cycle, &model, &mut rng)
            })
            .collect::<Result<Vec<_>, ModelError>>()?;

        let scale = 1.0 / cfg.batch as f64;
        let mut mean: Vec<Tensor> = model.params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
        let mut loss = 0.0;
        for (l, grads) in &per_example {
            loss += l * scale;
            for (acc, g) in mean.iter_mut().zip(grads) {
                for (a, v) in acc.data_mut().iter_mut().zip(g.data()) {
                    *a += v * scale;
                }
            }
        }
        adam_step(&mut model.params.tensors_mut(), &mean, &mut state, &adam)?;
        losses.push(loss);
        progress(&TrainEvent::Update { update, loss });

        let validate_now = cfg.val_every > 0 && (update % cfg.val_every == 0 || update == cfg.max_updates);
        if validate_now {
            let score = validation_score(&model, cfg.n, cfg.p_edge, cfg.val_size, cfg.seed)?;
            validations.push((update, score));
            let improved = best.as_ref().is_none_or(|(s, _, _)| score > *s);
            if improved {
                best = Some((score, update, model.clone()));
            }
            progress(&TrainEvent::Validation {
                update,
                score,
                best: improved,
            });
        }
    }

    let (best_score, best_update, best_model) = match best {
        Some((s, u, m)) => (Some(s), u, m),
        None => (None, cfg.max_updates, model.clone()),
    };
    Ok(TrainReport {
        model: best_model,
        final_model: model,
        best_update,
        best_score,
        losses,
        validations,
    })
}
