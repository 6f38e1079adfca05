//! Versioned JSON checkpoints. Tensor values are written with 17
//! significant digits, which round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GnnModel, HyperParams, ModelError, ModelParams};
use crate::autodiff::Tensor;

pub const FORMAT_VERSION: u64 = 1;

/// Provenance stored next to the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub updates: usize,
    pub val_score: Option<f64>,
    #[serde(default)]
    pub parameter_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_edge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
}

#[derive(Deserialize)]
struct Versioned {
    format_version: u64,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCheckpoint {
    hyper: HyperParams,
    tensors: BTreeMap<String, RawTensor>,
    meta: CheckpointMeta,
}

fn json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Renders a checkpoint; `meta.parameter_count` is filled in from `model`.
pub fn checkpoint_to_string(model: &GnnModel, meta: &CheckpointMeta) -> String {
    let meta = CheckpointMeta {
        parameter_count: model.params.parameter_count(),
        ..meta.clone()
    };
    let mut out = String::new();
    write!(
        out,
        "{{\"format_version\":{FORMAT_VERSION},\"hyper\":{},\"tensors\":{{",
        json(&model.hyper)
    )
    .unwrap();
    let layout = model.hyper.tensor_layout();
    for (i, ((name, _), t)) in layout.iter().zip(model.params.tensors()).enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "\n{}:{{\"shape\":{},\"data\":[", json(name), json(&t.shape())).unwrap();
        for (j, v) in t.data().iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push_str("]}");
    }
    write!(out, "\n}},\"meta\":{}}}\n", json(&meta)).unwrap();
    out
}

pub fn checkpoint_from_str(text: &str) -> Result<(GnnModel, CheckpointMeta), ModelError> {
    let corrupt = |e: serde_json::Error| ModelError::CorruptCheckpoint(e.to_string());
    let version: Versioned = serde_json::from_str(text).map_err(corrupt)?;
    if version.format_version != FORMAT_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let raw: RawCheckpoint = serde_json::from_str(text).map_err(corrupt)?;
    raw.hyper
        .validate()
        .map_err(|e| ModelError::CorruptCheckpoint(e.to_string()))?;
    let mut tensors = raw.tensors;
    let layout = raw.hyper.tensor_layout();
    let mut ordered = Vec::with_capacity(layout.len());
    for (name, shape) in &layout {
        let t = tensors
            .remove(name)
            .ok_or_else(|| ModelError::CorruptCheckpoint(format!("missing tensor {name}")))?;
        if &t.shape != shape {
            return Err(ModelError::CorruptCheckpoint(format!(
                "{name}: shape {:?}, expected {shape:?}",
                t.shape
            )));
        }
        let t = Tensor::new(t.shape, t.data)
            .map_err(|e| ModelError::CorruptCheckpoint(format!("{name}: {e}")))?;
        ordered.push(t);
    }
    if let Some(extra) = tensors.keys().next() {
        return Err(ModelError::CorruptCheckpoint(format!("unexpected tensor {extra}")));
    }
    let params = ModelParams::from_tensors(&raw.hyper, ordered)
        .map_err(|e| ModelError::CorruptCheckpoint(e.to_string()))?;
    if raw.meta.parameter_count != 0 && raw.meta.parameter_count != params.parameter_count() {
        return Err(ModelError::CorruptCheckpoint(format!(
            "meta records {} parameters, tensors hold {}",
            raw.meta.parameter_count,
            params.parameter_count()
        )));
    }
    Ok((
        GnnModel {
            hyper: raw.hyper,
            params,
        },
        raw.meta,
    ))
}

pub fn save_checkpoint(path: &Path, model: &GnnModel, meta: &CheckpointMeta) -> Result<(), ModelError> {
    std::fs::write(path, checkpoint_to_string(model, meta))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(GnnModel, CheckpointMeta), ModelError> {
    checkpoint_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> CheckpointMeta {
        CheckpointMeta {
            seed: 3,
            updates: 10,
            val_score: Some(0.5),
            ..CheckpointMeta::default()
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut model = GnnModel::new(HyperParams::default(), 4).unwrap();
        // Awkward values: subnormal, negative zero, extremes.
        let t = &mut model.params.tensors_mut()[2];
        t.data_mut()[..4].copy_from_slice(&[5e-324, -0.0, f64::MAX, 0.1 + 0.2]);
        let text = checkpoint_to_string(&model, &meta());
        let (back, m) = checkpoint_from_str(&text).unwrap();
        for (a, b) in model.params.tensors().iter().zip(back.params.tensors()) {
            let bits_a: Vec<u64> = a.data().iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u64> = b.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
        assert_eq!(back.hyper, model.hyper);
        assert_eq!(m.parameter_count, 21_901);
        assert_eq!(m.seed, 3);
        assert_eq!(checkpoint_to_string(&back, &m), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let model = GnnModel::new(HyperParams::default(), 9).unwrap();
        save_checkpoint(&path, &model, &meta()).unwrap();
        let (back, _) = load_checkpoint(&path).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn tampered_shape_is_corrupt() {
        let model = GnnModel::new(HyperParams::default(), 1).unwrap();
        let text = checkpoint_to_string(&model, &meta()).replacen("\"shape\":[35,28]", "\"shape\":[28,35]", 1);
        assert!(matches!(checkpoint_from_str(&text), Err(ModelError::CorruptCheckpoint(_))));
        let text = checkpoint_to_string(&model, &meta()).replacen("\"decoder.bias\"", "\"decoder.bogus\"", 1);
        assert!(matches!(checkpoint_from_str(&text), Err(ModelError::CorruptCheckpoint(_))));
    }

    #[test]
    fn version_mismatch() {
        let model = GnnModel::new(HyperParams::default(), 1).unwrap();
        let text = checkpoint_to_string(&model, &meta()).replacen("\"format_version\":1", "\"format_version\":2", 1);
        assert!(matches!(
            checkpoint_from_str(&text),
            Err(ModelError::VersionMismatch { found: 2, expected: 1 })
        ));
    }
}
