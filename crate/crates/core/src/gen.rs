//! Random graph generators: plain Erdős–Rényi, the critical Hamiltonicity
//! regime, and training examples with a planted Hamiltonian cycle.
//!
//! Edge sampling visits pairs in lexicographic order `(u, v)`, `u < v`,
//! drawing one uniform per pair, so a seed fully determines the graph.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, GraphRecord, Walk};
use crate::rng::{mix, rng_from, Rng};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("graph size {n} too small (need at least {min})")]
    SizeTooSmall { n: usize, min: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("dataset line {line}: {msg}")]
    Dataset { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_closed_unit(p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::InvalidProbability(p))
    }
}

fn sample_pairs(rng: &mut Rng, n: usize, p: f64, edges: &mut Vec<(usize, usize)>) {
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
}

/// Erdős–Rényi `G(n, p)`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph, GenError> {
    check_closed_unit(p)?;
    if n == 0 {
        return Err(GenError::SizeTooSmall { n, min: 1 });
    }
    let mut rng = rng_from(seed);
    let mut edges = Vec::new();
    sample_pairs(&mut rng, n, p, &mut edges);
    Ok(Graph::new(n, &edges)?)
}

/// Parameters of the critical regime, where `P(G(n, p_n) is Hamiltonian)`
/// tends to `p_hamilton`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRegimeSpec {
    pub n: usize,
    pub p_hamilton: f64,
}

impl CriticalRegimeSpec {
    pub fn new(n: usize, p_hamilton: f64) -> Result<Self, GenError> {
        if n < 3 {
            return Err(GenError::SizeTooSmall { n, min: 3 });
        }
        if !(p_hamilton > 0.0 && p_hamilton < 1.0) {
            return Err(GenError::InvalidProbability(p_hamilton));
        }
        Ok(CriticalRegimeSpec { n, p_hamilton })
    }

    /// `p_n = (ln n + ln ln n - ln ln (1/p_H)) / (n - 1)`, clamped to `[0, 1]`.
    pub fn edge_probability(&self) -> f64 {
        let n = self.n as f64;
        let raw = (n.ln() + n.ln().ln() - (1.0 / self.p_hamilton).ln().ln()) / (n - 1.0);
        raw.clamp(0.0, 1.0)
    }
}

/// Edge probability of the critical regime for size `n`.
pub fn critical_p(n: usize, p_hamilton: f64) -> Result<f64, GenError> {
    Ok(CriticalRegimeSpec::new(n, p_hamilton)?.edge_probability())
}

/// `G(n, critical_p(n, p_hamilton))`.
pub fn gen_critical(n: usize, p_hamilton: f64, seed: u64) -> Result<Graph, GenError> {
    gen_er(n, critical_p(n, p_hamilton)?, seed)
}

/// A graph together with a Hamiltonian cycle planted in it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub graph: Graph,
    /// Closed walk `v1 .. vn v1`.
    pub cycle: Walk,
}

/// Joins a random permutation of the nodes into a cycle, then adds every
/// other pair independently with probability `p_edge`.
pub fn gen_train_example(n: usize, p_edge: f64, seed: u64) -> Result<TrainExample, GenError> {
    check_closed_unit(p_edge)?;
    if n < 3 {
        return Err(GenError::SizeTooSmall { n, min: 3 });
    }
    let mut rng = rng_from(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut edges: Vec<_> = (0..n).map(|i| (perm[i], perm[(i + 1) % n])).collect();
    sample_pairs(&mut rng, n, p_edge, &mut edges);
    let graph = Graph::new(n, &edges)?;
    let mut nodes = perm;
    nodes.push(nodes[0]);
    let cycle = Walk::new(&graph, nodes)?;
    Ok(TrainExample { graph, cycle })
}

/// Which generator produced a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorParams {
    Er { p: f64 },
    Critical { p_hamilton: f64 },
    Planted { p_edge: f64 },
}

/// First line of a JSON-lines dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    #[serde(flatten)]
    pub generator: GeneratorParams,
    pub n: usize,
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<GraphRecord>,
}

impl Dataset {
    /// Generates `count` graphs; instance `i` uses seed `mix(seed, [i])`.
    pub fn generate(
        generator: GeneratorParams,
        n: usize,
        count: usize,
        seed: u64,
    ) -> Result<Self, GenError> {
        let records = (0..count)
            .map(|i| {
                let s = mix(seed, &[i as u64]);
                Ok(match &generator {
                    GeneratorParams::Er { p } => GraphRecord::from_graph(&gen_er(n, *p, s)?, None),
                    GeneratorParams::Critical { p_hamilton } => {
                        GraphRecord::from_graph(&gen_critical(n, *p_hamilton, s)?, None)
                    }
                    GeneratorParams::Planted { p_edge } => {
                        let ex = gen_train_example(n, *p_edge, s)?;
                        GraphRecord::from_graph(&ex.graph, Some(&ex.cycle))
                    }
                })
            })
            .collect::<Result<Vec<_>, GenError>>()?;
        Ok(Dataset {
            header: DatasetHeader {
                generator,
                n,
                seed,
                count,
            },
            records,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), GenError> {
        writeln!(out, "{}", serde_json::to_string(&self.header).expect("header serializes"))?;
        for r in &self.records {
            writeln!(out, "{}", serde_json::to_string(r).expect("record serializes"))?;
        }
        Ok(())
    }

    /// Reads a dataset with header line.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, GenError> {
        let mut header = None;
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |e: serde_json::Error| GenError::Dataset {
                line: i + 1,
                msg: e.to_string(),
            };
            if header.is_none() {
                header = Some(serde_json::from_str::<DatasetHeader>(&line).map_err(bad)?);
            } else {
                let rec: GraphRecord = serde_json::from_str(&line).map_err(bad)?;
                rec.to_graph().map_err(|e| GenError::Dataset {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
                records.push(rec);
            }
        }
        let header = header.ok_or(GenError::Dataset {
            line: 0,
            msg: "missing header".into(),
        })?;
        Ok(Dataset { header, records })
    }
}

/// Reads graphs from either a JSON-lines dataset or a single graph in the
/// plain-text format, deciding by the first non-comment character.
pub fn read_graphs(text: &str) -> Result<Vec<(Graph, Option<Walk>)>, GenError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(l) if l.starts_with('{') => {
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let value: serde_json::Value =
                    serde_json::from_str(line).map_err(|e| GenError::Dataset {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
                if value.get("edges").is_none() {
                    continue; // header
                }
                let rec: GraphRecord =
                    serde_json::from_value(value).map_err(|e| GenError::Dataset {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
                out.push(rec.to_graph()?);
            }
            Ok(out)
        }
        _ => Ok(vec![(Graph::parse(text)?, None)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_hamiltonian_cycle;

    #[test]
    fn er_extremes() {
        assert_eq!(gen_er(50, 0.0, 3).unwrap().edge_count(), 0);
        assert_eq!(gen_er(10, 1.0, 3).unwrap().edge_count(), 45);
        assert!(matches!(gen_er(5, 1.5, 0), Err(GenError::InvalidProbability(_))));
        assert!(matches!(gen_er(5, -0.1, 0), Err(GenError::InvalidProbability(_))));
    }

    #[test]
    fn er_is_deterministic() {
        assert_eq!(gen_er(30, 0.3, 11).unwrap(), gen_er(30, 0.3, 11).unwrap());
        assert_ne!(gen_er(30, 0.3, 11).unwrap(), gen_er(30, 0.3, 12).unwrap());
    }

    #[test]
    fn er_mean_edge_count() {
        // Binomial(4950, 0.25): mean 1237.5, sd 30.46; sample mean over
        // 10 000 seeds has standard error 0.30.
        let total: usize = (0..10_000u64)
            .map(|s| gen_er(100, 0.25, s).unwrap().edge_count())
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 1237.5).abs() <= 15.0, "mean {mean}");
        assert!((mean - 1237.5).abs() <= 4.0 * 30.46 / 100.0, "mean {mean}");
    }

    #[test]
    fn critical_p_values() {
        // Direct evaluation in f64 of the closed form.
        let n: f64 = 25.0;
        let direct = (n.ln() + n.ln().ln() - (1.0f64 / 0.8).ln().ln()) / 24.0;
        let p = critical_p(25, 0.8).unwrap();
        assert_eq!(p, direct);
        assert!((p - 0.245327).abs() < 1e-6, "{p}");
        assert_eq!(critical_p(3, 0.8).unwrap(), 1.0);
        assert!(matches!(critical_p(2, 0.8), Err(GenError::SizeTooSmall { .. })));
        assert!(matches!(critical_p(10, 1.0), Err(GenError::InvalidProbability(_))));
        assert!(matches!(critical_p(10, 0.0), Err(GenError::InvalidProbability(_))));
    }

    #[test]
    fn critical_p_monotone_and_bounded() {
        for n in 3..500 {
            let hi = critical_p(n, 0.9).unwrap();
            let lo = critical_p(n, 0.5).unwrap();
            assert!((0.0..=1.0).contains(&hi) && (0.0..=1.0).contains(&lo));
            assert!(hi >= lo);
            if hi < 1.0 {
                assert!(hi > lo, "n={n}");
            }
        }
        for &ph in &[1e-9, 0.01, 0.5, 0.99, 1.0 - 1e-12] {
            let p = critical_p(200, ph).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn critical_is_er_composition() {
        let p = critical_p(25, 0.8).unwrap();
        for s in 0..20 {
            assert_eq!(gen_critical(25, 0.8, s).unwrap(), gen_er(25, p, s).unwrap());
        }
    }

    #[test]
    fn planted_cycle_only() {
        for s in 0..10 {
            let ex = gen_train_example(12, 0.0, s).unwrap();
            assert_eq!(ex.graph.edge_count(), 12);
            assert!(is_hamiltonian_cycle(&ex.graph, &ex.cycle));
        }
        assert!(matches!(gen_train_example(2, 0.1, 0), Err(GenError::SizeTooSmall { .. })));
        assert!(matches!(gen_train_example(5, 2.0, 0), Err(GenError::InvalidProbability(_))));
    }

    #[test]
    fn planted_cycle_valid_for_all_sizes() {
        for n in 3..=200 {
            for s in 0..100 {
                let ex = gen_train_example(n, 0.125, mix(s, &[n as u64])).unwrap();
                assert!(is_hamiltonian_cycle(&ex.graph, &ex.cycle), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn planted_mean_edge_count() {
        // 25 cycle edges plus 0.125 of the remaining 275 pairs.
        let total: usize = (0..10_000u64)
            .map(|s| gen_train_example(25, 0.125, s).unwrap().graph.edge_count())
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 59.375).abs() <= 1.0, "mean {mean}");
    }

    #[test]
    fn dataset_round_trip() {
        let ds = Dataset::generate(GeneratorParams::Planted { p_edge: 0.2 }, 8, 5, 99).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"generator":"planted","p_edge":0.2,"n":8,"seed":99,"count":5}"#));
        let back = Dataset::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, ds);
        let mut again = Vec::new();
        back.write_jsonl(&mut again).unwrap();
        assert_eq!(again, buf);
        let graphs = read_graphs(&text).unwrap();
        assert_eq!(graphs.len(), 5);
        assert!(graphs.iter().all(|(g, c)| is_hamiltonian_cycle(g, c.as_ref().unwrap())));
    }

    #[test]
    fn read_plain_text_graph() {
        let graphs = read_graphs("# c3\n3 3\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].0.edge_count(), 3);
    }
}
