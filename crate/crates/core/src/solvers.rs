//! Hamiltonian-cycle solvers.
//!
//! Decoders ([`greedy_decode`], [`beam_decode`]) drive any [`StepScorer`];
//! [`GnnScorer`] plugs in the network. [`least_degree_first`] is the
//! classical baseline, [`exact_hcp`] a complete backtracking search and
//! [`brute_force_tsp`] an exhaustive tour enumeration for tiny instances.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{encode_walk, is_hamiltonian_cycle, Graph, Node, Walk};
use crate::model::{step_mask, GnnModel, ModelError, PersistentState};
use crate::rng::{mix, rng_from};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("beam width must be at least 1, got {0}")]
    InvalidBeamWidth(usize),
    #[error("search budget of {0} expansions exhausted")]
    BudgetExhausted(u64),
    #[error("instance of size {n} exceeds the limit of {max}")]
    SizeTooLarge { n: usize, max: usize },
    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SolveMeta {
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_width: Option<usize>,
    /// Sum of log-probabilities of the chosen steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expanded: Option<u64>,
}

/// Output of a solver. A walk that is not a Hamiltonian cycle counts as
/// the solver predicting that none exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub walk: Walk,
    pub is_solution: bool,
    pub elapsed: Duration,
    pub meta: SolveMeta,
}

impl SolveResult {
    fn new(g: &Graph, walk: Walk, started: Instant, meta: SolveMeta) -> Self {
        SolveResult {
            is_solution: is_hamiltonian_cycle(g, &walk),
            walk,
            elapsed: started.elapsed(),
            meta,
        }
    }
}

/// Identifies one scoring call; scorers that use randomness derive their
/// generator from it, so equal keys see equal random features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepKey {
    pub seed: u64,
    pub step: usize,
    pub beam: usize,
}

impl StepKey {
    pub fn derived_seed(&self) -> u64 {
        mix(self.seed, &[self.step as u64, self.beam as u64])
    }
}

/// Next-step probability provider. Returned probabilities must be zero
/// outside the step mask and sum to one over it.
pub trait StepScorer {
    type State: Clone;

    fn initial_state(&self, g: &Graph) -> Self::State;

    fn score(
        &self,
        g: &Graph,
        prefix: &Walk,
        state: &Self::State,
        key: StepKey,
    ) -> Result<(Vec<f64>, Self::State), SolverError>;
}

/// The network as a [`StepScorer`].
#[derive(Debug, Clone, Copy)]
pub struct GnnScorer<'a> {
    model: &'a GnnModel,
}

impl<'a> GnnScorer<'a> {
    pub fn new(model: &'a GnnModel) -> Self {
        GnnScorer { model }
    }
}

impl StepScorer for GnnScorer<'_> {
    type State = PersistentState;

    fn initial_state(&self, g: &Graph) -> PersistentState {
        self.model.initial_state(g.node_count())
    }

    fn score(
        &self,
        g: &Graph,
        prefix: &Walk,
        state: &PersistentState,
        key: StepKey,
    ) -> Result<(Vec<f64>, PersistentState), SolverError> {
        let x = encode_walk(g, prefix);
        let mut rng = rng_from(key.derived_seed());
        Ok(self.model.apply(g, &x, state, &mut rng)?)
    }
}

/// Argmax over the mask, lowest index on ties.
fn best_allowed(p: &[f64], mask: &[bool]) -> Option<Node> {
    let mut best: Option<Node> = None;
    for (v, (&pv, &allowed)) in p.iter().zip(mask).enumerate() {
        if allowed && pv > 0.0 && best.is_none_or(|b| pv > p[b]) {
            best = Some(v);
        }
    }
    best
}

fn failure(g: &Graph, started: Instant, meta: SolveMeta) -> SolveResult {
    SolveResult::new(g, Walk::empty(), started, meta)
}

/// Extends the walk with the most probable node until some node repeats.
pub fn greedy_decode<S: StepScorer>(g: &Graph, scorer: &S, seed: u64) -> Result<SolveResult, SolverError> {
    let started = Instant::now();
    let mut meta = SolveMeta {
        strategy: "greedy".into(),
        log_score: Some(0.0),
        ..SolveMeta::default()
    };
    if g.isolated_node().is_some() {
        meta.log_score = None;
        return Ok(failure(g, started, meta));
    }
    let mut walk = Walk::empty();
    let mut state = scorer.initial_state(g);
    let mut log_score = 0.0;
    for step in 0..=g.node_count() {
        let (p, next) = scorer.score(g, &walk, &state, StepKey { seed, step, beam: 0 })?;
        let Some(v) = best_allowed(&p, &step_mask(g, walk.last())) else {
            break;
        };
        log_score += p[v].ln();
        let repeat = walk.contains(v);
        walk.push(g, v).expect("masked choice is adjacent");
        state = next;
        if repeat {
            break;
        }
    }
    meta.log_score = Some(log_score);
    Ok(SolveResult::new(g, walk, started, meta))
}

/// A partial walk tracked by beam search.
#[derive(Debug, Clone)]
pub struct ScoredBeam<T> {
    pub walk: Walk,
    pub log_score: f64,
    pub state: T,
    pub terminated: bool,
}

/// Beam search over walks ranked by cumulative log-probability.
///
/// Each step extends every live beam over all allowed nodes and keeps the
/// `beta` best candidates. A kept candidate that revisits a node
/// terminates: if it is a Hamiltonian cycle it is returned at once,
/// otherwise it leaves the frontier and is remembered as a fallback. When
/// the frontier empties, the best terminated walk is returned. Ties rank
/// by parent slot, then node index, so `beta = 1` reproduces
/// [`greedy_decode`].
pub fn beam_decode<S: StepScorer>(g: &Graph, scorer: &S, beta: usize, seed: u64) -> Result<SolveResult, SolverError> {
    if beta == 0 {
        return Err(SolverError::InvalidBeamWidth(beta));
    }
    let started = Instant::now();
    let meta = |score: Option<f64>| SolveMeta {
        strategy: "beam".into(),
        beam_width: Some(beta),
        log_score: score,
        ..SolveMeta::default()
    };
    if g.isolated_node().is_some() {
        return Ok(failure(g, started, meta(None)));
    }
    let mut frontier = vec![ScoredBeam {
        walk: Walk::empty(),
        log_score: 0.0,
        state: scorer.initial_state(g),
        terminated: false,
    }];
    let mut fallback: Option<ScoredBeam<S::State>> = None;

    for step in 0..=g.node_count() {
        // (score, parent slot, node, new state)
        let mut candidates = Vec::new();
        for (slot, beam) in frontier.iter().enumerate() {
            let (p, next) = scorer.score(g, &beam.walk, &beam.state, StepKey { seed, step, beam: slot })?;
            let mask = step_mask(g, beam.walk.last());
            for v in 0..g.node_count() {
                if mask[v] && p[v] > 0.0 {
                    candidates.push((beam.log_score + p[v].ln(), slot, v, next.clone()));
                }
            }
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        candidates.truncate(beta);

        let mut next_frontier = Vec::with_capacity(beta);
        for (score, slot, v, state) in candidates {
            let parent = &frontier[slot];
            let terminated = parent.walk.contains(v);
            let mut walk = parent.walk.clone();
            walk.push(g, v).expect("masked choice is adjacent");
            let beam = ScoredBeam {
                walk,
                log_score: score,
                state,
                terminated,
            };
            if terminated {
                if is_hamiltonian_cycle(g, &beam.walk) {
                    return Ok(SolveResult::new(g, beam.walk, started, meta(Some(score))));
                }
                if fallback.as_ref().is_none_or(|f| score > f.log_score) {
                    fallback = Some(beam);
                }
            } else {
                next_frontier.push(beam);
            }
        }
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
    }
    match fallback {
        Some(best) => Ok(SolveResult::new(g, best.walk, started, meta(Some(best.log_score)))),
        None => Ok(failure(g, started, meta(None))),
    }
}

/// Greedy walk that always moves to the unvisited neighbor of least degree,
/// started from every node of maximum degree.
///
/// The first longest walk wins. If it covers every node and its ends are
/// adjacent it is closed into a cycle.
pub fn least_degree_first(g: &Graph) -> SolveResult {
    let started = Instant::now();
    let n = g.node_count();
    let max_degree = g.max_degree();
    let mut best: Option<Vec<Node>> = None;
    for start in g.nodes().filter(|&v| g.degree(v) == max_degree) {
        let mut visited = vec![false; n];
        let mut nodes = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(next) = g
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&u| !visited[u])
            .min_by_key(|&u| (g.degree(u), u))
        {
            visited[next] = true;
            nodes.push(next);
            cur = next;
        }
        if best.as_ref().is_none_or(|b| nodes.len() > b.len()) {
            best = Some(nodes);
        }
    }
    let walk = match best {
        Some(mut nodes) => {
            let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
            if nodes.len() == n && n >= 3 && g.has_edge(last, first) {
                nodes.push(first);
            }
            Walk::new(g, nodes).expect("built from adjacency lists")
        }
        None => Walk::empty(),
    };
    SolveResult::new(
        g,
        walk,
        started,
        SolveMeta {
            strategy: "least-degree".into(),
            ..SolveMeta::default()
        },
    )
}

struct Backtrack<'a> {
    g: &'a Graph,
    start: Node,
    visited: Vec<bool>,
    path: Vec<Node>,
    expanded: u64,
    budget: u64,
}

impl Backtrack<'_> {
    /// Connections still usable by unvisited `u`: unvisited neighbors plus
    /// the two path endpoints.
    fn available(&self, u: Node, cur: Node) -> usize {
        self.g
            .neighbors(u)
            .iter()
            .filter(|&&w| !self.visited[w] || w == cur || w == self.start)
            .count()
    }

    /// Necessary conditions for the current path to extend to a cycle.
    fn feasible(&self, cur: Node) -> bool {
        let n = self.g.node_count();
        for u in 0..n {
            if !self.visited[u] && self.available(u, cur) < 2 {
                return false;
            }
        }
        if !self.g.neighbors(self.start).iter().any(|&w| !self.visited[w]) {
            return false;
        }
        // Unvisited nodes must all hang off `cur` through unvisited nodes.
        let mut seen = vec![false; n];
        let mut stack = vec![cur];
        seen[cur] = true;
        let mut reached = 0;
        while let Some(v) = stack.pop() {
            for &w in self.g.neighbors(v) {
                if !self.visited[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == n - self.path.len()
    }

    fn search(&mut self) -> Result<bool, SolverError> {
        self.expanded += 1;
        if self.expanded > self.budget {
            return Err(SolverError::BudgetExhausted(self.budget));
        }
        let n = self.g.node_count();
        let cur = *self.path.last().expect("path starts non-empty");
        if self.path.len() == n {
            return Ok(self.g.has_edge(cur, self.start));
        }
        if !self.feasible(cur) {
            return Ok(false);
        }
        let mut options: Vec<(usize, Node)> = self
            .g
            .neighbors(cur)
            .iter()
            .filter(|&&u| !self.visited[u])
            .map(|&u| (self.available(u, cur), u))
            .collect();
        options.sort_unstable();
        // A neighbor with exactly two usable connections needs the edge to
        // `cur`; away from the start only one such neighbor can get it.
        let forced = options.iter().take_while(|(a, _)| *a == 2).count();
        if cur != self.start {
            if forced > 1 {
                return Ok(false);
            }
            if forced == 1 {
                options.truncate(1);
            }
        } else if forced > 2 {
            return Ok(false);
        }
        for (_, u) in options {
            self.visited[u] = true;
            self.path.push(u);
            if self.search()? {
                return Ok(true);
            }
            self.path.pop();
            self.visited[u] = false;
        }
        Ok(false)
    }
}

/// Complete backtracking search for a Hamiltonian cycle.
///
/// Returns `Ok(None)` when none exists and
/// [`SolverError::BudgetExhausted`] when more than `node_budget` search
/// nodes would be expanded.
pub fn exact_hcp(g: &Graph, node_budget: u64) -> Result<Option<Walk>, SolverError> {
    Ok(exact_hcp_counted(g, node_budget)?.0)
}

/// [`exact_hcp`] that also reports the number of expanded search nodes.
pub fn exact_hcp_counted(g: &Graph, node_budget: u64) -> Result<(Option<Walk>, u64), SolverError> {
    let n = g.node_count();
    if n < 3 || g.nodes().any(|v| g.degree(v) < 2) {
        return Ok((None, 0));
    }
    let start = g.nodes().min_by_key(|&v| (g.degree(v), v)).expect("n >= 3");
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut bt = Backtrack {
        g,
        start,
        visited,
        path: vec![start],
        expanded: 0,
        budget: node_budget,
    };
    if bt.search()? {
        let mut nodes = bt.path;
        nodes.push(start);
        Ok((Some(Walk::new(g, nodes).expect("search follows edges")), bt.expanded))
    } else {
        Ok((None, bt.expanded))
    }
}

/// [`exact_hcp`] as a [`SolveResult`]; an exhausted budget counts as
/// unsolved.
pub fn exact_solve(g: &Graph, node_budget: u64) -> SolveResult {
    let started = Instant::now();
    let (walk, expanded) = match exact_hcp_counted(g, node_budget) {
        Ok((w, e)) => (w.unwrap_or_default(), Some(e)),
        Err(_) => (Walk::empty(), Some(node_budget)),
    };
    SolveResult::new(
        g,
        walk,
        started,
        SolveMeta {
            strategy: "exact".into(),
            expanded,
            ..SolveMeta::default()
        },
    )
}

pub const TSP_MAX_NODES: usize = 10;

/// Shortest closed tour by exhaustive enumeration, as `(0 .. 0, length)`.
/// Among equally short tours the lexicographically first is returned.
pub fn brute_force_tsp(weights: &[Vec<f64>]) -> Result<(Vec<Node>, f64), SolverError> {
    let n = weights.len();
    if n > TSP_MAX_NODES {
        return Err(SolverError::SizeTooLarge {
            n,
            max: TSP_MAX_NODES,
        });
    }
    if n == 0 {
        return Err(SolverError::InvalidWeights("empty matrix".into()));
    }
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(SolverError::InvalidWeights(format!("row {i} has {} entries", row.len())));
        }
        for (j, &w) in row.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) || w != weights[j][i] {
                return Err(SolverError::InvalidWeights(format!("entry ({i}, {j}) = {w}")));
            }
        }
    }
    if n == 1 {
        return Ok((vec![0, 0], 0.0));
    }
    let mut perm: Vec<Node> = (1..n).collect();
    let mut best: Option<(Vec<Node>, f64)> = None;
    loop {
        // Each undirected tour appears twice; keep the orientation with the
        // smaller second node.
        if n < 3 || perm[0] < perm[perm.len() - 1] {
            let mut len = weights[0][perm[0]] + weights[perm[perm.len() - 1]][0];
            for pair in perm.windows(2) {
                len += weights[pair[0]][pair[1]];
            }
            if best.as_ref().is_none_or(|(_, b)| len < *b) {
                let mut tour = Vec::with_capacity(n + 1);
                tour.push(0);
                tour.extend_from_slice(&perm);
                tour.push(0);
                best = Some((tour, len));
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("at least one tour"))
}

fn next_permutation(xs: &mut [Node]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_er;

    /// Scores nodes by a fixed preference table, masked to the step mask.
    /// Visited nodes lose `VISITED_PENALTY`.
    struct TableScorer {
        logits: Vec<f64>,
    }

    const VISITED_PENALTY: f64 = 10.0;

    impl TableScorer {
        fn logit(&self, prefix: &Walk, v: Node) -> f64 {
            self.logits[v] - if prefix.contains(v) { VISITED_PENALTY } else { 0.0 }
        }
    }

    impl StepScorer for TableScorer {
        type State = ();

        fn initial_state(&self, _: &Graph) {}

        fn score(&self, g: &Graph, prefix: &Walk, _: &(), _: StepKey) -> Result<(Vec<f64>, ()), SolverError> {
            let mask = step_mask(g, prefix.last());
            let z: f64 = (0..g.node_count()).filter(|&v| mask[v]).map(|v| self.logit(prefix, v).exp()).sum();
            let p = (0..g.node_count())
                .map(|v| if mask[v] { self.logit(prefix, v).exp() / z } else { 0.0 })
                .collect();
            Ok((p, ()))
        }
    }

    /// Always points at the successor of the last node on a fixed cycle.
    struct FollowCycle {
        order: Vec<Node>,
    }

    impl StepScorer for FollowCycle {
        type State = ();

        fn initial_state(&self, _: &Graph) {}

        fn score(&self, g: &Graph, prefix: &Walk, _: &(), _: StepKey) -> Result<(Vec<f64>, ()), SolverError> {
            let n = g.node_count();
            let mask = step_mask(g, prefix.last());
            let target = match prefix.last() {
                None => self.order[0],
                Some(v) => {
                    let pos = self.order.iter().position(|&u| u == v).unwrap();
                    self.order[(pos + 1) % n]
                }
            };
            let k = mask.iter().filter(|&&m| m).count() as f64;
            let p = (0..n)
                .map(|v| match (mask[v], v == target) {
                    (true, true) => 0.9,
                    (true, false) => 0.1 / (k - 1.0),
                    _ => 0.0,
                })
                .collect();
            Ok((p, ()))
        }
    }

    #[test]
    fn greedy_follows_planted_order() {
        let g = Graph::cycle(5).unwrap();
        let res = greedy_decode(&g, &FollowCycle { order: vec![0, 1, 2, 3, 4] }, 0).unwrap();
        assert!(res.is_solution);
        assert_eq!(res.walk.nodes(), &[0, 1, 2, 3, 4, 0]);
    }

    #[test]
    fn greedy_terminates_on_revisit() {
        for s in 0..30 {
            let g = gen_er(9, 0.4, s).unwrap();
            if g.isolated_node().is_some() {
                let res = greedy_decode(&g, &TableScorer { logits: vec![0.0; 9] }, 0).unwrap();
                assert!(res.walk.is_empty() && !res.is_solution);
                continue;
            }
            let logits: Vec<f64> = (0..9).map(|v| ((v * 7 + s as usize) % 5) as f64).collect();
            let res = greedy_decode(&g, &TableScorer { logits }, 0).unwrap();
            let nodes = res.walk.nodes();
            assert!(nodes.len() <= 10);
            let last = *nodes.last().unwrap();
            assert!(nodes[..nodes.len() - 1].contains(&last));
        }
    }

    /// Hexagon 0..5 plus chord 1-3. Greedy takes the chord, runs 0 1 3 2
    /// and is stuck at 2; the runner-up branch 0 1 2 3 4 5 0 is the
    /// Hamiltonian cycle.
    fn dead_end_fixture() -> (Graph, TableScorer) {
        let mut edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.push((1, 3));
        let g = Graph::new(6, &edges).unwrap();
        let logits = vec![6.0, 5.0, 3.0, 3.5, 1.0, 0.5];
        (g, TableScorer { logits })
    }

    #[test]
    fn beam_recovers_where_greedy_dead_ends() {
        let (g, scorer) = dead_end_fixture();
        assert!(exact_hcp(&g, 1000).unwrap().is_some());
        let greedy = greedy_decode(&g, &scorer, 0).unwrap();
        assert_eq!(greedy.walk.nodes(), &[0, 1, 3, 2, 1]);
        assert!(!greedy.is_solution);
        let beam = beam_decode(&g, &scorer, 2, 0).unwrap();
        assert!(beam.is_solution, "{}", beam.walk);
        let beam1 = beam_decode(&g, &scorer, 1, 0).unwrap();
        assert_eq!(beam1.walk, greedy.walk);
    }

    #[test]
    fn beam_width_one_matches_greedy() {
        for s in 0..40 {
            let g = gen_er(10, 0.35, s).unwrap();
            let logits: Vec<f64> = (0..10).map(|v| ((v * 13 + 3 * s as usize) % 7) as f64 * 0.3).collect();
            let scorer = TableScorer { logits };
            let a = greedy_decode(&g, &scorer, s).unwrap();
            let b = beam_decode(&g, &scorer, 1, s).unwrap();
            assert_eq!(a.walk, b.walk);
            assert_eq!(a.is_solution, b.is_solution);
        }
    }

    #[test]
    fn beam_rejects_zero_width() {
        let (g, scorer) = dead_end_fixture();
        assert!(matches!(beam_decode(&g, &scorer, 0, 0), Err(SolverError::InvalidBeamWidth(0))));
    }

    #[test]
    fn least_degree_on_cycles() {
        for n in 3..=10 {
            let g = Graph::cycle(n).unwrap();
            let res = least_degree_first(&g);
            assert!(res.is_solution, "C{n}: {}", res.walk);
        }
    }

    #[test]
    fn least_degree_on_star() {
        let res = least_degree_first(&Graph::star(3).unwrap());
        assert!(!res.is_solution);
        assert_eq!(res.walk.len(), 2);
    }

    #[test]
    fn exact_small_cases() {
        let c5 = Graph::cycle(5).unwrap();
        let w = exact_hcp(&c5, 1000).unwrap().unwrap();
        assert!(is_hamiltonian_cycle(&c5, &w));
        assert_eq!(exact_hcp(&Graph::path(4).unwrap(), 1000).unwrap(), None);
        assert_eq!(exact_hcp(&Graph::petersen(), 100_000).unwrap(), None);
        assert_eq!(exact_hcp(&Graph::complete(2).unwrap(), 10).unwrap(), None);
        let k6 = Graph::complete(6).unwrap();
        assert!(exact_hcp(&k6, 1000).unwrap().is_some());
    }

    #[test]
    fn exact_budget_is_distinct_from_absence() {
        // Petersen graph is 3-regular so no degree shortcut applies.
        assert!(matches!(exact_hcp(&Graph::petersen(), 3), Err(SolverError::BudgetExhausted(3))));
    }

    #[test]
    fn tsp_small_cases() {
        let tri = vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]];
        let (tour, len) = brute_force_tsp(&tri).unwrap();
        assert_eq!(len, 1.5);
        assert_eq!(tour, vec![0, 1, 2, 0]);
        let too_big = vec![vec![0.0; 11]; 11];
        assert!(matches!(brute_force_tsp(&too_big), Err(SolverError::SizeTooLarge { n: 11, max: 10 })));
        let asym = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(matches!(brute_force_tsp(&asym), Err(SolverError::InvalidWeights(_))));
    }

    #[test]
    fn tsp_enumerates_each_undirected_tour_once() {
        let mut perm: Vec<Node> = (1..6).collect();
        let mut count = 0;
        loop {
            if perm[0] < perm[perm.len() - 1] {
                count += 1;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        // (6 - 1)! / 2
        assert_eq!(count, 60);
    }
}
