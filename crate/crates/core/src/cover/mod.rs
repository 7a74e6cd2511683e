//! Weighted directed vertex cover `g(S) = Σ_{u ∈ N(S) ∪ S} w_u`.

mod lazy;

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::ground::{check_element, check_set, IncrementalOracle, IndexSet, ModularCost, ValueOracle};

pub use lazy::{lazy_greedy, LazyMode, LazyQueue};

/// Directed graph with per-vertex weights. Out-neighbor lists are sorted and
/// free of duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    weights: Vec<f64>,
    self_loops: usize,
}

impl Digraph {
    /// Unit-weight graph from an edge list; parallel edges are collapsed.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_weights(n_vertices, edges, vec![1.0; n_vertices])
    }

    pub fn with_weights(n_vertices: usize, edges: &[(usize, usize)], weights: Vec<f64>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::param("n_vertices", "graph must have at least one vertex"));
        }
        if weights.len() != n_vertices {
            return Err(Error::param(
                "weights",
                format!("{} weights for {n_vertices} vertices", weights.len()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::param("weights", format!("weights must be non-negative, got {w}")));
        }
        let mut out = vec![Vec::new(); n_vertices];
        for &(u, v) in edges {
            check_element(u, n_vertices)?;
            check_element(v, n_vertices)?;
            out[u].push(v);
        }
        let mut self_loops = 0;
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.binary_search(&u).is_ok() {
                self_loops += 1;
            }
        }
        Ok(Self {
            out,
            weights,
            self_loops,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.out.len()
    }

    /// Number of distinct directed edges.
    pub fn n_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Number of distinct out-neighbors of `v` (a self-loop counts once).
    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Vertices with an edge to themselves.
    pub fn self_loop_count(&self) -> usize {
        self.self_loops
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Coverage oracle with an incrementally maintained covered set `N(S) ∪ S`.
#[derive(Debug, Clone)]
pub struct CoverState {
    graph: Arc<Digraph>,
    cursor: IndexSet,
    covered: Vec<bool>,
    covered_weight: f64,
}

impl CoverState {
    pub fn new(graph: impl Into<Arc<Digraph>>) -> Self {
        let graph = graph.into();
        let n = graph.n_vertices();
        Self {
            graph,
            cursor: IndexSet::empty(n),
            covered: vec![false; n],
            covered_weight: 0.0,
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn covered_weight(&self) -> f64 {
        self.covered_weight
    }

    pub fn is_covered(&self, v: usize) -> bool {
        self.covered[v]
    }
}

impl ValueOracle for CoverState {
    fn ground_size(&self) -> usize {
        self.graph.n_vertices()
    }

    fn value(&self, set: &IndexSet) -> Result<f64> {
        let n = self.ground_size();
        check_set(set, n)?;
        let mut hit = vec![false; n];
        let mut total = 0.0;
        for u in set.iter() {
            for v in std::iter::once(u).chain(self.graph.out_neighbors(u).iter().copied()) {
                if !hit[v] {
                    hit[v] = true;
                    total += self.graph.weight(v);
                }
            }
        }
        Ok(total)
    }
}

impl IncrementalOracle for CoverState {
    fn cursor(&self) -> &IndexSet {
        &self.cursor
    }

    fn marginal(&self, e: usize) -> Result<f64> {
        check_element(e, self.ground_size())?;
        if self.cursor.contains(e) {
            return Ok(0.0);
        }
        let mut gain = if self.covered[e] { 0.0 } else { self.graph.weight(e) };
        for &v in self.graph.out_neighbors(e) {
            if v != e && !self.covered[v] {
                gain += self.graph.weight(v);
            }
        }
        Ok(gain)
    }

    fn commit(&mut self, e: usize) -> Result<()> {
        check_element(e, self.ground_size())?;
        if !self.cursor.insert(e)? {
            return Err(Error::DuplicateCommit(e));
        }
        let graph = Arc::clone(&self.graph);
        for v in std::iter::once(e).chain(graph.out_neighbors(e).iter().copied()) {
            if !self.covered[v] {
                self.covered[v] = true;
                self.covered_weight += graph.weight(v);
            }
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.cursor.clear();
        self.covered.iter_mut().for_each(|c| *c = false);
        self.covered_weight = 0.0;
    }

    fn cursor_value(&self) -> Result<f64> {
        Ok(self.covered_weight)
    }
}

/// `c(v) = 1 + max{d(v) − q, 0}` with `d(v)` the out-degree.
pub fn degree_costs(graph: &Digraph, q: f64) -> Result<ModularCost> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::param("q", format!("threshold must be a finite non-negative number, got {q}")));
    }
    ModularCost::new(
        (0..graph.n_vertices())
            .map(|v| 1.0 + (graph.out_degree(v) as f64 - q).max(0.0))
            .collect(),
    )
}

/// Directed star on `n` vertices with center `0`, unit weights, center cost
/// `n − (1/2 + ε)` and leaf cost `1/2`. Plain greedy takes the center and
/// stops; any `k` leaves are worth `k/2`.
pub fn star_instance(n: usize, epsilon: f64) -> Result<(Digraph, ModularCost)> {
    if n < 2 {
        return Err(Error::param("n", "star needs at least two vertices"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let edges: Vec<_> = (1..n).map(|leaf| (0, leaf)).collect();
    let graph = Digraph::from_edges(n, &edges)?;
    let mut costs = vec![0.5; n];
    costs[0] = n as f64 - (0.5 + epsilon);
    Ok((graph, ModularCost::new(costs)?))
}

/// Unit-weight graph with exactly `m` distinct non-loop edges drawn uniformly.
pub fn random_digraph(n: usize, m: usize, seed: u64) -> Result<Digraph> {
    let max_edges = n.saturating_mul(n.saturating_sub(1));
    if m > max_edges {
        return Err(Error::param("m", format!("{m} edges do not fit {n} vertices without loops")));
    }
    let mut rng = rng_from_seed(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    Digraph::from_edges(n, &edges)
}
