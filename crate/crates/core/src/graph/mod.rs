//! Weighted graph primitives shared by every stage.

mod jaccard;
mod pagerank;

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

pub use jaccard::weighted_jaccard;
pub use pagerank::{pagerank, pagerank_with, PageRankConfig};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("edge {0}-{1} has non-finite weight")]
    NonFiniteWeight(usize, usize),
    #[error("node index {0} out of range")]
    NoSuchNode(usize),
    #[error("graph has no nodes")]
    Empty,
    #[error("damping must lie in (0, 1), got {0}")]
    BadDamping(f64),
    #[error("negative weight {weight} for {key:?}")]
    NegativeWeight { key: String, weight: f64 },
    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: NodeWeightVector,
    },
    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Labelled graph with real edge weights.
///
/// No self-loops; parallel edges are merged by summing; an undirected graph
/// stores each edge once with `source < target`. Edges are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    directed: bool,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
}

/// How a directed graph is turned into an undirected one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Every adjacent pair gets weight 1.
    Unit,
    /// The pair weight is the sum of both directions.
    Sum,
}

pub struct GraphBuilder {
    directed: bool,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    weights: BTreeMap<(usize, usize), f64>,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        Self {
            directed,
            labels: Vec::new(),
            index: HashMap::new(),
            weights: BTreeMap::new(),
        }
    }

    pub fn with_nodes<I, S>(directed: bool, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut b = Self::new(directed);
        for l in labels {
            b.node(l);
        }
        b
    }

    /// Index of `label`, adding the node if it is new.
    pub fn node(&mut self, label: impl Into<String>) -> usize {
        let label = label.into();
        if let Some(&i) = self.index.get(&label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.clone(), i);
        self.labels.push(label);
        i
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Add weight to the edge `u -> v` (or `u -- v`). Self-loops are dropped.
    pub fn edge(&mut self, u: usize, v: usize, weight: f64) -> Result<(), GraphError> {
        let n = self.labels.len();
        if u >= n {
            return Err(GraphError::NoSuchNode(u));
        }
        if v >= n {
            return Err(GraphError::NoSuchNode(v));
        }
        if !weight.is_finite() {
            return Err(GraphError::NonFiniteWeight(u, v));
        }
        if u == v {
            return Ok(());
        }
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        *self.weights.entry(key).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn labeled_edge(
        &mut self,
        u: impl Into<String>,
        v: impl Into<String>,
        weight: f64,
    ) -> Result<(), GraphError> {
        let u = self.node(u);
        let v = self.node(v);
        self.edge(u, v, weight)
    }

    pub fn build(self) -> WeightedGraph {
        let edges = self
            .weights
            .into_iter()
            .map(|((source, target), weight)| Edge {
                source,
                target,
                weight,
            })
            .collect();
        WeightedGraph {
            directed: self.directed,
            labels: self.labels,
            index: self.index,
            edges,
        }
    }
}

impl WeightedGraph {
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Neighbour lists ignoring direction; each undirected edge appears in
    /// both endpoint lists. For directed graphs `u -> v` and `v -> u` merge
    /// into one entry whose weight is their sum.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.node_count()];
        for e in &self.edges {
            *adj[e.source].entry(e.target).or_insert(0.0) += e.weight;
            *adj[e.target].entry(e.source).or_insert(0.0) += e.weight;
        }
        adj.into_iter().map(|m| m.into_iter().collect()).collect()
    }

    /// Out-neighbour lists (both directions for undirected graphs).
    pub fn out_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        if !self.directed {
            return self.undirected_adjacency();
        }
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.source].push((e.target, e.weight));
        }
        adj
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.source == i || e.target == i)
            .count()
    }

    /// Undirected version of this graph with the given edge weighting.
    pub fn to_undirected(&self, projection: Projection) -> WeightedGraph {
        let mut b = GraphBuilder::with_nodes(false, self.labels.iter().cloned());
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &self.edges {
            let key = (e.source.min(e.target), e.source.max(e.target));
            *pairs.entry(key).or_insert(0.0) += e.weight;
        }
        for ((u, v), w) in pairs {
            let w = match projection {
                Projection::Unit => 1.0,
                Projection::Sum => w,
            };
            b.edge(u, v, w).expect("indices from an existing graph");
        }
        b.build()
    }

    /// Subgraph induced by `nodes`, relabelled in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> WeightedGraph {
        let mut remap = HashMap::with_capacity(nodes.len());
        let mut b = GraphBuilder::new(self.directed);
        for &n in nodes {
            remap.insert(n, b.node(self.labels[n].clone()));
        }
        for e in &self.edges {
            if let (Some(&u), Some(&v)) = (remap.get(&e.source), remap.get(&e.target)) {
                b.edge(u, v, e.weight).expect("finite weights");
            }
        }
        b.build()
    }

    /// Copy keeping only edges for which `keep` holds and then only nodes
    /// that still touch an edge. Node order is preserved.
    pub fn filter_edges<F: Fn(&Edge) -> bool>(&self, keep: F) -> WeightedGraph {
        let kept: Vec<&Edge> = self.edges.iter().filter(|e| keep(e)).collect();
        let mut used = vec![false; self.node_count()];
        for e in &kept {
            used[e.source] = true;
            used[e.target] = true;
        }
        let mut b = GraphBuilder::new(self.directed);
        let mut remap = vec![usize::MAX; self.node_count()];
        for (i, l) in self.labels.iter().enumerate() {
            if used[i] {
                remap[i] = b.node(l.clone());
            }
        }
        for e in kept {
            b.edge(remap[e.source], remap[e.target], e.weight)
                .expect("finite weights");
        }
        b.build()
    }

    /// `u<TAB>v<TAB>weight` per edge.
    pub fn write_edgelist<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}",
                self.labels[e.source], self.labels[e.target], e.weight
            )?;
        }
        Ok(())
    }

    pub fn read_edgelist<R: BufRead>(reader: R, directed: bool) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(directed);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (u, v, w) = parse_edge_line(&line).map_err(|reason| GraphError::Parse {
                line: i + 1,
                reason,
            })?;
            b.labeled_edge(u, v, w)?;
        }
        Ok(b.build())
    }
}

/// Parse one `u<TAB>v<TAB>weight` line.
pub fn parse_edge_line(line: &str) -> Result<(&str, &str, f64), String> {
    let mut cols = line.split('\t');
    let (Some(u), Some(v), Some(w), None) = (cols.next(), cols.next(), cols.next(), cols.next())
    else {
        return Err("expected 3 tab-separated columns".into());
    };
    if u.is_empty() || v.is_empty() {
        return Err("empty node label".into());
    }
    let w: f64 = w.trim().parse().map_err(|_| format!("bad weight {w:?}"))?;
    if !w.is_finite() {
        return Err("non-finite weight".into());
    }
    Ok((u, v, w))
}

/// Non-negative weights keyed by node label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeWeightVector(pub BTreeMap<String, f64>);

impl NodeWeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(0.0)
    }

    pub fn insert(&mut self, key: impl Into<String>, w: f64) {
        self.0.insert(key.into(), w);
    }

    pub fn sum(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for NodeWeightVector {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}
