//! Constant Potts Model community detection and partition comparison.

mod leiden;
mod metrics;
mod sweep;

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;

pub use leiden::leiden_cpm;
pub use metrics::{ami, element_centric};
pub use sweep::{geometric_grid, resolution_sweep, GridSpec, SweepResult, SweepStatus};

/// Restart complement used for element-centric similarity.
pub const DEFAULT_ALPHA: f64 = 0.9;

#[derive(Debug, thiserror::Error)]
pub enum CommunityError {
    #[error("partitions cover different node sets ({0} vs {1} nodes)")]
    NodeMismatch(usize, usize),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("resolution must be finite and non-negative, got {0}")]
    BadResolution(f64),
    #[error("sweep needs at least two resolutions")]
    GridTooShort,
    #[error("sweep grid must be strictly increasing")]
    GridNotIncreasing,
    #[error("sweep needs at least one graph")]
    NoGraphs,
    #[error("partition file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Assignment of graph nodes (by index) to communities numbered densely
/// from 0 in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    membership: Vec<usize>,
    pub quality: f64,
    pub resolution: f64,
    pub seed: u64,
}

impl Partition {
    /// Build from arbitrary labels; ids are renumbered. Quality is left at 0.
    pub fn from_membership<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Self {
        Self {
            membership: renumber(labels),
            quality: 0.0,
            resolution: 0.0,
            seed: 0,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_membership(&(0..n).collect::<Vec<_>>())
    }

    pub fn single_community(n: usize) -> Self {
        Self::from_membership(&vec![0usize; n])
    }

    /// Set resolution and recompute quality on `graph`.
    pub fn evaluated(mut self, graph: &WeightedGraph, gamma: f64) -> Self {
        self.quality = cpm_quality(graph, &self, gamma);
        self.resolution = gamma;
        self
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.membership[node]
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.membership.iter().max().map_or(0, |m| m + 1)
    }

    /// Node indices per community, each list ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (v, &c) in self.membership.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.community_count()];
        for &c in &self.membership {
            out[c] += 1;
        }
        out
    }

    pub fn is_singletons(&self) -> bool {
        self.community_count() == self.len()
    }

    pub fn is_single_community(&self) -> bool {
        self.community_count() <= 1
    }

    /// `node<TAB>community` per node, using graph labels.
    pub fn write_tsv<W: Write>(&self, graph: &WeightedGraph, mut w: W) -> io::Result<()> {
        for (v, &c) in self.membership.iter().enumerate() {
            writeln!(w, "{}\t{c}", graph.label(v))?;
        }
        Ok(())
    }

    /// Read a TSV written by [`write_tsv`](Self::write_tsv); every graph
    /// node must appear exactly once.
    pub fn read_tsv<R: BufRead>(reader: R, graph: &WeightedGraph) -> Result<Self, CommunityError> {
        let mut labels: Vec<Option<usize>> = vec![None; graph.node_count()];
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |reason: String| CommunityError::Parse { line: i + 1, reason };
            let (node, comm) = parse_partition_line(&line).map_err(err)?;
            let v = graph.index_of(node).ok_or_else(|| err(format!("unknown node {node:?}")))?;
            if labels[v].replace(comm).is_some() {
                return Err(err(format!("node {node:?} assigned twice")));
            }
        }
        let labels: Vec<usize> = labels
            .into_iter()
            .enumerate()
            .map(|(v, c)| {
                c.ok_or_else(|| CommunityError::Parse {
                    line: 0,
                    reason: format!("node {:?} missing", graph.label(v)),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self::from_membership(&labels))
    }
}

pub fn parse_partition_line(line: &str) -> Result<(&str, usize), String> {
    let (node, comm) = line.rsplit_once('\t').ok_or("expected node<TAB>community")?;
    if node.is_empty() || node.contains('\t') {
        return Err("bad node column".into());
    }
    let comm = comm.parse().map_err(|_| format!("bad community id {comm:?}"))?;
    Ok((node, comm))
}

fn renumber<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.clone()).or_insert(next)
        })
        .collect()
}

/// `Σ_c [w_int(c) − γ n_c (n_c − 1) / 2]`. Directed edges count once each.
pub fn cpm_quality(graph: &WeightedGraph, partition: &Partition, gamma: f64) -> f64 {
    assert_eq!(graph.node_count(), partition.len(), "partition must cover the graph");
    let internal: f64 = graph
        .edges()
        .iter()
        .filter(|e| partition.membership[e.source] == partition.membership[e.target])
        .map(|e| e.weight)
        .sum();
    let pairs: f64 = partition
        .sizes()
        .iter()
        .map(|&n| (n * n.saturating_sub(1)) as f64 / 2.0)
        .sum();
    internal - gamma * pairs
}
