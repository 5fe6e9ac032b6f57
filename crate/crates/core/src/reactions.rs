//! Event reactions: temporal communities anchored on the event, their
//! captured excess views and their similarity to static communities.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::community::{leiden_cpm, Partition};
use crate::correlation::FlatMultilayerGraph;
use crate::graph::{pagerank_with, weighted_jaccard, GraphError, NodeWeightVector, PageRankConfig, Projection};
use crate::network::EventNetwork;
use crate::stats::{iqr, median};

#[derive(Debug, thiserror::Error)]
pub enum ReactionError {
    #[error("partition covers {got} nodes, flattened graph has {expected}")]
    PartitionSize { got: usize, expected: usize },
    #[error("flattened graph has {got} articles, event network has {expected}")]
    ArticleMismatch { got: usize, expected: usize },
    #[error("event network has no page-view series attached")]
    NoSeries,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("reaction file line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// When a temporal community counts as overlapping the event day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventOverlap {
    /// Some member copy sits in a layer whose window contains the event day.
    #[default]
    WindowContainsDay,
    /// Some member copy sits in the layer whose window starts on the event
    /// day.
    LayerStartsOnDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankSettings {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight transitions by clicks; unit weights otherwise.
    pub click_weighted: bool,
}

impl Default for PageRankSettings {
    fn default() -> Self {
        let d = PageRankConfig::default();
        Self {
            damping: d.damping,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            click_weighted: d.weighted,
        }
    }
}

impl PageRankSettings {
    fn config(&self) -> PageRankConfig {
        PageRankConfig {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            weighted: self.click_weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReaction {
    pub reaction_id: String,
    pub event_id: String,
    pub articles: BTreeSet<String>,
    /// First and last layer holding a member copy.
    pub span: (usize, usize),
    /// PageRank of each article within the reaction's own subgraph.
    pub weights: NodeWeightVector,
    pub contains_core: bool,
    #[serde(rename = "s")]
    pub structural_similarity: f64,
}

impl EventReaction {
    /// Graph indices of the member articles in `network`.
    pub fn article_indices(&self, network: &EventNetwork) -> Vec<usize> {
        self.articles
            .iter()
            .filter_map(|a| network.graph.index_of(a))
            .collect()
    }
}

pub fn write_reactions_jsonl<W: Write>(reactions: &[EventReaction], mut w: W) -> io::Result<()> {
    for r in reactions {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_reactions_jsonl<R: BufRead>(reader: R) -> Result<Vec<EventReaction>, ReactionError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| ReactionError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

/// PageRank of the articles `nodes` on the subgraph of the event network
/// they induce.
pub fn subgraph_pagerank(
    network: &EventNetwork,
    nodes: &[usize],
    settings: &PageRankSettings,
) -> Result<NodeWeightVector, GraphError> {
    let sub = network.graph.induced_subgraph(nodes);
    match pagerank_with(&sub, &settings.config()) {
        Ok(w) => Ok(w),
        Err(GraphError::NotConverged { last, residual, .. }) => {
            log::warn!(
                "event {}: pagerank stopped with residual {residual:e}",
                network.event.event_id
            );
            Ok(last)
        }
        Err(e) => Err(e),
    }
}

/// Keep the temporal communities that contain a core article and overlap
/// the event day, projected onto articles.
pub fn extract_reactions(
    partition: &Partition,
    flat: &FlatMultilayerGraph,
    network: &EventNetwork,
    overlap: EventOverlap,
    pagerank: &PageRankSettings,
) -> Result<Vec<EventReaction>, ReactionError> {
    if partition.len() != flat.graph.node_count() {
        return Err(ReactionError::PartitionSize {
            got: partition.len(),
            expected: flat.graph.node_count(),
        });
    }
    if flat.articles.len() != network.graph.node_count() {
        return Err(ReactionError::ArticleMismatch {
            got: flat.articles.len(),
            expected: network.graph.node_count(),
        });
    }
    let event_day = network.event_index();
    let window = network.window_days + 1 - flat.layers;
    let overlaps = |layer: usize| match overlap {
        EventOverlap::WindowContainsDay => layer <= event_day && event_day < layer + window,
        EventOverlap::LayerStartsOnDay => layer == event_day,
    };
    let core: BTreeSet<usize> = network.core_nodes().into_iter().collect();

    let mut out = Vec::new();
    for members in partition.communities() {
        let copies: Vec<_> = members.iter().map(|&v| flat.copy_of(v)).collect();
        let articles: BTreeSet<usize> = copies.iter().map(|c| c.article).collect();
        let contains_core = articles.iter().any(|a| core.contains(a));
        if !contains_core || !copies.iter().any(|c| overlaps(c.layer)) {
            continue;
        }
        let lo = copies.iter().map(|c| c.layer).min().expect("non-empty community");
        let hi = copies.iter().map(|c| c.layer).max().expect("non-empty community");
        let nodes: Vec<usize> = articles.iter().copied().collect();
        let weights = subgraph_pagerank(network, &nodes, pagerank)?;
        out.push(EventReaction {
            reaction_id: format!("{}-r{}", network.event.event_id, out.len()),
            event_id: network.event.event_id.clone(),
            articles: nodes.iter().map(|&a| network.graph.label(a).to_string()).collect(),
            span: (lo, hi),
            weights,
            contains_core,
            structural_similarity: 0.0,
        });
    }
    Ok(out)
}

/// Static baseline graphs for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaticMode {
    /// Undirected hyperlink structure with unit weights.
    Structural,
    /// Undirected projection weighted by clicks in both directions.
    Navigational,
}

impl StaticMode {
    pub fn projection(self) -> Projection {
        match self {
            StaticMode::Structural => Projection::Unit,
            StaticMode::Navigational => Projection::Sum,
        }
    }
}

pub fn static_partitions(network: &EventNetwork, mode: StaticMode, resolution: f64, seed: u64) -> Partition {
    leiden_cpm(&network.graph.to_undirected(mode.projection()), resolution, seed)
}

/// Communities of a static partition that contain a core article.
pub fn core_communities(network: &EventNetwork, partition: &Partition) -> Vec<Vec<usize>> {
    let core: BTreeSet<usize> = network.core_nodes().into_iter().collect();
    partition
        .communities()
        .into_iter()
        .filter(|c| c.iter().any(|v| core.contains(v)))
        .collect()
}

/// Summed member views centred on their median and scaled by their
/// interquartile range. A zero range gives all zeros.
pub fn scaled_series(network: &EventNetwork, members: &[usize]) -> Result<Vec<f64>, ReactionError> {
    let total = summed_series(network, members)?;
    Ok(robust_scale(&total))
}

pub fn robust_scale(values: &[f64]) -> Vec<f64> {
    let spread = iqr(values);
    if spread == 0.0 {
        return vec![0.0; values.len()];
    }
    let mid = median(values);
    values.iter().map(|v| (v - mid) / spread).collect()
}

fn summed_series(network: &EventNetwork, members: &[usize]) -> Result<Vec<f64>, ReactionError> {
    let mut total = vec![0.0; network.window_days];
    for &m in members {
        let s = network.series.get(m).ok_or(ReactionError::NoSeries)?;
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    Ok(total)
}

/// Whether the scaled summed series exceeds `gate` within one day of the
/// event.
pub fn passes_gate(network: &EventNetwork, members: &[usize], gate: f64) -> Result<bool, ReactionError> {
    let q = scaled_series(network, members)?;
    let e = network.event_index();
    let lo = e.saturating_sub(1);
    let hi = (e + 1).min(q.len().saturating_sub(1));
    Ok(q[lo..=hi].iter().any(|&v| v > gate))
}

/// Views above each article's window median over the event week (event day
/// and the six after), summed over the article groups that pass the gate.
pub fn excess_views(network: &EventNetwork, groups: &[Vec<usize>], gate: f64) -> Result<f64, ReactionError> {
    let e = network.event_index();
    let mut total = 0.0;
    for members in groups {
        if !passes_gate(network, members, gate)? {
            continue;
        }
        for &m in members {
            let s = network.series.get(m).ok_or(ReactionError::NoSeries)?;
            let med = median(s);
            let end = (e + 7).min(s.len());
            total += s[e..end].iter().map(|v| v - med).sum::<f64>();
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub event_id: String,
    pub excess_temporal: f64,
    pub excess_structural: f64,
    pub excess_navigational: f64,
}

impl ComparisonResult {
    pub const TSV_HEADER: &'static str = "event_id\texcess_temporal\texcess_structural\texcess_navigational";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.event_id, self.excess_temporal, self.excess_structural, self.excess_navigational
        )
    }
}

/// Resolutions and seed for the two static baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSettings {
    pub structural_resolution: f64,
    pub navigational_resolution: f64,
    pub gate: f64,
    pub seed: u64,
}

pub fn compare_event(
    network: &EventNetwork,
    reactions: &[EventReaction],
    settings: &BaselineSettings,
) -> Result<ComparisonResult, ReactionError> {
    let temporal: Vec<Vec<usize>> = reactions.iter().map(|r| r.article_indices(network)).collect();
    let structural = static_partitions(network, StaticMode::Structural, settings.structural_resolution, settings.seed);
    let navigational = static_partitions(
        network,
        StaticMode::Navigational,
        settings.navigational_resolution,
        settings.seed,
    );
    Ok(ComparisonResult {
        event_id: network.event.event_id.clone(),
        excess_temporal: excess_views(network, &temporal, settings.gate)?,
        excess_structural: excess_views(network, &core_communities(network, &structural), settings.gate)?,
        excess_navigational: excess_views(network, &core_communities(network, &navigational), settings.gate)?,
    })
}

/// PageRank-weighted article vectors of every distinct structural
/// community found over a resolution grid.
#[derive(Debug, Clone)]
pub struct StructuralCommunities {
    vectors: Vec<NodeWeightVector>,
    by_article: BTreeMap<String, Vec<usize>>,
}

impl StructuralCommunities {
    pub fn build(
        network: &EventNetwork,
        grid: &[f64],
        seed: u64,
        pagerank: &PageRankSettings,
    ) -> Result<Self, ReactionError> {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for &r in grid {
            let p = static_partitions(network, StaticMode::Structural, r, seed);
            seen.extend(p.communities());
        }
        let mut vectors = Vec::with_capacity(seen.len());
        let mut by_article: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, nodes) in seen.into_iter().enumerate() {
            for &v in &nodes {
                by_article.entry(network.graph.label(v).to_string()).or_default().push(i);
            }
            vectors.push(subgraph_pagerank(network, &nodes, pagerank)?);
        }
        Ok(Self { vectors, by_article })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest weighted Jaccard similarity between `weights` and any
    /// community; 0 when nothing overlaps.
    pub fn max_similarity(&self, weights: &NodeWeightVector) -> Result<f64, GraphError> {
        let candidates: BTreeSet<usize> = weights
            .iter()
            .filter_map(|(a, _)| self.by_article.get(a))
            .flatten()
            .copied()
            .collect();
        let mut best: f64 = 0.0;
        for c in candidates {
            best = best.max(weighted_jaccard(weights, &self.vectors[c])?);
        }
        Ok(best)
    }
}

/// Structural similarity of one reaction: the best weighted Jaccard match
/// among structural communities over `grid`.
pub fn structural_similarity(
    reaction: &EventReaction,
    network: &EventNetwork,
    grid: &[f64],
    seed: u64,
    pagerank: &PageRankSettings,
) -> Result<f64, ReactionError> {
    let index = StructuralCommunities::build(network, grid, seed, pagerank)?;
    Ok(index.max_similarity(&reaction.weights)?)
}
