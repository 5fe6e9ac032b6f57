//! Rolling page-view correlations on hyperlink pairs and the flattened
//! multilayer graph built from them.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::graph::{GraphBuilder, WeightedGraph};
use crate::network::EventNetwork;
use crate::stats::pearson;

#[derive(Debug, thiserror::Error)]
pub enum CorrelationError {
    #[error("window {window} longer than series length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("network has no page-view series attached")]
    NoSeries,
    #[error("correlation file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Correlation per layer for every hyperlink-adjacent pair. Layer `l`
/// covers days `l..l + window`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEdgeWeights {
    labels: Vec<String>,
    window: usize,
    layers: usize,
    /// Sorted pairs with `u < v`.
    pairs: Vec<(usize, usize)>,
    values: Vec<Vec<f64>>,
}

impl TemporalEdgeWeights {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn layer_count(&self) -> usize {
        self.layers
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Correlation vector of the pair, in either order.
    pub fn get(&self, u: usize, v: usize) -> Option<&[f64]> {
        let key = (u.min(v), u.max(v));
        self.pairs
            .binary_search(&key)
            .ok()
            .map(|i| self.values[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        self.pairs.iter().copied().zip(self.values.iter().map(Vec::as_slice))
    }

    /// `u<TAB>v<TAB>layer<TAB>rho` per pair and layer.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for ((u, v), vals) in self.iter() {
            for (l, rho) in vals.iter().enumerate() {
                writeln!(w, "{}\t{}\t{l}\t{rho}", self.labels[u], self.labels[v])?;
            }
        }
        Ok(())
    }

    /// Read a dump produced by [`write_tsv`](Self::write_tsv) for nodes
    /// `labels`.
    pub fn read_tsv<R: BufRead>(
        reader: R,
        labels: &[String],
        window: usize,
        layers: usize,
    ) -> Result<Self, CorrelationError> {
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut map: std::collections::BTreeMap<(usize, usize), Vec<Option<f64>>> = Default::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |reason: String| CorrelationError::Parse { line: i + 1, reason };
            let (u, v, l, rho) = parse_correlation_line(&line).map_err(err)?;
            let (Some(&u), Some(&v)) = (index.get(u), index.get(v)) else {
                return Err(err("unknown node".into()));
            };
            if u == v {
                return Err(err("self pair".into()));
            }
            if l >= layers {
                return Err(err(format!("layer {l} out of range")));
            }
            let slot = map.entry((u.min(v), u.max(v))).or_insert_with(|| vec![None; layers]);
            slot[l] = Some(rho);
        }
        let mut pairs = Vec::with_capacity(map.len());
        let mut values = Vec::with_capacity(map.len());
        for (pair, vals) in map {
            let vals: Option<Vec<f64>> = vals.into_iter().collect();
            let vals = vals.ok_or_else(|| CorrelationError::Parse {
                line: 0,
                reason: format!("pair {}-{} missing layers", labels[pair.0], labels[pair.1]),
            })?;
            pairs.push(pair);
            values.push(vals);
        }
        Ok(Self {
            labels: labels.to_vec(),
            window,
            layers,
            pairs,
            values,
        })
    }
}

pub fn parse_correlation_line(line: &str) -> Result<(&str, &str, usize, f64), String> {
    let cols: Vec<&str> = line.split('\t').collect();
    let [u, v, l, rho] = cols[..] else {
        return Err(format!("expected 4 columns, got {}", cols.len()));
    };
    let l = l.parse().map_err(|_| format!("bad layer {l:?}"))?;
    let rho: f64 = rho.parse().map_err(|_| format!("bad value {rho:?}"))?;
    if !(-1.0..=1.0).contains(&rho) {
        return Err(format!("value {rho} outside [-1, 1]"));
    }
    Ok((u, v, l, rho))
}

/// Pearson correlations over every `window`-day slice for each pair of
/// nodes linked in either direction.
pub fn rolling_correlations(network: &EventNetwork, window: usize) -> Result<TemporalEdgeWeights, CorrelationError> {
    let n = network.graph.node_count();
    if n > 0 && network.series.len() != n {
        return Err(CorrelationError::NoSeries);
    }
    let len = network.window_days;
    if window == 0 || window > len {
        return Err(CorrelationError::WindowTooLong { window, len });
    }
    let layers = len - window + 1;
    let pairs: Vec<(usize, usize)> = network
        .graph
        .edges()
        .iter()
        .map(|e| (e.source.min(e.target), e.source.max(e.target)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let values = pairs
        .iter()
        .map(|&(u, v)| rolling_pearson(&network.series[u], &network.series[v], window))
        .collect();
    Ok(TemporalEdgeWeights {
        labels: network.graph.labels().to_vec(),
        window,
        layers,
        pairs,
        values,
    })
}

/// Correlation of `x[l..l + window]` with `y[l..l + window]` for each `l`.
pub fn rolling_pearson(x: &[f64], y: &[f64], window: usize) -> Vec<f64> {
    x.windows(window)
        .zip(y.windows(window))
        .map(|(a, b)| pearson(a, b))
        .collect()
}

/// One copy of every article per layer, joined by correlation edges inside
/// a layer and by weight `tau` between consecutive copies of an article.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMultilayerGraph {
    pub graph: WeightedGraph,
    pub articles: Vec<String>,
    pub layers: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeCopy {
    pub article: usize,
    pub layer: usize,
}

impl FlatMultilayerGraph {
    pub fn node_index(&self, copy: NodeCopy) -> usize {
        copy.layer * self.articles.len() + copy.article
    }

    pub fn copy_of(&self, node: usize) -> NodeCopy {
        let n = self.articles.len();
        NodeCopy {
            article: node % n,
            layer: node / n,
        }
    }
}

/// Label used for an article copy in the flattened graph.
pub fn copy_label(article: &str, layer: usize) -> String {
    format!("{layer}:{article}")
}

pub fn flatten_multilayer(weights: &TemporalEdgeWeights, tau: f64) -> FlatMultilayerGraph {
    let n = weights.labels.len();
    let layers = weights.layers;
    let mut b = GraphBuilder::new(false);
    for l in 0..layers {
        for a in &weights.labels {
            b.node(copy_label(a, l));
        }
    }
    for ((u, v), vals) in weights.iter() {
        for (l, &rho) in vals.iter().enumerate() {
            b.edge(l * n + u, l * n + v, rho).expect("correlations are finite");
        }
    }
    for l in 1..layers {
        for a in 0..n {
            b.edge((l - 1) * n + a, l * n + a, tau).expect("finite tau");
        }
    }
    FlatMultilayerGraph {
        graph: b.build(),
        articles: weights.labels.clone(),
        layers,
        tau,
    }
}
