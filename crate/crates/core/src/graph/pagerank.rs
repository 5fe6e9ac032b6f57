use super::{GraphError, NodeWeightVector, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Stop when the L1 change between iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Use edge weights for the transition probabilities; unit weights
    /// otherwise.
    pub weighted: bool,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-9,
            max_iterations: 1000,
            weighted: true,
        }
    }
}

/// Weighted PageRank with uniform teleport and uniform redistribution of
/// dangling mass.
pub fn pagerank(graph: &WeightedGraph, damping: f64, tolerance: f64) -> Result<NodeWeightVector, GraphError> {
    pagerank_with(
        graph,
        &PageRankConfig {
            damping,
            tolerance,
            ..PageRankConfig::default()
        },
    )
}

pub fn pagerank_with(graph: &WeightedGraph, cfg: &PageRankConfig) -> Result<NodeWeightVector, GraphError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(GraphError::BadDamping(cfg.damping));
    }
    let adj = graph.out_adjacency();
    let mut out_weight = vec![0.0; n];
    for (u, nbrs) in adj.iter().enumerate() {
        for &(v, w) in nbrs {
            if w < 0.0 {
                return Err(GraphError::NegativeWeight {
                    key: format!("{} -> {}", graph.label(u), graph.label(v)),
                    weight: w,
                });
            }
            out_weight[u] += if cfg.weighted { w } else { 1.0 };
        }
    }

    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let dangling: f64 = (0..n)
            .filter(|&u| out_weight[u] <= 0.0)
            .map(|u| rank[u])
            .sum();
        let base = (1.0 - cfg.damping) / nf + cfg.damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (u, nbrs) in adj.iter().enumerate() {
            if out_weight[u] <= 0.0 {
                continue;
            }
            let share = cfg.damping * rank[u] / out_weight[u];
            for &(v, w) in nbrs {
                next[v] += share * if cfg.weighted { w } else { 1.0 };
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < cfg.tolerance {
            return Ok(to_vector(graph, &rank));
        }
    }
    Err(GraphError::NotConverged {
        iterations: cfg.max_iterations,
        residual,
        last: to_vector(graph, &rank),
    })
}

fn to_vector(graph: &WeightedGraph, rank: &[f64]) -> NodeWeightVector {
    rank.iter()
        .enumerate()
        .map(|(i, &r)| (graph.label(i).to_string(), r))
        .collect()
}
