use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ami, element_centric, leiden_cpm, CommunityError, Partition, DEFAULT_ALPHA};
use crate::graph::WeightedGraph;

/// Geometric resolution grid with inclusive end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lower: 1.23e-4,
            upper: 1.0,
            points: 40,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        geometric_grid(self.lower, self.upper, self.points)
    }
}

pub fn geometric_grid(lower: f64, upper: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lower],
        _ => {
            let step = (upper / lower).ln() / (points - 1) as f64;
            (0..points)
                .map(|i| match i {
                    0 => lower,
                    i if i == points - 1 => upper,
                    i => lower * (step * i as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    /// The similarity peak lies strictly inside the grid.
    Interior,
    /// The best similarity sits at an end of the grid or nothing was
    /// comparable; no resolution is chosen.
    Flat,
}

/// Similarity between partitions at consecutive grid resolutions, averaged
/// over the sampled graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub resolutions: Vec<f64>,
    /// Mean number of communities at each resolution.
    pub mean_communities: Vec<f64>,
    /// Entry `k` compares resolutions `k` and `k + 1`. Pairs where every
    /// graph gives the same trivial partition at both ends are `None`.
    pub ami: Vec<Option<f64>>,
    pub element_centric: Vec<Option<f64>>,
    pub status: SweepStatus,
    pub chosen: Option<f64>,
}

fn trivially_equal(p: &Partition, q: &Partition) -> bool {
    (p.is_singletons() && q.is_singletons()) || (p.is_single_community() && q.is_single_community())
}

/// Detect communities on every graph at every grid resolution and compare
/// neighbouring resolutions with AMI and element-centric similarity.
///
/// The chosen resolution is the upper end of the middle pair in the
/// plateau of highest mean similarity, provided that plateau is bounded by
/// lower values on both sides.
pub fn resolution_sweep(graphs: &[WeightedGraph], grid: &[f64], seed: u64) -> Result<SweepResult, CommunityError> {
    if grid.len() < 2 {
        return Err(CommunityError::GridTooShort);
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CommunityError::GridNotIncreasing);
    }
    if let Some(&r) = grid.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(CommunityError::BadResolution(r));
    }
    if graphs.is_empty() {
        return Err(CommunityError::NoGraphs);
    }

    let partitions: Vec<Vec<Partition>> = graphs
        .par_iter()
        .map(|g| grid.iter().map(|&r| leiden_cpm(g, r, seed)).collect())
        .collect();

    let mean_communities = (0..grid.len())
        .map(|k| partitions.iter().map(|ps| ps[k].community_count() as f64).sum::<f64>() / graphs.len() as f64)
        .collect();

    let mut ami_scores = Vec::with_capacity(grid.len() - 1);
    let mut ec_scores = Vec::with_capacity(grid.len() - 1);
    for k in 0..grid.len() - 1 {
        let (mut sa, mut se, mut count) = (0.0, 0.0, 0usize);
        for ps in &partitions {
            let (p, q) = (&ps[k], &ps[k + 1]);
            if trivially_equal(p, q) {
                continue;
            }
            sa += ami(p, q)?;
            se += element_centric(p, q, DEFAULT_ALPHA)?;
            count += 1;
        }
        if count == 0 {
            ami_scores.push(None);
            ec_scores.push(None);
        } else {
            ami_scores.push(Some(sa / count as f64));
            ec_scores.push(Some(se / count as f64));
        }
    }

    let combined: Vec<Option<f64>> = ami_scores
        .iter()
        .zip(&ec_scores)
        .map(|(a, e)| Some((a.as_ref()? + e.as_ref()?) / 2.0))
        .collect();
    let (status, chosen) = match interior_peak(&combined) {
        Some(k) => (SweepStatus::Interior, Some(grid[k + 1])),
        None => (SweepStatus::Flat, None),
    };
    Ok(SweepResult {
        resolutions: grid.to_vec(),
        mean_communities,
        ami: ami_scores,
        element_centric: ec_scores,
        status,
        chosen,
    })
}

/// Middle index of the first plateau of maximal score, if it is bounded by
/// strictly lower scored entries on both sides.
fn interior_peak(scores: &[Option<f64>]) -> Option<usize> {
    let scored: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .collect();
    let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12;
    let start = scored.iter().position(|s| s.1 >= top - tol)?;
    let mut end = start;
    while end + 1 < scored.len() && scored[end + 1].1 >= top - tol {
        end += 1;
    }
    if start == 0 || end + 1 == scored.len() {
        return None;
    }
    Some(scored[(start + end) / 2].0)
}
