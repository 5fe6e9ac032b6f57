//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wikitopics::graph::{GraphBuilder, WeightedGraph};

/// Every set partition of `n` elements as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// Constant Potts quality straight from the definition, using a dense
/// symmetric weight matrix.
pub fn cpm_by_definition(graph: &WeightedGraph, labels: &[usize], gamma: f64) -> f64 {
    let n = graph.node_count();
    let mut w = vec![vec![0.0; n]; n];
    for e in graph.edges() {
        w[e.source][e.target] += e.weight;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && labels[i] == labels[j] {
                q += w[i][j];
                if i < j {
                    q -= gamma;
                }
            }
        }
    }
    q
}

pub fn exhaustive_cpm_optimum(graph: &WeightedGraph, gamma: f64) -> f64 {
    all_partitions(graph.node_count())
        .iter()
        .map(|p| cpm_by_definition(graph, p, gamma))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, negative: bool) -> WeightedGraph {
    let mut b = GraphBuilder::new(false);
    for i in 0..n {
        b.node(format!("v{i}"));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                let w = if negative {
                    rng.random_range(-1.0..2.0)
                } else {
                    rng.random_range(0.1..2.0)
                };
                b.edge(u, v, w).unwrap();
            }
        }
    }
    b.build()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts.values().map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum()
}

pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *ca.entry(x).or_insert(0) += 1;
        *cb.entry(y).or_insert(0) += 1;
    }
    joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            pxy * (pxy / ((ca[&x] as f64 / n) * (cb[&y] as f64 / n))).ln()
        })
        .sum()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// AMI with the expected mutual information taken as the average over all
/// `n!` relabellings of the elements of `b`.
pub fn ami_brute_force(a: &[usize], b: &[usize]) -> f64 {
    let perms = permutations(a.len());
    let emi: f64 = perms
        .iter()
        .map(|p| {
            let shuffled: Vec<usize> = p.iter().map(|&i| b[i]).collect();
            mutual_information(a, &shuffled)
        })
        .sum::<f64>()
        / perms.len() as f64;
    let mi = mutual_information(a, b);
    let mean = (entropy(a) + entropy(b)) / 2.0;
    (mi - emi) / (mean - emi)
}

/// Personalised PageRank of every element on the cluster graph where each
/// element links uniformly to all members of its own cluster (itself
/// included), solved densely.
fn affinity(labels: &[usize], alpha: f64) -> DMatrix<f64> {
    let n = labels.len();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let size = labels.iter().filter(|&&l| l == labels[i]).count() as f64;
        for j in 0..n {
            if labels[j] == labels[i] {
                t[(i, j)] = 1.0 / size;
            }
        }
    }
    // Row i of P solves p = (1 - alpha) e_i + alpha p T.
    let m = DMatrix::<f64>::identity(n, n) - t.transpose() * alpha;
    let lu = m.lu();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[i] = 1.0 - alpha;
        let col = lu.solve(&e).expect("nonsingular");
        for j in 0..n {
            p[(i, j)] = col[j];
        }
    }
    p
}

pub fn element_centric_dense(a: &[usize], b: &[usize], alpha: f64) -> f64 {
    let pa = affinity(a, alpha);
    let pb = affinity(b, alpha);
    let n = a.len();
    let mut total = 0.0;
    for i in 0..n {
        let l1: f64 = (0..n).map(|j| (pa[(i, j)] - pb[(i, j)]).abs()).sum();
        total += 1.0 - l1 / (2.0 * alpha);
    }
    total / n as f64
}

/// Pearson correlation from pairwise differences, which needs no means:
/// `Σ_{i<j} dx·dy / sqrt(Σ dx² · Σ dy²)`.
pub fn pearson_pairwise(x: &[f64], y: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Weighted Jaccard over a dense key space.
pub fn jaccard_dense(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| x.min(*y)).sum();
    let den: f64 = a.iter().zip(b).map(|(x, y)| x.max(*y)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// PageRank by solving `(I − d Mᵀ) x = (1 − d)/n` where dangling rows of
/// the transition matrix are uniform.
pub fn pagerank_dense(graph: &WeightedGraph, damping: f64) -> Vec<f64> {
    let n = graph.node_count();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for e in graph.edges() {
        m[(e.source, e.target)] += e.weight;
        if !graph.is_directed() {
            m[(e.target, e.source)] += e.weight;
        }
    }
    for i in 0..n {
        let s: f64 = m.row(i).sum();
        for j in 0..n {
            m[(i, j)] = if s > 0.0 { m[(i, j)] / s } else { 1.0 / n as f64 };
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - m.transpose() * damping;
    let rhs = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let x = a.lu().solve(&rhs).expect("nonsingular");
    x.iter().copied().collect()
}

/// Event network over `labels` with the given directed click edges and
/// daily series; the event sits in the middle of the series.
pub fn fixture_network(
    labels: &[&str],
    edges: &[(usize, usize, f64)],
    series: Vec<Vec<f64>>,
    core: &[&str],
) -> wikitopics::network::EventNetwork {
    use wikitopics::ingest::events::{Category, EventRecord};
    let mut b = GraphBuilder::with_nodes(true, labels.iter().map(|s| s.to_string()));
    for &(u, v, w) in edges {
        b.edge(u, v, w).unwrap();
    }
    let days = series.first().map_or(61, Vec::len);
    let date = chrono::NaiveDate::from_ymd_opt(2018, 6, 15).unwrap();
    wikitopics::network::EventNetwork {
        event: EventRecord {
            event_id: "fixture".into(),
            date,
            category: Category::DisastersAccidents,
            description: "fixture".into(),
            core_articles: core.iter().map(|s| s.to_string()).collect(),
        },
        graph: b.build(),
        window_start: date - chrono::Duration::days((days / 2) as i64),
        window_days: days,
        series,
        dropped_core: Vec::new(),
        missing_series: Vec::new(),
    }
}

/// Median and type-7 interquartile range by sorting.
pub fn median_iqr(values: &[f64]) -> (f64, f64) {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    };
    (q(0.5), q(0.75) - q(0.25))
}
