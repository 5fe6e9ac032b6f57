use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{renumber, Partition};
use crate::graph::WeightedGraph;

/// Randomness of the refinement merge choice.
const THETA: f64 = 0.01;
/// Upper bound on full optimisation passes started from the previous result.
const MAX_PASSES: usize = 32;
/// Merge and split trials evaluate quality from scratch, so they only run
/// on graphs up to this size.
const POLISH_MAX_NODES: usize = 256;
/// Largest subgroup grown when searching for a community split.
const SPLIT_STEPS: usize = 16;
/// Passes without improvement before stopping.
const STALE_PASSES: usize = 3;

/// Leiden optimisation of the Constant Potts Model at resolution `gamma`.
///
/// Edge direction is ignored. The same `(graph, gamma, seed)` always gives
/// the same partition. The result is never worse than the all-singletons or
/// single-community partitions.
pub fn leiden_cpm(graph: &WeightedGraph, gamma: f64, seed: u64) -> Partition {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = graph.undirected_adjacency();

    let mut best = run_passes(graph, &adj, gamma, &mut rng, Partition::singletons(n).evaluated(graph, gamma));
    let one = Partition::single_community(n).evaluated(graph, gamma);
    if one.quality > best.quality {
        best = run_passes(graph, &adj, gamma, &mut rng, one);
    }
    if n <= POLISH_MAX_NODES {
        best = polish(graph, &adj, gamma, &mut rng, best);
    }
    best.seed = seed;
    best
}

fn improves(candidate: &Partition, best: &Partition) -> bool {
    candidate.quality > best.quality + 1e-12 * best.quality.abs().max(1.0)
}

/// Repeated Leiden iterations, each starting from the best partition so
/// far, until several in a row bring no gain.
fn run_passes(
    graph: &WeightedGraph,
    adj: &[Vec<(usize, f64)>],
    gamma: f64,
    rng: &mut ChaCha8Rng,
    mut best: Partition,
) -> Partition {
    let mut stale = 0;
    for _ in 0..MAX_PASSES {
        let membership = optimise(adj, gamma, rng, best.membership().to_vec());
        let candidate = Partition::from_membership(&membership).evaluated(graph, gamma);
        let improved = improves(&candidate, &best);
        if candidate.quality >= best.quality {
            best = candidate;
        }
        stale = if improved { 0 } else { stale + 1 };
        if stale == STALE_PASSES {
            break;
        }
    }
    best
}

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    size: Vec<f64>,
}

impl Level {
    fn n(&self) -> usize {
        self.size.len()
    }

    fn aggregate(&self, groups: &[usize]) -> Level {
        let k = groups.iter().max().map_or(0, |m| m + 1);
        let mut size = vec![0.0; k];
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
        for v in 0..self.n() {
            let g = groups[v];
            size[g] += self.size[v];
            for &(u, w) in &self.adj[v] {
                let h = groups[u];
                if h != g {
                    *maps[g].entry(h).or_insert(0.0) += w;
                }
            }
        }
        let adj = maps
            .into_iter()
            .map(|m| {
                let mut l: Vec<(usize, f64)> = m.into_iter().collect();
                l.sort_by_key(|&(u, _)| u);
                l
            })
            .collect();
        Level { adj, size }
    }
}

fn optimise(adj: &[Vec<(usize, f64)>], gamma: f64, rng: &mut ChaCha8Rng, start: Vec<usize>) -> Vec<usize> {
    let n = adj.len();
    let mut level = Level {
        adj: adj.to_vec(),
        size: vec![1.0; n],
    };
    let mut membership = renumber(&start);
    let mut node_map: Vec<usize> = (0..n).collect();
    loop {
        move_nodes(&level, &mut membership, gamma, rng);
        membership = renumber(&membership);
        let k = membership.iter().max().map_or(0, |m| m + 1);
        if k == level.n() {
            break;
        }
        let refined = renumber(&refine(&level, &membership, gamma, rng));
        let kr = refined.iter().max().map_or(0, |m| m + 1);
        // Without any refinement merge the aggregate would equal the current
        // level; fall back to aggregating the unrefined partition.
        let groups = if kr == level.n() { membership.clone() } else { refined };
        let mut next_membership = vec![0; groups.iter().max().map_or(0, |m| m + 1)];
        for v in 0..level.n() {
            next_membership[groups[v]] = membership[v];
        }
        for x in node_map.iter_mut() {
            *x = groups[*x];
        }
        level = level.aggregate(&groups);
        membership = next_membership;
    }
    node_map.iter().map(|&x| membership[x]).collect()
}

/// Queue-based local moving: each node goes to the neighbouring (or empty)
/// community with the largest strict quality gain.
fn move_nodes(level: &Level, membership: &mut [usize], gamma: f64, rng: &mut ChaCha8Rng) {
    let mut order: Vec<usize> = (0..level.n()).collect();
    order.shuffle(rng);
    move_queued(level, membership, gamma, order);
}

fn move_queued(level: &Level, membership: &mut [usize], gamma: f64, order: Vec<usize>) {
    let n = level.n();
    let mut comm_size = vec![0.0; n];
    let mut comm_count = vec![0usize; n];
    for v in 0..n {
        comm_size[membership[v]] += level.size[v];
        comm_count[membership[v]] += 1;
    }
    let mut empty: BTreeSet<usize> = (0..n).filter(|&c| comm_count[c] == 0).collect();

    let mut queued = vec![false; n];
    for &v in &order {
        queued[v] = true;
    }
    let mut queue: VecDeque<usize> = order.into();
    let mut kw = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let a = membership[v];
        let sv = level.size[v];
        for &(u, w) in &level.adj[v] {
            if u == v {
                continue;
            }
            let c = membership[u];
            if !seen[c] {
                seen[c] = true;
                touched.push(c);
            }
            kw[c] += w;
        }
        let stay = kw[a] - gamma * sv * (comm_size[a] - sv);
        let mut best = stay;
        let mut best_c = a;

        let mut candidates = touched.clone();
        if comm_count[a] > 1 {
            if let Some(&e) = empty.iter().next() {
                candidates.push(e);
            }
        }
        candidates.sort_unstable();
        for &c in &candidates {
            if c == a {
                continue;
            }
            let gain = kw[c] - gamma * sv * comm_size[c];
            if gain > best {
                best = gain;
                best_c = c;
            }
        }
        for &c in &touched {
            kw[c] = 0.0;
            seen[c] = false;
        }
        touched.clear();

        if best_c != a {
            comm_size[a] -= sv;
            comm_count[a] -= 1;
            if comm_count[a] == 0 {
                empty.insert(a);
            }
            comm_size[best_c] += sv;
            comm_count[best_c] += 1;
            empty.remove(&best_c);
            membership[v] = best_c;
            for &(u, _) in &level.adj[v] {
                if !queued[u] && membership[u] != best_c {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
}

/// Escape local optima that need two coordinated changes: merge a pair of
/// adjacent communities, let their nodes move again, and keep the result
/// when quality improves.
fn polish(
    graph: &WeightedGraph,
    adj: &[Vec<(usize, f64)>],
    gamma: f64,
    rng: &mut ChaCha8Rng,
    mut best: Partition,
) -> Partition {
    let level = Level {
        adj: adj.to_vec(),
        size: vec![1.0; adj.len()],
    };
    for _ in 0..MAX_PASSES {
        let membership = best.membership().to_vec();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut link: HashMap<(usize, usize), f64> = HashMap::new();
        for (u, nbrs) in adj.iter().enumerate() {
            for &(v, w) in nbrs {
                let (a, b) = (membership[u], membership[v]);
                if a < b {
                    *link.entry((a, b)).or_insert(0.0) += w;
                }
            }
        }
        pairs.extend(link.into_iter().filter(|&(_, w)| w > 0.0).map(|(k, _)| k));
        let members = best.communities();
        let mut improved = false;
        for (a, b) in pairs {
            let group: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
            let mut merged = membership.clone();
            for &v in &members[b] {
                merged[v] = a;
            }
            let mut trials = Vec::with_capacity(3);

            let mut t = merged.clone();
            settle(&level, &mut t, gamma, shuffled(&group, rng));
            trials.push(t.clone());
            let c = t[group[0]];
            let inner: Vec<usize> = (0..t.len()).filter(|&v| t[v] == c).collect();
            if split_off(&level, &mut t, c, &inner, gamma) {
                settle(&level, &mut t, gamma, shuffled(&inner, rng));
                trials.push(t);
            }

            let mut t = merged;
            if split_off(&level, &mut t, a, &group, gamma) {
                settle(&level, &mut t, gamma, shuffled(&group, rng));
                trials.push(t);
            }

            for t in trials {
                let candidate = Partition::from_membership(&t).evaluated(graph, gamma);
                if improves(&candidate, &best) {
                    best = candidate;
                    improved = true;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            improved = try_splits(graph, &level, gamma, rng, &mut best);
        }
        if !improved {
            break;
        }
    }
    best
}

/// Look for a subgroup of some community worth splitting off: grow it
/// greedily from each seed node, keeping the best cut seen along the way.
fn try_splits(
    graph: &WeightedGraph,
    level: &Level,
    gamma: f64,
    rng: &mut ChaCha8Rng,
    best: &mut Partition,
) -> bool {
    let membership = best.membership().to_vec();
    for (c, members) in best.communities().into_iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let mut trial = membership.clone();
        if !split_off(level, &mut trial, c, &members, gamma) {
            continue;
        }
        settle(level, &mut trial, gamma, shuffled(&members, rng));
        let candidate = Partition::from_membership(&trial).evaluated(graph, gamma);
        if improves(&candidate, best) {
            *best = candidate;
            return true;
        }
    }
    false
}

fn shuffled(nodes: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = nodes.to_vec();
    v.shuffle(rng);
    v
}

/// Move the best subgroup of community `c` (if any) to an unused id.
fn split_off(level: &Level, membership: &mut [usize], c: usize, members: &[usize], gamma: f64) -> bool {
    let Some(group) = best_split(level, membership, c, members, gamma) else {
        return false;
    };
    let mut used = vec![false; membership.len()];
    for &m in membership.iter() {
        used[m] = true;
    }
    let Some(fresh) = used.iter().position(|u| !u) else {
        return false;
    };
    for &v in &group {
        membership[v] = fresh;
    }
    true
}

/// Local moving seeded with `focus` followed by its outside neighbours.
fn settle(level: &Level, membership: &mut Vec<usize>, gamma: f64, focus: Vec<usize>) {
    let mut compact = renumber(membership);
    let mut queued = vec![false; level.n()];
    let mut order = Vec::with_capacity(focus.len());
    for &v in &focus {
        queued[v] = true;
        order.push(v);
    }
    for &v in &focus {
        for &(u, _) in &level.adj[v] {
            if !queued[u] {
                queued[u] = true;
                order.push(u);
            }
        }
    }
    move_queued(level, &mut compact, gamma, order);
    *membership = compact;
}

fn best_split(level: &Level, membership: &[usize], c: usize, members: &[usize], gamma: f64) -> Option<Vec<usize>> {
    let size = members.len() as f64;
    let inside = |u: usize| membership[u] == c;
    let k_comm: HashMap<usize, f64> = members
        .iter()
        .map(|&u| {
            let k = level.adj[u].iter().filter(|&&(x, _)| x != u && inside(x)).map(|&(_, w)| w).sum();
            (u, k)
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &seed in members {
        let mut group = vec![seed];
        let mut in_group: HashMap<usize, ()> = HashMap::from([(seed, ())]);
        let mut k_group: HashMap<usize, f64> = HashMap::new();
        for &(x, w) in &level.adj[seed] {
            if x != seed && inside(x) {
                *k_group.entry(x).or_insert(0.0) += w;
            }
        }
        let mut cut = k_comm[&seed];
        for _ in 0..SPLIT_STEPS.min(members.len() - 1) {
            let s = group.len() as f64;
            let gain = gamma * s * (size - s) - cut;
            if gain > best.as_ref().map_or(1e-12, |b| b.0) {
                best = Some((gain, group.clone()));
            }
            let next = k_group
                .iter()
                .filter(|(u, _)| !in_group.contains_key(u))
                .map(|(&u, &k)| (u, 2.0 * k - k_comm[&u]))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((u, step)) = next else { break };
            cut -= step;
            group.push(u);
            in_group.insert(u, ());
            for &(x, w) in &level.adj[u] {
                if x != u && inside(x) {
                    *k_group.entry(x).or_insert(0.0) += w;
                }
            }
        }
        let s = group.len() as f64;
        let gain = gamma * s * (size - s) - cut;
        if group.len() < members.len() && gain > best.as_ref().map_or(1e-12, |b| b.0) {
            best = Some((gain, group.clone()));
        }
    }
    best.map(|b| b.1)
}

/// Merge singletons within each community into well-connected
/// subcommunities, choosing randomly among non-negative gains.
fn refine(level: &Level, membership: &[usize], gamma: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = level.n();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut r_size = level.size.clone();
    let mut r_count = vec![1usize; n];
    // Weight from each refined community to the rest of its parent.
    let mut r_external = vec![0.0; n];
    let mut parent_size = vec![0.0; n];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        parent_size[membership[v]] += level.size[v];
        members[membership[v]].push(v);
    }
    for v in 0..n {
        r_external[v] = level.adj[v]
            .iter()
            .filter(|&&(u, _)| u != v && membership[u] == membership[v])
            .map(|&(_, w)| w)
            .sum();
    }
    let node_external = r_external.clone();
    let mut kw = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    for (c, nodes) in members.iter().enumerate() {
        if nodes.len() < 2 {
            continue;
        }
        let sc = parent_size[c];
        let mut order = nodes.clone();
        order.shuffle(rng);
        for v in order {
            if refined[v] != v || r_count[v] != 1 {
                continue;
            }
            let sv = level.size[v];
            if node_external[v] < gamma * sv * (sc - sv) {
                continue;
            }
            for &(u, w) in &level.adj[v] {
                if u == v || membership[u] != c {
                    continue;
                }
                let t = refined[u];
                if !seen[t] {
                    seen[t] = true;
                    touched.push(t);
                }
                kw[t] += w;
            }
            touched.sort_unstable();
            let mut options: Vec<(usize, f64)> = vec![(v, 0.0)];
            for &t in &touched {
                if t == v {
                    continue;
                }
                let st = r_size[t];
                if r_external[t] < gamma * st * (sc - st) {
                    continue;
                }
                let gain = kw[t] - gamma * sv * st;
                if gain >= 0.0 {
                    options.push((t, gain));
                }
            }
            let chosen = if options.len() == 1 {
                v
            } else {
                let top = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = options.iter().map(|o| ((o.1 - top) / THETA).exp()).collect();
                let total: f64 = weights.iter().sum();
                let mut x = rng.random::<f64>() * total;
                let mut pick = options.last().unwrap().0;
                for (o, w) in options.iter().zip(&weights) {
                    if x < *w {
                        pick = o.0;
                        break;
                    }
                    x -= w;
                }
                pick
            };
            if chosen != v {
                let link = kw[chosen];
                refined[v] = chosen;
                r_size[chosen] += sv;
                r_count[chosen] += 1;
                r_count[v] = 0;
                r_external[chosen] += node_external[v] - 2.0 * link;
            }
            for &t in &touched {
                kw[t] = 0.0;
                seen[t] = false;
            }
            touched.clear();
        }
    }
    refined
}
