use std::collections::{BTreeMap, HashMap};

use super::{CommunityError, Partition};

fn check_sizes(p: &Partition, q: &Partition) -> Result<(), CommunityError> {
    if p.len() != q.len() {
        return Err(CommunityError::NodeMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// Nonzero contingency table cells `(i, j) -> n_ij`.
fn contingency(p: &Partition, q: &Partition) -> HashMap<(usize, usize), usize> {
    let mut table = HashMap::new();
    for (&a, &b) in p.membership().iter().zip(q.membership()) {
        *table.entry((a, b)).or_insert(0) += 1;
    }
    table
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Adjusted mutual information under the permutation model with
/// arithmetic-mean normalisation. Partitions equal up to relabelling give 1.
pub fn ami(p: &Partition, q: &Partition) -> Result<f64, CommunityError> {
    check_sizes(p, q)?;
    // Renumbered memberships are canonical, so equality means same grouping.
    if p.membership() == q.membership() {
        return Ok(1.0);
    }
    let n = p.len();
    let nf = n as f64;
    let a = p.sizes();
    let b = q.sizes();
    let table = contingency(p, q);

    let mi: f64 = table
        .iter()
        .map(|(&(i, j), &nij)| {
            let nij = nij as f64;
            nij / nf * (nf * nij / (a[i] as f64 * b[j] as f64)).ln()
        })
        .sum();
    let h_p = entropy(&a, nf);
    let h_q = entropy(&b, nf);
    let emi = expected_mutual_information(&a, &b, n);
    let mean = (h_p + h_q) / 2.0;
    let mut denominator = mean - emi;
    if denominator < 0.0 {
        denominator = denominator.min(-f64::EPSILON);
    } else {
        denominator = denominator.max(f64::EPSILON);
    }
    Ok((mi - emi) / denominator)
}

/// `E[MI]` over all contingency tables with the given marginals, with
/// clusters grouped by size.
fn expected_mutual_information(a: &[usize], b: &[usize], n: usize) -> f64 {
    let mut log_fact = vec![0.0; n + 1];
    for k in 1..=n {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    let count = |sizes: &[usize]| {
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in sizes {
            *m.entry(s).or_insert(0) += 1;
        }
        m
    };
    let ca = count(a);
    let cb = count(b);
    let nf = n as f64;
    let mut emi = 0.0;
    for (&ai, &ma) in &ca {
        for (&bj, &mb) in &cb {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            let fixed = log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj] - log_fact[n];
            let mut term = 0.0;
            for nij in lo..=hi {
                let log_p = fixed
                    - log_fact[nij]
                    - log_fact[ai - nij]
                    - log_fact[bj - nij]
                    - log_fact[n + nij - ai - bj];
                let x = nij as f64;
                term += x / nf * (nf * x / (ai as f64 * bj as f64)).ln() * log_p.exp();
            }
            emi += term * (ma * mb) as f64;
        }
    }
    emi
}

/// Element-centric similarity of two partitions: the mean over nodes of
/// `1 − ½‖p_i − q_i‖₁`, where `p_i` is the node's personalised-PageRank
/// affinity vector within its own cluster with restart probability
/// `1 − alpha`.
///
/// For hard partitions the affinity is `alpha / |c|` on every cluster
/// member plus `1 − alpha` on the node itself; the self term cancels in the
/// difference, so each node's score depends only on the two cluster sizes
/// and their overlap.
pub fn element_centric(p: &Partition, q: &Partition, alpha: f64) -> Result<f64, CommunityError> {
    check_sizes(p, q)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CommunityError::BadAlpha(alpha));
    }
    let n = p.len();
    if n == 0 {
        return Ok(1.0);
    }
    let sa = p.sizes();
    let sb = q.sizes();
    let mut cells: Vec<((usize, usize), usize)> = contingency(p, q).into_iter().collect();
    cells.sort_unstable();
    let mut total = 0.0;
    for ((i, j), m) in cells {
        let a = sa[i] as f64;
        let b = sb[j] as f64;
        let m = m as f64;
        let l1 = m * (1.0 / a - 1.0 / b).abs() + (a - m) / a + (b - m) / b;
        total += m * (1.0 - 0.5 * l1);
    }
    Ok(total / n as f64)
}
