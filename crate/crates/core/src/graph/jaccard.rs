use super::{GraphError, NodeWeightVector};

/// Weighted Jaccard similarity `Σ min(a_k, b_k) / Σ max(a_k, b_k)` over the
/// union of keys. Absent keys count as 0; two all-zero vectors give 0.
pub fn weighted_jaccard(a: &NodeWeightVector, b: &NodeWeightVector) -> Result<f64, GraphError> {
    for (k, w) in a.iter().chain(b.iter()) {
        if w < 0.0 || w.is_nan() {
            return Err(GraphError::NegativeWeight {
                key: k.to_string(),
                weight: w,
            });
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut ia = a.0.iter().peekable();
    let mut ib = b.0.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some((ka, &wa)), Some((kb, &wb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    den += wa;
                    ia.next();
                }
                std::cmp::Ordering::Greater => {
                    den += wb;
                    ib.next();
                }
                std::cmp::Ordering::Equal => {
                    num += wa.min(wb);
                    den += wa.max(wb);
                    ia.next();
                    ib.next();
                }
            },
            (Some((_, &wa)), None) => {
                den += wa;
                ia.next();
            }
            (None, Some((_, &wb))) => {
                den += wb;
                ib.next();
            }
            (None, None) => break,
        }
    }
    if den <= 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(pairs: &[(&str, f64)]) -> NodeWeightVector {
        pairs.iter().map(|&(k, w)| (k, w)).collect()
    }

    #[test]
    fn identity_and_disjoint() {
        let a = v(&[("x", 0.2), ("y", 0.8)]);
        assert_eq!(weighted_jaccard(&a, &a).unwrap(), 1.0);
        let b = v(&[("z", 1.0)]);
        assert_eq!(weighted_jaccard(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn half_overlap_is_one_third() {
        let a = v(&[("a", 0.5), ("b", 0.5)]);
        let b = v(&[("a", 0.5), ("c", 0.5)]);
        assert_eq!(weighted_jaccard(&a, &b).unwrap(), 0.5 / 1.5);
    }

    #[test]
    fn zero_vectors_and_negatives() {
        let z = v(&[("a", 0.0)]);
        assert_eq!(weighted_jaccard(&z, &NodeWeightVector::new()).unwrap(), 0.0);
        let neg = v(&[("a", -0.1)]);
        assert!(weighted_jaccard(&neg, &z).is_err());
    }
}
