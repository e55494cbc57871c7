//! Proper ε-nets of finite classes: every function lies strictly within ε
//! of some center, and centers are drawn from the class itself.

use super::FiniteClass;
use crate::data::Norm;
use crate::error::{Error, Result};

/// Largest number of distinct functions accepted by [`exact_min_cover`].
pub const MAX_EXACT_COVER: usize = 20;

fn check(eps: f64, q: Norm) -> Result<()> {
    q.validate()?;
    if !(eps > 0.0) {
        return Err(Error::param(format!("scale must be positive, got {eps}")));
    }
    Ok(())
}

/// Greedy proper ε-net: scan rows in order, open a center at every row not
/// yet covered. Returns the center indices.
pub fn greedy_net(fc: &FiniteClass, eps: f64, q: Norm) -> Result<Vec<usize>> {
    check(eps, q)?;
    let rows = fc.rows();
    let mut centers: Vec<usize> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if !centers.iter().any(|&c| q.dist(r, &rows[c]) < eps) {
            centers.push(i);
        }
    }
    Ok(centers)
}

/// Whether `centers` is a proper ε-net of `fc` under `q`.
pub fn is_proper_net(fc: &FiniteClass, centers: &[usize], eps: f64, q: Norm) -> bool {
    let rows = fc.rows();
    !centers.is_empty()
        && centers.iter().all(|&c| c < rows.len())
        && rows
            .iter()
            .all(|r| centers.iter().any(|&c| q.dist(r, &rows[c]) < eps))
}

/// Smallest proper ε-net, by exhaustive search over subsets of increasing
/// size. Exact duplicate rows are merged first; at most
/// [`MAX_EXACT_COVER`] distinct rows are accepted. Returns center indices
/// into `fc`.
pub fn exact_min_cover(fc: &FiniteClass, eps: f64, q: Norm) -> Result<Vec<usize>> {
    check(eps, q)?;
    let rows = fc.rows();
    let mut distinct: Vec<usize> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if !distinct.iter().any(|&j| &rows[j] == r) {
            distinct.push(i);
        }
    }
    let m = distinct.len();
    if m > MAX_EXACT_COVER {
        return Err(Error::ResourceLimit(format!(
            "exact cover supports at most {MAX_EXACT_COVER} distinct functions, got {m}"
        )));
    }
    let masks: Vec<u32> = distinct
        .iter()
        .map(|&c| {
            distinct
                .iter()
                .enumerate()
                .filter(|(_, &i)| q.dist(&rows[i], &rows[c]) < eps)
                .fold(0u32, |acc, (b, _)| acc | 1 << b)
        })
        .collect();
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut chosen = Vec::with_capacity(m);
    for size in 1..=m {
        if search(&masks, full, size, 0, &mut chosen) {
            return Ok(chosen.iter().map(|&b| distinct[b]).collect());
        }
    }
    unreachable!("the whole class is always a net")
}

fn search(masks: &[u32], full: u32, left: usize, covered: u32, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    // some center must cover the first uncovered function
    let first = (!covered & full).trailing_zeros();
    for (b, &mask) in masks.iter().enumerate() {
        if mask >> first & 1 == 0 {
            continue;
        }
        chosen.push(b);
        if search(masks, full, left - 1, covered | mask, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_min(fc: &FiniteClass, eps: f64, q: Norm) -> usize {
        let m = fc.len();
        (1u32..1 << m)
            .filter(|mask| {
                let centers: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).collect();
                is_proper_net(fc, &centers, eps, q)
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn singleton_class() {
        let fc = FiniteClass::new(vec![vec![0.1, 0.2]]).unwrap();
        for eps in [1e-6, 0.5, 10.0] {
            assert_eq!(greedy_net(&fc, eps, Norm::Inf).unwrap(), vec![0]);
            assert_eq!(exact_min_cover(&fc, eps, Norm::Lq(2.0)).unwrap().len(), 1);
        }
    }

    #[test]
    fn two_rows_at_distance_point_three() {
        let fc = FiniteClass::new(vec![vec![0.0, 0.0], vec![0.3, 0.3]]).unwrap();
        assert!((crate::data::pseudo_metric(&fc.rows()[0], &fc.rows()[1], Norm::Lq(2.0)).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(exact_min_cover(&fc, 0.5, Norm::Lq(2.0)).unwrap().len(), 1);
        assert_eq!(exact_min_cover(&fc, 0.2, Norm::Lq(2.0)).unwrap().len(), 2);
        // strict inequality: radius exactly the distance does not cover
        assert_eq!(exact_min_cover(&fc, 0.3, Norm::Inf).unwrap().len(), 2);
    }

    #[test]
    fn resource_limit_counts_distinct_rows() {
        let rows: Vec<Vec<f64>> = (0..21).map(|i| vec![i as f64]).collect();
        let fc = FiniteClass::new(rows).unwrap();
        assert!(matches!(exact_min_cover(&fc, 0.5, Norm::Inf), Err(Error::ResourceLimit(_))));
        let dup = FiniteClass::new(vec![vec![1.0]; 40]).unwrap();
        assert_eq!(exact_min_cover(&dup, 0.5, Norm::Inf).unwrap().len(), 1);
    }

    proptest! {
        #[test]
        fn exact_matches_brute_force_and_greedy_is_valid(
            vals in proptest::collection::vec(-0.5f64..0.5, 3 * 9),
            eps in 0.05f64..0.8,
            qi in 0usize..3,
        ) {
            let q = [Norm::Lq(1.0), Norm::Lq(2.0), Norm::Inf][qi];
            let fc = FiniteClass::new(vals.chunks(3).map(|c| c.to_vec()).collect()).unwrap();
            let exact = exact_min_cover(&fc, eps, q).unwrap();
            prop_assert!(is_proper_net(&fc, &exact, eps, q));
            prop_assert_eq!(exact.len(), brute_min(&fc, eps, q));
            let greedy = greedy_net(&fc, eps, q).unwrap();
            prop_assert!(is_proper_net(&fc, &greedy, eps, q));
            prop_assert!(greedy.len() >= exact.len());
            // d_q <= d_inf, so L∞ covers are never smaller
            prop_assert!(exact.len() <= exact_min_cover(&fc, eps, Norm::Inf).unwrap().len());
        }
    }
}
