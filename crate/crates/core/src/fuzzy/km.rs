//! Karnik-Mendel type reduction.

use crate::error::{Error, Result};

/// Reduce interval firing strengths over crisp centroids to the interval
/// `[y_l, y_r]` of weighted averages.
///
/// `firing[i] = (f_lower, f_upper)` pairs with `centroids[i]`. Inputs need not
/// be sorted.
pub fn km_type_reduce(firing: &[(f64, f64)], centroids: &[f64]) -> Result<(f64, f64)> {
    if firing.is_empty() || firing.len() != centroids.len() {
        return Err(Error::invalid(
            "firing",
            "firing intervals and centroids must be non-empty and of equal length",
        ));
    }
    for &(lo, hi) in firing {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::invalid(
                "firing",
                format!("interval [{lo}, {hi}] is not 0 <= lower <= upper"),
            ));
        }
    }
    if centroids.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("centroids", "must be finite"));
    }
    if firing.iter().all(|&(_, hi)| hi == 0.0) {
        return Err(Error::NoRuleFired);
    }

    let mut order: Vec<usize> = (0..firing.len()).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let c: Vec<f64> = order.iter().map(|&i| centroids[i]).collect();
    let lo: Vec<f64> = order.iter().map(|&i| firing[i].0).collect();
    let hi: Vec<f64> = order.iter().map(|&i| firing[i].1).collect();
    Ok((polish(&c, &lo, &hi, true), polish(&c, &lo, &hi, false)))
}

/// KM endpoint, then the neighbouring switch points are tried as well: when
/// a centroid sits next to the endpoint the two assignments differ only by
/// rounding, and the extreme one is kept.
fn polish(c: &[f64], lo: &[f64], hi: &[f64], left: bool) -> f64 {
    let (mut y, k) = km_endpoint(c, lo, hi, left);
    for j in [k.wrapping_sub(1), k + 1] {
        if j <= c.len() {
            let v = weighted(c, lo, hi, j, left);
            if v.is_finite() && (if left { v < y } else { v > y }) {
                y = v;
            }
        }
    }
    y
}

/// Left endpoint. `c` ascending; at least one `hi > 0`.
pub(crate) fn km_left(c: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    km_endpoint(c, lo, hi, true).0
}

/// Right endpoint. `c` ascending; at least one `hi > 0`.
pub(crate) fn km_right(c: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    km_endpoint(c, lo, hi, false).0
}

/// Points at or below y take the upper weight on the left pass; points at
/// or above y take it on the right pass. The index is kept inside `span` so
/// at least one upper weight is always active, even when rounding puts `y`
/// past the outermost firing centroid.
#[inline]
fn switch_index(c: &[f64], y: f64, left: bool, span: (usize, usize)) -> usize {
    if left {
        c.partition_point(|&ci| ci <= y).max(span.0 + 1)
    } else {
        c.partition_point(|&ci| ci < y).min(span.1)
    }
}

/// Weighted mean with upper weights below switch point `k` (left) or from
/// `k` on (right).
#[inline]
fn weighted(c: &[f64], lo: &[f64], hi: &[f64], k: usize, left: bool) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..c.len() {
        let upper = (i < k) == left;
        let w = if upper { hi[i] } else { lo[i] };
        num += w * c[i];
        den += w;
    }
    num / den
}

/// Endpoint and the switch point it converged at.
fn km_endpoint(c: &[f64], lo: &[f64], hi: &[f64], left: bool) -> (f64, usize) {
    let n = c.len();
    let first = hi.iter().position(|&h| h > 0.0).unwrap_or(0);
    let last = hi.iter().rposition(|&h| h > 0.0).unwrap_or(n - 1);
    let span = (first, last);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let w = 0.5 * (lo[i] + hi[i]);
        num += w * c[i];
        den += w;
    }
    let mut y = num / den;
    let mut k = switch_index(c, y, left, span);
    for _ in 0..=n {
        y = weighted(c, lo, hi, k, left);
        let next = switch_index(c, y, left, span);
        if next == k {
            break;
        }
        k = next;
    }
    (y, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singleton() {
        assert_eq!(km_type_reduce(&[(1.0, 1.0)], &[0.3]).unwrap(), (0.3, 0.3));
        assert_eq!(km_type_reduce(&[(0.0, 1.0)], &[0.3]).unwrap(), (0.3, 0.3));
    }

    #[test]
    fn symmetric_pair() {
        let (l, r) = km_type_reduce(&[(1.0, 1.0), (1.0, 1.0)], &[-1.0, 1.0]).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn interval_pair_by_hand() {
        // y_l: upper on -1, lower on 1 -> (-1 + 0.5)/1.5; y_r mirrored.
        let (l, r) = km_type_reduce(&[(0.5, 1.0), (0.5, 1.0)], &[-1.0, 1.0]).unwrap();
        assert!((l + 1.0 / 3.0).abs() < 1e-15);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            km_type_reduce(&[(0.0, 0.0), (0.0, 0.0)], &[0.0, 1.0]),
            Err(Error::NoRuleFired)
        );
        assert!(km_type_reduce(&[], &[]).is_err());
        assert!(km_type_reduce(&[(1.0, 0.5)], &[0.0]).is_err());
        assert!(km_type_reduce(&[(1.0, 1.0)], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn endpoints_bracket_every_vertex(
            pts in prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..10)
        ) {
            let firing: Vec<(f64, f64)> = pts.iter().map(|&(_, a, b)| (a.min(b), a.max(b))).collect();
            let c: Vec<f64> = pts.iter().map(|p| p.0).collect();
            prop_assume!(firing.iter().any(|f| f.1 > 0.0));
            let (l, r) = km_type_reduce(&firing, &c).unwrap();
            prop_assert!(l <= r + 1e-12);
            let cmin = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let cmax = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(l >= cmin - 1e-12 && r <= cmax + 1e-12);
        }
    }
}
