//! Recovery quality: the permutation/sign-invariant sup-norm distance and
//! support precision/recall under the induced matching.
//!
//! The distance is a bottleneck objective: pair recovered columns with true
//! columns (zero-padding the narrower matrix) so that the worst per-pair
//! sup-norm error, minimized over per-column sign flips, is as small as
//! possible. Solved by binary search over the realized cost set with a
//! maximum-bipartite-matching feasibility check.

use crate::matrix::Matrix;
use crate::real::Real;
use crate::{Error, Result};

/// The optimal pairing found by [`dist`].
#[derive(Debug, Clone)]
pub struct Matching<T> {
    /// `permutation[k] = j`: column k of the (padded) first argument is
    /// matched to column j of the (padded) second.
    pub permutation: Vec<usize>,
    /// Sign applied to column k of the first argument (+1 or -1).
    pub signs: Vec<i8>,
    /// The achieved bottleneck value.
    pub value: T,
}

fn padded_columns<T: Real>(m: &Matrix<T>, rows: usize, width: usize) -> Vec<Vec<T>> {
    (0..width)
        .map(|j| {
            if j < m.cols() {
                m.column(j)
            } else {
                vec![T::zero(); rows]
            }
        })
        .collect()
}

/// Augmenting-path step of Kuhn's maximum bipartite matching.
fn try_assign(
    k: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for &j in &adj[k] {
        if !seen[j] {
            seen[j] = true;
            if owner[j].is_none() || try_assign(owner[j].unwrap(), adj, seen, owner) {
                owner[j] = Some(k);
                return true;
            }
        }
    }
    false
}

fn perfect_matching_under<T: Real>(cost: &[Vec<T>], threshold: T) -> Option<Vec<usize>> {
    let s = cost.len();
    let adj: Vec<Vec<usize>> = cost
        .iter()
        .map(|row| {
            (0..s)
                .filter(|&j| row[j] <= threshold)
                .collect::<Vec<usize>>()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; s];
    let mut seen = vec![false; s];
    for k in 0..s {
        seen.iter_mut().for_each(|v| *v = false);
        if !try_assign(k, &adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut perm = vec![0usize; s];
    for (j, o) in owner.iter().enumerate() {
        perm[o.expect("perfect matching")] = j;
    }
    Some(perm)
}

/// Sup-norm distance between two column sets, minimized over column
/// permutations and per-column sign flips. The narrower matrix is padded
/// with zero columns, so unmatched columns are charged their full sup norm.
pub fn dist<T: Real>(ahat: &Matrix<T>, a: &Matrix<T>) -> Result<Matching<T>> {
    if ahat.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "dist row count",
            expected: a.rows(),
            got: ahat.rows(),
        });
    }
    let rows = a.rows();
    let width = ahat.cols().max(a.cols());
    if width == 0 {
        return Ok(Matching {
            permutation: Vec::new(),
            signs: Vec::new(),
            value: T::zero(),
        });
    }
    let x = padded_columns(ahat, rows, width);
    let y = padded_columns(a, rows, width);
    // cost[k][j] = min over sign of |±x_k − y_j|_∞; remember the better sign
    let mut cost = vec![vec![T::zero(); width]; width];
    let mut sign = vec![vec![1i8; width]; width];
    for k in 0..width {
        for j in 0..width {
            let mut plus = T::zero();
            let mut minus = T::zero();
            for i in 0..rows {
                plus = plus.max((x[k][i] - y[j][i]).abs());
                minus = minus.max((x[k][i] + y[j][i]).abs());
            }
            if minus < plus {
                cost[k][j] = minus;
                sign[k][j] = -1;
            } else {
                cost[k][j] = plus;
            }
        }
    }
    let mut thresholds: Vec<T> = cost.iter().flatten().copied().collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    thresholds.dedup();
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    debug_assert!(perfect_matching_under(&cost, thresholds[hi]).is_some());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if perfect_matching_under(&cost, thresholds[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let permutation =
        perfect_matching_under(&cost, thresholds[lo]).expect("feasible at optimal threshold");
    let signs: Vec<i8> = permutation.iter().enumerate().map(|(k, &j)| sign[k][j]).collect();
    let value = permutation
        .iter()
        .enumerate()
        .map(|(k, &j)| cost[k][j])
        .fold(T::zero(), T::max);
    Ok(Matching {
        permutation,
        signs,
        value,
    })
}

/// Support precision/recall of one matched column pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportQuality<T> {
    pub precision: T,
    pub recall: T,
}

/// Per-matched-pair support quality at magnitude threshold `tau`, under a
/// matching previously computed by [`dist`].
pub fn support_metrics<T: Real>(
    ahat: &Matrix<T>,
    a: &Matrix<T>,
    tau: T,
    matching: &Matching<T>,
) -> Result<Vec<SupportQuality<T>>> {
    if ahat.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "support_metrics row count",
            expected: a.rows(),
            got: ahat.rows(),
        });
    }
    let rows = a.rows();
    let width = matching.permutation.len();
    let x = padded_columns(ahat, rows, width);
    let y = padded_columns(a, rows, width);
    let mut out = Vec::with_capacity(width);
    for (k, &j) in matching.permutation.iter().enumerate() {
        let sx: Vec<bool> = x[k].iter().map(|v| v.abs() > tau).collect();
        let sy: Vec<bool> = y[j].iter().map(|v| v.abs() > tau).collect();
        let inter = sx.iter().zip(&sy).filter(|(p, q)| **p && **q).count();
        let nx = sx.iter().filter(|p| **p).count();
        let ny = sy.iter().filter(|q| **q).count();
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                T::one()
            } else {
                T::from_usize(num).unwrap() / T::from_usize(den).unwrap()
            }
        };
        out.push(SupportQuality {
            precision: ratio(inter, nx),
            recall: ratio(inter, ny),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identical_matrices_have_zero_distance() {
        let a = m(&[vec![1.0, 0.0], vec![0.5, -2.0]]);
        let d = dist(&a, &a).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn permuted_and_flipped_is_zero() {
        let a = m(&[vec![1.0, 0.0, 3.0], vec![0.5, -2.0, 0.0]]);
        // columns permuted (2,0,1) and signs flipped (-,+,-)
        let b = m(&[vec![-3.0, 1.0, 0.0], vec![0.0, 0.5, 2.0]]);
        let d = dist(&b, &a).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn single_entry_perturbation_is_measured() {
        let a = m(&[vec![5.0, 0.0], vec![0.0, -7.0]]);
        let mut rows = vec![vec![5.0, 0.0], vec![0.0, -7.0]];
        rows[0][0] += 0.25;
        let b = m(&rows);
        let d = dist(&b, &a).unwrap();
        assert!((d.value - 0.25).abs() < 1e-15);
        assert_eq!(d.permutation, vec![0, 1]);
    }

    #[test]
    fn width_mismatch_pads_with_zero_columns() {
        let a = m(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        let b = m(&[vec![1.0], vec![0.0]]); // missing the second column
        let d = dist(&b, &a).unwrap();
        assert_eq!(d.value, 3.0); // |a_2|_inf paid in full
    }

    #[test]
    fn rejects_row_mismatch() {
        let a = m(&[vec![1.0]]);
        let b = m(&[vec![1.0], vec![2.0]]);
        assert!(dist(&b, &a).is_err());
    }

    #[test]
    fn support_quality_identity_and_zero() {
        let a = m(&[vec![1.0, 0.0], vec![0.0, 0.5], vec![2.0, 0.0]]);
        let d = dist(&a, &a).unwrap();
        let q = support_metrics(&a, &a, 0.01, &d).unwrap();
        assert!(q.iter().all(|s| s.precision == 1.0 && s.recall == 1.0));

        let z = m(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]]);
        let d = dist(&z, &a).unwrap();
        let q = support_metrics(&z, &a, 0.01, &d).unwrap();
        assert!(q.iter().all(|s| s.recall == 0.0));
    }
}
