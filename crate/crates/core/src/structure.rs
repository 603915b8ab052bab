//! Combinatorial structure of a known mixing matrix: column/row supports,
//! overlap sets C_{j,i} and their maxima m_j, the overlap condition, the
//! collinearity capacity h_ε, and the good pivot pairs per column. These are
//! the ground-truth certificates that predict when column extraction can
//! succeed.

use crate::model::MixingMatrix;
use crate::real::{real, Real};

/// Threshold below which a support entry counts as shallow.
///
/// The overlap condition discounts shallow entries (|a_j(i)| < 1/10) because
/// their covariance products can drop under the selection threshold.
pub const DEEP_SUPPORT_THRESHOLD: f64 = 0.1;

/// Column supports I_j and row supports R_i of a mixing matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportIndex {
    pub column_supports: Vec<Vec<usize>>,
    pub row_supports: Vec<Vec<usize>>,
}

/// Exact nonzero index sets for columns and rows.
pub fn supports<T: Real>(a: &MixingMatrix<T>) -> SupportIndex {
    SupportIndex {
        column_supports: (0..a.cols()).map(|j| a.col_support(j).to_vec()).collect(),
        row_supports: (0..a.rows()).map(|i| a.row_support(i).to_vec()).collect(),
    }
}

/// The overlap sets C_{j,i} = ∪_{k ∈ R_i∖{j}} (I_j ∩ I_k) ∖ {i} for every
/// (column, row) pair, and the per-column maxima m_j.
#[derive(Debug, Clone)]
pub struct OverlapSets {
    /// `cells[j][i]` is C_{j,i} as a sorted index set.
    pub cells: Vec<Vec<Vec<usize>>>,
    /// `m[j] = max_i |C_{j,i}|`.
    pub m: Vec<usize>,
}

pub fn overlap_sets<T: Real>(a: &MixingMatrix<T>) -> OverlapSets {
    let r = a.rows();
    let s = a.cols();
    let mut cells = vec![Vec::with_capacity(r); s];
    let mut m = vec![0usize; s];
    // membership mask per column for O(1) intersection tests
    let mut in_col = vec![false; r];
    for j in 0..s {
        for &i in a.col_support(j) {
            in_col[i] = true;
        }
        for i in 0..r {
            let mut cell: Vec<usize> = Vec::new();
            for &k in a.row_support(i) {
                if k == j {
                    continue;
                }
                for &p in a.col_support(k) {
                    if p != i && in_col[p] {
                        cell.push(p);
                    }
                }
            }
            cell.sort_unstable();
            cell.dedup();
            if cell.len() > m[j] {
                m[j] = cell.len();
            }
            cells[j].push(cell);
        }
        for &i in a.col_support(j) {
            in_col[i] = false;
        }
    }
    OverlapSets { cells, m }
}

/// Per-column verdict of the overlap condition at slack `h`.
#[derive(Debug, Clone)]
pub struct OcColumn<T> {
    /// |I_j|
    pub support_size: usize,
    /// m_j
    pub overlap_max: usize,
    /// |{i ∈ I_j : |a_j(i)| ≥ 1/10}|
    pub deep_count: usize,
    /// |I_j| − 6 m_j − 2|I_j ∖ deep| − h; the condition holds iff this is > 0.
    pub margin: T,
    pub passes: bool,
}

#[derive(Debug, Clone)]
pub struct OcReport<T> {
    pub h: T,
    pub per_column: Vec<OcColumn<T>>,
    pub global: bool,
}

/// Checks `6 m_j + 2|I_j ∖ deep(I_j)| + h < |I_j|` for every column.
pub fn oc_check<T: Real>(a: &MixingMatrix<T>, h: T) -> OcReport<T> {
    let deep_thr = real::<T>(DEEP_SUPPORT_THRESHOLD);
    let overlaps = overlap_sets(a);
    let mut per_column = Vec::with_capacity(a.cols());
    let mut global = true;
    for j in 0..a.cols() {
        let support = a.col_support(j);
        let deep_count = support
            .iter()
            .filter(|&&i| a.get(i, j).abs() >= deep_thr)
            .count();
        let shallow = support.len() - deep_count;
        let margin = real::<T>(support.len() as f64)
            - real::<T>((6 * overlaps.m[j] + 2 * shallow) as f64)
            - h;
        let passes = margin > T::zero();
        global &= passes;
        per_column.push(OcColumn {
            support_size: support.len(),
            overlap_max: overlaps.m[j],
            deep_count,
            margin,
            passes,
        });
    }
    OcReport { h, per_column, global }
}

/// Good pivot cells per column: the ordered pairs (i1, i2) ∈ I_j × I_j whose
/// row supports intersect exactly in {j}. Extraction from such a pair yields
/// column j; the sets are pairwise disjoint across columns.
pub fn good_pairs<T: Real>(a: &MixingMatrix<T>) -> Vec<Vec<(usize, usize)>> {
    let s = a.cols();
    let mut out = vec![Vec::new(); s];
    for j in 0..s {
        let support = a.col_support(j);
        for &i1 in support {
            'pair: for &i2 in support {
                // R_{i1} ∩ R_{i2} must be exactly {j}; both are sorted
                let (ra, rb) = (a.row_support(i1), a.row_support(i2));
                let (mut x, mut y) = (0, 0);
                while x < ra.len() && y < rb.len() {
                    match ra[x].cmp(&rb[y]) {
                        std::cmp::Ordering::Less => x += 1,
                        std::cmp::Ordering::Greater => y += 1,
                        std::cmp::Ordering::Equal => {
                            if ra[x] != j {
                                continue 'pair;
                            }
                            x += 1;
                            y += 1;
                        }
                    }
                }
                out[j].push((i1, i2));
            }
        }
    }
    out
}

/// Worst-case count of out-of-support indices whose covariance-row ratios
/// fall inside one multiplicative 2ε-window — the "false collinearity"
/// capacity of `A`.
///
/// The maximum ranges over ordered good pairs (i1, i2), i1 ≠ i2, with
/// R_{i1} ∩ R_{i2} = {j}; candidates are k ∉ I_j with both row entries
/// nonzero. For each sign class the log-ratios are sorted and a half-open
/// window of width 2ε slides with its left edge on the data points, which
/// realizes the supremum over window positions. At ε = 0 the window
/// degenerates to exact equality.
pub fn collinearity_capacity<T: Real>(a: &MixingMatrix<T>, eps: T) -> usize {
    assert!(eps >= T::zero(), "epsilon must be nonnegative");
    let gamma = a.matrix().gram();
    let r = a.rows();
    let mut best = 0usize;
    let mut in_col = vec![false; r];
    let pairs = good_pairs(a);
    let two_eps = eps + eps;
    for j in 0..a.cols() {
        for &i in a.col_support(j) {
            in_col[i] = true;
        }
        let mut pos: Vec<T> = Vec::new();
        let mut neg: Vec<T> = Vec::new();
        for &(i1, i2) in &pairs[j] {
            if i1 == i2 {
                continue;
            }
            let g1 = gamma.row(i1);
            let g2 = gamma.row(i2);
            pos.clear();
            neg.clear();
            for k in 0..r {
                if in_col[k] || g1[k] == T::zero() || g2[k] == T::zero() {
                    continue;
                }
                let q = g2[k] / g1[k];
                let lg = q.abs().ln();
                if q > T::zero() {
                    pos.push(lg);
                } else {
                    neg.push(lg);
                }
            }
            for vals in [&mut pos, &mut neg] {
                if vals.is_empty() {
                    continue;
                }
                vals.sort_by(|x, y| x.partial_cmp(y).expect("finite log-ratios"));
                best = best.max(max_window_count(vals, two_eps));
            }
        }
        for &i in a.col_support(j) {
            in_col[i] = false;
        }
    }
    best
}

/// Maximum number of sorted points inside a half-open window `[x, x + width)`
/// anchored at a data point; at width 0 counts exact duplicates.
fn max_window_count<T: Real>(sorted: &[T], width: T) -> usize {
    let n = sorted.len();
    let mut best = 0usize;
    if width == T::zero() {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && sorted[j] == sorted[i] {
                j += 1;
            }
            best = best.max(j - i);
            i = j;
        }
        return best;
    }
    let mut hi = 0;
    for lo in 0..n {
        if hi < lo {
            hi = lo;
        }
        while hi < n && sorted[hi] - sorted[lo] < width {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

/// The full structural certificate for one matrix.
#[derive(Debug, Clone)]
pub struct StructureReport<T> {
    /// Per-column overlap maxima m_j.
    pub m: Vec<usize>,
    /// Per-column deep supports {i : |a_j(i)| ≥ 1/10}.
    pub deep_supports: Vec<Vec<usize>>,
    /// Per-column slack |I_j| − 6m_j − 2|I_j∖deep| − h.
    pub oc_margin: Vec<T>,
    /// The h used for the margins.
    pub h: T,
    /// h_ε(A) at the requested ε.
    pub h_eps_value: usize,
    /// The ε used for `h_eps_value`.
    pub epsilon: T,
    /// |Σ_j| per column.
    pub good_pair_counts: Vec<usize>,
    pub oc_global: bool,
}

impl<T: Real> StructureReport<T> {
    pub fn compute(a: &MixingMatrix<T>, h: T, eps: T) -> Self {
        let deep_thr = real::<T>(DEEP_SUPPORT_THRESHOLD);
        let oc = oc_check(a, h);
        let deep_supports = (0..a.cols())
            .map(|j| {
                a.col_support(j)
                    .iter()
                    .copied()
                    .filter(|&i| a.get(i, j).abs() >= deep_thr)
                    .collect()
            })
            .collect();
        let pair_counts = good_pairs(a).iter().map(Vec::len).collect();
        StructureReport {
            m: oc.per_column.iter().map(|c| c.overlap_max).collect(),
            deep_supports,
            oc_margin: oc.per_column.iter().map(|c| c.margin).collect(),
            h,
            h_eps_value: collinearity_capacity(a, eps),
            epsilon: eps,
            good_pair_counts: pair_counts,
            oc_global: oc.global,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::sample_bg;
    use crate::rng::stream;

    fn mix(rows: &[Vec<f64>]) -> MixingMatrix<f64> {
        MixingMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn identity(n: usize) -> MixingMatrix<f64> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        MixingMatrix::new(m).unwrap()
    }

    #[test]
    fn supports_identity_and_zero() {
        let a = identity(3);
        let idx = supports(&a);
        for j in 0..3 {
            assert_eq!(idx.column_supports[j], vec![j]);
            assert_eq!(idx.row_supports[j], vec![j]);
        }
        let z = mix(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        let idx = supports(&z);
        assert!(idx.column_supports.iter().all(Vec::is_empty));
        assert!(idx.row_supports.iter().all(Vec::is_empty));
    }

    #[test]
    fn supports_hand_case() {
        // a1 support {0,1,2}, a2 support {1,3} (0-based)
        let a = mix(&[
            vec![1.0, 0.0],
            vec![2.0, 5.0],
            vec![3.0, 0.0],
            vec![0.0, 4.0],
        ]);
        let idx = supports(&a);
        assert_eq!(idx.row_supports[1], vec![0, 1]);
        assert_eq!(idx.row_supports[3], vec![1]);
    }

    #[test]
    fn overlap_disjoint_columns_all_empty() {
        let a = mix(&[
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 3.0],
            vec![0.0, 4.0],
        ]);
        let o = overlap_sets(&a);
        assert_eq!(o.m, vec![0, 0]);
        assert!(o.cells.iter().flatten().all(Vec::is_empty));
    }

    #[test]
    fn overlap_hand_case() {
        // a1 supp {0,1,2}, a2 supp {1,3}: C_{0,3} = I_0 ∩ I_1 ∖ {3} = {1}
        let a = mix(&[
            vec![1.0, 0.0],
            vec![2.0, 5.0],
            vec![3.0, 0.0],
            vec![0.0, 4.0],
        ]);
        let o = overlap_sets(&a);
        assert_eq!(o.cells[0][3], vec![1]);
        assert!(o.m[0] >= 1);
    }

    #[test]
    fn oc_direct_inequalities() {
        // |I_j|=10, m_j=1 (via a doubled column pattern would be intricate;
        // check the arithmetic through the report on a constructed case)
        let mut rows = vec![vec![0.0, 0.0]; 10];
        for (i, row) in rows.iter_mut().enumerate() {
            row[0] = 1.0;
            if i == 0 {
                row[1] = 1.0;
            }
        }
        // second column only overlaps I_0 at row 0 and nowhere else, and
        // has a single entry, so C_{0,i} is empty for all i: m_0 = 0.
        let a = mix(&rows);
        let rep = oc_check(&a, 3.0);
        assert!(rep.per_column[0].passes); // 0 + 0 + 3 < 10
        let rep = oc_check(&a, 10.0);
        assert!(!rep.per_column[0].passes); // 10 < 10 fails
    }

    #[test]
    fn collinearity_capacity_trivial_cases() {
        // single column: no out-of-support rows with nonzero entries
        let a = mix(&[vec![1.0], vec![2.0], vec![0.0]]);
        assert_eq!(collinearity_capacity(&a, 0.0), 0);
        // identity: no pair i1 != i2 shares a column support
        let a = identity(3);
        assert_eq!(collinearity_capacity(&a, 0.01), 0);
    }

    #[test]
    fn good_pairs_disjoint_supports() {
        let a = mix(&[
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 3.0],
            vec![0.0, 4.0],
        ]);
        let gp = good_pairs(&a);
        assert_eq!(gp[0].len(), 4); // I_0 x I_0 entirely
        assert_eq!(gp[1].len(), 4);
    }

    #[test]
    fn good_pairs_hand_case() {
        // a1 supp {0,1,2}, a2 supp {1,3}: (0,2) in Σ_0 but (1,1) not (R_1={0,1})
        let a = mix(&[
            vec![1.0, 0.0],
            vec![2.0, 5.0],
            vec![3.0, 0.0],
            vec![0.0, 4.0],
        ]);
        let gp = good_pairs(&a);
        assert!(gp[0].contains(&(0, 2)));
        assert!(!gp[0].contains(&(1, 1)));
    }

    #[test]
    fn good_pair_cells_disjoint_across_columns() {
        let a = sample_bg::<f64, _>(40, 40, 0.1, &mut stream(5, "gp", 0)).unwrap();
        let gp = good_pairs(&a);
        let mut seen = std::collections::HashSet::new();
        for cells in &gp {
            for &p in cells {
                assert!(seen.insert(p), "pair {p:?} appears in two columns");
            }
        }
    }

    #[test]
    fn window_count_edges() {
        assert_eq!(max_window_count(&[1.0, 1.0, 2.0], 0.0), 2);
        assert_eq!(max_window_count(&[0.0, 0.5, 0.9], 1.0), 3);
        // half-open: a point exactly at x + width is excluded
        assert_eq!(max_window_count(&[0.0, 1.0], 1.0), 1);
        assert_eq!(max_window_count::<f64>(&[], 1.0), 0);
    }
}
