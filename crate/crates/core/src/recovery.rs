//! Column extraction and deflation.
//!
//! One column is identified from a pivot pair of covariance rows: the
//! entrywise ratio of the two rows is constant exactly on the column's clean
//! support, so its mode locates a reliable index window `L`; per-row medians
//! over `L` then reproduce the column up to scale, and the pivot entry fixes
//! the scale. The driver repeats this with random pivots, keeps candidates
//! that pass a residual-sparsity verification, and subtracts each accepted
//! rank-one term until no admissible pivot remains.

use rand::Rng;

use crate::matrix::Matrix;
use crate::model::{CovarianceInput, CovarianceKind};
use crate::real::{real, Real};
use crate::{Error, Result};

/// Default axis-exclusion threshold for the finite-sample procedure.
///
/// The single-column accuracy guarantee wants pivot entries ≥ 10·c while the
/// deep-support scale is 1/10, so 10·c ≤ 1/10 holds with room at c = 0.01.
pub const DEFAULT_C: f64 = 0.01;

/// Relative width used to group population ratios into equal-value clusters.
///
/// Covariance entries are correctly-rounded single products, so two ratios
/// that agree in exact arithmetic can differ by a few ulp; 1e-12 is ~1e3 ulp
/// and far below any separation between distinct ratio values.
pub const RATIO_CLUSTER_REL_TOL: f64 = 1e-12;

/// Parameters of the extraction procedures and the deflation driver.
#[derive(Debug, Clone, PartialEq)]
pub struct ScipParams<T> {
    /// Axis-exclusion threshold (finite-sample candidate filter).
    pub c: T,
    /// Ratio bin half-width; the window step of the discretized mode.
    pub epsilon: T,
    /// Population zero test, default 1e-12·|Σ|_∞.
    pub zero_tol: T,
    /// Residual sparsity test threshold.
    pub verify_tol: T,
    /// Minimum |Σ_{i1,i2}| for pivot selection.
    pub select_tol: T,
    /// Hard cap on extraction invocations.
    pub max_iterations: usize,
    /// Abort after this many consecutive rejections.
    pub max_consecutive_rejections: usize,
}

impl<T: Real> ScipParams<T> {
    /// Defaults for an exact (population) covariance.
    pub fn population(cov: &CovarianceInput<T>) -> Self {
        let zero_tol = real::<T>(1e-12) * cov.matrix().max_abs();
        ScipParams {
            c: real(DEFAULT_C),
            epsilon: T::zero(),
            zero_tol,
            verify_tol: zero_tol,
            select_tol: zero_tol,
            max_iterations: 10 * cov.dim(),
            max_consecutive_rejections: 50 * cov.dim(),
        }
    }

    /// Defaults for an empirical covariance at thresholds `(c, epsilon)`.
    ///
    /// `select_tol` is `max(c, 10·proxy)` where the proxy is the median
    /// absolute off-diagonal entry, and `verify_tol` is `c`.
    pub fn empirical(cov: &CovarianceInput<T>, c: T, epsilon: T) -> Self {
        let zero_tol = real::<T>(1e-12) * cov.matrix().max_abs();
        let proxy = offdiag_quantile(cov.matrix(), real(0.5));
        ScipParams {
            c,
            epsilon,
            zero_tol,
            verify_tol: c,
            select_tol: c.max(real::<T>(10.0) * proxy),
            max_iterations: 10 * cov.dim(),
            max_consecutive_rejections: 50 * cov.dim(),
        }
    }

    fn validate(&self, kind: CovarianceKind) -> Result<()> {
        if self.zero_tol < T::zero()
            || self.verify_tol < T::zero()
            || self.select_tol < T::zero()
        {
            return Err(Error::InvalidParam("tolerances must be nonnegative".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParam("max_iterations must be positive".into()));
        }
        if matches!(kind, CovarianceKind::Empirical { .. })
            && !(T::zero() < self.epsilon && self.epsilon < self.c)
        {
            return Err(Error::InvalidParam(format!(
                "finite-sample mode needs 0 < epsilon < c, got epsilon={} c={}",
                self.epsilon, self.c
            )));
        }
        Ok(())
    }
}

/// Why a candidate was not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// No index survived the candidate filter.
    EmptyCandidateSet,
    /// The ratio window around the mode is empty.
    EmptyWindow,
    /// The rescaling denominator ã(i2) is zero.
    ScaleZero,
    /// The rescaling radicand Σ_{i1,i2}/ã(i2) is not positive.
    NonPositiveRadicand,
    /// The residual-sparsity verification failed.
    FailedVerification,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::EmptyCandidateSet => "empty_candidate_set",
            RejectReason::EmptyWindow => "empty_window",
            RejectReason::ScaleZero => "scale_zero",
            RejectReason::NonPositiveRadicand => "non_positive_radicand",
            RejectReason::FailedVerification => "failed_verification",
        };
        f.write_str(s)
    }
}

/// One extracted column together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnCandidate<T> {
    /// The candidate column â (zeros when rejected before scaling).
    pub vector: Vec<T>,
    /// The pivot pair (i1, i2) it was extracted from.
    pub pair: (usize, usize),
    /// The ratio-mode location.
    pub phi_hat: T,
    /// The index window L (full-matrix indices).
    pub support_set: Vec<usize>,
    /// Whether the extraction itself succeeded (verification is separate).
    pub accepted: bool,
    pub reject_reason: Option<RejectReason>,
}

impl<T: Real> ColumnCandidate<T> {
    fn rejected(dim: usize, pair: (usize, usize), reason: RejectReason, window: Vec<usize>) -> Self {
        ColumnCandidate {
            vector: vec![T::zero(); dim],
            pair,
            phi_hat: T::zero(),
            support_set: window,
            accepted: false,
            reject_reason: Some(reason),
        }
    }
}

/// Indices `k` with `e^{-eps} <= phi^{-1}·γ2(k)/γ1(k) < e^{eps}`.
///
/// The window is closed on the left and open on the right; at `eps = 0` it
/// degenerates to exact ratio equality. Caller guarantees `γ1(k) != 0` on
/// the candidate domain.
pub fn ratio_window<T: Real>(g1: &[T], g2: &[T], phi: T, eps: T) -> Result<Vec<usize>> {
    if phi == T::zero() || !phi.is_finite() {
        return Err(Error::InvalidParam("phi must be nonzero and finite".into()));
    }
    if g1.len() != g2.len() {
        return Err(Error::DimensionMismatch {
            context: "ratio_window",
            expected: g1.len(),
            got: g2.len(),
        });
    }
    if eps < T::zero() {
        return Err(Error::InvalidParam("eps must be nonnegative".into()));
    }
    let (lo, hi) = ((-eps).exp(), eps.exp());
    let mut out = Vec::new();
    for k in 0..g1.len() {
        let t = (g2[k] / g1[k]) / phi;
        let inside = if eps == T::zero() {
            t == T::one()
        } else {
            t >= lo && t < hi
        };
        if inside {
            out.push(k);
        }
    }
    Ok(out)
}

/// The discretized-mode location: the grid point `φ ∈ ±e^{εZ}` whose
/// 2ε-window captures the most ratios.
///
/// Ratios are split by sign; within a sign class each value is binned at
/// `⌊log|ratio|/ε⌋` and counted in its own bin and the one above, which
/// realizes every window of width 2ε anchored on the grid. Ties break toward
/// the larger count, then the smaller |log φ|, then the positive sign.
pub fn ratio_mode<T: Real>(g1: &[T], g2: &[T], eps: T) -> Result<T> {
    if g1.len() != g2.len() {
        return Err(Error::DimensionMismatch {
            context: "ratio_mode",
            expected: g1.len(),
            got: g2.len(),
        });
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidParam("ratio_mode needs eps > 0".into()));
    }
    let mut counts: std::collections::HashMap<(bool, i64), u32> = std::collections::HashMap::new();
    for k in 0..g1.len() {
        let q = g2[k] / g1[k];
        if q == T::zero() || !q.is_finite() {
            continue;
        }
        let bin = (q.abs().ln() / eps)
            .floor()
            .to_i64()
            .ok_or_else(|| Error::InvalidParam("ratio bin out of range".into()))?;
        let neg = q < T::zero();
        *counts.entry((neg, bin)).or_insert(0) += 1;
        *counts.entry((neg, bin + 1)).or_insert(0) += 1;
    }
    if counts.is_empty() {
        return Err(Error::NoCandidate("ratio_mode on empty or degenerate input"));
    }
    let mut best: Option<((bool, i64), u32)> = None;
    for (&key, &count) in &counts {
        let better = match best {
            None => true,
            Some((bkey, bcount)) => {
                let (neg, m) = key;
                let (bneg, bm) = bkey;
                (count, std::cmp::Reverse(m.abs()), !neg, std::cmp::Reverse(m))
                    > (bcount, std::cmp::Reverse(bm.abs()), !bneg, std::cmp::Reverse(bm))
            }
        };
        if better {
            best = Some((key, count));
        }
    }
    let ((neg, m), _) = best.expect("non-empty counts");
    let magnitude = (eps * real::<T>(m as f64)).exp();
    Ok(if neg { -magnitude } else { magnitude })
}

/// Lower median: order statistic ⌈m/2⌉ of the sorted values.
fn lower_median<T: Real>(values: &mut [T]) -> T {
    debug_assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    values[(values.len() - 1) / 2]
}

fn check_pair(dim: usize, pair: (usize, usize)) -> Result<()> {
    if pair.0 == pair.1 {
        return Err(Error::InvalidParam("pivot pair must be distinct".into()));
    }
    if pair.0 >= dim || pair.1 >= dim {
        return Err(Error::InvalidParam("pivot pair out of range".into()));
    }
    Ok(())
}

/// Shared step 2: per-row medians over the window, then pivot rescaling.
fn finish_candidate<T: Real>(
    sigma: &Matrix<T>,
    pair: (usize, usize),
    phi_hat: T,
    window: Vec<usize>,
) -> ColumnCandidate<T> {
    let (i1, i2) = pair;
    let r = sigma.rows();
    let g1 = sigma.row(i1);
    let mut tilde = Vec::with_capacity(r);
    let mut ratios = Vec::with_capacity(window.len());
    for i in 0..r {
        let gi = sigma.row(i);
        ratios.clear();
        ratios.extend(window.iter().map(|&l| gi[l] / g1[l]));
        tilde.push(lower_median(&mut ratios));
    }
    if tilde[i2] == T::zero() {
        return ColumnCandidate::rejected(r, pair, RejectReason::ScaleZero, window);
    }
    let radicand = sigma.get(i1, i2) / tilde[i2];
    if !(radicand > T::zero()) {
        return ColumnCandidate::rejected(r, pair, RejectReason::NonPositiveRadicand, window);
    }
    let lambda = radicand.sqrt();
    let vector: Vec<T> = tilde.into_iter().map(|v| lambda * v).collect();
    debug_assert!(vector[i1] != T::zero() && vector[i2] != T::zero());
    ColumnCandidate {
        vector,
        pair,
        phi_hat,
        support_set: window,
        accepted: true,
        reject_reason: None,
    }
}

/// Extracts one column from an exact covariance.
///
/// The candidate set keeps k ∉ {i1, i2} with both row entries above
/// `zero_tol`; the mode is taken over equal-value ratio clusters (ties: the
/// larger cluster, then the smallest attaining index). If `(i1, i2)` is a
/// good pair and the overlap condition holds at h₀(A), the output is ±a_j
/// up to floating-point rounding.
pub fn identify_column_population<T: Real>(
    cov: &CovarianceInput<T>,
    pair: (usize, usize),
    params: &ScipParams<T>,
) -> Result<ColumnCandidate<T>> {
    if cov.kind() != CovarianceKind::Population {
        return Err(Error::InvalidParam(
            "identify_column_population needs a population covariance".into(),
        ));
    }
    identify_population_on(cov.matrix(), pair, params)
}

fn identify_population_on<T: Real>(
    sigma: &Matrix<T>,
    pair: (usize, usize),
    params: &ScipParams<T>,
) -> Result<ColumnCandidate<T>> {
    check_pair(sigma.rows(), pair)?;
    let (i1, i2) = pair;
    let r = sigma.rows();
    let g1 = sigma.row(i1);
    let g2 = sigma.row(i2);
    let zt = params.zero_tol;
    let mut entries: Vec<(T, usize)> = Vec::new();
    for k in 0..r {
        if k == i1 || k == i2 {
            continue;
        }
        if g1[k].abs() > zt && g2[k].abs() > zt {
            entries.push((g2[k] / g1[k], k));
        }
    }
    if entries.is_empty() {
        return Ok(ColumnCandidate::rejected(
            r,
            pair,
            RejectReason::EmptyCandidateSet,
            Vec::new(),
        ));
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite ratios"));
    let cluster_tol = real::<T>(RATIO_CLUSTER_REL_TOL);
    let mut best: Option<(usize, usize, usize)> = None; // (start, end, min_k)
    let mut start = 0;
    for end in 1..=entries.len() {
        let boundary = end == entries.len() || {
            let (a, b) = (entries[end - 1].0, entries[end].0);
            (b - a).abs() > cluster_tol * a.abs().max(b.abs())
        };
        if boundary {
            let min_k = entries[start..end].iter().map(|e| e.1).min().expect("nonempty");
            let better = match best {
                None => true,
                Some((bs, be, bk)) => {
                    (end - start, std::cmp::Reverse(min_k)) > (be - bs, std::cmp::Reverse(bk))
                }
            };
            if better {
                best = Some((start, end, min_k));
            }
            start = end;
        }
    }
    let (gs, ge, _) = best.expect("nonempty entries");
    let group = &entries[gs..ge];
    let phi_hat = group[(group.len() - 1) / 2].0;
    let mut window: Vec<usize> = group.iter().map(|e| e.1).collect();
    window.sort_unstable();
    Ok(finish_candidate(sigma, pair, phi_hat, window))
}

/// Extracts one column from an approximate covariance with thresholds
/// `(c, ε)`: candidates keep both row entries ≥ c, the mode is the
/// discretized argmax, and the window is the 2ε-window around it.
pub fn identify_column<T: Real>(
    cov: &CovarianceInput<T>,
    pair: (usize, usize),
    params: &ScipParams<T>,
) -> Result<ColumnCandidate<T>> {
    identify_finite_on(cov.matrix(), pair, params)
}

fn identify_finite_on<T: Real>(
    sigma: &Matrix<T>,
    pair: (usize, usize),
    params: &ScipParams<T>,
) -> Result<ColumnCandidate<T>> {
    check_pair(sigma.rows(), pair)?;
    if !(T::zero() < params.epsilon && params.epsilon < params.c) {
        return Err(Error::InvalidParam(
            "identify_column needs 0 < epsilon < c".into(),
        ));
    }
    let (i1, i2) = pair;
    let r = sigma.rows();
    let g1 = sigma.row(i1);
    let g2 = sigma.row(i2);
    let mut idx: Vec<usize> = Vec::new();
    for k in 0..r {
        if k != i1 && k != i2 && g1[k].abs() >= params.c && g2[k].abs() >= params.c {
            idx.push(k);
        }
    }
    if idx.is_empty() {
        return Ok(ColumnCandidate::rejected(
            r,
            pair,
            RejectReason::EmptyCandidateSet,
            Vec::new(),
        ));
    }
    let g1k: Vec<T> = idx.iter().map(|&k| g1[k]).collect();
    let g2k: Vec<T> = idx.iter().map(|&k| g2[k]).collect();
    let phi_hat = match ratio_mode(&g1k, &g2k, params.epsilon) {
        Ok(phi) => phi,
        Err(_) => {
            return Ok(ColumnCandidate::rejected(
                r,
                pair,
                RejectReason::EmptyWindow,
                Vec::new(),
            ))
        }
    };
    let two_eps = params.epsilon + params.epsilon;
    let local = ratio_window(&g1k, &g2k, phi_hat, two_eps)?;
    if local.is_empty() {
        return Ok(ColumnCandidate::rejected(
            r,
            pair,
            RejectReason::EmptyWindow,
            Vec::new(),
        ));
    }
    let window: Vec<usize> = local.into_iter().map(|l| idx[l]).collect();
    Ok(finish_candidate(sigma, pair, phi_hat, window))
}

/// Residual-sparsity verification: on the candidate's support block, does
/// subtracting â âᵀ strictly reduce the number of entries above
/// `verify_tol`?
pub fn verify_column<T: Real>(
    sigma: &Matrix<T>,
    candidate: &ColumnCandidate<T>,
    zero_tol: T,
    verify_tol: T,
) -> bool {
    let support: Vec<usize> = candidate
        .vector
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > zero_tol)
        .map(|(i, _)| i)
        .collect();
    if support.is_empty() {
        return false;
    }
    let mut before = 0usize;
    let mut after = 0usize;
    for &i in &support {
        for &k in &support {
            let orig = sigma.get(i, k);
            if orig.abs() > verify_tol {
                before += 1;
            }
            if (orig - candidate.vector[i] * candidate.vector[k]).abs() > verify_tol {
                after += 1;
            }
        }
    }
    after < before
}

/// One row of the driver's run log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pair: (usize, usize),
    pub accepted: bool,
    pub window_size: usize,
    pub reason: Option<RejectReason>,
}

/// Output of the deflation driver.
#[derive(Debug, Clone)]
pub struct RecoveryResult<T> {
    /// Accepted columns in extraction order, sign-canonicalized.
    pub columns: Vec<ColumnCandidate<T>>,
    /// Total extraction invocations.
    pub iterations: usize,
    pub rejected_count: usize,
    /// The deflated working matrix at exit.
    pub residual: Matrix<T>,
    /// False when the iteration or rejection cap was hit.
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

impl<T: Real> RecoveryResult<T> {
    /// The recovered columns assembled as an r×k matrix.
    pub fn column_matrix(&self, dim: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(dim, self.columns.len());
        for (j, c) in self.columns.iter().enumerate() {
            for (i, v) in c.vector.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }
}

/// Makes the entry of largest magnitude positive (ties: first index).
fn canonicalize_sign<T: Real>(v: &mut [T]) {
    let mut arg = 0;
    let mut best = T::zero();
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            arg = i;
        }
    }
    if v[arg] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Deflation driver: repeatedly extracts a column from a random admissible
/// pivot, verifies it, and subtracts â âᵀ; stops when no off-diagonal entry
/// exceeds `select_tol` or a cap is reached.
pub fn recover<T: Real, R: Rng + ?Sized>(
    cov: &CovarianceInput<T>,
    params: &ScipParams<T>,
    rng: &mut R,
) -> Result<RecoveryResult<T>> {
    params.validate(cov.kind())?;
    let r = cov.dim();
    let mut working = cov.matrix().clone();
    let population = cov.kind() == CovarianceKind::Population;
    let mut columns = Vec::new();
    let mut log = Vec::new();
    let mut iterations = 0usize;
    let mut rejected = 0usize;
    let mut consecutive = 0usize;
    let mut converged = true;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    loop {
        pivots.clear();
        for i in 0..r {
            let row = working.row(i);
            for j in 0..r {
                if i != j && row[j].abs() > params.select_tol {
                    pivots.push((i, j));
                }
            }
        }
        if pivots.is_empty() {
            break;
        }
        if iterations >= params.max_iterations {
            converged = false;
            break;
        }
        iterations += 1;
        let pair = pivots[rng.gen_range(0..pivots.len())];
        let mut candidate = if population {
            identify_population_on(&working, pair, params)?
        } else {
            identify_finite_on(&working, pair, params)?
        };
        let verified = candidate.accepted
            && verify_column(&working, &candidate, params.zero_tol, params.verify_tol);
        if candidate.accepted && !verified {
            candidate.accepted = false;
            candidate.reject_reason = Some(RejectReason::FailedVerification);
        }
        log.push(IterationRecord {
            iteration: iterations,
            pair,
            accepted: verified,
            window_size: candidate.support_set.len(),
            reason: candidate.reject_reason,
        });
        if verified {
            canonicalize_sign(&mut candidate.vector);
            working.sub_outer(&candidate.vector);
            columns.push(candidate);
            consecutive = 0;
        } else {
            rejected += 1;
            consecutive += 1;
            if consecutive >= params.max_consecutive_rejections {
                converged = false;
                break;
            }
        }
    }
    Ok(RecoveryResult {
        columns,
        iterations,
        rejected_count: rejected,
        residual: working,
        converged,
        log,
    })
}

fn offdiag_quantile<T: Real>(m: &Matrix<T>, q: T) -> T {
    let r = m.rows();
    let mut vals = Vec::with_capacity(r * (r - 1));
    for i in 0..r {
        for j in 0..r {
            if i != j {
                vals.push(m.get(i, j).abs());
            }
        }
    }
    if vals.is_empty() {
        return T::zero();
    }
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
    let pos = (q * real::<T>((vals.len() - 1) as f64))
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(vals.len() - 1);
    vals[pos]
}

/// Data-driven ε: `(4/c)` times the q-quantile of the absolute off-diagonal
/// entries, floored at 1e-12. With most population entries zero, the median
/// off-diagonal magnitude of an empirical covariance estimates its entrywise
/// error level.
pub fn estimate_epsilon<T: Real>(cov: &CovarianceInput<T>, c: T, q: T) -> Result<T> {
    if cov.dim() < 2 {
        return Err(Error::InvalidParam("estimate_epsilon needs dim >= 2".into()));
    }
    if !(c > T::zero()) {
        return Err(Error::InvalidParam("c must be positive".into()));
    }
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidParam("quantile must be in (0,1)".into()));
    }
    let proxy = offdiag_quantile(cov.matrix(), q);
    Ok((real::<T>(4.0) / c * proxy).max(real(1e-12)))
}
