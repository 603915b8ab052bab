//! Problem-instance generation: sparse mixing matrices from a
//! Bernoulli-Gaussian ensemble, population covariances, raw data, and
//! empirical covariances. Everything is pure given an explicit RNG stream.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::Matrix;
use crate::real::{real, Real};
use crate::{Error, Result};

/// Relative symmetry tolerance for covariance inputs.
const SYMMETRY_REL_TOL: f64 = 1e-12;

/// The recovery target: a dense r×s matrix with cached support structure.
///
/// Zeros are exact (the Bernoulli gate is applied before multiplication),
/// so supports need no tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix<T> {
    matrix: Matrix<T>,
    col_supports: Vec<Vec<usize>>,
    row_supports: Vec<Vec<usize>>,
}

impl<T: Real> MixingMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::InvalidParam("mixing matrix must be non-empty".into()));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite { i: 0, j: 0 });
        }
        let mut col_supports = vec![Vec::new(); matrix.cols()];
        let mut row_supports = vec![Vec::new(); matrix.rows()];
        for i in 0..matrix.rows() {
            for j in 0..matrix.cols() {
                if matrix.get(i, j) != T::zero() {
                    col_supports[j].push(i);
                    row_supports[i].push(j);
                }
            }
        }
        Ok(Self {
            matrix,
            col_supports,
            row_supports,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.matrix.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// Support of column `j` (sorted row indices of nonzero entries).
    pub fn col_support(&self, j: usize) -> &[usize] {
        &self.col_supports[j]
    }

    /// Support of row `i` (sorted column indices of nonzero entries).
    pub fn row_support(&self, i: usize) -> &[usize] {
        &self.row_supports[i]
    }

    pub fn max_abs(&self) -> T {
        self.matrix.max_abs()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.matrix.column(j)
    }
}

/// Per-coordinate variances of the independent additive noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec<T> {
    variances: Vec<T>,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(variances: Vec<T>) -> Result<Self> {
        if variances.iter().any(|v| *v < T::zero() || !v.is_finite()) {
            return Err(Error::InvalidParam("noise variances must be finite and >= 0".into()));
        }
        Ok(Self { variances })
    }

    pub fn zero(r: usize) -> Self {
        Self {
            variances: vec![T::zero(); r],
        }
    }

    pub fn uniform(r: usize, variance: T) -> Result<Self> {
        Self::new(vec![variance; r])
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    pub fn is_zero(&self) -> bool {
        self.variances.iter().all(|v| *v == T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Population,
    /// Sample covariance of `n` observations.
    Empirical { n: usize },
}

/// An r×r symmetric matrix tagged with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceInput<T> {
    matrix: Matrix<T>,
    kind: CovarianceKind,
}

impl<T: Real> CovarianceInput<T> {
    pub fn new(matrix: Matrix<T>, kind: CovarianceKind) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite { i: 0, j: 0 });
        }
        if let Some((i, j)) = matrix.symmetry_violation(real(SYMMETRY_REL_TOL)) {
            return Err(Error::NotSymmetric { i, j });
        }
        Ok(Self { matrix, kind })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    /// Positive semidefiniteness check: smallest eigenvalue must be at least
    /// `-1e-9 * trace`. Intended for population inputs and sanity checks.
    pub fn check_psd(&self) -> Result<()> {
        let floor = -real::<T>(1e-9) * self.matrix.trace();
        let min_ev = self
            .matrix
            .symmetric_eigenvalues()
            .into_iter()
            .fold(T::infinity(), T::min);
        if min_ev < floor {
            return Err(Error::InvalidParam(format!(
                "matrix is not positive semidefinite: min eigenvalue {min_ev} below floor {floor}"
            )));
        }
        Ok(())
    }
}

/// Raw observations, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    entries: Matrix<T>,
}

impl<T: Real> DataMatrix<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        if entries.rows() == 0 || entries.cols() == 0 {
            return Err(Error::InvalidParam("data matrix must be non-empty".into()));
        }
        if !entries.is_finite() {
            return Err(Error::NonFinite { i: 0, j: 0 });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn samples(&self) -> usize {
        self.entries.cols()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.entries
    }
}

/// Draws an r×s matrix with independent entries `B·ξ`, `B ~ Ber(θ)`,
/// `ξ ~ N(0,1)`. Gated-off entries are stored as exact zeros.
pub fn sample_bg<T, R>(r: usize, s: usize, theta: T, rng: &mut R) -> Result<MixingMatrix<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if r == 0 || s == 0 {
        return Err(Error::InvalidParam("dimensions must be positive".into()));
    }
    let p = theta.to_f64().unwrap_or(f64::NAN);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam(format!("theta must be in [0,1], got {theta}")));
    }
    let mut data = Vec::with_capacity(r * s);
    for _ in 0..r * s {
        let keep = rng.gen_bool(p);
        let gauss: T = rng.sample(StandardNormal);
        data.push(if keep { gauss } else { T::zero() });
    }
    MixingMatrix::new(Matrix::from_vec(r, s, data)?)
}

/// `A Aᵀ + diag(variances)`, exactly symmetric by construction.
pub fn population_covariance<T: Real>(
    a: &MixingMatrix<T>,
    noise: &NoiseSpec<T>,
) -> Result<CovarianceInput<T>> {
    if noise.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "population_covariance noise length",
            expected: a.rows(),
            got: noise.len(),
        });
    }
    let mut sigma = a.matrix().gram();
    for (i, v) in noise.variances().iter().enumerate() {
        sigma.set(i, i, sigma.get(i, i) + *v);
    }
    CovarianceInput::new(sigma, CovarianceKind::Population)
}

/// Draws `X = A·S + N` with `S` an s×n matrix of iid N(0,1) entries and `N`
/// r×n with independent `N(0, σ_i²)` rows.
pub fn sample_data<T, R>(
    a: &MixingMatrix<T>,
    noise: &NoiseSpec<T>,
    n: usize,
    rng: &mut R,
) -> Result<DataMatrix<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if n == 0 {
        return Err(Error::InvalidParam("sample count must be positive".into()));
    }
    if noise.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "sample_data noise length",
            expected: a.rows(),
            got: noise.len(),
        });
    }
    let s = a.cols();
    let mut sources = Vec::with_capacity(s * n);
    for _ in 0..s * n {
        sources.push(rng.sample::<T, _>(StandardNormal));
    }
    let sources = Matrix::from_vec(s, n, sources)?;
    let mut x = a.matrix().mul(&sources)?;
    if !noise.is_zero() {
        for (i, v) in noise.variances().iter().enumerate() {
            if *v == T::zero() {
                // keep the stream aligned: no draws for silent coordinates
                continue;
            }
            let sd = v.sqrt();
            for m in 0..n {
                let g: T = rng.sample(StandardNormal);
                x.set(i, m, x.get(i, m) + sd * g);
            }
        }
    }
    DataMatrix::new(x)
}

/// `(1/n)·X·Xᵀ`, exactly symmetric by symmetrized accumulation.
pub fn empirical_covariance<T: Real>(x: &DataMatrix<T>) -> Result<CovarianceInput<T>> {
    let n = x.samples();
    let r = x.dim();
    let inv_n = T::one() / real::<T>(n as f64);
    let mut sigma = Matrix::zeros(r, r);
    for i in 0..r {
        let xi = x.matrix().row(i);
        for k in i..r {
            let xk = x.matrix().row(k);
            let mut acc = T::zero();
            for m in 0..n {
                acc = acc + xi[m] * xk[m];
            }
            let v = acc * inv_n;
            sigma.set(i, k, v);
            sigma.set(k, i, v);
        }
    }
    CovarianceInput::new(sigma, CovarianceKind::Empirical { n })
}
