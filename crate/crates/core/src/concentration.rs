//! Tail bounds and planning utilities: binomial deviation bounds, the
//! row-norm bound for Bernoulli-Gaussian matrices, entrywise Wishart
//! concentration, the structural ε choice, and the sample-size planner.
//! Values above 1 are returned as-is (valid but vacuous).

use crate::real::{real, Real};
use crate::{Error, Result};

/// Binomial tail bounds for `X ~ Bin(n, p)`:
/// `P(X/n ≤ p−ε) ≤ exp(−nε²/2p)` and `P(X/n ≥ p+ε) ≤ exp(−nε²/6p)`.
/// Requires `p ≤ 1/2` and `0 ≤ ε ≤ 2p`. Returns `(lower_tail, upper_tail)`.
pub fn okamoto_tail<T: Real>(n: u64, p: T, eps: T) -> Result<(T, T)> {
    if !(p >= T::zero() && p <= real(0.5)) {
        return Err(Error::InvalidParam(format!("okamoto_tail needs 0 <= p <= 1/2, got {p}")));
    }
    if !(eps >= T::zero() && eps <= real::<T>(2.0) * p) {
        return Err(Error::InvalidParam(format!(
            "okamoto_tail needs 0 <= eps <= 2p, got eps={eps} p={p}"
        )));
    }
    if eps == T::zero() {
        return Ok((T::one(), T::one()));
    }
    let nf = real::<T>(n as f64);
    let lower = (-(nf * eps * eps) / (real::<T>(2.0) * p)).exp();
    let upper = (-(nf * eps * eps) / (real::<T>(6.0) * p)).exp();
    Ok((lower, upper))
}

/// Two-sided binomial range: each side of
/// `(3/4·np − 2·log(1/δ), 5/4·np + 6·log(1/δ))` is violated with
/// probability at most δ.
pub fn binomial_range<T: Real>(n: u64, p: T, delta: T) -> (T, T) {
    let np = real::<T>(n as f64) * p;
    let log_term = delta.recip().ln();
    (
        real::<T>(0.75) * np - real::<T>(2.0) * log_term,
        real::<T>(1.25) * np + real::<T>(6.0) * log_term,
    )
}

/// For `A ~ BG(r, s, θ)`: `P(|A Aᵀ|_∞ > 5sθ) ≤ r·e^{−sθ/6}`.
/// Returns `(threshold, probability_bound)`.
pub fn row_norm_bound<T: Real>(r: u64, s: u64, theta: T) -> (T, T) {
    let st = real::<T>(s as f64) * theta;
    let threshold = real::<T>(5.0) * st;
    let prob = real::<T>(r as f64) * (-st / real::<T>(6.0)).exp();
    (threshold, prob)
}

/// Entrywise Wishart deviation: with probability ≥ 1−δ,
/// `|Σ̄−Σ|_∞ ≤ 6·|Σ|_∞·sqrt(log(r/δ)/n)`. Requires `n ≥ 2·log(r/δ)` and
/// `δ < 1/2`.
pub fn covariance_deviation<T: Real>(sigma_inf: T, r: u64, delta: T, n: u64) -> Result<T> {
    if !(delta > T::zero() && delta < real(0.5)) {
        return Err(Error::InvalidParam(format!("covariance_deviation needs 0 < delta < 1/2, got {delta}")));
    }
    let log_term = (real::<T>(r as f64) / delta).ln();
    let nf = real::<T>(n as f64);
    if nf < real::<T>(2.0) * log_term {
        return Err(Error::InvalidParam(format!(
            "covariance_deviation needs n >= 2 log(r/delta) = {}, got n = {n}",
            real::<T>(2.0) * log_term
        )));
    }
    Ok(real::<T>(6.0) * sigma_inf * (log_term / nf).sqrt())
}

/// The ε suggested by the structural theory: `c/(s²θ³ + log(r/δ))`.
/// The constant `c` is a free parameter (default 1 upstream).
pub fn theoretical_epsilon<T: Real>(r: u64, s: u64, theta: T, delta: T, c: T) -> T {
    let s2t3 = real::<T>((s * s) as f64) * theta.powi(3);
    let log_term = (real::<T>(r as f64) / delta).ln();
    c / (s2t3 + log_term)
}

/// The θ band in which the structural guarantees are proved:
/// `big_c·log(r/δ)/r ≤ θ ≤ small_c/(√s + log(r/δ))`. Returns `(lo, hi)`.
pub fn theta_band<T: Real>(r: u64, s: u64, delta: T, big_c: T, small_c: T) -> (T, T) {
    let log_term = (real::<T>(r as f64) / delta).ln();
    (
        big_c * log_term / real::<T>(r as f64),
        small_c / (real::<T>(s as f64).sqrt() + log_term),
    )
}

pub fn theta_in_band<T: Real>(r: u64, s: u64, theta: T, delta: T, big_c: T, small_c: T) -> bool {
    let (lo, hi) = theta_band(r, s, delta, big_c, small_c);
    theta >= lo && theta <= hi
}

/// Sample size for a target entrywise accuracy:
/// `n = ⌈C·|Σ|_∞²·log(r/δ)/ε²⌉`.
pub fn plan_sample_size<T: Real>(
    sigma_inf: T,
    eps_target: T,
    r: u64,
    delta: T,
    big_c: T,
) -> Result<u64> {
    if !(eps_target > T::zero()) {
        return Err(Error::InvalidParam("plan_sample_size needs eps_target > 0".into()));
    }
    let log_term = (real::<T>(r as f64) / delta).ln();
    let n = (big_c * sigma_inf * sigma_inf * log_term / (eps_target * eps_target)).ceil();
    n.to_u64()
        .ok_or_else(|| Error::InvalidParam("planned sample size out of range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn okamoto_zero_eps_is_vacuous() {
        assert_eq!(okamoto_tail(600, 0.5, 0.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn okamoto_formula_arithmetic() {
        // n=600, p=0.5, eps=0.1: upper = exp(-600*0.01/3) = exp(-2)
        let (lo, hi) = okamoto_tail(600, 0.5, 0.1).unwrap();
        assert!((hi - (-2.0f64).exp()).abs() < 1e-15);
        assert!((lo - (-6.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn okamoto_rejects_out_of_range() {
        assert!(okamoto_tail(10, 0.6, 0.1).is_err());
        assert!(okamoto_tail(10, 0.1, 0.3).is_err());
    }

    #[test]
    fn binomial_range_arithmetic() {
        // np = 40, delta = e^{-1} -> (30-2, 50+6)
        let (lo, hi) = binomial_range(80, 0.5, (-1.0f64).exp());
        assert!((lo - 28.0).abs() < 1e-12);
        assert!((hi - 56.0).abs() < 1e-12);
        // delta -> 1: log term vanishes
        let (lo, hi) = binomial_range(80, 0.5, 1.0);
        assert!((lo - 30.0).abs() < 1e-12);
        assert!((hi - 50.0).abs() < 1e-12);
    }

    #[test]
    fn row_norm_bound_arithmetic() {
        // s*theta = 60, r = 100: prob = 100 e^{-10}
        let (thr, prob) = row_norm_bound(100, 600, 0.1);
        assert!((thr - 300.0).abs() < 1e-12);
        assert!((prob - 100.0 * (-10.0f64).exp()).abs() < 1e-12);
        // theta = 0: vacuous
        let (thr, prob) = row_norm_bound(7, 600, 0.0);
        assert_eq!(thr, 0.0);
        assert_eq!(prob, 7.0);
    }

    #[test]
    fn covariance_deviation_arithmetic_and_scaling() {
        // log(r/delta) = 4 via r/delta = e^4, n = 144 -> 6*sqrt(4/144) = 1
        let delta = 3.0 / (4.0f64).exp();
        let b = covariance_deviation(1.0, 3, delta, 144).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        let b4 = covariance_deviation(1.0, 3, delta, 576).unwrap();
        assert!((b4 - 0.5).abs() < 1e-12);
        assert!(covariance_deviation(1.0, 3, delta, 4).is_err());
        assert!(covariance_deviation(1.0, 3, 0.7, 144).is_err());
    }

    #[test]
    fn theoretical_epsilon_arithmetic() {
        // s=100, theta=0.05, log(r/delta)=5, c=1 -> 1/(1.25+5)
        let delta = 50.0 / (5.0f64).exp();
        let eps = theoretical_epsilon(50, 100, 0.05, delta, 1.0);
        assert!((eps - 1.0 / 6.25).abs() < 1e-12);
        // theta -> 0 limit: c / log(r/delta)
        let eps0 = theoretical_epsilon(50, 100, 0.0, delta, 1.0);
        assert!((eps0 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn plan_sample_size_arithmetic() {
        // sigma=1, eps=0.1, log(r/delta)=1, C=36 -> 3600
        let delta = 20.0 / 1.0f64.exp();
        assert_eq!(plan_sample_size(1.0, 0.1, 20, delta, 36.0).unwrap(), 3600);
        // eps halved -> n quadrupled
        assert_eq!(plan_sample_size(1.0, 0.05, 20, delta, 36.0).unwrap(), 14400);
        assert!(plan_sample_size(1.0, 0.0, 20, delta, 36.0).is_err());
    }

    #[test]
    fn monotonicity_grids() {
        // okamoto bounds decrease in n and eps
        let mut prev = (2.0, 2.0);
        for n in [100u64, 200, 400, 800] {
            let b = okamoto_tail(n, 0.3, 0.1).unwrap();
            assert!(b.0 < prev.0 && b.1 < prev.1);
            prev = b;
        }
        let mut prev = (2.0, 2.0);
        for eps in [0.05, 0.1, 0.2, 0.3] {
            let b = okamoto_tail(500, 0.3, eps).unwrap();
            assert!(b.0 < prev.0 && b.1 < prev.1);
            prev = b;
        }
        // covariance_deviation decreases in n, increases as delta shrinks
        let mut prev = f64::MAX;
        for n in [50u64, 100, 200, 400] {
            let b = covariance_deviation(2.0, 10, 0.05, n).unwrap();
            assert!(b < prev);
            prev = b;
        }
        let mut prev = 0.0;
        for delta in [0.4, 0.2, 0.1, 0.05, 0.01] {
            let b = covariance_deviation(2.0, 10, delta, 400).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }
}
