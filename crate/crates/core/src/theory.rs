//! Closed-form evaluators: Haar concentration bounds, the Marchenko–Pastur
//! fixed point `p_n`, asymptotic ridge bias intervals and the `λ′` rule.
//!
//! The universal constants κ₁, κ₂ of the tail bounds are never given numeric
//! values; failure probabilities are carried as symbolic strings.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, sym_eigenvalues_desc};

const MAX_BISECTION_STEPS: usize = 200;

/// Solves `1 - p = (p / (c n)) Σ_i λ_i / (p λ_i + λ′)` for `p ∈ (0, 1]`.
///
/// `g(p) = p + (p / (c n)) Σ_i λ_i / (p λ_i + λ′)` is strictly increasing with
/// `g(0) = 0` and `g(1) ≥ 1`, so bisection on `[0, 1]` always converges.
/// Stops once `|1 - g(p)| ≤ tol` or after 200 halvings.
pub fn pn_fixed_point(spectrum: &[f64], c: f64, lambda_prime: f64, tol: f64) -> Result<f64> {
    if !(lambda_prime > 0.0) || !lambda_prime.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "λ′ must be positive, got {lambda_prime}"
        )));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "c must be positive, got {c}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if spectrum.is_empty() {
        return Err(Error::InvalidDimension("empty spectrum".into()));
    }
    if spectrum.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParameter(
            "spectrum must be finite and nonnegative".into(),
        ));
    }
    let scale = 1.0 / (c * spectrum.len() as f64);
    let residual = |p: f64| {
        let s: f64 = spectrum.iter().map(|l| l / (p * l + lambda_prime)).sum();
        1.0 - p - p * scale * s
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if residual(hi).abs() <= tol {
        return Ok(hi);
    }
    let mut mid = 0.5;
    for _ in 0..MAX_BISECTION_STEPS {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// `1 - p - (p / (c n)) Σ λ_i / (p λ_i + λ′)`.
pub fn pn_residual(spectrum: &[f64], c: f64, lambda_prime: f64, p: f64) -> f64 {
    let s: f64 = spectrum.iter().map(|l| l / (p * l + lambda_prime)).sum();
    1.0 - p - p * s / (c * spectrum.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum Theorem {
    /// Operator-norm bound `2ε‖C‖‖AAᵀ‖`.
    Thm1,
    /// Spectral bound `(ε/m) √(Σ β_i² γ_i²)`.
    Thm2,
    /// Moment-`p` bound `(pε/m) √(Σ β_i^{2p} γ_i^{2p})`.
    Thm3 { p: u32 },
}

/// A deviation bound for `τ_m((AUCUᵀAᵀ)^p)` around its Haar mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationBound {
    #[serde(flatten)]
    pub theorem: Theorem,
    pub epsilon: f64,
    pub bound_value: f64,
    /// Operator-norm version of the same bound, for comparison.
    pub comparator: f64,
    pub failure_prob_expr: String,
    /// Eigenvalues of `AᵀA`, descending.
    pub beta: Vec<f64>,
    /// Eigenvalues of `C`, descending.
    pub gamma: Vec<f64>,
}

fn spectra(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    if !c.is_square() || a.ncols() != c.nrows() || a.nrows() == 0 {
        return Err(Error::Shape(format!(
            "need A (m x n) and C (n x n), got A {}x{} and C {}x{}",
            a.nrows(),
            a.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
    Ok((
        clamp(sym_eigenvalues_desc(&(a.transpose() * a))),
        clamp(sym_eigenvalues_desc(c)),
    ))
}

fn moment_bound(beta: &[f64], gamma: &[f64], m: usize, p: u32, epsilon: f64) -> f64 {
    let s: f64 = beta
        .iter()
        .zip(gamma)
        .map(|(b, g)| (b * g).powi(2 * p as i32))
        .sum();
    p as f64 * epsilon / m as f64 * s.sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ε must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Spectral concentration bound with the `2ε‖C‖‖AAᵀ‖` comparator.
pub fn thm2_bound(a: &DMatrix<f64>, c: &DMatrix<f64>, epsilon: f64) -> Result<ConcentrationBound> {
    check_epsilon(epsilon)?;
    let (beta, gamma) = spectra(a, c)?;
    let bound_value = moment_bound(&beta, &gamma, a.nrows(), 1, epsilon);
    let comparator = thm1_bound(a, c, epsilon)?;
    Ok(ConcentrationBound {
        theorem: Theorem::Thm2,
        epsilon,
        bound_value,
        comparator,
        failure_prob_expr: "2·exp(-κ₂·n·ε²)".into(),
        beta,
        gamma,
    })
}

/// `2ε‖C‖‖AAᵀ‖`.
pub fn thm1_bound(a: &DMatrix<f64>, c: &DMatrix<f64>, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    spectra(a, c)?;
    Ok(2.0 * epsilon * operator_norm(c) * operator_norm(&(a * a.transpose())))
}

/// Moment-`p` bound; the comparator is `(pε/√m)‖AAᵀ‖^p‖C‖^p`.
pub fn thm3_bound(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    p: u32,
    epsilon: f64,
) -> Result<ConcentrationBound> {
    check_epsilon(epsilon)?;
    if p == 0 {
        return Err(Error::InvalidParameter(
            "moment order p must be >= 1".into(),
        ));
    }
    if p == 1 {
        let mut b = thm2_bound(a, c, epsilon)?;
        b.theorem = Theorem::Thm3 { p: 1 };
        return Ok(b);
    }
    let (beta, gamma) = spectra(a, c)?;
    let m = a.nrows();
    let bound_value = moment_bound(&beta, &gamma, m, p, epsilon);
    let comparator = p as f64 * epsilon / (m as f64).sqrt()
        * (operator_norm(&(a * a.transpose())) * operator_norm(c)).powi(p as i32);
    Ok(ConcentrationBound {
        theorem: Theorem::Thm3 { p },
        epsilon,
        bound_value,
        comparator,
        failure_prob_expr: "2·exp(-κ₂·n·ε²)".into(),
        beta,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasTarget {
    /// `E[‖Â_λ‖_F² - ‖A‖_F²]`.
    FrobeniusNormSq,
    /// `E[tr(Â_λ C_XX Â_λᵀ) - tr(A Σ_XX Aᵀ)]`.
    NumeratorTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasInputs {
    pub lambda_prime: f64,
    pub c: f64,
    /// Noise power `E‖E‖²`.
    pub noise_power: f64,
    pub a_frob_sq: f64,
    pub p_n: f64,
    pub n: usize,
    pub spectrum: Vec<f64>,
}

/// Asymptotic interval for a ridge bias, with the vanishing correction term set to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasInterval {
    pub lower: f64,
    pub upper: f64,
    pub target: BiasTarget,
    pub inputs: BiasInputs,
    /// Always true: the `o(1)` correction is omitted.
    pub residual_term_omitted: bool,
}

impl BiasInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }
}

/// Tolerance used when solving for `p_n` inside the interval evaluators.
pub const PN_TOL: f64 = 1e-14;

fn check_bias_inputs(
    lambda_prime: f64,
    c: f64,
    noise_power: f64,
    spectrum: &[f64],
    n: usize,
) -> Result<()> {
    if spectrum.len() != n {
        return Err(Error::Shape(format!(
            "spectrum has {} values, n = {n}",
            spectrum.len()
        )));
    }
    if !(noise_power >= 0.0) || !noise_power.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise power must be >= 0, got {noise_power}"
        )));
    }
    if !(lambda_prime > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "λ′ and c must be positive, got λ′ = {lambda_prime}, c = {c}"
        )));
    }
    Ok(())
}

/// Resolvent trace `S = Σ_i 1 / (p λ_i + λ′)`.
fn resolvent_trace(spectrum: &[f64], p: f64, lambda_prime: f64) -> f64 {
    spectrum.iter().map(|l| 1.0 / (p * l + lambda_prime)).sum()
}

/// Interval for `E[‖Â_λ‖_F² - ‖A‖_F²]` with `λ ~ Uniform[0, λ′]`:
/// `[-(λ′‖A‖²/n) S, (σ²/(cn) - λ′‖A‖²/n) S]`.
///
/// `noise_power` is `E‖E‖²`, i.e. `m δ²` for isotropic noise of scale `δ`.
pub fn lemma31_interval(
    lambda_prime: f64,
    c: f64,
    noise_power: f64,
    a_frob_sq: f64,
    spectrum: &[f64],
    n: usize,
) -> Result<BiasInterval> {
    check_bias_inputs(lambda_prime, c, noise_power, spectrum, n)?;
    if !(a_frob_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "‖A‖_F² must be >= 0, got {a_frob_sq}"
        )));
    }
    let p_n = pn_fixed_point(spectrum, c, lambda_prime, PN_TOL)?;
    let s = resolvent_trace(spectrum, p_n, lambda_prime);
    let nf = n as f64;
    let shrink = lambda_prime * a_frob_sq / nf * s;
    Ok(BiasInterval {
        lower: -shrink,
        upper: noise_power / (c * nf) * s - shrink,
        target: BiasTarget::FrobeniusNormSq,
        inputs: BiasInputs {
            lambda_prime,
            c,
            noise_power,
            a_frob_sq,
            p_n,
            n,
            spectrum: spectrum.to_vec(),
        },
        residual_term_omitted: true,
    })
}

/// Interval for `E[tr(Â_λ C_XX Â_λᵀ) - tr(A Σ Aᵀ)]`. `a` must be written in the
/// eigenbasis of Σ (i.e. `A U` when `Σ = U Λ Uᵀ`).
///
/// Lower end `-λ′‖A‖² + λ′² tr(A (p_nΛ + λ′I)⁻¹ Aᵀ)`; the upper end adds
/// `(σ²/(cn)) (n - λ′ S)`.
pub fn lemma32_interval(
    lambda_prime: f64,
    c: f64,
    noise_power: f64,
    a: &DMatrix<f64>,
    spectrum: &[f64],
    n: usize,
) -> Result<BiasInterval> {
    check_bias_inputs(lambda_prime, c, noise_power, spectrum, n)?;
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "A has {} columns, spectrum has {n} values",
            a.ncols()
        )));
    }
    let p_n = pn_fixed_point(spectrum, c, lambda_prime, PN_TOL)?;
    let weights: Vec<f64> = spectrum
        .iter()
        .map(|l| 1.0 / (p_n * l + lambda_prime))
        .collect();
    let s: f64 = weights.iter().sum();
    let weighted: f64 = a
        .column_iter()
        .zip(&weights)
        .map(|(col, w)| col.norm_squared() * w)
        .sum();
    let a_frob_sq = a.norm_squared();
    let lower = -lambda_prime * a_frob_sq + lambda_prime * lambda_prime * weighted;
    let noise = noise_power / (c * n as f64) * (n as f64 - lambda_prime * s);
    Ok(BiasInterval {
        lower,
        upper: lower + noise,
        target: BiasTarget::NumeratorTrace,
        inputs: BiasInputs {
            lambda_prime,
            c,
            noise_power,
            a_frob_sq,
            p_n,
            n,
            spectrum: spectrum.to_vec(),
        },
        residual_term_omitted: true,
    })
}

/// `λ′ = σ̂² / (2 c ‖A‖_F²)`.
pub fn select_lambda_prime(noise_power_bound: f64, c: f64, a_frob_sq: f64) -> Result<f64> {
    for (name, v) in [("σ̂²", noise_power_bound), ("c", c), ("‖A‖_F²", a_frob_sq)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(noise_power_bound / (2.0 * c * a_frob_sq))
}

/// `‖A‖_F² (c p_n - c + 1)`, the bias magnitude bound under the `λ′` rule.
pub fn plug_in_bias_bound(a_frob_sq: f64, c: f64, p_n: f64) -> f64 {
    a_frob_sq * (c * p_n - c + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn pn_identity_golden_ratio() {
        for n in [1, 5, 50] {
            let p = pn_fixed_point(&vec![1.0; n], 1.0, 1.0, 1e-14).unwrap();
            assert!((p - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn pn_limits() {
        let spec = [3.0, 1.0, 0.5];
        let p = pn_fixed_point(&spec, 1.0, 1e6 * 3.0, 1e-14).unwrap();
        assert!(p > 0.999);
        let p = pn_fixed_point(&[1.0; 10], 2.0, 1e-10, 1e-14).unwrap();
        assert!((p - 0.5).abs() < 1e-6, "{p}");
    }

    #[test]
    fn pn_rejects_nonpositive_lambda() {
        assert!(matches!(
            pn_fixed_point(&[1.0], 1.0, 0.0, 1e-12),
            Err(Error::InvalidParameter(_))
        ));
        assert!(pn_fixed_point(&[1.0], 1.0, -1.0, 1e-12).is_err());
    }

    #[test]
    fn pn_zero_spectrum_is_one() {
        assert_eq!(pn_fixed_point(&[0.0, 0.0], 1.0, 1.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn spectral_bound_identity_case() {
        let n = 9;
        let i = DMatrix::identity(n, n);
        let b = thm2_bound(&i, &i, 1.0).unwrap();
        assert!((b.bound_value - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
        assert!((b.comparator - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_bound_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[0.0, 2.0, 0.0]);
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 5.0, 2.0]));
        let b = thm2_bound(&a, &c, 0.3).unwrap();
        // β₁ = 4, γ₁ = 5, m = 1
        assert!((b.bound_value - 0.3 * 4.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn moment_bound_reduces_and_scales() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 1.0, 3.0]);
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 2.0]));
        let b2 = thm2_bound(&a, &c, 0.5).unwrap();
        let b3 = thm3_bound(&a, &c, 1, 0.5).unwrap();
        assert_eq!(b2.bound_value, b3.bound_value);
        let n = 16;
        let i = DMatrix::identity(n, n);
        for p in 1..5 {
            let b = thm3_bound(&i, &i, p, 0.7).unwrap();
            assert!((b.bound_value - p as f64 * 0.7 / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn moment_bound_dominant_eigenvalue_gains_sqrt_m() {
        let n = 64;
        let mut gamma = vec![1e-3; n];
        gamma[0] = 1.0;
        let c = DMatrix::from_diagonal(&DVector::from_vec(gamma));
        let a = DMatrix::identity(n, n);
        let b = thm3_bound(&a, &c, 3, 1.0).unwrap();
        let single = 3.0 / n as f64;
        assert!((b.bound_value - single).abs() / single < 1e-6);
        assert!((b.comparator / b.bound_value - (n as f64).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn frobenius_interval_examples() {
        let spectrum = vec![1.0, 0.5, 0.25, 0.125];
        let (lp, c, a2) = (0.3, 2.0, 5.0);
        let iv = lemma31_interval(lp, c, 0.0, a2, &spectrum, 4).unwrap();
        assert_eq!(iv.width(), 0.0);
        let s: f64 = spectrum
            .iter()
            .map(|l| 1.0 / (iv.inputs.p_n * l + lp))
            .sum();
        assert!((iv.lower + lp * a2 / 4.0 * s).abs() < 1e-12);

        let iv = lemma31_interval(lp, c, lp * c * a2, a2, &spectrum, 4).unwrap();
        assert!(iv.upper.abs() < 1e-12);
        assert!(iv.lower <= iv.upper);
    }

    #[test]
    fn numerator_interval_examples() {
        let n = 5;
        let lp = 0.4;
        let a = DMatrix::identity(n, n);
        let iv = lemma32_interval(lp, 1.5, 0.0, &a, &vec![1.0; n], n).unwrap();
        let p = iv.inputs.p_n;
        let expected = -lp * n as f64 + lp * lp * n as f64 / (p + lp);
        assert!((iv.lower - expected).abs() < 1e-12);
        assert_eq!(iv.lower, iv.upper);

        let tiny = lemma32_interval(1e-12, 1.5, 0.0, &a, &vec![1.0; n], n).unwrap();
        assert!(tiny.lower.abs() < 1e-10 && tiny.upper.abs() < 1e-10);
        assert!(matches!(
            lemma32_interval(lp, 1.5, 0.0, &DMatrix::identity(3, 3), &vec![1.0; n], n),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn lambda_rule() {
        assert_eq!(select_lambda_prime(2.0, 1.0, 1.0).unwrap(), 1.0);
        let a = select_lambda_prime(0.3, 1.0, 2.0).unwrap();
        let b = select_lambda_prime(0.3, 2.0, 2.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert!(select_lambda_prime(1e-12, 1.0, 1.0).unwrap() < 1e-11);
        assert!(select_lambda_prime(0.0, 1.0, 1.0).is_err());
        assert!(select_lambda_prime(1.0, -1.0, 1.0).is_err());
    }
}
