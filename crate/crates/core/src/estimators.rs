//! Covariance and structural-matrix estimators and the Delta scores built on them.
//!
//! Every Delta variant is a log ratio `ln(numerator) - ln(denominator)` between
//! a trace of the fitted model and the trace it would have if the structural
//! matrix were independent of the cause covariance.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{normalized_trace, normalized_trace_of_power, pseudo_inverse, symmetrize};
use crate::rng::Rng;
use crate::sampling::{haar_orthogonal_from, SampleSet};

/// Which variable is treated as the cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "x_to_y")]
    XtoY,
    #[serde(rename = "y_to_x")]
    YtoX,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
        }
    }
}

/// Second-moment matrices of a sample, oriented so that `cxx` belongs to the
/// putative cause.
#[derive(Debug, Clone)]
pub struct CovarianceEstimates {
    pub cxx: DMatrix<f64>,
    pub cyy: DMatrix<f64>,
    pub cxy: DMatrix<f64>,
    pub cyx: DMatrix<f64>,
    pub sample_count: usize,
    pub centered: bool,
    pub orientation: Direction,
}

impl CovarianceEstimates {
    pub fn n(&self) -> usize {
        self.cxx.nrows()
    }

    pub fn m(&self) -> usize {
        self.cyy.nrows()
    }

    /// Exchanges the roles of cause and effect.
    pub fn reversed(&self) -> Self {
        Self {
            cxx: self.cyy.clone(),
            cyy: self.cxx.clone(),
            cxy: self.cyx.clone(),
            cyx: self.cxy.clone(),
            sample_count: self.sample_count,
            centered: self.centered,
            orientation: self.orientation.reversed(),
        }
    }

    /// Default relative singular-value cutoff, `max(n, T) · ε_machine`.
    pub fn default_sv_threshold(&self) -> f64 {
        self.n().max(self.sample_count) as f64 * f64::EPSILON
    }
}

/// `C_XX = (1/T) Σ X_i X_iᵀ` and friends. With `centered`, the sample mean is
/// subtracted first and the normalization becomes `1/(T-1)`.
pub fn empirical_covariances(data: &SampleSet, centered: bool) -> Result<CovarianceEstimates> {
    let t = data.len();
    if t == 0 {
        return Err(Error::InvalidCount("empty dataset".into()));
    }
    if centered && t < 2 {
        return Err(Error::InvalidCount(
            "centered covariances need at least two samples".into(),
        ));
    }
    let (x, y, scale) = if centered {
        (center(&data.x), center(&data.y), 1.0 / (t - 1) as f64)
    } else {
        (data.x.clone(), data.y.clone(), 1.0 / t as f64)
    };
    let cxx = symmetrize(&(x.transpose() * &x)) * scale;
    let cyy = symmetrize(&(y.transpose() * &y)) * scale;
    let cxy = x.transpose() * &y * scale;
    let cyx = cxy.transpose();
    Ok(CovarianceEstimates {
        cxx,
        cyy,
        cxy,
        cyx,
        sample_count: t,
        centered,
        orientation: Direction::XtoY,
    })
}

fn center(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = m.row_mean();
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= &mean;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum FitMethod {
    PseudoInverse { rank: usize, sv_threshold_rel: f64 },
    Ridge { lambda: f64 },
}

/// Estimate `Â` (`m × n`) of the structural matrix.
#[derive(Debug, Clone)]
pub struct StructuralFit {
    pub a_hat: DMatrix<f64>,
    pub method: FitMethod,
}

/// `Â = C_YX C_XX^†`, with singular values below `sv_threshold_rel · σ_max`
/// dropped. `None` selects [`CovarianceEstimates::default_sv_threshold`].
pub fn fit_pseudo_inverse(
    cov: &CovarianceEstimates,
    sv_threshold_rel: Option<f64>,
) -> Result<StructuralFit> {
    let threshold = sv_threshold_rel.unwrap_or_else(|| cov.default_sv_threshold());
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "singular-value threshold must be >= 0, got {threshold}"
        )));
    }
    let (pinv, rank) = pseudo_inverse(&cov.cxx, threshold);
    if rank == 0 {
        return Err(Error::RankZero);
    }
    Ok(StructuralFit {
        a_hat: &cov.cyx * pinv,
        method: FitMethod::PseudoInverse {
            rank,
            sv_threshold_rel: threshold,
        },
    })
}

/// Ridge fit on raw samples with uncentered moments.
pub fn fit_ridge(data: &SampleSet, lambda: f64) -> Result<StructuralFit> {
    fit_ridge_from(&empirical_covariances(data, false)?, lambda)
}

/// `Âᵀ = (C_XX + λI)⁻¹ C_XY` with `1/T`-normalized moments, solved by Cholesky.
///
/// `λ` here equals `λ_gram / T` for a penalty applied to the raw Gram matrix
/// `Σ X_i X_iᵀ`.
pub fn fit_ridge_from(cov: &CovarianceEstimates, lambda: f64) -> Result<StructuralFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ridge parameter must be finite and >= 0, got {lambda}"
        )));
    }
    let n = cov.n();
    if lambda == 0.0 {
        let ev = crate::linalg::sym_eigenvalues_desc(&cov.cxx);
        let (max, min) = (ev[0], ev[n - 1]);
        if !(max > 0.0) || min <= cov.default_sv_threshold() * max {
            return Err(Error::Singular(
                "C_XX is singular; use a positive ridge parameter or the pseudo-inverse fit".into(),
            ));
        }
    }
    let system = &cov.cxx + DMatrix::identity(n, n) * lambda;
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Singular("C_XX + λI is not positive definite; increase λ".into()))?;
    let a_hat_t = chol.solve(&cov.cxy);
    Ok(StructuralFit {
        a_hat: a_hat_t.transpose(),
        method: FitMethod::Ridge { lambda },
    })
}

/// Estimator family of a score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    Population,
    Empirical { rank: usize },
    Ridge { lambda: f64 },
    PMoment { p: u32, mc_samples: usize },
}

/// One evaluated Delta estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaScore {
    #[serde(flatten)]
    pub variant: Variant,
    pub direction: Direction,
    pub numerator: f64,
    pub denominator: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_std_err: Option<f64>,
}

impl DeltaScore {
    pub fn new(
        variant: Variant,
        direction: Direction,
        numerator: f64,
        denominator: f64,
    ) -> Result<Self> {
        if !(numerator > 0.0 && numerator.is_finite()) {
            return Err(Error::UndefinedScore(format!(
                "numerator must be positive and finite, got {numerator}"
            )));
        }
        if !(denominator > 0.0 && denominator.is_finite()) {
            return Err(Error::UndefinedScore(format!(
                "denominator must be positive and finite, got {denominator}"
            )));
        }
        Ok(Self {
            variant,
            direction,
            numerator,
            denominator,
            value: numerator.ln() - denominator.ln(),
            mc_std_err: None,
        })
    }
}

fn check_pair(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<()> {
    if !c.is_square() || a.ncols() != c.nrows() {
        return Err(Error::Shape(format!(
            "need A (m x n) and square C (n x n), got A {}x{} and C {}x{}",
            a.nrows(),
            a.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidDimension("empty structural matrix".into()));
    }
    Ok(())
}

/// `(τ_m(A C Aᵀ), τ_m(A Aᵀ), τ_n(C))`.
fn trace_terms(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<(f64, f64, f64)> {
    check_pair(a, c)?;
    let num = normalized_trace(&(a * c * a.transpose()))?;
    let aat = normalized_trace(&(a * a.transpose()))?;
    let tc = normalized_trace(c)?;
    Ok((num, aat, tc))
}

/// `ln τ_m(AΣAᵀ) - ln(τ_m(AAᵀ) τ_n(Σ))`.
pub fn delta_population(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DeltaScore> {
    let (num, aat, ts) = trace_terms(a, sigma)?;
    if aat == 0.0 || ts == 0.0 {
        return Err(Error::UndefinedScore("A or Σ is zero".into()));
    }
    DeltaScore::new(Variant::Population, Direction::XtoY, num, aat * ts)
}

/// Rank-corrected plug-in score with the pseudo-inverse fit:
/// `ln τ_m(Â C Âᵀ) - ln((n/r) τ_m(ÂÂᵀ) τ_n(C))`.
pub fn delta_empirical(cov: &CovarianceEstimates, fit: &StructuralFit) -> Result<DeltaScore> {
    let FitMethod::PseudoInverse { rank, .. } = fit.method else {
        return Err(Error::InvalidParameter(
            "empirical Delta needs a pseudo-inverse fit".into(),
        ));
    };
    if rank == 0 {
        return Err(Error::UndefinedScore("C_XX has rank zero".into()));
    }
    let (num, aat, tc) = trace_terms(&fit.a_hat, &cov.cxx)?;
    let correction = cov.n() as f64 / rank as f64;
    DeltaScore::new(
        Variant::Empirical { rank },
        cov.orientation,
        num,
        correction * aat * tc,
    )
}

/// Ridge plug-in score: `ln τ_m(Â_λ C Â_λᵀ) - ln(τ_m(Â_λÂ_λᵀ) τ_n(C))`.
pub fn delta_ridge(cov: &CovarianceEstimates, fit: &StructuralFit) -> Result<DeltaScore> {
    let FitMethod::Ridge { lambda } = fit.method else {
        return Err(Error::InvalidParameter(
            "ridge Delta needs a ridge fit".into(),
        ));
    };
    let (num, aat, tc) = trace_terms(&fit.a_hat, &cov.cxx)?;
    DeltaScore::new(Variant::Ridge { lambda }, cov.orientation, num, aat * tc)
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Mean and standard error of `values`, summed in index order.
    pub fn from_values(values: &[f64]) -> Self {
        let k = values.len();
        let mean = values.iter().sum::<f64>() / k as f64;
        let var = if k > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_err: (var / k as f64).sqrt(),
            samples: k,
        }
    }
}

/// `τ_m((A U C Uᵀ Aᵀ)^p)` for one orthogonal `U`.
pub fn conjugated_p_trace(a: &DMatrix<f64>, u: &DMatrix<f64>, c: &DMatrix<f64>, p: u32) -> f64 {
    let au = a * u;
    let m = symmetrize(&(&au * c * au.transpose()));
    normalized_trace_of_power(&m, p)
}

/// Haar expectation `E_U τ_m((A U C Uᵀ Aᵀ)^p)`.
///
/// For `p = 1` the closed form `τ_m(AAᵀ) τ_n(C)` is returned with zero error.
/// Otherwise draw `i` uses stream `rng.child(i)`, so the estimate does not depend
/// on how the draws are scheduled.
pub fn mc_expected_p_trace(
    rng: &Rng,
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    p: u32,
    mc_samples: usize,
) -> Result<McEstimate> {
    check_pair(a, c)?;
    if p == 0 {
        return Err(Error::InvalidParameter(
            "moment order p must be >= 1".into(),
        ));
    }
    if mc_samples < 2 {
        return Err(Error::InvalidCount(
            "need at least two Monte-Carlo samples".into(),
        ));
    }
    if p == 1 {
        let (_, aat, tc) = trace_terms(a, c)?;
        return Ok(McEstimate {
            mean: aat * tc,
            std_err: 0.0,
            samples: mc_samples,
        });
    }
    let n = c.nrows();
    let values: Vec<f64> = (0..mc_samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_orthogonal_from(&mut rng.child(i).generator(), n)
                .expect("dimension checked above");
            conjugated_p_trace(a, &u, c, p)
        })
        .collect();
    Ok(McEstimate::from_values(&values))
}

/// Schatten-moment score `ln τ_m((ACAᵀ)^p) - ln E_U τ_m((AUCUᵀAᵀ)^p)`.
pub fn delta_p_moment(
    rng: &Rng,
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    p: u32,
    mc_samples: usize,
) -> Result<DeltaScore> {
    let expected = mc_expected_p_trace(rng, a, c, p, mc_samples)?;
    if !(expected.mean > 0.0) || expected.std_err >= expected.mean {
        return Err(Error::UnstableEstimate {
            mean: expected.mean,
            std_err: expected.std_err,
        });
    }
    let numerator = if p == 1 {
        trace_terms(a, c)?.0
    } else {
        normalized_trace_of_power(&symmetrize(&(a * c * a.transpose())), p)
    };
    let mut score = DeltaScore::new(
        Variant::PMoment { p, mc_samples },
        Direction::XtoY,
        numerator,
        expected.mean,
    )?;
    score.mc_std_err = Some(expected.std_err);
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::sampling::{generate, haar_orthogonal, CausalModelSpec, StructuralLaw};
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn noiseless(n: usize, m: usize, t: usize, seed: u64) -> (SampleSet, DMatrix<f64>) {
        let spec = CausalModelSpec::standard(n, m, t, 0.0);
        let data = generate(&Rng::new(seed), &spec).unwrap();
        let a = data.provenance.as_ref().unwrap().a.clone();
        (data, a)
    }

    #[test]
    fn single_sample_outer_product() {
        let data = SampleSet::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 1, &[2.0]),
        )
        .unwrap();
        let cov = empirical_covariances(&data, false).unwrap();
        assert_eq!(cov.cxx, diag(&[1.0, 0.0]));
        assert_eq!(cov.cxy, DMatrix::from_row_slice(2, 1, &[2.0, 0.0]));
        assert_eq!(cov.cyx, cov.cxy.transpose());
        assert!(matches!(
            empirical_covariances(&data, true),
            Err(Error::InvalidCount(_))
        ));
    }

    #[test]
    fn symmetric_pair_averages() {
        let data = SampleSet::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        let cov = empirical_covariances(&data, false).unwrap();
        assert_eq!(cov.cxx, diag(&[1.0, 0.0]));
        let centered = empirical_covariances(&data, true).unwrap();
        assert_eq!(centered.cxx, diag(&[2.0, 0.0]));
        assert_eq!(centered.cyy[(0, 0)], 0.0);
    }

    #[test]
    fn pseudo_inverse_fit_identity_covariance() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 4.0]);
        let cov = CovarianceEstimates {
            cxx: DMatrix::identity(3, 3),
            cyy: DMatrix::identity(2, 2),
            cxy: m.transpose(),
            cyx: m.clone(),
            sample_count: 10,
            centered: false,
            orientation: Direction::XtoY,
        };
        let fit = fit_pseudo_inverse(&cov, None).unwrap();
        assert!(max_abs(&(&fit.a_hat - &m)) < 1e-14);
        assert!(matches!(
            fit.method,
            FitMethod::PseudoInverse { rank: 3, .. }
        ));
        let score = delta_empirical(&cov, &fit).unwrap();
        assert!(score.value.abs() < 1e-12);
    }

    #[test]
    fn pseudo_inverse_recovers_noiseless_structure() {
        let (data, a) = noiseless(6, 4, 40, 3);
        let cov = empirical_covariances(&data, false).unwrap();
        let fit = fit_pseudo_inverse(&cov, None).unwrap();
        assert!(max_abs(&(&fit.a_hat - &a)) < 1e-8);
    }

    #[test]
    fn pseudo_inverse_rank_tracks_sample_count() {
        let (data, _) = noiseless(10, 3, 4, 8);
        let cov = empirical_covariances(&data, false).unwrap();
        let fit = fit_pseudo_inverse(&cov, None).unwrap();
        assert!(matches!(
            fit.method,
            FitMethod::PseudoInverse { rank: 4, .. }
        ));
        let r = fit.a_hat.clone().svd(false, false).rank(1e-9);
        assert!(r <= 4);
    }

    #[test]
    fn zero_covariance_is_rank_zero() {
        let data = SampleSet::new(DMatrix::zeros(5, 2), DMatrix::zeros(5, 2)).unwrap();
        let cov = empirical_covariances(&data, false).unwrap();
        assert!(matches!(
            fit_pseudo_inverse(&cov, None),
            Err(Error::RankZero)
        ));
    }

    #[test]
    fn ridge_zero_lambda_recovers_structure() {
        let (data, a) = noiseless(5, 3, 30, 5);
        let fit = fit_ridge(&data, 0.0).unwrap();
        assert!(max_abs(&(&fit.a_hat - &a)) < 1e-8);
    }

    #[test]
    fn ridge_zero_lambda_singular_rejected() {
        let (data, _) = noiseless(8, 3, 4, 5);
        assert!(matches!(fit_ridge(&data, 0.0), Err(Error::Singular(_))));
        assert!(fit_ridge(&data, 1e-3).is_ok());
        assert!(matches!(
            fit_ridge(&data, -1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ridge_shrinks_to_zero() {
        let spec = CausalModelSpec::standard(6, 4, 20, 0.1);
        let data = generate(&Rng::new(12), &spec).unwrap();
        let norms: Vec<f64> = [0.0, 1e-2, 1.0, 1e2, 1e4, 1e8]
            .iter()
            .map(|&l| fit_ridge(&data, l).unwrap().a_hat.norm())
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        assert!(norms[5] < 1e-6 * norms[0]);
    }

    #[test]
    fn population_examples() {
        let a = diag(&[1.0, 2.0]);
        let s = diag(&[3.0, 1.0]);
        let d = delta_population(&a, &s).unwrap();
        // ((3 + 4) / 2) / ((5/2) · 2) = 0.7
        assert!((d.value - 0.7f64.ln()).abs() < 1e-14);
        assert!((d.value + 0.35667).abs() < 1e-5);

        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -3.0, 1.0, 5.0]);
        let d = delta_population(&a, &(DMatrix::identity(3, 3) * 2.5)).unwrap();
        assert!(d.value.abs() < 1e-12);

        let u = haar_orthogonal(&Rng::new(4), 5).unwrap();
        let d = delta_population(&u, &diag(&[5.0, 1.0, 0.1, 2.0, 0.0])).unwrap();
        assert!(d.value.abs() < 1e-12);
    }

    #[test]
    fn population_zero_inputs_undefined() {
        assert!(matches!(
            delta_population(&DMatrix::zeros(2, 2), &DMatrix::identity(2, 2)),
            Err(Error::UndefinedScore(_))
        ));
        assert!(matches!(
            delta_population(&DMatrix::identity(2, 2), &DMatrix::zeros(2, 2)),
            Err(Error::UndefinedScore(_))
        ));
    }

    #[test]
    fn ridge_scalar_covariance_is_zero() {
        let a_hat = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, -2.0, 0.5]);
        let cov = CovarianceEstimates {
            cxx: DMatrix::identity(2, 2) * 4.0,
            cyy: DMatrix::identity(2, 2),
            cxy: DMatrix::zeros(2, 2),
            cyx: DMatrix::zeros(2, 2),
            sample_count: 3,
            centered: false,
            orientation: Direction::XtoY,
        };
        for lambda in [0.0, 0.1, 10.0] {
            let fit = StructuralFit {
                a_hat: a_hat.clone(),
                method: FitMethod::Ridge { lambda },
            };
            assert!(delta_ridge(&cov, &fit).unwrap().value.abs() < 1e-12);
        }
        let zero = StructuralFit {
            a_hat: DMatrix::zeros(2, 2),
            method: FitMethod::Ridge { lambda: 1.0 },
        };
        assert!(matches!(
            delta_ridge(&cov, &zero),
            Err(Error::UndefinedScore(_))
        ));
    }

    #[test]
    fn estimator_consistency_chain() {
        let (data, _) = noiseless(6, 5, 50, 21);
        let cov = empirical_covariances(&data, false).unwrap();
        let pinv = fit_pseudo_inverse(&cov, None).unwrap();
        let ridge = fit_ridge_from(&cov, 0.0).unwrap();
        let e = delta_empirical(&cov, &pinv).unwrap();
        let r = delta_ridge(&cov, &ridge).unwrap();
        let p = delta_population(&pinv.a_hat, &cov.cxx).unwrap();
        assert!((e.value - r.value).abs() < 1e-10);
        assert!((e.value - p.value).abs() < 1e-10);
    }

    #[test]
    fn reversed_covariances_swap_roles() {
        let (data, _) = noiseless(3, 2, 10, 2);
        let cov = empirical_covariances(&data, false).unwrap();
        let rev = cov.reversed();
        assert_eq!(rev.cxx, cov.cyy);
        assert_eq!(rev.cxy, cov.cyx);
        assert_eq!(rev.orientation, Direction::YtoX);
        let swapped = empirical_covariances(&data.swapped(), false).unwrap();
        assert_eq!(swapped.cxx, rev.cxx);
        assert_eq!(swapped.cxy, rev.cxy);
    }

    #[test]
    fn p_trace_closed_form_at_p1() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 1.0, 3.0]);
        let c = diag(&[1.0, 4.0, 2.0]);
        let est = mc_expected_p_trace(&Rng::new(0), &a, &c, 1, 10).unwrap();
        let expected =
            normalized_trace(&(&a * a.transpose())).unwrap() * normalized_trace(&c).unwrap();
        assert_eq!(est.mean, expected);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn p_trace_identity_structure_has_no_variance() {
        let c = diag(&[3.0, 1.0, 0.5, 0.25]);
        let est = mc_expected_p_trace(&Rng::new(1), &DMatrix::identity(4, 4), &c, 3, 50).unwrap();
        let exact = (27.0 + 1.0 + 0.125 + 0.015625) / 4.0;
        assert!((est.mean - exact).abs() < 1e-12);
        assert!(est.std_err < 1e-12);
        let d = delta_p_moment(&Rng::new(1), &DMatrix::identity(4, 4), &c, 3, 50).unwrap();
        assert!(d.value.abs() < 1e-12);
    }

    #[test]
    fn p_moment_at_p1_is_population() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 1.0, 3.0]);
        let c = diag(&[1.0, 4.0, 2.0]);
        let d1 = delta_p_moment(&Rng::new(0), &a, &c, 1, 100).unwrap();
        let d0 = delta_population(&a, &c).unwrap();
        assert!((d1.value - d0.value).abs() < 1e-15);
        assert_eq!(d1.mc_std_err, Some(0.0));
    }

    #[test]
    fn p_trace_invalid_inputs() {
        let a = DMatrix::identity(3, 3);
        let c = DMatrix::identity(3, 3);
        assert!(mc_expected_p_trace(&Rng::new(0), &a, &c, 0, 10).is_err());
        assert!(mc_expected_p_trace(&Rng::new(0), &a, &c, 2, 1).is_err());
        assert!(matches!(
            mc_expected_p_trace(&Rng::new(0), &a, &DMatrix::identity(2, 2), 2, 10),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn p_moment_zero_structure_is_unstable() {
        let err = delta_p_moment(
            &Rng::new(0),
            &DMatrix::zeros(2, 2),
            &DMatrix::identity(2, 2),
            2,
            10,
        );
        assert!(matches!(err, Err(Error::UnstableEstimate { .. })));
    }

    #[test]
    fn score_serializes_flat() {
        let s = DeltaScore::new(Variant::Ridge { lambda: 0.5 }, Direction::YtoX, 2.0, 1.0).unwrap();
        let json = serde_json::to_value(s).unwrap();
        assert_eq!(json["variant"], "ridge");
        assert_eq!(json["lambda"], 0.5);
        assert_eq!(json["direction"], "y_to_x");
        let back: DeltaScore = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn explicit_law_used_for_structure() {
        let a = DMatrix::from_row_slice(1, 2, &[2.0, -1.0]);
        let mut spec = CausalModelSpec::standard(2, 1, 12, 0.0);
        spec.structural_law = StructuralLaw::explicit(&a);
        let data = generate(&Rng::new(0), &spec).unwrap();
        let fit = fit_ridge(&data, 0.0).unwrap();
        assert!(max_abs(&(fit.a_hat - a)) < 1e-10);
    }
}
