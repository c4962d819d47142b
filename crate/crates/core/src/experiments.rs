//! The threshold decision rule, the end-to-end pipeline and the Monte-Carlo
//! harnesses for concentration, ridge bias and accuracy sweeps.
//!
//! Every harness keys trial `t` of grid point `i` to the stream
//! `rng.grandchild(i, t)` (or `rng.child(t)`), collects per-trial results in
//! index order and reduces sequentially, so outputs do not depend on the
//! number of worker threads.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    conjugated_p_trace, delta_empirical, delta_p_moment, delta_ridge, empirical_covariances,
    fit_pseudo_inverse, fit_ridge_from, mc_expected_p_trace, CovarianceEstimates, DeltaScore,
    Direction, McEstimate,
};
use crate::rng::Rng;
use crate::sampling::{
    generate, haar_orthogonal_from, realize_model, sample_dataset, CausalModelSpec, SampleSet,
};
use crate::theory::{
    lemma31_interval, lemma32_interval, plug_in_bias_bound, select_lambda_prime, thm3_bound,
    BiasInterval,
};

/// Default decision margin ξ.
pub const DEFAULT_XI: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    XCausesY,
    YCausesX,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub verdict: Verdict,
    pub score_xy: Option<DeltaScore>,
    pub score_yx: Option<DeltaScore>,
    pub xi: f64,
    /// Set when a direction could not be scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Threshold rule: X→Y if `Δ_xy ≥ Δ_yx + ξ`, else Y→X if `Δ_yx ≥ Δ_xy + ξ`,
/// else inconclusive. The X→Y branch is tested first.
pub fn decide(score_xy: &DeltaScore, score_yx: &DeltaScore, xi: f64) -> Result<CausalVerdict> {
    if !(xi >= 0.0) {
        return Err(Error::InvalidParameter(format!("ξ must be >= 0, got {xi}")));
    }
    if !score_xy.value.is_finite() || !score_yx.value.is_finite() {
        return Err(Error::UndefinedScore("non-finite Delta score".into()));
    }
    let verdict = if score_xy.value >= score_yx.value + xi {
        Verdict::XCausesY
    } else if score_yx.value >= score_xy.value + xi {
        Verdict::YCausesX
    } else {
        Verdict::Inconclusive
    };
    Ok(CausalVerdict {
        verdict,
        score_xy: Some(*score_xy),
        score_yx: Some(*score_yx),
        xi,
        reason: None,
    })
}

/// Estimator used by the pipeline in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorConfig {
    /// Pseudo-inverse fit with the `n/r` rank correction.
    Empirical {
        #[serde(default)]
        sv_threshold_rel: Option<f64>,
    },
    /// Ridge fit with the same normalized λ in both directions.
    Ridge { lambda: f64 },
    /// Schatten-moment score on the ridge plug-in `(Â_λ, C_XX)`.
    PMoment {
        lambda: f64,
        p: u32,
        mc_samples: usize,
        seed: u64,
    },
}

impl EstimatorConfig {
    pub fn label(&self) -> String {
        match self {
            EstimatorConfig::Empirical { .. } => "empirical".into(),
            EstimatorConfig::Ridge { lambda } => format!("ridge(lambda={lambda})"),
            EstimatorConfig::PMoment { lambda, p, .. } => {
                format!("p_moment(p={p},lambda={lambda})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub estimator: EstimatorConfig,
    pub xi: f64,
    /// Subtract the sample mean before forming covariances.
    #[serde(default)]
    pub centered: bool,
}

impl PipelineConfig {
    pub fn ridge(lambda: f64) -> Self {
        Self {
            estimator: EstimatorConfig::Ridge { lambda },
            xi: DEFAULT_XI,
            centered: false,
        }
    }

    pub fn empirical() -> Self {
        Self {
            estimator: EstimatorConfig::Empirical {
                sv_threshold_rel: None,
            },
            xi: DEFAULT_XI,
            centered: false,
        }
    }
}

/// Scores one orientation of `cov` with `estimator`.
pub fn score_direction(
    cov: &CovarianceEstimates,
    estimator: &EstimatorConfig,
) -> Result<DeltaScore> {
    match *estimator {
        EstimatorConfig::Empirical { sv_threshold_rel } => {
            let fit = fit_pseudo_inverse(cov, sv_threshold_rel)?;
            delta_empirical(cov, &fit)
        }
        EstimatorConfig::Ridge { lambda } => {
            let fit = fit_ridge_from(cov, lambda)?;
            delta_ridge(cov, &fit)
        }
        EstimatorConfig::PMoment {
            lambda,
            p,
            mc_samples,
            seed,
        } => {
            let fit = fit_ridge_from(cov, lambda)?;
            let stream = match cov.orientation {
                Direction::XtoY => 0,
                Direction::YtoX => 1,
            };
            let mut score = delta_p_moment(
                &Rng::with_stream(seed, stream),
                &fit.a_hat,
                &cov.cxx,
                p,
                mc_samples,
            )?;
            score.direction = cov.orientation;
            Ok(score)
        }
    }
}

/// Scores both directions and applies [`decide`]. A direction that cannot be
/// scored because the data are degenerate yields an inconclusive verdict with a
/// reason; configuration errors are returned.
pub fn run_pipeline(data: &SampleSet, config: &PipelineConfig) -> Result<CausalVerdict> {
    if data.is_empty() {
        return Err(Error::InvalidCount("empty dataset".into()));
    }
    if !(config.xi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ξ must be >= 0, got {}",
            config.xi
        )));
    }
    let cov = empirical_covariances(data, config.centered)?;
    verdict_from_cov(&cov, &config.estimator, config.xi)
}

/// Plug-in `λ′` for one orientation: a pilot ridge fit at `pilot_lambda`
/// supplies `‖Â‖_F²` and the residual noise power `σ̂² = ‖Y - XÂᵀ‖_F² / T`,
/// which feed [`select_lambda_prime`] with `c = T/n`. Heuristic only.
pub fn pilot_lambda_prime(cov: &CovarianceEstimates, pilot_lambda: f64) -> Result<f64> {
    let fit = fit_ridge_from(cov, pilot_lambda)?;
    let a = &fit.a_hat;
    // E‖Y - XÂᵀ‖²/T = tr(C_YY) - 2 tr(Â C_XY) + tr(Â C_XX Âᵀ)
    let noise_power =
        cov.cyy.trace() - 2.0 * (a * &cov.cxy).trace() + (a * &cov.cxx * a.transpose()).trace();
    let c = cov.sample_count as f64 / cov.n() as f64;
    select_lambda_prime(noise_power.max(f64::MIN_POSITIVE), c, a.norm_squared())
}

/// Geometric mean of [`pilot_lambda_prime`] over both orientations, so the
/// choice does not favor either direction.
pub fn pilot_lambda_symmetric(data: &SampleSet, pilot_lambda: f64, centered: bool) -> Result<f64> {
    let cov = empirical_covariances(data, centered)?;
    let xy = pilot_lambda_prime(&cov, pilot_lambda)?;
    let yx = pilot_lambda_prime(&cov.reversed(), pilot_lambda)?;
    Ok((xy * yx).sqrt())
}

/// Order statistics of a nonnegative sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub mean: f64,
    pub std: f64,
    /// `(level, value)` pairs, nearest-rank, nondecreasing in level.
    pub quantiles: Vec<(f64, f64)>,
}

impl DeviationSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let est = McEstimate::from_values(values);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len();
        let quantiles = [0.5, 0.9, 0.95, 0.99, 1.0]
            .iter()
            .map(|&q| {
                let rank = ((q * k as f64).ceil() as usize).clamp(1, k);
                (q, sorted[rank - 1])
            })
            .collect();
        Self {
            mean: est.mean,
            std: (est.std_err * est.std_err * k as f64).sqrt(),
            quantiles,
        }
    }

    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles
            .iter()
            .find(|(q, _)| *q == level)
            .map(|(_, v)| *v)
    }
}

/// Monte-Carlo view of `τ_m((AUCUᵀAᵀ)^p)` under Haar `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub m: usize,
    pub p: u32,
    pub trials: usize,
    /// Closed form for `p = 1`, an independent high-sample estimate otherwise.
    pub reference: f64,
    pub reference_std_err: f64,
    pub sample_mean: f64,
    pub sample_std_err: f64,
    /// Standard deviation of the traced quantity across draws.
    pub sample_std: f64,
    /// `|sample_mean - reference| / combined standard error`; zero when both errors vanish.
    pub mean_z_score: f64,
    /// Summary of `|value - reference|`.
    pub deviations: DeviationSummary,
    /// `(ε, bound)` from the spectral bound at order `p`.
    pub bound_curve: Vec<(f64, f64)>,
}

impl ConcentrationReport {
    /// Mean identity holds within `k` standard errors.
    pub fn mean_within(&self, k: f64) -> bool {
        self.mean_z_score <= k
    }
}

/// ε grid used for the attached bound curve.
pub const EPSILON_GRID: [f64; 6] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Draws `trials` Haar matrices (stream `rng.child(0).child(i)`) and compares
/// `τ_m((AUCUᵀAᵀ)^p)` with its mean. For `p > 1` the reference mean uses
/// `reference_samples` independent draws from `rng.child(1)`.
pub fn verify_concentration(
    rng: &Rng,
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    p: u32,
    trials: usize,
    reference_samples: usize,
) -> Result<ConcentrationReport> {
    if trials < 2 {
        return Err(Error::InvalidCount("need at least two trials".into()));
    }
    let reference = mc_expected_p_trace(&rng.child(1), a, c, p, reference_samples.max(2))?;
    let n = c.nrows();
    let draws = rng.child(0);
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_orthogonal_from(&mut draws.child(i).generator(), n).expect("n >= 1");
            conjugated_p_trace(a, &u, c, p)
        })
        .collect();
    let est = McEstimate::from_values(&values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - reference.mean).abs()).collect();
    let combined = (est.std_err.powi(2) + reference.std_err.powi(2)).sqrt();
    let gap = (est.mean - reference.mean).abs();
    let mean_z_score = if combined > 0.0 {
        gap / combined
    } else if gap <= 1e-12 * reference.mean.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    let bound_curve = EPSILON_GRID
        .iter()
        .map(|&eps| thm3_bound(a, c, p, eps).map(|b| (eps, b.bound_value)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport {
        n,
        m: a.nrows(),
        p,
        trials,
        reference: reference.mean,
        reference_std_err: reference.std_err,
        sample_mean: est.mean,
        sample_std_err: est.std_err,
        sample_std: est.std_err * (trials as f64).sqrt(),
        mean_z_score,
        deviations: DeviationSummary::from_values(&deviations),
        bound_curve,
    })
}

/// Empirical mean bias with its standard error against an averaged interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCheck {
    pub mean: f64,
    pub std_err: f64,
    /// Per-trial interval endpoints averaged over trials.
    pub lower: f64,
    pub upper: f64,
    /// Mean lies in `[lower - 3se, upper + 3se]`.
    pub contained: bool,
}

impl BiasCheck {
    fn new(values: &[f64], lowers: &[f64], uppers: &[f64]) -> Self {
        let est = McEstimate::from_values(values);
        let lower = McEstimate::from_values(lowers).mean;
        let upper = McEstimate::from_values(uppers).mean;
        let slack = 3.0 * est.std_err;
        Self {
            mean: est.mean,
            std_err: est.std_err,
            lower,
            upper,
            contained: est.mean >= lower - slack && est.mean <= upper + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub n: usize,
    pub m: usize,
    pub sample_count: usize,
    pub c: f64,
    pub lambda_prime: f64,
    pub noise_scale: f64,
    /// `E‖E‖² = m δ²`, the noise power entering the intervals.
    pub noise_power: f64,
    pub trials: usize,
    pub p_n: f64,
    pub frobenius: BiasCheck,
    pub numerator: BiasCheck,
    /// Mean of `‖A‖_F² (c p_n - c + 1)` over trials.
    pub plug_in_bound: f64,
    /// `|frobenius.mean| ≤ plug_in_bound + 3se`.
    pub within_plug_in_bound: bool,
}

/// Simulates ridge fits with `λ ~ Uniform(0, λ′]` on fresh model draws and
/// compares the mean biases of `‖Â_λ‖_F²` and `tr(Â_λ C_XX Â_λᵀ)` with their
/// asymptotic intervals. The sample count is `round(c · n)`; the rest of the
/// model comes from `spec`.
pub fn verify_bias_bounds(
    rng: &Rng,
    spec: &CausalModelSpec,
    lambda_prime: f64,
    c: f64,
    trials: usize,
) -> Result<BiasReport> {
    if trials < 2 {
        return Err(Error::InvalidCount("need at least two trials".into()));
    }
    if !(lambda_prime > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "λ′ and c must be positive, got λ′ = {lambda_prime}, c = {c}"
        )));
    }
    let sample_count = (c * spec.n as f64).round().max(1.0) as usize;
    let mut spec = spec.clone();
    spec.sample_count = sample_count;
    spec.validate()?;
    let delta = spec.noise_scale;
    let noise_power = spec.m as f64 * delta * delta;
    let spectrum = spec.spectrum.eigenvalues()?;
    let n = spec.n;

    struct Trial {
        frob: f64,
        num: f64,
        i31: BiasInterval,
        i32: BiasInterval,
        plug: f64,
    }

    let results: Vec<Result<Trial>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = rng.child(t);
            let real = realize_model(&trial.child(0), &spec)?;
            let data = sample_dataset(
                &trial.child(1),
                &real,
                sample_count,
                delta,
                &spec.mean_vector(),
            )?;
            let lambda = lambda_prime * (1.0 - trial.child(2).generator().uniform());
            let cov = empirical_covariances(&data, false)?;
            let fit = fit_ridge_from(&cov, lambda)?;
            let a_frob_sq = real.a.norm_squared();
            let frob = fit.a_hat.norm_squared() - a_frob_sq;
            let fitted = (&fit.a_hat * &cov.cxx * fit.a_hat.transpose()).trace();
            let truth = (&real.a * &real.sigma * real.a.transpose()).trace();
            let i31 = lemma31_interval(lambda_prime, c, noise_power, a_frob_sq, &spectrum, n)?;
            let i32 = lemma32_interval(
                lambda_prime,
                c,
                noise_power,
                &(&real.a * &real.u),
                &spectrum,
                n,
            )?;
            let plug = plug_in_bias_bound(a_frob_sq, c, i31.inputs.p_n);
            Ok(Trial {
                frob,
                num: fitted - truth,
                i31,
                i32,
                plug,
            })
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let col = |f: &dyn Fn(&Trial) -> f64| results.iter().map(f).collect::<Vec<f64>>();
    let frobenius = BiasCheck::new(
        &col(&|t| t.frob),
        &col(&|t| t.i31.lower),
        &col(&|t| t.i31.upper),
    );
    let numerator = BiasCheck::new(
        &col(&|t| t.num),
        &col(&|t| t.i32.lower),
        &col(&|t| t.i32.upper),
    );
    let plug_in_bound = McEstimate::from_values(&col(&|t| t.plug)).mean;
    Ok(BiasReport {
        n,
        m: spec.m,
        sample_count,
        c,
        lambda_prime,
        noise_scale: delta,
        noise_power,
        trials,
        p_n: results[0].i31.inputs.p_n,
        within_plug_in_bound: frobenius.mean.abs() <= plug_in_bound + 3.0 * frobenius.std_err,
        frobenius,
        numerator,
        plug_in_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Noise,
    Lambda,
}

/// Accuracy curve: fraction of trials with an X→Y verdict at each grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub accuracy: Vec<f64>,
    /// Binomial standard error `√(a(1-a)/N)`.
    pub std_err: Vec<f64>,
    /// Mean Δ over trials where the X→Y score was defined.
    pub mean_delta_xy: Vec<Option<f64>>,
    pub mean_delta_yx: Vec<Option<f64>>,
    pub trials_per_point: usize,
    pub estimator: String,
    pub seed: u64,
}

impl SweepResult {
    /// Plot-ready CSV: `value,accuracy,stderr,mean_delta_xy,mean_delta_yx`.
    pub fn to_csv(&self) -> String {
        let axis = match self.axis {
            SweepAxis::Noise => "delta",
            SweepAxis::Lambda => "lambda",
        };
        let mut out = format!("{axis},accuracy,stderr,mean_delta_xy,mean_delta_yx\n");
        let opt = |v: Option<f64>| v.map(crate::sampling::format_f64).unwrap_or_default();
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::sampling::format_f64(self.grid[i]),
                crate::sampling::format_f64(self.accuracy[i]),
                crate::sampling::format_f64(self.std_err[i]),
                opt(self.mean_delta_xy[i]),
                opt(self.mean_delta_yx[i]),
            ));
        }
        out
    }
}

struct PointTally {
    correct: usize,
    xy: Vec<f64>,
    yx: Vec<f64>,
}

fn tally(verdicts: &[CausalVerdict]) -> PointTally {
    PointTally {
        correct: verdicts
            .iter()
            .filter(|v| v.verdict == Verdict::XCausesY)
            .count(),
        xy: verdicts
            .iter()
            .filter_map(|v| v.score_xy.map(|s| s.value))
            .collect(),
        yx: verdicts
            .iter()
            .filter_map(|v| v.score_yx.map(|s| s.value))
            .collect(),
    }
}

fn assemble(
    axis: SweepAxis,
    grid: &[f64],
    tallies: Vec<PointTally>,
    trials: usize,
    estimator: String,
    seed: u64,
) -> SweepResult {
    let mean = |v: &[f64]| (!v.is_empty()).then(|| McEstimate::from_values(v).mean);
    let accuracy: Vec<f64> = tallies
        .iter()
        .map(|t| t.correct as f64 / trials as f64)
        .collect();
    SweepResult {
        axis,
        grid: grid.to_vec(),
        std_err: accuracy
            .iter()
            .map(|a| (a * (1.0 - a) / trials as f64).sqrt())
            .collect(),
        accuracy,
        mean_delta_xy: tallies.iter().map(|t| mean(&t.xy)).collect(),
        mean_delta_yx: tallies.iter().map(|t| mean(&t.yx)).collect(),
        trials_per_point: trials,
        estimator,
        seed,
    }
}

fn check_sweep(grid: &[f64], trials: usize, xi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    if grid.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "sweep grid values must be finite and >= 0".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidCount(
            "trials per point must be positive".into(),
        ));
    }
    if !(xi >= 0.0) {
        return Err(Error::InvalidParameter(format!("ξ must be >= 0, got {xi}")));
    }
    Ok(())
}

/// Accuracy of each estimator as the noise scale varies. Trial `t` at grid
/// point `i` draws a fresh model and dataset from `rng.grandchild(i, t)`; all
/// estimators see the same datasets.
pub fn sweep_noise(
    rng: &Rng,
    base_spec: &CausalModelSpec,
    delta_grid: &[f64],
    estimators: &[EstimatorConfig],
    xi: f64,
    trials_per_point: usize,
) -> Result<Vec<SweepResult>> {
    check_sweep(delta_grid, trials_per_point, xi)?;
    if estimators.is_empty() {
        return Err(Error::InvalidParameter("no estimators given".into()));
    }
    base_spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..delta_grid.len())
        .flat_map(|i| (0..trials_per_point).map(move |t| (i, t)))
        .collect();
    let verdicts: Vec<Result<Vec<CausalVerdict>>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let mut spec = base_spec.clone();
            spec.noise_scale = delta_grid[i];
            let data = generate(&rng.grandchild(i as u64, t as u64), &spec)?;
            estimators
                .iter()
                .map(|e| {
                    run_pipeline(
                        &data,
                        &PipelineConfig {
                            estimator: *e,
                            xi,
                            centered: false,
                        },
                    )
                })
                .collect()
        })
        .collect();
    let verdicts = verdicts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(estimators
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let tallies = (0..delta_grid.len())
                .map(|i| {
                    let point: Vec<CausalVerdict> = verdicts
                        [i * trials_per_point..(i + 1) * trials_per_point]
                        .iter()
                        .map(|v| v[k].clone())
                        .collect();
                    tally(&point)
                })
                .collect();
            assemble(
                SweepAxis::Noise,
                delta_grid,
                tallies,
                trials_per_point,
                e.label(),
                rng.seed,
            )
        })
        .collect())
}

/// Ridge accuracy across λ at a fixed noise scale. Trial `t` draws its model
/// and dataset from `rng.child(t)` and is scored at every λ.
pub fn sweep_lambda(
    rng: &Rng,
    base_spec: &CausalModelSpec,
    noise_scale: f64,
    lambda_grid: &[f64],
    xi: f64,
    trials_per_point: usize,
) -> Result<SweepResult> {
    check_sweep(lambda_grid, trials_per_point, xi)?;
    let mut spec = base_spec.clone();
    spec.noise_scale = noise_scale;
    spec.validate()?;
    let per_trial: Vec<Result<Vec<CausalVerdict>>> = (0..trials_per_point as u64)
        .into_par_iter()
        .map(|t| {
            let data = generate(&rng.child(t), &spec)?;
            let cov = empirical_covariances(&data, false)?;
            lambda_grid
                .iter()
                .map(|&lambda| verdict_from_cov(&cov, &EstimatorConfig::Ridge { lambda }, xi))
                .collect()
        })
        .collect();
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let tallies = (0..lambda_grid.len())
        .map(|j| tally(&per_trial.iter().map(|v| v[j].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(assemble(
        SweepAxis::Lambda,
        lambda_grid,
        tallies,
        trials_per_point,
        "ridge".into(),
        rng.seed,
    ))
}

fn verdict_from_cov(
    cov: &CovarianceEstimates,
    estimator: &EstimatorConfig,
    xi: f64,
) -> Result<CausalVerdict> {
    let xy = score_direction(cov, estimator);
    let yx = score_direction(&cov.reversed(), estimator);
    match (xy, yx) {
        (Ok(a), Ok(b)) => decide(&a, &b, xi),
        (a, b) => {
            let mut reasons = Vec::new();
            let mut keep = |r: Result<DeltaScore>, tag: &str| match r {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.is_numerical() => {
                    reasons.push(format!("degenerate_{tag}: {e}"));
                    Ok(None)
                }
                Err(e) => Err(e),
            };
            let a = keep(a, "x_to_y")?;
            let b = keep(b, "y_to_x")?;
            Ok(CausalVerdict {
                verdict: Verdict::Inconclusive,
                score_xy: a,
                score_yx: b,
                xi,
                reason: Some(reasons.join("; ")),
            })
        }
    }
}
