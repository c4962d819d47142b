//! The `tracecause` command line.
//!
//! Every subcommand resolves its parameters from an optional JSON `--config`
//! file overlaid by explicit flags, and echoes the resolved record under a
//! `"config"` key in its output. Any such output can be passed back as
//! `--config` to reproduce the run. `--threads` is not part of the record:
//! results do not depend on it.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 I/O failure,
//! 4 numerically degenerate data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimators::{empirical_covariances, DeltaScore};
use crate::experiments::{
    pilot_lambda_symmetric, run_pipeline, score_direction, sweep_lambda, sweep_noise,
    verify_bias_bounds, verify_concentration, EstimatorConfig, PipelineConfig, SweepResult,
    DEFAULT_XI,
};
use crate::rng::Rng;
use crate::sampling::{
    generate, CausalModelSpec, DatasetMetadata, SampleSet, SpectrumKind, SpectrumSpec,
    StructuralLaw, DEFAULT_POWER_LAW_EXPONENT,
};
use crate::theory::{pn_fixed_point, pn_residual, select_lambda_prime};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tracecause",
    version,
    about = "Trace-method causal direction inference"
)]
struct Cli {
    /// JSON file with parameters; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for trial loops (default: all cores). Does not affect results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset from the linear causal model.
    Gen(GenArgs),
    /// Delta scores of a dataset in both directions, as JSON lines.
    Delta(DeltaArgs),
    /// Causal direction verdict for a dataset.
    Decide(DecideArgs),
    /// Accuracy sweep over the noise scale or the ridge parameter.
    Sweep(SweepArgs),
    /// Monte-Carlo check of the concentration identity or the ridge bias intervals.
    Verify(VerifyArgs),
    /// Solve the ridge fixed point p_n.
    Pn(PnArgs),
}

// Flag records: every field optional, so only explicit flags override the file.

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    /// Sample count.
    #[arg(long = "T")]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    /// identity | power:α | uniform:lo:hi | explicit:v1,v2,...
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<String>,
    /// Rescale the spectrum to unit mean.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    normalize: bool,
    /// Variance of the i.i.d. Gaussian entries of A.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a_variance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Noise scale δ.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stream: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Metadata JSON (default: the CSV path with a .json extension).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ScoreArgs {
    /// Input CSV with columns x1..xn, y1..ym.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    /// Ridge parameter (normalized by T).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    /// Schatten order for the p-moment estimator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_samples: Option<usize>,
    /// Relative singular-value cutoff for the pseudo-inverse.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sv_threshold: Option<f64>,
    /// Subtract the sample mean before forming covariances.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    center: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct DeltaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    score: ScoreArgs,
    /// Comma-separated subset of empirical, ridge, pmoment.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    estimator: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct DecideArgs {
    #[command(flatten)]
    #[serde(flatten)]
    score: ScoreArgs,
    /// empirical | ridge | pmoment
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    estimator: Option<String>,
    /// Decision margin ξ.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<f64>,
    /// Choose λ from a pilot ridge fit instead of --lambda.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    auto_lambda: bool,
    /// λ of the pilot fit used by --auto-lambda.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pilot_lambda: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// noise | lambda
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<String>,
    /// Comma list, or start:stop:log[:k] / start:stop:lin[:k].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<String>,
    /// Noise scale for the lambda axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    /// Ridge λ for the noise axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    /// Estimators compared on the noise axis (comma-separated).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    estimators: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Output prefix; writes <out>.json and one CSV per curve.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// concentration | bias
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    /// Draws for the reference mean when p > 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_samples: Option<usize>,
    /// Spectrum of C (concentration) or of the cause covariance (bias).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<String>,
    /// Entry variance of A (default 1/n).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a_variance: Option<f64>,
    /// Aspect ratio T/n for the bias check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    /// Noise scale for the bias check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// Defaults to the bias-optimal rule using the true noise power and E‖A‖_F².
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_prime: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PnArgs {
    /// identity | power:α | uniform:lo:hi | explicit:v1,v2,...
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_prime: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

// Resolved records: what gets echoed.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenConfig {
    n: usize,
    m: usize,
    #[serde(rename = "T")]
    t: usize,
    spectrum: String,
    normalize: bool,
    a_variance: f64,
    delta: f64,
    seed: u64,
    stream: u64,
    out: PathBuf,
    meta: Option<PathBuf>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n: 40,
            m: 40,
            t: 100,
            spectrum: format!("power:{DEFAULT_POWER_LAW_EXPONENT}"),
            normalize: false,
            a_variance: 1.0,
            delta: 0.0,
            seed: 0,
            stream: 0,
            out: PathBuf::from("data.csv"),
            meta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeltaConfig {
    data: Option<PathBuf>,
    estimator: String,
    lambda: f64,
    p: u32,
    mc_samples: usize,
    sv_threshold: Option<f64>,
    center: bool,
    seed: u64,
    out: Option<PathBuf>,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self {
            data: None,
            estimator: "empirical,ridge".into(),
            lambda: 0.01,
            p: 2,
            mc_samples: 2000,
            sv_threshold: None,
            center: false,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DecideConfig {
    data: Option<PathBuf>,
    estimator: String,
    lambda: f64,
    auto_lambda: bool,
    pilot_lambda: f64,
    p: u32,
    mc_samples: usize,
    sv_threshold: Option<f64>,
    center: bool,
    xi: f64,
    seed: u64,
    out: Option<PathBuf>,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self {
            data: None,
            estimator: "ridge".into(),
            lambda: 0.01,
            auto_lambda: false,
            pilot_lambda: 1e-3,
            p: 2,
            mc_samples: 2000,
            sv_threshold: None,
            center: false,
            xi: DEFAULT_XI,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepConfig {
    axis: String,
    grid: Option<String>,
    n: usize,
    m: usize,
    #[serde(rename = "T")]
    t: usize,
    spectrum: String,
    normalize: bool,
    a_variance: f64,
    delta: f64,
    lambda: f64,
    estimators: String,
    p: u32,
    mc_samples: usize,
    trials: usize,
    xi: f64,
    seed: u64,
    out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: "lambda".into(),
            grid: None,
            n: 40,
            m: 40,
            t: 100,
            spectrum: format!("power:{DEFAULT_POWER_LAW_EXPONENT}"),
            normalize: false,
            a_variance: 1.0,
            delta: 0.03,
            lambda: 0.01,
            estimators: "empirical,ridge".into(),
            p: 2,
            mc_samples: 200,
            trials: 100,
            xi: DEFAULT_XI,
            seed: 0,
            out: PathBuf::from("sweep"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VerifyConfig {
    target: String,
    n: Option<usize>,
    m: Option<usize>,
    p: u32,
    trials: Option<usize>,
    reference_samples: usize,
    spectrum: String,
    a_variance: Option<f64>,
    c: f64,
    sigma: f64,
    lambda_prime: Option<f64>,
    seed: u64,
    out: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            target: "concentration".into(),
            n: None,
            m: None,
            p: 1,
            trials: None,
            reference_samples: 20000,
            spectrum: "power:1".into(),
            a_variance: None,
            c: 2.0,
            sigma: 0.1,
            lambda_prime: None,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PnConfig {
    spectrum: String,
    n: usize,
    c: f64,
    lambda_prime: f64,
    tol: f64,
}

impl Default for PnConfig {
    fn default() -> Self {
        Self {
            spectrum: "identity".into(),
            n: 50,
            c: 1.0,
            lambda_prime: 1.0,
            tol: 1e-14,
        }
    }
}

/// Parses `identity`, `power:α`, `uniform:lo:hi` or `explicit:v1,v2,...` for dimension `n`.
pub fn parse_spectrum(text: &str, n: usize, normalize: bool) -> Result<SpectrumSpec> {
    let bad = || Error::InvalidParameter(format!("unrecognized spectrum '{text}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    let kind = match head.trim() {
        "identity" if rest.is_empty() => SpectrumKind::Explicit {
            values: vec![1.0; n],
        },
        "power" => SpectrumKind::PowerLaw {
            exponent: num(rest)?,
        },
        "uniform" => {
            let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
            SpectrumKind::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            }
        }
        "explicit" => SpectrumKind::Explicit {
            values: rest.split(',').map(num).collect::<Result<_>>()?,
        },
        _ => return Err(bad()),
    };
    let spec = SpectrumSpec {
        kind,
        dimension: n,
        normalize,
    };
    spec.validate()?;
    Ok(spec)
}

/// Parses a comma list, or `start:stop:log[:k]` / `start:stop:lin[:k]` with
/// `k` points (default 11) including both ends.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParameter(format!("grid '{text}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid: Vec<f64> = if parts.len() == 1 {
        text.split(',').map(num).collect::<Result<_>>()?
    } else {
        if parts.len() < 3 || parts.len() > 4 {
            return Err(bad("expected start:stop:log[:k] or start:stop:lin[:k]"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let k: usize = match parts.get(3) {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| bad("point count must be an integer"))?,
            None => 11,
        };
        if k < 2 {
            return Err(bad("need at least two points"));
        }
        let frac = |i: usize| i as f64 / (k - 1) as f64;
        match parts[2].trim() {
            "log" => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(bad("log grid endpoints must be positive"));
                }
                let (la, lb) = (a.log10(), b.log10());
                (0..k)
                    .map(|i| {
                        if i + 1 == k {
                            b
                        } else {
                            10f64.powf(la + (lb - la) * frac(i))
                        }
                    })
                    .collect()
            }
            "lin" => (0..k)
                .map(|i| if i + 1 == k { b } else { a + (b - a) * frac(i) })
                .collect(),
            _ => return Err(bad("scale must be log or lin")),
        }
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(grid)
}

fn model_spec(
    n: usize,
    m: usize,
    t: usize,
    spectrum: &str,
    normalize: bool,
    a_variance: f64,
    delta: f64,
) -> Result<CausalModelSpec> {
    let spec = CausalModelSpec {
        n,
        m,
        spectrum: parse_spectrum(spectrum, n, normalize)?,
        structural_law: StructuralLaw::GaussianIid {
            variance: a_variance,
        },
        noise_scale: delta,
        mean: None,
        sample_count: t,
    };
    spec.validate()?;
    Ok(spec)
}

/// Loads `--config`: a JSON object, optionally wrapped as `{"config": {...}}`
/// (the shape every command echoes). For JSON-lines outputs the first line is used.
fn load_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            let first = text.lines().next().unwrap_or("");
            serde_json::from_str(first).map_err(|_| Error::Json(e))?
        }
    };
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("config") => {
            obj.remove("config").unwrap_or(Value::Null)
        }
        v => v,
    };
    match value {
        Value::Object(obj) => Ok(obj),
        _ => Err(Error::InvalidParameter(format!(
            "config file {} must hold a JSON object",
            path.display()
        ))),
    }
}

fn resolve<A: Serialize, C: DeserializeOwned>(file: Option<&Path>, flags: &A) -> Result<C> {
    let mut merged = match file {
        Some(path) => load_config_file(path)?,
        None => Map::new(),
    };
    if let Value::Object(overrides) = serde_json::to_value(flags)? {
        merged.extend(overrides);
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| Error::InvalidParameter(format!("configuration: {e}")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes to `out` when given, otherwise to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn pretty(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_data(path: Option<&Path>) -> Result<SampleSet> {
    let path = path.ok_or_else(|| Error::InvalidParameter("--data is required".into()))?;
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    SampleSet::read_csv(std::io::BufReader::new(file))
}

fn estimator_named(
    name: &str,
    lambda: f64,
    p: u32,
    mc_samples: usize,
    sv_threshold: Option<f64>,
    seed: u64,
) -> Result<EstimatorConfig> {
    match name.trim() {
        "empirical" => Ok(EstimatorConfig::Empirical {
            sv_threshold_rel: sv_threshold,
        }),
        "ridge" => Ok(EstimatorConfig::Ridge { lambda }),
        "pmoment" | "p_moment" | "p-moment" => Ok(EstimatorConfig::PMoment {
            lambda,
            p,
            mc_samples,
            seed,
        }),
        other => Err(Error::InvalidParameter(format!(
            "unknown estimator '{other}' (expected empirical, ridge or pmoment)"
        ))),
    }
}

fn cmd_gen(cfg: GenConfig) -> Result<()> {
    let spec = model_spec(
        cfg.n,
        cfg.m,
        cfg.t,
        &cfg.spectrum,
        cfg.normalize,
        cfg.a_variance,
        cfg.delta,
    )?;
    let rng = Rng::with_stream(cfg.seed, cfg.stream);
    let data = generate(&rng, &spec)?;
    let realization = data
        .provenance
        .as_ref()
        .map(|r| r.hash_hex())
        .unwrap_or_default();
    let meta_path = cfg
        .meta
        .clone()
        .unwrap_or_else(|| cfg.out.with_extension("json"));
    let mut w = create(&cfg.out)?;
    data.write_csv(&mut w)?;
    w.flush()?;
    let metadata = DatasetMetadata {
        seed: cfg.seed,
        stream_id: cfg.stream,
        spec,
        realization_hash: realization.clone(),
        rows: data.len(),
    };
    write_json(&meta_path, &json!({ "config": cfg, "metadata": metadata }))?;
    emit(
        None,
        &pretty(&json!({
            "csv": cfg.out,
            "metadata": meta_path,
            "rows": data.len(),
            "columns": data.n() + data.m(),
            "realization_hash": realization,
        }))?,
    )
}

fn cmd_delta(cfg: DeltaConfig) -> Result<()> {
    let data = read_data(cfg.data.as_deref())?;
    let cov = empirical_covariances(&data, cfg.center)?;
    let mut lines = vec![serde_json::to_string(&json!({ "config": cfg }))?];
    for name in cfg.estimator.split(',') {
        let est = estimator_named(
            name,
            cfg.lambda,
            cfg.p,
            cfg.mc_samples,
            cfg.sv_threshold,
            cfg.seed,
        )?;
        for orientation in [cov.clone(), cov.reversed()] {
            let score: DeltaScore = score_direction(&orientation, &est)?;
            lines.push(serde_json::to_string(&score)?);
        }
    }
    emit(cfg.out.as_deref(), &(lines.join("\n") + "\n"))
}

fn cmd_decide(cfg: DecideConfig) -> Result<()> {
    let data = read_data(cfg.data.as_deref())?;
    let lambda = if cfg.auto_lambda {
        pilot_lambda_symmetric(&data, cfg.pilot_lambda, cfg.center)?
    } else {
        cfg.lambda
    };
    let estimator = estimator_named(
        &cfg.estimator,
        lambda,
        cfg.p,
        cfg.mc_samples,
        cfg.sv_threshold,
        cfg.seed,
    )?;
    let pipeline = PipelineConfig {
        estimator,
        xi: cfg.xi,
        centered: cfg.center,
    };
    let verdict = run_pipeline(&data, &pipeline)?;
    let mut report = json!({ "config": cfg, "rows": data.len(), "verdict": verdict });
    if cfg.auto_lambda {
        report["lambda_used"] = json!(lambda);
    }
    emit(cfg.out.as_deref(), &pretty(&report)?)
}

fn cmd_sweep(cfg: SweepConfig) -> Result<()> {
    let spec = model_spec(
        cfg.n,
        cfg.m,
        cfg.t,
        &cfg.spectrum,
        cfg.normalize,
        cfg.a_variance,
        cfg.delta,
    )?;
    let rng = Rng::new(cfg.seed);
    let (results, names): (Vec<SweepResult>, Vec<String>) = match cfg.axis.as_str() {
        "noise" => {
            let grid = parse_grid(
                cfg.grid
                    .as_deref()
                    .unwrap_or("0,0.001,0.003,0.01,0.03,0.1,0.3"),
            )?;
            let names: Vec<String> = cfg
                .estimators
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            let estimators = names
                .iter()
                .map(|n| estimator_named(n, cfg.lambda, cfg.p, cfg.mc_samples, None, cfg.seed))
                .collect::<Result<Vec<_>>>()?;
            (
                sweep_noise(&rng, &spec, &grid, &estimators, cfg.xi, cfg.trials)?,
                names,
            )
        }
        "lambda" => {
            let grid = parse_grid(cfg.grid.as_deref().unwrap_or("1e-8:1e2:log:21"))?;
            let result = sweep_lambda(&rng, &spec, cfg.delta, &grid, cfg.xi, cfg.trials)?;
            (vec![result], vec!["ridge".into()])
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown axis '{other}' (expected noise or lambda)"
            )))
        }
    };
    let prefix = cfg.out.to_string_lossy().into_owned();
    let mut files = Vec::new();
    for (result, name) in results.iter().zip(&names) {
        let path = PathBuf::from(format!("{prefix}-{}-{name}.csv", cfg.axis));
        emit(Some(&path), &result.to_csv())?;
        files.push(path);
    }
    let report = json!({ "config": cfg, "results": results, "csv": files });
    write_json(&PathBuf::from(format!("{prefix}.json")), &report)?;
    emit(None, &pretty(&report)?)
}

fn cmd_verify(cfg: VerifyConfig) -> Result<()> {
    let rng = Rng::new(cfg.seed);
    let report = match cfg.target.as_str() {
        "concentration" => {
            let n = cfg.n.unwrap_or(64);
            let m = cfg.m.unwrap_or(32);
            let var = cfg.a_variance.unwrap_or(1.0 / n as f64);
            if !(var > 0.0) {
                return Err(Error::InvalidParameter(
                    "a_variance must be positive".into(),
                ));
            }
            let spectrum = parse_spectrum(&cfg.spectrum, n, false)?.eigenvalues()?;
            let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spectrum));
            let a = rng.child(2).generator().normal_matrix(m, n) * var.sqrt();
            let report = verify_concentration(
                &rng,
                &a,
                &c,
                cfg.p,
                cfg.trials.unwrap_or(2000),
                cfg.reference_samples,
            )?;
            json!({ "config": cfg, "pass": report.mean_within(3.0), "report": report })
        }
        "bias" => {
            let n = cfg.n.unwrap_or(100);
            let m = cfg.m.unwrap_or(n);
            let var = cfg.a_variance.unwrap_or(1.0 / n as f64);
            let t = (cfg.c * n as f64).round().max(1.0) as usize;
            let spec = model_spec(n, m, t, &cfg.spectrum, false, var, cfg.sigma)?;
            let lambda_prime = match cfg.lambda_prime {
                Some(l) => l,
                None => select_lambda_prime(
                    m as f64 * cfg.sigma * cfg.sigma,
                    cfg.c,
                    (m * n) as f64 * var,
                )
                .map_err(|_| {
                    Error::InvalidParameter("--lambda-prime is required when sigma is 0".into())
                })?,
            };
            let report =
                verify_bias_bounds(&rng, &spec, lambda_prime, cfg.c, cfg.trials.unwrap_or(200))?;
            let pass = report.frobenius.contained && report.numerator.contained;
            json!({ "config": cfg, "pass": pass, "report": report })
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown target '{other}' (expected concentration or bias)"
            )))
        }
    };
    emit(cfg.out.as_deref(), &pretty(&report)?)
}

fn cmd_pn(cfg: PnConfig) -> Result<()> {
    let spectrum = parse_spectrum(&cfg.spectrum, cfg.n, false)?.eigenvalues()?;
    let p = pn_fixed_point(&spectrum, cfg.c, cfg.lambda_prime, cfg.tol)?;
    let residual = pn_residual(&spectrum, cfg.c, cfg.lambda_prime, p);
    emit(
        None,
        &pretty(&json!({ "config": cfg, "p_n": p, "residual": residual }))?,
    )
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Gen(a) => cmd_gen(resolve(file, &a)?),
        Command::Delta(a) => cmd_delta(resolve(file, &a)?),
        Command::Decide(a) => cmd_decide(resolve(file, &a)?),
        Command::Sweep(a) => cmd_sweep(resolve(file, &a)?),
        Command::Verify(a) => cmd_verify(resolve(file, &a)?),
        Command::Pn(a) => cmd_pn(resolve(file, &a)?),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

/// Runs the command line in `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_INVALID;
        }
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_hits_decades() {
        let g = parse_grid("1e-4:1e1:log").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[10], 10.0);
        assert!((g[2] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0, 0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert_eq!(
            parse_grid("0:1:lin:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(parse_grid("0:1:log").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2:cubic").is_err());
    }

    #[test]
    fn spectrum_forms() {
        let id = parse_spectrum("identity", 3, false)
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert_eq!(id, vec![1.0; 3]);
        let pw = parse_spectrum("power:2", 3, false)
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert_eq!(pw, vec![1.0, 0.25, 1.0 / 9.0]);
        let un = parse_spectrum("uniform:1:3", 3, false)
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert_eq!(un, vec![3.0, 2.0, 1.0]);
        assert!(parse_spectrum("explicit:1,2", 3, false).is_err());
        assert!(parse_spectrum("cauchy", 3, false).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"config": {"n": 7, "c": 3.0}}"#).unwrap();
        let flags = PnArgs {
            spectrum: None,
            n: Some(9),
            c: None,
            lambda_prime: None,
            tol: None,
        };
        let cfg: PnConfig = resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.n, 9);
        assert_eq!(cfg.c, 3.0);
        assert_eq!(cfg.spectrum, "identity");
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let flags = PnArgs {
            spectrum: None,
            n: None,
            c: None,
            lambda_prime: None,
            tol: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        let err = resolve::<_, PnConfig>(Some(&path), &flags).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INVALID);
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(exit_code(&Error::RankZero), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::InvalidCount("x".into())), EXIT_INVALID);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }
}
