//! Generators for the linear causal model `Y = AX + δE`.
//!
//! The cause has covariance `Σ_XX = U diag(Λ) Uᵀ` with `U` Haar-distributed on
//! O(n) and `A` drawn independently of `U`.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{Rng, Stream};

/// Default decay of the cause spectrum, `λ_i = i^-4`.
///
/// Steep enough that noise of scale 0.03 masks the smallest principal
/// directions at `n = 40`, `T = 100`.
pub const DEFAULT_POWER_LAW_EXPONENT: f64 = 4.0;

/// Law of the eigenvalues `Λ_XX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `λ_i = i^(-exponent)`, `i = 1..n`.
    PowerLaw {
        exponent: f64,
    },
    /// `n` evenly spaced values from `hi` down to `lo`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub dimension: usize,
    /// Rescale so the eigenvalues average to one.
    #[serde(default)]
    pub normalize: bool,
}

impl SpectrumSpec {
    pub fn power_law(dimension: usize, exponent: f64) -> Self {
        Self {
            kind: SpectrumKind::PowerLaw { exponent },
            dimension,
            normalize: false,
        }
    }

    pub fn identity(dimension: usize) -> Self {
        Self::explicit(vec![1.0; dimension])
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        Self {
            dimension: values.len(),
            kind: SpectrumKind::Explicit { values },
            normalize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidDimension(
                "spectrum dimension must be positive".into(),
            ));
        }
        match &self.kind {
            SpectrumKind::PowerLaw { exponent } => {
                if !(*exponent > 0.0) || !exponent.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power-law exponent must be positive, got {exponent}"
                    )));
                }
            }
            SpectrumKind::Uniform { lo, hi } => {
                if !(*lo >= 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform spectrum needs 0 <= lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            SpectrumKind::Explicit { values } => {
                if values.len() != self.dimension {
                    return Err(Error::Shape(format!(
                        "explicit spectrum has {} values, dimension is {}",
                        values.len(),
                        self.dimension
                    )));
                }
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "explicit spectrum values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The eigenvalues, in generation order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.dimension;
        let mut values: Vec<f64> = match &self.kind {
            SpectrumKind::PowerLaw { exponent } => {
                (1..=n).map(|i| (i as f64).powf(-exponent)).collect()
            }
            SpectrumKind::Uniform { lo, hi } => {
                if n == 1 {
                    vec![*hi]
                } else {
                    (0..n)
                        .map(|i| hi - (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            }
            SpectrumKind::Explicit { values } => values.clone(),
        };
        if self.normalize {
            let mean = values.iter().sum::<f64>() / n as f64;
            if mean > 0.0 {
                values.iter_mut().for_each(|v| *v /= mean);
            }
        }
        Ok(values)
    }
}

/// How the structural matrix `A` is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructuralLaw {
    GaussianIid {
        variance: f64,
    },
    /// Row-major `m × n` entries.
    Explicit {
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
    },
}

impl StructuralLaw {
    pub fn explicit(a: &DMatrix<f64>) -> Self {
        StructuralLaw::Explicit {
            rows: a.nrows(),
            cols: a.ncols(),
            entries: a.transpose().iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalModelSpec {
    /// Cause dimension.
    pub n: usize,
    /// Effect dimension.
    pub m: usize,
    pub spectrum: SpectrumSpec,
    pub structural_law: StructuralLaw,
    /// Noise scale δ.
    pub noise_scale: f64,
    /// Mean of the cause; `None` means zero.
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    pub sample_count: usize,
}

impl CausalModelSpec {
    /// Model at the given scale with a power-law spectrum of exponent
    /// [`DEFAULT_POWER_LAW_EXPONENT`] and standard Gaussian structural entries.
    pub fn standard(n: usize, m: usize, sample_count: usize, noise_scale: f64) -> Self {
        Self {
            n,
            m,
            spectrum: SpectrumSpec::power_law(n, DEFAULT_POWER_LAW_EXPONENT),
            structural_law: StructuralLaw::GaussianIid { variance: 1.0 },
            noise_scale,
            mean: None,
            sample_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidDimension(format!(
                "model dimensions must be positive, got n={}, m={}",
                self.n, self.m
            )));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidCount(
                "sample count must be at least 1".into(),
            ));
        }
        if !(self.noise_scale >= 0.0) || !self.noise_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise scale must be finite and >= 0, got {}",
                self.noise_scale
            )));
        }
        if self.spectrum.dimension != self.n {
            return Err(Error::Shape(format!(
                "spectrum dimension {} does not match n = {}",
                self.spectrum.dimension, self.n
            )));
        }
        self.spectrum.validate()?;
        match &self.structural_law {
            StructuralLaw::GaussianIid { variance } => {
                if !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "structural variance must be positive, got {variance}"
                    )));
                }
            }
            StructuralLaw::Explicit {
                rows,
                cols,
                entries,
            } => {
                if *rows != self.m || *cols != self.n || entries.len() != rows * cols {
                    return Err(Error::Shape(format!(
                        "explicit structural matrix must be {}x{} ({} entries), got {}x{} with {} entries",
                        self.m,
                        self.n,
                        self.m * self.n,
                        rows,
                        cols,
                        entries.len()
                    )));
                }
            }
        }
        if let Some(mu) = &self.mean {
            if mu.len() != self.n {
                return Err(Error::Shape(format!(
                    "mean has length {}, expected {}",
                    mu.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn mean_vector(&self) -> DVector<f64> {
        match &self.mean {
            Some(mu) => DVector::from_column_slice(mu),
            None => DVector::zeros(self.n),
        }
    }
}

/// One draw of `(U, Λ, A)` and the implied covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRealization {
    pub u: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub a: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

impl ModelRealization {
    /// Assembles `Σ = U diag(Λ) Uᵀ`, symmetrized against round-off.
    pub fn new(u: DMatrix<f64>, eigenvalues: Vec<f64>, a: DMatrix<f64>) -> Self {
        let lambda = DVector::from_column_slice(&eigenvalues);
        let scaled = &u * DMatrix::from_diagonal(&lambda);
        let sigma = crate::linalg::symmetrize(&(scaled * u.transpose()));
        Self {
            u,
            eigenvalues,
            a,
            sigma,
        }
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// SHA-256 over the little-endian bytes of U, Λ, A and Σ (column-major).
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for part in [
            self.u.as_slice(),
            &self.eigenvalues,
            self.a.as_slice(),
            self.sigma.as_slice(),
        ] {
            h.update((part.len() as u64).to_le_bytes());
            for v in part {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Paired observations; row `i` of `x` and `y` is the pair `(X_i, Y_i)`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub provenance: Option<Arc<ModelRealization>>,
}

impl SampleSet {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Shape(format!(
                "X has {} rows but Y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::InvalidCount("sample set is empty".into()));
        }
        Ok(Self {
            x,
            y,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn m(&self) -> usize {
        self.y.ncols()
    }

    /// The same observations with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
            provenance: None,
        }
    }

    /// Writes the `x1,…,xn,y1,…,ym` CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.n())
            .map(|i| format!("x{i}"))
            .chain((1..=self.m()).map(|j| format!("y{j}")))
            .collect();
        w.write_record(&header).map_err(csv_io)?;
        let mut row = Vec::with_capacity(self.n() + self.m());
        for t in 0..self.len() {
            row.clear();
            row.extend(self.x.row(t).iter().map(|v| format_f64(*v)));
            row.extend(self.y.row(t).iter().map(|v| format_f64(*v)));
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV whose header names the cause columns `x*` followed by the
    /// effect columns `y*`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let mut n = 0;
        let mut m = 0;
        for (i, name) in header.iter().enumerate() {
            let name = name.trim();
            if let Some(rest) = name.strip_prefix('x') {
                if m > 0 || rest.parse::<usize>().ok() != Some(n + 1) {
                    return Err(bad_header(i, name));
                }
                n += 1;
            } else if let Some(rest) = name.strip_prefix('y') {
                if rest.parse::<usize>().ok() != Some(m + 1) {
                    return Err(bad_header(i, name));
                }
                m += 1;
            } else {
                return Err(bad_header(i, name));
            }
        }
        if n == 0 || m == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "header must name at least one x and one y column".into(),
            });
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != n + m {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", n + m, record.len()),
                });
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {}: cannot parse {field:?} as a number", j + 1),
                })?;
                if j < n {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        let t = xs.len() / n;
        if t == 0 {
            return Err(Error::InvalidCount("CSV contains no observations".into()));
        }
        SampleSet::new(
            DMatrix::from_row_slice(t, n, &xs),
            DMatrix::from_row_slice(t, m, &ys),
        )
    }
}

fn bad_header(index: usize, name: &str) -> Error {
    Error::Parse {
        line: 1,
        message: format!("unexpected column {} name {name:?}", index + 1),
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Decimal scientific notation with 17 significant digits; round-trips every f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Sidecar metadata written next to an exported dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub seed: u64,
    pub stream_id: u64,
    pub spec: CausalModelSpec,
    pub realization_hash: String,
    pub rows: usize,
}

/// Haar-distributed orthogonal matrix on O(n).
///
/// QR of an i.i.d. Gaussian matrix with each column of Q multiplied by the sign
/// of the matching diagonal entry of R, then the first column flipped with
/// probability 1/2 so both determinant components are equally likely.
pub fn haar_orthogonal(rng: &Rng, n: usize) -> Result<DMatrix<f64>> {
    haar_orthogonal_from(&mut rng.generator(), n)
}

pub fn haar_orthogonal_from(stream: &mut Stream, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension("Haar sampling needs n >= 1".into()));
    }
    let g = stream.normal_matrix(n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if stream.bernoulli_half() {
        q.column_mut(0).neg_mut();
    }
    Ok(q)
}

/// Draws `(U, Λ, A)` for `spec`. U and A come from independent child streams.
pub fn realize_model(rng: &Rng, spec: &CausalModelSpec) -> Result<ModelRealization> {
    spec.validate()?;
    let u = haar_orthogonal(&rng.child(0), spec.n)?;
    let eigenvalues = spec.spectrum.eigenvalues()?;
    let a = match &spec.structural_law {
        StructuralLaw::GaussianIid { variance } => {
            rng.child(1).generator().normal_matrix(spec.m, spec.n) * variance.sqrt()
        }
        StructuralLaw::Explicit {
            rows,
            cols,
            entries,
        } => DMatrix::from_row_slice(*rows, *cols, entries),
    };
    Ok(ModelRealization::new(u, eigenvalues, a))
}

/// Draws `T` i.i.d. pairs `X_i ~ N(μ, Σ)`, `Y_i = A X_i + δ E_i`, `E_i ~ N(0, I_m)`.
pub fn sample_dataset(
    rng: &Rng,
    real: &ModelRealization,
    sample_count: usize,
    noise_scale: f64,
    mean: &DVector<f64>,
) -> Result<SampleSet> {
    if sample_count == 0 {
        return Err(Error::InvalidCount(
            "sample count must be at least 1".into(),
        ));
    }
    if !(noise_scale >= 0.0) || !noise_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be finite and >= 0, got {noise_scale}"
        )));
    }
    let n = real.n();
    if mean.len() != n {
        return Err(Error::Shape(format!(
            "mean has length {}, expected {n}",
            mean.len()
        )));
    }
    // X = μ + Z diag(√Λ) Uᵀ for Z with i.i.d. N(0,1) rows
    let z = rng.child(0).generator().normal_matrix(sample_count, n);
    let root = DVector::from_iterator(n, real.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
    let factor = DMatrix::from_diagonal(&root) * real.u.transpose();
    let mut x = z * factor;
    for mut row in x.row_iter_mut() {
        row += mean.transpose();
    }
    let mut y = &x * real.a.transpose();
    if noise_scale > 0.0 {
        let e = rng
            .child(1)
            .generator()
            .normal_matrix(sample_count, real.m());
        y += e * noise_scale;
    }
    let mut set = SampleSet::new(x, y)?;
    set.provenance = Some(Arc::new(real.clone()));
    Ok(set)
}

/// Realizes a model and samples `spec.sample_count` observations from it.
pub fn generate(rng: &Rng, spec: &CausalModelSpec) -> Result<SampleSet> {
    let real = realize_model(&rng.child(0), spec)?;
    sample_dataset(
        &rng.child(1),
        &real,
        spec.sample_count,
        spec.noise_scale,
        &spec.mean_vector(),
    )
}
