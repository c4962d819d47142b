//! Dense linear-algebra helpers shared by the estimators and theory modules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// `tr(M) / k` for a square `k × k` matrix.
pub fn normalized_trace(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "normalized trace needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    Ok(m.trace() / m.nrows() as f64)
}

/// Symmetrizes `m` in place of round-off asymmetry: `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `M^p` for symmetric PSD `M` via its eigendecomposition; tiny negative
/// eigenvalues from round-off are clamped to zero.
pub fn psd_power(m: &DMatrix<f64>, p: u32) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let powered = eig.eigenvalues.map(|l| l.max(0.0).powi(p as i32));
    &eig.eigenvectors * DMatrix::from_diagonal(&powered) * eig.eigenvectors.transpose()
}

/// `τ_k(M^p)` for symmetric PSD `M`, computed from its spectrum.
pub fn normalized_trace_of_power(m: &DMatrix<f64>, p: u32) -> f64 {
    let k = m.nrows() as f64;
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).powi(p as i32))
        .sum::<f64>()
        / k
}

/// Moore–Penrose pseudo-inverse by full SVD. Singular values below
/// `rel_threshold · σ_max` are treated as zero. Returns the inverse and the
/// numerical rank.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_threshold: f64) -> (DMatrix<f64>, usize) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_threshold * sigma_max;
    let mut rank = 0;
    let inv_sigma = svd.singular_values.map(|s| {
        if sigma_max > 0.0 && s > cutoff {
            rank += 1;
            1.0 / s
        } else {
            0.0
        }
    });
    let pinv = v_t.transpose() * DMatrix::from_diagonal(&inv_sigma) * u.transpose();
    (pinv, rank)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}
