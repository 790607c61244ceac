//! Small dense linear-algebra helpers shared by the model modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative diagonal loading applied before every covariance inversion.
pub const REG_RELATIVE: f64 = 1e-8;

pub(crate) type Chol = Cholesky<f64, Dyn>;

/// Returns `cov + λ I` with `λ = rel · trace(cov) / n`.
pub fn regularize(cov: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = cov.nrows();
    if n == 0 {
        return cov.clone();
    }
    let lambda = rel * cov.trace() / n as f64;
    let mut out = cov.clone();
    for i in 0..n {
        out[(i, i)] += lambda;
    }
    out
}

/// Cholesky factor of the regularized covariance.
pub(crate) fn regularized_cholesky(cov: &DMatrix<f64>, what: &str) -> Result<Chol> {
    let reg = regularize(cov, REG_RELATIVE);
    Cholesky::new(reg).ok_or_else(|| {
        Error::DegenerateCovariance(format!(
            "{what}: {n}x{n} covariance is not positive definite after regularization",
            n = cov.nrows()
        ))
    })
}

pub(crate) fn log_det_from_cholesky(chol: &Chol) -> f64 {
    let l = chol.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

pub(crate) fn select_vector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub(crate) fn select_block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Matrix square root factor `F` with `F Fᵀ = cov`, used for sampling.
///
/// Tries a Cholesky factorization of the regularized matrix first and falls
/// back to a symmetric eigendecomposition with negative eigenvalues clipped,
/// so exactly singular PSD covariances can still be sampled.
pub(crate) fn sampling_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = Cholesky::new(regularize(cov, REG_RELATIVE)) {
        return chol.unpack();
    }
    let eig = cov.clone().symmetric_eigen();
    let n = cov.nrows();
    let mut f = eig.eigenvectors.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            f[(i, j)] *= s;
        }
    }
    f
}

/// Solves the ridge-regularized weighted least-squares problem
/// `min Σ_n w_n ‖y_n − x_nᵀ A‖² + ridge ‖A‖²` through a QR factorization of
/// the augmented system `[√W X; √ridge I]`, which has the same minimizer as
/// the normal equations `(XᵀWX + ridge I)⁻¹ XᵀWY` without squaring the
/// condition number.
pub(crate) fn weighted_lstsq(x: &DMatrix<f64>, y: &DMatrix<f64>, weights: &[f64], ridge: f64) -> Result<DMatrix<f64>> {
    let (n, d) = x.shape();
    let p = y.ncols();
    let extra = if ridge > 0.0 { d } else { 0 };
    let rows = n + extra;
    if rows < d {
        return Err(Error::SingularSystem(format!("{n} weighted rows cannot determine {d} unknowns without ridge")));
    }
    let mut a = DMatrix::zeros(rows, d);
    let mut b = DMatrix::zeros(rows, p);
    for i in 0..n {
        let s = weights[i].sqrt();
        for j in 0..d {
            a[(i, j)] = s * x[(i, j)];
        }
        for j in 0..p {
            b[(i, j)] = s * y[(i, j)];
        }
    }
    if ridge > 0.0 {
        let s = ridge.sqrt();
        for j in 0..d {
            a[(n + j, j)] = s;
        }
    }
    let qr = a.qr();
    let r = qr.r();
    let rmax = (0..d).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    let tol = rmax * (rows.max(d) as f64) * f64::EPSILON * 16.0;
    if rmax == 0.0 || (0..d).any(|i| r[(i, i)].abs() <= tol) {
        return Err(Error::SingularSystem(format!("weighted normal matrix ({d}x{d}) is rank deficient")));
    }
    let qtb = qr.q().transpose() * b;
    let sol = r.solve_upper_triangular(&qtb).ok_or_else(|| Error::SingularSystem("triangular solve failed".into()))?;
    Ok(sol)
}
