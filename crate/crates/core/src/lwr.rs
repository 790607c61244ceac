//! Weighted least squares and locally weighted regression (LWR).
//!
//! Each of the `K` radial basis functions owns a local polynomial model fitted
//! by weighted least squares; predictions blend the local models with the
//! rescaled (partition-of-unity) activations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussians::log_sum_exp;
use crate::linalg::weighted_lstsq;

/// Solves `(XᵀWX + ridge·I)⁻¹ XᵀW Y` for diagonal weights `W`.
pub fn weighted_least_squares(
    x_in: &DMatrix<f64>,
    x_out: &DMatrix<f64>,
    weights: &[f64],
    ridge: f64,
) -> Result<DMatrix<f64>> {
    let n = x_in.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("weighted least squares needs at least one row".into()));
    }
    if x_out.nrows() != n || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "inputs have {n} rows, outputs {} and weights {}",
            x_out.nrows(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidParameter("weights must be nonnegative".into()));
    }
    if ridge == 0.0 && weights.iter().all(|&w| w == 0.0) {
        return Err(Error::SingularSystem("all weights are zero".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidParameter("ridge must be nonnegative".into()));
    }
    weighted_lstsq(x_in, x_out, weights, ridge)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    /// Shared isotropic variance σ².
    Isotropic(f64),
    /// One SPD matrix per basis function.
    Full(Vec<DMatrix<f64>>),
}

/// Radial basis functions `exp(-½ (x-μ_k)ᵀ Σ_k⁻¹ (x-μ_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSet {
    centers: Vec<DVector<f64>>,
    bandwidth: Bandwidth,
    rescaled: bool,
    // Cholesky factors (lower) of each bandwidth matrix; empty for isotropic
    factors: Vec<DMatrix<f64>>,
}

impl RbfSet {
    pub fn new(centers: Vec<DVector<f64>>, bandwidth: Bandwidth, rescaled: bool) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter("an RBF set needs at least one center".into()));
        }
        let d = centers[0].len();
        if d == 0 || centers.iter().any(|c| c.len() != d) {
            return Err(Error::DimensionMismatch("RBF centers differ in dimension".into()));
        }
        let factors = match &bandwidth {
            Bandwidth::Isotropic(s2) => {
                if !(*s2 > 0.0) || !s2.is_finite() {
                    return Err(Error::InvalidParameter("RBF bandwidth must be positive".into()));
                }
                Vec::new()
            }
            Bandwidth::Full(mats) => {
                if mats.len() != centers.len() {
                    return Err(Error::DimensionMismatch("one bandwidth matrix per center".into()));
                }
                mats.iter()
                    .map(|m| {
                        if m.shape() != (d, d) || !crate::linalg::is_symmetric(m, 1e-12) {
                            return Err(Error::InvalidParameter(
                                "bandwidth matrices must be symmetric and match the input dimension".into(),
                            ));
                        }
                        m.clone()
                            .cholesky()
                            .map(|c| c.unpack())
                            .ok_or_else(|| Error::InvalidParameter("bandwidth matrix is not positive definite".into()))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self { centers, bandwidth, rescaled, factors })
    }

    /// `k` centers spread uniformly over `[lo, hi]` with σ² = ((hi−lo)/k)².
    pub fn uniform_1d(lo: f64, hi: f64, k: usize, rescaled: bool) -> Result<Self> {
        if k == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter("uniform RBFs need k ≥ 1 and hi > lo".into()));
        }
        let centers = (0..k)
            .map(|i| {
                let c = if k == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 };
                DVector::from_element(1, c)
            })
            .collect();
        let width = (hi - lo) / k as f64;
        Self::new(centers, Bandwidth::Isotropic(width * width), rescaled)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn bandwidth(&self) -> &Bandwidth {
        &self.bandwidth
    }

    pub fn rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn with_rescaled(&self, rescaled: bool) -> Self {
        Self { rescaled, ..self.clone() }
    }

    fn log_unnormalized(&self, x: &DVector<f64>) -> Vec<f64> {
        self.centers
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let diff = x - c;
                let q = match &self.bandwidth {
                    Bandwidth::Isotropic(s2) => diff.norm_squared() / s2,
                    Bandwidth::Full(_) => self.factors[k]
                        .solve_lower_triangular(&diff)
                        .expect("positive definite bandwidth")
                        .norm_squared(),
                };
                -0.5 * q
            })
            .collect()
    }

    /// Activations at `x`; normalized in the log domain when rescaled.
    pub fn activations(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("query has dimension {}, RBFs have {}", x.len(), self.dim())));
        }
        let logs = self.log_unnormalized(x);
        Ok(if self.rescaled {
            let lse = log_sum_exp(&logs);
            DVector::from_iterator(logs.len(), logs.iter().map(|l| (l - lse).exp()))
        } else {
            DVector::from_iterator(logs.len(), logs.iter().map(|l| l.exp()))
        })
    }
}

/// Per-dimension polynomial expansion `[1, u_1, …, u_1^p, u_2, …, u_d^p]`.
pub(crate) fn poly_features(u: &DVector<f64>, degree: usize) -> DVector<f64> {
    let d = u.len();
    let mut f = DVector::zeros(1 + d * degree);
    f[0] = 1.0;
    for j in 0..d {
        let mut pw = 1.0;
        for p in 1..=degree {
            pw *= u[j];
            f[1 + j * degree + p - 1] = pw;
        }
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct LwrConfig {
    pub degree: usize,
    /// Ridge term applied to every local model. `None` solves each local
    /// model unregularized and falls back to `1e-9 · N` only for models
    /// whose system is numerically singular (e.g. bases with no data
    /// nearby), so polynomials are still reproduced exactly.
    pub ridge: Option<f64>,
}

impl Default for LwrConfig {
    fn default() -> Self {
        Self { degree: 1, ridge: None }
    }
}

/// A fitted LWR model.
///
/// Local polynomials are expressed in the shifted coordinate `x − μ_k` of
/// their own basis function, which spans the same polynomial space as the
/// raw input but keeps the local normal equations well conditioned.
#[derive(Debug, Clone, PartialEq)]
pub struct LwrModel {
    rbfs: RbfSet,
    coefficients: Vec<DMatrix<f64>>,
    degree: usize,
}

impl LwrModel {
    pub fn from_parts(rbfs: RbfSet, coefficients: Vec<DMatrix<f64>>, degree: usize) -> Result<Self> {
        let rows = 1 + rbfs.dim() * degree;
        if coefficients.len() != rbfs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficient matrices for {} basis functions",
                coefficients.len(),
                rbfs.len()
            )));
        }
        let p = coefficients[0].ncols();
        if coefficients.iter().any(|a| a.nrows() != rows || a.ncols() != p) {
            return Err(Error::DimensionMismatch(format!("coefficient matrices must be {rows}x{p}")));
        }
        Ok(Self { rbfs, coefficients, degree })
    }

    pub fn rbfs(&self) -> &RbfSet {
        &self.rbfs
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn output_dim(&self) -> usize {
        self.coefficients[0].ncols()
    }

    pub fn fit(x_in: &DMatrix<f64>, x_out: &DMatrix<f64>, rbfs: &RbfSet, config: &LwrConfig) -> Result<Self> {
        let n = x_in.nrows();
        if n == 0 || x_out.nrows() != n {
            return Err(Error::DimensionMismatch(format!("{n} input rows and {} output rows", x_out.nrows())));
        }
        if x_in.ncols() != rbfs.dim() {
            return Err(Error::DimensionMismatch("input columns do not match RBF dimension".into()));
        }
        let fallback_ridge = 1e-9 * n as f64;
        let rows: Vec<DVector<f64>> = (0..n).map(|i| x_in.row(i).transpose()).collect();
        let acts = rows.iter().map(|x| rbfs.activations(x)).collect::<Result<Vec<_>>>()?;
        let nf = 1 + rbfs.dim() * config.degree;
        let mut coefficients = Vec::with_capacity(rbfs.len());
        for (k, center) in rbfs.centers().iter().enumerate() {
            let mut feats = DMatrix::zeros(n, nf);
            for (i, x) in rows.iter().enumerate() {
                feats.row_mut(i).copy_from(&poly_features(&(x - center), config.degree).transpose());
            }
            let w: Vec<f64> = acts.iter().map(|a| a[k]).collect();
            let solved = match config.ridge {
                Some(r) => weighted_least_squares(&feats, x_out, &w, r),
                None => match weighted_least_squares(&feats, x_out, &w, 0.0) {
                    Err(Error::SingularSystem(_)) => {
                        log::debug!("local model {k} is singular; using ridge {fallback_ridge:e}");
                        weighted_least_squares(&feats, x_out, &w, fallback_ridge)
                    }
                    other => other,
                },
            };
            let a = solved.map_err(|e| match e {
                Error::SingularSystem(msg) => Error::SingularSystem(format!("local model {k}: {msg}")),
                Error::InvalidParameter(msg) => Error::SingularSystem(format!("local model {k}: {msg}")),
                other => other,
            })?;
            coefficients.push(a);
        }
        Ok(Self { rbfs: rbfs.clone(), coefficients, degree: config.degree })
    }

    /// Blends local predictions with rescaled activations.
    pub fn predict(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let phi = self.rbfs.with_rescaled(true).activations(x)?;
        let mut y = DVector::zeros(self.output_dim());
        for (k, center) in self.rbfs.centers().iter().enumerate() {
            let f = poly_features(&(x - center), self.degree);
            y += self.coefficients[k].tr_mul(&f) * phi[k];
        }
        Ok(y)
    }

    pub fn predict_batch(&self, x_in: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(x_in.nrows(), self.output_dim());
        for i in 0..x_in.nrows() {
            let y = self.predict(&x_in.row(i).transpose())?;
            out.row_mut(i).copy_from(&y.transpose());
        }
        Ok(out)
    }
}
