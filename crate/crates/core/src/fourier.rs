//! Fourier bases over the periodic domain `[−L/2, L/2]^D` and analytic
//! Fourier coefficients of Gaussian mixtures.
//!
//! A mixture given on `[0, L/2]^D` is mirrored across every coordinate axis,
//! which makes the density even. Its Fourier coefficients are then real and
//! only the non-negative indices `k ∈ {0..K−1}^D` need to be stored. The
//! D-dimensional pipeline is entirely real; complex arithmetic only appears in
//! the 1-D shift property and in the cross-check [`gmm_coeffs_complex`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussians::{Gaussian, MixtureModel};

/// Periodic domain with `k_per_dim` coefficients along each of `dim` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierDomain {
    period: f64,
    dim: usize,
    k_per_dim: usize,
}

impl FourierDomain {
    pub fn new(period: f64, dim: usize, k_per_dim: usize) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        if dim == 0 || k_per_dim == 0 {
            return Err(Error::InvalidParameter("dimension and coefficient count must be at least 1".into()));
        }
        let total = (k_per_dim as u128).checked_pow(dim as u32);
        if total.is_none_or(|t| t > (1u128 << 26)) {
            return Err(Error::InvalidParameter(format!("index set {k_per_dim}^{dim} is too large")));
        }
        Ok(Self { period, dim, k_per_dim })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_per_dim(&self) -> usize {
        self.k_per_dim
    }

    /// Number of index vectors, `K^D`.
    pub fn len(&self) -> usize {
        self.k_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index vector at a row-major flat position (last axis fastest).
    pub fn index(&self, flat: usize) -> Vec<usize> {
        let mut k = vec![0; self.dim];
        let mut rem = flat;
        for d in (0..self.dim).rev() {
            k[d] = rem % self.k_per_dim;
            rem /= self.k_per_dim;
        }
        k
    }

    pub fn flat(&self, k: &[usize]) -> usize {
        k.iter().fold(0, |acc, &kd| acc * self.k_per_dim + kd)
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(move |i| self.index(i))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!("point has dimension {}, domain has {}", x.len(), self.dim)));
        }
        Ok(())
    }

    fn check_index(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.dim || k.iter().any(|&kd| kd >= self.k_per_dim) {
            return Err(Error::InvalidParameter(format!("index {k:?} outside the coefficient set")));
        }
        Ok(())
    }
}

/// Coefficients over the index set of a [`FourierDomain`], flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffArray {
    dim: usize,
    k_per_dim: usize,
    values: Vec<f64>,
}

impl CoeffArray {
    pub fn new(dom: &FourierDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != dom.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for an index set of size {}",
                values.len(),
                dom.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Fourier coefficient".into()));
        }
        Ok(Self { dim: dom.dim, k_per_dim: dom.k_per_dim, values })
    }

    pub fn zeros(dom: &FourierDomain) -> Self {
        Self { dim: dom.dim, k_per_dim: dom.k_per_dim, values: vec![0.0; dom.len()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn matches(&self, dom: &FourierDomain) -> bool {
        self.dim == dom.dim && self.k_per_dim == dom.k_per_dim
    }

    fn same_shape(&self, other: &CoeffArray) -> bool {
        self.dim == other.dim && self.k_per_dim == other.k_per_dim
    }
}

/// `(1/L) exp(−i 2π k x / L)`.
pub fn basis_1d(x: f64, k: i64, period: f64) -> Complex64 {
    Complex64::from_polar(1.0 / period, -2.0 * PI * k as f64 * x / period)
}

/// Real cosine-product basis `(1/L^D) Π_d cos(2π k_d x_d / L)`.
pub fn basis_nd(x: &[f64], k: &[usize], dom: &FourierDomain) -> Result<f64> {
    dom.check_point(x)?;
    dom.check_index(k)?;
    let w = 2.0 * PI / dom.period;
    let prod: f64 = x.iter().zip(k).map(|(&xd, &kd)| (w * kd as f64 * xd).cos()).product();
    Ok(prod / dom.period.powi(dom.dim as i32))
}

/// Analytic gradient of [`basis_nd`] with respect to `x`.
pub fn grad_basis_nd(x: &[f64], k: &[usize], dom: &FourierDomain) -> Result<DVector<f64>> {
    dom.check_point(x)?;
    dom.check_index(k)?;
    let w = 2.0 * PI / dom.period;
    let scale = 1.0 / dom.period.powi(dom.dim as i32);
    let cos: Vec<f64> = x.iter().zip(k).map(|(&xd, &kd)| (w * kd as f64 * xd).cos()).collect();
    Ok(DVector::from_fn(dom.dim, |d, _| {
        let kd = k[d] as f64;
        let mut g = -w * kd * (w * kd * x[d]).sin();
        for (e, c) in cos.iter().enumerate() {
            if e != d {
                g *= c;
            }
        }
        g * scale
    }))
}

/// Per-axis cosine and sine tables `cos/sin(2π k x_d / L)` for `k < K`.
fn trig_tables(x: &[f64], dom: &FourierDomain) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let w = 2.0 * PI / dom.period;
    let cos = x.iter().map(|&xd| (0..dom.k_per_dim).map(|k| (w * k as f64 * xd).cos()).collect()).collect();
    let sin = x.iter().map(|&xd| (0..dom.k_per_dim).map(|k| (w * k as f64 * xd).sin()).collect()).collect();
    (cos, sin)
}

/// All basis values at `x`, in flat index order.
pub fn basis_all(x: &[f64], dom: &FourierDomain) -> Result<Vec<f64>> {
    dom.check_point(x)?;
    let (cos, _) = trig_tables(x, dom);
    let scale = 1.0 / dom.period.powi(dom.dim as i32);
    Ok((0..dom.len())
        .map(|i| {
            let k = dom.index(i);
            k.iter().enumerate().map(|(d, &kd)| cos[d][kd]).product::<f64>() * scale
        })
        .collect())
}

/// All basis gradients at `x` as a `D × K^D` matrix.
pub fn grad_basis_all(x: &[f64], dom: &FourierDomain) -> Result<DMatrix<f64>> {
    dom.check_point(x)?;
    let (cos, sin) = trig_tables(x, dom);
    let w = 2.0 * PI / dom.period;
    let scale = 1.0 / dom.period.powi(dom.dim as i32);
    let mut out = DMatrix::zeros(dom.dim, dom.len());
    for i in 0..dom.len() {
        let k = dom.index(i);
        for d in 0..dom.dim {
            let mut g = -w * k[d] as f64 * sin[d][k[d]];
            for e in 0..dom.dim {
                if e != d {
                    g *= cos[e][k[e]];
                }
            }
            out[(d, i)] = g * scale;
        }
    }
    Ok(out)
}

/// Diagonal sign matrices `A_m` of all `2^D` sign patterns.
///
/// Pattern `m` has sign `+1` on axis `d` when bit `D−1−d` of `m` is set, so
/// in 2-D the order is diag(−1,−1), diag(−1,1), diag(1,−1), diag(1,1). The
/// first `2^(D−1)` patterns all start with −1 and are the negatives of the
/// last `2^(D−1)` ones.
pub fn sign_patterns(dim: usize) -> Vec<Vec<f64>> {
    (0..1usize << dim)
        .map(|m| (0..dim).map(|d| if (m >> (dim - 1 - d)) & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect()
}

fn sign_matrix(signs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(signs))
}

/// Even extension of a mixture on `[0, L/2]^D`: `2^D·J` components with
/// weights `α_j / 2^D`, means `A_m μ_j` and covariances `A_m Σ_j A_mᵀ`.
pub fn mirror_gmm(m: &MixtureModel, dom: &FourierDomain) -> Result<MixtureModel> {
    if m.dim() != dom.dim {
        return Err(Error::DimensionMismatch(format!("mixture has dimension {}, domain has {}", m.dim(), dom.dim)));
    }
    let half = dom.period / 2.0;
    if m.components().iter().any(|g| g.mean().iter().any(|&v| !(0.0..=half).contains(&v))) {
        log::warn!("mixture means lie outside [0, {half}]^{}; mirroring anyway", dom.dim);
    }
    let patterns = sign_patterns(dom.dim);
    let scale = 1.0 / patterns.len() as f64;
    let zero = DVector::zeros(dom.dim);
    let mut comps = Vec::with_capacity(m.len() * patterns.len());
    let mut weights = Vec::with_capacity(comps.capacity());
    for (g, &alpha) in m.components().iter().zip(m.priors()) {
        for s in &patterns {
            comps.push(g.linear_transform(&sign_matrix(s), &zero)?);
            weights.push(alpha * scale);
        }
    }
    MixtureModel::from_weights(comps, weights)
}

/// Analytic Fourier coefficients of the mirrored mixture, using the
/// `2^(D−1)` sign patterns that are distinct up to a global sign:
///
/// `ŵ_k = (1/L^D) Σ_j Σ_m (α_j/2^(D−1)) cos(2π kᵀA_mμ_j/L) exp(−2π² kᵀA_mΣ_jA_mᵀk/L²)`.
pub fn gmm_coeffs(m: &MixtureModel, dom: &FourierDomain) -> Result<CoeffArray> {
    if m.dim() != dom.dim {
        return Err(Error::DimensionMismatch(format!("mixture has dimension {}, domain has {}", m.dim(), dom.dim)));
    }
    let l = dom.period;
    let patterns = sign_patterns(dom.dim);
    let half = &patterns[..patterns.len() / 2];
    let pattern_weight = 1.0 / half.len() as f64;
    let scale = 1.0 / l.powi(dom.dim as i32);
    let mut values = vec![0.0; dom.len()];
    for (flat, v) in values.iter_mut().enumerate() {
        let k: Vec<f64> = dom.index(flat).into_iter().map(|kd| kd as f64).collect();
        let mut acc = 0.0;
        for (g, &alpha) in m.components().iter().zip(m.priors()) {
            for s in half {
                let ka: DVector<f64> = DVector::from_iterator(dom.dim, k.iter().zip(s).map(|(a, b)| a * b));
                let phase = 2.0 * PI * ka.dot(g.mean()) / l;
                let quad = (ka.transpose() * g.covariance() * &ka)[(0, 0)];
                acc += alpha * pattern_weight * phase.cos() * (-2.0 * PI * PI * quad / (l * l)).exp();
            }
        }
        *v = acc * scale;
    }
    CoeffArray::new(dom, values)
}

/// Same coefficients through the full complex sum over all `2^D` patterns.
/// The imaginary parts cancel by symmetry; returned as-is for checking.
pub fn gmm_coeffs_complex(m: &MixtureModel, dom: &FourierDomain) -> Result<Vec<Complex64>> {
    let mirrored = mirror_gmm(m, dom)?;
    let l = dom.period;
    let scale = 1.0 / l.powi(dom.dim as i32);
    Ok((0..dom.len())
        .map(|flat| {
            let k = DVector::from_iterator(dom.dim, dom.index(flat).into_iter().map(|kd| kd as f64));
            let mut acc = Complex64::new(0.0, 0.0);
            for (g, &alpha) in mirrored.components().iter().zip(mirrored.priors()) {
                let phase = -2.0 * PI * k.dot(g.mean()) / l;
                let quad = (k.transpose() * g.covariance() * &k)[(0, 0)];
                acc += Complex64::from_polar(alpha, phase) * (-2.0 * PI * PI * quad / (l * l)).exp();
            }
            acc * scale
        })
        .collect())
}

/// Coefficients of `g(x − μ)` from those of `g(x)` (1-D, `k = 0..K−1`).
pub fn shift_coeffs(w: &[Complex64], mu: f64, dom: &FourierDomain) -> Result<Vec<Complex64>> {
    if dom.dim != 1 {
        return Err(Error::InvalidParameter("the shift property is implemented for 1-D domains".into()));
    }
    if w.len() != dom.k_per_dim {
        return Err(Error::DimensionMismatch(format!("{} coefficients for K = {}", w.len(), dom.k_per_dim)));
    }
    Ok(w.iter()
        .enumerate()
        .map(|(k, &c)| c * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * mu / dom.period))
        .collect())
}

/// `a1·w1 + a2·w2`, the coefficients of `a1·g1 + a2·g2`.
pub fn combine_coeffs(w1: &CoeffArray, w2: &CoeffArray, a1: f64, a2: f64) -> Result<CoeffArray> {
    if !w1.same_shape(w2) {
        return Err(Error::DimensionMismatch("coefficient arrays come from different domains".into()));
    }
    Ok(CoeffArray {
        dim: w1.dim,
        k_per_dim: w1.k_per_dim,
        values: w1.values.iter().zip(&w2.values).map(|(a, b)| a1 * a + a2 * b).collect(),
    })
}

/// Evaluates the even Fourier series
/// `g(x) = Σ_k ŵ_k Π_d c_d(k_d, x_d)` with `c = 1` for `k_d = 0` and
/// `2 cos(2π k_d x_d / L)` otherwise.
pub fn reconstruct(w: &CoeffArray, x: &[f64], dom: &FourierDomain) -> Result<f64> {
    if !w.matches(dom) {
        return Err(Error::DimensionMismatch("coefficients do not match the domain".into()));
    }
    dom.check_point(x)?;
    let (cos, _) = trig_tables(x, dom);
    Ok(w.values
        .iter()
        .enumerate()
        .map(|(i, &wk)| {
            let k = dom.index(i);
            wk * k.iter().enumerate().map(|(d, &kd)| if kd == 0 { 1.0 } else { 2.0 * cos[d][kd] }).product::<f64>()
        })
        .sum())
}

/// Density of the mixture after mirroring and periodic summation over
/// `±images` periods per axis; what [`reconstruct`] approximates.
pub fn periodized_density(m: &MixtureModel, dom: &FourierDomain, x: &[f64], images: i32) -> Result<f64> {
    let mirrored = mirror_gmm(m, dom)?;
    let factored = mirrored.components().iter().map(Gaussian::factor).collect::<Result<Vec<_>>>()?;
    let d = dom.dim;
    let span = (2 * images + 1) as usize;
    let mut total = 0.0;
    for shift in 0..span.pow(d as u32) {
        let mut rem = shift;
        let p = DVector::from_fn(d, |i, _| {
            let o = (rem % span) as i32 - images;
            rem /= span;
            x[i] + o as f64 * dom.period
        });
        for (f, &a) in factored.iter().zip(mirrored.priors()) {
            total += a * f.pdf(&p);
        }
    }
    Ok(total)
}
