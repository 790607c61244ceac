//! Multivariate Gaussians and Gaussian mixture models.
//!
//! Every inversion goes through a Cholesky factorization of the covariance
//! loaded with `1e-8 · trace(Σ)/D` on the diagonal (see [`crate::linalg`]).

mod em;

pub use em::{em_fit, EmConfig, FitDiagnostics, InitStrategy};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    log_det_from_cholesky, regularized_cholesky, sampling_factor, select_block, select_vector, symmetrize, Chol,
};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// A multivariate normal distribution with full covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() || cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.is_empty() {
            return Err(Error::InvalidParameter("Gaussian of dimension 0".into()));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Gaussian parameter".into()));
        }
        if !crate::linalg::is_symmetric(&cov, 1e-12) {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov_row_major: &[f64]) -> Result<Self> {
        let d = mean.len();
        if cov_row_major.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "covariance needs {} entries, got {}",
                d * d,
                cov_row_major.len()
            )));
        }
        Self::new(DVector::from_column_slice(mean), DMatrix::from_row_slice(d, d, cov_row_major))
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self { mean: DVector::zeros(dim), cov: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn into_parts(self) -> (DVector<f64>, DMatrix<f64>) {
        (self.mean, self.cov)
    }

    /// Precomputes the factorization used by density evaluations.
    pub fn factor(&self) -> Result<FactoredGaussian> {
        FactoredGaussian::new(self)
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.factor()?.log_pdf(x))
    }

    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Image of the distribution under `x ↦ A x + b`.
    pub fn linear_transform(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Gaussian> {
        if a.ncols() != self.dim() || b.len() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "map is {}x{} with offset {}, Gaussian has dimension {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                self.dim()
            )));
        }
        let mean = a * &self.mean + b;
        let mut cov = a * &self.cov * a.transpose();
        symmetrize(&mut cov);
        Gaussian::new(mean, cov)
    }

    /// Marginal distribution over the given coordinates.
    pub fn marginal(&self, dims: &[usize]) -> Result<Gaussian> {
        if dims.iter().any(|&i| i >= self.dim()) {
            return Err(Error::DimensionMismatch("marginal index out of range".into()));
        }
        Gaussian::new(select_vector(&self.mean, dims), select_block(&self.cov, dims, dims))
    }

    /// Conditional distribution of the output block given the input block.
    pub fn condition(&self, split: &DimensionSplit, x_in: &DVector<f64>) -> Result<Gaussian> {
        let cond = Conditioner::new(self, split)?;
        cond.condition(x_in)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<DVector<f64>> {
        let f = sampling_factor(&self.cov);
        (0..n).map(|_| draw(&self.mean, &f, rng)).collect()
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, Gaussian has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

fn draw<R: Rng + ?Sized>(mean: &DVector<f64>, factor: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    mean + factor * z
}

/// A Gaussian with its regularized Cholesky factor cached.
#[derive(Debug, Clone)]
pub struct FactoredGaussian {
    mean: DVector<f64>,
    chol: Chol,
    log_norm: f64,
}

impl FactoredGaussian {
    pub fn new(g: &Gaussian) -> Result<Self> {
        let chol = regularized_cholesky(&g.cov, "density evaluation")?;
        let log_norm = -0.5 * (g.dim() as f64 * LN_2PI + log_det_from_cholesky(&chol));
        Ok(Self { mean: g.mean.clone(), chol, log_norm })
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        let z = self.chol.l_dirty().solve_lower_triangular(&diff).expect("Cholesky factor has a positive diagonal");
        self.log_norm - 0.5 * z.norm_squared()
    }

    pub fn pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf(x).exp()
    }
}

/// Partition of a joint vector into input and output coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSplit {
    input: Vec<usize>,
    output: Vec<usize>,
}

impl DimensionSplit {
    pub fn new(input: Vec<usize>, output: Vec<usize>) -> Result<Self> {
        if input.is_empty() || output.is_empty() {
            return Err(Error::InvalidParameter("input and output index sets must be non-empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &i in input.iter().chain(output.iter()) {
            if !seen.insert(i) {
                return Err(Error::InvalidParameter(format!("index {i} appears twice in the split")));
            }
        }
        Ok(Self { input, output })
    }

    /// First `n_in` coordinates as inputs, the next `n_out` as outputs.
    pub fn leading(n_in: usize, n_out: usize) -> Result<Self> {
        Self::new((0..n_in).collect(), (n_in..n_in + n_out).collect())
    }

    pub fn input(&self) -> &[usize] {
        &self.input
    }

    pub fn output(&self) -> &[usize] {
        &self.output
    }

    pub fn validate_for(&self, dim: usize) -> Result<()> {
        if let Some(&i) = self.input.iter().chain(self.output.iter()).find(|&&i| i >= dim) {
            return Err(Error::DimensionMismatch(format!("split index {i} out of range for dimension {dim}")));
        }
        Ok(())
    }
}

/// Per-Gaussian precomputation for conditioning on a fixed split.
///
/// The conditional covariance does not depend on the input value, so it is
/// computed once here and reused by every query.
#[derive(Debug, Clone)]
pub struct Conditioner {
    mean_in: DVector<f64>,
    mean_out: DVector<f64>,
    gain: DMatrix<f64>,
    cond_cov: DMatrix<f64>,
    input_density: FactoredGaussian,
}

impl Conditioner {
    pub fn new(g: &Gaussian, split: &DimensionSplit) -> Result<Self> {
        split.validate_for(g.dim())?;
        let (i, o) = (split.input(), split.output());
        let cov_in = select_block(&g.cov, i, i);
        let cov_oi = select_block(&g.cov, o, i);
        let cov_out = select_block(&g.cov, o, o);
        let chol = regularized_cholesky(&cov_in, "input block")
            .map_err(|_| Error::SingularSystem("input-block covariance is singular after regularization".into()))?;
        // gain = Σ^OI (Σ^I)^-1, obtained by solving Σ^I Gᵀ = Σ^IO
        let gain = chol.solve(&cov_oi.transpose()).transpose();
        let mut cond_cov = cov_out - &gain * cov_oi.transpose();
        symmetrize(&mut cond_cov);
        let mean_in = select_vector(&g.mean, i);
        let log_norm = -0.5 * (i.len() as f64 * LN_2PI + log_det_from_cholesky(&chol));
        Ok(Self {
            mean_out: select_vector(&g.mean, o),
            gain,
            cond_cov,
            input_density: FactoredGaussian { mean: mean_in.clone(), chol, log_norm },
            mean_in,
        })
    }

    pub fn conditional_mean(&self, x_in: &DVector<f64>) -> DVector<f64> {
        &self.mean_out + &self.gain * (x_in - &self.mean_in)
    }

    pub fn conditional_covariance(&self) -> &DMatrix<f64> {
        &self.cond_cov
    }

    /// log N(x_in | μ^I, Σ^I).
    pub fn input_log_density(&self, x_in: &DVector<f64>) -> f64 {
        self.input_density.log_pdf(x_in)
    }

    pub fn condition(&self, x_in: &DVector<f64>) -> Result<Gaussian> {
        if x_in.len() != self.mean_in.len() {
            return Err(Error::DimensionMismatch(format!(
                "input has length {}, split expects {}",
                x_in.len(),
                self.mean_in.len()
            )));
        }
        Gaussian::new(self.conditional_mean(x_in), self.cond_cov.clone())
    }
}

/// Weighted list of Gaussians of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    components: Vec<Gaussian>,
    priors: Vec<f64>,
}

impl MixtureModel {
    pub fn new(components: Vec<Gaussian>, priors: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        if components.len() != priors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} components but {} priors",
                components.len(),
                priors.len()
            )));
        }
        let d = components[0].dim();
        if components.iter().any(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch("mixture components differ in dimension".into()));
        }
        if priors.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("priors must be finite and nonnegative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("priors sum to {total}, expected 1")));
        }
        Ok(Self { components, priors })
    }

    /// Builds a mixture after rescaling `weights` to sum to one.
    pub fn from_weights(components: Vec<Gaussian>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("mixture weights sum to zero".into()));
        }
        Self::new(components, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn single(g: Gaussian) -> Self {
        Self { components: vec![g], priors: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.len());
        for (g, &p) in self.components.iter().zip(&self.priors) {
            terms.push(p.ln() + g.log_pdf(x)?);
        }
        Ok(log_sum_exp(&terms))
    }

    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Moment-matched single Gaussian (law of total mean and covariance).
    pub fn moment_match(&self) -> Gaussian {
        let d = self.dim();
        let mut mean = DVector::zeros(d);
        for (g, &h) in self.components.iter().zip(&self.priors) {
            mean += g.mean() * h;
        }
        let mut cov = DMatrix::zeros(d, d);
        for (g, &h) in self.components.iter().zip(&self.priors) {
            cov += (g.covariance() + g.mean() * g.mean().transpose()) * h;
        }
        cov -= &mean * mean.transpose();
        symmetrize(&mut cov);
        Gaussian { mean, cov }
    }

    /// Applies the same affine map to every component, keeping the priors.
    pub fn linear_transform(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<MixtureModel> {
        let comps = self.components.iter().map(|g| g.linear_transform(a, b)).collect::<Result<Vec<_>>>()?;
        Ok(Self { components: comps, priors: self.priors.clone() })
    }

    /// Draws `n` points; deterministic for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_with(&mut rng, n))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<DVector<f64>> {
        let factors: Vec<_> = self.components.iter().map(|g| sampling_factor(&g.cov)).collect();
        let mut cumulative = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        for &p in &self.priors {
            acc += p;
            cumulative.push(acc);
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let k = cumulative.iter().position(|&c| u < c).unwrap_or(self.len() - 1);
                draw(&self.components[k].mean, &factors[k], rng)
            })
            .collect()
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Standard normal density, used by tests and plotting.
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}
