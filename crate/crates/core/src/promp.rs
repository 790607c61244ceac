//! Probabilistic movement primitives (ProMP) and related trajectory
//! distributions.
//!
//! A demonstration of `T` samples in `D` dimensions is stacked time-major
//! into a vector of length `DT` and modeled as `x = Ψ w + ε`, where
//! `Ψ = φ ⊗ I_D` is built from `K` basis functions of a phase variable in
//! `[0, 1]`. Weight vectors are stacked basis-major: entry `k·D + d` is the
//! weight of basis `k` on dimension `d`.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bezier::bernstein_all;
use crate::error::{Error, Result};
use crate::gaussians::{em_fit, EmConfig, Gaussian, MixtureModel};
use crate::linalg::{sampling_factor, symmetrize, weighted_lstsq, REG_RELATIVE};
use crate::lwr::RbfSet;
use crate::trajectory::{Trajectory, TrajectorySet};

/// Basis functions of the phase variable.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisFamily {
    /// Rescaled Gaussian RBFs with a shared variance.
    Radial { centers: Vec<f64>, bandwidth: f64 },
    /// Bernstein polynomials of degree `K − 1`.
    Bernstein { degree: usize },
    /// Real Fourier basis `1, cos(2πt/P), sin(2πt/P), cos(4πt/P), …`
    /// truncated to `count` functions.
    Fourier { period: f64, count: usize },
}

impl BasisFamily {
    /// `k` RBFs evenly covering `[0, 1]` with σ² = (1/k)².
    pub fn radial(k: usize) -> Self {
        let centers = if k == 1 { vec![0.5] } else { (0..k).map(|i| i as f64 / (k - 1) as f64).collect() };
        let w = 1.0 / k.max(1) as f64;
        Self::Radial { centers, bandwidth: w * w }
    }

    pub fn bernstein(k: usize) -> Self {
        Self::Bernstein { degree: k.saturating_sub(1) }
    }

    /// `k` real Fourier functions with period 2, so that `[0, 1]` is half a
    /// period and the ends need not match.
    pub fn fourier(k: usize) -> Self {
        Self::Fourier { period: 2.0, count: k }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Radial { .. } => "radial",
            Self::Bernstein { .. } => "bernstein",
            Self::Fourier { .. } => "fourier",
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Self::Radial { centers, .. } => centers.len(),
            Self::Bernstein { degree } => degree + 1,
            Self::Fourier { count, .. } => *count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Radial { centers, bandwidth } => {
                if centers.is_empty() || !(*bandwidth > 0.0) || centers.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("radial family needs centers and a positive bandwidth".into()));
                }
            }
            Self::Bernstein { .. } => {}
            Self::Fourier { period, count } => {
                if *count == 0 || !(*period > 0.0) {
                    return Err(Error::InvalidParameter("Fourier family needs count ≥ 1 and a positive period".into()));
                }
            }
        }
        Ok(())
    }

    /// The `K` basis values at phase `t`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Self::Radial { centers, bandwidth } => {
                let logs: Vec<f64> = centers.iter().map(|c| -0.5 * (t - c).powi(2) / bandwidth).collect();
                let lse = crate::gaussians::log_sum_exp(&logs);
                logs.iter().map(|l| (l - lse).exp()).collect()
            }
            Self::Bernstein { degree } => bernstein_all(*degree, t.clamp(0.0, 1.0)),
            Self::Fourier { period, count } => (0..*count)
                .map(|j| {
                    if j == 0 {
                        1.0
                    } else {
                        let f = 2.0 * PI * j.div_ceil(2) as f64 * t / period;
                        if j % 2 == 1 {
                            f.cos()
                        } else {
                            f.sin()
                        }
                    }
                })
                .collect(),
        }
    }

    /// `T × K` matrix of basis values.
    pub fn matrix(&self, times: &[f64]) -> DMatrix<f64> {
        let k = self.count();
        let mut m = DMatrix::zeros(times.len(), k);
        for (r, &t) in times.iter().enumerate() {
            for (c, v) in self.eval(t).into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Radial family as an [`RbfSet`] (rescaled), for code shared with LWR.
    pub fn as_rbf_set(&self) -> Option<RbfSet> {
        match self {
            Self::Radial { centers, bandwidth } => RbfSet::new(
                centers.iter().map(|&c| DVector::from_element(1, c)).collect(),
                crate::lwr::Bandwidth::Isotropic(*bandwidth),
                true,
            )
            .ok(),
            _ => None,
        }
    }
}

/// `Ψ = φ ⊗ I_D`, of size `DT × DK`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMatrix {
    values: DMatrix<f64>,
    phi: DMatrix<f64>,
    dim: usize,
}

impl PsiMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// The underlying `T × K` basis matrix.
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn steps(&self) -> usize {
        self.phi.nrows()
    }

    pub fn basis_count(&self) -> usize {
        self.phi.ncols()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row of Ψ for time step `t` and coordinate `d`.
    pub fn row(&self, t: usize, d: usize) -> DVector<f64> {
        self.values.row(t * self.dim + d).transpose()
    }
}

pub fn build_psi(family: &BasisFamily, times: &[f64], dim: usize) -> Result<PsiMatrix> {
    family.validate()?;
    if times.is_empty() {
        return Err(Error::InvalidParameter("Ψ needs at least one time sample".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("Ψ needs a positive dimension".into()));
    }
    let phi = family.matrix(times);
    let (t, k) = phi.shape();
    let mut values = DMatrix::zeros(dim * t, dim * k);
    for r in 0..t {
        for c in 0..k {
            for d in 0..dim {
                values[(r * dim + d, c * dim + d)] = phi[(r, c)];
            }
        }
    }
    Ok(PsiMatrix { values, phi, dim })
}

/// Phase samples `0, 1/(T−1), …, 1`.
pub fn phase(steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![0.0];
    }
    (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect()
}

/// A soft constraint on the trajectory: coordinate `dim` at step
/// `time_index` observed as `value` with variance `noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViaPoint {
    pub time_index: usize,
    pub dim: usize,
    pub value: f64,
    pub noise: f64,
}

impl FromStr for ViaPoint {
    type Err = Error;

    /// Parses `t_index:dim=value@noise`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("via-point '{s}' is not of the form t_index:dim=value@noise"));
        let (t, rest) = s.split_once(':').ok_or_else(bad)?;
        let (d, rest) = rest.split_once('=').ok_or_else(bad)?;
        let (v, n) = rest.split_once('@').ok_or_else(bad)?;
        let vp = ViaPoint {
            time_index: t.trim().parse().map_err(|_| bad())?,
            dim: d.trim().parse().map_err(|_| bad())?,
            value: v.trim().parse().map_err(|_| bad())?,
            noise: n.trim().parse().map_err(|_| bad())?,
        };
        if !(vp.noise >= 0.0) || !vp.value.is_finite() {
            return Err(bad());
        }
        Ok(vp)
    }
}

/// A fitted ProMP: `x ~ N(Ψ μ^w, Ψ Σ^w Ψᵀ + σ² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProMP {
    family: BasisFamily,
    psi: PsiMatrix,
    mu_w: DVector<f64>,
    sigma_w: DMatrix<f64>,
    sigma2: f64,
}

fn regularize_weight_cov(cov: &mut DMatrix<f64>, mu: &DVector<f64>) {
    let n = cov.nrows();
    let mut lambda = REG_RELATIVE * cov.trace() / n as f64;
    if !(lambda > 0.0) {
        // identical demonstrations: scale the floor on the weights themselves
        lambda = REG_RELATIVE * (mu.norm_squared() / n as f64).max(1e-4);
    }
    for i in 0..n {
        cov[(i, i)] += lambda;
    }
}

/// Least-squares weights for every demonstration, basis-major layout.
fn demo_weights(set: &TrajectorySet, psi: &PsiMatrix, family: &BasisFamily) -> Result<Vec<DVector<f64>>> {
    let ones = vec![1.0; psi.steps()];
    let (k, d) = (psi.basis_count(), psi.dim());
    set.trajectories()
        .iter()
        .map(|tr| {
            let w = weighted_lstsq(psi.phi(), tr.points(), &ones, 0.0).map_err(|e| match e {
                Error::SingularSystem(detail) => Error::RankDeficient {
                    family: family.name().to_string(),
                    detail: format!("K = {k}, T = {}: {detail}", psi.steps()),
                },
                other => other,
            })?;
            Ok(DVector::from_fn(k * d, |i, _| w[(i / d, i % d)]))
        })
        .collect()
}

fn prepare(set: &TrajectorySet, family: &BasisFamily, steps: Option<usize>) -> Result<(TrajectorySet, PsiMatrix)> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("no demonstrations".into()));
    }
    let steps = steps.unwrap_or_else(|| set.trajectories()[0].len());
    let aligned = set.resampled(steps)?;
    let psi = build_psi(family, &phase(steps), set.dim().unwrap())?;
    Ok((aligned, psi))
}

impl ProMP {
    pub fn from_parts(
        family: BasisFamily,
        steps: usize,
        dim: usize,
        mu_w: DVector<f64>,
        sigma_w: DMatrix<f64>,
        sigma2: f64,
    ) -> Result<Self> {
        let psi = build_psi(&family, &phase(steps), dim)?;
        let n = psi.values.ncols();
        if mu_w.len() != n || sigma_w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("weight distribution must have dimension {n}")));
        }
        if !crate::linalg::is_symmetric(&sigma_w, 1e-12) {
            return Err(Error::InvalidParameter("Σ^w is not symmetric".into()));
        }
        if !(sigma2 >= 0.0) {
            return Err(Error::InvalidParameter("σ² must be nonnegative".into()));
        }
        Ok(Self { family, psi, mu_w, sigma_w, sigma2 })
    }

    /// Fits the weight distribution to demonstrations resampled to `steps`
    /// samples (default: the length of the first demonstration).
    pub fn fit(set: &TrajectorySet, family: &BasisFamily, steps: Option<usize>) -> Result<Self> {
        let (aligned, psi) = prepare(set, family, steps)?;
        let weights = demo_weights(&aligned, &psi, family)?;
        let m = weights.len() as f64;
        let n = weights[0].len();
        let mut mu_w = DVector::zeros(n);
        for w in &weights {
            mu_w += w;
        }
        mu_w /= m;
        let mut sigma_w = DMatrix::zeros(n, n);
        for w in &weights {
            let diff = w - &mu_w;
            sigma_w.ger(1.0 / m, &diff, &diff, 1.0);
        }
        symmetrize(&mut sigma_w);
        regularize_weight_cov(&mut sigma_w, &mu_w);

        let mut sq = 0.0;
        for (tr, w) in aligned.trajectories().iter().zip(&weights) {
            sq += (tr.flatten() - &psi.values * w).norm_squared();
        }
        let sigma2 = sq / (m * psi.values.nrows() as f64);
        Ok(Self { family: family.clone(), psi, mu_w, sigma_w, sigma2 })
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn psi(&self) -> &PsiMatrix {
        &self.psi
    }

    pub fn mu_w(&self) -> &DVector<f64> {
        &self.mu_w
    }

    pub fn sigma_w(&self) -> &DMatrix<f64> {
        &self.sigma_w
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn steps(&self) -> usize {
        self.psi.steps()
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    /// Least-squares weights of one demonstration (resampled to `T`).
    pub fn project(&self, tr: &Trajectory) -> Result<DVector<f64>> {
        let set = TrajectorySet::new(vec![tr.resample(self.steps())?])?;
        Ok(demo_weights(&set, &self.psi, &self.family)?.remove(0))
    }

    pub fn reconstruct(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.psi.values * w
    }

    /// `N(Ψ μ^w, Ψ Σ^w Ψᵀ + σ² I)`.
    pub fn trajectory_distribution(&self) -> Gaussian {
        let psi = &self.psi.values;
        let mut cov = psi * &self.sigma_w * psi.transpose();
        for i in 0..cov.nrows() {
            cov[(i, i)] += self.sigma2;
        }
        symmetrize(&mut cov);
        Gaussian::new(psi * &self.mu_w, cov).expect("Ψ Σ^w Ψᵀ is symmetric")
    }

    /// Noise-free part `Ψ Σ^w Ψᵀ` of the trajectory covariance.
    pub fn structured_covariance(&self) -> DMatrix<f64> {
        let psi = &self.psi.values;
        let mut cov = psi * &self.sigma_w * psi.transpose();
        symmetrize(&mut cov);
        cov
    }

    pub fn mean_trajectory(&self) -> Result<Trajectory> {
        Trajectory::from_flat(phase(self.steps()), &(&self.psi.values * &self.mu_w), self.dim())
    }

    /// Conditions the weight distribution on via-points observed through the
    /// noise-free process `Ψ w` with their own noise variances. The result
    /// keeps this model's `σ²`.
    pub fn condition_via_points(&self, constraints: &[ViaPoint]) -> Result<ProMP> {
        if constraints.is_empty() {
            return Ok(self.clone());
        }
        let n = self.mu_w.len();
        let c = constraints.len();
        let mut h = DMatrix::zeros(c, n);
        let mut y = DVector::zeros(c);
        for (r, vp) in constraints.iter().enumerate() {
            if vp.time_index >= self.steps() || vp.dim >= self.dim() {
                return Err(Error::InvalidParameter(format!(
                    "via-point at step {} dim {} is outside T = {}, D = {}",
                    vp.time_index,
                    vp.dim,
                    self.steps(),
                    self.dim()
                )));
            }
            if !(vp.noise >= 0.0) {
                return Err(Error::InvalidParameter("via-point noise must be nonnegative".into()));
            }
            h.row_mut(r).copy_from(&self.psi.row(vp.time_index, vp.dim).transpose());
            y[r] = vp.value;
        }
        let sh = &self.sigma_w * h.transpose();
        let mut s = &h * &sh;
        for (r, vp) in constraints.iter().enumerate() {
            s[(r, r)] += vp.noise;
        }
        symmetrize(&mut s);
        let chol =
            Cholesky::new(s).ok_or_else(|| Error::SingularSystem("constrained block covariance is singular".into()))?;
        let innovation = y - &h * &self.mu_w;
        let mu_w = &self.mu_w + &sh * chol.solve(&innovation);
        let mut sigma_w = &self.sigma_w - &sh * chol.solve(&sh.transpose());
        symmetrize(&mut sigma_w);
        Ok(ProMP { mu_w, sigma_w, ..self.clone() })
    }

    /// Draws `w ~ N(μ^w, Σ^w)` and emits `Ψ w` plus `σ²` observation noise.
    pub fn sample_trajectories(&self, n: usize, seed: u64) -> Result<TrajectorySet> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = sampling_factor(&self.sigma_w);
        let sd = self.sigma2.sqrt();
        let times = phase(self.steps());
        let out = (0..n)
            .map(|_| {
                let z = DVector::from_fn(self.mu_w.len(), |_, _| StandardNormal.sample(&mut rng));
                let w = &self.mu_w + &factor * z;
                let mut x = &self.psi.values * w;
                if sd > 0.0 {
                    for v in x.iter_mut() {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        *v += sd * e;
                    }
                }
                Trajectory::from_flat(times.clone(), &x, self.dim())
            })
            .collect::<Result<Vec<_>>>()?;
        TrajectorySet::new(out)
    }
}

/// Principal-component trajectory model `N(mean + Ψ z, Ψ Ψᵀ)` with
/// `z ~ N(0, I)` and `Ψ = [v_1 λ_1, …, v_r λ_r]`.
#[derive(Debug, Clone)]
pub struct PcaModel {
    mean: DVector<f64>,
    psi: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    steps: usize,
    dim: usize,
    truncated: bool,
}

impl PcaModel {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// Retained covariance eigenvalues, non-increasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn components(&self) -> usize {
        self.psi.ncols()
    }

    /// True when fewer positive eigenvalues existed than were requested.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whitened coordinates of a stacked trajectory.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let centered = x - &self.mean;
        let mut z = self.psi.tr_mul(&centered);
        for (zi, &lam) in z.iter_mut().zip(&self.eigenvalues) {
            *zi /= lam;
        }
        z
    }

    pub fn reconstruct(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.mean + &self.psi * z
    }

    pub fn distribution(&self) -> Gaussian {
        let mut cov = &self.psi * self.psi.transpose();
        symmetrize(&mut cov);
        Gaussian::new(self.mean.clone(), cov).expect("Ψ Ψᵀ is symmetric")
    }
}

/// Eigendecomposition model keeping the `components` leading directions of
/// the raw `DT × DT` sample covariance.
pub fn pca_distribution(set: &TrajectorySet, components: usize, steps: Option<usize>) -> Result<PcaModel> {
    if set.len() < 2 {
        return Err(Error::InvalidParameter("PCA needs at least two demonstrations".into()));
    }
    if components == 0 {
        return Err(Error::InvalidParameter("PCA needs at least one component".into()));
    }
    let steps = steps.unwrap_or_else(|| set.trajectories()[0].len());
    let aligned = set.resampled(steps)?;
    let dim = set.dim().unwrap();
    let xs: Vec<DVector<f64>> = aligned.trajectories().iter().map(Trajectory::flatten).collect();
    let n = xs[0].len();
    let m = xs.len() as f64;
    let mut mean = DVector::zeros(n);
    for x in &xs {
        mean += x;
    }
    mean /= m;
    let mut cov = DMatrix::zeros(n, n);
    for x in &xs {
        let d = x - &mean;
        cov.ger(1.0 / m, &d, &d, 1.0);
    }
    symmetrize(&mut cov);
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let floor = top * 1e-12;
    let positive = order.iter().take_while(|&&i| eig.eigenvalues[i] > floor).count();
    let keep = components.min(positive);
    let truncated = keep < components;
    if truncated {
        log::warn!("only {positive} positive eigenvalues; keeping {keep} of {components} components");
    }
    let mut psi = DMatrix::zeros(n, keep);
    let mut eigenvalues = Vec::with_capacity(keep);
    for (j, &i) in order.iter().take(keep).enumerate() {
        let lam = eig.eigenvalues[i];
        psi.set_column(j, &(eig.eigenvectors.column(i) * lam.sqrt()));
        eigenvalues.push(lam);
    }
    // project() divides by λ_j after multiplying by Ψᵀ = diag(√λ) Vᵀ
    Ok(PcaModel { mean, psi, eigenvalues, steps, dim, truncated })
}

/// Mixture of ProMPs sharing one basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrompMixture {
    family: BasisFamily,
    psi: PsiMatrix,
    weights: MixtureModel,
    sigma2: f64,
}

impl PrompMixture {
    pub fn from_parts(
        family: BasisFamily,
        steps: usize,
        dim: usize,
        weights: MixtureModel,
        sigma2: f64,
    ) -> Result<Self> {
        let psi = build_psi(&family, &phase(steps), dim)?;
        if weights.dim() != psi.values.ncols() {
            return Err(Error::DimensionMismatch(format!("weight mixture must have dimension {}", psi.values.ncols())));
        }
        if !(sigma2 >= 0.0) {
            return Err(Error::InvalidParameter("σ² must be nonnegative".into()));
        }
        Ok(Self { family, psi, weights, sigma2 })
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn psi(&self) -> &PsiMatrix {
        &self.psi
    }

    /// Mixture over weight vectors.
    pub fn weight_mixture(&self) -> &MixtureModel {
        &self.weights
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Component `j` as a standalone ProMP.
    pub fn component(&self, j: usize) -> Result<ProMP> {
        let g = self
            .weights
            .components()
            .get(j)
            .ok_or_else(|| Error::InvalidParameter(format!("mixture has {} components", self.weights.len())))?;
        Ok(ProMP {
            family: self.family.clone(),
            psi: self.psi.clone(),
            mu_w: g.mean().clone(),
            sigma_w: g.covariance().clone(),
            sigma2: self.sigma2,
        })
    }

    /// The mixture mapped to trajectory space through Ψ, plus `σ² I`.
    pub fn trajectory_mixture(&self) -> Result<MixtureModel> {
        let n = self.psi.values.nrows();
        let mapped = self.weights.linear_transform(&self.psi.values, &DVector::zeros(n))?;
        let comps = mapped
            .components()
            .iter()
            .map(|g| {
                let mut cov = g.covariance().clone();
                for i in 0..n {
                    cov[(i, i)] += self.sigma2;
                }
                Gaussian::new(g.mean().clone(), cov)
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureModel::new(comps, self.weights.priors().to_vec())
    }
}

/// Fits `j` ProMPs by running EM on the per-demonstration weight vectors.
pub fn promp_mixture(
    set: &TrajectorySet,
    family: &BasisFamily,
    j: usize,
    steps: Option<usize>,
    em: &EmConfig,
) -> Result<PrompMixture> {
    if set.len() < j {
        return Err(Error::InvalidParameter(format!("{} demonstrations cannot support {j} components", set.len())));
    }
    let base = ProMP::fit(set, family, steps)?;
    let (aligned, psi) = prepare(set, family, steps)?;
    let weights = demo_weights(&aligned, &psi, family)?;
    let (mixture, _) = em_fit(&weights, j, em)?;
    Ok(PrompMixture { family: family.clone(), psi, weights: mixture, sigma2: base.sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_set(m: usize, t: usize) -> TrajectorySet {
        TrajectorySet::new(
            (0..m)
                .map(|i| {
                    let times: Vec<f64> = (0..t).map(|s| s as f64).collect();
                    let pts = DMatrix::from_fn(t, 2, |s, d| {
                        let u = s as f64 / (t - 1) as f64;
                        if d == 0 {
                            u + 0.1 * i as f64
                        } else {
                            1.0 - u * u
                        }
                    });
                    Trajectory::new(times, pts).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn psi_shapes_and_structure() {
        let times = phase(7);
        for fam in [BasisFamily::radial(4), BasisFamily::bernstein(4), BasisFamily::fourier(4)] {
            let p = build_psi(&fam, &times, 3).unwrap();
            assert_eq!(p.values().shape(), (21, 12));
            let p1 = build_psi(&fam, &times, 1).unwrap();
            assert_eq!(p1.values(), p1.phi());
            assert_eq!(p.values()[(3 * 2 + 1, 2 * 3 + 1)], p.phi()[(2, 2)]);
            assert_eq!(p.values()[(3 * 2 + 1, 2 * 3)], 0.0);
        }
        let b = build_psi(&BasisFamily::bernstein(6), &times, 1).unwrap();
        for r in 0..7 {
            assert!((b.phi().row(r).sum() - 1.0).abs() < 1e-12);
        }
        let r = build_psi(&BasisFamily::radial(6), &times, 1).unwrap();
        for row in 0..7 {
            assert!((r.phi().row(row).sum() - 1.0).abs() < 1e-12);
        }
        assert!(build_psi(&BasisFamily::radial(3), &[], 1).is_err());
        assert!(build_psi(&BasisFamily::Fourier { period: 0.0, count: 3 }, &times, 1).is_err());
    }

    #[test]
    fn via_point_parsing() {
        let v: ViaPoint = "12:1=0.5@1e-4".parse().unwrap();
        assert_eq!(v, ViaPoint { time_index: 12, dim: 1, value: 0.5, noise: 1e-4 });
        assert!("12:1=0.5".parse::<ViaPoint>().is_err());
        assert!("a:1=0.5@1".parse::<ViaPoint>().is_err());
        assert!("1:1=0.5@-1".parse::<ViaPoint>().is_err());
    }

    #[test]
    fn identical_demos_have_regularizer_only() {
        let one = line_set(1, 30);
        let many = TrajectorySet::new(vec![one.trajectories()[0].clone(); 5]).unwrap();
        let fam = BasisFamily::bernstein(3);
        let a = ProMP::fit(&one, &fam, None).unwrap();
        let b = ProMP::fit(&many, &fam, None).unwrap();
        assert!((a.mu_w() - b.mu_w()).amax() < 1e-12);
        let off_diag =
            b.sigma_w().iter().enumerate().filter(|(i, _)| i % 7 != 0).map(|(_, v)| v.abs()).fold(0.0, f64::max);
        assert!(off_diag < 1e-30);
        assert!(b.sigma_w()[(0, 0)] > 0.0 && b.sigma_w()[(0, 0)] < 1e-6);
        // quadratic data is in the span of degree-3 Bernstein polynomials
        assert!(a.sigma2() < 1e-20);
    }

    #[test]
    fn too_many_basis_functions_is_rank_error() {
        let set = line_set(2, 5);
        let err = ProMP::fit(&set, &BasisFamily::bernstein(8), None).unwrap_err();
        match err {
            Error::RankDeficient { family, .. } => assert_eq!(family, "bernstein"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampling_guards() {
        let p = ProMP::fit(&line_set(3, 20), &BasisFamily::radial(5), None).unwrap();
        assert!(p.sample_trajectories(0, 1).is_err());
        assert_eq!(p.sample_trajectories(3, 4).unwrap(), p.sample_trajectories(3, 4).unwrap());
        assert!(p.condition_via_points(&[ViaPoint { time_index: 20, dim: 0, value: 0.0, noise: 1.0 }]).is_err());
        assert!(p.condition_via_points(&[ViaPoint { time_index: 0, dim: 2, value: 0.0, noise: 1.0 }]).is_err());
    }

    #[test]
    fn pca_requires_two_demos() {
        assert!(pca_distribution(&line_set(1, 10), 2, None).is_err());
        let m = pca_distribution(&line_set(4, 10), 50, None).unwrap();
        assert!(m.truncated());
        assert!(m.components() <= 3);
    }
}
