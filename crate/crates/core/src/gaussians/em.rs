//! Expectation-maximization for full-covariance Gaussian mixtures.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{log_sum_exp, FactoredGaussian, Gaussian, MixtureModel};
use crate::error::{Error, Result};
use crate::linalg::symmetrize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Equal-size bins after sorting on the first coordinate (usually time).
    TimeBinning,
    KMeansPlusPlus,
}

#[derive(Debug, Clone)]
pub struct EmConfig {
    pub init: InitStrategy,
    /// Stop when the relative log-likelihood improvement drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Diagonal loading `reg_relative · trace(Σ)/D` added in every M-step.
    pub reg_relative: f64,
    /// Extra absolute diagonal loading, zero by default.
    pub reg_absolute: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            init: InitStrategy::TimeBinning,
            tol: 1e-10,
            max_iter: 500,
            reg_relative: 1e-8,
            reg_absolute: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reseed {
    pub iteration: usize,
    pub component: usize,
    pub point: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitDiagnostics {
    /// Log-likelihood of the data under the parameters entering each E-step.
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub reseeds: Vec<Reseed>,
}

/// Fits a `k`-component mixture to `data` by EM.
pub fn em_fit(data: &[DVector<f64>], k: usize, config: &EmConfig) -> Result<(MixtureModel, FitDiagnostics)> {
    let n = data.len();
    if k == 0 {
        return Err(Error::InvalidParameter("number of components must be at least 1".into()));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!("{n} points cannot support {k} components")));
    }
    let d = data[0].len();
    if d == 0 || data.iter().any(|x| x.len() != d) {
        return Err(Error::DimensionMismatch("data points have inconsistent dimension".into()));
    }
    if data.iter().any(|x| x.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidParameter("data contain non-finite values".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let global_cov = weighted_cov(data, &vec![1.0; n], &mean_of(data)).1;
    let fallback_cov = regularize_cov(&global_cov, config);

    let (mut means, mut covs, mut priors) = match config.init {
        InitStrategy::TimeBinning => init_binning(data, k),
        InitStrategy::KMeansPlusPlus => init_kmeanspp(data, k, &mut rng),
    };
    for c in covs.iter_mut() {
        *c = regularize_cov(c, config);
        if Cholesky::new(c.clone()).is_none() {
            *c = fallback_cov.clone();
        }
    }

    let mut diag = FitDiagnostics { log_likelihoods: Vec::new(), iterations: 0, converged: false, reseeds: Vec::new() };
    let mut resp = DMatrix::<f64>::zeros(n, k);
    let mut point_ll = vec![0.0; n];

    for iter in 0..=config.max_iter {
        // E-step in the log domain
        let factors = covs
            .iter()
            .zip(&means)
            .map(|(c, m)| {
                let g = Gaussian::new(m.clone(), c.clone())?;
                FactoredGaussian::new(&g)
            })
            .collect::<Result<Vec<_>>>()?;
        let log_priors: Vec<f64> = priors.iter().map(|p: &f64| p.ln()).collect();
        let mut total = 0.0;
        let mut row = vec![0.0; k];
        for (i, x) in data.iter().enumerate() {
            for j in 0..k {
                row[j] = log_priors[j] + factors[j].log_pdf(x);
            }
            let lse = log_sum_exp(&row);
            point_ll[i] = lse;
            total += lse;
            for j in 0..k {
                resp[(i, j)] = (row[j] - lse).exp();
            }
        }
        if !total.is_finite() {
            return Err(Error::DegenerateCovariance("log-likelihood is not finite".into()));
        }
        let prev = diag.log_likelihoods.last().copied();
        diag.log_likelihoods.push(total);
        diag.iterations = iter;
        if let Some(prev) = prev {
            if (total - prev) / prev.abs().max(f64::MIN_POSITIVE) < config.tol {
                diag.converged = true;
                break;
            }
        }
        if iter == config.max_iter {
            break;
        }

        // M-step
        let mut used_points = Vec::new();
        for j in 0..k {
            let w: Vec<f64> = (0..n).map(|i| resp[(i, j)]).collect();
            let mass: f64 = w.iter().sum();
            let mut reseed = mass < 1e-10 * n as f64;
            if !reseed {
                let mean = weighted_mean(data, &w, mass);
                let (_, cov) = weighted_cov(data, &w, &mean);
                let cov = regularize_cov(&cov, config);
                if Cholesky::new(cov.clone()).is_some() {
                    means[j] = mean;
                    covs[j] = cov;
                    priors[j] = mass / n as f64;
                } else {
                    reseed = true;
                }
            }
            if reseed {
                let point = worst_explained(&point_ll, &used_points);
                used_points.push(point);
                means[j] = data[point].clone();
                covs[j] = fallback_cov.clone();
                priors[j] = 1.0 / k as f64;
                diag.reseeds.push(Reseed { iteration: iter, component: j, point });
            }
        }
        let s: f64 = priors.iter().sum();
        priors.iter_mut().for_each(|p| *p /= s);
    }

    let comps = means.into_iter().zip(covs).map(|(m, c)| Gaussian::new(m, c)).collect::<Result<Vec<_>>>()?;
    let model = MixtureModel::from_weights(comps, priors)?;
    Ok((model, diag))
}

fn worst_explained(point_ll: &[f64], exclude: &[usize]) -> usize {
    let mut best = None;
    for (i, &ll) in point_ll.iter().enumerate() {
        if exclude.contains(&i) {
            continue;
        }
        match best {
            Some((_, b)) if ll >= b => {}
            _ => best = Some((i, ll)),
        }
    }
    best.map(|(i, _)| i).unwrap_or(0)
}

fn regularize_cov(cov: &DMatrix<f64>, config: &EmConfig) -> DMatrix<f64> {
    let d = cov.nrows();
    let lambda = config.reg_relative * cov.trace() / d as f64 + config.reg_absolute;
    let mut out = cov.clone();
    for i in 0..d {
        out[(i, i)] += lambda;
    }
    out
}

fn mean_of(data: &[DVector<f64>]) -> DVector<f64> {
    weighted_mean(data, &vec![1.0; data.len()], data.len() as f64)
}

fn weighted_mean(data: &[DVector<f64>], w: &[f64], mass: f64) -> DVector<f64> {
    let mut m = DVector::zeros(data[0].len());
    for (x, &wi) in data.iter().zip(w) {
        m.axpy(wi, x, 1.0);
    }
    m / mass
}

/// Maximum-likelihood (1/mass normalized) weighted covariance about `mean`.
fn weighted_cov(data: &[DVector<f64>], w: &[f64], mean: &DVector<f64>) -> (f64, DMatrix<f64>) {
    let d = mean.len();
    let mut cov = DMatrix::zeros(d, d);
    let mut mass = 0.0;
    for (x, &wi) in data.iter().zip(w) {
        let diff = x - mean;
        cov.ger(wi, &diff, &diff, 1.0);
        mass += wi;
    }
    cov /= mass;
    symmetrize(&mut cov);
    (mass, cov)
}

type Params = (Vec<DVector<f64>>, Vec<DMatrix<f64>>, Vec<f64>);

fn params_from_labels(data: &[DVector<f64>], labels: &[usize], k: usize) -> Params {
    let n = data.len();
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    let mut priors = Vec::with_capacity(k);
    for j in 0..k {
        let w: Vec<f64> = labels.iter().map(|&l| if l == j { 1.0 } else { 0.0 }).collect();
        let mass: f64 = w.iter().sum();
        let mean = weighted_mean(data, &w, mass);
        let (_, cov) = weighted_cov(data, &w, &mean);
        means.push(mean);
        covs.push(cov);
        priors.push(mass / n as f64);
    }
    (means, covs, priors)
}

fn init_binning(data: &[DVector<f64>], k: usize) -> Params {
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data[a][0].total_cmp(&data[b][0]).then(a.cmp(&b)));
    let mut labels = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = rank * k / n;
    }
    params_from_labels(data, &labels, k)
}

fn init_kmeanspp<R: Rng>(data: &[DVector<f64>], k: usize, rng: &mut R) -> Params {
    let n = data.len();
    let mut centers = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = data.iter().map(|x| (x - &data[centers[0]]).norm_squared()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &v) in d2.iter().enumerate() {
                if u < v {
                    pick = i;
                    break;
                }
                u -= v;
            }
            pick
        } else {
            (0..n).find(|i| !centers.contains(i)).unwrap_or(0)
        };
        centers.push(next);
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min((x - &data[next]).norm_squared());
        }
    }
    let mut labels: Vec<usize> = data
        .iter()
        .map(|x| {
            (0..k)
                .min_by(|&a, &b| {
                    (x - &data[centers[a]]).norm_squared().total_cmp(&(x - &data[centers[b]]).norm_squared())
                })
                .unwrap()
        })
        .collect();
    // a center always owns itself, so no label set is empty
    for (j, &c) in centers.iter().enumerate() {
        labels[c] = j;
    }
    params_from_labels(data, &labels, k)
}
