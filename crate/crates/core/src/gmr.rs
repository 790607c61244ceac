//! Gaussian mixture regression.
//!
//! A joint mixture is conditioned on an arbitrary subset of its coordinates.
//! The same machinery covers time-indexed trajectories (time as input),
//! autonomous systems (position in, velocity out) and autoregressive models
//! (a window of past samples in, the next sample out).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussians::{log_sum_exp, Conditioner, DimensionSplit, Gaussian, MixtureModel};
use crate::linalg::symmetrize;

/// log(1e-300): below this the query is treated as outside the model support.
pub const FAR_FROM_SUPPORT_LOG: f64 = -690.775_527_898_213_7;

/// A joint mixture prepared for repeated conditioning on one split.
#[derive(Debug, Clone)]
pub struct GmrModel {
    split: DimensionSplit,
    log_priors: Vec<f64>,
    conditioners: Vec<Conditioner>,
}

impl GmrModel {
    pub fn new(model: &MixtureModel, split: DimensionSplit) -> Result<Self> {
        split.validate_for(model.dim())?;
        let conditioners =
            model.components().iter().map(|g| Conditioner::new(g, &split)).collect::<Result<Vec<_>>>()?;
        Ok(Self { log_priors: model.priors().iter().map(|p| p.ln()).collect(), conditioners, split })
    }

    pub fn split(&self) -> &DimensionSplit {
        &self.split
    }

    /// Responsibilities `h_k(x_in)`, computed with log-sum-exp.
    pub fn responsibilities(&self, x_in: &DVector<f64>) -> Result<Vec<f64>> {
        if x_in.len() != self.split.input().len() {
            return Err(Error::DimensionMismatch(format!(
                "query has {} inputs, split expects {}",
                x_in.len(),
                self.split.input().len()
            )));
        }
        let dens: Vec<f64> = self.conditioners.iter().map(|c| c.input_log_density(x_in)).collect();
        let max = dens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max >= FAR_FROM_SUPPORT_LOG) {
            return Err(Error::FarFromSupport { max_log_density: max });
        }
        let logs: Vec<f64> = dens.iter().zip(&self.log_priors).map(|(d, p)| d + p).collect();
        let lse = log_sum_exp(&logs);
        Ok(logs.iter().map(|l| (l - lse).exp()).collect())
    }

    /// Multimodal conditional `Σ_k h_k N(μ̂_k^O(x_in), Σ̂_k^O)`.
    pub fn conditional(&self, x_in: &DVector<f64>) -> Result<MixtureModel> {
        let h = self.responsibilities(x_in)?;
        let comps = self.conditioners.iter().map(|c| c.condition(x_in)).collect::<Result<Vec<_>>>()?;
        MixtureModel::from_weights(comps, h)
    }

    /// Moment-matched unimodal conditional.
    pub fn unimodal(&self, x_in: &DVector<f64>) -> Result<Gaussian> {
        let h = self.responsibilities(x_in)?;
        let d_out = self.split.output().len();
        let mut mean = DVector::zeros(d_out);
        let means: Vec<DVector<f64>> = self.conditioners.iter().map(|c| c.conditional_mean(x_in)).collect();
        for (m, &hk) in means.iter().zip(&h) {
            mean.axpy(hk, m, 1.0);
        }
        let mut cov = nalgebra::DMatrix::zeros(d_out, d_out);
        for ((c, m), &hk) in self.conditioners.iter().zip(&means).zip(&h) {
            cov += (c.conditional_covariance() + m * m.transpose()) * hk;
        }
        cov -= &mean * mean.transpose();
        symmetrize(&mut cov);
        Gaussian::new(mean, cov)
    }

    pub fn predict_mean(&self, x_in: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.unimodal(x_in)?.into_parts().0)
    }
}

/// Query bundle: joint model, split and input value.
#[derive(Debug, Clone)]
pub struct GmrQuery<'a> {
    pub model: &'a MixtureModel,
    pub split: DimensionSplit,
    pub x_in: DVector<f64>,
}

pub fn gmr_conditional(q: &GmrQuery<'_>) -> Result<MixtureModel> {
    GmrModel::new(q.model, q.split.clone())?.conditional(&q.x_in)
}

pub fn gmr_unimodal(q: &GmrQuery<'_>) -> Result<Gaussian> {
    GmrModel::new(q.model, q.split.clone())?.unimodal(&q.x_in)
}

/// One explicit Euler step `x + dt · E[ẋ | x]` of the autonomous system
/// encoded by a joint model over (position, velocity).
pub fn gmr_dynamics_step(model: &GmrModel, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter("time step must be nonnegative".into()));
    }
    if model.split().output().len() != x.len() {
        return Err(Error::DimensionMismatch("velocity block does not match position".into()));
    }
    if dt == 0.0 {
        return Ok(x.clone());
    }
    let v = model.predict_mean(x)?;
    Ok(x + v * dt)
}

/// Iterates [`gmr_dynamics_step`] from `x0`, returning `steps + 1` states.
pub fn gmr_rollout(model: &GmrModel, x0: &DVector<f64>, dt: f64, steps: usize) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.clone());
    for _ in 0..steps {
        let next = gmr_dynamics_step(model, out.last().unwrap(), dt)?;
        out.push(next);
    }
    Ok(out)
}
