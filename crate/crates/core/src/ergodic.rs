//! Spectral multiscale coverage (SMC) ergodic control for a single agent
//! with velocity commands `ẋ = u`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fourier::{basis_all, gmm_coeffs, grad_basis_all, CoeffArray, FourierDomain};
use crate::gaussians::MixtureModel;

/// Weights `Λ_k = (1 + ‖k‖²)^(−(D+1)/2)`.
pub fn smc_lambda(dom: &FourierDomain) -> CoeffArray {
    let expo = -(dom.dim() as f64 + 1.0) / 2.0;
    let values = dom
        .indices()
        .map(|k| {
            let n2: f64 = k.iter().map(|&kd| (kd * kd) as f64).sum();
            (1.0 + n2).powf(expo)
        })
        .collect();
    CoeffArray::new(dom, values).expect("lambda weights are finite")
}

/// Weighted spectral distance `½ Σ_k Λ_k (w_k − ŵ_k)²`.
pub fn ergodic_metric(w: &CoeffArray, target: &CoeffArray, lambda: &CoeffArray) -> f64 {
    0.5 * w
        .values()
        .iter()
        .zip(target.values())
        .zip(lambda.values())
        .map(|((a, b), l)| l * (a - b) * (a - b))
        .sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct ErgodicConfig {
    pub dom: FourierDomain,
    pub target: CoeffArray,
    pub lambda: CoeffArray,
    /// Speed bound, length per unit time.
    pub u_max: f64,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
}

impl ErgodicConfig {
    /// Config whose target is the mirrored mixture `target` and whose
    /// weights are [`smc_lambda`].
    pub fn for_mixture(target: &MixtureModel, dom: FourierDomain, u_max: f64, dt: f64, steps: usize) -> Result<Self> {
        let cfg = Self { target: gmm_coeffs(target, &dom)?, lambda: smc_lambda(&dom), dom, u_max, dt, steps, seed: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0) || !self.u_max.is_finite() {
            return Err(Error::InvalidParameter("u_max must be positive".into()));
        }
        // dt = 0 is accepted and freezes the agent
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be nonnegative".into()));
        }
        if !self.target.matches(&self.dom) || !self.lambda.matches(&self.dom) {
            return Err(Error::DimensionMismatch("coefficient arrays do not match the domain".into()));
        }
        if self.lambda.values().iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(Error::InvalidParameter("lambda weights must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Running trajectory statistics of the agent.
#[derive(Debug, Clone)]
pub struct ErgodicState {
    position: DVector<f64>,
    step: usize,
    coeffs: CoeffArray,
    history: Option<Vec<DVector<f64>>>,
}

impl ErgodicState {
    /// State before any sample has been accumulated; coefficients start at zero.
    pub fn new(position: DVector<f64>, dom: &FourierDomain, keep_history: bool) -> Result<Self> {
        if position.len() != dom.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial position has dimension {}, domain has {}",
                position.len(),
                dom.dim()
            )));
        }
        Ok(Self { position, step: 0, coeffs: CoeffArray::zeros(dom), history: keep_history.then(Vec::new) })
    }

    pub fn position(&self) -> &DVector<f64> {
        &self.position
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn coeffs(&self) -> &CoeffArray {
        &self.coeffs
    }

    pub fn history(&self) -> Option<&[DVector<f64>]> {
        self.history.as_deref()
    }

    /// Moves the agent to `x_new` and folds `φ(x_new)` into the running
    /// average `w ← (t·w + φ(x_new)) / (t + 1)`.
    pub fn update(&mut self, x_new: &DVector<f64>, dom: &FourierDomain) -> Result<()> {
        let x = clamp_to_domain(x_new, dom)?;
        let phi = basis_all(x.as_slice(), dom)?;
        let t = self.step as f64;
        for (w, p) in self.coeffs.values_mut().iter_mut().zip(&phi) {
            *w = (t * *w + p) / (t + 1.0);
        }
        self.step += 1;
        if let Some(h) = self.history.as_mut() {
            h.push(x.clone());
        }
        self.position = x;
        Ok(())
    }
}

fn clamp_to_domain(x: &DVector<f64>, dom: &FourierDomain) -> Result<DVector<f64>> {
    if x.len() != dom.dim() {
        return Err(Error::DimensionMismatch("position does not match the domain".into()));
    }
    let half = dom.period() / 2.0;
    let clamped = x.map(|v| v.clamp(-half, half));
    if clamped != *x {
        log::warn!("position left [-{half}, {half}]^{} and was clamped", dom.dim());
    }
    Ok(clamped)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub u: DVector<f64>,
    /// Unclamped descent direction `ũ`.
    pub direction: DVector<f64>,
    pub epsilon: f64,
}

/// Control command `u = u_max ũ/‖ũ‖` with `ũ = −Σ_k Λ_k (w_k − ŵ_k) ∇φ_k(x)`.
pub fn control_step(state: &ErgodicState, cfg: &ErgodicConfig) -> Result<ControlOutput> {
    let grad = grad_basis_all(state.position.as_slice(), &cfg.dom)?;
    let weighted = DVector::from_iterator(
        cfg.dom.len(),
        state.coeffs.values().iter().zip(cfg.target.values()).zip(cfg.lambda.values()).map(|((w, t), l)| l * (w - t)),
    );
    let direction = -(grad * weighted);
    let norm = direction.norm();
    let u = if norm < 1e-12 { DVector::zeros(cfg.dom.dim()) } else { &direction * (cfg.u_max / norm) };
    Ok(ControlOutput { u, direction, epsilon: ergodic_metric(&state.coeffs, &cfg.target, &cfg.lambda) })
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// Positions after each step (`steps` rows).
    pub trajectory: Vec<DVector<f64>>,
    /// Ergodic metric after each step's coefficient update.
    pub epsilon: Vec<f64>,
    pub final_coeffs: CoeffArray,
}

/// Closed-loop run: command, Euler step, clamp to the domain, update.
pub fn simulate(cfg: &ErgodicConfig, x0: &DVector<f64>) -> Result<SimulationResult> {
    cfg.validate()?;
    let half = cfg.dom.period() / 2.0;
    if x0.iter().any(|v| !(-half..=half).contains(v)) {
        return Err(Error::InvalidParameter("initial position outside the domain".into()));
    }
    let mut state = ErgodicState::new(x0.clone(), &cfg.dom, false)?;
    let mut trajectory = Vec::with_capacity(cfg.steps);
    let mut epsilon = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let out = control_step(&state, cfg)?;
        let next = (state.position() + out.u * cfg.dt).map(|v| v.clamp(-half, half));
        state.update(&next, &cfg.dom)?;
        trajectory.push(state.position().clone());
        epsilon.push(ergodic_metric(state.coeffs(), &cfg.target, &cfg.lambda));
    }
    Ok(SimulationResult { trajectory, epsilon, final_coeffs: state.coeffs })
}
