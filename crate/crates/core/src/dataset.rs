//! Synthetic demonstration sets.
//!
//! Every shape is sampled on `T` evenly spaced time stamps in `[0, 1]`.
//! `noise` controls both demo-to-demo variation (amplitude and phase jitter
//! with standard deviation `noise`) and per-sample observation noise
//! (standard deviation `noise / 10`). With `noise = 0` all demonstrations
//! are the noiseless template.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `x_d = sin(2πt + dπ/2)`.
    Sine,
    /// Outward spiral in the first two coordinates; further coordinates
    /// ramp linearly.
    Spiral,
    /// A row of three loops drifting to the right, like cursive "eee".
    Loops,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Self::Sine),
            "spiral" => Ok(Self::Spiral),
            "loops" | "handwriting-like-loops" => Ok(Self::Loops),
            other => Err(Error::InvalidParameter(format!(
                "unknown shape '{other}' (expected sine, spiral or handwriting-like-loops)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub shape: Shape,
    pub demos: usize,
    pub steps: usize,
    pub dim: usize,
    pub noise: f64,
    pub seed: u64,
}

fn template(shape: Shape, t: f64, d: usize, amp: f64, phase: f64) -> f64 {
    match shape {
        Shape::Sine => amp * (2.0 * PI * t + d as f64 * PI / 2.0 + phase).sin(),
        Shape::Spiral => {
            let r = amp * (0.1 + 0.9 * t);
            let th = 4.0 * PI * t + phase;
            match d {
                0 => r * th.cos(),
                1 => r * th.sin(),
                _ => amp * t,
            }
        }
        Shape::Loops => {
            let th = 6.0 * PI * t + phase;
            match d {
                0 => 1.5 * t - 0.25 * amp * th.sin(),
                1 => 0.35 * amp * th.cos(),
                _ => 0.2 * amp * (2.0 * PI * d as f64 * t).sin(),
            }
        }
    }
}

pub fn generate(spec: &DatasetSpec) -> Result<TrajectorySet> {
    if spec.demos == 0 || spec.steps < 2 || spec.dim == 0 {
        return Err(Error::InvalidParameter("need M ≥ 1, T ≥ 2 and D ≥ 1".into()));
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(Error::InvalidParameter("noise must be a finite nonnegative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let times: Vec<f64> = (0..spec.steps).map(|i| i as f64 / (spec.steps - 1) as f64).collect();
    let demos = (0..spec.demos)
        .map(|_| {
            let amp = 1.0 + spec.noise * std.sample(&mut rng);
            let phase = spec.noise * std.sample(&mut rng);
            let mut pts = DMatrix::zeros(spec.steps, spec.dim);
            for (i, &t) in times.iter().enumerate() {
                for d in 0..spec.dim {
                    let eps = if spec.noise > 0.0 { 0.1 * spec.noise * std.sample(&mut rng) } else { 0.0 };
                    pts[(i, d)] = template(spec.shape, t, d, amp, phase) + eps;
                }
            }
            Trajectory::new(times.clone(), pts)
        })
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(demos)
}
