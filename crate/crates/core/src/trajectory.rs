//! Sets of time-stamped demonstrations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One demonstration: `T` strictly increasing time stamps and a `T × D`
/// matrix of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    points: DMatrix<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, points: DMatrix<f64>) -> Result<Self> {
        if times.is_empty() || points.nrows() != times.len() || points.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} time stamps for a {}x{} sample matrix",
                times.len(),
                points.nrows(),
                points.ncols()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("time stamps must be strictly increasing".into()));
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.points.row(i).transpose()
    }

    /// Linear interpolation onto `n` samples evenly spaced over the
    /// demonstration's own time span. A single-sample demonstration is
    /// repeated.
    pub fn resample(&self, n: usize) -> Result<Trajectory> {
        if n == 0 {
            return Err(Error::InvalidParameter("resampling needs at least one sample".into()));
        }
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        let mut times = Vec::with_capacity(n);
        let mut points = DMatrix::zeros(n, self.dim());
        let mut seg = 0;
        for j in 0..n {
            let s = if n == 1 { 0.0 } else { j as f64 / (n - 1) as f64 };
            let t = if self.len() == 1 { t0 + s } else { t0 + s * (t1 - t0) };
            times.push(t);
            if self.len() == 1 {
                points.row_mut(j).copy_from(&self.points.row(0));
                continue;
            }
            while seg + 2 < self.len() && self.times[seg + 1] < t {
                seg += 1;
            }
            let (ta, tb) = (self.times[seg], self.times[seg + 1]);
            let a = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            let row = self.points.row(seg) * (1.0 - a) + self.points.row(seg + 1) * a;
            points.row_mut(j).copy_from(&row);
        }
        Trajectory::new(times, points)
    }

    /// Time-major stacking `[x_1ᵀ, x_2ᵀ, …, x_Tᵀ]ᵀ`.
    pub fn flatten(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.points.len(),
            (0..self.len()).flat_map(|t| (0..self.dim()).map(move |d| self.points[(t, d)])),
        )
    }

    pub fn from_flat(times: Vec<f64>, flat: &DVector<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || flat.len() != times.len() * dim {
            return Err(Error::DimensionMismatch("flat vector does not match T × D".into()));
        }
        let t = times.len();
        Self::new(times, DMatrix::from_fn(t, dim, |i, d| flat[i * dim + d]))
    }
}

/// Demonstrations sharing one spatial dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        if let Some(first) = trajectories.first() {
            if trajectories.iter().any(|t| t.dim() != first.dim()) {
                return Err(Error::DimensionMismatch("trajectories differ in dimension".into()));
            }
        }
        Ok(Self { trajectories })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.trajectories.first().map(Trajectory::dim)
    }

    /// Every demonstration resampled to `n` samples.
    pub fn resampled(&self, n: usize) -> Result<TrajectorySet> {
        Ok(Self { trajectories: self.trajectories.iter().map(|t| t.resample(n)).collect::<Result<_>>()? })
    }

    /// All samples as `(t, x)` rows, the joint data used by time-based GMR.
    pub fn time_augmented(&self) -> Vec<DVector<f64>> {
        self.trajectories
            .iter()
            .flat_map(|tr| {
                (0..tr.len()).map(move |i| {
                    let mut v = DVector::zeros(tr.dim() + 1);
                    v[0] = tr.times[i];
                    v.rows_mut(1, tr.dim()).copy_from(&tr.points.row(i).transpose());
                    v
                })
            })
            .collect()
    }
}
