//! Bernstein polynomials and Bézier curves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::weighted_lstsq;

/// Binomial coefficient in floating point, built by the multiplicative
/// recurrence so large degrees never go through factorials.
pub fn binomial(n: usize, i: usize) -> f64 {
    if i > n {
        return 0.0;
    }
    let i = i.min(n - i);
    let mut c = 1.0;
    for j in 1..=i {
        c = c * (n - i + j) as f64 / j as f64;
    }
    c
}

/// Bernstein basis polynomial `C(n,i) (1−t)^(n−i) t^i`.
pub fn bernstein(n: usize, i: usize, t: f64) -> Result<f64> {
    if i > n {
        return Err(Error::InvalidParameter(format!("Bernstein index {i} exceeds degree {n}")));
    }
    Ok(bernstein_unchecked(n, i, t))
}

pub(crate) fn bernstein_unchecked(n: usize, i: usize, t: f64) -> f64 {
    binomial(n, i) * (1.0 - t).powi((n - i) as i32) * t.powi(i as i32)
}

/// All `n + 1` Bernstein polynomials of degree `n` at `t`.
pub fn bernstein_all(n: usize, t: f64) -> Vec<f64> {
    (0..=n).map(|i| bernstein_unchecked(n, i, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMethod {
    Direct,
    #[default]
    DeCasteljau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    control_points: Vec<DVector<f64>>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<DVector<f64>>) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::InvalidParameter("a Bézier curve needs at least two control points".into()));
        }
        let d = control_points[0].len();
        if d == 0 || control_points.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch("control points differ in dimension".into()));
        }
        Ok(Self { control_points })
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.control_points[0].len()
    }

    pub fn control_points(&self) -> &[DVector<f64>] {
        &self.control_points
    }

    pub fn eval(&self, t: f64, method: EvalMethod) -> Result<DVector<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("curve parameter {t} outside [0, 1]")));
        }
        Ok(match method {
            EvalMethod::Direct => self.eval_direct(t),
            EvalMethod::DeCasteljau => self.eval_de_casteljau(t),
        })
    }

    fn eval_direct(&self, t: f64) -> DVector<f64> {
        let n = self.degree();
        let mut out = DVector::zeros(self.dim());
        for (i, p) in self.control_points.iter().enumerate() {
            out.axpy(bernstein_unchecked(n, i, t), p, 1.0);
        }
        out
    }

    fn eval_de_casteljau(&self, t: f64) -> DVector<f64> {
        let mut pts = self.control_points.clone();
        let s = 1.0 - t;
        for level in (1..pts.len()).rev() {
            for i in 0..level {
                let next = &pts[i] * s + &pts[i + 1] * t;
                pts[i] = next;
            }
        }
        pts.swap_remove(0)
    }

    /// `samples` evenly spaced evaluations over `[0, 1]`.
    pub fn sample(&self, samples: usize) -> Vec<(f64, DVector<f64>)> {
        (0..samples)
            .map(|j| {
                let t = if samples == 1 { 0.0 } else { j as f64 / (samples - 1) as f64 };
                (t, self.eval_de_casteljau(t))
            })
            .collect()
    }

    pub fn reversed(&self) -> Self {
        let mut pts = self.control_points.clone();
        pts.reverse();
        Self { control_points: pts }
    }

    /// Same curve written with one more control point.
    pub fn elevate(&self) -> Self {
        let n = self.degree();
        let p = &self.control_points;
        let mut out = Vec::with_capacity(n + 2);
        out.push(p[0].clone());
        for i in 1..=n {
            let a = i as f64 / (n + 1) as f64;
            out.push(&p[i - 1] * a + &p[i] * (1.0 - a));
        }
        out.push(p[n].clone());
        Self { control_points: out }
    }

    /// Least-squares control points of degree `n` for a sampled trajectory.
    ///
    /// Time stamps are mapped affinely onto `[0, 1]`. With `clamp_ends` the
    /// first and last control points are pinned to the samples at the
    /// earliest and latest time stamps and only the interior points are
    /// estimated.
    pub fn fit(times: &[f64], points: &[DVector<f64>], n: usize, clamp_ends: bool) -> Result<Self> {
        let m = times.len();
        if n == 0 {
            return Err(Error::InvalidParameter("Bézier degree must be at least 1".into()));
        }
        if points.len() != m {
            return Err(Error::DimensionMismatch(format!("{m} time stamps for {} samples", points.len())));
        }
        if m < n + 1 {
            return Err(Error::InvalidParameter(format!("{m} samples cannot determine a degree-{n} curve")));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch("samples differ in dimension".into()));
        }
        let (lo, hi) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        if !(hi > lo) {
            return Err(Error::SingularSystem("all time stamps are identical".into()));
        }
        let u: Vec<f64> = times.iter().map(|t| (t - lo) / (hi - lo)).collect();
        let basis = DMatrix::from_fn(m, n + 1, |r, c| bernstein_unchecked(n, c, u[r]));
        let targets = DMatrix::from_fn(m, d, |r, c| points[r][c]);
        let ones = vec![1.0; m];

        let ctrl = if clamp_ends {
            let first = argmin(&u);
            let last = argmax(&u);
            let p0 = points[first].clone();
            let pn = points[last].clone();
            let mut out = vec![p0.clone()];
            if n > 1 {
                let mut resid = targets.clone();
                for r in 0..m {
                    for c in 0..d {
                        resid[(r, c)] -= basis[(r, 0)] * p0[c] + basis[(r, n)] * pn[c];
                    }
                }
                let inner = basis.columns(1, n - 1).into_owned();
                let sol = weighted_lstsq(&inner, &resid, &ones, 0.0)?;
                for i in 0..n - 1 {
                    out.push(sol.row(i).transpose());
                }
            }
            out.push(pn);
            out
        } else {
            let sol = weighted_lstsq(&basis, &targets, &ones, 0.0)?;
            (0..=n).map(|i| sol.row(i).transpose()).collect()
        };
        Self::new(ctrl)
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).unwrap()
}
