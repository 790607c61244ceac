//! Deterministic SVG 1.1 figures.
//!
//! Coordinates are printed with three decimals, so the same input always
//! produces the same bytes.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::promp::BasisFamily;
use crate::trajectory::TrajectorySet;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        body.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
        );
        let _ = writeln!(body, "<title>{}</title>", escape(title));
        let _ = writeln!(body, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        Self { body }
    }

    fn axes(&mut self) {
        let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN, MARGIN);
        let _ = writeln!(
            self.body,
            "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\"><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\"/><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/></g>"
        );
    }

    fn label(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.3}\" y=\"{y:.3}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data ranges onto the plot area, padding degenerate ranges.
struct Scale {
    lo: f64,
    hi: f64,
    px0: f64,
    px1: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, px0: f64, px1: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, px0, px1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }
}

fn polyline(body: &mut String, pts: &[(f64, f64)], color: &str, attrs: &str) {
    body.push_str("<polyline fill=\"none\" stroke=\"");
    body.push_str(color);
    body.push_str("\" stroke-width=\"1.5\"");
    body.push_str(attrs);
    body.push_str(" points=\"");
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            body.push(' ');
        }
        let _ = write!(body, "{x:.3},{y:.3}");
    }
    body.push_str("\"/>\n");
}

/// Demonstrations as curves: `x2` against `x1` when `D ≥ 2`, otherwise
/// `x1` against time. An empty set gives bare axes.
pub fn trajectory_svg(set: &TrajectorySet) -> String {
    let mut c = Canvas::new("trajectories");
    c.axes();
    let planar = set.dim().is_some_and(|d| d >= 2);
    let xs =
        |i: usize| -> Vec<(f64, f64)> {
            let tr = &set.trajectories()[i];
            (0..tr.len())
                .map(|j| {
                    if planar {
                        (tr.points()[(j, 0)], tr.points()[(j, 1)])
                    } else {
                        (tr.times()[j], tr.points()[(j, 0)])
                    }
                })
                .collect()
        };
    let all: Vec<(f64, f64)> = (0..set.len()).flat_map(xs).collect();
    let sx = Scale::new(all.iter().map(|p| p.0), MARGIN, W - MARGIN);
    let sy = Scale::new(all.iter().map(|p| p.1), H - MARGIN, MARGIN);
    for i in 0..set.len() {
        let pts: Vec<(f64, f64)> = xs(i).into_iter().map(|(x, y)| (sx.map(x), sy.map(y))).collect();
        polyline(&mut c.body, &pts, PALETTE[i % PALETTE.len()], &format!(" data-traj=\"{i}\""));
    }
    c.label(W / 2.0, H - 10.0, if planar { "x1" } else { "t" });
    c.label(8.0, H / 2.0, if planar { "x2" } else { "x1" });
    c.finish()
}

fn viridis_like(u: f64) -> String {
    // linear ramp dark blue → teal → yellow
    let u = u.clamp(0.0, 1.0);
    let (r, g, b) = if u < 0.5 {
        let a = u / 0.5;
        (68.0 + a * (33.0 - 68.0), 1.0 + a * (145.0 - 1.0), 84.0 + a * (140.0 - 84.0))
    } else {
        let a = (u - 0.5) / 0.5;
        (33.0 + a * (253.0 - 33.0), 145.0 + a * (231.0 - 145.0), 140.0 + a * (37.0 - 140.0))
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn diverging(u: f64) -> String {
    // u in [-1, 1]: blue → white → red
    let u = u.clamp(-1.0, 1.0);
    let (r, g, b) = if u < 0.0 {
        let a = -u;
        (255.0 * (1.0 - a) + 33.0 * a, 255.0 * (1.0 - a) + 102.0 * a, 255.0 * (1.0 - a) + 172.0 * a)
    } else {
        (255.0 * (1.0 - u) + 178.0 * u, 255.0 * (1.0 - u) + 24.0 * u, 255.0 * (1.0 - u) + 43.0 * u)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn grid(c: &mut Canvas, m: &DMatrix<f64>, color: impl Fn(f64) -> String) {
    let (rows, cols) = m.shape();
    let side = (W - 2.0 * MARGIN).min(H - 2.0 * MARGIN);
    let cw = side / cols.max(1) as f64;
    let ch = side / rows.max(1) as f64;
    let x0 = (W - side) / 2.0;
    let y0 = (H - side) / 2.0;
    let _ = writeln!(c.body, "<g id=\"cells\" data-rows=\"{rows}\" data-cols=\"{cols}\">");
    for i in 0..rows {
        for j in 0..cols {
            let _ = writeln!(
                c.body,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{cw:.3}\" height=\"{ch:.3}\" fill=\"{}\" data-i=\"{i}\" data-j=\"{j}\"/>",
                x0 + j as f64 * cw,
                y0 + i as f64 * ch,
                color(m[(i, j)])
            );
        }
    }
    c.body.push_str("</g>\n");
}

/// Coefficient magnitudes on a `K × K` grid (row `k1`, column `k2`); a 1-D
/// array is drawn as a single row.
pub fn coeff_heatmap_svg(values: &[f64], k: usize, dim: usize) -> Result<String> {
    if dim == 0 || dim > 2 || values.len() != k.pow(dim as u32) {
        return Err(Error::InvalidParameter("coefficient heatmaps need a K or K×K array".into()));
    }
    let m = if dim == 1 { DMatrix::from_row_slice(1, k, values) } else { DMatrix::from_row_slice(k, k, values) };
    let vmax = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut c = Canvas::new("Fourier coefficients");
    grid(&mut c, &m, |v| viridis_like(if vmax > 0.0 { v.abs() / vmax } else { 0.0 }));
    c.label(MARGIN, H - 10.0, &format!("|w_k|, max {vmax:.3e}"));
    Ok(c.finish())
}

/// Symmetric color scale centred at zero.
pub fn covariance_svg(m: &DMatrix<f64>) -> Result<String> {
    if m.is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let vmax = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut c = Canvas::new("covariance matrix");
    grid(&mut c, m, |v| diverging(if vmax > 0.0 { v / vmax } else { 0.0 }));
    c.label(MARGIN, H - 10.0, &format!("{}x{}, max |entry| {vmax:.3e}", m.nrows(), m.ncols()));
    Ok(c.finish())
}

/// Largest deviation of `Σ_k φ_k(t)` from 1 over `samples` points in `[0, 1]`.
pub fn partition_of_unity_deviation(family: &BasisFamily, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1).max(1) as f64;
            (family.eval(t).iter().sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Basis functions over the phase `[0, 1]`. The root element carries
/// `data-partition-of-unity`, the recomputed maximum deviation of the sum of
/// all plotted functions from 1.
pub fn basis_functions_svg(family: &BasisFamily, samples: usize) -> Result<String> {
    family.validate()?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let ts: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let vals: Vec<Vec<f64>> = ts.iter().map(|&t| family.eval(t)).collect();
    let k = family.count();
    let dev = partition_of_unity_deviation(family, samples);
    let mut c = Canvas::new(&format!("{} basis functions", family.name()));
    c.body = c.body.replacen(
        "version=\"1.1\"",
        &format!("version=\"1.1\" data-basis-count=\"{k}\" data-partition-of-unity=\"{dev:e}\""),
        1,
    );
    c.axes();
    let sx = Scale::new([0.0, 1.0].into_iter(), MARGIN, W - MARGIN);
    let sy = Scale::new(vals.iter().flatten().copied().chain([0.0]), H - MARGIN, MARGIN);
    for j in 0..k {
        let pts: Vec<(f64, f64)> = ts.iter().zip(&vals).map(|(&t, v)| (sx.map(t), sy.map(v[j]))).collect();
        polyline(&mut c.body, &pts, PALETTE[j % PALETTE.len()], &format!(" data-basis=\"{j}\""));
    }
    c.label(W / 2.0, H - 10.0, "t");
    Ok(c.finish())
}
