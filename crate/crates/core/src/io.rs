//! File formats: versioned JSON for models, CSV for trajectories and
//! coefficient arrays.
//!
//! Floats are written with Rust's shortest round-trip formatting and parsed
//! exactly, so every model written here reads back bit-for-bit.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bezier::BezierCurve;
use crate::error::{Error, Result};
use crate::fourier::{CoeffArray, FourierDomain};
use crate::gaussians::{Gaussian, MixtureModel};
use crate::lwr::{Bandwidth, LwrModel, RbfSet};
use crate::promp::{BasisFamily, ProMP, PrompMixture};
use crate::trajectory::{Trajectory, TrajectorySet};

pub const GMM_VERSION: &str = "gmm-v1";
pub const LWR_VERSION: &str = "lwr-v1";
pub const BEZIER_VERSION: &str = "bezier-v1";
pub const PROMP_VERSION: &str = "promp-v1";
pub const PROMP_MIXTURE_VERSION: &str = "promp-mixture-v1";
pub const ERGODIC_CONFIG_VERSION: &str = "ergodic-config-v1";

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("{what}: ragged matrix rows")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn check_version(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Parse(format!("expected version \"{expected}\", found \"{found}\"")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianJson {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianJson {
    pub fn from_gaussian(g: &Gaussian) -> Self {
        Self { mean: g.mean().iter().copied().collect(), cov: rows(g.covariance()) }
    }

    pub fn to_gaussian(&self) -> Result<Gaussian> {
        Gaussian::new(DVector::from_vec(self.mean.clone()), from_rows(&self.cov, "cov")?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmJson {
    pub version: String,
    pub dim: usize,
    pub priors: Vec<f64>,
    pub components: Vec<GaussianJson>,
}

impl GmmJson {
    pub fn from_model(m: &MixtureModel) -> Self {
        Self {
            version: GMM_VERSION.into(),
            dim: m.dim(),
            priors: m.priors().to_vec(),
            components: m.components().iter().map(GaussianJson::from_gaussian).collect(),
        }
    }

    pub fn to_model(&self) -> Result<MixtureModel> {
        check_version(&self.version, GMM_VERSION)?;
        let comps = self.components.iter().map(GaussianJson::to_gaussian).collect::<Result<Vec<_>>>()?;
        if comps.iter().any(|g| g.dim() != self.dim) {
            return Err(Error::DimensionMismatch(format!("components do not match dim = {}", self.dim)));
        }
        MixtureModel::new(comps, self.priors.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthJson {
    Isotropic(f64),
    Full(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LwrJson {
    pub version: String,
    pub degree: usize,
    pub rescaled: bool,
    pub centers: Vec<Vec<f64>>,
    pub bandwidth: BandwidthJson,
    /// One `(1 + D·degree) × P` matrix per basis function, row-major.
    pub coefficients: Vec<Vec<Vec<f64>>>,
}

impl LwrJson {
    pub fn from_model(m: &LwrModel) -> Self {
        let rbfs = m.rbfs();
        Self {
            version: LWR_VERSION.into(),
            degree: m.degree(),
            rescaled: rbfs.rescaled(),
            centers: rbfs.centers().iter().map(|c| c.iter().copied().collect()).collect(),
            bandwidth: match rbfs.bandwidth() {
                Bandwidth::Isotropic(s) => BandwidthJson::Isotropic(*s),
                Bandwidth::Full(ms) => BandwidthJson::Full(ms.iter().map(rows).collect()),
            },
            coefficients: m.coefficients().iter().map(rows).collect(),
        }
    }

    pub fn to_model(&self) -> Result<LwrModel> {
        check_version(&self.version, LWR_VERSION)?;
        let bandwidth = match &self.bandwidth {
            BandwidthJson::Isotropic(s) => Bandwidth::Isotropic(*s),
            BandwidthJson::Full(ms) => {
                Bandwidth::Full(ms.iter().map(|m| from_rows(m, "bandwidth")).collect::<Result<_>>()?)
            }
        };
        let centers = self.centers.iter().map(|c| DVector::from_vec(c.clone())).collect();
        let rbfs = RbfSet::new(centers, bandwidth, self.rescaled)?;
        let coeffs = self.coefficients.iter().map(|m| from_rows(m, "coefficients")).collect::<Result<Vec<_>>>()?;
        LwrModel::from_parts(rbfs, coeffs, self.degree)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BezierJson {
    pub version: String,
    pub control_points: Vec<Vec<f64>>,
}

impl BezierJson {
    pub fn from_curve(c: &BezierCurve) -> Self {
        Self {
            version: BEZIER_VERSION.into(),
            control_points: c.control_points().iter().map(|p| p.iter().copied().collect()).collect(),
        }
    }

    pub fn to_curve(&self) -> Result<BezierCurve> {
        check_version(&self.version, BEZIER_VERSION)?;
        BezierCurve::new(self.control_points.iter().map(|p| DVector::from_vec(p.clone())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyJson {
    Radial { centers: Vec<f64>, bandwidth: f64 },
    Bernstein { degree: usize },
    Fourier { period: f64, count: usize },
}

impl From<&BasisFamily> for FamilyJson {
    fn from(f: &BasisFamily) -> Self {
        match f {
            BasisFamily::Radial { centers, bandwidth } => {
                Self::Radial { centers: centers.clone(), bandwidth: *bandwidth }
            }
            BasisFamily::Bernstein { degree } => Self::Bernstein { degree: *degree },
            BasisFamily::Fourier { period, count } => Self::Fourier { period: *period, count: *count },
        }
    }
}

impl From<&FamilyJson> for BasisFamily {
    fn from(f: &FamilyJson) -> Self {
        match f {
            FamilyJson::Radial { centers, bandwidth } => {
                Self::Radial { centers: centers.clone(), bandwidth: *bandwidth }
            }
            FamilyJson::Bernstein { degree } => Self::Bernstein { degree: *degree },
            FamilyJson::Fourier { period, count } => Self::Fourier { period: *period, count: *count },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrompJson {
    pub version: String,
    pub family: FamilyJson,
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub mu_w: Vec<f64>,
    pub sigma_w: Vec<Vec<f64>>,
    pub sigma2: f64,
}

impl PrompJson {
    pub fn from_model(p: &ProMP) -> Self {
        Self {
            version: PROMP_VERSION.into(),
            family: p.family().into(),
            steps: p.steps(),
            dim: p.dim(),
            mu_w: p.mu_w().iter().copied().collect(),
            sigma_w: rows(p.sigma_w()),
            sigma2: p.sigma2(),
        }
    }

    pub fn to_model(&self) -> Result<ProMP> {
        check_version(&self.version, PROMP_VERSION)?;
        ProMP::from_parts(
            (&self.family).into(),
            self.steps,
            self.dim,
            DVector::from_vec(self.mu_w.clone()),
            from_rows(&self.sigma_w, "sigma_w")?,
            self.sigma2,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrompMixtureJson {
    pub version: String,
    pub family: FamilyJson,
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub sigma2: f64,
    pub priors: Vec<f64>,
    /// Weight-space components `{mean: μ^w_j, cov: Σ^w_j}`.
    pub components: Vec<GaussianJson>,
}

impl PrompMixtureJson {
    pub fn from_model(m: &PrompMixture) -> Self {
        let w = m.weight_mixture();
        Self {
            version: PROMP_MIXTURE_VERSION.into(),
            family: m.family().into(),
            steps: m.psi().steps(),
            dim: m.psi().dim(),
            sigma2: m.sigma2(),
            priors: w.priors().to_vec(),
            components: w.components().iter().map(GaussianJson::from_gaussian).collect(),
        }
    }

    pub fn to_model(&self) -> Result<PrompMixture> {
        check_version(&self.version, PROMP_MIXTURE_VERSION)?;
        let comps = self.components.iter().map(GaussianJson::to_gaussian).collect::<Result<Vec<_>>>()?;
        PrompMixture::from_parts(
            (&self.family).into(),
            self.steps,
            self.dim,
            MixtureModel::new(comps, self.priors.clone())?,
            self.sigma2,
        )
    }
}

/// Input of `ergodic simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgodicConfigJson {
    pub version: String,
    /// Period `L`; the agent lives in `[-L/2, L/2]^D`.
    pub period: f64,
    pub k_per_dim: usize,
    pub u_max: f64,
    pub dt: f64,
    pub steps: usize,
    pub x0: Vec<f64>,
    pub target: GmmJson,
}

/// Any of the model files, dispatched on the `version` field.
#[derive(Debug, Clone)]
pub enum ModelFile {
    Gmm(MixtureModel),
    Lwr(LwrModel),
    Bezier(BezierCurve),
    Promp(ProMP),
    PrompMixture(PrompMixture),
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let version = v.get("version").and_then(|x| x.as_str()).unwrap_or("").to_string();
    Ok(match version.as_str() {
        GMM_VERSION => ModelFile::Gmm(serde_json::from_value::<GmmJson>(v)?.to_model()?),
        LWR_VERSION => ModelFile::Lwr(serde_json::from_value::<LwrJson>(v)?.to_model()?),
        BEZIER_VERSION => ModelFile::Bezier(serde_json::from_value::<BezierJson>(v)?.to_curve()?),
        PROMP_VERSION => ModelFile::Promp(serde_json::from_value::<PrompJson>(v)?.to_model()?),
        PROMP_MIXTURE_VERSION => ModelFile::PrompMixture(serde_json::from_value::<PrompMixtureJson>(v)?.to_model()?),
        other => return Err(Error::Parse(format!("unknown model version \"{other}\""))),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match line {
        Some(l) => Error::Parse(format!("line {l}: {e}")),
        None => Error::Parse(e.to_string()),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: u64, col: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: column {col}: cannot parse '{s}'")))
}

/// Reads `traj_id,t,x1..xD`. Trajectories are returned in order of
/// increasing id; ids need not be contiguous in the file.
pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<(Vec<u64>, TrajectorySet)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() < 3 || &headers[0] != "traj_id" || &headers[1] != "t" {
        return Err(Error::Parse("line 1: header must be traj_id,t,x1,...,xD".into()));
    }
    let d = headers.len() - 2;
    let mut groups: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let id: u64 = parse_field(&rec[0], line, "traj_id")?;
        let t: f64 = parse_field(&rec[1], line, "t")?;
        let entry = groups.entry(id).or_default();
        if let Some(&prev) = entry.0.last() {
            if !(t > prev) {
                return Err(Error::Parse(format!("line {line}: time {t} does not increase within trajectory {id}")));
            }
        }
        if !t.is_finite() {
            return Err(Error::Parse(format!("line {line}: non-finite time")));
        }
        entry.0.push(t);
        for c in 0..d {
            let v: f64 = parse_field(&rec[c + 2], line, &headers[c + 2])?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {line}: non-finite value")));
            }
            entry.1.push(v);
        }
    }
    let mut ids = Vec::with_capacity(groups.len());
    let mut out = Vec::with_capacity(groups.len());
    for (id, (times, vals)) in groups {
        let n = times.len();
        ids.push(id);
        out.push(Trajectory::new(times, DMatrix::from_row_slice(n, d, &vals))?);
    }
    Ok((ids, TrajectorySet::new(out)?))
}

fn header_x(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|i| format!("x{i}"))
}

/// Writes `traj_id,t,x1..xD` with ids `0..M-1`.
pub fn write_trajectory_csv<W: Write>(w: W, set: &TrajectorySet) -> Result<()> {
    let d = set.dim().unwrap_or(1);
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["traj_id".to_string(), "t".to_string()];
    header.extend(header_x(d));
    wtr.write_record(&header).map_err(csv_err)?;
    for (id, tr) in set.trajectories().iter().enumerate() {
        for i in 0..tr.len() {
            let mut rec = vec![id.to_string(), tr.times()[i].to_string()];
            rec.extend(tr.points().row(i).iter().map(f64::to_string));
            wtr.write_record(&rec).map_err(csv_err)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `flat,k1..kD,value`.
pub fn write_coeff_csv<W: Write>(w: W, coeffs: &CoeffArray, dom: &FourierDomain) -> Result<()> {
    if !coeffs.matches(dom) {
        return Err(Error::DimensionMismatch("coefficients do not match the domain".into()));
    }
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["flat".to_string()];
    header.extend((1..=dom.dim()).map(|i| format!("k{i}")));
    header.push("value".into());
    wtr.write_record(&header).map_err(csv_err)?;
    for (flat, k) in dom.indices().enumerate() {
        let mut rec = vec![flat.to_string()];
        rec.extend(k.iter().map(usize::to_string));
        rec.push(coeffs.values()[flat].to_string());
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a coefficient CSV back into `(K, D, values)`; the period is not
/// stored in the file.
pub fn read_coeff_csv<R: Read>(reader: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() < 3 || &headers[0] != "flat" || &headers[headers.len() - 1] != "value" {
        return Err(Error::Parse("line 1: header must be flat,k1,...,kD,value".into()));
    }
    let d = headers.len() - 2;
    let mut values = Vec::new();
    let mut kmax = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let flat: usize = parse_field(&rec[0], line, "flat")?;
        if flat != values.len() {
            return Err(Error::Parse(format!("line {line}: expected flat index {}", values.len())));
        }
        for c in 0..d {
            kmax = kmax.max(parse_field::<usize>(&rec[c + 1], line, &headers[c + 1])?);
        }
        values.push(parse_field(&rec[d + 1], line, "value")?);
    }
    let k = kmax + 1;
    if values.len() != k.pow(d as u32) {
        return Err(Error::Parse(format!("{} coefficients do not form a K^D array", values.len())));
    }
    Ok((k, d, values))
}

/// Plain numeric table with a header row.
pub fn write_table<W: Write>(w: W, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header).map_err(csv_err)?;
    for r in rows {
        wtr.write_record(r.iter().map(f64::to_string)).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Numeric table with a header row; returns `(header, rows)`.
pub fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(rec.iter().zip(&header).map(|(s, h)| parse_field(s, line, h)).collect::<Result<Vec<f64>>>()?);
    }
    Ok((header, out))
}
