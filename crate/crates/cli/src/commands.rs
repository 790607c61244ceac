use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use mixprim::bezier::{BezierCurve, EvalMethod};
use mixprim::dataset::{generate, DatasetSpec, Shape};
use mixprim::ergodic::{simulate, ErgodicConfig};
use mixprim::fourier::{gmm_coeffs, FourierDomain};
use mixprim::gaussians::{em_fit, DimensionSplit, EmConfig, InitStrategy, MixtureModel};
use mixprim::gmr::GmrModel;
use mixprim::io::{self, ModelFile};
use mixprim::lwr::{Bandwidth, LwrConfig, LwrModel, RbfSet};
use mixprim::plot;
use mixprim::promp::{promp_mixture, BasisFamily, ProMP, ViaPoint};
use mixprim::trajectory::TrajectorySet;
use mixprim::{Error, Result};

use crate::*;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&PathBuf>, text: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text)?,
    }
    Ok(())
}

fn read_model(path: &Path) -> Result<ModelFile> {
    io::parse_model(&read_text(path)?)
}

fn read_gmm(path: &Path) -> Result<MixtureModel> {
    match read_model(path)? {
        ModelFile::Gmm(m) => Ok(m),
        _ => Err(Error::InvalidParameter(format!("{} is not a gmm-v1 model", path.display()))),
    }
}

fn read_promp(path: &Path) -> Result<ProMP> {
    match read_model(path)? {
        ModelFile::Promp(m) => Ok(m),
        _ => Err(Error::InvalidParameter(format!("{} is not a promp-v1 model", path.display()))),
    }
}

fn read_trajectories(path: &Path) -> Result<(Vec<u64>, TrajectorySet)> {
    io::read_trajectory_csv(read_text(path)?.as_bytes())
}

fn is_trajectory_csv(text: &str) -> bool {
    text.lines().next().is_some_and(|h| h.trim_start().starts_with("traj_id"))
}

fn family(args: &BasisArgs) -> BasisFamily {
    match args.family {
        Family::Radial => BasisFamily::radial(args.k),
        Family::Bernstein => BasisFamily::bernstein(args.k),
        Family::Fourier => BasisFamily::fourier(args.k),
    }
}

fn grid(spec: &[f64]) -> Result<Vec<f64>> {
    if spec.len() != 3 || !(spec[2] >= 1.0) || spec[2].fract() != 0.0 {
        return Err(Error::InvalidParameter("--grid expects lo,hi,n".into()));
    }
    let n = spec[2] as usize;
    Ok((0..n)
        .map(|i| if n == 1 { spec[0] } else { spec[0] + (spec[1] - spec[0]) * i as f64 / (n - 1) as f64 })
        .collect())
}

fn queries(query: &Option<PathBuf>, grid_spec: &Option<Vec<f64>>, dim: usize) -> Result<Vec<DVector<f64>>> {
    match (query, grid_spec) {
        (Some(p), _) => {
            let (_, rows) = io::read_table(read_text(p)?.as_bytes())?;
            rows.into_iter()
                .enumerate()
                .map(|(i, r)| {
                    if r.len() != dim {
                        return Err(Error::Parse(format!(
                            "line {}: expected {dim} query columns, found {}",
                            i + 2,
                            r.len()
                        )));
                    }
                    Ok(DVector::from_vec(r))
                })
                .collect()
        }
        (None, Some(g)) => {
            if dim != 1 {
                return Err(Error::InvalidParameter("--grid needs a single input dimension".into()));
            }
            Ok(grid(g)?.into_iter().map(|v| DVector::from_element(1, v)).collect())
        }
        (None, None) => Err(Error::InvalidParameter("give --query or --grid".into())),
    }
}

fn csv_bytes(header: &[String], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    io::write_table(&mut buf, header, rows)?;
    Ok(buf)
}

pub fn run(cli: &Cli) -> Result<Value> {
    let pick = |own: &Option<PathBuf>| own.clone().or_else(|| cli.out.clone());
    match &cli.command {
        Command::Gmm(GmmCmd::Fit(a)) => {
            let text = read_text(&a.data)?;
            let data: Vec<DVector<f64>> = if is_trajectory_csv(&text) {
                io::read_trajectory_csv(text.as_bytes())?.1.time_augmented()
            } else {
                io::read_table(text.as_bytes())?.1.into_iter().map(DVector::from_vec).collect()
            };
            let cfg = EmConfig {
                init: match a.init {
                    Init::TimeBinning => InitStrategy::TimeBinning,
                    Init::Kmeans => InitStrategy::KMeansPlusPlus,
                },
                tol: a.tol,
                max_iter: a.max_iter,
                seed: cli.seed,
                ..EmConfig::default()
            };
            let (model, diag) = em_fit(&data, a.k, &cfg)?;
            if !diag.converged {
                log::warn!("EM stopped after {} iterations without converging", diag.iterations);
            }
            emit(pick(&a.out.out).as_ref(), io::to_json(&io::GmmJson::from_model(&model))?.as_bytes())?;
            Ok(serde_json::to_value(&diag)?)
        }

        Command::Gmr(GmrCmd::Predict(a)) => {
            let mixture = read_gmm(&a.model)?;
            let split = DimensionSplit::new(a.input.clone(), a.output.clone())?;
            let model = GmrModel::new(&mixture, split)?;
            let xs = queries(&a.query, &a.grid, a.input.len())?;
            let preds = xs.iter().map(|x| model.unimodal(x)).collect::<Result<Vec<_>>>()?;
            let path = a.path.clone().or_else(|| cli.out.clone());
            let bytes = match cli.format {
                Format::Json => {
                    let items: Vec<Value> = xs
                        .iter()
                        .zip(&preds)
                        .map(|(x, g)| {
                            let cov: Vec<Vec<f64>> =
                                (0..g.dim()).map(|i| g.covariance().row(i).iter().copied().collect()).collect();
                            json!({ "input": x.as_slice(), "mean": g.mean().as_slice(), "cov": cov })
                        })
                        .collect();
                    io::to_json(&items)?.into_bytes()
                }
                Format::Csv => {
                    let mut header: Vec<String> = a.input.iter().map(|d| format!("x{d}")).collect();
                    header.extend(a.output.iter().map(|d| format!("mean_x{d}")));
                    for i in &a.output {
                        for j in &a.output {
                            header.push(format!("cov_x{i}_x{j}"));
                        }
                    }
                    let rows: Vec<Vec<f64>> = xs
                        .iter()
                        .zip(&preds)
                        .map(|(x, g)| {
                            let mut r: Vec<f64> = x.iter().copied().collect();
                            r.extend(g.mean().iter());
                            // row-major covariance
                            r.extend(g.covariance().transpose().iter());
                            r
                        })
                        .collect();
                    csv_bytes(&header, &rows)?
                }
            };
            emit(path.as_ref(), &bytes)?;
            Ok(json!({ "queries": xs.len() }))
        }

        Command::Lwr(LwrCmd::Fit(a)) => {
            let (_, set) = read_trajectories(&a.data)?;
            let aug = set.time_augmented();
            let n = aug.len();
            let d = set.dim().unwrap_or(0);
            let x_in = DMatrix::from_fn(n, 1, |i, _| aug[i][0]);
            let x_out = DMatrix::from_fn(n, d, |i, j| aug[i][j + 1]);
            let (lo, hi) = x_in.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
            let mut rbfs = RbfSet::uniform_1d(lo, hi, a.k, !a.raw)?;
            if let Some(bw) = a.bandwidth {
                rbfs = RbfSet::new(rbfs.centers().to_vec(), Bandwidth::Isotropic(bw), !a.raw)?;
            }
            let model = LwrModel::fit(&x_in, &x_out, &rbfs, &LwrConfig { degree: a.degree, ridge: a.ridge })?;
            emit(pick(&a.out.out).as_ref(), io::to_json(&io::LwrJson::from_model(&model))?.as_bytes())?;
            Ok(json!({ "samples": n, "basis_functions": a.k }))
        }

        Command::Lwr(LwrCmd::Predict(a)) => {
            let model = match read_model(&a.model)? {
                ModelFile::Lwr(m) => m,
                _ => return Err(Error::InvalidParameter("expected an lwr-v1 model".into())),
            };
            let xs = queries(&a.query, &a.grid, model.rbfs().dim())?;
            let ys = xs.iter().map(|x| model.predict(x)).collect::<Result<Vec<_>>>()?;
            let bytes = match cli.format {
                Format::Json => {
                    let items: Vec<Value> = xs
                        .iter()
                        .zip(&ys)
                        .map(|(x, y)| json!({ "input": x.as_slice(), "output": y.as_slice() }))
                        .collect();
                    io::to_json(&items)?.into_bytes()
                }
                Format::Csv => {
                    let mut header: Vec<String> = (1..=model.rbfs().dim()).map(|i| format!("in{i}")).collect();
                    header.extend((1..=model.output_dim()).map(|i| format!("y{i}")));
                    let rows: Vec<Vec<f64>> =
                        xs.iter().zip(&ys).map(|(x, y)| x.iter().chain(y.iter()).copied().collect()).collect();
                    csv_bytes(&header, &rows)?
                }
            };
            emit(pick(&a.out.out).as_ref(), &bytes)?;
            Ok(json!({ "queries": xs.len() }))
        }

        Command::Bezier(BezierCmd::Eval(a)) => {
            let curve = match read_model(&a.curve)? {
                ModelFile::Bezier(c) => c,
                _ => return Err(Error::InvalidParameter("expected a bezier-v1 curve".into())),
            };
            if a.samples == 0 {
                return Err(Error::InvalidParameter("--samples must be positive".into()));
            }
            let method = match a.method {
                Method::DeCasteljau => EvalMethod::DeCasteljau,
                Method::Direct => EvalMethod::Direct,
            };
            let mut rows = Vec::with_capacity(a.samples);
            for j in 0..a.samples {
                let t = if a.samples == 1 { 0.0 } else { j as f64 / (a.samples - 1) as f64 };
                let p = curve.eval(t, method)?;
                rows.push(std::iter::once(t).chain(p.iter().copied()).collect::<Vec<f64>>());
            }
            let bytes = match cli.format {
                Format::Json => io::to_json(&rows)?.into_bytes(),
                Format::Csv => {
                    let mut header = vec!["t".to_string()];
                    header.extend((1..=curve.dim()).map(|i| format!("x{i}")));
                    csv_bytes(&header, &rows)?
                }
            };
            emit(pick(&a.out.out).as_ref(), &bytes)?;
            Ok(json!({ "samples": a.samples, "degree": curve.degree() }))
        }

        Command::Bezier(BezierCmd::Fit(a)) => {
            let (ids, set) = read_trajectories(&a.data)?;
            let idx = match a.traj_id {
                Some(id) => ids
                    .iter()
                    .position(|&i| i == id)
                    .ok_or_else(|| Error::InvalidParameter(format!("no trajectory with id {id}")))?,
                None => 0,
            };
            let tr = set
                .trajectories()
                .get(idx)
                .ok_or_else(|| Error::InvalidParameter("no trajectories in input".into()))?;
            let pts: Vec<DVector<f64>> = (0..tr.len()).map(|i| tr.point(i)).collect();
            let curve = BezierCurve::fit(tr.times(), &pts, a.degree, a.clamp_ends)?;
            emit(pick(&a.out.out).as_ref(), io::to_json(&io::BezierJson::from_curve(&curve))?.as_bytes())?;
            Ok(json!({ "degree": a.degree, "samples": tr.len() }))
        }

        Command::Fourier(FourierCmd::Coeffs(a)) => {
            let mixture = read_gmm(&a.model)?;
            let dom = FourierDomain::new(a.period, mixture.dim(), a.k)?;
            let coeffs = gmm_coeffs(&mixture, &dom)?;
            let bytes = match cli.format {
                Format::Json => io::to_json(&json!({
                    "period": a.period,
                    "dim": dom.dim(),
                    "k_per_dim": a.k,
                    "values": coeffs.values(),
                }))?
                .into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    io::write_coeff_csv(&mut buf, &coeffs, &dom)?;
                    buf
                }
            };
            emit(pick(&a.out.out).as_ref(), &bytes)?;
            Ok(json!({ "coefficients": dom.len() }))
        }

        Command::Ergodic(ErgodicCmd::Simulate(a)) => {
            let cfg_json: io::ErgodicConfigJson = io::from_json(&read_text(&a.config)?)?;
            if cfg_json.version != io::ERGODIC_CONFIG_VERSION {
                return Err(Error::Parse(format!(
                    "expected version \"{}\", found \"{}\"",
                    io::ERGODIC_CONFIG_VERSION,
                    cfg_json.version
                )));
            }
            let target = cfg_json.target.to_model()?;
            let dom = FourierDomain::new(cfg_json.period, target.dim(), cfg_json.k_per_dim)?;
            let mut cfg = ErgodicConfig::for_mixture(&target, dom, cfg_json.u_max, cfg_json.dt, cfg_json.steps)?;
            cfg.seed = cli.seed;
            let x0 = DVector::from_vec(cfg_json.x0.clone());
            if x0.len() != dom.dim() {
                return Err(Error::DimensionMismatch(format!("x0 must have {} entries", dom.dim())));
            }
            let res = simulate(&cfg, &x0)?;
            let mut header = vec!["step".to_string()];
            header.extend((1..=dom.dim()).map(|i| format!("x{i}")));
            header.push("epsilon".into());
            let rows: Vec<Vec<f64>> = res
                .trajectory
                .iter()
                .zip(&res.epsilon)
                .enumerate()
                .map(|(s, (x, e))| std::iter::once((s + 1) as f64).chain(x.iter().copied()).chain([*e]).collect())
                .collect();
            emit(pick(&a.out).as_ref(), &csv_bytes(&header, &rows)?)?;
            if let Some(p) = &a.coeffs {
                let mut buf = Vec::new();
                io::write_coeff_csv(&mut buf, &res.final_coeffs, &dom)?;
                fs::write(p, buf)?;
            }
            if let Some(p) = &a.target_coeffs {
                let mut buf = Vec::new();
                io::write_coeff_csv(&mut buf, &cfg.target, &dom)?;
                fs::write(p, buf)?;
            }
            if let Some(p) = &a.plot {
                let times: Vec<f64> = (1..=res.trajectory.len()).map(|s| s as f64).collect();
                let set = if res.trajectory.is_empty() {
                    TrajectorySet::new(vec![])?
                } else {
                    let pts = DMatrix::from_fn(res.trajectory.len(), dom.dim(), |i, j| res.trajectory[i][j]);
                    TrajectorySet::new(vec![mixprim::trajectory::Trajectory::new(times, pts)?])?
                };
                fs::write(p, plot::trajectory_svg(&set))?;
            }
            Ok(json!({
                "steps": res.epsilon.len(),
                "final_epsilon": res.epsilon.last(),
            }))
        }

        Command::Promp(PrompCmd::Fit(a)) => {
            let (_, set) = read_trajectories(&a.data)?;
            let model = ProMP::fit(&set, &family(&a.basis), a.basis.steps)?;
            emit(pick(&a.out.out).as_ref(), io::to_json(&io::PrompJson::from_model(&model))?.as_bytes())?;
            Ok(json!({ "demonstrations": set.len(), "sigma2": model.sigma2() }))
        }

        Command::Promp(PrompCmd::Sample(a)) => {
            let model = read_promp(&a.model)?;
            let set = model.sample_trajectories(a.n, cli.seed)?;
            let mut buf = Vec::new();
            io::write_trajectory_csv(&mut buf, &set)?;
            emit(pick(&a.out.out).as_ref(), &buf)?;
            Ok(json!({ "samples": a.n }))
        }

        Command::Promp(PrompCmd::Condition(a)) => {
            let model = read_promp(&a.model)?;
            let vias = a.via.iter().map(|s| s.parse::<ViaPoint>()).collect::<Result<Vec<_>>>()?;
            let cond = model.condition_via_points(&vias)?;
            let bytes = if a.mean {
                let mut buf = Vec::new();
                io::write_trajectory_csv(&mut buf, &TrajectorySet::new(vec![cond.mean_trajectory()?])?)?;
                buf
            } else {
                io::to_json(&io::PrompJson::from_model(&cond))?.into_bytes()
            };
            emit(pick(&a.out.out).as_ref(), &bytes)?;
            Ok(json!({ "via_points": vias.len() }))
        }

        Command::Promp(PrompCmd::Mixture(a)) => {
            let (_, set) = read_trajectories(&a.data)?;
            let em = EmConfig { seed: cli.seed, ..EmConfig::default() };
            let mix = promp_mixture(&set, &family(&a.basis), a.j, a.basis.steps, &em)?;
            emit(pick(&a.out.out).as_ref(), io::to_json(&io::PrompMixtureJson::from_model(&mix))?.as_bytes())?;
            Ok(json!({ "components": a.j, "priors": mix.weight_mixture().priors() }))
        }

        Command::Dataset(DatasetCmd::Gen(a)) => {
            let spec = DatasetSpec {
                shape: a.shape.parse::<Shape>()?,
                demos: a.demos,
                steps: a.steps,
                dim: a.dim,
                noise: a.noise,
                seed: cli.seed,
            };
            let set = generate(&spec)?;
            let mut buf = Vec::new();
            io::write_trajectory_csv(&mut buf, &set)?;
            emit(pick(&a.out.out).as_ref(), &buf)?;
            Ok(json!({ "demonstrations": a.demos, "steps": a.steps }))
        }

        Command::Plot(a) => {
            let need_input =
                || a.input.as_ref().ok_or_else(|| Error::InvalidParameter("--input is required for this plot".into()));
            let svg = match a.kind {
                PlotKind::Trajectory => {
                    let (_, set) = read_trajectories(need_input()?)?;
                    plot::trajectory_svg(&set)
                }
                PlotKind::CoeffHeatmap => {
                    let (k, d, values) = io::read_coeff_csv(read_text(need_input()?)?.as_bytes())?;
                    plot::coeff_heatmap_svg(&values, k, d)?
                }
                PlotKind::BasisFunctions => {
                    let fam = match (&a.input, a.family, a.k) {
                        (Some(p), _, _) => match read_model(p)? {
                            ModelFile::Promp(m) => m.family().clone(),
                            ModelFile::PrompMixture(m) => m.family().clone(),
                            _ => return Err(Error::InvalidParameter("expected a ProMP model".into())),
                        },
                        (None, Some(f), Some(k)) => family(&BasisArgs { family: f, k, steps: None }),
                        _ => {
                            return Err(Error::InvalidParameter(
                                "basis-functions needs --input or --family with --k".into(),
                            ))
                        }
                    };
                    let svg = plot::basis_functions_svg(&fam, 200)?;
                    if matches!(fam, BasisFamily::Radial { .. } | BasisFamily::Bernstein { .. }) {
                        let dev = plot::partition_of_unity_deviation(&fam, 200);
                        if dev > 1e-9 {
                            log::warn!("basis functions deviate from a partition of unity by {dev:e}");
                        }
                    }
                    svg
                }
                PlotKind::CovarianceMatrix => {
                    let m = match read_model(need_input()?)? {
                        ModelFile::Gmm(g) => g
                            .components()
                            .get(a.component)
                            .ok_or_else(|| Error::InvalidParameter(format!("no component {}", a.component)))?
                            .covariance()
                            .clone(),
                        ModelFile::Promp(p) if a.weight_space => p.sigma_w().clone(),
                        ModelFile::Promp(p) => p.trajectory_distribution().covariance().clone(),
                        _ => return Err(Error::InvalidParameter("expected a gmm-v1 or promp-v1 model".into())),
                    };
                    plot::covariance_svg(&m)?
                }
            };
            emit(pick(&a.out.out).as_ref(), svg.as_bytes())?;
            Ok(json!({ "kind": format!("{:?}", a.kind) }))
        }
    }
}
