//! Command-line front end: argument parsing, dispatch and exit codes.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimator::{bayes_estimate_orbit, bayes_risk_s2, LinearPrior};
use crate::geom::{sample_haar_so3, UnitVector};
use crate::matdecomp::RealMatrix;
use crate::matio::{fmt_f64, format_complex_csv, format_real_csv, read_complex_csv, read_real_csv};
use crate::orbits::{project, OrbitMatrix, OrbitSpec};
use crate::parallel::stream_rng;
use crate::posterior::{verify_posterior_integral_seeded, PosteriorModel};
use crate::regression::{fit_extrinsic_so3, fit_intrinsic_so3, FitMethod, RegressionDataset};
use crate::simlab::{emit_artifacts, run_simulation, DesignPolicy, SimulationConfig};

/// Seed used when neither `--seed` nor `ORBITKIT_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_917;
/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "ORBITKIT_SEED";
/// Input directions must have norm within this of 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "orbitkit",
    version,
    about = "Orbit projections, Bayes estimators and rotation regression"
)]
pub struct Cli {
    /// Print the resolved configuration to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrbitKind {
    Sphere,
    Stiefel,
    Grassmannian,
    SvdOrbit,
    Lagrangian,
    Isotropic,
    ComplexStructures,
    CompactGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateOrbit {
    Sphere,
    CompactGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Extrinsic,
    Intrinsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    Fixed,
    Redrawn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a matrix onto an orbit.
    Project {
        /// Orbit type.
        #[arg(long, value_enum)]
        orbit: OrbitKind,
        /// Comma-separated orbit parameters: `n` (sphere, lagrangian,
        /// compact-group), `k,n` (stiefel, grassmannian, isotropic), block
        /// count `n` (complex-structures), or the singular values (svd-orbit).
        /// Dimensions default to the input shape where possible.
        #[arg(long)]
        params: Option<String>,
        /// Input matrix CSV; complex orbits read `re+imj` entries.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear-prior Bayes estimate on the sphere or SO(3).
    Estimate {
        #[arg(long, value_enum, default_value = "sphere")]
        orbit: EstimateOrbit,
        /// Observation CSV (a vector, or a 3×3 matrix for compact-group).
        #[arg(long)]
        x: PathBuf,
        /// Prior direction CSV, same shape as the observation.
        #[arg(long)]
        v: PathBuf,
        /// Prior strength α; β is fixed to 1.
        #[arg(long)]
        alpha: f64,
        /// Noise scale ε.
        #[arg(long)]
        epsilon: f64,
    },
    /// Fit a rotation to direction pairs.
    Regress {
        #[arg(long, value_enum)]
        method: Method,
        /// CSV with columns θx, θy, θz, yx, yy, yz.
        #[arg(long)]
        data: PathBuf,
    },
    /// Monte Carlo study of the geodesic-loss regressor.
    Simulate {
        /// Design points per draw.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Draws per noise level.
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        /// Noise levels as `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0.1:0.9:0.1")]
        sigmas: String,
        /// Master seed; falls back to ORBITKIT_SEED, then 20240917
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for CSV and SVG files.
        #[arg(long)]
        out: PathBuf,
        /// Share one design across draws or redraw it for each draw
        #[arg(long, value_enum, default_value = "fixed")]
        design: Design,
        /// Worker threads; output does not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Monte Carlo check of the posterior integral against its closed form.
    BayesVerify {
        /// Coupling c of the density 1 + c·tr(γᵀx), |c| ≤ 0.3.
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        /// Monte Carlo samples, at least 10000
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Master seed; falls back to ORBITKIT_SEED, then 20240917
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate at the estimator itself (γ̂ = x) instead of a random γ̂.
        #[arg(long)]
        at_estimator: bool,
        /// Worker threads; output does not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub seed: u64,
    pub verbose: bool,
}

fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match env {
        Some(s) => s.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "{SEED_ENV}={s:?} is not an unsigned 64-bit integer"
            ))
        }),
        None => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

/// Parses `argv`, runs the subcommand and returns the exit code.
/// Reads `ORBITKIT_SEED` from the process environment.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    dispatch_with_env(args, env.as_deref(), out, err)
}

/// [`dispatch`] with the seed override passed explicitly.
pub fn dispatch_with_env<I, T>(
    args: I,
    seed_env: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(cli, seed_env, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_computational() {
                EXIT_COMPUTATION
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn run(cli: Cli, seed_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (name, seed_flag) = match &cli.command {
        Command::Project { .. } => ("project", None),
        Command::Estimate { .. } => ("estimate", None),
        Command::Regress { .. } => ("regress", None),
        Command::Simulate { seed, .. } => ("simulate", *seed),
        Command::BayesVerify { seed, .. } => ("bayes-verify", *seed),
    };
    let config = RunConfig {
        subcommand: name,
        seed: resolve_seed(seed_flag, seed_env)?,
        verbose: cli.verbose,
    };
    if config.verbose {
        writeln!(err, "{config:?}")?;
        writeln!(err, "{:?}", cli.command)?;
    }
    match cli.command {
        Command::Project {
            orbit,
            params,
            input,
            out: path,
        } => {
            let text = run_project(orbit, params.as_deref(), &input)?;
            emit(out, path.as_deref(), &text)
        }
        Command::Estimate {
            orbit,
            x,
            v,
            alpha,
            epsilon,
        } => {
            let text = run_estimate(orbit, &x, &v, alpha, epsilon)?;
            emit(out, None, &text)
        }
        Command::Regress { method, data } => {
            let text = run_regress(method, &data)?;
            emit(out, None, &text)
        }
        Command::Simulate {
            k,
            draws,
            sigmas,
            out: dir,
            design,
            threads,
            ..
        } => {
            let mut sim = SimulationConfig::new(k, draws, parse_sigmas(&sigmas)?, config.seed)?;
            sim.design_policy = match design {
                Design::Fixed => DesignPolicy::FixedAcrossDraws,
                Design::Redrawn => DesignPolicy::RedrawnPerDraw,
            };
            sim.threads = threads.max(1);
            let report = run_simulation(&sim)?;
            let files = emit_artifacts(&report, &dir)?;
            let per_sigma: Vec<_> = report
                .sigmas
                .iter()
                .map(|r| {
                    json!({
                        "sigma": r.sigma,
                        "draws": r.euler.len(),
                        "failures": r.failure_count(),
                        "ks_p": r.p_values(),
                    })
                })
                .collect();
            let summary = json!({
                "seed": config.seed,
                "k": k,
                "draws": draws,
                "failures": report.total_failures(),
                "rejections_at_1pct": report.rejections(0.01),
                "files_written": files.len(),
                "sigmas": per_sigma,
            });
            emit(out, None, &format!("{summary}\n"))
        }
        Command::BayesVerify {
            c,
            samples,
            at_estimator,
            threads,
            ..
        } => {
            let text = run_bayes_verify(c, samples, config.seed, at_estimator, threads)?;
            emit(out, None, &text)
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad parameter {t:?}")))
        })
        .collect()
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `start:stop:step` (inclusive, values rounded to 1e-12) or `a,b,c`.
pub fn parse_sigmas(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if !s.contains(':') {
        return parse_list(s);
    }
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad sigma range {s:?}")))
        })
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::Parse(format!(
            "sigma range {s:?} must be start:stop:step"
        )));
    };
    if !(step > 0.0) || !(stop >= start) || !step.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty or invalid sigma range {s:?}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| round12(start + i as f64 * step)).collect())
}

fn dims(params: &[usize], want: usize, orbit: &str) -> Result<()> {
    if params.len() == want {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{orbit} takes {want} parameter(s), got {}",
            params.len()
        )))
    }
}

fn build_spec(
    kind: OrbitKind,
    params: Option<&str>,
    rows: usize,
    cols: usize,
) -> Result<OrbitSpec> {
    if kind == OrbitKind::SvdOrbit {
        let base = parse_list::<f64>(params.ok_or_else(|| {
            Error::InvalidArgument("svd-orbit needs --params with the singular values".into())
        })?)?;
        return Ok(OrbitSpec::SvdOrbit { rows, cols, base });
    }
    let p: Vec<usize> = params.map(parse_list).transpose()?.unwrap_or_default();
    let given = !p.is_empty();
    let spec = match kind {
        OrbitKind::Sphere => {
            if given {
                dims(&p, 1, "sphere")?;
            }
            OrbitSpec::Sphere {
                n: if given { p[0] } else { rows * cols },
            }
        }
        OrbitKind::Stiefel => {
            if given {
                dims(&p, 2, "stiefel")?;
                OrbitSpec::Stiefel { k: p[0], n: p[1] }
            } else {
                OrbitSpec::Stiefel { k: cols, n: rows }
            }
        }
        OrbitKind::Grassmannian | OrbitKind::Isotropic => {
            let name = if kind == OrbitKind::Grassmannian {
                "grassmannian"
            } else {
                "isotropic"
            };
            let (k, n) = match p.len() {
                1 => (p[0], rows),
                2 => (p[0], p[1]),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "{name} needs --params k or k,n"
                    )))
                }
            };
            if kind == OrbitKind::Grassmannian {
                OrbitSpec::Grassmannian { k, n }
            } else {
                OrbitSpec::IsotropicGrassmannian { k, n }
            }
        }
        OrbitKind::Lagrangian | OrbitKind::CompactGroup | OrbitKind::ComplexStructures => {
            if given {
                dims(&p, 1, "this orbit")?;
            }
            let n = if given {
                p[0]
            } else if kind == OrbitKind::ComplexStructures {
                rows / 2
            } else {
                rows
            };
            match kind {
                OrbitKind::Lagrangian => OrbitSpec::LagrangianGrassmannian { n },
                OrbitKind::CompactGroup => OrbitSpec::CompactGroup { n },
                _ => OrbitSpec::ComplexStructures { n },
            }
        }
        OrbitKind::SvdOrbit => unreachable!("handled above"),
    };
    spec.validate()?;
    Ok(spec)
}

fn run_project(kind: OrbitKind, params: Option<&str>, input: &Path) -> Result<String> {
    let complex = matches!(kind, OrbitKind::Lagrangian | OrbitKind::Isotropic);
    let x = if complex {
        OrbitMatrix::Complex(read_complex_csv(input)?)
    } else {
        let m = read_real_csv(input)?;
        if kind == OrbitKind::Sphere && m.nrows() == 1 {
            OrbitMatrix::Real(m.transpose())
        } else {
            OrbitMatrix::Real(m)
        }
    };
    let (rows, cols) = x.shape();
    let spec = build_spec(kind, params, rows, cols)?;
    Ok(match project(&spec, &x)?.into_value() {
        OrbitMatrix::Real(m) => format_real_csv(&m),
        OrbitMatrix::Complex(m) => format_complex_csv(&m),
    })
}

fn as_column(m: RealMatrix) -> RealMatrix {
    if m.nrows() == 1 {
        m.transpose()
    } else {
        m
    }
}

fn run_estimate(
    orbit: EstimateOrbit,
    x: &Path,
    v: &Path,
    alpha: f64,
    epsilon: f64,
) -> Result<String> {
    let (x, v) = match orbit {
        EstimateOrbit::Sphere => (as_column(read_real_csv(x)?), as_column(read_real_csv(v)?)),
        EstimateOrbit::CompactGroup => (read_real_csv(x)?, read_real_csv(v)?),
    };
    if x.shape() != v.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", x.shape()),
            found: format!("{:?}", v.shape()),
        });
    }
    let spec = match orbit {
        EstimateOrbit::Sphere => OrbitSpec::Sphere { n: x.nrows() },
        EstimateOrbit::CompactGroup => OrbitSpec::CompactGroup { n: x.nrows() },
    };
    let prior = LinearPrior::new(v, alpha, 1.0);
    let result = bayes_estimate_orbit(&spec, &OrbitMatrix::Real(x), &prior, epsilon)?;
    let estimate = result.estimate.value().as_real().expect("real orbit");
    let mut text = format_real_csv(estimate);
    text.push_str(&format!("step_length,{}\n", fmt_f64(result.step_length)));
    if spec == (OrbitSpec::Sphere { n: 3 }) {
        let risk = bayes_risk_s2(&prior, epsilon)?;
        text.push_str(&format!("order2_coeff,{}\n", fmt_f64(risk.order2_coeff)));
        text.push_str(&format!("order4_coeff,{}\n", fmt_f64(risk.order4_coeff)));
    }
    Ok(text)
}

fn unit(v: Vector3<f64>, row: usize) -> Result<UnitVector> {
    let n = v.norm();
    if !((n - 1.0).abs() <= UNIT_NORM_TOLERANCE) {
        return Err(Error::InvalidArgument(format!(
            "row {}: vector norm {n} is not within {UNIT_NORM_TOLERANCE} of 1",
            row + 1
        )));
    }
    UnitVector::normalize(v)
}

/// Reads the six-column pairs file into a dataset.
pub fn read_pairs(path: &Path) -> Result<RegressionDataset> {
    let m = read_real_csv(path)?;
    if m.ncols() != 6 {
        return Err(Error::ShapeMismatch {
            expected: "6 columns".into(),
            found: format!("{} columns", m.ncols()),
        });
    }
    let mut design = Vec::with_capacity(m.nrows());
    let mut obs = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        design.push(unit(Vector3::new(m[(i, 0)], m[(i, 1)], m[(i, 2)]), i)?);
        obs.push(unit(Vector3::new(m[(i, 3)], m[(i, 4)], m[(i, 5)]), i)?);
    }
    RegressionDataset::new(design, obs)
}

fn run_regress(method: Method, data: &Path) -> Result<String> {
    let data = read_pairs(data)?;
    let fit = match method {
        Method::Extrinsic => fit_extrinsic_so3(&data)?,
        Method::Intrinsic => fit_intrinsic_so3(&data, None)?,
    };
    let gamma = RealMatrix::from_iterator(3, 3, fit.gamma.matrix().iter().copied());
    let diag = json!({
        "method": match fit.method {
            FitMethod::Extrinsic => "extrinsic",
            FitMethod::Intrinsic => "intrinsic",
        },
        "iterations": fit.iterations,
        "residual_norm": fmt_f64(fit.residual_norm),
        "converged": fit.converged,
    });
    Ok(format!("{}{diag}\n", format_real_csv(&gamma)))
}

fn run_bayes_verify(
    c: f64,
    samples: usize,
    seed: u64,
    at_estimator: bool,
    threads: usize,
) -> Result<String> {
    // Stream 0 picks the statistic and test rotations; Monte Carlo uses `seed + 1`.
    let mut rng = stream_rng(seed, 0);
    let x = sample_haar_so3(&mut rng);
    let alpha = sample_haar_so3(&mut rng);
    let other = sample_haar_so3(&mut rng);
    let gamma_hat = if at_estimator { x } else { other };
    let model = PosteriorModel::new(c, x)?;
    let r = verify_posterior_integral_seeded(
        &model,
        &gamma_hat,
        &alpha,
        samples,
        seed.wrapping_add(1),
        threads.max(1),
    )?;
    let rel = r.relative_error().map(fmt_f64);
    let doc = json!({
        "c": fmt_f64(c),
        "samples": samples,
        "seed": seed,
        "at_estimator": at_estimator,
        "euler_y": fmt_f64(r.euler_y),
        "numeric": fmt_f64(r.numeric),
        "std_error": fmt_f64(r.std_error),
        "analytic": fmt_f64(r.analytic),
        "relative_error": rel,
    });
    Ok(format!("{doc}\n"))
}
