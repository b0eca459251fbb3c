//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 bad input or arguments, 3 a
//! numerical failure (pivot, step size, inconsistent system).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::curves::{parse_curve_spec, CurveSpec, PlaneCurve};
use crate::discrete::{convergence_order, diamond_residual, lattice_csv, sample_lattice};
use crate::error::{Error, Result};
use crate::frieze2::{grid_csv, verify_closed, Tolerances, TwoFrieze};
use crate::projective::conic_test;
use crate::reduction::{reduce, DEFAULT_STEPS};
use crate::symplectic::{limit_check, DeformationFamily, Direction};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "frieze-lab", version, about = "Continuous 2-friezes from closed projective curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit the F,G grid of the frieze as CSV.
    Build(Common),
    /// Verify the frieze identities and the conic test; JSON report.
    Check(Common),
    /// Reduce to a continuous frieze H; H grid CSV and PDE residual.
    Reduce {
        #[command(flatten)]
        common: Common,
        /// Hill integrator steps over the domain.
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Sample the ε-lattice; lattice CSV, diamond residuals, fitted orders.
    Discrete {
        #[command(flatten)]
        common: Common,
        /// Halving lattice spacings (default T/32, T/64, T/128).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Lattice origin `x0,y0`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        origin: Vec<f64>,
    },
    /// Cluster form against the continuous form; limit CSV and report.
    Symplectic {
        #[command(flatten)]
        common: Common,
        /// Direction document for u.
        #[arg(long)]
        u: PathBuf,
        /// Direction document for v.
        #[arg(long)]
        v: PathBuf,
        /// Halving lattice spacings (default T/128, T/256, T/512).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Gauge base point.
        #[arg(long, default_value_t = 0.0)]
        base_point: f64,
        /// Expected limit of cluster/ω.
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        factor: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Curve-spec JSON document.
    #[arg(long)]
    pub curve: PathBuf,
    /// Grid size per axis (at least 8).
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Output directory for CSV and JSON files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Thresholds beyond the frieze identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunTolerances {
    pub frieze: Tolerances,
    pub pde: f64,
    pub order: f64,
    pub ratio: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        Self { frieze: Tolerances::default(), pde: 1e-7, order: 0.25, ratio: 0.1 }
    }
}

impl RunTolerances {
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        let mut t = Self::default();
        for item in overrides {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Malformed(format!("tolerance override `{item}` is not NAME=VALUE")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("tolerance `{name}` has non-numeric value `{value}`")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Constraint(format!("tolerance `{name}` must be positive, got {v}")));
            }
            let f = &mut t.frieze;
            let slot = match name.trim() {
                "frieze" => &mut f.frieze,
                "boundary" => &mut f.boundary,
                "periodicity" => &mut f.periodicity,
                "symmetry" => &mut f.symmetry,
                "sl3" => &mut f.sl3,
                "tame" => &mut f.tame,
                "dodgson" => &mut f.dodgson,
                "self_dual" => &mut f.self_dual,
                "conic" => &mut f.conic,
                "pde" => &mut t.pde,
                "order" => &mut t.order,
                "ratio" => &mut t.ratio,
                other => return Err(Error::Constraint(format!("unknown tolerance `{other}`"))),
            };
            *slot = v;
        }
        Ok(t)
    }
}

/// Validated settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub curve: PlaneCurve,
    pub grid_n: usize,
    pub tol: RunTolerances,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self> {
        if c.grid < 8 {
            return Err(Error::Constraint(format!("--grid must be at least 8, got {}", c.grid)));
        }
        let text = fs::read_to_string(&c.curve)?;
        Ok(Self {
            curve: parse_curve_spec(&text)?,
            grid_n: c.grid,
            tol: RunTolerances::with_overrides(&c.tol)?,
            out: c.out.clone(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let p = self.out.join(name);
        fs::write(&p, contents)?;
        Ok(p)
    }

    fn write_report(&self, name: &str, v: &serde_json::Value) -> Result<()> {
        let text = serde_json::to_string_pretty(v)?;
        self.write(name, &text)?;
        println!("{text}");
        Ok(())
    }
}

/// Applies `FRIEZE_LAB_THREADS` to the global rayon pool.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FRIEZE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Constraint(format!("FRIEZE_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when run from tests; that is not an error
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(&cli.command)) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn dispatch(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Build(c) => cmd_build(&RunConfig::from_common(c)?),
        Command::Check(c) => cmd_check(&RunConfig::from_common(c)?),
        Command::Reduce { common, steps } => cmd_reduce(&RunConfig::from_common(common)?, *steps),
        Command::Discrete { common, eps, origin } => cmd_discrete(&RunConfig::from_common(common)?, eps, origin),
        Command::Symplectic { common, u, v, eps, base_point, factor } => {
            cmd_symplectic(&RunConfig::from_common(common)?, u, v, eps, *base_point, *factor)
        }
    }
}

fn spec_json(curve: &PlaneCurve) -> serde_json::Value {
    serde_json::to_value(CurveSpec::from(curve)).expect("curve spec serializes")
}

fn cmd_build(cfg: &RunConfig) -> Result<bool> {
    let frieze = TwoFrieze::closed(cfg.curve.clone());
    let path = cfg.write("frieze_grid.csv", &grid_csv(&frieze, cfg.grid_n)?)?;
    cfg.write_report(
        "build_report.json",
        &json!({ "curve": spec_json(&cfg.curve), "grid_n": cfg.grid_n, "grid_csv": path }),
    )?;
    Ok(true)
}

fn cmd_check(cfg: &RunConfig) -> Result<bool> {
    let frieze = TwoFrieze::closed(cfg.curve.clone());
    let report = verify_closed(&frieze, cfg.grid_n)?;
    let conic = conic_test(&cfg.curve, cfg.grid_n, cfg.tol.frieze.conic)?;
    let failures = report.failures(&cfg.tol.frieze);
    let self_dual = report.self_duality_defect <= cfg.tol.frieze.self_dual;
    let pass = failures.is_empty();
    cfg.write_report(
        "check_report.json",
        &json!({
            "curve": spec_json(&cfg.curve),
            "report": report,
            "conic_test": conic,
            "self_dual": self_dual,
            "self_duality_consistent": self_dual == conic.is_conic,
            "tolerances": cfg.tol.frieze,
            "failures": failures,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn cmd_reduce(cfg: &RunConfig, steps: usize) -> Result<bool> {
    let frieze = TwoFrieze::closed(cfg.curve.clone());
    let (h, report) = reduce(&frieze, steps, cfg.grid_n)?;
    let path = cfg.write("h_grid.csv", &h.grid_csv(cfg.grid_n)?)?;
    let pass = report.pde_residual <= cfg.tol.pde;
    cfg.write_report(
        "reduce_report.json",
        &json!({ "curve": spec_json(&cfg.curve), "report": report, "pde_tolerance": cfg.tol.pde, "h_csv": path, "pass": pass }),
    )?;
    Ok(pass)
}

/// Default spacings and lattice placement for a curve.
fn lattice_defaults(curve: &PlaneCurve) -> (Vec<f64>, (f64, f64), f64) {
    let (lo, hi) = curve.domain();
    let span = curve.period().unwrap_or(hi - lo);
    let eps = vec![span / 32.0, span / 64.0, span / 128.0];
    (eps, (lo, lo), span)
}

fn cmd_discrete(cfg: &RunConfig, eps: &[f64], origin: &[f64]) -> Result<bool> {
    let frieze = TwoFrieze::closed(cfg.curve.clone());
    let (default_eps, default_origin, span) = lattice_defaults(&cfg.curve);
    let eps = if eps.is_empty() { default_eps } else { eps.to_vec() };
    let origin = match origin {
        [] => default_origin,
        [x, y] => (*x, *y),
        _ => return Err(Error::Malformed("--origin takes two values".into())),
    };
    let n = ((span / (2.0 * eps[0])).floor() as usize).max(3);
    let lattice = sample_lattice(&frieze, eps[0], origin, n)?;
    let stats = diamond_residual(&lattice)?;
    let path = cfg.write("lattice.csv", &lattice_csv(&lattice))?;
    let conv = convergence_order(&frieze, &eps, origin, n)?;
    let ok = |p: f64| (p - 2.0).abs() <= cfg.tol.order || p > 2.0;
    let pass = ok(conv.order_g_from_f) && ok(conv.order_f_from_g);
    cfg.write_report(
        "discrete_report.json",
        &json!({
            "curve": spec_json(&cfg.curve),
            "origin": [origin.0, origin.1],
            "lattice_n": n,
            "residuals": stats,
            "convergence": conv,
            "order_tolerance": cfg.tol.order,
            "lattice_csv": path,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn read_direction(p: &Path) -> Result<Direction> {
    Direction::parse(&fs::read_to_string(p)?)
}

fn cmd_symplectic(cfg: &RunConfig, u: &Path, v: &Path, eps: &[f64], base_point: f64, factor: f64) -> Result<bool> {
    let t = cfg
        .curve
        .period()
        .ok_or_else(|| Error::Constraint("the symplectic check needs a closed curve".into()))?;
    let fu = DeformationFamily::new(&cfg.curve, read_direction(u)?)?;
    let fv = DeformationFamily::new(&cfg.curve, read_direction(v)?)?;
    let eps = if eps.is_empty() { vec![t / 128.0, t / 256.0, t / 512.0] } else { eps.to_vec() };
    let rep = limit_check(&fu, &fv, base_point, &eps)?;
    let path = cfg.write("limit.csv", &rep.csv())?;
    let dev: Vec<f64> = rep.rows.iter().map(|r| (r.ratio - factor).abs()).collect();
    let close = dev.last().is_some_and(|d| *d <= cfg.tol.ratio * factor.abs());
    let contracting = dev.windows(2).all(|w| w[1] <= 0.6 * w[0]);
    let pass = !rep.degenerate && close && contracting;
    cfg.write_report(
        "symplectic_report.json",
        &json!({
            "curve": spec_json(&cfg.curve),
            "limit": rep,
            "expected_factor": factor,
            "ratio_tolerance": cfg.tol.ratio,
            "final_ratio_close": close,
            "deviation_contracting": contracting,
            "limit_csv": path,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}
