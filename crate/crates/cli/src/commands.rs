use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args};
use polystar_core::chandra::{self, SolverOptions};
use polystar_core::collapse::{self, DEFAULT_EPS_FRACS};
use polystar_core::{hfb, lane_emden, radial, Error, RadialDensity};
use serde_json::{json, Value};

use crate::config::{parse_positive, RunConfig};
use crate::report::{cell, Report};

#[derive(Debug, Args)]
pub struct LaneEmdenArgs {
    /// Write the profile Q as two columns `r rho`
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("coupling").required(true).args(["tau_frac", "tau"])))]
pub struct ChandraArgs {
    /// Coupling as a fraction of tau_c
    #[arg(long, value_parser = parse_positive)]
    pub tau_frac: Option<f64>,

    /// Absolute coupling
    #[arg(long, value_parser = parse_positive)]
    pub tau: Option<f64>,

    /// Write the density as two columns `r rho`
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    /// Gaps (tau_c - tau) / tau_c, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub eps_fracs: Option<Vec<f64>>,

    /// Worker threads (default: logical cores)
    #[arg(long, env = "POLYSTAR_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HfbArgs {
    /// Particle number
    #[arg(long = "n", value_parser = parse_positive)]
    pub n: f64,

    /// Exponent in tau_N = tau_c - N^(-beta)
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct HlsArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

/// Failure of a subcommand, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Numerical(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_domain_violation() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

fn write_profile(rho: &RadialDensity, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::Numerical(format!("cannot create {}: {e}", path.display())))?;
    rho.write_two_column(BufWriter::new(file))?;
    Ok(())
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tol, grid_nodes: cfg.grid_nodes, ..Default::default() }
}

pub fn lane_emden(cfg: &RunConfig, args: &LaneEmdenArgs) -> Result<Report, Failure> {
    let params = cfg.params();
    let raw = lane_emden::solve_lane_emden_sampled(lane_emden::DEFAULT_TOL, cfg.grid_nodes)?;
    let p = lane_emden::build_profile(&raw)?;
    let tau_c = p.tau_c(params.q)?;
    let lambda = p.lambda(&params)?;
    if let Some(path) = &args.profile_out {
        write_profile(p.density(), path)?;
    }
    let values = [p.xi1, p.mu3, p.sigma_f, tau_c, lambda, p.i43, p.i23, p.dqq];
    let result = json!({
        "xi1": p.xi1,
        "mu3": p.mu3,
        "sigma_f": p.sigma_f,
        "tau_c": tau_c,
        "Lambda": lambda,
        "I_43": p.i43,
        "I_23": p.i23,
        "DQQ": p.dqq,
        "support_radius": p.support_radius(),
        "euler_lagrange_residual": p.euler_lagrange_residual(),
    });
    Ok(Report {
        command: "lane-emden",
        result,
        header: vec!["xi1", "mu3", "sigma_f", "tau_c", "Lambda", "I_43", "I_23", "DQQ"],
        rows: vec![values.iter().map(|v| cell(*v)).collect()],
        notes: vec![],
    })
}

pub fn chandra(cfg: &RunConfig, args: &ChandraArgs) -> Result<Report, Failure> {
    let params = cfg.params();
    let tau_c = lane_emden::reference()?.tau_c(params.q)?;
    let tau = match (args.tau, args.tau_frac) {
        (Some(t), _) => t,
        (None, Some(f)) => f * tau_c,
        (None, None) => unreachable!("clap enforces one of --tau, --tau-frac"),
    };
    let model = chandra::solve_minimizer_with(tau, &params, &solver_options(cfg))?;
    if let Some(path) = &args.profile_out {
        write_profile(&model.rho, path)?;
    }
    let mut result = serde_json::to_value(&model).map_err(|e| Failure::Numerical(e.to_string()))?;
    result["tau_c"] = json!(tau_c);
    result["euler_lagrange_residual"] = json!(model.euler_lagrange_residual());
    let e = model.energy;
    let row = [tau, f64::from(params.q), params.m, model.u_c, model.mu, model.r_star, e.kinetic, e.direct, e.total];
    Ok(Report {
        command: "chandra",
        result,
        header: vec!["tau", "q", "m", "u_c", "mu", "R_star", "kinetic", "direct", "total"],
        rows: vec![row.iter().map(|v| cell(*v)).collect()],
        notes: vec![],
    })
}

pub fn collapse(cfg: &RunConfig, args: &CollapseArgs) -> Result<Report, Failure> {
    let params = cfg.params();
    let fracs = args.eps_fracs.clone().unwrap_or_else(|| DEFAULT_EPS_FRACS.to_vec());
    let profile = lane_emden::reference()?;
    let tau_c = profile.tau_c(params.q)?;
    let two_lambda = 2.0 * profile.lambda(&params)?;
    let records = collapse::sweep_fracs(&fracs, &params, &solver_options(cfg), args.jobs.unwrap_or(0))?;
    if !records.iter().any(|r| r.is_ok()) {
        let first = records.first().map(|r| r.status.label()).unwrap_or_default();
        return Err(Failure::Numerical(format!("every solve in the sweep failed ({first})")));
    }
    let fit = collapse::fit_two_lambda(&records);
    let mut notes = vec![format!("two_lambda={two_lambda}"), format!("tau_c={tau_c}")];
    let fit_value = match &fit {
        Ok(f) => {
            notes.insert(
                0,
                format!(
                    "fit intercept={} slope={} r_squared={} points={} rel_dev={}",
                    f.intercept,
                    f.slope,
                    f.r_squared,
                    f.points,
                    f.intercept / two_lambda - 1.0
                ),
            );
            json!(f)
        }
        Err(e) => {
            notes.insert(0, format!("fit unavailable: {e}"));
            Value::Null
        }
    };
    let rows = records
        .iter()
        .map(|r| {
            let mut row: Vec<String> =
                [r.tau, r.eps, r.energy, r.ratio, r.kinetic_scaled, r.d1, r.d43].iter().map(|v| cell(*v)).collect();
            row.push(r.status.label());
            row
        })
        .collect();
    let result = json!({
        "tau_c": tau_c,
        "two_lambda": two_lambda,
        "records": records,
        "fit": fit_value,
    });
    Ok(Report {
        command: "collapse",
        result,
        header: vec!["tau", "eps", "E", "ratio", "kinetic_scaled", "d1", "d43", "status"],
        rows,
        notes,
    })
}

pub fn hfb_bounds(cfg: &RunConfig, args: &HfbArgs) -> Result<Report, Failure> {
    let params = cfg.params();
    let s = hfb::sandwich_with(args.n, args.beta, &params, &solver_options(cfg))?;
    let c = &s.couplings;
    let row = vec![
        cell(c.n),
        cell(c.beta),
        cell(c.tau_n),
        cell(c.kappa),
        cell(c.eps_ly),
        cell(c.kappa_prime),
        cell(c.tau_prime),
        s.lower.map(cell).unwrap_or_default(),
        cell(s.upper),
        cell(s.reference),
        s.valid.to_string(),
        s.violated_condition.unwrap_or("").to_owned(),
    ];
    let mut notes = Vec::new();
    if s.regime_warning {
        notes.push(format!("warning: beta = {} lies outside (0, {})", c.beta, hfb::BETA_MAX));
    }
    Ok(Report {
        command: "hfb-bounds",
        result: serde_json::to_value(&s).map_err(|e| Failure::Numerical(e.to_string()))?,
        header: vec![
            "N",
            "beta",
            "tau_N",
            "kappa",
            "eps_LY",
            "kappa_prime",
            "tau_prime",
            "lower",
            "upper",
            "reference",
            "valid",
            "violated_condition",
        ],
        rows: vec![row],
        notes,
    })
}

pub fn hls_check(cfg: &RunConfig, args: &HlsArgs) -> Result<Report, Failure> {
    let check = radial::hls_check(args.samples, cfg.seed, &cfg.params(), cfg.grid_nodes)?;
    let row = vec![
        check.samples.to_string(),
        check.seed.to_string(),
        cell(check.min_deficit),
        cell(check.max_deficit),
        check.argmin.to_string(),
        cell(check.deficit_of_q),
    ];
    Ok(Report {
        command: "hls-check",
        result: serde_json::to_value(&check).map_err(|e| Failure::Numerical(e.to_string()))?,
        header: vec!["samples", "seed", "min_deficit", "max_deficit", "argmin", "deficit_of_q"],
        rows: vec![row],
        notes: vec![],
    })
}
