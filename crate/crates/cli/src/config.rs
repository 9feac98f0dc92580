use clap::{Args, ValueEnum};
use polystar_core::{ParticleParams, RadialGrid};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Spin multiplicity
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub q: u32,

    /// Particle mass
    #[arg(long, global = true, default_value_t = 1.0, value_parser = parse_mass)]
    pub m: f64,

    /// Radial grid nodes for sampled profiles
    #[arg(long, global = true, default_value_t = RadialGrid::DEFAULT_NODES, value_parser = parse_nodes)]
    pub grid_nodes: usize,

    /// Mass tolerance of the minimizer solve
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = parse_positive)]
    pub tol: f64,

    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Leave the version and timestamp out of the report
    #[arg(long, global = true)]
    pub no_meta: bool,
}

/// Resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub q: u32,
    pub m: f64,
    pub grid_nodes: usize,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
}

impl From<&GlobalArgs> for RunConfig {
    fn from(g: &GlobalArgs) -> Self {
        Self { q: g.q, m: g.m, grid_nodes: g.grid_nodes, tol: g.tol, seed: g.seed, format: g.format }
    }
}

impl RunConfig {
    pub fn params(&self) -> ParticleParams {
        ParticleParams { q: self.q, m: self.m }
    }

    pub fn summary(&self) -> String {
        format!(
            "q={} m={} grid_nodes={} tol={:e} seed={} format={}",
            self.q,
            self.m,
            self.grid_nodes,
            self.tol,
            self.seed,
            self.format.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
        )
    }
}

fn parse_mass(s: &str) -> Result<f64, String> {
    let m: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if m >= 0.0 && m.is_finite() {
        Ok(m)
    } else {
        Err(format!("mass must be finite and >= 0, got {s}"))
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_nodes(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    let min = RadialGrid::MIN_INTERVALS + 1;
    if n >= min {
        Ok(n)
    } else {
        Err(format!("need at least {min} grid nodes, got {n}"))
    }
}
