//! The index-3 Lane–Emden solution and the normalized blow-up profile `Q`.
//!
//! `Q(r) = A theta(omega r)^3` where `theta'' + (2/xi) theta' + theta^3 = 0`,
//! `theta(0) = 1`, `theta'(0) = 0`. Taking the Laplacian of
//! `(4/3) sigma_f Q^(1/3) - |x|^-1 * Q + 2/3 = 0` gives `omega^2 = 3 pi A^(2/3) / sigma_f`.
//! Outside the support the potential of a unit mass is `1/r`, and it equals `2/3` at
//! the surface, so the support radius is `3/2` and `omega = 2 xi_1 / 3`. Unit mass
//! then fixes `A = omega^3 / (4 pi mu_3)` with `mu_3 = -xi_1^2 theta'(xi_1)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::eos::{k_cl, ParticleParams};
use crate::error::{Error, Result};
use crate::ode::{self, OdeSystem, Tolerances, Trajectory};
use crate::radial::{self, RadialDensity, RadialGrid};

/// Event location tolerance in `xi`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Support radius forced by the normalization.
pub const SUPPORT_RADIUS: f64 = 1.5;

const XI_START: f64 = 1e-6;
const XI_LIMIT: f64 = 20.0;

struct LaneEmden3;

impl OdeSystem<2> for LaneEmden3 {
    fn rhs(&self, xi: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
        dy[0] = y[1];
        dy[1] = -2.0 * y[1] / xi - y[0] * y[0] * y[0];
    }
}

/// Series about the regular singular point: `theta = 1 - xi^2/6 + xi^4/40 + O(xi^6)`.
fn series(xi: f64) -> [f64; 2] {
    let x2 = xi * xi;
    [1.0 - x2 / 6.0 + x2 * x2 / 40.0, -xi / 3.0 + xi * x2 / 10.0]
}

/// Dimensionless solution up to its first zero.
#[derive(Debug, Clone, Serialize)]
pub struct LaneEmdenRaw {
    pub xi: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub xi1: f64,
    pub mu3: f64,
    #[serde(skip)]
    trajectory: Option<Trajectory<2>>,
}

impl LaneEmdenRaw {
    /// `(theta, theta')` at any `xi` in `[0, xi1]`.
    pub fn theta_at(&self, xi: f64) -> Option<[f64; 2]> {
        if !(0.0..=self.xi1).contains(&xi) {
            return None;
        }
        if xi <= XI_START {
            return Some(series(xi));
        }
        self.trajectory.as_ref().map(|t| t.eval(xi))
    }
}

/// Solve to the first zero with `n_samples` uniform samples on `[0, xi1]`.
pub fn solve_lane_emden(tol: f64) -> Result<LaneEmdenRaw> {
    solve_lane_emden_sampled(tol, RadialGrid::DEFAULT_NODES)
}

pub fn solve_lane_emden_sampled(tol: f64, n_samples: usize) -> Result<LaneEmdenRaw> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if n_samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let tolerances = Tolerances { rtol: 1e-13, atol: 1e-15, ..Default::default() };
    let run = ode::integrate(&LaneEmden3, XI_START, series(XI_START), XI_LIMIT, &tolerances, tol, |_, y| y[0])?;
    let xi1 = run.event.ok_or_else(|| Error::Solver(format!("no zero of theta before xi = {XI_LIMIT}")))?;
    let trajectory = run.trajectory;
    let mu3 = -xi1 * xi1 * trajectory.y_end[1];

    let last = (n_samples - 1) as f64;
    let mut xi = Vec::with_capacity(n_samples);
    let mut theta = Vec::with_capacity(n_samples);
    let mut theta_prime = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = xi1 * i as f64 / last;
        let y = if x <= XI_START { series(x) } else { trajectory.eval(x) };
        xi.push(x);
        theta.push(y[0]);
        theta_prime.push(y[1]);
    }
    xi[n_samples - 1] = xi1;
    theta[n_samples - 1] = 0.0;
    theta_prime[n_samples - 1] = trajectory.y_end[1];
    Ok(LaneEmdenRaw { xi, theta, theta_prime, xi1, mu3, trajectory: Some(trajectory) })
}

/// The normalized profile and its universal constants.
#[derive(Debug, Clone, Serialize)]
pub struct LaneEmdenProfile {
    pub xi1: f64,
    pub mu3: f64,
    pub sigma_f: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub omega: f64,
    /// `int Q^(4/3)`
    #[serde(rename = "I_43")]
    pub i43: f64,
    /// `int Q^(2/3)`
    #[serde(rename = "I_23")]
    pub i23: f64,
    /// `D(Q, Q)`
    #[serde(rename = "DQQ")]
    pub dqq: f64,
    #[serde(flatten)]
    pub q: RadialDensity,
}

/// Rescale a raw solution into `Q`. No spin multiplicity enters here.
pub fn build_profile(raw: &LaneEmdenRaw) -> Result<LaneEmdenProfile> {
    let n = raw.theta.len();
    if n < RadialGrid::MIN_INTERVALS + 1 || raw.xi.len() != n {
        return Err(Error::Solver("raw Lane-Emden solution has too few samples".into()));
    }
    if raw.theta[0] != 1.0 || raw.theta.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Solver("raw Lane-Emden samples are not strictly decreasing from 1".into()));
    }
    if !(raw.mu3 > 0.0) {
        return Err(Error::Solver(format!("nonpositive mass integral mu3 = {}", raw.mu3)));
    }
    let omega = raw.xi1 / SUPPORT_RADIUS;
    let amplitude = omega.powi(3) / (4.0 * PI * raw.mu3);
    let sigma_f = 3.0 * PI * amplitude.powf(2.0 / 3.0) / (omega * omega);

    let grid = RadialGrid::uniform(SUPPORT_RADIUS, n)?;
    let values = raw.theta.iter().map(|t| amplitude * t.max(0.0).powi(3)).collect();
    let q = RadialDensity::new(grid, values)?;
    let i43 = q.integrate(|v| v.powf(4.0 / 3.0));
    let i23 = q.integrate(|v| v.powf(2.0 / 3.0));
    let dqq = radial::coulomb_direct(&q, &q);
    Ok(LaneEmdenProfile { xi1: raw.xi1, mu3: raw.mu3, sigma_f, amplitude, omega, i43, i23, dqq, q })
}

impl LaneEmdenProfile {
    /// Critical coupling `tau_c = K_cl(q) / sigma_f`.
    pub fn tau_c(&self, q: u32) -> Result<f64> {
        Ok(k_cl(q)? / self.sigma_f)
    }

    /// Collapse amplitude `(3/4) m sqrt(int Q^(2/3) / K_cl)`.
    pub fn lambda(&self, params: &ParticleParams) -> Result<f64> {
        Ok(0.75 * params.m * (self.i23 / k_cl(params.q)?).sqrt())
    }

    pub fn support_radius(&self) -> f64 {
        self.q.grid().r_max()
    }

    pub fn density(&self) -> &RadialDensity {
        &self.q
    }

    /// `sup |(4/3) sigma_f Q^(1/3) - (|x|^-1 * Q) + 2/3|` over the interior of the support.
    pub fn euler_lagrange_residual(&self) -> f64 {
        let phi = radial::newton_potential(&self.q);
        self.q
            .values()
            .iter()
            .zip(&phi)
            .filter(|(v, _)| **v > 0.0)
            .map(|(v, p)| (4.0 / 3.0 * self.sigma_f * v.cbrt() - p + 2.0 / 3.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn tau_c(profile: &LaneEmdenProfile, q: u32) -> Result<f64> {
    profile.tau_c(q)
}

pub fn lambda_const(profile: &LaneEmdenProfile, params: &ParticleParams) -> Result<f64> {
    profile.lambda(params)
}

static REFERENCE: OnceLock<std::result::Result<LaneEmdenProfile, String>> = OnceLock::new();

/// Process-wide profile at default resolution, computed on first use.
pub fn reference() -> Result<&'static LaneEmdenProfile> {
    REFERENCE
        .get_or_init(|| solve_lane_emden(DEFAULT_TOL).and_then(|raw| build_profile(&raw)).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Solver(e.clone()))
}
