//! Minimizers of the Chandrasekhar functional by shooting on the structure equation.
//!
//! With `u = [tau Phi - mu]_+` and `rho(u) = (q / 6 pi^2)(u^2 - m^2)_+^(3/2)`, the
//! Euler–Lagrange equation becomes `u'' + (2/r) u' = -4 pi tau rho(u)`, `u'(0) = 0`.
//! The equation is integrated in the scale-free variables
//!
//! ```text
//! a = m / u_c,   u = u_c w(x),   r = x / (b u_c),   b^2 = 2 tau q / (3 pi)
//! w'' + (2/x) w' = -(w^2 - a^2)_+^(3/2),   w(0) = 1,
//! ```
//!
//! so the surface `w = a` stays at `x = O(1)` however large `u_c` becomes near `tau_c`.
//! The energy integrals are carried along as extra ODE components.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::eos::{kinetic_density, ParticleParams};
use crate::error::{Error, Result};
use crate::lane_emden;
use crate::ode::{self, OdeSystem, Tolerances, Trajectory};
use crate::radial::{self, RadialDensity, RadialGrid};

/// Default extent of the physical radial domain, in units of `1/m`.
pub const DEFAULT_R_MAX: f64 = 50.0;
pub const DEFAULT_TOL: f64 = 1e-10;

const X_START: f64 = 1e-6;
const BRACKET_STEPS: usize = 80;
const SCAN_POINTS: usize = 12;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Target for `|mass - 1|`.
    pub tol: f64,
    pub grid_nodes: usize,
    pub r_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, grid_nodes: RadialGrid::DEFAULT_NODES, r_max: DEFAULT_R_MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    /// `int j_m(rho)`
    pub kinetic: f64,
    /// `(tau / 2) D(rho, rho)`
    pub direct: f64,
    pub total: f64,
}

impl Energy {
    fn new(kinetic: f64, direct: f64) -> Self {
        Self { kinetic, direct, total: kinetic - direct }
    }
}

/// Solution of the structure equation for one central value `u_c`.
#[derive(Debug, Clone)]
pub struct Structure {
    pub tau: f64,
    pub params: ParticleParams,
    pub u_c: f64,
    pub mass: f64,
    pub mu: f64,
    pub r_star: f64,
    /// Energies from integrals accumulated during the integration.
    pub energy: Energy,
    pub rho: RadialDensity,
}

/// Minimizer of the Chandrasekhar functional at unit mass.
#[derive(Debug, Clone)]
pub struct StellarModel {
    pub tau: f64,
    pub params: ParticleParams,
    pub u_c: f64,
    pub rho: RadialDensity,
    pub mu: f64,
    pub r_star: f64,
    pub energy: Energy,
    /// Whether the coarse scan of mass against `u_c` was increasing.
    pub scan_monotone: bool,
}

impl Serialize for StellarModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            tau: f64,
            q: u32,
            m: f64,
            u_c: f64,
            mu: f64,
            #[serde(rename = "R_star")]
            r_star: f64,
            energy: &'a Energy,
            profile: &'a RadialDensity,
        }
        Repr {
            tau: self.tau,
            q: self.params.q,
            m: self.params.m,
            u_c: self.u_c,
            mu: self.mu,
            r_star: self.r_star,
            energy: &self.energy,
            profile: &self.rho,
        }
        .serialize(s)
    }
}

impl StellarModel {
    pub fn mass(&self) -> f64 {
        self.rho.mass()
    }

    /// Energies recomputed from the sampled density by quadrature.
    pub fn quadrature_energy(&self) -> Energy {
        energy(&self.rho, self.tau, &self.params)
    }

    /// `sup |sqrt(eta^2 + m^2) - [tau Phi - mu]_+|` over the support, with `Phi` the
    /// Newton potential of the sampled density.
    pub fn euler_lagrange_residual(&self) -> f64 {
        let phi = radial::newton_potential(&self.rho);
        let (q, m) = (self.params.q, self.params.m);
        self.rho
            .values()
            .iter()
            .zip(&phi)
            .filter(|(v, _)| **v > 0.0)
            .map(|(&v, &p)| {
                let eta = crate::eos::fermi_momentum(v, q);
                (eta.hypot(m) - (self.tau * p - self.mu).max(0.0)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `j_m` side: `int j_m(rho)`, direct: `(tau/2) D(rho, rho)`.
pub fn energy(rho: &RadialDensity, tau: f64, params: &ParticleParams) -> Energy {
    let kinetic = rho.integrate(|v| kinetic_density(crate::eos::fermi_momentum(v, params.q), params.m, params.q));
    let direct = 0.5 * tau * radial::coulomb_direct(rho, rho);
    Energy::new(kinetic, direct)
}

/// State: `w, w', int x^2 j(e; a), int x^2 e^3 w` with `e = sqrt(w^2 - a^2)`.
struct ScaleFree {
    a: f64,
    q: u32,
}

impl ScaleFree {
    fn e(&self, w: f64) -> f64 {
        (w * w - self.a * self.a).max(0.0).sqrt()
    }

    fn seed(&self, x: f64) -> [f64; 4] {
        let s = (1.0 - self.a * self.a).powf(1.5);
        let c4 = s * 3.0 * (1.0 - self.a * self.a).sqrt() / 120.0;
        let x2 = x * x;
        let w = 1.0 - s * x2 / 6.0 + c4 * x2 * x2;
        let e = self.e(1.0);
        let vol = x2 * x / 3.0;
        [w, -s * x / 3.0 + 4.0 * c4 * x2 * x, vol * kinetic_density(e, self.a, self.q), vol * e.powi(3)]
    }
}

impl OdeSystem<4> for ScaleFree {
    fn rhs(&self, x: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let e = self.e(y[0]);
        let e3 = e * e * e;
        dy[0] = y[1];
        dy[1] = -2.0 * y[1] / x - e3;
        dy[2] = x * x * kinetic_density(e, self.a, self.q);
        dy[3] = x * x * e3 * y[0];
    }
}

fn coupling_scale(tau: f64, q: u32) -> f64 {
    (2.0 * tau * f64::from(q) / (3.0 * PI)).sqrt()
}

struct Shot {
    b: f64,
    x_s: f64,
    y_s: [f64; 4],
    trajectory: Trajectory<4>,
    sys: ScaleFree,
}

impl Shot {
    fn mass(&self, tau: f64) -> f64 {
        -self.x_s * self.x_s * self.y_s[1] / (self.b * tau)
    }

    fn w(&self, x: f64) -> f64 {
        if x <= X_START {
            self.sys.seed(x)[0]
        } else {
            self.trajectory.eval(x)[0]
        }
    }
}

fn shoot(tau: f64, u_c: f64, params: &ParticleParams, r_max: f64) -> Result<Shot> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("coupling must be positive, got {tau}")));
    }
    if !(u_c > params.m) || !u_c.is_finite() {
        return Err(Error::domain(format!("central value u_c = {u_c} must exceed the particle mass m = {}", params.m)));
    }
    let a = params.m / u_c;
    let b = coupling_scale(tau, params.q);
    let sys = ScaleFree { a, q: params.q };
    let x_max = r_max * b * u_c;
    if !(x_max > X_START) {
        return Err(Error::domain(format!("radial extent {r_max} is too small")));
    }
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let run = ode::integrate(&sys, X_START, sys.seed(X_START), x_max, &tol, 1e-14, |_, y| y[0] - a)?;
    let x_s = run.event.ok_or_else(|| {
        Error::Solver(format!("no surface before r_max = {r_max} (tau = {tau}, u_c = {u_c}); the star is too diffuse"))
    })?;
    let y_s = run.trajectory.y_end;
    Ok(Shot { b, x_s, y_s, trajectory: run.trajectory, sys })
}

/// Integrate the structure equation from `u(0) = u_c` out to the surface `u = m`.
///
/// `m = 0` is accepted: the equation is then the index-3 Lane–Emden equation and the
/// mass does not depend on `u_c`.
pub fn integrate_structure(tau: f64, u_c: f64, params: &ParticleParams) -> Result<Structure> {
    integrate_structure_with(tau, u_c, params, &SolverOptions::default())
}

pub fn integrate_structure_with(
    tau: f64,
    u_c: f64,
    params: &ParticleParams,
    opts: &SolverOptions,
) -> Result<Structure> {
    let shot = shoot(tau, u_c, params, opts.r_max)?;
    build_structure(tau, u_c, params, &shot, opts.grid_nodes)
}

fn build_structure(tau: f64, u_c: f64, params: &ParticleParams, shot: &Shot, n: usize) -> Result<Structure> {
    let (b, q) = (shot.b, params.q);
    let mass = shot.mass(tau);
    let r_star = shot.x_s / (b * u_c);
    let mu = tau * mass / r_star - params.m;

    let q6 = f64::from(q) / (6.0 * PI * PI);
    let b3 = b * b * b;
    let kinetic = 4.0 * PI * u_c / b3 * shot.y_s[2];
    let rho_u = 4.0 * PI * u_c * q6 / b3 * shot.y_s[3];
    let direct = 0.5 * (rho_u + mu * mass);

    let grid = RadialGrid::uniform(r_star, n)?;
    let scale = q6 * u_c.powi(3);
    let x_of = b * u_c;
    let mut values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let e = shot.sys.e(shot.w(r * x_of));
            scale * e * e * e
        })
        .collect();
    *values.last_mut().unwrap() = 0.0;
    let rho = RadialDensity::new(grid, values)?;
    Ok(Structure { tau, params: *params, u_c, mass, mu, r_star, energy: Energy::new(kinetic, direct), rho })
}

/// Minimizer at unit mass with default options and the given mass tolerance.
pub fn solve_minimizer(tau: f64, params: &ParticleParams, tol: f64) -> Result<StellarModel> {
    solve_minimizer_with(tau, params, &SolverOptions { tol, ..Default::default() })
}

pub fn solve_minimizer_with(tau: f64, params: &ParticleParams, opts: &SolverOptions) -> Result<StellarModel> {
    params.require_massive()?;
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("mass tolerance must be positive, got {}", opts.tol)));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("coupling must be positive, got {tau}")));
    }
    let tau_c = lane_emden::reference()?.tau_c(params.q)?;
    if tau >= tau_c {
        return Err(Error::Supercritical { tau, tau_c });
    }
    let m = params.m;
    let mass_at = |u: f64| shoot(tau, u, params, opts.r_max).map(|s| s.mass(tau));

    // geometric bracket expansion in u_c / m
    let mut lo = m * (1.0 + 1e-3);
    let mut m_lo = loop {
        match mass_at(lo) {
            Ok(v) => break v,
            Err(Error::Solver(_)) if lo < 2.0 * m => lo = m + 2.0 * (lo - m),
            Err(e) => return Err(e),
        }
    };
    if m_lo > 1.0 {
        return Err(Error::Resolution(format!(
            "mass {m_lo} already exceeds 1 at u_c = {lo}; lower the tolerance on the empty-star limit"
        )));
    }
    let mut hi = 2.0 * lo;
    let mut m_hi = mass_at(hi)?;
    let mut steps = 0;
    while m_hi < 1.0 {
        steps += 1;
        if steps > BRACKET_STEPS {
            return Err(Error::Resolution(format!(
                "mass ceiling {m_hi} < 1 at u_c = {hi} (tau = {tau}, tau_c - tau = {:e}); \
                 tau is too close to tau_c for the solver",
                tau_c - tau
            )));
        }
        lo = hi;
        m_lo = m_hi;
        hi *= 2.0;
        m_hi = mass_at(hi)?;
    }

    // coarse log-spaced scan; refine inside the first crossing if it is not increasing
    let ratio = (hi / lo).ln();
    let scan: Vec<(f64, f64)> = (0..=SCAN_POINTS)
        .map(|i| {
            let u = match i {
                0 => lo,
                i if i == SCAN_POINTS => hi,
                i => lo * (ratio * i as f64 / SCAN_POINTS as f64).exp(),
            };
            let mass = match i {
                0 => Ok(m_lo),
                i if i == SCAN_POINTS => Ok(m_hi),
                _ => mass_at(u),
            };
            mass.map(|v| (u, v))
        })
        .collect::<Result<_>>()?;
    let scan_monotone = scan.windows(2).all(|w| w[1].1 > w[0].1);
    let pair = scan
        .windows(2)
        .find(|w| w[0].1 <= 1.0 && w[1].1 >= 1.0)
        .ok_or_else(|| Error::Solver("mass scan lost the crossing of 1".into()))?;
    let (mut lo, mut hi) = (pair[0].0, pair[1].0);

    let mut best = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo * hi).sqrt();
        let shot = shoot(tau, mid, params, opts.r_max)?;
        let mass = shot.mass(tau);
        if (mass - 1.0).abs() < opts.tol {
            best = Some((mid, shot));
            break;
        }
        if mass < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Err(Error::Solver(format!(
                "bisection stalled at u_c = {mid} with mass {mass}; tolerance {} too tight",
                opts.tol
            )));
        }
    }
    let (u_c, shot) = best.ok_or_else(|| Error::Solver("bisection did not converge".into()))?;
    let s = build_structure(tau, u_c, params, &shot, opts.grid_nodes)?;
    Ok(StellarModel {
        tau,
        params: *params,
        u_c,
        rho: s.rho,
        mu: s.mu,
        r_star: s.r_star,
        energy: s.energy,
        scan_monotone,
    })
}
