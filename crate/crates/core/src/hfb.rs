//! Two-sided bounds on the HFB ground-state energy per particle at
//! `tau_N = tau_c - N^(-beta)`, expressed through Chandrasekhar minimizers.
//!
//! With `kappa = tau_N N^(-2/3)` and `eps = 1.7 q^(1/3) kappa^(2/3) N^(1/3)`:
//!
//! ```text
//! lower = E^Ch_{tau'}(1) - 2 eps m,       tau' = kappa' N^(2/3),  kappa' = kappa / (1 - kappa pi/4 - eps)
//! upper = E^Ch_{tau_N}(1) + (kappa pi/4) int j_m(rho^Ch_{tau_N})
//! ```
//!
//! The lower bound needs `1 - kappa pi/4 - eps > 0` and `tau' < tau_c`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::chandra::{self, SolverOptions};
use crate::eos::ParticleParams;
use crate::error::{Error, Result};
use crate::lane_emden;

/// Exponents `beta` with `0 < beta < BETA_MAX` are covered by the collapse result.
pub const BETA_MAX: f64 = 1.0 / 9.0;

pub const COND_DENOMINATOR: &str = "1 - kappa*pi/4 - eps_LY > 0";
pub const COND_SUBCRITICAL: &str = "tau_prime < tau_c";

/// Coupling parameters of the sandwich, before any minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    #[serde(rename = "N")]
    pub n: f64,
    pub beta: f64,
    pub tau_c: f64,
    pub tau_n: f64,
    pub kappa: f64,
    pub eps_ly: f64,
    /// `1 - kappa pi/4 - eps_LY`
    pub denominator: f64,
    /// `kappa'`, infinite when the denominator is not positive.
    pub kappa_prime: f64,
    pub tau_prime: f64,
}

impl Couplings {
    pub fn new(n: f64, beta: f64, params: &ParticleParams) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::domain(format!("particle number must be a finite N >= 1, got {n}")));
        }
        if !beta.is_finite() {
            return Err(Error::domain(format!("beta must be finite, got {beta}")));
        }
        let tau_c = lane_emden::reference()?.tau_c(params.q)?;
        let tau_n = tau_c - n.powf(-beta);
        if !(tau_n > 0.0) {
            return Err(Error::domain(format!(
                "tau_N = tau_c - N^(-beta) = {tau_n} is not positive (N = {n}, beta = {beta})"
            )));
        }
        let kappa = tau_n * n.powf(-2.0 / 3.0);
        let eps_ly = eps_ly(kappa, n, params.q);
        let denominator = 1.0 - kappa * PI / 4.0 - eps_ly;
        let kappa_prime = if denominator > 0.0 { kappa / denominator } else { f64::INFINITY };
        Ok(Self {
            n,
            beta,
            tau_c,
            tau_n,
            kappa,
            eps_ly,
            denominator,
            kappa_prime,
            tau_prime: kappa_prime * n.powf(2.0 / 3.0),
        })
    }

    /// The first violated validity condition of the lower bound, if any.
    pub fn violated_condition(&self) -> Option<&'static str> {
        if !(self.denominator > 0.0) {
            Some(COND_DENOMINATOR)
        } else if !(self.tau_prime < self.tau_c) {
            Some(COND_SUBCRITICAL)
        } else {
            None
        }
    }

    pub fn regime_warning(&self) -> bool {
        !(self.beta > 0.0 && self.beta < BETA_MAX)
    }

    fn invalid(&self, condition: &'static str) -> Error {
        Error::InvalidRegime {
            condition,
            detail: format!(
                "N = {:e}, beta = {}: kappa*pi/4 + eps_LY = {:.6}, tau_prime = {:.6}, tau_c = {:.6}",
                self.n,
                self.beta,
                1.0 - self.denominator,
                self.tau_prime,
                self.tau_c
            ),
        }
    }
}

/// `1.7 q^(1/3) kappa^(2/3) N^(1/3)`.
pub fn eps_ly(kappa: f64, n: f64, q: u32) -> f64 {
    1.7 * f64::from(q).cbrt() * kappa.powf(2.0 / 3.0) * n.cbrt()
}

/// `kappa / (1 - kappa pi/4 - eps)`.
pub fn kappa_prime(kappa: f64, eps: f64) -> f64 {
    kappa / (1.0 - kappa * PI / 4.0 - eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfbSandwich {
    #[serde(flatten)]
    pub couplings: Couplings,
    pub lower: Option<f64>,
    pub upper: f64,
    /// `2 Lambda (tau_c - tau_N)^(1/2)`
    pub reference: f64,
    /// `E^Ch_{tau_N}(1)`
    pub chandrasekhar: f64,
    pub valid: bool,
    pub violated_condition: Option<&'static str>,
    pub regime_warning: bool,
    /// `(tau_c / kappa)^(3/2)`, reported only.
    pub n_hfb: f64,
}

impl HfbSandwich {
    /// `|bound / (tau_c - tau_N)^(1/2) - 2 Lambda| / 2 Lambda`.
    pub fn relative_deviation(&self, bound: f64) -> f64 {
        (bound / self.reference - 1.0).abs()
    }
}

pub fn lower_bound(n: f64, beta: f64, params: &ParticleParams) -> Result<f64> {
    lower_bound_with(n, beta, params, &SolverOptions::default())
}

pub fn lower_bound_with(n: f64, beta: f64, params: &ParticleParams, opts: &SolverOptions) -> Result<f64> {
    let c = Couplings::new(n, beta, params)?;
    lower_from(&c, params, opts)
}

fn lower_from(c: &Couplings, params: &ParticleParams, opts: &SolverOptions) -> Result<f64> {
    if let Some(cond) = c.violated_condition() {
        return Err(c.invalid(cond));
    }
    let model = chandra::solve_minimizer_with(c.tau_prime, params, opts)?;
    Ok(model.energy.total - 2.0 * c.eps_ly * params.m)
}

pub fn upper_bound(n: f64, beta: f64, params: &ParticleParams) -> Result<f64> {
    upper_bound_with(n, beta, params, &SolverOptions::default())
}

pub fn upper_bound_with(n: f64, beta: f64, params: &ParticleParams, opts: &SolverOptions) -> Result<f64> {
    let c = Couplings::new(n, beta, params)?;
    upper_from(&c, params, opts).map(|(upper, _)| upper)
}

/// `(upper, E^Ch_{tau_N}(1))`
fn upper_from(c: &Couplings, params: &ParticleParams, opts: &SolverOptions) -> Result<(f64, f64)> {
    let model = chandra::solve_minimizer_with(c.tau_n, params, opts)?;
    let e = model.energy;
    Ok((e.total + c.kappa * PI / 4.0 * e.kinetic, e.total))
}

pub fn sandwich(n: f64, beta: f64, params: &ParticleParams) -> Result<HfbSandwich> {
    sandwich_with(n, beta, params, &SolverOptions::default())
}

/// Both bounds. An invalid lower bound is reported through the flags, not as an error.
pub fn sandwich_with(n: f64, beta: f64, params: &ParticleParams, opts: &SolverOptions) -> Result<HfbSandwich> {
    let c = Couplings::new(n, beta, params)?;
    let (upper, chandrasekhar) = upper_from(&c, params, opts)?;
    let violated_condition = c.violated_condition();
    let lower = match violated_condition {
        None => Some(lower_from(&c, params, opts)?),
        Some(_) => None,
    };
    let lambda = lane_emden::reference()?.lambda(params)?;
    Ok(HfbSandwich {
        couplings: c,
        lower,
        upper,
        reference: 2.0 * lambda * (c.tau_c - c.tau_n).sqrt(),
        chandrasekhar,
        valid: violated_condition.is_none(),
        violated_condition,
        regime_warning: c.regime_warning(),
        n_hfb: (c.tau_c / c.kappa).powf(1.5),
    })
}
