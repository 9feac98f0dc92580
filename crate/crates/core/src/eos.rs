//! Zero-temperature equation of state of a free relativistic Fermi gas.
//!
//! All kernels are expressed through the Fermi momentum `eta = (6 pi^2 rho / q)^(1/3)`.
//! For `eta / m` below [`SERIES_THRESHOLD`] the closed forms lose every significant
//! digit to cancellation, so a truncated Taylor expansion in `(eta / m)^2` is used
//! there instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `eta / m` the series branch is used.
pub const SERIES_THRESHOLD: f64 = 1e-3;

// j_m = m rho (1 + 3/10 t - 3/56 t^2 + 1/48 t^3 - 15/1408 t^4 + ...), t = (eta/m)^2
const J_SERIES: [f64; 5] = [1.0, 3.0 / 10.0, -3.0 / 56.0, 1.0 / 48.0, -15.0 / 1408.0];
// j~_m = (rho / m) (1 - 3/10 t + 9/56 t^2 - 5/48 t^3 + 105/1408 t^4 + ...)
const J_TILDE_SERIES: [f64; 5] = [1.0, -3.0 / 10.0, 9.0 / 56.0, -5.0 / 48.0, 105.0 / 1408.0];

/// Spin multiplicity and particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleParams {
    pub q: u32,
    pub m: f64,
}

impl ParticleParams {
    pub fn new(q: u32, m: f64) -> Result<Self> {
        if q < 1 {
            return Err(Error::domain(format!("spin multiplicity q must be >= 1, got {q}")));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::domain(format!("particle mass must be finite and >= 0, got {m}")));
        }
        Ok(Self { q, m })
    }

    /// Neutrons: `q = 2`, unit mass.
    pub fn neutron() -> Self {
        Self { q: 2, m: 1.0 }
    }

    pub(crate) fn require_massive(&self) -> Result<()> {
        if self.m > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("this solver requires a particle mass m > 0"))
        }
    }
}

impl Default for ParticleParams {
    fn default() -> Self {
        Self::neutron()
    }
}

/// Semiclassical kinetic constant `K_cl = (3/4)(6 pi^2 / q)^(1/3)`.
pub fn k_cl(q: u32) -> Result<f64> {
    if q < 1 {
        return Err(Error::domain(format!("spin multiplicity q must be >= 1, got {q}")));
    }
    Ok(0.75 * (6.0 * PI * PI / f64::from(q)).cbrt())
}

/// Fermi momentum at number density `rho`.
pub fn eta_of_rho(rho: f64, params: &ParticleParams) -> Result<f64> {
    check_density(rho)?;
    Ok(fermi_momentum(rho, params.q))
}

/// Number density whose Fermi momentum is `eta`.
pub fn rho_of_eta(eta: f64, q: u32) -> f64 {
    f64::from(q) * eta * eta * eta / (6.0 * PI * PI)
}

pub(crate) fn fermi_momentum(rho: f64, q: u32) -> f64 {
    (6.0 * PI * PI * rho / f64::from(q)).cbrt()
}

fn check_density(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("density must be finite and >= 0, got {rho}")))
    }
}

/// Kinetic energy density `j_m(rho)` of the filled Fermi sea, rest mass included.
pub fn j_m(rho: f64, params: &ParticleParams) -> Result<f64> {
    check_density(rho)?;
    Ok(kinetic_density(fermi_momentum(rho, params.q), params.m, params.q))
}

/// `j_m'(rho) = sqrt(eta^2 + m^2)`, the Fermi energy.
pub fn j_m_prime(rho: f64, params: &ParticleParams) -> Result<f64> {
    check_density(rho)?;
    Ok(fermi_momentum(rho, params.q).hypot(params.m))
}

/// Auxiliary density `(q / 8 pi^3) * integral over |p| < eta of 1 / sqrt(p^2 + m^2)`.
pub fn j_tilde_m(rho: f64, params: &ParticleParams) -> Result<f64> {
    check_density(rho)?;
    Ok(aux_density(fermi_momentum(rho, params.q), params.m, params.q))
}

/// `j_m` as a function of the Fermi momentum. Homogeneous of degree 4 in `(eta, m)`.
pub fn kinetic_density(eta: f64, m: f64, q: u32) -> f64 {
    let qf = f64::from(q);
    if eta == 0.0 {
        return 0.0;
    }
    if m == 0.0 {
        return qf * eta.powi(4) / (8.0 * PI * PI);
    }
    let x = eta / m;
    if x < SERIES_THRESHOLD {
        let rho = rho_of_eta(eta, q);
        return m * rho * horner(&J_SERIES, x * x);
    }
    let e = eta.hypot(m);
    qf / (16.0 * PI * PI) * (eta * (2.0 * eta * eta + m * m) * e - m.powi(4) * x.asinh())
}

/// `j~_m` as a function of the Fermi momentum.
pub fn aux_density(eta: f64, m: f64, q: u32) -> f64 {
    let qf = f64::from(q);
    if eta == 0.0 {
        return 0.0;
    }
    if m == 0.0 {
        return qf * eta * eta / (4.0 * PI * PI);
    }
    let x = eta / m;
    if x < SERIES_THRESHOLD {
        let rho = rho_of_eta(eta, q);
        return rho / m * horner(&J_TILDE_SERIES, x * x);
    }
    qf / (4.0 * PI * PI) * (eta * eta.hypot(m) - m * m * x.asinh())
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const P: ParticleParams = ParticleParams { q: 2, m: 1.0 };

    /// `q / (2 pi^2) * integral_0^eta p^2 sqrt(p^2 + m^2) dp` by composite Simpson.
    fn j_by_quadrature(eta: f64, m: f64, q: u32) -> f64 {
        let n = 20_000;
        let h = eta / n as f64;
        let f = |p: f64| p * p * p.hypot(m);
        let mut s = f(0.0) + f(eta);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        f64::from(q) / (2.0 * PI * PI) * s * h / 3.0
    }

    #[test]
    fn k_cl_values() {
        assert!((k_cl(2).unwrap() - 2.32025).abs() < 1e-4);
        assert!((k_cl(1).unwrap() - 2.92339).abs() < 1e-4);
        for q in 1..6 {
            assert_relative_eq!(k_cl(q).unwrap() / k_cl(8 * q).unwrap(), 2.0, epsilon = 1e-15);
        }
        assert!(matches!(k_cl(0), Err(Error::Domain(_))));
    }

    #[test]
    fn eta_basics() {
        assert_eq!(eta_of_rho(0.0, &P).unwrap(), 0.0);
        let unit = 2.0 / (6.0 * PI * PI);
        assert_relative_eq!(eta_of_rho(unit, &P).unwrap(), 1.0, epsilon = 1e-15);
        let rho = 0.37;
        assert_relative_eq!(eta_of_rho(8.0 * rho, &P).unwrap(), 2.0 * eta_of_rho(rho, &P).unwrap(), epsilon = 1e-15);
        assert!(eta_of_rho(-1e-3, &P).is_err());
        assert!(j_m(-1.0, &P).is_err());
        assert!(j_m_prime(-1.0, &P).is_err());
        assert!(j_tilde_m(-1.0, &P).is_err());
    }

    #[test]
    fn closed_form_matches_momentum_integral() {
        for &eta in &[0.01, 0.3, 1.0, 4.0, 25.0] {
            let direct = j_by_quadrature(eta, 1.0, 2);
            assert_relative_eq!(kinetic_density(eta, 1.0, 2), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn massless_branch() {
        let p0 = ParticleParams { q: 2, m: 0.0 };
        for &rho in &[1e-8, 0.1, 3.0, 1e5] {
            let expect = k_cl(2).unwrap() * f64::powf(rho, 4.0 / 3.0);
            assert_relative_eq!(j_m(rho, &p0).unwrap(), expect, max_relative = 1e-13);
            assert_relative_eq!(j_m_prime(rho, &p0).unwrap(), eta_of_rho(rho, &p0).unwrap(), max_relative = 1e-15);
        }
        assert_eq!(j_m(0.0, &P).unwrap(), 0.0);
        assert_eq!(j_m(0.0, &p0).unwrap(), 0.0);
    }

    #[test]
    fn rest_mass_dominates_at_low_density() {
        let rho = 1e-12;
        assert!((j_m(rho, &P).unwrap() / rho - 1.0).abs() < 1e-6);
        assert_eq!(j_m_prime(0.0, &P).unwrap(), 1.0);
    }

    #[test]
    fn tiny_density_matches_series_oracle() {
        // m rho + (3/10) m rho t with t = eta^2 / m^2 ~ 1e-20: the second term is already negligible.
        let rho = 1e-30;
        let eta = eta_of_rho(rho, &P).unwrap();
        let oracle = rho * (1.0 + 0.3 * eta * eta);
        assert!((j_m(rho, &P).unwrap() - oracle).abs() / oracle < 1e-8);
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        for q in [1, 2, 4] {
            let m = 1.7;
            let below = SERIES_THRESHOLD * m * (1.0 - 1e-9);
            let above = SERIES_THRESHOLD * m * (1.0 + 1e-9);
            assert_relative_eq!(kinetic_density(below, m, q), kinetic_density(above, m, q), max_relative = 1e-8);
            assert_relative_eq!(aux_density(below, m, q), aux_density(above, m, q), max_relative = 1e-8);
            // a bit further out the closed form is reliable to ~1e-10
            let eta = 5e-3 * m;
            let rho = rho_of_eta(eta, q);
            let series = m * rho * horner(&J_SERIES, (eta / m).powi(2));
            assert_relative_eq!(kinetic_density(eta, m, q), series, max_relative = 1e-9);
        }
    }

    #[test]
    fn high_density_expansion() {
        // j_m = K rho^(4/3) + (q / 8 pi^2) m^2 eta^2 + (q / 16 pi^2) m^4 (1/4 - ln(2 eta / m)) + O(m^6 / eta^2)
        let c = 2.0 / (16.0 * PI * PI);
        let mut last = f64::INFINITY;
        for &x in &[1e3, 1e4, 1e5, 1e6] {
            let eta = x;
            let rho = rho_of_eta(eta, 2);
            let lead = k_cl(2).unwrap() * rho.powf(4.0 / 3.0) + 2.0 * c * eta * eta;
            let log_term = c * (0.25 - (2.0 * eta).ln());
            let j = j_m(rho, &P).unwrap();
            assert_relative_eq!(j, lead + log_term, max_relative = 1e-14);
            // the residual itself is below double resolution of j at large eta, so
            // compare against the rounding floor instead of subtracting
            assert!((j - lead - log_term).abs() <= 64.0 * f64::EPSILON * j + 1e-2 * log_term.abs());
            let scaled = (log_term / (eta * eta)).abs();
            assert!(scaled < last);
            last = scaled;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        let fd = (j_m(1.0 + h, &P).unwrap() - j_m(1.0 - h, &P).unwrap()) / (2.0 * h);
        assert_relative_eq!(j_m_prime(1.0, &P).unwrap(), fd, max_relative = 1e-6);
    }

    #[test]
    fn aux_density_limits() {
        assert_eq!(j_tilde_m(0.0, &P).unwrap(), 0.0);
        let eta = 1e4;
        let rho = rho_of_eta(eta, 2);
        let ratio = j_tilde_m(rho, &P).unwrap() / (2.0 / (4.0 * PI * PI) * eta * eta);
        assert!((ratio - 1.0).abs() < 1e-3);
        // derivative in eta: (q / 2 pi^2) eta^2 / sqrt(eta^2 + m^2)
        let (e, h) = (0.8, 1e-5);
        let fd = (aux_density(e + h, 1.0, 2) - aux_density(e - h, 1.0, 2)) / (2.0 * h);
        assert_relative_eq!(fd, 2.0 / (2.0 * PI * PI) * e * e / e.hypot(1.0), max_relative = 1e-8);
    }

    #[test]
    fn split_lower_bound() {
        let k = k_cl(2).unwrap();
        for i in 0..100 {
            let rho = 10f64.powf(-8.0 + 14.0 * i as f64 / 99.0);
            let lhs = j_m(rho, &P).unwrap();
            let rhs = k * rho.powf(4.0 / 3.0) + 0.5 * j_tilde_m(rho, &P).unwrap();
            assert!(lhs >= rhs * (1.0 - 1e-12), "rho = {rho}: {lhs} < {rhs}");
        }
    }

    #[test]
    fn convex_and_bracketed() {
        let k = k_cl(2).unwrap();
        for i in 0..60 {
            let rho = 10f64.powf(-6.0 + 12.0 * i as f64 / 59.0);
            let h = rho * 1e-3;
            let second = j_m(rho + h, &P).unwrap() - 2.0 * j_m(rho, &P).unwrap() + j_m(rho - h, &P).unwrap();
            assert!(second > 0.0, "not convex at {rho}");
            let j = j_m(rho, &P).unwrap();
            assert!(j >= rho * (1.0 - 1e-14));
            assert!(j >= k * rho.powf(4.0 / 3.0) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn params_validation() {
        assert!(ParticleParams::new(0, 1.0).is_err());
        assert!(ParticleParams::new(2, -1.0).is_err());
        assert!(ParticleParams::new(2, f64::NAN).is_err());
        assert!(ParticleParams::new(2, 0.0).unwrap().require_massive().is_err());
    }
}
