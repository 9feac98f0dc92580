//! Independent reference computations. Nothing here calls the solvers under test.
#![allow(dead_code)]

use std::f64::consts::PI;

/// First zero of the index-3 Lane–Emden solution and `-xi^2 theta'` there, by classical
/// fixed-step RK4 started from the series at `xi = h`.
pub fn lane_emden_rk4(h: f64) -> (f64, f64) {
    let f = |xi: f64, y: [f64; 2]| [y[1], -2.0 * y[1] / xi - y[0].powi(3)];
    let mut xi = h;
    let mut y = [1.0 - h * h / 6.0 + h.powi(4) / 40.0, -h / 3.0 + h.powi(3) / 10.0];
    loop {
        let k1 = f(xi, y);
        let k2 = f(xi + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(xi + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(xi + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[0] <= 0.0 {
            // theta is nearly linear over one step; a single Newton step from the left end
            let t = -y[0] / y[1];
            let xi1 = xi + t;
            let dtheta = y[1] + t * k1[1];
            return (xi1, -xi1 * xi1 * dtheta);
        }
        xi += h;
        y = next;
    }
}

/// `j_m` from its closed form, written out independently.
pub fn j_closed(rho: f64, m: f64, q: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let eta = (6.0 * PI * PI * rho / q).cbrt();
    if m == 0.0 {
        return q * eta.powi(4) / (8.0 * PI * PI);
    }
    let s = (eta * eta + m * m).sqrt();
    let x = eta / m;
    if x < 1e-3 {
        // leading terms only: m rho + (3/10) rho eta^2 / m
        return m * rho * (1.0 + 0.3 * x * x - 3.0 / 56.0 * x.powi(4));
    }
    q / (16.0 * PI * PI)
        * (eta * (2.0 * eta * eta + m * m) * s - m.powi(4) * (x + x * x / ((x * x + 1.0).sqrt() + 1.0)).ln_1p())
}

/// `dj_m / drho = sqrt(eta^2 + m^2)`.
pub fn j_closed_prime(rho: f64, m: f64, q: f64) -> f64 {
    let eta = (6.0 * PI * PI * rho.max(0.0) / q).cbrt();
    (eta * eta + m * m).sqrt()
}

/// Discrete Chandrasekhar problem on `n` uniform nodes of `[0, r_box]` with trapezoid
/// weights, minimized by projected gradient descent with spectral step sizes.
pub struct PgdOracle {
    pub r: Vec<f64>,
    /// `4 pi r^2` times the trapezoid weight.
    pub w: Vec<f64>,
    pub tau: f64,
    pub m: f64,
    pub q: f64,
}

pub struct PgdResult {
    pub energy: f64,
    pub rho: Vec<f64>,
    pub iterations: usize,
    pub stationarity: f64,
}

impl PgdOracle {
    pub fn new(n: usize, r_box: f64, tau: f64, m: f64, q: f64) -> Self {
        let h = r_box / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let w = r
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let end = i == 0 || i == n - 1;
                4.0 * PI * x * x * if end { h / 2.0 } else { h }
            })
            .collect();
        Self { r, w, tau, m, q }
    }

    fn h(&self) -> f64 {
        self.r[1]
    }

    /// Newton potential at the nodes, both partial integrals by the trapezoid rule.
    pub fn potential(&self, rho: &[f64]) -> Vec<f64> {
        let n = rho.len();
        let h = self.h();
        let mut inner = vec![0.0; n];
        for i in 1..n {
            let f = |k: usize| 4.0 * PI * self.r[k].powi(2) * rho[k];
            inner[i] = inner[i - 1] + h / 2.0 * (f(i - 1) + f(i));
        }
        let mut outer = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let g = |k: usize| 4.0 * PI * self.r[k] * rho[k];
            outer[i] = outer[i + 1] + h / 2.0 * (g(i) + g(i + 1));
        }
        (0..n).map(|i| if i == 0 { outer[0] } else { inner[i] / self.r[i] + outer[i] }).collect()
    }

    pub fn energy(&self, rho: &[f64]) -> f64 {
        let phi = self.potential(rho);
        rho.iter()
            .zip(&phi)
            .zip(&self.w)
            .map(|((&v, &p), &w)| w * (j_closed(v, self.m, self.q) - 0.5 * self.tau * v * p))
            .sum()
    }

    fn gradient(&self, rho: &[f64]) -> Vec<f64> {
        let phi = self.potential(rho);
        rho.iter().zip(&phi).map(|(&v, &p)| j_closed_prime(v, self.m, self.q) - self.tau * p).collect()
    }

    fn mass(&self, rho: &[f64]) -> f64 {
        rho.iter().zip(&self.w).map(|(v, w)| v * w).sum()
    }

    /// Weighted projection onto `{rho >= 0, sum w rho = 1}`: `rho = (x - lambda)_+`.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let shifted = |lam: f64| -> f64 { x.iter().zip(&self.w).map(|(v, w)| w * (v - lam).max(0.0)).sum() };
        let (mut lo, mut hi) = (
            x.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0,
            x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        while shifted(lo) < 1.0 {
            lo -= (hi - lo).max(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if shifted(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        let mut out: Vec<f64> = x.iter().map(|v| (v - lam).max(0.0)).collect();
        let mass = self.mass(&out);
        out.iter_mut().for_each(|v| *v /= mass);
        out
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.w).map(|((x, y), w)| w * x * y).sum()
    }

    pub fn minimize(&self, start: &[f64], max_iter: usize, tol: f64) -> PgdResult {
        let mut rho = self.project(start);
        let mut e = self.energy(&rho);
        let mut g = self.gradient(&rho);
        let mut step = 1e-3;
        let mut history = vec![e];
        let mut stationarity = f64::INFINITY;
        let mut it = 0;
        while it < max_iter {
            it += 1;
            let e_ref = history.iter().rev().take(10).cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut s = step;
            let (new, e_new) = loop {
                let trial: Vec<f64> = rho.iter().zip(&g).map(|(v, d)| v - s * d).collect();
                let cand = self.project(&trial);
                let diff: Vec<f64> = cand.iter().zip(&rho).map(|(a, b)| a - b).collect();
                let e_cand = self.energy(&cand);
                if e_cand <= e_ref + 1e-4 * self.dot(&g, &diff) || s < 1e-16 {
                    break (cand, e_cand);
                }
                s *= 0.5;
            };
            let g_new = self.gradient(&new);
            let dr: Vec<f64> = new.iter().zip(&rho).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let (sy, ss) = (self.dot(&dr, &dg), self.dot(&dr, &dr));
            step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e3) } else { (2.0 * s).min(1e3) };
            stationarity = ss.sqrt() / s;
            rho = new;
            e = e_new;
            g = g_new;
            history.push(e);
            if stationarity < tol {
                break;
            }
        }
        PgdResult { energy: e, rho, iterations: it, stationarity }
    }
}
