//! Sweeps of the minimizer towards `tau_c`: the energy law `E ~ 2 Lambda sqrt(tau_c - tau)`
//! and convergence of the rescaled densities to `Lambda^3 Q(Lambda x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chandra::{self, SolverOptions, StellarModel};
use crate::eos::ParticleParams;
use crate::error::{Error, Result};
use crate::lane_emden::{self, LaneEmdenProfile};
use crate::radial::{self, RadialDensity};

/// Gaps `(tau_c - tau) / tau_c` of the default sweep.
pub const DEFAULT_EPS_FRACS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Failed(String),
}

impl RecordStatus {
    pub fn label(&self) -> String {
        match self {
            RecordStatus::Ok => "ok".into(),
            RecordStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

/// One point of a sweep. Numerical fields are NaN when the solve failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRecord {
    pub tau: f64,
    pub eps: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub ratio: f64,
    pub kinetic_scaled: f64,
    pub d1: f64,
    pub d43: f64,
    pub status: RecordStatus,
}

impl CollapseRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    fn failed(tau: f64, eps: f64, err: &Error) -> Self {
        Self {
            tau,
            eps,
            energy: f64::NAN,
            ratio: f64::NAN,
            kinetic_scaled: f64::NAN,
            d1: f64::NAN,
            d43: f64::NAN,
            status: RecordStatus::Failed(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDistance {
    pub d1: f64,
    pub d43: f64,
}

/// Distance of the rescaled minimizer to `Lambda^3 Q(Lambda x)`.
pub fn profile_distance(model: &StellarModel, profile: &LaneEmdenProfile) -> Result<ProfileDistance> {
    let tau_c = profile.tau_c(model.params.q)?;
    density_distance(&model.rho, tau_c - model.tau, profile, &model.params)
}

/// Rescale `rho` by `s = sqrt(eps)`, i.e. `eps^(3/2) rho(sqrt(eps) x)`, and compare it
/// with `Lambda^3 Q(Lambda x)` in `L^1` and `L^(4/3)`.
pub fn density_distance(
    rho: &RadialDensity,
    eps: f64,
    profile: &LaneEmdenProfile,
    params: &ParticleParams,
) -> Result<ProfileDistance> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("the gap tau_c - tau must be positive, got {eps}")));
    }
    let (scaled, target) = rescaled_pair(rho, eps, profile, params)?;
    Ok(ProfileDistance {
        d1: radial::lr_distance(&scaled, &target, 1.0)?,
        d43: radial::lr_distance(&scaled, &target, 4.0 / 3.0)?,
    })
}

/// `(eps^(3/2) rho(sqrt(eps) .), Lambda^3 Q(Lambda .))`.
pub fn rescaled_pair(
    rho: &RadialDensity,
    eps: f64,
    profile: &LaneEmdenProfile,
    params: &ParticleParams,
) -> Result<(RadialDensity, RadialDensity)> {
    let lambda = profile.lambda(params)?;
    Ok((radial::rescale(rho, eps.sqrt())?, radial::rescale(profile.density(), lambda)?))
}

/// Solve at every coupling in `taus` using up to `jobs` threads (0: rayon default).
///
/// Failures are recorded, not propagated. Records come back sorted by `eps`, largest
/// first, whatever the scheduling.
pub fn sweep(taus: &[f64], params: &ParticleParams, opts: &SolverOptions, jobs: usize) -> Result<Vec<CollapseRecord>> {
    if taus.is_empty() {
        return Err(Error::domain("the coupling list is empty"));
    }
    let profile = lane_emden::reference()?;
    let tau_c = profile.tau_c(params.q)?;
    if let Some(t) = taus.iter().find(|&&t| !(t > 0.0 && t < tau_c)) {
        return Err(Error::domain(format!("coupling {t} is outside (0, tau_c = {tau_c})")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Solver(format!("cannot start worker threads: {e}")))?;
    let mut records: Vec<CollapseRecord> = pool.install(|| {
        taus.par_iter()
            .map(|&tau| {
                let eps = tau_c - tau;
                record(tau, eps, params, opts, profile).unwrap_or_else(|e| CollapseRecord::failed(tau, eps, &e))
            })
            .collect()
    });
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(records)
}

/// [`sweep`] at `tau = tau_c (1 - f)` for each fraction `f`.
pub fn sweep_fracs(
    eps_fracs: &[f64],
    params: &ParticleParams,
    opts: &SolverOptions,
    jobs: usize,
) -> Result<Vec<CollapseRecord>> {
    let tau_c = lane_emden::reference()?.tau_c(params.q)?;
    if let Some(f) = eps_fracs.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(Error::domain(format!("gap fraction {f} is outside (0, 1)")));
    }
    let taus: Vec<f64> = eps_fracs.iter().map(|f| tau_c * (1.0 - f)).collect();
    sweep(&taus, params, opts, jobs)
}

fn record(
    tau: f64,
    eps: f64,
    params: &ParticleParams,
    opts: &SolverOptions,
    profile: &LaneEmdenProfile,
) -> Result<CollapseRecord> {
    let model = chandra::solve_minimizer_with(tau, params, opts)?;
    let dist = density_distance(&model.rho, eps, profile, params)?;
    let root = eps.sqrt();
    Ok(CollapseRecord {
        tau,
        eps,
        energy: model.energy.total,
        ratio: model.energy.total / root,
        kinetic_scaled: model.energy.kinetic * root,
        d1: dist.d1,
        d43: dist.d43,
        status: RecordStatus::Ok,
    })
}

/// Least-squares line `ratio = intercept + slope * sqrt(eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Extrapolate the successful records to `eps = 0`; the intercept estimates `2 Lambda`.
pub fn fit_two_lambda(records: &[CollapseRecord]) -> Result<LinearFit> {
    let pts: Vec<(f64, f64)> = records.iter().filter(|r| r.is_ok()).map(|r| (r.eps.sqrt(), r.ratio)).collect();
    if pts.len() < 3 {
        return Err(Error::domain(format!("a fit needs at least 3 successful records, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("a fit needs at least two distinct gaps"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LinearFit { intercept, slope, r_squared, points: pts.len() })
}
