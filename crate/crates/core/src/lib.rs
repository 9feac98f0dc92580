//! Numerical tools for the near-critical collapse of Chandrasekhar stars.
//!
//! - [`eos`]: relativistic Fermi-gas kinetic energy density `j_m` and friends.
//! - [`radial`]: radial densities, quadrature, Newton potentials, the direct term.
//! - [`lane_emden`]: the blow-up profile `Q` and the constants `sigma_f`, `tau_c`, `Lambda`.
//! - [`chandra`]: minimizers of the Chandrasekhar functional by shooting.
//! - [`collapse`]: sweeps towards `tau_c` and the `2 Lambda sqrt(tau_c - tau)` law.
//! - [`hfb`]: explicit two-sided bounds on the HFB energy per particle.

// `!(x > 0.0)` rejects NaN as well; that is the intent throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chandra;
pub mod collapse;
pub mod eos;
mod error;
pub mod hfb;
pub mod lane_emden;
pub mod ode;
pub mod radial;

pub use chandra::{Energy, SolverOptions, StellarModel};
pub use collapse::{CollapseRecord, LinearFit};
pub use eos::ParticleParams;
pub use error::{Error, Result};
pub use hfb::HfbSandwich;

pub use lane_emden::{LaneEmdenProfile, LaneEmdenRaw};
pub use radial::{RadialDensity, RadialGrid};
