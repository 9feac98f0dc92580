//! Radially symmetric densities on one-dimensional grids.
//!
//! A [`RadialDensity`] is a set of node values, extended by zero past the last node;
//! [`RadialDensity::value_at`] interpolates linearly. Integrals
//! `4 pi * int f(rho(r)) r^2 dr` on a single grid interpolate `f(rho)` by quadratics on
//! pairs of intervals and integrate them exactly against `r^2` (a Simpson-type product
//! rule, exact for constant densities and fourth order for smooth ones).
//!
//! Binary operations on densities with different grids work on the sorted union of
//! both node sets with the piecewise-linear interpolants. Each interval of the union
//! carries its own left/right values, so the jump at the edge of a compactly supported
//! profile is represented exactly.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eos::{k_cl, ParticleParams};
use crate::error::{Error, Result};
use crate::lane_emden;

const FOUR_PI: f64 = 4.0 * PI;

/// Strictly increasing radii starting at exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Minimum number of intervals.
    pub const MIN_INTERVALS: usize = 16;
    pub const DEFAULT_NODES: usize = 2048;

    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < Self::MIN_INTERVALS + 1 {
            return Err(Error::domain(format!(
                "a radial grid needs at least {} nodes, got {}",
                Self::MIN_INTERVALS + 1,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::domain("the first grid node must be exactly 0"));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::domain(format!(
                "grid nodes must be finite and strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { nodes })
    }

    /// `n_nodes` equally spaced nodes on `[0, r_max]`.
    pub fn uniform(r_max: f64, n_nodes: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::domain(format!("grid extent must be positive, got {r_max}")));
        }
        if n_nodes < Self::MIN_INTERVALS + 1 {
            return Err(Error::domain(format!(
                "a radial grid needs at least {} nodes, got {n_nodes}",
                Self::MIN_INTERVALS + 1
            )));
        }
        let last = (n_nodes - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_nodes).map(|i| r_max * i as f64 / last).collect();
        nodes[n_nodes - 1] = r_max;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn union(&self, other: &RadialGrid) -> Vec<f64> {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.nodes, &other.nodes);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(&x), Some(&y)) if y < x => {
                    j += 1;
                    y
                }
                (Some(&x), _) => {
                    i += 1;
                    if b.get(j) == Some(&x) {
                        j += 1;
                    }
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            merged.push(next);
        }
        merged
    }
}

#[derive(Deserialize)]
struct RawDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawDensity> for RadialDensity {
    type Error = Error;
    fn try_from(raw: RawDensity) -> Result<Self> {
        RadialDensity::new(RadialGrid::new(raw.grid)?, raw.values)
    }
}

/// Nonnegative radial profile; identically zero beyond the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity")]
pub struct RadialDensity {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialDensity {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!("{} values for {} grid nodes", values.len(), grid.len())));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("density value {v} at node {i} is not a finite nonnegative number")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    /// Constant density `rho0` on a ball of radius `radius`, sampled on `n_nodes` nodes.
    pub fn uniform_ball(mass: f64, radius: f64, n_nodes: usize) -> Result<Self> {
        let rho0 = mass / (FOUR_PI / 3.0 * radius.powi(3));
        Self::from_fn(RadialGrid::uniform(radius, n_nodes)?, |_| rho0)
    }

    pub fn zero(grid: RadialGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if !(r >= 0.0) || r > self.grid.r_max() {
            return 0.0;
        }
        let k = nodes.partition_point(|&x| x <= r);
        if k == 0 {
            return self.values[0];
        }
        if k == nodes.len() {
            return self.values[k - 1];
        }
        let (a, b) = (nodes[k - 1], nodes[k]);
        let t = (r - a) / (b - a);
        self.values[k - 1] * (1.0 - t) + self.values[k] * t
    }

    /// Multiply every value by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())
    }

    pub fn mass(&self) -> f64 {
        mass(self)
    }

    /// Largest radius carrying a strictly positive value, or 0.
    pub fn support_radius(&self) -> f64 {
        match self.values.iter().rposition(|&v| v > 0.0) {
            Some(i) if i + 1 < self.values.len() => self.grid.nodes()[i + 1],
            Some(i) => self.grid.nodes()[i],
            None => 0.0,
        }
    }

    /// `4 pi * int f(rho(r)) r^2 dr`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        integrate_nodes(self.grid.nodes(), &g)
    }

    /// Two-column text: radius and value per line.
    pub fn write_two_column<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# r rho")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r:.17e} {v:.17e}")?;
        }
        Ok(())
    }

    pub fn read_two_column<R: BufRead>(input: R) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(r)), Some(Ok(v)), None) => {
                    nodes.push(r);
                    values.push(v);
                }
                _ => return Err(Error::Parse(format!("line {}: expected two numbers", lineno + 1))),
            }
        }
        Self::new(RadialGrid::new(nodes)?, values)
    }
}

/// Weights of the three interpolation nodes used on interval `k`, for
/// `int_{r_k}^{r_{k+1}} r^power P(r) dr` with `P` the quadratic through those nodes.
///
/// Intervals are grouped in pairs `(r_{2p}, r_{2p+1}, r_{2p+2})`; with an odd number of
/// intervals the last one uses the final three nodes.
fn interval_weights(nodes: &[f64], k: usize, power: u8) -> ([usize; 3], [f64; 3]) {
    let n = nodes.len();
    let i0 = if 2 * (k / 2) + 2 < n { 2 * (k / 2) } else { n - 3 };
    let idx = [i0, i0 + 1, i0 + 2];
    let (x0, x1, x2) = (nodes[i0], nodes[i0 + 1], nodes[i0 + 2]);
    let (h1, h2) = (x1 - x0, x2 - x1);
    let big = h1 + h2;
    // one end of the interval is the middle node, so t = 0 there exactly
    let (ta, tb) = if k == i0 { (-h1, 0.0) } else { (0.0, h2) };
    let mono = |j: i32| (tb.powi(j + 1) - ta.powi(j + 1)) / f64::from(j + 1);
    // J_k = int (x1 + t)^power t^k dt
    let moment = |j: i32| match power {
        2 => x1 * x1 * mono(j) + 2.0 * x1 * mono(j + 1) + mono(j + 2),
        1 => x1 * mono(j) + mono(j + 1),
        _ => mono(j),
    };
    let (j0, j1, j2) = (moment(0), moment(1), moment(2));
    let w =
        [(j2 - h2 * j1) / (h1 * big), -(j2 + (h1 - h2) * j1 - h1 * h2 * j0) / (h1 * h2), (j2 + h1 * j1) / (h2 * big)];
    (idx, w)
}

/// `4 pi * int g r^2 dr` for node values `g` on a single grid.
fn integrate_nodes(nodes: &[f64], g: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..nodes.len() - 1 {
        let (idx, w) = interval_weights(nodes, k, 2);
        acc += w[0] * g[idx[0]] + w[1] * g[idx[1]] + w[2] * g[idx[2]];
    }
    FOUR_PI * acc
}

/// Newton potential at the nodes of the quadratic interpolant of `rho`.
fn potential_nodes(nodes: &[f64], rho: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut inner = vec![0.0; n];
    let mut outer = vec![0.0; n];
    for k in 0..n - 1 {
        let (idx, w) = interval_weights(nodes, k, 2);
        inner[k + 1] = inner[k] + w[0] * rho[idx[0]] + w[1] * rho[idx[1]] + w[2] * rho[idx[2]];
    }
    for k in (0..n - 1).rev() {
        let (idx, w) = interval_weights(nodes, k, 1);
        outer[k] = outer[k + 1] + w[0] * rho[idx[0]] + w[1] * rho[idx[1]] + w[2] * rho[idx[2]];
    }
    nodes
        .iter()
        .zip(inner.iter().zip(&outer))
        .map(|(&r, (&i, &o))| if r > 0.0 { FOUR_PI * (i / r + o) } else { FOUR_PI * o })
        .collect()
}

/// Piecewise-linear data on a union grid with independent left/right interval values.
struct Pieces {
    nodes: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Pieces {
    fn on(nodes: &[f64], rho: &RadialDensity) -> Self {
        let r_max = rho.grid.r_max();
        let mut left = Vec::with_capacity(nodes.len() - 1);
        let mut right = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            if w[0] >= r_max {
                left.push(0.0);
                right.push(0.0);
            } else {
                left.push(rho.value_at(w[0]));
                right.push(rho.value_at(w[1]));
            }
        }
        Self { nodes: nodes.to_vec(), left, right }
    }

    /// `4 pi * int f(a(r), b(r)) r^2 dr` for two piece sets on the same nodes.
    fn integrate_pair(&self, other: &Pieces, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.nodes.windows(2).enumerate() {
            let (wl, wr) = r2_hat_weights(w[0], w[1]);
            acc += wl * f(self.left[k], other.left[k]) + wr * f(self.right[k], other.right[k]);
        }
        FOUR_PI * acc
    }

    /// Exact Newton potential of the piecewise-linear profile at every node.
    fn potential(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut inner = vec![0.0; n];
        for (k, w) in self.nodes.windows(2).enumerate() {
            let (wl, wr) = r2_hat_weights(w[0], w[1]);
            inner[k + 1] = inner[k] + wl * self.left[k] + wr * self.right[k];
        }
        let mut outer = vec![0.0; n];
        for k in (0..n - 1).rev() {
            let (wl, wr) = r1_hat_weights(self.nodes[k], self.nodes[k + 1]);
            outer[k] = outer[k + 1] + wl * self.left[k] + wr * self.right[k];
        }
        self.nodes
            .iter()
            .zip(inner.iter().zip(&outer))
            .map(|(&r, (&i, &o))| if r > 0.0 { FOUR_PI * (i / r + o) } else { FOUR_PI * o })
            .collect()
    }

    fn with_node_values(&self, values: &[f64]) -> Self {
        Self { nodes: self.nodes.clone(), left: values[..values.len() - 1].to_vec(), right: values[1..].to_vec() }
    }
}

/// `int_a^b r^2 phi(r) dr` for the two hat functions of the interval.
fn r2_hat_weights(a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    (h * (a * a / 2.0 + a * h / 3.0 + h * h / 12.0), h * (a * a / 2.0 + 2.0 * a * h / 3.0 + h * h / 4.0))
}

fn r1_hat_weights(a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    (h * (a / 2.0 + h / 6.0), h * (a / 2.0 + h / 3.0))
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("L^p exponent must lie in [1, inf), got {p}")))
    }
}

/// `4 pi * int rho(r) r^2 dr`.
pub fn mass(rho: &RadialDensity) -> f64 {
    rho.integrate(|v| v)
}

/// Newton potential `(|x|^-1 * rho)` at every grid node.
pub fn newton_potential(rho: &RadialDensity) -> Vec<f64> {
    potential_nodes(rho.grid.nodes(), &rho.values)
}

/// Direct (Coulomb) term `D(rho1, rho2) = iint rho1(x) rho2(y) / |x - y|`.
///
/// Evaluated as the symmetric average of `int Phi_1 rho_2` and `int Phi_2 rho_1`, so it
/// is bilinear and symmetric. Densities on different grids are compared on the union
/// grid with the piecewise-linear rule.
pub fn coulomb_direct(rho1: &RadialDensity, rho2: &RadialDensity) -> f64 {
    if rho1.grid == rho2.grid {
        let nodes = rho1.grid.nodes();
        let phi1 = potential_nodes(nodes, &rho1.values);
        let prod = |phi: &[f64], rho: &[f64]| -> Vec<f64> { phi.iter().zip(rho).map(|(a, b)| a * b).collect() };
        let d12 = integrate_nodes(nodes, &prod(&phi1, &rho2.values));
        if rho1.values == rho2.values {
            return d12;
        }
        let phi2 = potential_nodes(nodes, &rho2.values);
        let d21 = integrate_nodes(nodes, &prod(&phi2, &rho1.values));
        return 0.5 * (d12 + d21);
    }
    let nodes = rho1.grid.union(&rho2.grid);
    let (p1, p2) = (Pieces::on(&nodes, rho1), Pieces::on(&nodes, rho2));
    let phi1 = p1.with_node_values(&p1.potential());
    let phi2 = p2.with_node_values(&p2.potential());
    0.5 * (p2.integrate_pair(&phi1, |a, b| a * b) + p1.integrate_pair(&phi2, |a, b| a * b))
}

/// `||rho||_p = (4 pi * int rho^p r^2 dr)^(1/p)`.
pub fn lr_norm(rho: &RadialDensity, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(rho.integrate(|v| v.powf(p)).powf(1.0 / p))
}

/// `||rho1 - rho2||_p` on the union grid.
pub fn lr_distance(rho1: &RadialDensity, rho2: &RadialDensity, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let nodes = rho1.grid.union(&rho2.grid);
    let (a, b) = (Pieces::on(&nodes, rho1), Pieces::on(&nodes, rho2));
    let diff = a.integrate_pair(&b, |x, y| (x - y).abs().powf(p));
    Ok(diff.powf(1.0 / p))
}

/// Mass-preserving dilation `r -> s^3 rho(s r)`, carried out node by node.
pub fn rescale(rho: &RadialDensity, s: f64) -> Result<RadialDensity> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("scale factor must be positive, got {s}")));
    }
    let s3 = s * s * s;
    let nodes = rho.grid.nodes().iter().map(|r| r / s).collect();
    RadialDensity::new(RadialGrid::new(nodes)?, rho.values.iter().map(|v| v * s3).collect())
}

/// Gap in the sharp Hardy–Littlewood–Sobolev inequality,
/// `K_cl ||rho||_{4/3}^{4/3} ||rho||_1^{2/3} - (tau_c / 2) D(rho, rho)`.
pub fn hls_deficit(rho: &RadialDensity, params: &ParticleParams) -> Result<f64> {
    let tau_c = lane_emden::reference()?.tau_c(params.q)?;
    hls_deficit_with(rho, params.q, tau_c)
}

pub(crate) fn hls_deficit_with(rho: &RadialDensity, q: u32, tau_c: f64) -> Result<f64> {
    let m1 = mass(rho);
    if !(m1 > 0.0) {
        return Err(Error::domain("the HLS deficit is undefined for a zero density"));
    }
    let i43 = rho.integrate(|v| v.powf(4.0 / 3.0));
    Ok(k_cl(q)? * i43 * m1.powf(2.0 / 3.0) - 0.5 * tau_c * coulomb_direct(rho, rho))
}

/// A seeded random radial profile: a mixture of one to three uniform balls and
/// truncated exponentials, on a uniform grid covering its support.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n_nodes: usize) -> Result<RadialDensity> {
    #[derive(Clone, Copy)]
    enum Component {
        Ball { height: f64, radius: f64 },
        Exponential { height: f64, scale: f64, cutoff: f64 },
    }
    let count = rng.gen_range(1..=3);
    let components: Vec<Component> = (0..count)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Component::Ball { height: rng.gen_range(0.1..2.0), radius: rng.gen_range(0.2..2.0) }
            } else {
                Component::Exponential {
                    height: rng.gen_range(0.1..5.0),
                    scale: rng.gen_range(0.05..1.0),
                    cutoff: rng.gen_range(0.3..3.0),
                }
            }
        })
        .collect();
    let r_max = components
        .iter()
        .map(|c| match *c {
            Component::Ball { radius, .. } => radius,
            Component::Exponential { cutoff, .. } => cutoff,
        })
        .fold(0.0, f64::max);
    let grid = RadialGrid::uniform(r_max, n_nodes)?;
    RadialDensity::from_fn(grid, |r| {
        components
            .iter()
            .map(|c| match *c {
                Component::Ball { height, radius } if r <= radius => height,
                Component::Exponential { height, scale, cutoff } if r <= cutoff => height * (-r / scale).exp(),
                _ => 0.0,
            })
            .sum()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HlsCheck {
    pub samples: usize,
    pub seed: u64,
    pub min_deficit: f64,
    pub max_deficit: f64,
    /// Index of the sample attaining `min_deficit`.
    pub argmin: usize,
    /// Deficit of the optimizer itself, for scale.
    pub deficit_of_q: f64,
}

/// Evaluate the HLS deficit on `samples` seeded random densities.
pub fn hls_check(samples: usize, seed: u64, params: &ParticleParams, n_nodes: usize) -> Result<HlsCheck> {
    if samples == 0 {
        return Err(Error::domain("hls check needs at least one sample"));
    }
    let profile = lane_emden::reference()?;
    let tau_c = profile.tau_c(params.q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = (f64::INFINITY, 0);
    let mut max = f64::NEG_INFINITY;
    for i in 0..samples {
        let rho = random_density(&mut rng, n_nodes)?;
        let d = hls_deficit_with(&rho, params.q, tau_c)?;
        if d < min.0 {
            min = (d, i);
        }
        max = max.max(d);
    }
    Ok(HlsCheck {
        samples,
        seed,
        min_deficit: min.0,
        max_deficit: max,
        argmin: min.1,
        deficit_of_q: hls_deficit_with(&profile.q, params.q, tau_c)?,
    })
}
