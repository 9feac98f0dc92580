//! Dormand–Prince 5(4) integrator with continuous output and first-zero event location.

use crate::error::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)` of an `N`-dimensional system.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_max: f64::INFINITY, max_steps: 200_000 }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error estimate: 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension (Hairer & Wanner, DOPRI5)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coef: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coef;
        std::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }
}

/// Continuous solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    segments: Vec<Segment<N>>,
    pub t_end: f64,
    pub y_end: [f64; N],
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.segments.first().map_or(self.t_end, |s| s.t0)
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Interpolated state; `t` is clamped into the covered interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t >= self.t_end || self.segments.is_empty() {
            return self.y_end;
        }
        let idx = self.segments.partition_point(|s| s.t1() <= t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        seg.eval(t.max(seg.t0))
    }
}

/// Outcome of an integration that may stop at an event.
#[derive(Debug, Clone)]
pub struct EventRun<const N: usize> {
    pub trajectory: Trajectory<N>,
    /// `Some(t)` if the event function changed sign before the end of the interval.
    pub event: Option<f64>,
}

/// Integrate from `t0` to `t1`, stopping at the first sign change of `event`.
///
/// The root is refined by bisection on the continuous extension until the bracket
/// is narrower than `event_tol`.
pub fn integrate<S, G, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: &Tolerances,
    event_tol: f64,
    event: G,
) -> Result<EventRun<N>>
where
    S: OdeSystem<N>,
    G: Fn(f64, &[f64; N]) -> f64,
{
    if !(t1 > t0) {
        return Err(Error::Solver(format!("empty integration interval [{t0}, {t1}]")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = [0.0; N];
    sys.rhs(t, &y, &mut k1);
    let mut h = initial_step(sys, t, &y, &k1, tol).min(t1 - t0).min(tol.h_max);
    let mut g_prev = event(t, &y);
    let mut segments = Vec::new();
    let mut rejected_last = false;

    for _ in 0..tol.max_steps {
        if t1 - t <= 1e-15 * t1.abs().max(1.0) {
            return Ok(EventRun { trajectory: Trajectory { segments, t_end: t, y_end: y }, event: None });
        }
        h = h.min(t1 - t);
        let (y_new, k7, err, seg) = dp_step(sys, t, &y, &k1, h, tol);
        if !err.is_finite() {
            return Err(Error::Solver(format!("non-finite state at t = {t}")));
        }
        if err <= 1.0 {
            let g_new = event(t + h, &y_new);
            segments.push(seg);
            if g_prev == 0.0 || g_prev.signum() != g_new.signum() {
                let seg = segments.last().unwrap();
                let (t_ev, y_ev) = if g_prev == 0.0 { (t, y) } else { locate_root(seg, g_prev, &event, event_tol) };
                return Ok(EventRun {
                    trajectory: Trajectory { segments, t_end: t_ev, y_end: y_ev },
                    event: Some(t_ev),
                });
            }
            g_prev = g_new;
            t += h;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if rejected_last { fac.min(1.0) } else { fac };
            h = h.min(tol.h_max);
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            rejected_last = true;
            if h < 1e-14 * t.abs().max(1e-300) {
                return Err(Error::Solver(format!("step size underflow at t = {t}")));
            }
        }
    }
    Err(Error::Solver(format!("exceeded {} steps before reaching t = {t1}", tol.max_steps)))
}

fn locate_root<G, const N: usize>(seg: &Segment<N>, g0: f64, event: &G, event_tol: f64) -> (f64, [f64; N])
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let (mut lo, mut hi) = (seg.t0, seg.t1());
    let tol = event_tol.max(4.0 * f64::EPSILON * hi.abs());
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g = event(mid, &seg.eval(mid));
        if g == 0.0 {
            return (mid, seg.eval(mid));
        }
        if g.signum() == g0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, seg.eval(t))
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    tol: &Tolerances,
) -> f64 {
    let scale = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let d0 = rms((0..N).map(|i| y[i] / scale(i)));
    let d1 = rms((0..N).map(|i| f0[i] / scale(i)));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * f0[i]);
    let mut f1 = [0.0; N];
    sys.rhs(t + h0, &y1, &mut f1);
    let d2 = rms((0..N).map(|i| (f1[i] - f0[i]) / scale(i))) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (s / n.max(1) as f64).sqrt()
}

#[allow(clippy::type_complexity)]
fn dp_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: &Tolerances,
) -> ([f64; N], [f64; N], f64, Segment<N>) {
    let stage = |coeffs: &[(f64, &[f64; N])]| -> [f64; N] {
        std::array::from_fn(|i| y[i] + h * coeffs.iter().map(|(a, k)| a * k[i]).sum::<f64>())
    };
    let mut k2 = [0.0; N];
    let mut k3 = [0.0; N];
    let mut k4 = [0.0; N];
    let mut k5 = [0.0; N];
    let mut k6 = [0.0; N];
    let mut k7 = [0.0; N];
    sys.rhs(t + C2 * h, &stage(&[(A21, k1)]), &mut k2);
    sys.rhs(t + C3 * h, &stage(&[(A31, k1), (A32, &k2)]), &mut k3);
    sys.rhs(t + C4 * h, &stage(&[(A41, k1), (A42, &k2), (A43, &k3)]), &mut k4);
    sys.rhs(t + C5 * h, &stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]), &mut k5);
    sys.rhs(t + h, &stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]), &mut k6);
    let y_new = stage(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    sys.rhs(t + h, &y_new, &mut k7);

    let err = rms((0..N).map(|i| {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        e / (tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs()))
    }));

    let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
    let r3: [f64; N] = std::array::from_fn(|i| h * k1[i] - r2[i]);
    let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
    let r5: [f64; N] =
        std::array::from_fn(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
    let seg = Segment { t0: t, h, coef: [*y, r2, r3, r4, r5] };
    (y_new, k7, err, seg)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_endpoint() {
        let run = integrate(&Oscillator, 0.0, [1.0, 0.0], 10.0, &Tolerances::default(), 1e-12, |_, _| 1.0).unwrap();
        assert!(run.event.is_none());
        assert!((run.trajectory.y_end[0] - 10f64.cos()).abs() < 1e-10);
        assert!((run.trajectory.t_end - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let tol = Tolerances { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let run = integrate(&Oscillator, 0.0, [1.0, 0.0], 6.0, &tol, 1e-12, |_, _| 1.0).unwrap();
        for i in 0..=600 {
            let t = i as f64 * 0.01;
            let y = run.trajectory.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn first_zero_is_located() {
        let run = integrate(&Oscillator, 0.0, [1.0, 0.0], 10.0, &Tolerances::default(), 1e-13, |_, y| y[0]).unwrap();
        let t = run.event.unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
        assert!(run.trajectory.y_end[0].abs() < 1e-11);
        assert_eq!(run.trajectory.t_end, t);
    }

    #[test]
    fn empty_interval_is_an_error() {
        assert!(integrate(&Oscillator, 1.0, [1.0, 0.0], 1.0, &Tolerances::default(), 1e-12, |_, _| 1.0).is_err());
    }
}
