//! The periodic profile `V'' + V^3 = 0`, `V(0) = 1`, `V'(0) = 0`, integrated
//! with classical RK4 under energy monitoring. The conserved energy
//! `V'^2/2 + V^4/4 = 1/4` pins the accuracy; the period comes from
//! root-finding on the sign pattern of `V'`.

use serde::Serialize;

const RK_STEP: f64 = 5e-4;

#[derive(Debug, Clone, Serialize)]
pub struct OdeProfile {
    pub times: Vec<f64>,
    pub v: Vec<f64>,
    pub vdot: Vec<f64>,
    pub period: f64,
    /// Largest deviation of `V'^2/2 + V^4/4` from 1/4 over the samples.
    pub max_energy_residual: f64,
}

fn rk4_step(v: f64, w: f64, h: f64) -> (f64, f64) {
    let f = |v: f64, w: f64| (w, -v * v * v);
    let (k1v, k1w) = f(v, w);
    let (k2v, k2w) = f(v + 0.5 * h * k1v, w + 0.5 * h * k1w);
    let (k3v, k3w) = f(v + 0.5 * h * k2v, w + 0.5 * h * k2w);
    let (k4v, k4w) = f(v + h * k3v, w + h * k3w);
    (
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

fn advance(mut v: f64, mut w: f64, span: f64) -> (f64, f64) {
    if span == 0.0 {
        return (v, w);
    }
    let steps = (span.abs() / RK_STEP).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    for _ in 0..steps {
        (v, w) = rk4_step(v, w, h);
    }
    (v, w)
}

/// Half period: the first positive zero of `V'`, located by a sign change and
/// refined by bisection.
fn half_period() -> f64 {
    let mut t = 0.0;
    let (mut v, mut w) = (1.0f64, 0.0f64);
    let h = 1e-2;
    // V' is negative on (0, T/2) and crosses upward at T/2.
    loop {
        let (nv, nw) = advance(v, w, h);
        if w < 0.0 && nw >= 0.0 {
            let mut lo = 0.0;
            let mut hi = h;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let (_, wm) = advance(v, w, mid);
                if wm < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return t + 0.5 * (lo + hi);
        }
        t += h;
        v = nv;
        w = nw;
        assert!(t < 100.0, "half period not found");
    }
}

/// Integrates the profile at the requested sample times (sorted, starting at
/// or after 0).
pub fn ode_v(t_grid: &[f64]) -> OdeProfile {
    assert!(!t_grid.is_empty(), "empty time grid");
    assert!(t_grid.windows(2).all(|w| w[0] <= w[1]), "unsorted time grid");
    assert!(t_grid[0] >= 0.0, "negative start time");
    let period = 2.0 * half_period();
    let mut v = 1.0f64;
    let mut w = 0.0f64;
    let mut t = 0.0f64;
    let mut vs = Vec::with_capacity(t_grid.len());
    let mut ws = Vec::with_capacity(t_grid.len());
    let mut max_res = 0.0f64;
    for &target in t_grid {
        (v, w) = advance(v, w, target - t);
        t = target;
        vs.push(v);
        ws.push(w);
        let res = (0.5 * w * w + 0.25 * v * v * v * v - 0.25).abs();
        max_res = max_res.max(res);
    }
    OdeProfile {
        times: t_grid.to_vec(),
        v: vs,
        vdot: ws,
        period,
        max_energy_residual: max_res,
    }
}

/// Dense uniform one-period table suitable for interpolation.
pub fn dense_profile(samples_per_period: usize) -> OdeProfile {
    let period = 2.0 * half_period();
    let n = samples_per_period.max(16);
    let grid: Vec<f64> = (0..=n).map(|i| period * i as f64 / n as f64).collect();
    ode_v(&grid)
}

impl OdeProfile {
    /// Cubic Hermite interpolation with periodic reduction of the argument.
    /// Requires a table covering one full period from 0.
    pub fn eval(&self, t: f64) -> f64 {
        self.interpolate(t).0
    }

    pub fn eval_dot(&self, t: f64) -> f64 {
        self.interpolate(t).1
    }

    fn interpolate(&self, t: f64) -> (f64, f64) {
        let tau = t.rem_euclid(self.period);
        let n = self.times.len() - 1;
        let h = self.period / n as f64;
        let mut i = (tau / h).floor() as usize;
        if i >= n {
            i = n - 1;
        }
        let x = (tau - self.times[i]) / h;
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.vdot[i] * h, self.vdot[i + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        let value = (2.0 * x3 - 3.0 * x2 + 1.0) * v0
            + (x3 - 2.0 * x2 + x) * m0
            + (-2.0 * x3 + 3.0 * x2) * v1
            + (x3 - x2) * m1;
        let deriv = ((6.0 * x2 - 6.0 * x) * v0
            + (3.0 * x2 - 4.0 * x + 1.0) * m0
            + (-6.0 * x2 + 6.0 * x) * v1
            + (3.0 * x2 - 2.0 * x) * m1)
            / h;
        (value, deriv)
    }
}
