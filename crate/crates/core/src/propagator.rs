//! Free wave evolution, Duhamel integrals, space-time norms, and
//! admissibility bookkeeping. Everything here is exact in coefficients except
//! the time quadrature, which is composite Simpson on a uniform grid.

use std::sync::Arc;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

/// `(u, du/dt)` with shared basis: the phase-space point of the wave flow.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair<T: Scalar> {
    pub u: SpectralField<T>,
    pub ut: SpectralField<T>,
}

impl<T: Scalar> StatePair<T> {
    pub fn new(u: SpectralField<T>, ut: SpectralField<T>) -> Result<Self> {
        if !u.basis.compatible(&ut.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { u, ut })
    }

    pub fn zero(basis: Arc<Basis>) -> Self {
        Self {
            u: SpectralField::zero(basis.clone()),
            ut: SpectralField::zero(basis),
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.u.basis
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            u: self.u.scaled(factor),
            ut: self.ut.scaled(factor),
        }
    }

    /// Conserved quadratic energy of the free flow,
    /// `sum_n lambda_n^2 u_n^2 + ut_n^2`.
    pub fn linear_energy(&self) -> T {
        let mut total = T::zero();
        for ((mode, &u), &ut) in self
            .basis()
            .modes
            .iter()
            .zip(&self.u.coeffs)
            .zip(&self.ut.coeffs)
        {
            total += T::of(mode.eigenvalue_sq) * u * u + ut * ut;
        }
        total
    }
}

/// `sin(t lambda)/lambda` continued through `lambda = 0`; series below
/// `lambda < 1e-8` where the direct quotient loses accuracy.
pub fn sinc_lambda<T: Scalar>(t: T, lambda: T) -> T {
    if lambda < T::of(1e-8) {
        let x = t * lambda;
        t * (T::one() - x * x / T::of(6.0))
    } else {
        (t * lambda).sin() / lambda
    }
}

/// Exact free evolution: `u(t) = cos(t lambda) f1 + sinc_lambda(t) f2`
/// coefficientwise, with the velocity updated consistently.
pub fn free_evolution<T: Scalar>(state: &StatePair<T>, t: T) -> StatePair<T> {
    let basis = state.basis().clone();
    let n = basis.len();
    let mut u = Vec::with_capacity(n);
    let mut ut = Vec::with_capacity(n);
    for ((mode, &a), &b) in basis
        .modes
        .iter()
        .zip(&state.u.coeffs)
        .zip(&state.ut.coeffs)
    {
        let lam = T::of(mode.eigenvalue_sq.sqrt());
        let c = (t * lam).cos();
        let s = sinc_lambda(t, lam);
        u.push(c * a + s * b);
        ut.push(-lam * (t * lam).sin() * a + c * b);
    }
    StatePair {
        u: SpectralField { basis: basis.clone(), coeffs: u },
        ut: SpectralField { basis, coeffs: ut },
    }
}

/// Half-wave flow `e^{i t sqrt(-Delta)} f` of a real field, returned as
/// (real, imaginary) coefficient parts.
pub fn half_wave_evolution<T: Scalar>(
    f: &SpectralField<T>,
    t: T,
) -> (SpectralField<T>, SpectralField<T>) {
    let basis = f.basis.clone();
    let mut re = Vec::with_capacity(f.len());
    let mut im = Vec::with_capacity(f.len());
    for (mode, &a) in basis.modes.iter().zip(&f.coeffs) {
        let lam = T::of(mode.eigenvalue_sq.sqrt());
        re.push((t * lam).cos() * a);
        im.push((t * lam).sin() * a);
    }
    (
        SpectralField { basis: basis.clone(), coeffs: re },
        SpectralField { basis, coeffs: im },
    )
}

/// Uniformly spaced snapshots of coefficient vectors on `[0, T]`.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub basis: Arc<Basis>,
    pub dt: T,
    /// One coefficient vector per grid time `i * dt`, starting at `t = 0`.
    pub frames: Vec<Vec<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn zero(basis: Arc<Basis>, dt: T, steps: usize) -> Self {
        let n = basis.len();
        Self {
            basis,
            dt,
            frames: vec![vec![T::zero(); n]; steps + 1],
        }
    }

    pub fn steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn t_final(&self) -> T {
        self.dt * T::of(self.steps() as f64)
    }

    pub fn time(&self, i: usize) -> T {
        self.dt * T::of(i as f64)
    }

    pub fn field(&self, i: usize) -> SpectralField<T> {
        SpectralField {
            basis: self.basis.clone(),
            coeffs: self.frames[i].clone(),
        }
    }

    pub(crate) fn index_of(&self, t: T) -> Result<usize> {
        let steps = self.steps();
        let ratio = (t / self.dt).to_f64x();
        let i = ratio.round() as isize;
        if i < 0 || i as usize > steps {
            return Err(Error::TrajectoryOutOfRange {
                t: t.to_f64x(),
                t_max: self.t_final().to_f64x(),
            });
        }
        if (ratio - i as f64).abs() > 1e-9 * (1.0 + ratio.abs()) {
            return Err(Error::OffGridTime {
                t: t.to_f64x(),
                dt: self.dt.to_f64x(),
            });
        }
        Ok(i as usize)
    }
}

/// Composite quadrature weights on `0..=i` with spacing `dt`: Simpson for an
/// even interval count, Simpson + 3/8 tail otherwise, trapezoid for a single
/// interval.
pub(crate) fn simpson_weights<T: Scalar>(i: usize, dt: T) -> Vec<T> {
    let mut w = vec![T::zero(); i + 1];
    if i == 0 {
        return w;
    }
    let h = dt;
    if i == 1 {
        w[0] = h / T::of(2.0);
        w[1] = h / T::of(2.0);
        return w;
    }
    let simpson_end = if i % 2 == 0 { i } else { i - 3 };
    if simpson_end > 0 {
        let third = h / T::of(3.0);
        w[0] += third;
        for j in 1..simpson_end {
            w[j] += third * if j % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        }
        w[simpson_end] += third;
    }
    if i % 2 == 1 {
        // 3/8 rule on the last three intervals.
        let c = h * T::of(3.0 / 8.0);
        w[i - 3] += c;
        w[i - 2] += c * T::of(3.0);
        w[i - 1] += c * T::of(3.0);
        w[i] += c;
    }
    w
}

/// `integral_0^t sinc_lambda(t - tau) g_n(tau) dtau` coefficientwise over the
/// trajectory's uniform grid. Returns the integral without the leading minus
/// sign of the wave Duhamel formula; callers apply it.
pub fn duhamel<T: Scalar>(source: &Trajectory<T>, t: T) -> Result<SpectralField<T>> {
    duhamel_kernel(source, t, false)
}

/// Time derivative version: `integral_0^t cos((t - tau) lambda) g_n(tau) dtau`.
pub fn duhamel_dt<T: Scalar>(source: &Trajectory<T>, t: T) -> Result<SpectralField<T>> {
    duhamel_kernel(source, t, true)
}

fn duhamel_kernel<T: Scalar>(source: &Trajectory<T>, t: T, derivative: bool) -> Result<SpectralField<T>> {
    let i = source.index_of(t)?;
    let n = source.basis.len();
    let w = simpson_weights(i, source.dt);
    let mut coeffs = vec![T::zero(); n];
    for (m, mode) in source.basis.modes.iter().enumerate() {
        let lam = T::of(mode.eigenvalue_sq.sqrt());
        let mut acc = T::zero();
        for (j, &wj) in w.iter().enumerate() {
            let dt_j = t - source.time(j);
            let kernel = if derivative {
                (dt_j * lam).cos()
            } else {
                sinc_lambda(dt_j, lam)
            };
            acc += wj * kernel * source.frames[j][m];
        }
        coeffs[m] = acc;
    }
    SpectralField::new(source.basis.clone(), coeffs)
}

/// `L^p((0,T); L^q)` by composite Simpson in time over per-frame `L^q` norms.
/// `p = infinity` takes the maximum over grid times.
pub fn spacetime_norm<T: Scalar>(
    traj: &Trajectory<T>,
    p: f64,
    q: f64,
    plan: &TransformPlan<T>,
) -> T {
    let steps = traj.steps();
    let mut lq = Vec::with_capacity(steps + 1);
    for frame in &traj.frames {
        let values = plan.synthesize(frame);
        lq.push(crate::norms::lp_norm(&values, q, plan.grid()));
    }
    if p.is_infinite() {
        return lq.into_iter().fold(T::zero(), T::max);
    }
    let w = simpson_weights(steps, traj.dt);
    let p_t = T::of(p);
    let mut acc = T::zero();
    for (x, wj) in lq.into_iter().zip(w) {
        acc += wj * x.powf(p_t);
    }
    acc.powf(T::one() / p_t)
}

/// Space-time norms of the modulus of the half-wave flow of `f`, sampled on
/// `steps + 1` uniform times in `[0, T]`.
pub fn half_wave_spacetime_norm<T: Scalar>(
    f: &SpectralField<T>,
    t_final: T,
    steps: usize,
    p: f64,
    q: f64,
    plan: &TransformPlan<T>,
) -> T {
    let dt = t_final / T::of(steps as f64);
    let q_t = T::of(q);
    let mut lq = Vec::with_capacity(steps + 1);
    let weight = T::of(plan.grid().weight());
    for i in 0..=steps {
        let t = dt * T::of(i as f64);
        let (re, im) = half_wave_evolution(f, t);
        let vr = plan.synthesize(&re.coeffs);
        let vi = plan.synthesize(&im.coeffs);
        let mut acc = T::zero();
        for (&a, &b) in vr.iter().zip(&vi) {
            acc += (a * a + b * b).powf(q_t / T::of(2.0));
        }
        lq.push((weight * acc).powf(T::one() / q_t));
    }
    if p.is_infinite() {
        return lq.into_iter().fold(T::zero(), T::max);
    }
    let w = simpson_weights(steps, dt);
    let p_t = T::of(p);
    let mut acc = T::zero();
    for (x, wj) in lq.into_iter().zip(w) {
        acc += wj * x.powf(p_t);
    }
    acc.powf(T::one() / p_t)
}

/// A couple `(p, q)` on the three-dimensional scaling line
/// `1/p + 3/q = 3/2 - s` with the lower bound on `p` depending on whether the
/// domain has a boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub boundary: bool,
}

impl AdmissiblePair {
    pub fn new(p: f64, q: f64, s: f64, boundary: bool) -> Result<Self> {
        let lhs = 1.0 / p + 3.0 / q;
        let rhs = 1.5 - s;
        if (lhs - rhs).abs() > 1e-9 {
            return Err(Error::InadmissiblePair {
                constraint: format!("scaling line 1/p + 3/q = 3/2 - s violated: {lhs} != {rhs}"),
            });
        }
        let min_p = if boundary {
            if s <= 0.7 {
                3.5 / s
            } else {
                5.0
            }
        } else {
            2.0 / s
        };
        if p + 1e-12 < min_p {
            return Err(Error::InadmissiblePair {
                constraint: format!("p >= {min_p} required, got {p}"),
            });
        }
        Ok(Self { p, q, s, boundary })
    }
}
