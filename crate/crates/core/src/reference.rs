//! Independent reference time-stepper for the cubic wave equation: Strang
//! splitting between the exact linear flow (in coefficients) and the
//! pointwise update `ut -= dt u^3` (in physical space on a dealiased grid).
//! Second order in `dt`; the conserved energy
//! `integral (ut^2 + |grad u|^2)/2 + u^4/4` monitors accuracy.

use std::sync::Arc;

use crate::basis::Basis;
use crate::error::Result;
use crate::grid::GridSampling;
use crate::propagator::{free_evolution, StatePair};
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

#[derive(Debug, Clone)]
pub struct ReferenceRun<T: Scalar> {
    /// Recorded times, always including 0 and the final time.
    pub times: Vec<T>,
    pub states: Vec<StatePair<T>>,
    pub energy_initial: f64,
    /// Max relative drift of the conserved energy over the recorded states.
    pub energy_max_drift: f64,
}

impl<T: Scalar> ReferenceRun<T> {
    pub fn final_state(&self) -> &StatePair<T> {
        self.states.last().unwrap()
    }
}

/// Plans for the cubic nonlinearity: 2x zero-padding equivalent via a doubled
/// quadrature grid, so the retained-span projection of `u^3` is alias-free.
pub struct CubicPlans<T: Scalar> {
    pub dealias: TransformPlan<T>,
}

impl<T: Scalar> CubicPlans<T> {
    pub fn new(basis: Arc<Basis>, dealias_factor: usize) -> Result<Self> {
        let grid = GridSampling::for_basis(&basis).refined(dealias_factor.max(2));
        Ok(Self {
            dealias: TransformPlan::new(basis, grid)?,
        })
    }

    /// Retained-span coefficients of `u^3`.
    pub fn cube(&self, u: &[T]) -> Vec<T> {
        let mut values = self.dealias.synthesize(u);
        for v in values.iter_mut() {
            *v = *v * *v * *v;
        }
        self.dealias.analyze(&values)
    }

    /// Quadrature of `integral u^4`.
    pub fn quartic_integral(&self, u: &[T]) -> T {
        let values = self.dealias.synthesize(u);
        let w = T::of(self.dealias.grid().weight());
        let mut acc = T::zero();
        for v in values {
            let v2 = v * v;
            acc += v2 * v2;
        }
        w * acc
    }
}

/// Conserved energy of the cubic wave flow.
pub fn wave_energy<T: Scalar>(state: &StatePair<T>, plans: &CubicPlans<T>) -> f64 {
    let half = T::of(0.5);
    let mut quad = T::zero();
    for ((mode, &u), &ut) in state
        .basis()
        .modes
        .iter()
        .zip(&state.u.coeffs)
        .zip(&state.ut.coeffs)
    {
        quad += half * (ut * ut + T::of(mode.eigenvalue_sq) * u * u);
    }
    (quad + T::of(0.25) * plans.quartic_integral(&state.u.coeffs)).to_f64x()
}

/// Strang-split solve on `[0, t_final]` with `steps` uniform steps, recording
/// every `record_every`-th state (0 records only endpoint states).
pub fn reference_solve<T: Scalar>(
    f: &StatePair<T>,
    t_final: T,
    steps: usize,
    record_every: usize,
    plans: &CubicPlans<T>,
) -> Result<ReferenceRun<T>> {
    let dt = t_final / T::of(steps as f64);
    let half_dt = dt / T::of(2.0);
    let mut state = f.clone();
    let e0 = wave_energy(&state, plans);
    let mut times = vec![T::zero()];
    let mut states = vec![state.clone()];
    let mut max_drift = 0.0f64;
    let stride = if record_every == 0 { steps } else { record_every };

    for step in 1..=steps {
        // B(dt/2): ut -= dt/2 * P(u^3), then exact linear A(dt), then B(dt/2).
        let cubed = plans.cube(&state.u.coeffs);
        for (ut, &c) in state.ut.coeffs.iter_mut().zip(&cubed) {
            *ut -= half_dt * c;
        }
        state = free_evolution(&state, dt);
        let cubed = plans.cube(&state.u.coeffs);
        for (ut, &c) in state.ut.coeffs.iter_mut().zip(&cubed) {
            *ut -= half_dt * c;
        }

        if step % stride == 0 || step == steps {
            let t = dt * T::of(step as f64);
            let e = wave_energy(&state, plans);
            let scale = e0.abs().max(1e-300);
            max_drift = max_drift.max((e - e0).abs() / scale);
            times.push(t);
            states.push(state.clone());
        }
    }
    Ok(ReferenceRun {
        times,
        states,
        energy_initial: e0,
        energy_max_drift: max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::norms::sobolev_norm;
    use crate::ode::dense_profile;

    fn const_data(a: f64) -> (StatePair<f64>, CubicPlans<f64>) {
        let basis = Basis::new(Geometry::torus(1), 1).unwrap();
        let plans = CubicPlans::new(basis.clone(), 2).unwrap();
        let mut f = StatePair::zero(basis.clone());
        // Constant value a: the normalized constant mode is 1/sqrt(vol).
        f.u.coeffs[0] = a * basis.geometry.volume().sqrt();
        (f, plans)
    }

    #[test]
    fn zero_data_stays_zero() {
        let basis = Basis::new(Geometry::torus(1), 5).unwrap();
        let plans = CubicPlans::new(basis.clone(), 2).unwrap();
        let f = StatePair::<f64>::zero(basis);
        let run = reference_solve(&f, 1.0, 50, 0, &plans).unwrap();
        assert!(run
            .final_state()
            .u
            .coeffs
            .iter()
            .all(|&c| c == 0.0));
    }

    #[test]
    fn constant_data_follows_the_scaled_ode_profile() {
        // x-independent data u(0) = a, ut(0) = 0 evolves as a V(a t).
        let a = 1.0;
        let (f, plans) = const_data(a);
        let profile = dense_profile(8192);
        let t_final = profile.period / a;
        let steps = 16_384;
        let run = reference_solve(&f, t_final, steps, steps / 16, &plans).unwrap();
        let vol_sqrt = f.basis().geometry.volume().sqrt();
        for (t, state) in run.times.iter().zip(&run.states) {
            let value = state.u.coeffs[0] / vol_sqrt;
            let expect = a * profile.eval(a * t);
            assert!(
                (value - expect).abs() < 1e-6,
                "t = {t}: {value} vs {expect}"
            );
        }
    }

    #[test]
    fn richardson_ratio_is_second_order() {
        let a = 1.0;
        let (f, plans) = const_data(a);
        let profile = dense_profile(8192);
        let t_final = 1.0;
        let exact = a * profile.eval(a * t_final);
        let vol_sqrt = f.basis().geometry.volume().sqrt();
        let err = |steps: usize| {
            let run = reference_solve(&f, t_final, steps, 0, &plans).unwrap();
            (run.final_state().u.coeffs[0] / vol_sqrt - exact).abs()
        };
        let e1 = err(256);
        let e2 = err(512);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "Richardson ratio {ratio}");
    }

    #[test]
    fn energy_drift_is_small_and_time_reversal_recovers_data() {
        let basis = Basis::new(Geometry::torus(1), 7).unwrap();
        let plans = CubicPlans::new(basis.clone(), 2).unwrap();
        let mut f = StatePair::<f64>::zero(basis);
        for (i, c) in f.u.coeffs.iter_mut().enumerate() {
            *c = 0.4 / (1.0 + i as f64 * i as f64);
        }
        f.ut.coeffs[1] = 0.1;
        let steps = 2000;
        let run = reference_solve(&f, 1.0, steps, steps / 4, &plans).unwrap();
        assert!(run.energy_max_drift <= 1e-6, "drift {}", run.energy_max_drift);

        // Negate the velocity and march back to t = 0.
        let mut back = run.final_state().clone();
        for c in back.ut.coeffs.iter_mut() {
            *c = -*c;
        }
        let run_back = reference_solve(&back, 1.0, steps, 0, &plans).unwrap();
        let mut diff = back.clone();
        diff.u = run_back.final_state().u.sub(&f.u).unwrap();
        let dev = sobolev_norm(&diff.u, 0.0);
        assert!(dev < 1e-5, "time reversal residual {dev}");
    }
}
