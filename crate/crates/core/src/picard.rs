//! Picard iteration for the randomized cubic wave problem: with
//! `u = u_free + v` the correction solves `v = K(v)`, where `K` maps a
//! trajectory to minus the Duhamel integral of `(u_free + v)^3`. Iterates are
//! driven to a fixed point in the discrete proxy of the solution space:
//! max-over-times `H^sigma` plus space-time `L^4`.


use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::{duhamel, duhamel_dt, free_evolution, StatePair, Trajectory};
use crate::reference::CubicPlans;
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

#[derive(Debug, Clone, Serialize)]
pub struct PicardConfig {
    pub t_final: f64,
    pub steps: usize,
    pub max_iter: usize,
    /// Relative fixed-point residual in the proxy norm.
    pub tol: f64,
    /// Regularity of the contraction norm proxy.
    pub sigma: f64,
    /// Grid refinement for the cubic product, at least 2.
    pub dealias_factor: usize,
}

impl PicardConfig {
    /// Defaults: `sigma = 1/2` at `s = 1/4`, else
    /// `min(9/10, 1/2 + 3(s - 1/4))`; time step bounded by `0.5 / lambda_max`
    /// with at least 64 steps.
    pub fn for_regularity(s: f64, t_final: f64, lambda_max: f64) -> Self {
        let sigma = if s <= 0.25 {
            0.5
        } else {
            (0.5 + 3.0 * (s - 0.25)).min(0.9)
        };
        let steps = ((t_final * lambda_max / 0.5).ceil() as usize).max(64);
        Self {
            t_final,
            steps,
            max_iter: 30,
            tol: 1e-9,
            sigma,
            dealias_factor: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !(self.t_final > 0.0) {
            return Err(Error::InvalidParameter {
                name: "picard",
                reason: "needs steps >= 1 and t_final > 0".into(),
            });
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be positive".into(),
            });
        }
        if self.dealias_factor < 2 {
            return Err(Error::InvalidParameter {
                name: "dealias_factor",
                reason: "cubic products need at least 2".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub contraction_ratios: Vec<f64>,
    /// Proxy norm of the correction `v` at the last iterate.
    pub norm_x_proxy: f64,
    /// Space-time `L^4` norm of the free part.
    pub lambda_used: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct PicardSolution<T: Scalar> {
    /// `u = u_free + v` at the grid times.
    pub states: Vec<StatePair<T>>,
    pub dt: T,
    pub report: PicardReport,
}

impl<T: Scalar> PicardSolution<T> {
    pub fn final_state(&self) -> &StatePair<T> {
        self.states.last().unwrap()
    }
}

/// Max-over-times `H^sigma` plus space-time `L^4` of a coefficient
/// trajectory.
fn x_proxy_norm<T: Scalar>(
    traj: &Trajectory<T>,
    sigma: f64,
    plan: &TransformPlan<T>,
) -> f64 {
    let mut h_max = T::zero();
    for frame in &traj.frames {
        let mut acc = T::zero();
        for (mode, &a) in traj.basis.modes.iter().zip(frame) {
            acc += T::of((1.0 + mode.eigenvalue_sq).powf(sigma)) * a * a;
        }
        h_max = h_max.max(acc.sqrt());
    }
    let l4 = crate::propagator::spacetime_norm(traj, 4.0, 4.0, plan);
    (h_max + l4).to_f64x()
}

fn cubed_source<T: Scalar>(
    free_frames: &[Vec<T>],
    v: &Trajectory<T>,
    plans: &CubicPlans<T>,
) -> Trajectory<T> {
    let mut source = Trajectory::zero(v.basis.clone(), v.dt, v.steps());
    for (i, frame) in source.frames.iter_mut().enumerate() {
        let w: Vec<T> = free_frames[i]
            .iter()
            .zip(&v.frames[i])
            .map(|(&a, &b)| a + b)
            .collect();
        *frame = plans.cube(&w);
    }
    source
}

/// One application of the fixed-point map: cubes `u_free + v` on the
/// dealiased grid, then applies minus the Duhamel integral at every grid
/// time. The output is zero at `t = 0`.
pub fn apply_k<T: Scalar>(
    f_omega: &StatePair<T>,
    v: &Trajectory<T>,
    config: &PicardConfig,
) -> Result<Trajectory<T>> {
    config.validate()?;
    let plans = CubicPlans::new(v.basis.clone(), config.dealias_factor)?;
    let free_frames = free_u_frames(f_omega, v.dt, v.steps());
    Ok(apply_k_inner(&free_frames, v, &plans))
}

fn apply_k_inner<T: Scalar>(
    free_frames: &[Vec<T>],
    v: &Trajectory<T>,
    plans: &CubicPlans<T>,
) -> Trajectory<T> {
    let source = cubed_source(free_frames, v, plans);
    let mut out = Trajectory::zero(v.basis.clone(), v.dt, v.steps());
    for i in 0..=v.steps() {
        let t = v.time(i);
        let integral = duhamel(&source, t).expect("grid time");
        for (o, &c) in out.frames[i].iter_mut().zip(&integral.coeffs) {
            *o = -c;
        }
    }
    out
}

fn free_u_frames<T: Scalar>(f_omega: &StatePair<T>, dt: T, steps: usize) -> Vec<Vec<T>> {
    (0..=steps)
        .map(|i| free_evolution(f_omega, dt * T::of(i as f64)).u.coeffs)
        .collect()
}

/// Iterates `v <- K(v)` from `v = 0` until the relative proxy-norm change
/// drops below `tol`, divergence is detected (three consecutive contraction
/// ratios at or above 1), or `max_iter` is hit. Divergence produces a
/// non-converged report, not an error.
pub fn picard_solve<T: Scalar>(
    f_omega: &StatePair<T>,
    config: &PicardConfig,
) -> Result<PicardSolution<T>> {
    config.validate()?;
    let basis = f_omega.basis().clone();
    let dt = T::of(config.t_final / config.steps as f64);
    let plans = CubicPlans::new(basis.clone(), config.dealias_factor)?;
    let plan = TransformPlan::new(
        basis.clone(),
        crate::grid::GridSampling::for_basis(&basis),
    )?;
    let free_frames = free_u_frames(f_omega, dt, config.steps);

    let free_traj = Trajectory {
        basis: basis.clone(),
        dt,
        frames: free_frames.clone(),
    };
    let lambda_used = crate::propagator::spacetime_norm(&free_traj, 4.0, 4.0, &plan).to_f64x();

    let mut v = Trajectory::zero(basis.clone(), dt, config.steps);
    let mut ratios = Vec::new();
    let mut prev_diff: Option<f64> = None;
    let mut converged = false;
    let mut final_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut bad_streak = 0u32;

    for iter in 1..=config.max_iter {
        iterations = iter;
        let next = apply_k_inner(&free_frames, &v, &plans);
        let mut diff = next.clone();
        for (df, vf) in diff.frames.iter_mut().zip(&v.frames) {
            for (d, &o) in df.iter_mut().zip(vf) {
                *d -= o;
            }
        }
        let d = x_proxy_norm(&diff, config.sigma, &plan);
        let scale = x_proxy_norm(&next, config.sigma, &plan).max(1e-300);
        if let Some(p) = prev_diff {
            let r = if p > 0.0 { d / p } else { 0.0 };
            ratios.push(r);
            bad_streak = if r >= 1.0 { bad_streak + 1 } else { 0 };
        }
        prev_diff = Some(d);
        v = next;
        final_residual = d / scale;
        if final_residual <= config.tol {
            converged = true;
            break;
        }
        if bad_streak >= 3 {
            break;
        }
    }

    let norm_x_proxy = x_proxy_norm(&v, config.sigma, &plan);

    // Assemble u = u_free + v with the velocity component from the
    // differentiated Duhamel kernel.
    let source = cubed_source(&free_frames, &v, &plans);
    let mut states = Vec::with_capacity(config.steps + 1);
    for i in 0..=config.steps {
        let t = dt * T::of(i as f64);
        let free = free_evolution(f_omega, t);
        let vt = duhamel_dt(&source, t)?;
        let mut u = free.u;
        for (c, &vc) in u.coeffs.iter_mut().zip(&v.frames[i]) {
            *c += vc;
        }
        let mut ut = free.ut;
        for (c, &vc) in ut.coeffs.iter_mut().zip(&vt.coeffs) {
            *c -= vc;
        }
        states.push(StatePair { u, ut });
    }

    Ok(PicardSolution {
        states,
        dt,
        report: PicardReport {
            converged,
            iterations,
            final_residual,
            contraction_ratios: ratios,
            norm_x_proxy,
            lambda_used,
            sigma: config.sigma,
        },
    })
}

/// Fixed-point residual `||v - K(v)|| / max(||v||, tiny)` of a solution's
/// correction part, for direct verification of the consistency invariant.
pub fn fixed_point_residual<T: Scalar>(
    f_omega: &StatePair<T>,
    solution: &PicardSolution<T>,
    config: &PicardConfig,
) -> Result<f64> {
    let basis = f_omega.basis().clone();
    let dt = solution.dt;
    let steps = solution.states.len() - 1;
    let free_frames = free_u_frames(f_omega, dt, steps);
    let mut v = Trajectory::zero(basis.clone(), dt, steps);
    for (i, state) in solution.states.iter().enumerate() {
        for ((vc, &uc), &fc) in v.frames[i]
            .iter_mut()
            .zip(&state.u.coeffs)
            .zip(&free_frames[i])
        {
            *vc = uc - fc;
        }
    }
    let plans = CubicPlans::new(basis.clone(), config.dealias_factor)?;
    let plan = TransformPlan::new(
        basis.clone(),
        crate::grid::GridSampling::for_basis(&basis),
    )?;
    let kv = apply_k_inner(&free_frames, &v, &plans);
    let mut diff = kv;
    for (df, vf) in diff.frames.iter_mut().zip(&v.frames) {
        for (d, &o) in df.iter_mut().zip(vf) {
            *d -= o;
        }
    }
    let num = x_proxy_norm(&diff, config.sigma, &plan);
    let den = x_proxy_norm(&v, config.sigma, &plan).max(1e-300);
    Ok(num / den)
}
