//! Probabilistic local-existence experiment: the fraction of randomizations
//! for which the fixed point closes (or the free part stays under the
//! threshold `eps T^{-delta}`), per horizon `T`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSampling;
use crate::picard::{picard_solve, PicardConfig};
use crate::propagator::{spacetime_norm, StatePair, Trajectory};
use crate::random::{randomize, sample_realization, RandomFamily};
use crate::scalar::Scalar;
use crate::stats::linear_fit;
use crate::transform::TransformPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum LambdaRule {
    /// Success = the Picard iteration converges.
    PicardSuccess,
    /// Success = the free part's space-time `L^4` norm is at most
    /// `eps * T^{-delta}`.
    Threshold { eps: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceRow {
    pub t_horizon: f64,
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub rows: Vec<ExistenceRow>,
    /// Log-log slope of `1 - fraction` against `T` over rows with failures;
    /// NaN when fewer than two rows resolve a failure probability.
    pub slope_estimate: f64,
}

/// Success fraction per horizon, Monte Carlo over trial randomizations of
/// `f`. `s` sets the Picard contraction-norm regularity.
#[allow(clippy::too_many_arguments)]
pub fn local_existence_experiment<T: Scalar>(
    f: &StatePair<T>,
    family: &RandomFamily,
    s: f64,
    t_grid: &[f64],
    trials: u64,
    rule: LambdaRule,
    seed: u64,
) -> Result<ExistenceReport> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidParameter {
            name: "t_grid",
            reason: "horizons must lie in (0, 1]".into(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "needs at least one trial".into(),
        });
    }
    let basis = f.basis().clone();
    let n = basis.len();
    let lambda_max = basis.max_eigenvalue();
    let plan = TransformPlan::<T>::new(basis.clone(), GridSampling::for_basis(&basis))?;

    let mut rows = Vec::with_capacity(t_grid.len());
    for &t_horizon in t_grid {
        let config = PicardConfig::for_regularity(s, t_horizon, lambda_max);
        let successes: u64 = (0..trials)
            .into_par_iter()
            .map(|trial| {
                // Trial streams are shared across horizons so the same
                // realization is tested at every T.
                let real = sample_realization::<T>(family, seed, trial, n);
                let (u0, ut0) = randomize(&f.u, &f.ut, &real).expect("matching lengths");
                let state = StatePair { u: u0, ut: ut0 };
                let ok = match rule {
                    LambdaRule::PicardSuccess => picard_solve(&state, &config)
                        .map(|sol| sol.report.converged)
                        .unwrap_or(false),
                    LambdaRule::Threshold { eps, delta } => {
                        let dt = T::of(t_horizon / config.steps as f64);
                        let frames = (0..=config.steps)
                            .map(|i| {
                                crate::propagator::free_evolution(
                                    &state,
                                    dt * T::of(i as f64),
                                )
                                .u
                                .coeffs
                            })
                            .collect();
                        let traj = Trajectory {
                            basis: basis.clone(),
                            dt,
                            frames,
                        };
                        let norm = spacetime_norm(&traj, 4.0, 4.0, &plan).to_f64x();
                        norm <= eps * t_horizon.powf(-delta)
                    }
                };
                u64::from(ok)
            })
            .sum();
        rows.push(ExistenceRow {
            t_horizon,
            trials,
            successes,
            fraction: successes as f64 / trials as f64,
        });
    }

    let usable: Vec<&ExistenceRow> = rows.iter().filter(|r| r.successes < r.trials).collect();
    let slope_estimate = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|r| r.t_horizon.ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|r| (1.0 - r.fraction).ln()).collect();
        linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };

    Ok(ExistenceReport {
        rows,
        slope_estimate,
    })
}

/// Zero-velocity state with a given coefficient profile, a convenience for
/// ensemble construction.
pub fn profile_state<T: Scalar>(f1: SpectralField<T>) -> StatePair<T> {
    let ut = SpectralField::zero(f1.basis.clone());
    StatePair { u: f1, ut }
}
