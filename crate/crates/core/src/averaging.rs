//! Randomized averaging-effect experiments for the free wave flow: tail
//! tables for the weighted space-time norm, moment growth in the chaos
//! parameter `p`, and half-wave Strichartz ratio probes.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSampling;
use crate::norms::{bessel_power, lp_norm};
use crate::propagator::{sinc_lambda, simpson_weights, AdmissiblePair, StatePair};
use crate::random::{sample_realization, RandomFamily};
use crate::scalar::Scalar;
use crate::stats::{linear_fit, wilson_interval};
use crate::transform::TransformPlan;

/// Evaluates the free-flow coefficients `cos(t lambda) a + sinc(t) b`.
fn free_u_coeffs<T: Scalar>(basis: &Basis, a: &[T], b: &[T], t: T) -> Vec<T> {
    basis
        .modes
        .iter()
        .zip(a.iter().zip(b))
        .map(|(mode, (&an, &bn))| {
            let lam = T::of(mode.eigenvalue_sq.sqrt());
            (t * lam).cos() * an + sinc_lambda(t, lam) * bn
        })
        .collect()
}

/// Space-time `L^p([0,T] x M)` norm of the free flow of `(a, b)` via Simpson
/// in time on `steps + 1` samples.
fn free_flow_spacetime_lp<T: Scalar>(
    plan: &TransformPlan<T>,
    a: &[T],
    b: &[T],
    t_final: T,
    steps: usize,
    p: f64,
) -> T {
    let dt = t_final / T::of(steps as f64);
    let w = simpson_weights(steps, dt);
    let p_t = T::of(p);
    let mut acc = T::zero();
    for (i, &wi) in w.iter().enumerate() {
        let coeffs = free_u_coeffs(plan.basis(), a, b, dt * T::of(i as f64));
        let values = plan.synthesize(&coeffs);
        acc += wi * lp_norm(&values, p, plan.grid()).powf(p_t);
    }
    acc.powf(T::one() / p_t)
}

fn default_time_steps(t_final: f64, lambda_max: f64) -> usize {
    ((t_final * lambda_max / 0.5).ceil() as usize).max(32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Self-consistent Markov bound `mean(norm^p) / lambda^p`.
    pub chebyshev_bound: f64,
    /// Fitted exponential tail `exp(a + b lambda^2)` evaluated at `lambda`.
    pub exp_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingReport {
    /// Weight exponent applied through the Bessel multiplier.
    pub weight_exponent: f64,
    /// Lebesgue exponent of the space-time norm (4, or 5 with boundary).
    pub norm_power: f64,
    pub t_final: f64,
    pub per_trial: Vec<f64>,
    /// Mean of the `norm_power`-th powers.
    pub moment_mean: f64,
    pub tail_rows: Vec<TailRow>,
    /// Regression slope of `ln p_hat` on `lambda^2` (negative for
    /// exponential-looking tails) and the two fit qualities.
    pub exp_slope: f64,
    pub exp_r2: f64,
    pub poly_r2: f64,
}

/// Distribution of `|| (1 - Delta)^{(s - 1/4)/2} u_f^omega ||_{L^4([0,T] x M)}`
/// over the randomization (the `L^5`, `s - 2/5` variant with a boundary),
/// with its tail table against the self-consistent Markov bound and an
/// exponential-tail fit.
#[allow(clippy::too_many_arguments)]
pub fn averaging_experiment<T: Scalar>(
    f: &StatePair<T>,
    family: &RandomFamily,
    s: f64,
    t_final: f64,
    trials: u64,
    seed: u64,
    boundary: bool,
    lambda_grid: Option<&[f64]>,
) -> Result<AveragingReport> {
    if boundary && !family.certified.has_6th_moment {
        return Err(Error::UncertifiedFamily {
            requirement: "sixth moment (boundary case)",
        });
    }
    if !boundary && !family.certified.has_4th_moment {
        return Err(Error::UncertifiedFamily {
            requirement: "fourth moment",
        });
    }
    let (weight_exponent, norm_power) = if boundary {
        (s - 0.4, 5.0)
    } else {
        (s - 0.25, 4.0)
    };
    let wu = bessel_power(&f.u, weight_exponent);
    let wut = bessel_power(&f.ut, weight_exponent);
    let basis = f.basis().clone();
    let grid = GridSampling::for_basis(&basis);
    let plan = TransformPlan::<T>::new(basis.clone(), grid)?;
    let steps = default_time_steps(t_final, basis.max_eigenvalue());
    let n = basis.len();

    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial_id| {
            let real = sample_realization::<T>(family, seed, trial_id, n);
            let a: Vec<T> = wu
                .coeffs
                .iter()
                .zip(&real.h)
                .map(|(&c, &h)| h * c)
                .collect();
            let b: Vec<T> = wut
                .coeffs
                .iter()
                .zip(&real.l)
                .map(|(&c, &l)| l * c)
                .collect();
            free_flow_spacetime_lp(&plan, &a, &b, T::of(t_final), steps, norm_power).to_f64x()
        })
        .collect();

    let moment_mean =
        per_trial.iter().map(|v| v.powf(norm_power)).sum::<f64>() / trials as f64;

    let grid_vals: Vec<f64> = match lambda_grid {
        Some(g) => g.to_vec(),
        None => default_tail_grid(&per_trial),
    };

    let mut rows = Vec::with_capacity(grid_vals.len());
    for &lam in &grid_vals {
        let exceed = per_trial.iter().filter(|&&v| v >= lam).count() as u64;
        let w = wilson_interval(exceed, trials, 1.96);
        rows.push(TailRow {
            lambda: lam,
            p_hat: w.p_hat,
            ci_low: w.low,
            ci_high: w.high,
            chebyshev_bound: moment_mean / lam.powf(norm_power),
            exp_fit: f64::NAN,
        });
    }

    // Exponential vs polynomial tail discrimination on the usable rows.
    let usable: Vec<&TailRow> = rows
        .iter()
        .filter(|r| r.p_hat > 0.0 && r.lambda > 0.0)
        .collect();
    let (exp_slope, exp_r2, poly_r2, exp_a) = if usable.len() >= 3 {
        let ply: Vec<f64> = usable.iter().map(|r| r.p_hat.ln()).collect();
        let lam2: Vec<f64> = usable.iter().map(|r| r.lambda * r.lambda).collect();
        let llam: Vec<f64> = usable.iter().map(|r| r.lambda.ln()).collect();
        let (b_exp, a_exp, r2_exp) = linear_fit(&lam2, &ply);
        let (_b_poly, _a_poly, r2_poly) = linear_fit(&llam, &ply);
        (b_exp, r2_exp, r2_poly, a_exp)
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };
    if exp_slope.is_finite() {
        for r in &mut rows {
            r.exp_fit = (exp_a + exp_slope * r.lambda * r.lambda).exp();
        }
    }

    Ok(AveragingReport {
        weight_exponent,
        norm_power,
        t_final,
        per_trial,
        moment_mean,
        tail_rows: rows,
        exp_slope,
        exp_r2,
        poly_r2,
    })
}

/// 8 geometric points from the sample median to just under the sample max.
fn default_tail_grid(per_trial: &[f64]) -> Vec<f64> {
    let mut sorted = per_trial.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let lo = sorted[n / 2];
    let hi_idx = ((0.999 * n as f64).ceil() as usize).clamp(1, n) - 1;
    let hi = sorted[hi_idx];
    if !(lo > 0.0) || !(hi > lo) {
        return (1..=8).map(|i| (lo.max(1e-12)) * i as f64).collect();
    }
    (0..8)
        .map(|i| lo * (hi / lo).powf(i as f64 / 7.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosRow {
    pub p: f64,
    /// `L^p(Omega)` norm of the per-trial space-time norm.
    pub lp_omega: f64,
    /// `lp_omega / sqrt(p)`.
    pub ratio: f64,
}

/// Growth of `|| . ||_{L^p(Omega; L^4([0,1] x M))} / sqrt(p)` across the
/// `p`-grid; roughly constant for exponentially integrable multipliers.
pub fn chaos_lp_growth<T: Scalar>(
    f: &StatePair<T>,
    family: &RandomFamily,
    s: f64,
    p_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ChaosRow>> {
    if !family.certified.has_exp_moment {
        return Err(Error::UncertifiedFamily {
            requirement: "exponential moment",
        });
    }
    let mut probe_family = family.clone();
    probe_family.certified.has_4th_moment = true;
    let report = averaging_experiment(f, &probe_family, s, 1.0, trials, seed, false, None)?;
    Ok(p_grid
        .iter()
        .map(|&p| {
            let lp = (report
                .per_trial
                .iter()
                .map(|v| v.powf(p))
                .sum::<f64>()
                / trials as f64)
                .powf(1.0 / p);
            ChaosRow {
                p,
                lp_omega: lp,
                ratio: lp / p.sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzRow {
    pub n_requested: usize,
    pub n_modes: usize,
    pub lambda_max: f64,
    /// Max over random unit-`H^s` data of the flow norm.
    pub max_ratio_random: f64,
    /// Max over single high modes of norm / `(1 + lambda^2)^{s/2}`.
    pub max_ratio_single: f64,
}

/// Ratios `||e^{it sqrt(-Delta)} f||_{L^p L^q} / ||f||_{H^s}` across doubling
/// cutoffs; boundedness in `N` is the probe, not any specific constant.
pub fn strichartz_probe(
    geometry: &crate::geometry::Geometry,
    s: f64,
    pair: &AdmissiblePair,
    n_grid: &[usize],
    trials: u64,
    t_final: f64,
    seed: u64,
) -> Result<Vec<StrichartzRow>> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n_req) in n_grid.iter().enumerate() {
        let basis = Basis::new(geometry.clone(), n_req)?;
        let grid = GridSampling::for_basis(&basis);
        let plan = TransformPlan::<f64>::new(basis.clone(), grid)?;
        let steps = default_time_steps(t_final, basis.max_eigenvalue());
        let n = basis.len();

        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial_id| {
                let real = sample_realization::<f64>(
                    &RandomFamily::gaussian(),
                    seed,
                    (gi as u64) << 32 | trial_id,
                    n,
                );
                let mut f = SpectralField::new(basis.clone(), real.h.clone()).unwrap();
                let h_s = crate::norms::sobolev_norm(&f, s);
                if h_s == 0.0 {
                    return 0.0;
                }
                for c in &mut f.coeffs {
                    *c /= h_s;
                }
                crate::propagator::half_wave_spacetime_norm(
                    &f, t_final, steps, pair.p, pair.q, &plan,
                )
            })
            .collect();
        let max_ratio_random = ratios.into_iter().fold(0.0f64, f64::max);

        let mut max_ratio_single = 0.0f64;
        for rank in [n.div_ceil(2), n] {
            let f = SpectralField::<f64>::unit_mode(basis.clone(), rank);
            let norm = crate::propagator::half_wave_spacetime_norm(
                &f, t_final, steps, pair.p, pair.q, &plan,
            );
            let lam_sq = basis.modes[rank - 1].eigenvalue_sq;
            max_ratio_single =
                max_ratio_single.max(norm / (1.0 + lam_sq).powf(0.5 * s));
        }

        rows.push(StrichartzRow {
            n_requested: n_req,
            n_modes: n,
            lambda_max: basis.max_eigenvalue(),
            max_ratio_random,
            max_ratio_single,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::propagator::half_wave_spacetime_norm;

    fn certified(kind: &str) -> RandomFamily {
        let mut fam = match kind {
            "gaussian" => RandomFamily::gaussian(),
            "bernoulli" => RandomFamily::bernoulli(),
            _ => unreachable!(),
        };
        fam.moment_check(4, None);
        fam.moment_check(6, None);
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 / 10.0).collect();
        fam.exp_moment_check(&grid, 0.5);
        fam
    }

    #[test]
    fn uncertified_family_is_rejected() {
        let basis = Basis::new(Geometry::torus(1), 3).unwrap();
        let f = StatePair::<f64>::zero(basis);
        let fam = RandomFamily::gaussian();
        assert!(matches!(
            averaging_experiment(&f, &fam, 0.25, 1.0, 4, 0, false, None),
            Err(Error::UncertifiedFamily { .. })
        ));
    }

    #[test]
    fn single_mode_trials_factor_through_the_multiplier() {
        // f = (e_n, 0): the per-trial norm is |h_n| times a fixed factor, so
        // Bernoulli trials are all identical.
        let basis = Basis::new(Geometry::torus(1), 3).unwrap();
        let mut f = StatePair::<f64>::zero(basis.clone());
        f.u.coeffs[1] = 1.0;
        let fam = certified("bernoulli");
        let rep = averaging_experiment(&f, &fam, 0.25, 1.0, 16, 9, false, None).unwrap();
        let first = rep.per_trial[0];
        assert!(first > 0.0);
        for v in &rep.per_trial {
            assert!((v - first).abs() < 1e-12 * first);
        }

        // Gaussian trials are |h| times the same deterministic factor.
        let gam = certified("gaussian");
        let rep_g = averaging_experiment(&f, &gam, 0.25, 1.0, 64, 9, false, None).unwrap();
        let real: crate::random::Realization<f64> =
            sample_realization(&gam, 9, 17, basis.len());
        let expect = real.h[1].abs() * first;
        assert!((rep_g.per_trial[17] - expect).abs() < 1e-10 * first.max(expect));
    }

    #[test]
    fn scaling_homogeneity_with_shared_seeds() {
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        let mut f = StatePair::<f64>::zero(basis);
        for (i, c) in f.u.coeffs.iter_mut().enumerate() {
            *c = 1.0 / (1.0 + i as f64);
        }
        f.ut = f.u.scaled(0.3);
        let fam = certified("gaussian");
        let a = averaging_experiment(&f, &fam, 0.3, 0.5, 8, 4, false, None).unwrap();
        let fs = f.scaled(2.0);
        let b = averaging_experiment(&fs, &fam, 0.3, 0.5, 8, 4, false, None).unwrap();
        for (x, y) in a.per_trial.iter().zip(&b.per_trial) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn empirical_markov_dominance() {
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        let mut f = StatePair::<f64>::zero(basis);
        for (i, c) in f.u.coeffs.iter_mut().enumerate() {
            *c = (1.0 + i as f64).powf(-0.7);
        }
        let fam = certified("gaussian");
        let rep = averaging_experiment(&f, &fam, 0.25, 1.0, 400, 21, false, None).unwrap();
        for row in &rep.tail_rows {
            let se = (row.p_hat * (1.0 - row.p_hat) / 400.0).sqrt();
            assert!(
                row.p_hat <= row.chebyshev_bound + 3.0 * se + 1e-12,
                "lambda {}: {} > {}",
                row.lambda,
                row.p_hat,
                row.chebyshev_bound
            );
        }
    }

    #[test]
    fn chaos_table_single_mode_bernoulli_decays_like_inverse_sqrt_p() {
        let basis = Basis::new(Geometry::torus(1), 3).unwrap();
        let mut f = StatePair::<f64>::zero(basis);
        f.u.coeffs[1] = 1.0;
        let fam = certified("bernoulli");
        let rows = chaos_lp_growth(&f, &fam, 0.25, &[2.0, 4.0, 8.0, 16.0], 32, 3).unwrap();
        // Constant modulus: lp_omega is flat, ratio decays like 1/sqrt(p).
        let base = rows[0].lp_omega;
        for r in &rows {
            assert!((r.lp_omega - base).abs() < 1e-10 * base);
            assert!((r.ratio - base / r.p.sqrt()).abs() < 1e-10 * base);
        }
    }

    #[test]
    fn chaos_needs_exponential_moments() {
        let basis = Basis::new(Geometry::torus(1), 3).unwrap();
        let f = StatePair::<f64>::zero(basis);
        let mut fam = RandomFamily::gaussian();
        fam.moment_check(4, None);
        assert!(matches!(
            chaos_lp_growth(&f, &fam, 0.25, &[4.0], 4, 0),
            Err(Error::UncertifiedFamily { .. })
        ));
    }

    #[test]
    fn half_wave_single_mode_ratio_closed_form() {
        // |e^{it lambda} e_n| has constant modulus, so the L^p L^q norm is
        // T^(1/p) ||e_n||_{L^q}.
        let basis = Basis::new(Geometry::torus(1), 5).unwrap();
        let grid = GridSampling::for_basis(&basis);
        let plan = TransformPlan::<f64>::new(basis.clone(), grid.clone()).unwrap();
        let f = SpectralField::<f64>::unit_mode(basis.clone(), 4);
        let t_final = 0.7;
        let got = half_wave_spacetime_norm(&f, t_final, 64, 4.0, 4.0, &plan);
        let values = plan.synthesize(&f.coeffs);
        let expect = t_final.powf(0.25) * lp_norm(&values, 4.0, &grid);
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn energy_pair_ratio_is_one() {
        // s = 0, (p, q) = (infinity, 2): unitarity of the half-wave flow.
        let geom = Geometry::torus(1);
        let pair = AdmissiblePair::new(f64::INFINITY, 2.0, 0.0, false).unwrap();
        let rows = strichartz_probe(&geom, 0.0, &pair, &[9, 17], 6, 1.0, 5).unwrap();
        for row in rows {
            assert!((row.max_ratio_random - 1.0).abs() < 1e-9, "{row:?}");
            assert!((row.max_ratio_single - 1.0).abs() < 1e-9);
        }
    }
}
