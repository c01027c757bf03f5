//! Monte Carlo and brute-force probes of the sub-Gaussian concentration of
//! `sum_n c_n l_n` for independent mean-zero multipliers: tail bounds, `L^p`
//! moment growth, and the even-moment combinatorial bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{FamilyKind, RandomFamily};
use crate::scalar::Scalar;
use crate::stats::{wilson_interval, WilsonInterval};
use crate::streams::trial_rng;

/// Outcome cap for exact enumeration over finite-support families.
pub const ENUMERATION_CAP: u64 = 1 << 20;

/// An `l^2` coefficient vector with its cached squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T: Scalar> {
    pub c: Vec<T>,
    pub norm_sq: T,
}

impl<T: Scalar> CoefficientVector<T> {
    pub fn new(c: Vec<T>) -> Self {
        let norm_sq = c.iter().map(|&x| x * x).sum();
        Self { c, norm_sq }
    }

    pub fn norm(&self) -> T {
        self.norm_sq.sqrt()
    }
}

/// Draws `sum c_n l_n` for one trial.
fn weighted_sum<T: Scalar>(c: &[T], family: &RandomFamily, seed: u64, trial_id: u64) -> T {
    let mut rng = trial_rng(seed, trial_id);
    let mut acc = T::zero();
    for &cn in c {
        acc += cn * T::of(family.draw(&mut rng));
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub lambda: f64,
    pub exceedances: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of trials with `|sum c_n l_n| > lambda`, with a Wilson interval.
pub fn tail_probability_mc<T: Scalar>(
    c: &CoefficientVector<T>,
    family: &RandomFamily,
    lambda: T,
    trials: u64,
    seed: u64,
    z: f64,
) -> Result<TailEstimate> {
    if trials == 0 || !(lambda > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "tail_probability_mc",
            reason: "requires trials >= 1 and lambda > 0".into(),
        });
    }
    let exceedances: u64 = (0..trials)
        .into_par_iter()
        .map(|t| u64::from(weighted_sum(&c.c, family, seed, t).abs() > lambda))
        .sum();
    let w: WilsonInterval = wilson_interval(exceedances, trials, z);
    Ok(TailEstimate {
        lambda: lambda.to_f64x(),
        exceedances,
        trials,
        p_hat: w.p_hat,
        ci_low: w.low,
        ci_high: w.high,
    })
}

/// Default grid: 8 geometric points between `0.5 ||c||` and `4 ||c||`.
pub fn default_lambda_grid<T: Scalar>(c: &CoefficientVector<T>) -> Vec<T> {
    let norm = c.norm().to_f64x();
    let lo = 0.5 * norm;
    let hi = 4.0 * norm;
    (0..8)
        .map(|i| T::of(lo * (hi / lo).powf(i as f64 / 7.0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaFit {
    /// Largest rate with `p_hat(lambda) <= 2 exp(-alpha lambda^2 / ||c||^2)`
    /// across the grid.
    pub alpha: f64,
    /// Grid point where the bound binds.
    pub binding_lambda: f64,
    /// True when every grid estimate was zero, so `alpha` is only the
    /// grid-resolved lower bound.
    pub is_lower_bound: bool,
    pub tails: Vec<TailEstimate>,
}

/// Fits the sub-Gaussian rate from Monte Carlo tails on `lambda_grid`.
pub fn khinchin_alpha_fit<T: Scalar>(
    c: &CoefficientVector<T>,
    family: &RandomFamily,
    lambda_grid: &[T],
    trials: u64,
    seed: u64,
) -> Result<AlphaFit> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "lambda_grid",
            reason: "must be nonempty".into(),
        });
    }
    let norm_sq = c.norm_sq.to_f64x();
    let mut tails = Vec::with_capacity(lambda_grid.len());
    for &lam in lambda_grid {
        tails.push(tail_probability_mc(c, family, lam, trials, seed, 1.96)?);
    }
    let mut alpha = f64::INFINITY;
    let mut binding = f64::NAN;
    for t in &tails {
        if t.p_hat > 0.0 {
            let a = -(t.p_hat / 2.0).ln() * norm_sq / (t.lambda * t.lambda);
            if a < alpha {
                alpha = a;
                binding = t.lambda;
            }
        }
    }
    if alpha.is_infinite() {
        // All estimates were zero: any alpha up to the resolution limit
        // p ~ 1/trials is consistent with the data.
        let mut bound = f64::INFINITY;
        for t in &tails {
            let a = -(0.5 / trials as f64).ln() * norm_sq / (t.lambda * t.lambda);
            if a < bound {
                bound = a;
                binding = t.lambda;
            }
        }
        return Ok(AlphaFit {
            alpha: bound,
            binding_lambda: binding,
            is_lower_bound: true,
            tails,
        });
    }
    Ok(AlphaFit {
        alpha,
        binding_lambda: binding,
        is_lower_bound: false,
        tails,
    })
}

/// Finite support of a family, when it has one.
fn support(family: &RandomFamily) -> Option<(Vec<f64>, Vec<f64>)> {
    match &family.kind {
        FamilyKind::Bernoulli => Some((vec![-1.0, 1.0], vec![0.5, 0.5])),
        FamilyKind::CustomTable { points, probs } => Some((points.clone(), probs.clone())),
        _ => None,
    }
}

/// Folds `f` over all outcomes of `(l_1, .., l_k)` for a finite-support
/// family, weighting by the outcome probability.
fn enumerate_outcomes<T: Scalar>(
    c: &[T],
    family: &RandomFamily,
    mut f: impl FnMut(T, f64),
) -> Result<()> {
    let (points, probs) = support(family).ok_or_else(|| Error::EnumerationUnsupported {
        reason: "family has unbounded support".into(),
    })?;
    let k = points.len() as u64;
    let total = k.checked_pow(c.len() as u32).filter(|&t| t <= ENUMERATION_CAP);
    let Some(total) = total else {
        return Err(Error::EnumerationUnsupported {
            reason: format!(
                "{}^{} outcomes exceed the cap {}",
                k,
                c.len(),
                ENUMERATION_CAP
            ),
        });
    };
    let mut digits = vec![0usize; c.len()];
    for _ in 0..total {
        let mut sum = T::zero();
        let mut prob = 1.0;
        for (i, &d) in digits.iter().enumerate() {
            sum += c[i] * T::of(points[d]);
            prob *= probs[d];
        }
        f(sum, prob);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < points.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

/// Exact tail probability by full outcome enumeration.
pub fn tail_probability_exact<T: Scalar>(
    c: &CoefficientVector<T>,
    family: &RandomFamily,
    lambda: T,
) -> Result<f64> {
    let mut p = 0.0;
    enumerate_outcomes(&c.c, family, |sum, prob| {
        if sum.abs() > lambda {
            p += prob;
        }
    })?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EstimateMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpMomentReport {
    pub p: f64,
    pub lp_norm: f64,
    /// `lp_norm / (sqrt(p) ||c||)`, the constant in the moment bound.
    pub ratio_to_sqrt_p: f64,
    pub exact: bool,
}

/// `|| sum c_n l_n ||_{L^p(Omega)}` by exact enumeration or Monte Carlo,
/// and its ratio to `sqrt(p) ||c||`.
pub fn lp_moment_check<T: Scalar>(
    c: &CoefficientVector<T>,
    family: &RandomFamily,
    p: f64,
    mode: EstimateMode,
) -> Result<LpMomentReport> {
    if p < 2.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("needs p >= 2, got {p}"),
        });
    }
    let lp = match mode {
        EstimateMode::Exact => {
            let mut acc = 0.0;
            enumerate_outcomes(&c.c, family, |sum, prob| {
                acc += prob * sum.to_f64x().abs().powf(p);
            })?;
            acc.powf(1.0 / p)
        }
        EstimateMode::MonteCarlo { trials, seed } => {
            let values: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| weighted_sum(&c.c, family, seed, t).to_f64x())
                .collect();
            let acc: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
            (acc / trials as f64).powf(1.0 / p)
        }
    };
    let ratio = lp / (p.sqrt() * c.norm().to_f64x());
    Ok(LpMomentReport {
        p,
        lp_norm: lp,
        ratio_to_sqrt_p: ratio,
        exact: matches!(mode, EstimateMode::Exact),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment2kReport {
    pub k: u32,
    pub moment: f64,
    /// `E|sum c_n h_n|^{2k} / (sum c_n^2)^k`.
    pub ratio: f64,
    pub exact: bool,
}

/// Even-moment check `E|sum c_n h_n|^{2k}` against `(sum c_n^2)^k`. Gaussian
/// moments are analytic; finite-support families enumerate; otherwise Monte
/// Carlo.
pub fn moment_2k_bound_check<T: Scalar>(
    family: &RandomFamily,
    c: &CoefficientVector<T>,
    k: u32,
    mode: EstimateMode,
) -> Result<Moment2kReport> {
    let p = 2.0 * f64::from(k);
    let norm_sq = c.norm_sq.to_f64x();
    let (moment, exact) = match (&family.kind, mode) {
        (FamilyKind::Gaussian, EstimateMode::Exact) => {
            // The weighted sum is N(0, ||c||^2): moment (2k-1)!! ||c||^{2k}.
            let df: f64 = (1..=2 * u64::from(k)).filter(|j| j % 2 == 1).product::<u64>() as f64;
            (df * norm_sq.powi(k as i32), true)
        }
        (_, EstimateMode::Exact) => {
            let mut acc = 0.0;
            enumerate_outcomes(&c.c, family, |sum, prob| {
                acc += prob * sum.to_f64x().abs().powf(p);
            })?;
            (acc, true)
        }
        (_, EstimateMode::MonteCarlo { trials, seed }) => {
            let values: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| weighted_sum(&c.c, family, seed, t).to_f64x())
                .collect();
            (
                values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / trials as f64,
                false,
            )
        }
    };
    Ok(Moment2kReport {
        k,
        moment,
        ratio: moment / norm_sq.powi(k as i32),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CoefficientVector<f64> {
        CoefficientVector::new(v.to_vec())
    }

    #[test]
    fn cached_norm_matches_recomputation() {
        let c = cv(&[0.3, -1.2, 0.07, 2.4]);
        let direct: f64 = c.c.iter().map(|x| x * x).sum();
        assert!((c.norm_sq - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn single_bernoulli_term_always_exceeds_half() {
        let c = cv(&[1.0]);
        let fam = RandomFamily::bernoulli();
        let t = tail_probability_mc(&c, &fam, 0.5, 400, 3, 1.96).unwrap();
        assert_eq!(t.p_hat, 1.0);
    }

    #[test]
    fn single_gaussian_term_matches_normal_tail() {
        let c = cv(&[1.0]);
        let fam = RandomFamily::gaussian();
        let t = tail_probability_mc(&c, &fam, 1.959964, 100_000, 11, 1.96).unwrap();
        assert!(
            t.ci_low <= 0.05 && 0.05 <= t.ci_high,
            "CI [{}, {}] misses 0.05",
            t.ci_low,
            t.ci_high
        );
    }

    #[test]
    fn two_term_bernoulli_half_probability() {
        // Sums are sqrt(2), 0, 0, -sqrt(2): exceeding 1 has probability 1/2.
        let c = cv(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        let fam = RandomFamily::bernoulli();
        let exact = tail_probability_exact(&c, &fam, 1.0).unwrap();
        assert!((exact - 0.5).abs() < 1e-15);
        let t = tail_probability_mc(&c, &fam, 1.0, 40_000, 17, 1.96).unwrap();
        assert!(t.ci_low <= exact && exact <= t.ci_high);
    }

    #[test]
    fn bernoulli_l4_exact_value() {
        let c = cv(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        let fam = RandomFamily::bernoulli();
        let rep = lp_moment_check(&c, &fam, 4.0, EstimateMode::Exact).unwrap();
        assert!((rep.lp_norm - 2.0f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_l2_and_l4_analytic() {
        let c = cv(&[1.0]);
        let fam = RandomFamily::gaussian();
        let l2 = moment_2k_bound_check(&fam, &c, 1, EstimateMode::Exact).unwrap();
        assert!((l2.ratio - 1.0).abs() < 1e-14);
        let l4 = moment_2k_bound_check(&fam, &c, 2, EstimateMode::Exact).unwrap();
        assert!((l4.ratio - 3.0).abs() < 1e-14);
        // L^4 norm itself is 3^(1/4).
        assert!((l4.moment.powf(0.25) - 3.0f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_equal_weights_fourth_moment_expansion() {
        // E (sum c h)^4 = 3 (sum c^2)^2 - 2 sum c^4 for signs.
        let n = 8;
        let c = cv(&vec![1.0 / (n as f64).sqrt(); n]);
        let fam = RandomFamily::bernoulli();
        let rep = moment_2k_bound_check(&fam, &c, 2, EstimateMode::Exact).unwrap();
        let c4: f64 = c.c.iter().map(|x| x.powi(4)).sum();
        let expect = 3.0 - 2.0 * c4 / c.norm_sq.powi(2);
        assert!((rep.ratio - expect).abs() < 1e-12, "{} vs {expect}", rep.ratio);
        // k = 1 with unit variance is exactly 1.
        let rep1 = moment_2k_bound_check(&fam, &c, 1, EstimateMode::Exact).unwrap();
        assert!((rep1.ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_fourth_moment_is_three_by_normality() {
        // The sum of Gaussians is Gaussian, so the ratio is exactly 3 for any
        // weights; Monte Carlo agrees within 5%.
        let n = 8;
        let c = cv(&vec![1.0 / (n as f64).sqrt(); n]);
        let fam = RandomFamily::gaussian();
        let exact = moment_2k_bound_check(&fam, &c, 2, EstimateMode::Exact).unwrap();
        assert!((exact.ratio - 3.0).abs() < 1e-12);
        let mc = moment_2k_bound_check(
            &fam,
            &c,
            2,
            EstimateMode::MonteCarlo {
                trials: 100_000,
                seed: 23,
            },
        )
        .unwrap();
        assert!((mc.ratio - 3.0).abs() < 0.15, "{}", mc.ratio);
    }

    #[test]
    fn alpha_fit_gaussian_exceeds_mc_floor() {
        let c = cv(&[0.6, -0.8, 0.2, 0.1]);
        let fam = RandomFamily::gaussian();
        let grid = default_lambda_grid(&c);
        let fit = khinchin_alpha_fit(&c, &fam, &grid, 50_000, 7).unwrap();
        assert!(!fit.is_lower_bound);
        assert!(fit.alpha >= 0.45, "alpha {}", fit.alpha);
    }

    #[test]
    fn alpha_fit_bounded_support_flags_lower_bound() {
        // Single Bernoulli term: tails vanish beyond lambda = 1, so a grid
        // past 1 yields only a lower bound.
        let c = cv(&[1.0]);
        let fam = RandomFamily::bernoulli();
        let fit = khinchin_alpha_fit(&c, &fam, &[1.5, 2.0], 2_000, 5).unwrap();
        assert!(fit.is_lower_bound);
        assert!(fit.alpha > 0.0);
    }

    #[test]
    fn scaling_invariance_with_power_of_two_factor() {
        // Doubling c and lambda rescales every product and sum exactly, so
        // the exceedance pattern is identical realization by realization.
        let c1 = cv(&[0.3, -0.45, 0.9]);
        let c2 = cv(&[0.6, -0.9, 1.8]);
        let fam = RandomFamily::uniform_pm();
        let a = tail_probability_mc(&c1, &fam, 0.7, 5_000, 99, 1.96).unwrap();
        let b = tail_probability_mc(&c2, &fam, 1.4, 5_000, 99, 1.96).unwrap();
        assert_eq!(a.exceedances, b.exceedances);
    }

    #[test]
    fn symmetric_family_gives_symmetric_empirical_law() {
        let c = cv(&[0.5, 0.5, 0.5, 0.5]);
        let fam = RandomFamily::gaussian();
        let trials = 50_000u64;
        let lam = 1.0;
        let (mut above, mut below) = (0u64, 0u64);
        for t in 0..trials {
            let s = weighted_sum(&c.c, &fam, 31, t);
            if s > lam {
                above += 1;
            }
            if s < -lam {
                below += 1;
            }
        }
        let pa = above as f64 / trials as f64;
        let pb = below as f64 / trials as f64;
        let se = (pa * (1.0 - pa) / trials as f64).sqrt();
        assert!((pa - pb).abs() <= 3.0 * se.max(1e-4), "pa {pa} pb {pb}");
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let c = cv(&vec![0.1; 25]);
        let fam = RandomFamily::bernoulli();
        assert!(matches!(
            tail_probability_exact(&c, &fam, 0.05),
            Err(Error::EnumerationUnsupported { .. })
        ));
        let g = RandomFamily::gaussian();
        assert!(matches!(
            lp_moment_check(&cv(&[1.0]), &g, 4.0, EstimateMode::Exact),
            Err(Error::EnumerationUnsupported { .. })
        ));
    }
}
