//! Random coefficient families, the randomization map `f -> f^omega`, moment
//! certification, and the finite-truncation no-regularization experiment.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::scalar::Scalar;
use crate::streams::trial_rng;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Supported mean-zero laws for the per-index variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FamilyKind {
    /// Standard real Gaussian.
    Gaussian,
    /// Fair signs, +1 or -1.
    Bernoulli,
    /// Uniform on [-sqrt(3), sqrt(3)] (unit variance).
    UniformPm,
    /// Finite support table; must have mean zero.
    CustomTable { points: Vec<f64>, probs: Vec<f64> },
}

/// Which moment conditions have been certified on a family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertifiedFlags {
    pub has_4th_moment: bool,
    pub has_6th_moment: bool,
    pub has_exp_moment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFamily {
    pub kind: FamilyKind,
    #[serde(default)]
    pub certified: CertifiedFlags,
}

/// One sampled pair of coefficient multipliers, reproducible from
/// `(seed, trial_id, family, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T: Scalar> {
    pub seed: u64,
    pub trial_id: u64,
    pub h: Vec<T>,
    pub l: Vec<T>,
}

impl RandomFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        if let FamilyKind::CustomTable { points, probs } = &kind {
            if points.is_empty() || points.len() != probs.len() {
                return Err(Error::InvalidFamily {
                    reason: "table needs matching, nonempty points and probs".into(),
                });
            }
            let total: f64 = probs.iter().sum();
            if probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidFamily {
                    reason: format!("probabilities must be nonnegative and sum to 1 (sum {total})"),
                });
            }
            let mean: f64 = points.iter().zip(probs).map(|(x, p)| x * p).sum();
            let scale: f64 = points.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if mean.abs() > 1e-12 * scale {
                return Err(Error::InvalidFamily {
                    reason: format!("table mean {mean} is not zero"),
                });
            }
        }
        Ok(Self {
            kind,
            certified: CertifiedFlags::default(),
        })
    }

    pub fn gaussian() -> Self {
        Self::new(FamilyKind::Gaussian).unwrap()
    }

    pub fn bernoulli() -> Self {
        Self::new(FamilyKind::Bernoulli).unwrap()
    }

    pub fn uniform_pm() -> Self {
        Self::new(FamilyKind::UniformPm).unwrap()
    }

    pub(crate) fn draw(&self, rng: &mut impl Rng) -> f64 {
        match &self.kind {
            FamilyKind::Gaussian => rng.sample(StandardNormal),
            FamilyKind::Bernoulli => {
                if rng.random::<f64>() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            FamilyKind::UniformPm => (2.0 * rng.random::<f64>() - 1.0) * SQRT_3,
            FamilyKind::CustomTable { points, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, p) in points.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                *points.last().unwrap()
            }
        }
    }

    /// Exact `E X^k` for even `k`; odd moments vanish by symmetry for the
    /// built-ins and are the signed table sum for custom tables.
    pub fn moment(&self, k: u32) -> f64 {
        match &self.kind {
            FamilyKind::Gaussian => {
                if k % 2 == 1 {
                    0.0
                } else {
                    // (k-1)!! for even k.
                    (1..=k as u64).filter(|j| j % 2 == 1).product::<u64>() as f64
                }
            }
            FamilyKind::Bernoulli => {
                if k % 2 == 1 {
                    0.0
                } else {
                    1.0
                }
            }
            FamilyKind::UniformPm => {
                if k % 2 == 1 {
                    0.0
                } else {
                    SQRT_3.powi(k as i32) / (k as f64 + 1.0)
                }
            }
            FamilyKind::CustomTable { points, probs } => points
                .iter()
                .zip(probs)
                .map(|(x, p)| x.powi(k as i32) * p)
                .sum(),
        }
    }

    /// Moment generating function `E e^{gamma X}` in closed form.
    pub fn mgf(&self, gamma: f64) -> f64 {
        match &self.kind {
            FamilyKind::Gaussian => (0.5 * gamma * gamma).exp(),
            FamilyKind::Bernoulli => gamma.cosh(),
            FamilyKind::UniformPm => {
                let a = SQRT_3 * gamma;
                if a.abs() < 1e-6 {
                    1.0 + a * a / 6.0 + a.powi(4) / 120.0
                } else {
                    a.sinh() / a
                }
            }
            FamilyKind::CustomTable { points, probs } => points
                .iter()
                .zip(probs)
                .map(|(x, p)| (gamma * x).exp() * p)
                .sum(),
        }
    }

    /// Checks `E X^k <= bound` (any finite value passes when `bound` is
    /// `None`) and records 4th/6th-moment certification on success.
    pub fn moment_check(&mut self, k: u32, bound: Option<f64>) -> MomentReport {
        let value = self.moment(k);
        let pass = value.is_finite() && bound.map_or(true, |b| value <= b);
        if pass {
            if k == 4 {
                self.certified.has_4th_moment = true;
            }
            if k == 6 {
                self.certified.has_6th_moment = true;
                self.certified.has_4th_moment = true;
            }
        }
        MomentReport {
            order: k,
            value,
            bound,
            pass,
        }
    }

    /// Checks `E e^{gamma X} <= e^{c gamma^2}` over the grid and reports the
    /// worst ratio; certifies the exponential-moment flag on success.
    pub fn exp_moment_check(&mut self, gamma_grid: &[f64], c: f64) -> ExpMomentReport {
        let mut worst_ratio = f64::MIN;
        let mut worst_gamma = 0.0;
        for &g in gamma_grid {
            let ratio = self.mgf(g) / (c * g * g).exp();
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_gamma = g;
            }
        }
        let pass = worst_ratio <= 1.0 + 1e-12;
        if pass {
            self.certified.has_exp_moment = true;
        }
        ExpMomentReport {
            c,
            worst_ratio,
            worst_gamma,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: u32,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMomentReport {
    pub c: f64,
    pub worst_ratio: f64,
    pub worst_gamma: f64,
    pub pass: bool,
}

/// Draws the `2n` multipliers `(h, l)` for one trial: `n` draws for `h`
/// followed by `n` draws for `l` from the trial stream.
pub fn sample_realization<T: Scalar>(
    family: &RandomFamily,
    seed: u64,
    trial_id: u64,
    n: usize,
) -> Realization<T> {
    let mut rng = trial_rng(seed, trial_id);
    let h = (0..n).map(|_| T::of(family.draw(&mut rng))).collect();
    let l = (0..n).map(|_| T::of(family.draw(&mut rng))).collect();
    Realization {
        seed,
        trial_id,
        h,
        l,
    }
}

/// The randomization map: coefficientwise `(h_n alpha_n, l_n beta_n)`.
pub fn randomize<T: Scalar>(
    f1: &SpectralField<T>,
    f2: &SpectralField<T>,
    realization: &Realization<T>,
) -> Result<(SpectralField<T>, SpectralField<T>)> {
    if realization.h.len() != f1.len() || realization.l.len() != f2.len() {
        return Err(Error::LengthMismatch {
            expected: f1.len(),
            got: realization.h.len(),
        });
    }
    let g1 = SpectralField {
        basis: f1.basis.clone(),
        coeffs: f1
            .coeffs
            .iter()
            .zip(&realization.h)
            .map(|(&a, &h)| h * a)
            .collect(),
    };
    let g2 = SpectralField {
        basis: f2.basis.clone(),
        coeffs: f2
            .coeffs
            .iter()
            .zip(&realization.l)
            .map(|(&b, &l)| l * b)
            .collect(),
    };
    Ok((g1, g2))
}

/// Coefficient profile `(1 + lambda_n^2)^(-theta/2)` with
/// `theta = s + epsilon/2 + d/2`: by Weyl counting (`lambda_n ~ n^(1/d)`) the
/// `H^s` sum converges while the truncated `H^(s+epsilon)` sums grow like
/// `M^(epsilon/d)`.
pub fn divergent_profile<T: Scalar>(basis: std::sync::Arc<Basis>, s: f64, epsilon: f64) -> SpectralField<T> {
    let d = basis.dimension() as f64;
    let theta = s + 0.5 * epsilon + 0.5 * d;
    profile(basis, theta)
}

/// Convergent control profile, safely inside `H^(s+epsilon)`.
pub fn convergent_profile<T: Scalar>(
    basis: std::sync::Arc<Basis>,
    s: f64,
    epsilon: f64,
) -> SpectralField<T> {
    let d = basis.dimension() as f64;
    let theta = s + epsilon + 0.5 * d + 0.5;
    profile(basis, theta)
}

fn profile<T: Scalar>(basis: std::sync::Arc<Basis>, theta: f64) -> SpectralField<T> {
    let coeffs = basis
        .modes
        .iter()
        .map(|m| T::of((1.0 + m.eigenvalue_sq).powf(-0.5 * theta)))
        .collect();
    SpectralField { basis, coeffs }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub trial_id: u64,
    pub truncation: usize,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthTable {
    pub truncations: Vec<usize>,
    pub rows: Vec<GrowthRow>,
    /// Minimum over trials of the partial sum, one entry per truncation.
    pub min_over_trials: Vec<f64>,
}

/// Finite-truncation signature of the absence of Sobolev regularization:
/// partial sums `sum_{n<=M} (1+lambda_n^2)^(s+eps) (h_n alpha_n)^2` per trial
/// and truncation. Divergence shows up as unbounded monotone growth across a
/// doubling truncation schedule; a convergent control plateaus.
pub fn no_regularization_experiment<T: Scalar>(
    f: &SpectralField<T>,
    s: f64,
    epsilon: f64,
    family: &RandomFamily,
    truncations: &[usize],
    trials: u64,
    seed: u64,
) -> Result<GrowthTable> {
    let n = f.len();
    if truncations.is_empty() || truncations.iter().any(|&m| m == 0 || m > n) {
        return Err(Error::InvalidParameter {
            name: "truncations",
            reason: format!("must be nonempty with entries in 1..={n}"),
        });
    }
    let weights: Vec<f64> = f
        .basis
        .modes
        .iter()
        .zip(&f.coeffs)
        .map(|(m, &a)| {
            let a = a.to_f64x();
            (1.0 + m.eigenvalue_sq).powf(s + epsilon) * a * a
        })
        .collect();

    let mut rows = Vec::with_capacity(truncations.len() * trials as usize);
    let mut min_over_trials = vec![f64::INFINITY; truncations.len()];
    for trial_id in 0..trials {
        let real: Realization<f64> = sample_realization(family, seed, trial_id, n);
        let mut acc = 0.0;
        let mut next = 0usize;
        let mut sorted: Vec<usize> = truncations.to_vec();
        sorted.sort_unstable();
        for (i, w) in weights.iter().enumerate() {
            let h = real.h[i];
            acc += w * h * h;
            while next < sorted.len() && i + 1 == sorted[next] {
                rows.push(GrowthRow {
                    trial_id,
                    truncation: sorted[next],
                    partial_sum: acc,
                });
                let pos = truncations.iter().position(|&m| m == sorted[next]).unwrap();
                min_over_trials[pos] = min_over_trials[pos].min(acc);
                next += 1;
            }
            if next == sorted.len() {
                break;
            }
        }
    }
    Ok(GrowthTable {
        truncations: truncations.to_vec(),
        rows,
        min_over_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::norms::sobolev_norm;

    #[test]
    fn bernoulli_draws_are_signs_and_deterministic() {
        let fam = RandomFamily::bernoulli();
        let a: Realization<f64> = sample_realization(&fam, 11, 2, 64);
        let b: Realization<f64> = sample_realization(&fam, 11, 2, 64);
        assert_eq!(a, b);
        assert!(a.h.iter().chain(&a.l).all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn gaussian_sample_moments() {
        let fam = RandomFamily::gaussian();
        let n = 100_000;
        let r: Realization<f64> = sample_realization(&fam, 5, 0, n / 2);
        let all: Vec<f64> = r.h.iter().chain(&r.l).copied().collect();
        let mean = all.iter().sum::<f64>() / n as f64;
        let m4 = all.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((m4 - 3.0).abs() < 0.15, "fourth moment {m4}");
    }

    #[test]
    fn bernoulli_randomization_preserves_sobolev_norms_exactly() {
        let basis = Basis::new(Geometry::torus(2), 40).unwrap();
        let mut f1 = SpectralField::<f64>::zero(basis.clone());
        for (i, c) in f1.coeffs.iter_mut().enumerate() {
            *c = 1.0 / (1.0 + i as f64);
        }
        let f2 = f1.scaled(0.5);
        let fam = RandomFamily::bernoulli();
        let real = sample_realization(&fam, 9, 4, f1.len());
        let (g1, g2) = randomize(&f1, &f2, &real).unwrap();
        for s in [-0.75, 0.0, 0.25, 1.0] {
            assert_eq!(sobolev_norm(&g1, s), sobolev_norm(&f1, s));
            assert_eq!(sobolev_norm(&g2, s), sobolev_norm(&f2, s));
        }
    }

    #[test]
    fn zero_field_randomizes_to_zero() {
        let basis = Basis::new(Geometry::torus(1), 5).unwrap();
        let f = SpectralField::<f64>::zero(basis);
        let fam = RandomFamily::gaussian();
        let real = sample_realization(&fam, 1, 0, f.len());
        let (g1, g2) = randomize(&f, &f, &real).unwrap();
        assert!(g1.coeffs.iter().all(|&c| c == 0.0));
        assert!(g2.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn gaussian_mean_square_identity_monte_carlo() {
        let basis = Basis::new(Geometry::torus(1), 17).unwrap();
        let mut f = SpectralField::<f64>::zero(basis);
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            *c = (1.0 + i as f64).powf(-0.8);
        }
        let fam = RandomFamily::gaussian();
        let trials = 10_000u64;
        let s = 0.25;
        let target = sobolev_norm(&f, s).powi(2);
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for t in 0..trials {
            let real = sample_realization(&fam, 123, t, f.len());
            let (g, _) = randomize(&f, &f, &real).unwrap();
            let v = sobolev_norm(&g, s).powi(2);
            mean += v;
            m2 += v * v;
        }
        mean /= trials as f64;
        m2 /= trials as f64;
        let se = ((m2 - mean * mean) / trials as f64).sqrt();
        assert!(
            (mean - target).abs() < 3.0 * se,
            "mean {mean} vs target {target} (se {se})"
        );
    }

    #[test]
    fn moment_values_for_builtins() {
        let g = RandomFamily::gaussian();
        assert_eq!(g.moment(4), 3.0);
        assert_eq!(g.moment(6), 15.0);
        let b = RandomFamily::bernoulli();
        assert_eq!(b.moment(4), 1.0);
        let u = RandomFamily::uniform_pm();
        assert!((u.moment(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_moment_checks() {
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 / 10.0).collect();
        let mut g = RandomFamily::gaussian();
        let rep = g.exp_moment_check(&grid, 0.5);
        assert!(rep.pass);
        assert!((rep.worst_ratio - 1.0).abs() < 1e-12);
        let mut b = RandomFamily::bernoulli();
        let rep = b.exp_moment_check(&grid, 0.5);
        assert!(rep.pass);
        assert!(rep.worst_ratio <= 1.0);
        // gamma = 0 always evaluates to 1 (total mass).
        assert!((b.mgf(0.0) - 1.0).abs() < 1e-15);
        assert!(b.certified.has_exp_moment);
    }

    #[test]
    fn custom_table_must_be_centered() {
        let bad = RandomFamily::new(FamilyKind::CustomTable {
            points: vec![1.0, 2.0],
            probs: vec![0.5, 0.5],
        });
        assert!(matches!(bad, Err(Error::InvalidFamily { .. })));
        let ok = RandomFamily::new(FamilyKind::CustomTable {
            points: vec![-1.5, 0.0, 1.5],
            probs: vec![0.25, 0.5, 0.25],
        });
        assert!(ok.is_ok());
    }

    #[test]
    fn randomize_length_mismatch_is_an_error() {
        let basis = Basis::new(Geometry::torus(1), 5).unwrap();
        let f = SpectralField::<f64>::zero(basis);
        let fam = RandomFamily::gaussian();
        let real = sample_realization(&fam, 1, 0, f.len() + 3);
        assert!(matches!(
            randomize(&f, &f, &real),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn bernoulli_partial_sums_equal_deterministic_sums() {
        let basis = Basis::new(Geometry::torus(1), 65).unwrap();
        let f = divergent_profile::<f64>(basis, 0.25, 0.5);
        let fam = RandomFamily::bernoulli();
        let truncs = [8, 16, 32, 64];
        let table =
            no_regularization_experiment(&f, 0.25, 0.5, &fam, &truncs, 4, 77).unwrap();
        // h_n^2 = 1, so each trial reproduces the deterministic sums exactly.
        let det: Vec<f64> = truncs
            .iter()
            .map(|&m| {
                f.basis.modes[..m]
                    .iter()
                    .zip(&f.coeffs)
                    .map(|(mode, &a)| (1.0 + mode.eigenvalue_sq).powf(0.75) * a * a)
                    .sum()
            })
            .collect();
        for row in &table.rows {
            let pos = truncs.iter().position(|&m| m == row.truncation).unwrap();
            assert_eq!(row.partial_sum, det[pos]);
        }
    }

    #[test]
    fn partial_sums_are_monotone_in_truncation() {
        let basis = Basis::new(Geometry::torus(1), 129).unwrap();
        let f = divergent_profile::<f64>(basis, 0.3, 0.4);
        let fam = RandomFamily::gaussian();
        let truncs = [16, 32, 64, 128];
        let table =
            no_regularization_experiment(&f, 0.3, 0.4, &fam, &truncs, 32, 5).unwrap();
        for t in 0..32u64 {
            let sums: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.trial_id == t)
                .map(|r| r.partial_sum)
                .collect();
            assert_eq!(sums.len(), truncs.len());
            for w in sums.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn convergent_control_plateaus() {
        let basis = Basis::new(Geometry::torus(1), 1025).unwrap();
        let f = convergent_profile::<f64>(basis, 0.25, 0.5);
        let fam = RandomFamily::bernoulli();
        let truncs = [64, 256, 512, 1024];
        let table =
            no_regularization_experiment(&f, 0.25, 0.5, &fam, &truncs, 1, 3).unwrap();
        let last = table.min_over_trials[3];
        let penult = table.min_over_trials[2];
        assert!(last / penult <= 1.05, "ratio {}", last / penult);
    }
}
