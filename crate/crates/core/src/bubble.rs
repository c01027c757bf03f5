//! Concentrating-bubble data, the explicit ODE-profile solution built on it,
//! and the scale-weighted semiclassical energy used to compare the two.
//!
//! A bubble at scale `n` carries the data `(kappa_n n^a phi(n(x - x0)), 0)`
//! with `kappa_n = [log n]^(-delta1)` and the blow-up horizon
//! `t_n = [log n]^(delta2) n^(-a)`. The amplitude exponent defaults to
//! `a = dim/2 - s`, which keeps `||f_n||_{L^2} = kappa_n n^(-s) ||phi||` and
//! `||f_n||_{H^s} ~ kappa_n` in every dimension (and equals the `3/2 - s`
//! rate of the three-dimensional construction).

use std::sync::Arc;

use serde::Serialize;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::geometry::GeometryKind;
use crate::grid::GridSampling;
use crate::ode::OdeProfile;
use crate::propagator::StatePair;
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

/// Angular frequency (in bump units) a basis must resolve per unit scale; at
/// this cutoff the raised-cosine tail carries ~0.3% of the L^2 mass per axis.
pub const DEFAULT_RESOLUTION_FACTOR: f64 = 14.0;

/// Tensor raised-cosine taper supported on `|y_j| <= 1`.
pub fn raised_cosine(y: &[f64]) -> f64 {
    let mut out = 1.0;
    for &yj in y {
        if yj.abs() >= 1.0 {
            return 0.0;
        }
        let c = (0.5 * std::f64::consts::PI * yj).cos();
        out *= c * c;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bubble {
    /// Concentration scale.
    pub n: u32,
    pub s: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub center: Vec<f64>,
    /// Amplitude exponent `a` in `A_n = kappa_n n^a`.
    pub scale_exponent: f64,
}

impl Bubble {
    /// Bubble centered in the domain with the dimension-matched exponent.
    pub fn new(
        geometry: &crate::geometry::Geometry,
        n: u32,
        s: f64,
        delta1: f64,
        delta2: f64,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "bubble scale needs log n > 1".into(),
            });
        }
        let d = geometry.dimension() as f64;
        let center = geometry.side_lengths.iter().map(|&l| 0.5 * l).collect();
        let bubble = Self {
            n,
            s,
            delta1,
            delta2,
            center,
            scale_exponent: 0.5 * d - s,
        };
        // Support half-width 1/n from the center must fit in the domain.
        for (&c, &l) in bubble.center.iter().zip(&geometry.side_lengths) {
            let hw = 1.0 / f64::from(n);
            if c - hw < 0.0 || c + hw > l {
                return Err(Error::InvalidParameter {
                    name: "center",
                    reason: "bubble support leaves the domain".into(),
                });
            }
        }
        Ok(bubble)
    }

    pub fn kappa(&self) -> f64 {
        f64::from(self.n).ln().powf(-self.delta1)
    }

    pub fn t_n(&self) -> f64 {
        f64::from(self.n).ln().powf(self.delta2) * f64::from(self.n).powf(-self.scale_exponent)
    }

    pub fn amplitude(&self) -> f64 {
        self.kappa() * f64::from(self.n).powf(self.scale_exponent)
    }

    /// Rescaled bump argument `n (x - x0)`, nearest-image on tori.
    fn bump_argument(&self, x: &[f64], geometry: &crate::geometry::Geometry) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&geometry.side_lengths)
            .map(|((&xi, &ci), &l)| {
                let mut dx = xi - ci;
                if geometry.kind == GeometryKind::Torus {
                    dx -= l * (dx / l).round();
                }
                f64::from(self.n) * dx
            })
            .collect()
    }

    /// Pointwise samples of the data profile `A_n phi(n(x - x0))`.
    pub fn data_samples<T: Scalar>(&self, grid: &GridSampling) -> Vec<T> {
        let a = self.amplitude();
        (0..grid.total_points())
            .map(|idx| {
                let x = grid.point(idx);
                let y = self.bump_argument(&x, &grid.geometry);
                T::of(a * raised_cosine(&y))
            })
            .collect()
    }

    /// Smallest basis eigenvalue needed to resolve the bubble.
    pub fn required_lambda(&self, factor: f64) -> f64 {
        factor * f64::from(self.n)
    }
}

/// Spectral analysis of the bubble data with zero velocity. Refuses scales
/// the basis cannot resolve, naming the frequency it would need.
pub fn make_bubble_state<T: Scalar>(
    bubble: &Bubble,
    basis: &Arc<Basis>,
    resolution_factor: f64,
) -> Result<StatePair<T>> {
    let need = bubble.required_lambda(resolution_factor);
    let have = basis.max_eigenvalue();
    if have + 1e-9 < need {
        // Weyl-order estimate of the rank a covering basis would need.
        let d = basis.dimension() as f64;
        let required_rank = (need.powf(d) * basis.geometry.volume()
            / (2.0 * std::f64::consts::PI).powf(d)
            * 4.0)
            .ceil() as usize;
        return Err(Error::UnresolvedScale {
            n: bubble.n,
            required_frequency: need.ceil() as u32,
            available_frequency: have.floor() as u32,
            required_rank,
        });
    }
    let grid = GridSampling::for_basis(basis);
    let plan = TransformPlan::<T>::new(basis.clone(), grid.clone())?;
    let values = bubble.data_samples::<T>(&grid);
    let u = SpectralField::new(basis.clone(), plan.analyze(&values))?;
    Ok(StatePair {
        ut: SpectralField::zero(basis.clone()),
        u,
    })
}

/// Pointwise explicit solution of the scaled ODE:
/// `v_n(t, x) = A phi(n(x-x0)) V(t A phi(n(x-x0)))`.
pub fn explicit_vn<T: Scalar>(
    bubble: &Bubble,
    profile: &OdeProfile,
    t: f64,
    grid: &GridSampling,
) -> Vec<T> {
    let a = bubble.amplitude();
    (0..grid.total_points())
        .map(|idx| {
            let x = grid.point(idx);
            let y = bubble.bump_argument(&x, &grid.geometry);
            let amp = a * raised_cosine(&y);
            T::of(amp * profile.eval(t * amp))
        })
        .collect()
}

/// Time derivative of the explicit solution,
/// `(A phi)^2 V'(t A phi)` pointwise.
pub fn explicit_vn_dt<T: Scalar>(
    bubble: &Bubble,
    profile: &OdeProfile,
    t: f64,
    grid: &GridSampling,
) -> Vec<T> {
    let a = bubble.amplitude();
    (0..grid.total_points())
        .map(|idx| {
            let x = grid.point(idx);
            let y = bubble.bump_argument(&x, &grid.geometry);
            let amp = a * raised_cosine(&y);
            T::of(amp * amp * profile.eval_dot(t * amp))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiclassicalEnergy {
    /// `n^{-(1-s)}` times the energy bracket.
    pub value: f64,
    /// `(||ut||^2 + ||grad u||^2)^(1/2)`.
    pub bracket1: f64,
    /// `(||ut||_{H^1}^2 + ||grad u||_{H^1}^2)^(1/2)`.
    pub bracket2: f64,
}

/// Scale-weighted energy
/// `n^{-(1-s)} bracket1 + n^{-(2-s)} bracket2`, both brackets computed
/// spectrally through eigenvalue weights.
pub fn semiclassical_energy<T: Scalar>(u: &StatePair<T>, n: u32, s: f64) -> SemiclassicalEnergy {
    let mut b1_sq = 0.0f64;
    let mut b2_sq = 0.0f64;
    for ((mode, &uc), &utc) in u
        .basis()
        .modes
        .iter()
        .zip(&u.u.coeffs)
        .zip(&u.ut.coeffs)
    {
        let lam_sq = mode.eigenvalue_sq;
        let uc = uc.to_f64x();
        let utc = utc.to_f64x();
        b1_sq += utc * utc + lam_sq * uc * uc;
        b2_sq += (1.0 + lam_sq) * (utc * utc + lam_sq * uc * uc);
    }
    let b1 = b1_sq.sqrt();
    let b2 = b2_sq.sqrt();
    let nf = f64::from(n);
    SemiclassicalEnergy {
        value: nf.powf(-(1.0 - s)) * b1 + nf.powf(-(2.0 - s)) * b2,
        bracket1: b1,
        bracket2: b2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::norms::sobolev_norm;
    use crate::ode::dense_profile;

    fn torus_basis_for(n: u32, factor: f64) -> Arc<Basis> {
        Basis::covering(Geometry::torus(1), factor * f64::from(n), 1 << 20).unwrap()
    }

    #[test]
    fn l2_scaling_of_bubble_data() {
        // ||f_n||_{L^2} = kappa_n n^{-s} ||phi||_{L^2}; d = 1 has
        // ||phi||_{L^2}^2 = 3/4.
        let geom = Geometry::torus(1);
        let s = 0.3;
        let phi_l2 = (3.0f64 / 4.0).sqrt();
        for n in [8u32, 16, 32] {
            let bubble = Bubble::new(&geom, n, s, 0.01, 0.2).unwrap();
            let basis = torus_basis_for(n, DEFAULT_RESOLUTION_FACTOR);
            let state = make_bubble_state::<f64>(&bubble, &basis, DEFAULT_RESOLUTION_FACTOR)
                .unwrap();
            let got = sobolev_norm(&state.u, 0.0);
            let expect = bubble.kappa() * f64::from(n).powf(-s) * phi_l2;
            assert!(
                ((got - expect) / expect).abs() < 0.01,
                "n = {n}: {got} vs {expect}"
            );
            // Velocity component is identically zero.
            assert!(state.ut.coeffs.iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn hs_scaling_is_kappa_times_constant() {
        let geom = Geometry::torus(1);
        let s = 0.3;
        let mut ratios = Vec::new();
        for n in [16u32, 32, 64] {
            let bubble = Bubble::new(&geom, n, s, 0.01, 0.2).unwrap();
            let basis = torus_basis_for(n, DEFAULT_RESOLUTION_FACTOR);
            let state =
                make_bubble_state::<f64>(&bubble, &basis, DEFAULT_RESOLUTION_FACTOR).unwrap();
            ratios.push(sobolev_norm(&state.u, s) / bubble.kappa());
        }
        for w in ratios.windows(2) {
            assert!(
                (w[1] / w[0] - 1.0).abs() < 0.10,
                "consecutive ratio {} vs {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn unresolved_scale_is_refused_with_requirements() {
        let geom = Geometry::torus(1);
        let bubble = Bubble::new(&geom, 64, 0.3, 0.01, 0.2).unwrap();
        let basis = Basis::new(geom, 65).unwrap();
        match make_bubble_state::<f64>(&bubble, &basis, DEFAULT_RESOLUTION_FACTOR) {
            Err(Error::UnresolvedScale {
                required_frequency, ..
            }) => assert!(required_frequency >= 64 * 14),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn explicit_vn_at_time_zero_is_the_bubble_data() {
        let geom = Geometry::torus(1);
        let bubble = Bubble::new(&geom, 8, 0.3, 0.01, 0.2).unwrap();
        let basis = torus_basis_for(8, DEFAULT_RESOLUTION_FACTOR);
        let grid = GridSampling::for_basis(&basis);
        let profile = dense_profile(4096);
        let vn0: Vec<f64> = explicit_vn(&bubble, &profile, 0.0, &grid);
        let data: Vec<f64> = bubble.data_samples(&grid);
        assert_eq!(vn0, data);
    }

    #[test]
    fn explicit_vn_satisfies_the_pointwise_ode() {
        // d^2/dt^2 v_n + v_n^3 = 0 at probe points, to finite-difference and
        // interpolation tolerance.
        let geom = Geometry::torus(1);
        let bubble = Bubble::new(&geom, 8, 0.3, 0.01, 0.2).unwrap();
        let basis = torus_basis_for(8, DEFAULT_RESOLUTION_FACTOR);
        let grid = GridSampling::for_basis(&basis);
        let profile = dense_profile(8192);
        let t = 0.4 * bubble.t_n();
        let h = 1e-4;
        let v0: Vec<f64> = explicit_vn(&bubble, &profile, t - h, &grid);
        let v1: Vec<f64> = explicit_vn(&bubble, &profile, t, &grid);
        let v2: Vec<f64> = explicit_vn(&bubble, &profile, t + h, &grid);
        let amp = bubble.amplitude();
        for i in (0..grid.total_points()).step_by(17) {
            let second = (v2[i] - 2.0 * v1[i] + v0[i]) / (h * h);
            let res = second + v1[i].powi(3);
            assert!(
                res.abs() < 1e-3 * amp.powi(3).max(1.0),
                "point {i}: residual {res}"
            );
        }
    }

    #[test]
    fn pde_residual_of_explicit_vn_is_minus_laplacian() {
        // v_n satisfies the pointwise ODE, so its PDE residual is exactly
        // -Delta v_n. Check the spectral Laplacian of the sampled field
        // against the 1d chain-rule formula
        //   v'' = g''(V + t g V') + t g'^2 (2 V' + t g V'')
        // with g = A phi(n(x - c)) and V'' = -V^3.
        let geom = Geometry::torus(1);
        let bubble = Bubble::new(&geom, 8, 0.3, 0.01, 0.2).unwrap();
        let basis = torus_basis_for(8, DEFAULT_RESOLUTION_FACTOR);
        let grid = GridSampling::for_basis(&basis);
        let plan = TransformPlan::<f64>::new(basis.clone(), grid.clone()).unwrap();
        let profile = dense_profile(8192);
        let t = 0.3 * bubble.t_n();
        let v1: Vec<f64> = explicit_vn(&bubble, &profile, t, &grid);
        let coeffs = plan.analyze(&v1);
        let lap: Vec<f64> = basis
            .modes
            .iter()
            .zip(&coeffs)
            .map(|(m, &c)| -m.eigenvalue_sq * c)
            .collect();
        let lap_vals = plan.synthesize(&lap);

        let a = bubble.amplitude();
        let nf = f64::from(bubble.n);
        let c0 = bubble.center[0];
        let half_pi = 0.5 * std::f64::consts::PI;
        let scale = a * nf * nf * half_pi * half_pi * 2.0;
        for i in (0..grid.total_points()).step_by(13) {
            let x = grid.point(i)[0];
            let mut y = x - c0;
            let l = geom.side_lengths[0];
            y -= l * (y / l).round();
            y *= nf;
            let expect = if y.abs() >= 1.0 {
                0.0
            } else {
                let cy = (half_pi * y).cos();
                let sy = (half_pi * y).sin();
                let g = a * cy * cy;
                let gp = -a * nf * half_pi * 2.0 * cy * sy;
                let gpp = -a * nf * nf * half_pi * half_pi * 2.0 * (cy * cy - sy * sy);
                let v = profile.eval(t * g);
                let vp = profile.eval_dot(t * g);
                let vpp = -v * v * v;
                gpp * (v + t * g * vp) + t * gp * gp * (2.0 * vp + t * g * vpp)
            };
            // The taper is C^1, so the truncated Laplacian rings at a few
            // percent of its scale near the support boundary.
            assert!(
                (lap_vals[i] - expect).abs() < 0.1 * scale,
                "point {i}: spectral {} vs chain rule {expect}",
                lap_vals[i]
            );
        }
    }

    #[test]
    fn semiclassical_energy_one_mode_and_homogeneity() {
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        let mut u = StatePair::<f64>::zero(basis.clone());
        let idx = 5;
        u.u.coeffs[idx] = 1.0;
        let lam_sq = basis.modes[idx].eigenvalue_sq;
        let n = 4;
        let s = 0.3;
        let e = semiclassical_energy(&u, n, s);
        let expect = (n as f64).powf(-(1.0 - s)) * lam_sq.sqrt()
            + (n as f64).powf(-(2.0 - s)) * (lam_sq * (1.0 + lam_sq)).sqrt();
        assert!((e.value - expect).abs() < 1e-12);

        // Absolute homogeneity and the zero state.
        let scaled = semiclassicale_scaled(&u, 3.5, n, s);
        assert!((scaled - 3.5 * e.value).abs() < 1e-12);
        let z = StatePair::<f64>::zero(basis);
        assert_eq!(semiclassical_energy(&z, n, s).value, 0.0);
    }

    fn semiclassicale_scaled(u: &StatePair<f64>, c: f64, n: u32, s: f64) -> f64 {
        let v = StatePair {
            u: u.u.scaled(c),
            ut: u.ut.scaled(c),
        };
        semiclassical_energy(&v, n, s).value
    }

    #[test]
    fn semiclassical_energy_triangle_inequality_spot_check() {
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        let mut a = StatePair::<f64>::zero(basis.clone());
        let mut b = StatePair::<f64>::zero(basis);
        for i in 0..a.u.len() {
            a.u.coeffs[i] = (i as f64 * 0.9).sin();
            a.ut.coeffs[i] = (i as f64 * 1.3).cos();
            b.u.coeffs[i] = (i as f64 * 0.4).cos();
            b.ut.coeffs[i] = (i as f64 * 2.1).sin();
        }
        let sum = StatePair {
            u: a.u.add(&b.u).unwrap(),
            ut: a.ut.add(&b.ut).unwrap(),
        };
        let (n, s) = (8, 0.3);
        let ea = semiclassical_energy(&a, n, s).value;
        let eb = semiclassical_energy(&b, n, s).value;
        let es = semiclassical_energy(&sum, n, s).value;
        assert!(es <= ea + eb + 1e-12);
    }
}
