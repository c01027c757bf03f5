//! Sobolev and Lebesgue norms, Bessel multipliers, and eigenfunction growth
//! probes.

use crate::basis::Basis;
use crate::error::Result;
use crate::field::SpectralField;
use crate::grid::GridSampling;
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

/// `( sum_n (1 + lambda_n^2)^s alpha_n^2 )^(1/2)`.
pub fn sobolev_norm<T: Scalar>(field: &SpectralField<T>, s: f64) -> T {
    let mut total = T::zero();
    for (mode, &a) in field.basis.modes.iter().zip(&field.coeffs) {
        let w = T::of((1.0 + mode.eigenvalue_sq).powf(s));
        total += w * a * a;
    }
    total.sqrt()
}

/// Uniform-grid quadrature of `(integral |u|^p)^(1/p)`, `p >= 1`.
pub fn lp_norm<T: Scalar>(values: &[T], p: f64, grid: &GridSampling) -> T {
    debug_assert!(p >= 1.0, "lp_norm requires p >= 1");
    let w = T::of(grid.weight());
    let p_t = T::of(p);
    let mut total = T::zero();
    if p == 2.0 {
        for &v in values {
            total += v * v;
        }
    } else {
        for &v in values {
            total += v.abs().powf(p_t);
        }
    }
    (w * total).powf(T::one() / p_t)
}

/// Multiplies coefficients by `(1 + lambda_n^2)^(sigma/2)`; `sigma = 0` is the
/// identity and opposite powers invert each other.
pub fn bessel_power<T: Scalar>(field: &SpectralField<T>, sigma: f64) -> SpectralField<T> {
    let coeffs = field
        .basis
        .modes
        .iter()
        .zip(&field.coeffs)
        .map(|(mode, &a)| a * T::of((1.0 + mode.eigenvalue_sq).powf(0.5 * sigma)))
        .collect();
    SpectralField {
        basis: field.basis.clone(),
        coeffs,
    }
}

/// `||e_n||_{L^p} / (1 + lambda_n^2)^exponent` for the mode of rank `n`.
pub fn sogge_ratio(basis: &std::sync::Arc<Basis>, rank: usize, p: f64, exponent: f64) -> Result<f64> {
    let sweep = sogge_sweep(basis, p, exponent)?;
    Ok(sweep[rank - 1])
}

/// The ratio for every retained mode, reusing one transform plan.
pub fn sogge_sweep(basis: &std::sync::Arc<Basis>, p: f64, exponent: f64) -> Result<Vec<f64>> {
    let grid = GridSampling::for_basis(basis);
    let plan = TransformPlan::<f64>::new(basis.clone(), grid.clone())?;
    let mut out = Vec::with_capacity(basis.len());
    let mut coeffs = vec![0.0; basis.len()];
    for n in 0..basis.len() {
        coeffs[n] = 1.0;
        let values = plan.synthesize(&coeffs);
        coeffs[n] = 0.0;
        let norm = lp_norm(&values, p, &grid);
        out.push(norm / (1.0 + basis.modes[n].eigenvalue_sq).powf(exponent));
    }
    Ok(out)
}
