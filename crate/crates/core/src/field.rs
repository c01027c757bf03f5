//! Spectral fields: real functions stored as coefficients over a [`Basis`].

use std::sync::Arc;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::grid::GridSampling;
use crate::scalar::Scalar;
use crate::transform::TransformPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T: Scalar> {
    pub basis: Arc<Basis>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn new(basis: Arc<Basis>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zero(basis: Arc<Basis>) -> Self {
        let n = basis.len();
        Self {
            basis,
            coeffs: vec![T::zero(); n],
        }
    }

    /// Field with a single unit coefficient in slot `rank - 1`.
    pub fn unit_mode(basis: Arc<Basis>, rank: usize) -> Self {
        let mut f = Self::zero(basis);
        f.coeffs[rank - 1] = T::one();
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.basis.compatible(&other.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self.add(&other.scaled(-T::one()))?)
    }
}

/// Evaluates the field on a grid. Convenience wrapper; hot paths should hold
/// a [`TransformPlan`] and reuse it.
pub fn synthesize<T: Scalar>(field: &SpectralField<T>, grid: &GridSampling) -> Result<Vec<T>> {
    let plan = TransformPlan::new(field.basis.clone(), grid.clone())?;
    Ok(plan.synthesize(&field.coeffs))
}

/// Projects grid values onto the first `n` ranks (cutoff rounded up to a full
/// eigenspace by the basis constructor).
pub fn analyze<T: Scalar>(
    values: &[T],
    basis: Arc<Basis>,
    grid: &GridSampling,
) -> Result<SpectralField<T>> {
    let plan = TransformPlan::new(basis.clone(), grid.clone())?;
    SpectralField::new(basis, plan.analyze(values))
}
