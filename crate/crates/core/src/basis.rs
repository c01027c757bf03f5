//! Ordered eigenmode lists shared by spectral fields and transform plans.

use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{enumerate_modes, enumerate_modes_capped, Geometry, Mode};

/// An eigenvalue-sorted mode list over one geometry. The retained span is a
/// full union of eigenspaces (the constructor rounds the requested rank up to
/// the next eigenspace boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub geometry: Geometry,
    pub modes: Vec<Mode>,
}

impl Basis {
    pub fn new(geometry: Geometry, n: usize) -> Result<Arc<Self>> {
        let modes = enumerate_modes(&geometry, n)?;
        Ok(Arc::new(Self { geometry, modes }))
    }

    pub fn with_cap(geometry: Geometry, n: usize, cap: usize) -> Result<Arc<Self>> {
        let modes = enumerate_modes_capped(&geometry, n, cap)?;
        Ok(Arc::new(Self { geometry, modes }))
    }

    /// Basis containing every mode with `lambda <= lambda_cap`.
    pub fn covering(geometry: Geometry, lambda_cap: f64, cap: usize) -> Result<Arc<Self>> {
        let modes = crate::geometry::enumerate_modes_up_to(&geometry, lambda_cap, cap)?;
        Ok(Arc::new(Self { geometry, modes }))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.geometry.dimension()
    }

    /// Largest per-axis index over the retained modes.
    pub fn max_axis_index(&self, axis: usize) -> u32 {
        self.modes
            .iter()
            .map(|m| m.multi_index[axis])
            .max()
            .unwrap_or(0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.modes
            .last()
            .map(|m| m.eigenvalue_sq.sqrt())
            .unwrap_or(0.0)
    }

    /// Same geometry and retained span.
    pub fn compatible(&self, other: &Basis) -> bool {
        self.geometry == other.geometry && self.len() == other.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;

    #[test]
    fn cutoff_never_splits_an_eigenspace() {
        let basis = Basis::new(Geometry::torus(3), 2).unwrap();
        // lambda^2 = 1 shell must be complete: 1 constant + 6 shell modes.
        assert_eq!(basis.len(), 7);
        let last = basis.modes.last().unwrap().eigenvalue_sq;
        assert_eq!(last, 1.0);
    }

    #[test]
    fn max_axis_index_tracks_modes() {
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        assert_eq!(basis.max_axis_index(0), 4);
    }
}
