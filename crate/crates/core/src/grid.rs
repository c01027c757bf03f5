//! Uniform quadrature grids.
//!
//! Tori use the periodic trapezoid grid `x_i = i L/m`; boxes use the midpoint
//! grid `x_i = (i + 1/2) L/m`, which is the trapezoid rule on the reflected
//! periodic extension. Both integrate retained-mode products exactly at the
//! default 3x oversampling.

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, GeometryKind};

pub const DEFAULT_OVERSAMPLING: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSampling {
    pub geometry: Geometry,
    pub points_per_axis: Vec<usize>,
}

impl GridSampling {
    /// Grid resolving `basis` at the default 3x oversampling.
    pub fn for_basis(basis: &Basis) -> Self {
        Self::for_basis_oversampled(basis, DEFAULT_OVERSAMPLING)
    }

    pub fn for_basis_oversampled(basis: &Basis, oversampling: u32) -> Self {
        let points = (0..basis.dimension())
            .map(|j| {
                let k = basis.max_axis_index(j);
                ((oversampling * k + 1) as usize).max(4)
            })
            .collect();
        Self {
            geometry: basis.geometry.clone(),
            points_per_axis: points,
        }
    }

    /// Grid refined by an integer factor per axis (cubic dealiasing uses 2).
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            geometry: self.geometry.clone(),
            points_per_axis: self.points_per_axis.iter().map(|&m| m * factor).collect(),
        }
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.iter().product()
    }

    /// Uniform quadrature weight, volume / point count.
    pub fn weight(&self) -> f64 {
        self.geometry.volume() / self.total_points() as f64
    }

    pub fn axis_coordinate(&self, axis: usize, i: usize) -> f64 {
        let l = self.geometry.side_lengths[axis];
        let m = self.points_per_axis[axis] as f64;
        match self.geometry.kind {
            GeometryKind::Torus => l * i as f64 / m,
            GeometryKind::DirichletBox | GeometryKind::NeumannBox => {
                l * (i as f64 + 0.5) / m
            }
        }
    }

    /// Coordinates of the flattened (row-major, axis 0 slowest) point `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let d = self.points_per_axis.len();
        let mut rem = index;
        let mut out = vec![0.0; d];
        for axis in (0..d).rev() {
            let m = self.points_per_axis[axis];
            out[axis] = self.axis_coordinate(axis, rem % m);
            rem /= m;
        }
        out
    }

    /// Rejects grids that alias the retained span of `basis`.
    pub fn check_resolves(&self, basis: &Basis) -> Result<()> {
        for axis in 0..basis.dimension() {
            let k = basis.max_axis_index(axis);
            let m = self.points_per_axis[axis];
            let required = match self.geometry.kind {
                // Periodic trapezoid separates frequencies up to m-1 and the
                // analysis integrand has degree 2k.
                GeometryKind::Torus => 2 * k as usize + 1,
                GeometryKind::DirichletBox | GeometryKind::NeumannBox => k as usize + 1,
            };
            if m < required {
                return Err(Error::GridTooCoarse {
                    axis,
                    points: m,
                    max_frequency: k,
                    required,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;
    use crate::geometry::Geometry;

    #[test]
    fn default_grid_resolves_its_basis() {
        for geom in [
            Geometry::torus(2),
            Geometry::dirichlet_box(2),
            Geometry::neumann_box(1),
        ] {
            let basis = Basis::new(geom, 20).unwrap();
            let grid = GridSampling::for_basis(&basis);
            grid.check_resolves(&basis).unwrap();
        }
    }

    #[test]
    fn coarse_grid_refused() {
        let basis = Basis::new(Geometry::torus(1), 21).unwrap();
        let grid = GridSampling {
            geometry: basis.geometry.clone(),
            points_per_axis: vec![8],
        };
        assert!(matches!(
            grid.check_resolves(&basis),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn weight_is_volume_over_points() {
        let basis = Basis::new(Geometry::torus(2), 5).unwrap();
        let grid = GridSampling::for_basis(&basis);
        let w = grid.weight() * grid.total_points() as f64;
        assert!((w - basis.geometry.volume()).abs() < 1e-12);
    }
}
