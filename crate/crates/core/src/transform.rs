//! Coefficient <-> physical-space transforms.
//!
//! All supported eigenbases are tensor products of 1D `cos`/`sin` factors, so
//! a plan stores one factor table per axis and evaluates modes by nested
//! partial products. Synthesis parallelizes over leading-axis slabs and
//! analysis over modes; both have a fixed summation order, so results do not
//! depend on the thread count.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::Basis;
use crate::error::Result;
use crate::geometry::{axis_factor, Parity};
use crate::grid::GridSampling;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct TransformPlan<T: Scalar> {
    basis: Arc<Basis>,
    grid: GridSampling,
    /// Per axis, row-major `[row * points + i]` factor values.
    tables: Vec<Vec<T>>,
    /// Per axis, number of grid points (table row length).
    points: Vec<usize>,
    /// Per mode and axis, the row index into `tables[axis]`.
    mode_rows: Vec<usize>,
}

impl<T: Scalar> TransformPlan<T> {
    /// Builds a plan; fails if `grid` would alias the retained span.
    pub fn new(basis: Arc<Basis>, grid: GridSampling) -> Result<Self> {
        grid.check_resolves(&basis)?;
        let d = basis.dimension();
        let mut tables = Vec::with_capacity(d);
        let mut row_maps: Vec<BTreeMap<(u32, Parity), usize>> = vec![BTreeMap::new(); d];

        for axis in 0..d {
            let m = grid.points_per_axis[axis];
            let mut table: Vec<T> = Vec::new();
            for mode in &basis.modes {
                let key = (mode.multi_index[axis], mode.parities[axis]);
                if !row_maps[axis].contains_key(&key) {
                    let row = table.len() / m;
                    row_maps[axis].insert(key, row);
                    for i in 0..m {
                        let x = grid.axis_coordinate(axis, i);
                        table.push(T::of(axis_factor(
                            &basis.geometry,
                            axis,
                            key.0,
                            key.1,
                            x,
                        )));
                    }
                }
            }
            tables.push(table);
        }

        let mut mode_rows = Vec::with_capacity(basis.len() * d);
        for mode in &basis.modes {
            for axis in 0..d {
                let key = (mode.multi_index[axis], mode.parities[axis]);
                mode_rows.push(row_maps[axis][&key]);
            }
        }

        Ok(Self {
            points: grid.points_per_axis.clone(),
            basis,
            grid,
            tables,
            mode_rows,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn grid(&self) -> &GridSampling {
        &self.grid
    }

    fn row<'a>(&'a self, mode: usize, axis: usize) -> &'a [T] {
        let d = self.points.len();
        let m = self.points[axis];
        let r = self.mode_rows[mode * d + axis];
        &self.tables[axis][r * m..(r + 1) * m]
    }

    /// Evaluates `sum_n coeffs[n] e_n` on the grid (row-major flattening).
    pub fn synthesize(&self, coeffs: &[T]) -> Vec<T> {
        assert_eq!(coeffs.len(), self.basis.len(), "coefficient length");
        let d = self.points.len();
        let m0 = self.points[0];
        let inner: usize = self.points[1..].iter().product();
        let mut out = vec![T::zero(); m0 * inner];

        let threads = rayon::current_num_threads().max(1);
        let blocks = (m0 + (4 * threads).min(m0) - 1) / (4 * threads).min(m0);

        out.par_chunks_mut(blocks * inner)
            .enumerate()
            .for_each(|(c, chunk)| {
                let i0_base = c * blocks;
                let i0_len = chunk.len() / inner;
                for n in 0..coeffs.len() {
                    let a = coeffs[n];
                    if a == T::zero() {
                        continue;
                    }
                    let t0 = self.row(n, 0);
                    match d {
                        1 => {
                            for (o, i0) in (i0_base..i0_base + i0_len).enumerate() {
                                chunk[o] += a * t0[i0];
                            }
                        }
                        2 => {
                            let t1 = self.row(n, 1);
                            for (o, i0) in (i0_base..i0_base + i0_len).enumerate() {
                                let p0 = a * t0[i0];
                                let slab = &mut chunk[o * inner..(o + 1) * inner];
                                for (v, &f1) in slab.iter_mut().zip(t1) {
                                    *v += p0 * f1;
                                }
                            }
                        }
                        3 => {
                            let t1 = self.row(n, 1);
                            let t2 = self.row(n, 2);
                            let m2 = self.points[2];
                            for (o, i0) in (i0_base..i0_base + i0_len).enumerate() {
                                let p0 = a * t0[i0];
                                for (i1, &f1) in t1.iter().enumerate() {
                                    let p01 = p0 * f1;
                                    let base = o * inner + i1 * m2;
                                    let slab = &mut chunk[base..base + m2];
                                    for (v, &f2) in slab.iter_mut().zip(t2) {
                                        *v += p01 * f2;
                                    }
                                }
                            }
                        }
                        _ => unreachable!("dimension is 1..=3"),
                    }
                }
            });
        out
    }

    /// Quadrature inner products against every retained mode.
    pub fn analyze(&self, values: &[T]) -> Vec<T> {
        assert_eq!(values.len(), self.grid.total_points(), "grid value length");
        let d = self.points.len();
        let w = T::of(self.grid.weight());
        (0..self.basis.len())
            .into_par_iter()
            .map(|n| {
                let t0 = self.row(n, 0);
                let total = match d {
                    1 => {
                        let mut s = T::zero();
                        for (i0, &f0) in t0.iter().enumerate() {
                            s += f0 * values[i0];
                        }
                        s
                    }
                    2 => {
                        let t1 = self.row(n, 1);
                        let m1 = self.points[1];
                        let mut s = T::zero();
                        for (i0, &f0) in t0.iter().enumerate() {
                            let mut s1 = T::zero();
                            let slab = &values[i0 * m1..(i0 + 1) * m1];
                            for (&v, &f1) in slab.iter().zip(t1) {
                                s1 += v * f1;
                            }
                            s += f0 * s1;
                        }
                        s
                    }
                    3 => {
                        let t1 = self.row(n, 1);
                        let t2 = self.row(n, 2);
                        let m1 = self.points[1];
                        let m2 = self.points[2];
                        let mut s = T::zero();
                        for (i0, &f0) in t0.iter().enumerate() {
                            let mut s1 = T::zero();
                            for (i1, &f1) in t1.iter().enumerate() {
                                let base = (i0 * m1 + i1) * m2;
                                let slab = &values[base..base + m2];
                                let mut s2 = T::zero();
                                for (&v, &f2) in slab.iter().zip(t2) {
                                    s2 += v * f2;
                                }
                                s1 += f1 * s2;
                            }
                            s += f0 * s1;
                        }
                        s
                    }
                    _ => unreachable!("dimension is 1..=3"),
                };
                w * total
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;

    fn plan(geom: Geometry, n: usize) -> TransformPlan<f64> {
        let basis = Basis::new(geom, n).unwrap();
        let grid = GridSampling::for_basis(&basis);
        TransformPlan::new(basis, grid).unwrap()
    }

    #[test]
    fn constant_mode_synthesizes_to_inverse_sqrt_volume() {
        let p = plan(Geometry::torus(2), 1);
        let mut coeffs = vec![0.0; p.basis().len()];
        coeffs[0] = 1.0;
        let vals = p.synthesize(&coeffs);
        let expect = 1.0 / p.basis().geometry.volume().sqrt();
        for v in vals {
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn orthonormality_of_analysis() {
        for geom in [
            Geometry::torus(2),
            Geometry::dirichlet_box(1),
            Geometry::neumann_box(2),
        ] {
            let p = plan(geom, 12);
            for n in 0..p.basis().len() {
                let mut coeffs = vec![0.0; p.basis().len()];
                coeffs[n] = 1.0;
                let back = p.analyze(&p.synthesize(&coeffs));
                for (m, &b) in back.iter().enumerate() {
                    let expect = if m == n { 1.0 } else { 0.0 };
                    assert!(
                        (b - expect).abs() < 1e-10,
                        "slot {m} of mode {n}: {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn product_of_modes_matches_trig_identity() {
        // cos(x) * cos(2x) = (cos(3x) + cos(x)) / 2 on the 2*pi torus; with
        // normalized modes the analyzed coefficients pick up sqrt(2/L).
        let basis = Basis::new(Geometry::torus(1), 9).unwrap();
        let grid = GridSampling::for_basis(&basis);
        let p = TransformPlan::<f64>::new(basis.clone(), grid).unwrap();
        let idx = |k: u32, par: Parity| {
            basis
                .modes
                .iter()
                .position(|m| m.multi_index[0] == k && m.parities[0] == par)
                .unwrap()
        };
        let mut a = vec![0.0; basis.len()];
        a[idx(1, Parity::Cos)] = 1.0;
        let mut b = vec![0.0; basis.len()];
        b[idx(2, Parity::Cos)] = 1.0;
        let va = p.synthesize(&a);
        let vb = p.synthesize(&b);
        let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
        let coeffs = p.analyze(&prod);
        let l = std::f64::consts::TAU;
        let half_amp = 0.5 * (2.0 / l).sqrt() * (2.0 / l).sqrt() / (2.0 / l).sqrt();
        for (m, &c) in coeffs.iter().enumerate() {
            let k = basis.modes[m].multi_index[0];
            let par = basis.modes[m].parities[0];
            let expect = if par == Parity::Cos && (k == 1 || k == 3) {
                half_amp
            } else {
                0.0
            };
            assert!((c - expect).abs() < 1e-12, "mode {k} {par:?}: {c}");
        }
    }

    #[test]
    fn round_trip_3d_random_field() {
        let p = plan(Geometry::torus(3), 30);
        let n = p.basis().len();
        let coeffs: Vec<f64> = (0..n).map(|i| ((i * 2654435761) % 1000) as f64 / 500.0 - 1.0).collect();
        let back = p.analyze(&p.synthesize(&coeffs));
        let num: f64 = coeffs
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num / den < 1e-10, "relative round-trip error {}", num / den);
    }
}
