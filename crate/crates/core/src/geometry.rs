//! Geometries with explicit Laplacian spectra.
//!
//! Supported domains are flat tori and rectangular boxes with Dirichlet or
//! Neumann conditions, in dimensions 1 to 3. Eigenfunctions are real
//! tensor-product modes: per axis `cos`/`sin` lattice waves on the torus,
//! `sin` factors for Dirichlet, `cos` factors for Neumann, all L2-normalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Torus,
    DirichletBox,
    NeumannBox,
}

/// Product domain with an explicit spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub side_lengths: Vec<f64>,
}

impl Geometry {
    pub fn new(kind: GeometryKind, side_lengths: Vec<f64>) -> Result<Self> {
        let d = side_lengths.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: format!("must be 1, 2 or 3, got {d}"),
            });
        }
        if side_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "side_lengths",
                reason: "all sides must be positive and finite".into(),
            });
        }
        Ok(Self { kind, side_lengths })
    }

    /// Torus with all sides `2*pi`.
    pub fn torus(dimension: usize) -> Self {
        Self::new(GeometryKind::Torus, vec![std::f64::consts::TAU; dimension]).unwrap()
    }

    /// Dirichlet box with all sides `pi`.
    pub fn dirichlet_box(dimension: usize) -> Self {
        Self::new(
            GeometryKind::DirichletBox,
            vec![std::f64::consts::PI; dimension],
        )
        .unwrap()
    }

    /// Neumann box with all sides `pi`.
    pub fn neumann_box(dimension: usize) -> Self {
        Self::new(
            GeometryKind::NeumannBox,
            vec![std::f64::consts::PI; dimension],
        )
        .unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.side_lengths.len()
    }

    pub fn volume(&self) -> f64 {
        self.side_lengths.iter().product()
    }

    /// Angular frequency of per-axis index `k` on axis `axis`.
    pub fn axis_frequency(&self, axis: usize, k: u32) -> f64 {
        let l = self.side_lengths[axis];
        match self.kind {
            GeometryKind::Torus => std::f64::consts::TAU * f64::from(k) / l,
            GeometryKind::DirichletBox | GeometryKind::NeumannBox => {
                std::f64::consts::PI * f64::from(k) / l
            }
        }
    }

    /// Smallest admissible per-axis index (1 for Dirichlet, else 0).
    pub fn min_axis_index(&self) -> u32 {
        match self.kind {
            GeometryKind::DirichletBox => 1,
            _ => 0,
        }
    }
}

/// Branch tag for the torus lattice waves. Boxes carry `Cos` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Cos,
    Sin,
}

/// One eigenmode: rank in the global ordering, per-axis indices and parities,
/// and the Laplace eigenvalue `lambda^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// 1-based rank in the eigenvalue-sorted ordering.
    pub rank: usize,
    pub multi_index: Vec<u32>,
    pub parities: Vec<Parity>,
    pub eigenvalue_sq: f64,
}

impl Mode {
    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue_sq.sqrt()
    }
}

pub const DEFAULT_MODE_CAP: usize = 1 << 21;

/// Relative tolerance used to group degenerate eigenvalues computed in
/// floating point (exact for the default square domains).
const EIGENSPACE_REL_TOL: f64 = 1e-12;

pub(crate) fn same_eigenspace(a: f64, b: f64) -> bool {
    (a - b).abs() <= EIGENSPACE_REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Enumerates the first `n` modes (eigenvalue-sorted, ties broken
/// lexicographically on `(multi_index, parities)`), then extends the cutoff
/// so a degenerate eigenspace is never split.
pub fn enumerate_modes(geometry: &Geometry, n: usize) -> Result<Vec<Mode>> {
    enumerate_modes_capped(geometry, n, DEFAULT_MODE_CAP)
}

/// Enumerates every mode with `lambda <= lambda_cap` (the cutoff is a full
/// union of eigenspaces by construction).
pub fn enumerate_modes_up_to(
    geometry: &Geometry,
    lambda_cap: f64,
    cap: usize,
) -> Result<Vec<Mode>> {
    if !(lambda_cap >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda_cap",
            reason: "must be nonnegative".into(),
        });
    }
    let d = geometry.dimension();
    let coeffs: Vec<f64> = (0..d)
        .map(|j| geometry.axis_frequency(j, 1).powi(2))
        .collect();
    let mut raw: Vec<(f64, Vec<u32>)> = Vec::new();
    collect_indices(
        &coeffs,
        geometry.min_axis_index(),
        lambda_cap * lambda_cap,
        &mut vec![0; d],
        0,
        &mut raw,
    );
    let mut modes: Vec<Mode> = Vec::new();
    for (ev, idx) in &raw {
        for parities in parity_choices(geometry, idx) {
            modes.push(Mode {
                rank: 0,
                multi_index: idx.clone(),
                parities,
                eigenvalue_sq: *ev,
            });
        }
    }
    if modes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "lambda_cap",
            reason: format!("no modes below lambda = {lambda_cap}"),
        });
    }
    if modes.len() > cap {
        return Err(Error::CapacityExceeded {
            requested: modes.len(),
            cap,
        });
    }
    modes.sort_by(|a, b| {
        a.eigenvalue_sq
            .partial_cmp(&b.eigenvalue_sq)
            .unwrap()
            .then_with(|| a.multi_index.cmp(&b.multi_index))
            .then_with(|| a.parities.cmp(&b.parities))
    });
    for (i, m) in modes.iter_mut().enumerate() {
        m.rank = i + 1;
    }
    Ok(modes)
}

pub fn enumerate_modes_capped(geometry: &Geometry, n: usize, cap: usize) -> Result<Vec<Mode>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "mode count must be at least 1".into(),
        });
    }
    if n > cap {
        return Err(Error::CapacityExceeded { requested: n, cap });
    }

    let d = geometry.dimension();
    let coeffs: Vec<f64> = (0..d)
        .map(|j| geometry.axis_frequency(j, 1).powi(2))
        .collect();
    let k_min = geometry.min_axis_index();

    // Grow the search radius until enough modes fit inside the ball.
    let mut radius_sq = coeffs.iter().cloned().fold(f64::MIN, f64::max) * 4.0;
    let mut raw: Vec<(f64, Vec<u32>)>;
    loop {
        raw = Vec::new();
        collect_indices(&coeffs, k_min, radius_sq, &mut vec![0; d], 0, &mut raw);
        let count: usize = raw
            .iter()
            .map(|(_, idx)| parity_multiplicity(geometry, idx))
            .sum();
        if count >= n {
            break;
        }
        radius_sq *= 2.0;
    }

    let mut modes: Vec<Mode> = Vec::new();
    for (ev, idx) in &raw {
        for parities in parity_choices(geometry, idx) {
            modes.push(Mode {
                rank: 0,
                multi_index: idx.clone(),
                parities,
                eigenvalue_sq: *ev,
            });
        }
    }
    modes.sort_by(|a, b| {
        a.eigenvalue_sq
            .partial_cmp(&b.eigenvalue_sq)
            .unwrap()
            .then_with(|| a.multi_index.cmp(&b.multi_index))
            .then_with(|| a.parities.cmp(&b.parities))
    });

    // Rank cutoff, rounded up to the next eigenspace boundary.
    let mut end = n.min(modes.len());
    while end < modes.len() && same_eigenspace(modes[end].eigenvalue_sq, modes[end - 1].eigenvalue_sq)
    {
        end += 1;
    }
    if end > cap {
        return Err(Error::CapacityExceeded {
            requested: end,
            cap,
        });
    }
    modes.truncate(end);
    for (i, m) in modes.iter_mut().enumerate() {
        m.rank = i + 1;
    }
    Ok(modes)
}

fn collect_indices(
    coeffs: &[f64],
    k_min: u32,
    radius_sq: f64,
    idx: &mut Vec<u32>,
    axis: usize,
    out: &mut Vec<(f64, Vec<u32>)>,
) {
    if axis == coeffs.len() {
        let ev: f64 = idx
            .iter()
            .zip(coeffs)
            .map(|(&k, &c)| f64::from(k) * f64::from(k) * c)
            .sum();
        out.push((ev, idx.clone()));
        return;
    }
    let budget: f64 = idx[..axis]
        .iter()
        .zip(coeffs)
        .map(|(&k, &c)| f64::from(k) * f64::from(k) * c)
        .sum();
    let mut k = k_min;
    loop {
        let term = f64::from(k) * f64::from(k) * coeffs[axis];
        if budget + term > radius_sq {
            break;
        }
        idx[axis] = k;
        collect_indices(coeffs, k_min, radius_sq, idx, axis + 1, out);
        k += 1;
    }
}

fn parity_multiplicity(geometry: &Geometry, idx: &[u32]) -> usize {
    match geometry.kind {
        GeometryKind::Torus => idx.iter().map(|&k| if k == 0 { 1 } else { 2 }).product(),
        _ => 1,
    }
}

fn parity_choices(geometry: &Geometry, idx: &[u32]) -> Vec<Vec<Parity>> {
    match geometry.kind {
        GeometryKind::Torus => {
            let mut out = vec![Vec::new()];
            for &k in idx {
                let opts: &[Parity] = if k == 0 {
                    &[Parity::Cos]
                } else {
                    &[Parity::Cos, Parity::Sin]
                };
                let mut next = Vec::with_capacity(out.len() * opts.len());
                for prefix in &out {
                    for &p in opts {
                        let mut v = prefix.clone();
                        v.push(p);
                        next.push(v);
                    }
                }
                out = next;
            }
            out
        }
        _ => vec![vec![Parity::Cos; idx.len()]],
    }
}

/// 1D eigenfunction factor on `axis` evaluated at `x`, including its
/// normalization constant.
pub fn axis_factor(geometry: &Geometry, axis: usize, k: u32, parity: Parity, x: f64) -> f64 {
    let l = geometry.side_lengths[axis];
    match geometry.kind {
        GeometryKind::Torus => {
            if k == 0 {
                (1.0 / l).sqrt()
            } else {
                let w = geometry.axis_frequency(axis, k);
                let amp = (2.0 / l).sqrt();
                match parity {
                    Parity::Cos => amp * (w * x).cos(),
                    Parity::Sin => amp * (w * x).sin(),
                }
            }
        }
        GeometryKind::DirichletBox => {
            let w = geometry.axis_frequency(axis, k);
            (2.0 / l).sqrt() * (w * x).sin()
        }
        GeometryKind::NeumannBox => {
            if k == 0 {
                (1.0 / l).sqrt()
            } else {
                let w = geometry.axis_frequency(axis, k);
                (2.0 / l).sqrt() * (w * x).cos()
            }
        }
    }
}
