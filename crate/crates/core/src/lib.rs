//! Spectral simulator and stochastic verification harness for the cubic wave
//! equation with randomized initial data on flat tori and rectangular boxes.
//!
//! The crate provides explicit-spectrum geometries with exact coefficient
//! transforms, random coefficient families with certified moment conditions,
//! Monte Carlo probes of sub-Gaussian concentration, the free and Duhamel
//! wave propagators, a Picard solver for the randomized cubic problem with an
//! independent splitting oracle, and the concentrating-bubble machinery for
//! norm-inflation experiments. Numeric kernels are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the common `f64` instantiation.

pub mod averaging;
pub mod basis;
pub mod bubble;
pub mod deviation;
pub mod error;
pub mod existence;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod inflation;
pub mod norms;
pub mod ode;
pub mod picard;
pub mod propagator;
pub mod random;
pub mod reference;
pub mod scalar;
pub mod stats;
pub mod streams;
pub mod transform;

pub use basis::Basis;
pub use error::{Error, Result};
pub use field::SpectralField;
pub use geometry::{Geometry, GeometryKind, Mode, Parity};
pub use grid::GridSampling;
pub use propagator::{AdmissiblePair, StatePair, Trajectory};
pub use random::{FamilyKind, RandomFamily, Realization};
pub use scalar::Scalar;
pub use transform::TransformPlan;

/// `f64` instantiations used by the experiment drivers.
pub type Field64 = SpectralField<f64>;
pub type State64 = StatePair<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Plan64 = TransformPlan<f64>;

/// `f32` instantiations for reduced-precision runs.
pub type Field32 = SpectralField<f32>;
pub type State32 = StatePair<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type Plan32 = TransformPlan<f32>;
