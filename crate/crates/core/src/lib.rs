//! Driven two-mode cavity QED with a single quantum dot: open-system steady
//! states, photon statistics of a polarization-selected output mode, and the
//! parameter sweeps used to locate unconventional photon blockade.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod integrator;
pub mod liouvillian;
mod linalg;
pub mod model;
pub mod observables;
pub mod optimize;
pub mod polarization;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::{CsrMatrix, LuDecomposition, Matrix};
pub use scalar::{Cplx, Real};

pub type Complex = Cplx<f64>;
pub type Operator = hilbert::Operator<f64>;
pub type Ladder = hilbert::Ladder<f64>;
pub type SystemParams = model::SystemParams<f64>;
pub type Superoperator = liouvillian::Superoperator<f64>;
pub type DensityMatrix = liouvillian::DensityMatrix<f64>;
pub type OutputProjection = polarization::OutputProjection<f64>;
pub type JonesMatrix = polarization::JonesMatrix<f64>;
pub type CorrelationCurve = dynamics::CorrelationCurve<f64>;
pub type CorrelationBasis = dynamics::CorrelationBasis<f64>;
pub type SteadySolution = sweep::SteadySolution<f64>;
pub type SweepGrid = sweep::SweepGrid<f64>;
pub type SolverSettings = sweep::SolverSettings<f64>;
