//! Photon-pair splitting through a 1D atom followed by a tunable two-mode
//! interferometer.
//!
//! Two indistinguishable photons leave a feeder cavity, scatter off a
//! two-level atom strongly coupled to a waveguide, and the two output modes
//! of the atom are mixed by a Mach-Zehnder interferometer. The crate
//! computes the probability that the photons leave through different
//! interferometer ports, both from closed forms and from an independent
//! quantum-jump pipeline, and optimizes the interferometer setting.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlations;
pub mod efficiency;
pub mod error;
pub mod interferometer;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod singlemode;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;

pub type Params = model::SystemParams<f64>;
pub type Mzi = model::MziParams<f64>;
pub type State = linalg::StateVector<f64>;
pub type Operator = linalg::OperatorMatrix<f64>;
pub type Efficiency = efficiency::EfficiencyResult<f64>;
pub type Ports = efficiency::PortProbabilities<f64>;
pub type Quadrature = quadrature::QuadratureSettings<f64>;
pub type TwoPhoton = singlemode::TwoPhotonState<f64>;
pub type Optimum = optimizer::Optimum<f64>;

pub type Params32 = model::SystemParams<f32>;
pub type Mzi32 = model::MziParams<f32>;
pub type State32 = linalg::StateVector<f32>;
pub type Operator32 = linalg::OperatorMatrix<f32>;
