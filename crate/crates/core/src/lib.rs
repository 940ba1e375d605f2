//! Coupled-dipole model of a waveguide-fed metasurface transmitter, the
//! position error bound of a bistatic sensing link it drives, and the
//! two-stage resonance-strength design.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod crb;
pub mod designer;
pub mod em;
pub mod error;
pub mod linalg;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix = linalg::CMatrix<f64>;
pub type CVector = linalg::CVector<f64>;
pub type OperatingPoint = em::OperatingPoint<f64>;
pub type PanelGeometry = em::PanelGeometry<f64>;
pub type CouplingMatrix = em::CouplingMatrix<f64>;
pub type DipoleSolution = em::DipoleSolution<f64>;
pub type Target = channel::Target<f64>;
pub type RxArray = channel::RxArray<f64>;
pub type Scenario = channel::Scenario<f64>;
pub type FimBlocks = crb::FimBlocks<f64>;
pub type PebValue = crb::PebValue<f64>;
pub type SubspaceBasis = designer::SubspaceBasis<f64>;
pub type SdpSolution = designer::SdpSolution<f64>;
pub type DesignContext = designer::DesignContext<f64>;
pub type DesignResult = designer::DesignResult<f64>;
