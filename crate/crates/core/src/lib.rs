//! Spectral boundary-integral simulation of the 2-D Peskin problem: a closed
//! elastic string with Hookean (or general) tension immersed in Stokes flow.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases below fix it to `f64`, which the verification harness and the file
//! layer use throughout.

pub mod cli;
pub mod curves;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod scalar;
pub mod stepper;
pub mod tangential;
pub mod verify;

pub use error::{PeskinError, Result};
pub use scalar::Real;

pub type Grid = grid::PeriodicGrid<f64>;
pub type Curve = grid::CurveState<f64>;
pub type Report = geometry::DiagnosticsReport<f64>;
pub type Velocity = dynamics::VelocityField<f64>;
pub type Tension = dynamics::TensionProfile<f64>;
pub type Config = stepper::StepperConfig<f64>;
pub type Run = stepper::Trajectory<f64>;
pub type Tangential = tangential::TangentialState<f64>;
