#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curve;
pub mod error;
pub mod forms;
pub mod immersion;
pub mod integrals;
pub mod periods;
pub mod quadrature;
pub mod report;
pub mod spectra;
pub mod system;
pub mod theta;

pub use error::{Error, Result};
pub use theta::ThetaParam;
