//! Casimir torque on an optically levitated nanorod above a birefringent
//! plate: dielectric models, Lifshitz quadrature, optical trap, sensitivity
//! floors, pulsed-measurement dynamics and patch-potential systematics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod lifshitz;
pub mod materials;
pub mod numerics;
pub mod patch;
pub mod sensing;
pub mod trap;

pub use error::{Error, Result};
