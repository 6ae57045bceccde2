//! Casimir free energy, force and torque between a dielectric nanorod and a
//! birefringent half-space.

mod casimir;
pub mod kernel;
mod sweep;
mod table;

pub use casimir::{
    AngularHarmonics, CasimirResult, CasimirSolver, QuadratureSpec, RodGeometry, MIN_SEPARATION,
};
pub use kernel::{
    f_tilde, kernel_d, kernel_d_checked, kernel_n, kernel_n_dtheta, FTildeForm, KernelContext,
};
pub use sweep::{sweep, write_csv, SweepGrid, SweepPoint};
pub use table::{CasimirField, CasimirTable, NoCasimir, UniformTorque};

use crate::error::Result;
use crate::materials::MaterialSet;

/// Free energy per unit length (and G) at one configuration; the force and
/// torque fields of the result are filled as well since they come from the
/// same quadrature pass.
pub fn free_energy_per_length(
    d: f64,
    theta: f64,
    materials: &MaterialSet,
    rod: &RodGeometry,
    temperature: f64,
    quad: &QuadratureSpec,
) -> Result<CasimirResult> {
    CasimirSolver::new(materials.clone(), *rod, quad.clone())?.evaluate(d, theta, temperature)
}

/// `F = -∂G/∂d` in newtons; negative means attraction toward the plate.
pub fn casimir_force(
    d: f64,
    theta: f64,
    materials: &MaterialSet,
    rod: &RodGeometry,
    temperature: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    free_energy_per_length(d, theta, materials, rod, temperature, quad).map(|r| r.force)
}

/// `M = -∂G/∂θ` in N·m.
pub fn casimir_torque(
    d: f64,
    theta: f64,
    materials: &MaterialSet,
    rod: &RodGeometry,
    temperature: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    free_energy_per_length(d, theta, materials, rod, temperature, quad).map(|r| r.torque)
}
