//! Physical constants (CODATA 2018 exact/recommended values) and unit factors.

/// Tag written into run manifests so outputs can be traced to a constants table.
pub const CONSTANTS_VERSION: &str = "CODATA-2018";

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.8541878128e-12;
/// Standard gravity, m/s².
pub const G_ACCEL: f64 = 9.80665;
/// Atomic mass constant, kg.
pub const AMU: f64 = 1.66053906660e-27;

/// One torr in pascal.
pub const TORR: f64 = 101_325.0 / 760.0;
/// One nanometre in metres.
pub const NM: f64 = 1e-9;
/// One micrometre in metres.
pub const UM: f64 = 1e-6;
