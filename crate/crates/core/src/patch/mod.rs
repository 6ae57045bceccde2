//! Electrostatic field of a circular surface-potential patch and the torque
//! it induces on a polarizable rod.
//!
//! A disc of radius `r₀` at potential `V₀` in an otherwise grounded plane
//! produces
//!
//! ```text
//! Φ(ρ, z) = V₀ r₀ ∫₀^∞ e^{−λz} J₁(λr₀) J₀(λρ) dλ
//! ```
//!
//! and the field components follow by differentiating under the integral.

mod averaging;
pub mod bessel;
pub mod hankel;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use averaging::{
    average_1d, average_2d, max_average_1d, max_average_2d, suppression_curve, AverageMode,
    PatchAveraging, SuppressionRow,
};
use hankel::{HankelIntegrator, PatchIntegrals};

use crate::error::{Error, Result};
use crate::numerics::{maximize_golden, CubicSpline};
use crate::trap::Polarizability;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchConfig {
    /// Patch radius, m.
    pub r0: f64,
    /// Patch potential, V. The rest of the plate is grounded.
    pub v0: f64,
}

impl Default for PatchConfig {
    fn default() -> Self {
        PatchConfig { r0: 2.5e-6, v0: 0.01 }
    }
}

impl PatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::invalid(format!("patch radius must be positive, got {:e}", self.r0)));
        }
        if !self.v0.is_finite() {
            return Err(Error::invalid("patch potential must be finite"));
        }
        Ok(())
    }

    /// `V₀(1 − z/√(z² + r₀²))`
    pub fn on_axis_potential(&self, z: f64) -> f64 {
        self.v0 * (1.0 - z / (z * z + self.r0 * self.r0).sqrt())
    }

    /// `V₀ r₀² / (z² + r₀²)^{3/2}`
    pub fn on_axis_field(&self, z: f64) -> f64 {
        self.v0 * self.r0 * self.r0 / (z * z + self.r0 * self.r0).powf(1.5)
    }
}

fn integrals(rho: f64, z: f64, cfg: &PatchConfig) -> Result<PatchIntegrals> {
    cfg.validate()?;
    HankelIntegrator::default().integrate(cfg.r0, rho, z)
}

/// Φ(ρ, z), V.
pub fn patch_potential(rho: f64, z: f64, cfg: &PatchConfig) -> Result<f64> {
    Ok(cfg.v0 * cfg.r0 * integrals(rho, z, cfg)?.potential)
}

/// `(E_ρ, E_z)` at cylindrical radius `rho`, V/m. `E_ρ > 0` points away
/// from the patch axis when `V₀ > 0`.
pub fn patch_field_cyl(rho: f64, z: f64, cfg: &PatchConfig) -> Result<(f64, f64)> {
    let v = integrals(rho, z, cfg)?;
    let s = cfg.v0 * cfg.r0;
    Ok((s * v.radial, s * v.axial))
}

/// `[E_x, E_y, E_z]`, V/m, with the patch centred at the origin.
pub fn patch_field(x: f64, y: f64, z: f64, cfg: &PatchConfig) -> Result<[f64; 3]> {
    let rho = x.hypot(y);
    let (er, ez) = patch_field_cyl(rho, z, cfg)?;
    Ok(cartesian(x, y, er, ez))
}

fn cartesian(x: f64, y: f64, er: f64, ez: f64) -> [f64; 3] {
    let rho = x.hypot(y);
    if rho == 0.0 {
        [0.0, 0.0, ez]
    } else {
        [er * x / rho, er * y / rho, ez]
    }
}

/// `T_z = (α⊥ − α∥) E_x E_y` for a rod lying along y, N·m.
pub fn torque_from_field(e: &[f64; 3], pol: &Polarizability) -> f64 {
    (pol.alpha_perp - pol.alpha_par) * e[0] * e[1]
}

pub fn induced_torque(x: f64, y: f64, z: f64, cfg: &PatchConfig, pol: &Polarizability) -> Result<f64> {
    Ok(torque_from_field(&patch_field(x, y, z, cfg)?, pol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub e: [f64; 3],
    pub torque_z: f64,
}

impl FieldSample {
    pub const CSV_HEADER: &'static str = "x_m,y_m,z_m,phi_V,Ex,Ey,Ez,torque_Nm";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.x, self.y, self.z, self.phi, self.e[0], self.e[1], self.e[2], self.torque_z
        )
    }
}

/// Potential and field at one height tabulated on a uniform radial grid
/// and interpolated with cubic splines. Radii past the table are
/// integrated directly.
#[derive(Debug, Clone)]
pub struct RadialFieldTable {
    cfg: PatchConfig,
    z: f64,
    rho_max: f64,
    phi: CubicSpline,
    e_rho: CubicSpline,
    e_z: CubicSpline,
}

impl RadialFieldTable {
    pub const DEFAULT_SPACING: f64 = 25e-9;

    pub fn build(cfg: &PatchConfig, z: f64, rho_max: f64, spacing: f64) -> Result<Self> {
        cfg.validate()?;
        if !(rho_max > 0.0 && spacing > 0.0) {
            return Err(Error::invalid("radial table needs positive extent and spacing"));
        }
        let n = (rho_max / spacing).ceil() as usize + 1;
        let rhos: Vec<f64> = (0..n.max(4)).map(|i| i as f64 * spacing).collect();
        let h = HankelIntegrator::default();
        let values = rhos
            .par_iter()
            .map(|&r| h.integrate(cfg.r0, r, z))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let s = cfg.v0 * cfg.r0;
        let column = |f: fn(&PatchIntegrals) -> f64| -> Vec<f64> {
            values.iter().map(|v| s * f(v)).collect()
        };
        Ok(RadialFieldTable {
            cfg: *cfg,
            z,
            rho_max: *rhos.last().unwrap(),
            phi: CubicSpline::new(rhos.clone(), column(|v| v.potential))?,
            e_rho: CubicSpline::new(rhos.clone(), column(|v| v.radial))?,
            e_z: CubicSpline::new(rhos, column(|v| v.axial))?,
        })
    }

    pub fn height(&self) -> f64 {
        self.z
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// `(Φ, E_ρ, E_z)` at radius `rho`.
    pub fn at(&self, rho: f64) -> (f64, f64, f64) {
        let rho = rho.abs();
        if rho <= self.rho_max {
            return (self.phi.eval(rho), self.e_rho.eval(rho), self.e_z.eval(rho));
        }
        let s = self.cfg.v0 * self.cfg.r0;
        match HankelIntegrator::default().integrate(self.cfg.r0, rho, self.z) {
            Ok(v) => (s * v.potential, s * v.radial, s * v.axial),
            Err(_) => (0.0, 0.0, 0.0),
        }
    }

    pub fn field(&self, x: f64, y: f64) -> [f64; 3] {
        let (_, er, ez) = self.at(x.hypot(y));
        cartesian(x, y, er, ez)
    }

    pub fn torque(&self, x: f64, y: f64, pol: &Polarizability) -> f64 {
        torque_from_field(&self.field(x, y), pol)
    }

    pub fn sample(&self, x: f64, y: f64, pol: &Polarizability) -> FieldSample {
        let (phi, er, ez) = self.at(x.hypot(y));
        let e = cartesian(x, y, er, ez);
        FieldSample { x, y, z: self.z, phi, e, torque_z: torque_from_field(&e, pol) }
    }

    /// Radius and value of the largest radial field on this plane.
    pub fn max_radial_field(&self) -> (f64, f64) {
        let n = 2000;
        let step = self.rho_max / n as f64;
        let (mut best_r, mut best) = (0.0, 0.0);
        for i in 0..=n {
            let r = i as f64 * step;
            let e = self.e_rho.eval(r).abs();
            if e > best {
                best = e;
                best_r = r;
            }
        }
        let lo = (best_r - step).max(0.0);
        let hi = (best_r + step).min(self.rho_max);
        maximize_golden(|r| self.e_rho.eval(r).abs(), lo, hi, 1e-12)
    }

    /// Largest `|T_z|` over the plane: `|α⊥ − α∥| E_ρ,max² / 2`, attained on
    /// the diagonals.
    pub fn plane_max_torque(&self, pol: &Polarizability) -> f64 {
        let (_, e) = self.max_radial_field();
        0.5 * (pol.alpha_par - pol.alpha_perp).abs() * e * e
    }
}

/// Field samples on the Cartesian product of `xs`, `ys`, `zs`.
pub fn field_map(
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    cfg: &PatchConfig,
    pol: &Polarizability,
) -> Result<Vec<FieldSample>> {
    let extent = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| x.hypot(*y)))
        .fold(0.0f64, f64::max);
    let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &z in zs {
        if !(z > 0.0) {
            return Err(Error::domain(format!("height must be > 0, got {z:e}")));
        }
        let table = RadialFieldTable::build(cfg, z, extent.max(cfg.r0), RadialFieldTable::DEFAULT_SPACING)?;
        for &y in ys {
            for &x in xs {
                out.push(table.sample(x, y, pol));
            }
        }
    }
    Ok(out)
}

pub fn write_field_csv<W: Write>(mut out: W, rows: &[FieldSample]) -> std::io::Result<()> {
    writeln!(out, "{}", FieldSample::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz::RodGeometry;
    use crate::trap::polarizability;
    use approx::assert_relative_eq;

    fn dc_pol() -> Polarizability {
        polarizability(&RodGeometry::default_silica(), 2.927).unwrap()
    }

    #[test]
    fn on_axis_potential_value() {
        let cfg = PatchConfig::default();
        let v = patch_potential(0.0, 266e-9, &cfg).unwrap();
        assert_relative_eq!(v, 8.94e-3, max_relative = 1e-3);
        assert_relative_eq!(v, cfg.on_axis_potential(266e-9), max_relative = 1e-9);
        assert!((patch_potential(0.0, 1e-10, &cfg).unwrap() - cfg.v0).abs() < 1e-4 * cfg.v0);
    }

    #[test]
    fn far_from_patch_is_small() {
        let cfg = PatchConfig::default();
        let v = patch_potential(10.0 * cfg.r0, 266e-9, &cfg).unwrap();
        assert!(v.abs() < 0.02 * cfg.v0);
    }

    #[test]
    fn axial_field_matches_derivative() {
        let cfg = PatchConfig::default();
        for z in [100e-9, 266e-9, 2e-6] {
            let e = patch_field(0.0, 0.0, z, &cfg).unwrap();
            assert_eq!((e[0], e[1]), (0.0, 0.0));
            assert_relative_eq!(e[2], cfg.on_axis_field(z), max_relative = 1e-9);
        }
    }

    #[test]
    fn field_peaks_at_edge_and_points_outward() {
        let cfg = PatchConfig::default();
        let table = RadialFieldTable::build(&cfg, 266e-9, 6e-6, 25e-9).unwrap();
        let (r, e) = table.max_radial_field();
        assert!((r - cfg.r0).abs() < 0.1 * cfg.r0, "peak at {r:e}");
        assert!(e > 0.0);
        for rho in [0.5e-6, 1.5e-6, 3e-6, 5e-6] {
            assert!(table.at(rho).1 > 0.0);
        }
    }

    #[test]
    fn table_matches_direct_integration() {
        let cfg = PatchConfig::default();
        let table = RadialFieldTable::build(&cfg, 266e-9, 8e-6, 25e-9).unwrap();
        let scale = table.max_radial_field().1;
        for rho in [0.31e-6, 2.4567e-6, 2.5123e-6, 4.2e-6] {
            let (er, ez) = patch_field_cyl(rho, 266e-9, &cfg).unwrap();
            let (_, ter, tez) = table.at(rho);
            assert!((er - ter).abs() < 1e-4 * scale);
            assert!((ez - tez).abs() < 1e-4 * scale);
        }
    }

    #[test]
    fn torque_antisymmetry() {
        let cfg = PatchConfig::default();
        let pol = dc_pol();
        for (x, y) in [(1.0e-6, 2.0e-6), (2.2e-6, 0.7e-6)] {
            let t = induced_torque(x, y, 266e-9, &cfg, &pol).unwrap();
            assert_relative_eq!(induced_torque(-x, y, 266e-9, &cfg, &pol).unwrap(), -t, max_relative = 1e-12);
            assert_relative_eq!(induced_torque(x, -y, 266e-9, &cfg, &pol).unwrap(), -t, max_relative = 1e-12);
        }
        assert_eq!(induced_torque(1.3e-6, 0.0, 266e-9, &cfg, &pol).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = PatchConfig::default();
        assert!(patch_potential(0.0, 0.0, &cfg).is_err());
        assert!(patch_potential(0.0, 1e-7, &PatchConfig { r0: 0.0, v0: 1.0 }).is_err());
    }
}
