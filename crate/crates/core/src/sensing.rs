//! Thermal (gas) and photon-recoil limits on torque and force sensing in
//! the free-molecular regime.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{AMU, C, EPS0, HBAR, K_B, TORR};
use crate::error::{Error, Result};
use crate::lifshitz::RodGeometry;
use crate::numerics::find_root;
use crate::trap::Polarizability;

/// Background gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Environment {
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// Pa·s
    pub viscosity: f64,
    /// kg
    pub gas_molecular_mass: f64,
    /// Momentum accommodation coefficient.
    pub accommodation: f64,
}

impl Default for Environment {
    /// Air at 1e-7 torr.
    fn default() -> Self {
        Self::air_torr(1e-7)
    }
}

impl Environment {
    /// Air at 300 K.
    pub fn air(pressure: f64) -> Self {
        Environment {
            temperature: 300.0,
            pressure,
            viscosity: 1.81e-5,
            gas_molecular_mass: 28.97 * AMU,
            accommodation: 0.9,
        }
    }

    pub fn air_torr(pressure_torr: f64) -> Self {
        Self::air(pressure_torr * TORR)
    }

    pub fn with_pressure(self, pressure: f64) -> Self {
        Environment { pressure, ..self }
    }

    pub fn pressure_torr(&self) -> f64 {
        self.pressure / TORR
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("temperature", self.temperature),
            ("pressure", self.pressure),
            ("viscosity", self.viscosity),
            ("gas molecular mass", self.gas_molecular_mass),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v:e}")));
            }
        }
        if !(0.0..=1.0).contains(&self.accommodation) {
            return Err(Error::invalid("accommodation must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `λ = (μ/p)√(πk_BT / 2m_gas)`.
pub fn mean_free_path(env: &Environment) -> f64 {
    env.viscosity / env.pressure
        * (PI * K_B * env.temperature / (2.0 * env.gas_molecular_mass)).sqrt()
}

fn warn_if_continuum(rod: &RodGeometry, env: &Environment) {
    let kn = mean_free_path(env) / rod.radius;
    if kn < 10.0 {
        log::warn!("Knudsen number {kn:.3} is not in the free-molecular regime");
    }
}

/// Rotational diffusion coefficient of a rod tumbling about a diameter,
/// rad²/s.
pub fn rotational_diffusion(rod: &RodGeometry, env: &Environment) -> f64 {
    warn_if_continuum(rod, env);
    let beta = rod.aspect_ratio();
    let kn = mean_free_path(env) / rod.radius;
    let f = env.accommodation;
    let specular = 1.0 / 6.0 + 1.0 / (8.0 * beta.powi(3));
    let diffuse = (PI - 2.0) / 48.0
        + 1.0 / (8.0 * beta)
        + 1.0 / (8.0 * beta * beta)
        + (PI - 4.0) / 8.0 / (8.0 * beta.powi(3));
    K_B * env.temperature * kn
        / (PI * env.viscosity * rod.length.powi(3) * (specular + f * diffuse))
}

/// Translational drag coefficients `(K⊥, K∥)`, kg/s.
pub fn drag_coefficients(rod: &RodGeometry, env: &Environment) -> (f64, f64) {
    warn_if_continuum(rod, env);
    let beta = rod.aspect_ratio();
    let f = env.accommodation;
    let pre = 2.0 * PI * env.viscosity * rod.radius.powi(2) / mean_free_path(env);
    let k_perp = pre * (((PI - 2.0) / 4.0 * beta + 0.5) * f + 2.0 * beta);
    let k_par = pre * ((beta + PI / 4.0 - 1.0) * f + 2.0);
    (k_perp, k_par)
}

/// Trapping light as seen by the recoil-heating formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Illumination {
    /// W/m²
    pub intensity: f64,
    /// m
    pub wavelength: f64,
}

impl Illumination {
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Photon flux `I/ħω₀`, 1/(m²·s).
    pub fn photon_flux(&self) -> f64 {
        self.intensity / (HBAR * C * self.k0())
    }

    /// `(8πJ_p/3)(k₀²/4πε₀)²`, the common dipole-scattering factor.
    fn scattering_factor(&self) -> f64 {
        let k0 = self.k0();
        8.0 * PI * self.photon_flux() / 3.0 * (k0 * k0 / (4.0 * PI * EPS0)).powi(2)
    }
}

/// Rotational kinetic-energy heating rate from photon recoil, W.
pub fn rotational_heating_rate(rod: &RodGeometry, light: &Illumination, pol: &Polarizability) -> f64 {
    light.scattering_factor() * pol.anisotropy().powi(2) * HBAR * HBAR
        / (2.0 * rod.moment_of_inertia())
}

/// Translational kinetic-energy heating rate from photon recoil, W.
pub fn translational_heating_rate(rod: &RodGeometry, light: &Illumination, pol: &Polarizability) -> f64 {
    let k0 = light.k0();
    light.scattering_factor() * pol.alpha_perp.powi(2) * HBAR * HBAR * k0 * k0 / (2.0 * rod.mass())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// N·m/√Hz at Δt = 1 s, otherwise N·m.
    pub m_th: f64,
    pub m_rad: f64,
    pub m_min: f64,
    /// N/√Hz at Δt = 1 s, otherwise N.
    pub f_th: f64,
    pub f_rad: f64,
    pub f_min: f64,
    /// Rotational gas damping rate, 1/s.
    pub gamma_th: f64,
    /// rad²/s
    pub d_r: f64,
    /// kg/s
    pub k_perp: f64,
    pub k_par: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueFloor {
    pub m_th: f64,
    pub m_rad: f64,
    pub m_min: f64,
    pub gamma_th: f64,
    pub d_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceFloor {
    pub f_th: f64,
    pub f_rad: f64,
    pub f_min: f64,
    pub k_perp: f64,
    pub k_par: f64,
}

pub fn torque_noise_floor(
    rod: &RodGeometry,
    env: &Environment,
    light: &Illumination,
    pol: &Polarizability,
    dt: f64,
) -> TorqueFloor {
    let d_r = rotational_diffusion(rod, env);
    let f_r = K_B * env.temperature / d_r;
    let inertia = rod.moment_of_inertia();
    let gamma_th = f_r / inertia;
    let m_th = (4.0 * K_B * env.temperature * inertia * gamma_th / dt).sqrt();
    let m_rad = (4.0 * inertia / dt * rotational_heating_rate(rod, light, pol)).sqrt();
    TorqueFloor { m_th, m_rad, m_min: m_th.hypot(m_rad), gamma_th, d_r }
}

pub fn force_noise_floor(
    rod: &RodGeometry,
    env: &Environment,
    light: &Illumination,
    pol: &Polarizability,
    dt: f64,
) -> ForceFloor {
    let (k_perp, k_par) = drag_coefficients(rod, env);
    let f_th = (4.0 * K_B * env.temperature / dt * k_perp).sqrt();
    let f_rad = (4.0 * rod.mass() / dt * translational_heating_rate(rod, light, pol)).sqrt();
    ForceFloor { f_th, f_rad, f_min: f_th.hypot(f_rad), k_perp, k_par }
}

pub fn sensitivity(
    rod: &RodGeometry,
    env: &Environment,
    light: &Illumination,
    pol: &Polarizability,
    dt: f64,
) -> SensitivityResult {
    let t = torque_noise_floor(rod, env, light, pol, dt);
    let f = force_noise_floor(rod, env, light, pol, dt);
    SensitivityResult {
        m_th: t.m_th,
        m_rad: t.m_rad,
        m_min: t.m_min,
        f_th: f.f_th,
        f_rad: f.f_rad,
        f_min: f.f_min,
        gamma_th: t.gamma_th,
        d_r: t.d_r,
        k_perp: f.k_perp,
        k_par: f.k_par,
    }
}

/// Pressures (Pa) at which the thermal floor equals the recoil floor, for
/// torque and for force.
pub fn crossover_pressures(
    rod: &RodGeometry,
    env: &Environment,
    light: &Illumination,
    pol: &Polarizability,
) -> Result<(f64, f64)> {
    // both thermal floors scale as √p, so work in ln p
    let torque = |lnp: f64| {
        let t = torque_noise_floor(rod, &env.with_pressure(lnp.exp()), light, pol, 1.0);
        (t.m_th / t.m_rad).ln()
    };
    let force = |lnp: f64| {
        let f = force_noise_floor(rod, &env.with_pressure(lnp.exp()), light, pol, 1.0);
        (f.f_th / f.f_rad).ln()
    };
    let (lo, hi) = ((1e-20f64).ln(), (1e8f64).ln());
    Ok((
        find_root(torque, lo, hi, 1e-12, 200)?.exp(),
        find_root(force, lo, hi, 1e-12, 200)?.exp(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pressure_torr: f64,
    pub result: SensitivityResult,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "pressure_torr,M_th,M_rad,M_min,F_th,F_rad,F_min";

    pub fn csv_row(&self) -> String {
        let r = &self.result;
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.pressure_torr, r.m_th, r.m_rad, r.m_min, r.f_th, r.f_rad, r.f_min
        )
    }
}

/// Per-√Hz floors over a pressure grid given in torr.
pub fn sensitivity_sweep(
    pressures_torr: &[f64],
    rod: &RodGeometry,
    env: &Environment,
    light: &Illumination,
    pol: &Polarizability,
) -> Result<Vec<SweepRow>> {
    env.validate()?;
    pressures_torr
        .iter()
        .map(|&p| {
            if !(p > 0.0) {
                return Err(Error::invalid(format!("pressure must be positive, got {p:e} torr")));
            }
            Ok(SweepRow {
                pressure_torr: p,
                result: sensitivity(rod, &env.with_pressure(p * TORR), light, pol, 1.0),
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{}", SweepRow::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::{polarizability, TrapConfig};
    use approx::assert_relative_eq;

    fn setup() -> (RodGeometry, Illumination, Polarizability) {
        let rod = RodGeometry::default_silica();
        let cfg = TrapConfig::default();
        let light = Illumination { intensity: cfg.peak_intensity(), wavelength: cfg.wavelength };
        (rod, light, polarizability(&rod, 2.1).unwrap())
    }

    #[test]
    fn mean_free_path_values() {
        let env = Environment::air_torr(1.0);
        assert_relative_eq!(mean_free_path(&env), 5.0e-5, max_relative = 0.01);
        let half = env.with_pressure(env.pressure / 2.0);
        assert_relative_eq!(mean_free_path(&half), 2.0 * mean_free_path(&env), max_relative = 1e-14);
        assert_relative_eq!(
            mean_free_path(&Environment::air_torr(1e-7)),
            500.0,
            max_relative = 0.01
        );
    }

    #[test]
    fn diffusion_and_drag_scale_with_pressure() {
        let rod = RodGeometry::default_silica();
        let a = Environment::air_torr(1e-7);
        let b = Environment::air_torr(1e-6);
        assert_relative_eq!(
            rotational_diffusion(&rod, &a) / rotational_diffusion(&rod, &b),
            10.0,
            max_relative = 1e-12
        );
        let (ka, _) = drag_coefficients(&rod, &a);
        let (kb, _) = drag_coefficients(&rod, &b);
        assert_relative_eq!(kb / ka, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn perpendicular_drag_dominates() {
        let (kp, ka) = drag_coefficients(&RodGeometry::default_silica(), &Environment::air_torr(1e-7));
        assert!(kp > ka && ka > 0.0);
    }

    #[test]
    fn floors_scale_with_time_and_pressure() {
        let (rod, light, pol) = setup();
        let env = Environment::air_torr(1e-7);
        let one = sensitivity(&rod, &env, &light, &pol, 1.0);
        let four = sensitivity(&rod, &env, &light, &pol, 4.0);
        assert_relative_eq!(four.m_min, 0.5 * one.m_min, max_relative = 1e-12);
        assert_relative_eq!(four.f_min, 0.5 * one.f_min, max_relative = 1e-12);
        let ten = sensitivity(&rod, &Environment::air_torr(1e-6), &light, &pol, 1.0);
        assert_relative_eq!(ten.f_th, 10f64.sqrt() * one.f_th, max_relative = 1e-12);
        assert_eq!(ten.m_rad, one.m_rad);
        assert_relative_eq!(one.m_min.powi(2), one.m_th.powi(2) + one.m_rad.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn recoil_floors_scale_with_root_power() {
        let (rod, light, pol) = setup();
        let env = Environment::air_torr(1e-7);
        let a = sensitivity(&rod, &env, &light, &pol, 1.0);
        let doubled = Illumination { intensity: 2.0 * light.intensity, ..light };
        let b = sensitivity(&rod, &env, &doubled, &pol, 1.0);
        assert_relative_eq!(b.m_rad / a.m_rad, 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(b.f_rad / a.f_rad, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn crossover_balances_floors() {
        let (rod, light, pol) = setup();
        let env = Environment::air_torr(1.0);
        let (pm, pf) = crossover_pressures(&rod, &env, &light, &pol).unwrap();
        let t = torque_noise_floor(&rod, &env.with_pressure(pm), &light, &pol, 1.0);
        assert_relative_eq!(t.m_th, t.m_rad, max_relative = 1e-9);
        let f = force_noise_floor(&rod, &env.with_pressure(pf), &light, &pol, 1.0);
        assert_relative_eq!(f.f_th, f.f_rad, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_environment() {
        let mut env = Environment::air_torr(1.0);
        env.accommodation = 1.5;
        assert!(env.validate().is_err());
    }
}
