//! Gaussian-beam optical tweezer near a reflecting birefringent substrate.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, K_B};
use crate::error::{Error, Result};
use crate::lifshitz::RodGeometry;
use crate::numerics::find_root;

/// Sign of the substrate-reflection interference term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionPhase {
    /// Includes the π phase of reflection off a denser dielectric; the
    /// standing-wave antinode sits a quarter wavelength from the surface.
    #[default]
    Dielectric,
    /// Interference term `+cos(2kd)` without the reflection phase.
    NoPhaseShift,
}

impl ReflectionPhase {
    fn sign(self) -> f64 {
        match self {
            ReflectionPhase::Dielectric => -1.0,
            ReflectionPhase::NoPhaseShift => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapConfig {
    /// W
    pub power: f64,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// m
    pub waist: f64,
    pub numerical_aperture: f64,
    /// Distance from the beam focus to the plate, m.
    pub center_distance: f64,
    /// Polarization relative to the plate optical axis, rad.
    pub polarization_angle: f64,
    /// Substrate reflectance along the ordinary axis.
    pub r_o: f64,
    /// Substrate reflectance along the extraordinary axis.
    pub r_e: f64,
    pub phase: ReflectionPhase,
}

impl Default for TrapConfig {
    fn default() -> Self {
        TrapConfig {
            power: 0.1,
            wavelength: 1064e-9,
            waist: 400e-9,
            numerical_aperture: 0.85,
            center_distance: 266e-9,
            polarization_angle: PI / 4.0,
            r_o: 0.16,
            r_e: 0.15,
            phase: ReflectionPhase::Dielectric,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.numerical_aperture > 0.0 && self.numerical_aperture < 1.0) {
            return Err(Error::invalid("numerical aperture must lie in (0, 1)"));
        }
        for (name, v) in [
            ("power", self.power),
            ("wavelength", self.wavelength),
            ("waist", self.waist),
            ("center_distance", self.center_distance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("trap {name} must be positive, got {v:e}")));
            }
        }
        for (name, r) in [("r_o", self.r_o), ("r_e", self.r_e)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::invalid(format!("reflectance {name} must lie in [0, 1)")));
            }
        }
        if !self.polarization_angle.is_finite() {
            return Err(Error::invalid("polarization angle must be finite"));
        }
        Ok(())
    }

    /// Waist from the diffraction limit `λ₀/(π NA)`.
    pub fn with_auto_waist(mut self) -> Self {
        self.waist = self.wavelength / (PI * self.numerical_aperture);
        self
    }

    /// Replaces the reflectances with normal-incidence Fresnel values.
    pub fn with_fresnel_reflectances(mut self, n_ordinary: f64, n_extraordinary: f64) -> Self {
        self.r_o = fresnel_reflectance(n_ordinary);
        self.r_e = fresnel_reflectance(n_extraordinary);
        self
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Angular frequency of the trapping light.
    pub fn omega0(&self) -> f64 {
        C * self.k0()
    }

    /// `P k₀² NA² / 2π`, W/m².
    pub fn peak_intensity(&self) -> f64 {
        let k0 = self.k0();
        self.power * k0 * k0 * self.numerical_aperture.powi(2) / (2.0 * PI)
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    pub fn beam(&self) -> BeamField {
        BeamField {
            e0: (2.0 * self.peak_intensity() / (C * EPS0)).sqrt(),
            waist: self.waist,
            rayleigh_range: self.rayleigh_range(),
            k: self.k0(),
        }
    }
}

/// Paraxial Gaussian beam, focus at the origin, propagating along z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamField {
    /// Field amplitude at the focus, V/m.
    pub e0: f64,
    pub waist: f64,
    pub rayleigh_range: f64,
    pub k: f64,
}

impl BeamField {
    pub fn width(&self, z: f64) -> f64 {
        self.waist * (1.0 + (z / self.rayleigh_range).powi(2)).sqrt()
    }

    /// Wavefront radius of curvature; infinite at the focus.
    pub fn curvature_radius(&self, z: f64) -> f64 {
        if z == 0.0 {
            f64::INFINITY
        } else {
            z * (1.0 + (self.rayleigh_range / z).powi(2))
        }
    }

    pub fn gouy(&self, z: f64) -> f64 {
        (z / self.rayleigh_range).atan()
    }

    /// `(w₀/w(z))²`
    pub fn width_ratio2(&self, z: f64) -> f64 {
        1.0 / (1.0 + (z / self.rayleigh_range).powi(2))
    }

    pub fn amplitude(&self, x: f64, y: f64, z: f64) -> f64 {
        let w = self.width(z);
        self.e0 * self.waist / w * (-(x * x + y * y) / (w * w)).exp()
    }

    /// Time-averaged intensity `½cε₀|E|²`.
    pub fn intensity(&self, x: f64, y: f64, z: f64) -> f64 {
        0.5 * C * EPS0 * self.amplitude(x, y, z).powi(2)
    }
}

/// Beam intensity at a point, W/m².
pub fn beam_intensity(x: f64, y: f64, z: f64, cfg: &TrapConfig) -> f64 {
    cfg.beam().intensity(x, y, z)
}

/// Polarizability along and across the rod axis, C·m²/V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarizability {
    pub alpha_par: f64,
    pub alpha_perp: f64,
}

impl Polarizability {
    pub fn anisotropy(&self) -> f64 {
        self.alpha_par - self.alpha_perp
    }
}

/// Slender-rod polarizabilities `α∥ = Vε₀(ε−1)`, `α⊥ = 2Vε₀(ε−1)/(ε+1)`.
pub fn polarizability(rod: &RodGeometry, eps: f64) -> Result<Polarizability> {
    if !(eps >= 1.0) {
        return Err(Error::domain(format!("permittivity must be >= 1, got {eps}")));
    }
    if rod.aspect_ratio() < 5.0 {
        log::warn!(
            "aspect ratio {:.2} is small for the slender-rod polarizability",
            rod.aspect_ratio()
        );
    }
    let v = rod.volume();
    Ok(Polarizability {
        alpha_par: v * EPS0 * (eps - 1.0),
        alpha_perp: 2.0 * v * EPS0 * (eps - 1.0) / (eps + 1.0),
    })
}

/// Normal-incidence reflectance from vacuum onto index `n`.
pub fn fresnel_reflectance(n: f64) -> f64 {
    ((n - 1.0) / (n + 1.0)).powi(2)
}

/// Standing-wave intensity factor at separation `d`, relative to the peak
/// intensity, and its derivative in `d`.
fn intensity_factor(d: f64, cfg: &TrapConfig) -> (f64, f64) {
    let zr2 = cfg.rayleigh_range().powi(2);
    let d0 = cfg.center_distance;
    let (z1, z2) = (d - d0, d + d0);
    let h1 = 1.0 / (1.0 + z1 * z1 / zr2);
    let h2 = 1.0 / (1.0 + z2 * z2 / zr2);
    let dh1 = -2.0 * z1 / zr2 * h1 * h1;
    let dh2 = -2.0 * z2 / zr2 * h2 * h2;

    let r_mean = 0.5 * (cfg.r_o + cfg.r_e);
    let amp = cfg.phase.sign() * (cfg.r_o.sqrt() + cfg.r_e.sqrt());
    let k2 = 2.0 * cfg.k0();
    let (s, c) = (k2 * d).sin_cos();
    let g = (h1 * h2).sqrt();
    let dg = 0.5 * g * (dh1 / h1 + dh2 / h2);

    let value = h1 + r_mean * h2 + amp * c * g;
    let slope = dh1 + r_mean * dh2 + amp * (c * dg - k2 * s * g);
    (value, slope)
}

/// Intensity seen by the rod on the beam axis at separation `d`, including
/// the substrate reflection.
pub fn effective_intensity(d: f64, cfg: &TrapConfig) -> f64 {
    cfg.peak_intensity() * intensity_factor(d, cfg).0
}

/// Trapping potential along the axis for a rod aligned with the
/// polarization, J.
pub fn trap_potential(d: f64, cfg: &TrapConfig, pol: &Polarizability) -> f64 {
    -pol.alpha_par * effective_intensity(d, cfg) / (2.0 * C * EPS0)
}

/// `-∂U/∂d`, N. Positive pushes away from the plate.
pub fn optical_force(d: f64, cfg: &TrapConfig, pol: &Polarizability) -> f64 {
    let slope = cfg.peak_intensity() * intensity_factor(d, cfg).1;
    pol.alpha_par * slope / (2.0 * C * EPS0)
}

/// Potential at the beam centre, J.
pub fn trap_depth(cfg: &TrapConfig, pol: &Polarizability) -> f64 {
    trap_potential(cfg.center_distance, cfg, pol)
}

/// Orientation energy and torque `(U, -∂U/∂φ)` for a rod at angle `phi`
/// from the polarization in intensity `intensity`.
pub fn angular_potential(phi: f64, intensity: f64, pol: &Polarizability) -> (f64, f64) {
    let scale = intensity / (2.0 * C * EPS0);
    let u = -scale * (pol.alpha_par - pol.anisotropy() * phi.sin().powi(2));
    let torque = -scale * pol.anisotropy() * (2.0 * phi).sin();
    (u, torque)
}

/// `∂²U/∂φ²` at φ = 0, N·m/rad.
pub fn torsional_stiffness(intensity: f64, pol: &Polarizability) -> f64 {
    pol.anisotropy() * intensity / (C * EPS0)
}

/// Zero of `F_optical(d) + extra(d)` nearest the beam centre.
pub fn equilibrium_with<F>(cfg: &TrapConfig, pol: &Polarizability, extra: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let f = |d: f64| optical_force(d, cfg, pol) + extra(d);
    // the standing-wave well spans a quarter wavelength around the antinode
    let half = cfg.wavelength / 8.0;
    let d0 = cfg.center_distance;
    let (lo, hi) = ((d0 - half).max(1e-9), d0 + half);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::Instability(format!(
            "no restoring equilibrium between {lo:e} and {hi:e} m"
        )));
    }
    find_root(f, lo, hi, 1e-15, 200)
}

pub fn equilibrium(cfg: &TrapConfig, pol: &Polarizability) -> Result<f64> {
    equilibrium_with(cfg, pol, |_| 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapFrequencies {
    /// Axial angular frequency, rad/s.
    pub omega_z: f64,
    /// Torsional angular frequency, rad/s.
    pub omega_r: f64,
    pub d_eq: f64,
    /// N/m
    pub k_z: f64,
    /// N·m/rad
    pub k_phi: f64,
}

/// Small-oscillation frequencies about the optical equilibrium.
pub fn trap_frequencies(
    cfg: &TrapConfig,
    rod: &RodGeometry,
    pol: &Polarizability,
) -> Result<TrapFrequencies> {
    let d_eq = equilibrium(cfg, pol)?;
    let h = 1e-3 * cfg.wavelength;
    let k_z = -(optical_force(d_eq + h, cfg, pol) - optical_force(d_eq - h, cfg, pol)) / (2.0 * h);
    let k_phi = torsional_stiffness(effective_intensity(d_eq, cfg), pol);
    if !(k_z > 0.0) || !(k_phi > 0.0) {
        return Err(Error::Instability(format!(
            "non-positive stiffness at equilibrium (k_z = {k_z:e}, k_phi = {k_phi:e})"
        )));
    }
    Ok(TrapFrequencies {
        omega_z: (k_z / rod.mass()).sqrt(),
        omega_r: (k_phi / rod.moment_of_inertia()).sqrt(),
        d_eq,
        k_z,
        k_phi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub d: f64,
    pub potential: f64,
    pub force: f64,
}

impl ProfileRow {
    pub const CSV_HEADER: &'static str = "d_m,U_J,U_K,F_optical_N";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e}",
            self.d,
            self.potential,
            self.potential / K_B,
            self.force
        )
    }
}

pub fn potential_profile(ds: &[f64], cfg: &TrapConfig, pol: &Polarizability) -> Vec<ProfileRow> {
    ds.iter()
        .map(|&d| ProfileRow {
            d,
            potential: trap_potential(d, cfg, pol),
            force: optical_force(d, cfg, pol),
        })
        .collect()
}

pub fn write_profile_csv<W: Write>(mut out: W, rows: &[ProfileRow]) -> std::io::Result<()> {
    writeln!(out, "{}", ProfileRow::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
