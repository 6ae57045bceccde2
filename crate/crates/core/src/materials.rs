//! Dielectric response models at imaginary (Matsubara) frequencies and the
//! built-in material catalog.
//!
//! Every model here is a sum of undamped Lorentz oscillators evaluated on the
//! imaginary axis,
//!
//! ```text
//! ε(iξ) = 1 + C_IR / (1 + (ξ/ω_IR)²) + C_UV / (1 + (ξ/ω_UV)²)
//! ```
//!
//! which is real, ≥ 1 and monotone non-increasing in ξ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// Two-oscillator (infrared + ultraviolet) dielectric model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorDielectric {
    pub c_ir: f64,
    pub c_uv: f64,
    /// rad/s
    pub w_ir: f64,
    /// rad/s
    pub w_uv: f64,
}

impl OscillatorDielectric {
    pub fn new(c_ir: f64, c_uv: f64, w_ir: f64, w_uv: f64) -> Result<Self> {
        let m = OscillatorDielectric { c_ir, c_uv, w_ir, w_uv };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c_ir, self.c_uv, self.w_ir, self.w_uv];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "oscillator parameters must be finite and >= 0: {self:?}"
            )));
        }
        if !(self.w_ir < self.w_uv) {
            return Err(Error::invalid(format!(
                "infrared resonance must lie below the ultraviolet one ({:e} >= {:e})",
                self.w_ir, self.w_uv
            )));
        }
        Ok(())
    }

    /// ε(iξ) without argument checking; `xi` must be ≥ 0.
    #[inline]
    pub fn at(&self, xi: f64) -> f64 {
        let r_ir = xi / self.w_ir;
        let r_uv = xi / self.w_uv;
        1.0 + self.c_ir / (1.0 + r_ir * r_ir) + self.c_uv / (1.0 + r_uv * r_uv)
    }

    /// Static value ε(i·0) = 1 + C_IR + C_UV.
    pub fn static_value(&self) -> f64 {
        1.0 + self.c_ir + self.c_uv
    }
}

/// Evaluates ε(iξ) for a two-oscillator model.
pub fn eval_dielectric(model: &OscillatorDielectric, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::domain(format!("imaginary frequency must be >= 0, got {xi:e}")));
    }
    Ok(model.at(xi))
}

/// n-th Matsubara frequency 2πn k_B T / ħ in rad/s.
pub fn matsubara_frequency(n: u32, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0 K, got {temperature}")));
    }
    Ok(matsubara_unchecked(n, temperature))
}

#[inline]
pub(crate) fn matsubara_unchecked(n: u32, temperature: f64) -> f64 {
    2.0 * PI * n as f64 * K_B * temperature / HBAR
}

/// Response of a medium: either an oscillator model or a frequency-independent constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DielectricModel {
    Oscillator(OscillatorDielectric),
    Constant { value: f64 },
}

impl DielectricModel {
    #[inline]
    pub fn at(&self, xi: f64) -> f64 {
        match self {
            DielectricModel::Oscillator(m) => m.at(xi),
            DielectricModel::Constant { value } => *value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DielectricModel::Oscillator(m) => m.validate(),
            DielectricModel::Constant { value } if *value >= 1.0 && value.is_finite() => Ok(()),
            DielectricModel::Constant { value } => Err(Error::invalid(format!(
                "constant permittivity must be >= 1, got {value}"
            ))),
        }
    }
}

/// Uniaxial plate with its optical (extraordinary) axis in the surface plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirefringentMaterial {
    pub name: String,
    /// Extraordinary response ε₁∥, along the optical axis.
    pub eps_par: DielectricModel,
    /// Ordinary response ε₁⊥.
    pub eps_perp: DielectricModel,
    /// Refractive indices at the trapping wavelength.
    pub n_ordinary: f64,
    pub n_extraordinary: f64,
}

impl BirefringentMaterial {
    pub fn validate(&self) -> Result<()> {
        self.eps_par.validate()?;
        self.eps_perp.validate()?;
        if !(self.n_ordinary > 1.0 && self.n_extraordinary > 1.0) {
            return Err(Error::invalid(format!(
                "{}: refractive indices must exceed 1",
                self.name
            )));
        }
        Ok(())
    }

    /// Same crystal with the ∥ and ⊥ responses exchanged (axis assignment
    /// rotated by 90°).
    pub fn swapped_axes(&self) -> Self {
        BirefringentMaterial {
            name: format!("{}-swapped", self.name),
            eps_par: self.eps_perp,
            eps_perp: self.eps_par,
            n_ordinary: self.n_extraordinary,
            n_extraordinary: self.n_ordinary,
        }
    }

    /// Isotropic reference plate with both axes set to the ordinary response.
    pub fn isotropic_from_perp(&self) -> Self {
        BirefringentMaterial {
            name: format!("{}-isotropic", self.name),
            eps_par: self.eps_perp,
            eps_perp: self.eps_perp,
            n_ordinary: self.n_ordinary,
            n_extraordinary: self.n_ordinary,
        }
    }
}

/// Material of the levitated rod (isotropic: ε₂∥ = ε₂⊥).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodMaterial {
    pub name: String,
    pub model: DielectricModel,
    /// Relative permittivity at the trapping wavelength.
    pub eps_optical: f64,
    /// kg/m³
    pub density: f64,
}

impl RodMaterial {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.eps_optical > 1.0) {
            return Err(Error::invalid(format!("{}: eps_optical must exceed 1", self.name)));
        }
        if !(self.density > 0.0) {
            return Err(Error::invalid(format!("{}: density must be positive", self.name)));
        }
        Ok(())
    }

    /// Static permittivity ε(i·0), used for electrostatic polarizabilities.
    pub fn eps_static(&self) -> f64 {
        self.model.at(0.0)
    }
}

/// Medium filling the gap between rod and plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMedium {
    pub name: String,
    pub model: DielectricModel,
}

impl GapMedium {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()
    }
}

/// Plate, rod and gap medium of one Casimir configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub plate: BirefringentMaterial,
    pub rod: RodMaterial,
    pub gap: GapMedium,
}

impl MaterialSet {
    pub fn validate(&self) -> Result<()> {
        self.plate.validate()?;
        self.rod.validate()?;
        self.gap.validate()
    }

    /// Default configuration: silica rod in vacuum above the named plate.
    pub fn with_plate(plate: &str) -> Result<Self> {
        Ok(MaterialSet {
            plate: catalog::plate(plate)?,
            rod: catalog::silica(),
            gap: catalog::vacuum(),
        })
    }

    /// The five responses sampled at one imaginary frequency.
    #[inline]
    pub fn sample(&self, xi: f64) -> ResponseSample {
        ResponseSample {
            xi,
            eps1_perp: self.plate.eps_perp.at(xi),
            eps1_par: self.plate.eps_par.at(xi),
            eps2_perp: self.rod.model.at(xi),
            eps2_par: self.rod.model.at(xi),
            eps3: self.gap.model.at(xi),
        }
    }
}

/// Plate (1), rod (2) and gap (3) permittivities at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample {
    pub xi: f64,
    pub eps1_perp: f64,
    pub eps1_par: f64,
    pub eps2_perp: f64,
    pub eps2_par: f64,
    pub eps3: f64,
}

/// Built-in materials. Oscillator parameters are the standard two-oscillator
/// fits for calcite, tetragonal barium titanate and fused silica.
pub mod catalog {
    use super::*;

    pub const PLATES: [&str; 2] = ["batio3", "calcite"];

    fn osc(c_ir: f64, c_uv: f64, w_ir: f64, w_uv: f64) -> DielectricModel {
        DielectricModel::Oscillator(OscillatorDielectric { c_ir, c_uv, w_ir, w_uv })
    }

    pub fn calcite() -> BirefringentMaterial {
        BirefringentMaterial {
            name: "calcite".into(),
            eps_par: osc(5.300, 1.683, 2.691e14, 1.660e16),
            eps_perp: osc(6.300, 1.182, 2.691e14, 2.134e16),
            // 1064 nm
            n_ordinary: 1.6423,
            n_extraordinary: 1.4797,
        }
    }

    pub fn barium_titanate() -> BirefringentMaterial {
        BirefringentMaterial {
            name: "batio3".into(),
            eps_par: osc(3595.0, 4.128, 0.850e14, 0.841e16),
            eps_perp: osc(145.0, 4.064, 0.850e14, 0.896e16),
            n_ordinary: 2.269,
            n_extraordinary: 2.305,
        }
    }

    pub fn silica() -> RodMaterial {
        RodMaterial {
            name: "silica".into(),
            model: osc(0.829, 1.098, 0.867e14, 2.034e16),
            // n = 1.45 at 1064 nm
            eps_optical: 2.1,
            density: 2200.0,
        }
    }

    pub fn vacuum() -> GapMedium {
        GapMedium {
            name: "vacuum".into(),
            model: DielectricModel::Constant { value: 1.0 },
        }
    }

    /// Looks up a plate by name (case-insensitive; a few aliases accepted).
    pub fn plate(name: &str) -> Result<BirefringentMaterial> {
        match name.to_ascii_lowercase().as_str() {
            "batio3" | "barium_titanate" | "barium-titanate" => Ok(barium_titanate()),
            "calcite" | "caco3" => Ok(calcite()),
            other => Err(Error::UnknownMaterial(other.to_string())),
        }
    }

    pub fn rod(name: &str) -> Result<RodMaterial> {
        match name.to_ascii_lowercase().as_str() {
            "silica" | "sio2" => Ok(silica()),
            other => Err(Error::UnknownMaterial(other.to_string())),
        }
    }

    pub fn gap(name: &str) -> Result<GapMedium> {
        match name.to_ascii_lowercase().as_str() {
            "vacuum" => Ok(vacuum()),
            other => Err(Error::UnknownMaterial(other.to_string())),
        }
    }
}
