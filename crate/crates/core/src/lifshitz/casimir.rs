use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{
    f_tilde_from_parts, kernel_parts, rod_anisotropy, AngleFactors, FTildeForm, NodeValues,
};
use crate::constants::{C, K_B};
use crate::error::{Error, Result};
use crate::materials::{matsubara_unchecked, MaterialSet, ResponseSample};
use crate::numerics::{pairwise_sum, GaussLegendre};

/// Smallest separation at which the dilute-cylinder kernel is used.
pub const MIN_SEPARATION: f64 = 100e-9;

/// Nanorod geometry: a cylinder of length `length` and radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RodGeometry {
    /// m
    pub length: f64,
    /// m
    pub radius: f64,
    /// kg/m³
    pub density: f64,
}

impl Default for RodGeometry {
    fn default() -> Self {
        Self::default_silica()
    }
}

impl RodGeometry {
    pub fn new(length: f64, radius: f64, density: f64) -> Result<Self> {
        let rod = RodGeometry { length, radius, density };
        rod.validate()?;
        Ok(rod)
    }

    /// 200 nm × 20 nm radius silica rod.
    pub fn default_silica() -> Self {
        RodGeometry { length: 200e-9, radius: 20e-9, density: 2200.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.length > 2.0 * self.radius && self.length.is_finite()) {
            return Err(Error::invalid(format!(
                "rod needs l > 2a > 0 (l = {:e}, a = {:e})",
                self.length, self.radius
            )));
        }
        if !(self.density > 0.0) {
            return Err(Error::invalid("rod density must be positive"));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.length
    }

    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }

    /// About a diameter through the centre, ρπa²l³/12.
    pub fn moment_of_inertia(&self) -> f64 {
        self.density * PI * self.radius * self.radius * self.length.powi(3) / 12.0
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.length / self.radius
    }
}

/// Quadrature and truncation controls for the Matsubara sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Stop once three consecutive terms are below this fraction of the running sum.
    pub matsubara_rel_tol: f64,
    /// Gauss–Legendre nodes in the mapped radial variable `t = 2dρ₃`.
    pub q_nodes: usize,
    /// Gauss–Legendre nodes in φ over [0, 2π].
    pub phi_nodes: usize,
    /// The radial integral is truncated where `e^{-(t - t₀)}` drops below this.
    pub q_tail: f64,
    /// Re-evaluate each term with doubled node counts and report the difference.
    pub richardson_check: bool,
    pub max_terms: usize,
    /// A result whose error estimate exceeds this is a convergence failure.
    pub max_rel_error: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            matsubara_rel_tol: 1e-8,
            q_nodes: 48,
            phi_nodes: 64,
            q_tail: 1e-10,
            richardson_check: true,
            max_terms: 2000,
            max_rel_error: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.matsubara_rel_tol > 0.0 && self.q_tail > 0.0 && self.q_tail < 1.0) {
            return Err(Error::invalid("quadrature tolerances must be in (0, 1)"));
        }
        if self.q_nodes < 8 || self.phi_nodes < 8 {
            return Err(Error::invalid("quadrature needs at least 8 nodes per axis"));
        }
        if self.max_terms < 4 {
            return Err(Error::invalid("max_terms must be >= 4"));
        }
        Ok(())
    }

    /// Same settings with node counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        QuadratureSpec {
            q_nodes: self.q_nodes * factor,
            phi_nodes: self.phi_nodes * factor,
            ..self.clone()
        }
    }

    /// Human-readable description of the radial variable transform.
    pub fn q_mapping(&self) -> String {
        format!(
            "t = 2 d rho3 on [t0, t0 + ln(1/{:e})], Gauss-Legendre",
            self.q_tail
        )
    }
}

/// Free energy, force and torque at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasimirResult {
    pub d: f64,
    pub theta: f64,
    pub temperature: f64,
    /// Free energy per unit rod length, J/m.
    pub g_per_length: f64,
    /// `G = g·l`, J.
    pub free_energy: f64,
    /// `F = -∂G/∂d`, N. Negative values pull the rod toward the plate.
    pub force: f64,
    /// `M = -∂G/∂θ`, N·m.
    pub torque: f64,
    pub n_terms: usize,
    pub est_rel_error: f64,
}

impl CasimirResult {
    pub const CSV_HEADER: &'static str =
        "d_m,theta_rad,T_K,g_J_per_m,G_J,F_N,M_Nm,n_terms,est_rel_err";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
            self.d,
            self.theta,
            self.temperature,
            self.g_per_length,
            self.free_energy,
            self.force,
            self.torque,
            self.n_terms,
            self.est_rel_error
        )
    }
}

/// Raw (un-prefactored) double integrals for one Matsubara term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct TermIntegrals {
    /// ∫∫ Q e^{-2dρ₃} N/D
    pub energy: f64,
    /// ∫∫ Q 2ρ₃ e^{-2dρ₃} N/D
    pub force: f64,
    /// ∫∫ Q e^{-2dρ₃} (∂N/∂θ)/D
    pub torque: f64,
}

struct Rules {
    q: GaussLegendre,
    phi: GaussLegendre,
}

/// Evaluates the Casimir interaction of a rod above a birefringent plate.
pub struct CasimirSolver {
    materials: MaterialSet,
    rod: RodGeometry,
    quad: QuadratureSpec,
    form: FTildeForm,
    coarse: Rules,
    fine: Option<Rules>,
}

impl std::fmt::Debug for CasimirSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CasimirSolver")
            .field("materials", &self.materials)
            .field("rod", &self.rod)
            .field("quad", &self.quad)
            .field("form", &self.form)
            .finish()
    }
}

// Matsubara terms are evaluated in blocks of this size; the block size is
// fixed so the set of evaluated terms does not depend on the thread count.
const TERM_BLOCK: usize = 8;

impl CasimirSolver {
    pub fn new(materials: MaterialSet, rod: RodGeometry, quad: QuadratureSpec) -> Result<Self> {
        materials.validate()?;
        rod.validate()?;
        quad.validate()?;
        let coarse = Rules {
            q: GaussLegendre::new(quad.q_nodes),
            phi: GaussLegendre::new(quad.phi_nodes),
        };
        let fine = quad.richardson_check.then(|| Rules {
            q: GaussLegendre::new(2 * quad.q_nodes),
            phi: GaussLegendre::new(2 * quad.phi_nodes),
        });
        Ok(CasimirSolver {
            materials,
            rod,
            quad,
            form: FTildeForm::default(),
            coarse,
            fine,
        })
    }

    pub fn with_form(mut self, form: FTildeForm) -> Self {
        self.form = form;
        self
    }

    pub fn materials(&self) -> &MaterialSet {
        &self.materials
    }

    pub fn rod(&self) -> &RodGeometry {
        &self.rod
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn form(&self) -> FTildeForm {
        self.form
    }

    /// `k_B T a² / 4π`, J·m² per unit of the raw integrals.
    fn prefactor(&self, temperature: f64) -> f64 {
        K_B * temperature * self.rod.radius * self.rod.radius / (4.0 * PI)
    }

    fn check_args(d: f64, theta: f64, temperature: f64) -> Result<()> {
        if !(d >= MIN_SEPARATION) || !d.is_finite() {
            return Err(Error::domain(format!(
                "separation {d:e} m is below the dilute-cylinder limit of {MIN_SEPARATION:e} m"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::domain("angle must be finite"));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::domain(format!("temperature must be > 0 K, got {temperature}")));
        }
        Ok(())
    }

    /// Free energy, force and torque at separation `d`, angle `theta`
    /// (rod axis vs plate optical axis) and temperature.
    pub fn evaluate(&self, d: f64, theta: f64, temperature: f64) -> Result<CasimirResult> {
        self.evaluate_weighted(d, theta, temperature, 0.5)
    }

    /// As [`evaluate`](Self::evaluate) but with an arbitrary weight on the
    /// static (n = 0) term instead of ½.
    pub fn evaluate_weighted(
        &self,
        d: f64,
        theta: f64,
        temperature: f64,
        n0_weight: f64,
    ) -> Result<CasimirResult> {
        Self::check_args(d, theta, temperature)?;
        let sums = self.matsubara_sum(d, theta, temperature, n0_weight)?;
        let pre = self.prefactor(temperature);
        let g = pre * sums.value.energy;
        let l = self.rod.length;
        Ok(CasimirResult {
            d,
            theta,
            temperature,
            g_per_length: g,
            free_energy: g * l,
            force: pre * l * sums.value.force,
            torque: -pre * l * sums.value.torque,
            n_terms: sums.n_terms,
            est_rel_error: sums.est_rel_error,
        })
    }

    /// Free energy per unit length of a single Matsubara term (unweighted).
    pub fn matsubara_term(&self, n: u32, d: f64, theta: f64, temperature: f64) -> Result<f64> {
        Self::check_args(d, theta, temperature)?;
        let xi = matsubara_unchecked(n, temperature);
        let sample = self.materials.sample(xi);
        let t = self.term_integrals(d, theta, &sample, &self.coarse)?;
        Ok(self.prefactor(temperature) * t.energy)
    }

    fn matsubara_sum(
        &self,
        d: f64,
        theta: f64,
        temperature: f64,
        n0_weight: f64,
    ) -> Result<SumOutcome> {
        let tol = self.quad.matsubara_rel_tol;
        let mut coarse_terms: Vec<TermIntegrals> = Vec::new();
        let mut fine_terms: Vec<TermIntegrals> = Vec::new();
        let mut running = TermIntegrals::default();
        let mut quiet = 0usize;
        let mut stop_at = None;
        let mut next = 0usize;

        while stop_at.is_none() {
            if next >= self.quad.max_terms {
                return Err(Error::Convergence(format!(
                    "Matsubara sum not converged after {} terms at d = {d:e} m, T = {temperature} K",
                    self.quad.max_terms
                )));
            }
            let block_end = (next + TERM_BLOCK).min(self.quad.max_terms);
            let block: Vec<Result<(TermIntegrals, Option<TermIntegrals>)>> = (next..block_end)
                .into_par_iter()
                .map(|n| {
                    let xi = matsubara_unchecked(n as u32, temperature);
                    let sample = self.materials.sample(xi);
                    let weight = if n == 0 { n0_weight } else { 1.0 };
                    let c = self.term_integrals(d, theta, &sample, &self.coarse)?.scaled(weight);
                    let f = match &self.fine {
                        Some(rules) => Some(self.term_integrals(d, theta, &sample, rules)?.scaled(weight)),
                        None => None,
                    };
                    Ok((c, f))
                })
                .collect();
            for (offset, item) in block.into_iter().enumerate() {
                let n = next + offset;
                let (c, f) = item?;
                let best = f.unwrap_or(c);
                coarse_terms.push(c);
                if let Some(f) = f {
                    fine_terms.push(f);
                }
                running.energy += best.energy;
                running.force += best.force;
                running.torque += best.torque;
                if n == 0 {
                    continue;
                }
                let small = |term: f64, sum: f64| term.abs() <= tol * sum.abs();
                if small(best.energy, running.energy) && small(best.force, running.force) {
                    quiet += 1;
                } else {
                    quiet = 0;
                }
                if quiet >= 3 {
                    stop_at = Some(n + 1);
                    break;
                }
            }
            next = block_end;
        }

        let n_terms = stop_at.unwrap_or(next);
        coarse_terms.truncate(n_terms);
        fine_terms.truncate(n_terms);
        let coarse = sum_terms(&coarse_terms);
        let value = if fine_terms.is_empty() { coarse } else { sum_terms(&fine_terms) };
        let used = if fine_terms.is_empty() { &coarse_terms } else { &fine_terms };

        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        let quad_err = if fine_terms.is_empty() {
            0.0
        } else {
            rel(coarse.energy, value.energy).max(rel(coarse.force, value.force))
        };
        let tail = tail_bound(used.iter().map(|t| t.energy));
        let tail_rel = if value.energy == 0.0 { tail } else { tail / value.energy.abs() };
        let est_rel_error = quad_err + tail_rel;
        if !(est_rel_error <= self.quad.max_rel_error) {
            return Err(Error::Convergence(format!(
                "estimated relative error {est_rel_error:e} exceeds {:e} at d = {d:e} m, theta = {theta}",
                self.quad.max_rel_error
            )));
        }
        Ok(SumOutcome { value, n_terms, est_rel_error })
    }

    /// Double integral over Q and φ for one imaginary frequency, integrating in
    /// `t = 2dρ₃` so that `Q dQ = t dt / 4d²` and the exponential is `e^{-t}`.
    fn term_integrals(
        &self,
        d: f64,
        theta: f64,
        sample: &ResponseSample,
        rules: &Rules,
    ) -> Result<TermIntegrals> {
        let xi_c2 = (sample.xi / C) * (sample.xi / C);
        let kappa3_2 = sample.eps3 * xi_c2;
        let kappa_perp2 = sample.eps1_perp * xi_c2;
        let kappa_par2 = sample.eps1_par * xi_c2;
        let ratio = sample.eps1_par / sample.eps1_perp;
        let (delta_perp, delta_par) = rod_anisotropy(sample);
        let static_term = sample.xi == 0.0;

        let t0 = 2.0 * d * kappa3_2.sqrt();
        let span = -self.quad.q_tail.ln();
        let base = (-t0).exp();
        if base == 0.0 {
            return Ok(TermIntegrals::default());
        }

        let angles: Vec<(AngleFactors, f64)> = rules
            .phi
            .mapped(0.0, 2.0 * PI)
            .map(|(phi, w)| (AngleFactors::new(phi, theta), w))
            .collect();

        let inv_2d = 0.5 / d;
        let mut acc = TermIntegrals::default();
        for (t, wt) in rules.q.mapped(t0, t0 + span) {
            let rho3 = t * inv_2d;
            let q2 = if static_term { rho3 * rho3 } else { (rho3 * rho3 - kappa3_2).max(0.0) };
            if q2 == 0.0 {
                continue;
            }
            let rho1 = if static_term { rho3 } else { (q2 + kappa_perp2).sqrt() };
            // Q dQ e^{-2dρ₃} = (t / 4d²) e^{-t} dt
            let radial = wt * t * inv_2d * inv_2d * base * (-(t - t0)).exp();
            let mut e_phi = 0.0;
            let mut m_phi = 0.0;
            for (angle, wp) in &angles {
                let f_tilde = f_tilde_from_parts(
                    q2,
                    angle.cos2_phi(),
                    rho1,
                    kappa_perp2,
                    kappa_par2,
                    ratio,
                    self.form,
                );
                let values = NodeValues {
                    q2,
                    rho1,
                    rho3,
                    f_tilde,
                    eps1_perp: sample.eps1_perp,
                    eps3: sample.eps3,
                    delta_perp,
                    delta_par,
                };
                let (n, dn, den) = kernel_parts(&values, angle);
                if !(den.abs() > 0.0) || !den.is_finite() {
                    return Err(Error::DegenerateDenominator { value: den, floor: 0.0 });
                }
                let inv = wp / den;
                e_phi += n * inv;
                m_phi += dn * inv;
            }
            acc.energy += radial * e_phi;
            acc.force += radial * 2.0 * rho3 * e_phi;
            acc.torque += radial * m_phi;
        }
        Ok(acc)
    }

    /// Coefficients of `g(θ) = g₀ + g_c cos 2θ + g_s sin 2θ` (and the same for
    /// the force integrand) at separation `d`.
    ///
    /// The kernel is affine in (cos 2θ, sin 2θ) at every node, so three
    /// evaluations at θ = 0, π/4, π/2 determine the θ-dependence exactly.
    pub fn angular_harmonics(&self, d: f64, temperature: f64) -> Result<AngularHarmonics> {
        let r0 = self.evaluate(d, 0.0, temperature)?;
        let r45 = self.evaluate(d, PI / 4.0, temperature)?;
        let r90 = self.evaluate(d, PI / 2.0, temperature)?;
        let g0 = 0.5 * (r0.g_per_length + r90.g_per_length);
        let f0 = 0.5 * (r0.force + r90.force);
        Ok(AngularHarmonics {
            d,
            temperature,
            length: self.rod.length,
            g0,
            g_cos: 0.5 * (r0.g_per_length - r90.g_per_length),
            g_sin: r45.g_per_length - g0,
            f0,
            f_cos: 0.5 * (r0.force - r90.force),
            f_sin: r45.force - f0,
            n_terms: r0.n_terms.max(r45.n_terms).max(r90.n_terms),
            est_rel_error: r0.est_rel_error.max(r45.est_rel_error).max(r90.est_rel_error),
        })
    }
}

impl TermIntegrals {
    fn scaled(self, w: f64) -> Self {
        TermIntegrals {
            energy: self.energy * w,
            force: self.force * w,
            torque: self.torque * w,
        }
    }
}

struct SumOutcome {
    value: TermIntegrals,
    n_terms: usize,
    est_rel_error: f64,
}

fn sum_terms(terms: &[TermIntegrals]) -> TermIntegrals {
    let e: Vec<f64> = terms.iter().map(|t| t.energy).collect();
    let f: Vec<f64> = terms.iter().map(|t| t.force).collect();
    let m: Vec<f64> = terms.iter().map(|t| t.torque).collect();
    TermIntegrals {
        energy: pairwise_sum(&e),
        force: pairwise_sum(&f),
        torque: pairwise_sum(&m),
    }
}

/// Geometric-tail bound from the ratio of the last two terms.
fn tail_bound(terms: impl DoubleEndedIterator<Item = f64>) -> f64 {
    let mut it = terms.rev();
    let last = it.next().unwrap_or(0.0).abs();
    let prev = it.next().unwrap_or(0.0).abs();
    if last == 0.0 {
        return 0.0;
    }
    let r = if prev > 0.0 { last / prev } else { 1.0 };
    if r < 1.0 {
        last * r / (1.0 - r)
    } else {
        last
    }
}

/// θ-harmonic decomposition of the free energy and force at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularHarmonics {
    pub d: f64,
    pub temperature: f64,
    pub length: f64,
    pub g0: f64,
    pub g_cos: f64,
    pub g_sin: f64,
    pub f0: f64,
    pub f_cos: f64,
    pub f_sin: f64,
    pub n_terms: usize,
    pub est_rel_error: f64,
}

impl AngularHarmonics {
    pub fn g_per_length(&self, theta: f64) -> f64 {
        let (s, c) = (2.0 * theta).sin_cos();
        self.g0 + self.g_cos * c + self.g_sin * s
    }

    pub fn force(&self, theta: f64) -> f64 {
        let (s, c) = (2.0 * theta).sin_cos();
        self.f0 + self.f_cos * c + self.f_sin * s
    }

    pub fn torque(&self, theta: f64) -> f64 {
        let (s, c) = (2.0 * theta).sin_cos();
        2.0 * self.length * (self.g_cos * s - self.g_sin * c)
    }

    /// Torque amplitude `M₀` in `M = M₀ sin 2θ` (when `g_sin` vanishes).
    pub fn torque_amplitude(&self) -> f64 {
        2.0 * self.length * self.g_cos
    }
}
