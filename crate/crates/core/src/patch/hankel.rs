//! Oscillatory integrals of the form `∫₀^∞ λ^p e^{−λz} J₁(λr₀) J_ν(λρ) dλ`.

use super::bessel::{j0, j1};
use crate::error::{Error, Result};
use crate::numerics::{GaussLegendre, WynnEpsilon};

/// The three integrals needed for the potential and field of a disc patch,
/// without the `V₀r₀` prefactor.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PatchIntegrals {
    /// `∫ e^{−λz} J₁(λr₀) J₀(λρ) dλ`
    pub potential: f64,
    /// `∫ λ e^{−λz} J₁(λr₀) J₁(λρ) dλ`
    pub radial: f64,
    /// `∫ λ e^{−λz} J₁(λr₀) J₀(λρ) dλ`
    pub axial: f64,
}

#[derive(Debug, Clone)]
pub struct HankelIntegrator {
    rule: GaussLegendre,
    rel_tol: f64,
    accelerate: bool,
    max_panels: usize,
}

impl Default for HankelIntegrator {
    fn default() -> Self {
        HankelIntegrator::new(1e-12, true)
    }
}

impl HankelIntegrator {
    pub fn new(rel_tol: f64, accelerate: bool) -> Self {
        HankelIntegrator {
            rule: GaussLegendre::new(16),
            rel_tol,
            accelerate,
            max_panels: 200_000,
        }
    }

    /// Integrates panel by panel. Panel edges are spaced by the half period
    /// of the fastest oscillation, `π/(r₀ + ρ)`, so panel sums alternate
    /// and the partial sums can be extrapolated.
    pub fn integrate(&self, r0: f64, rho: f64, z: f64) -> Result<PatchIntegrals> {
        if !(z > 0.0) {
            return Err(Error::domain(format!("height must be > 0, got {z:e}")));
        }
        let rho = rho.abs();
        let width = (std::f64::consts::PI / (r0 + rho)).min(1.0 / z);
        let tail_target = self.rel_tol.ln().abs();

        let mut sum = [0.0f64; 3];
        let mut wynn = [WynnEpsilon::new(), WynnEpsilon::new(), WynnEpsilon::new()];
        let mut best = [0.0f64; 3];
        let mut settled = 0usize;

        for k in 0..self.max_panels {
            let a = k as f64 * width;
            let b = a + width;
            let mut panel = [0.0f64; 3];
            for (lam, w) in self.rule.mapped(a, b) {
                let e = w * (-lam * z).exp();
                let s = j1(lam * r0) * e;
                let (b0, b1) = if rho == 0.0 { (1.0, 0.0) } else { (j0(lam * rho), j1(lam * rho)) };
                panel[0] += s * b0;
                panel[1] += lam * s * b1;
                panel[2] += lam * s * b0;
            }
            for i in 0..3 {
                sum[i] += panel[i];
            }

            // e^{−λz} bounds the remaining integrand; once it is negligible
            // against the accumulated magnitude the partial sum is final
            let lz = b * z;
            if lz > tail_target + (1.0 + lz).ln() + 3.0 {
                return Ok(PatchIntegrals { potential: sum[0], radial: sum[1], axial: sum[2] });
            }

            if self.accelerate {
                let mut ok = true;
                for i in 0..3 {
                    best[i] = wynn[i].push(sum[i]);
                    let scale = best[i].abs().max(sum[i].abs()).max(f64::MIN_POSITIVE);
                    ok &= wynn[i].error_estimate() <= self.rel_tol * scale;
                }
                settled = if ok && k >= 8 { settled + 1 } else { 0 };
                if settled >= 4 {
                    return Ok(PatchIntegrals { potential: best[0], radial: best[1], axial: best[2] });
                }
            }
        }
        Err(Error::Convergence(format!(
            "patch integral did not converge within {} panels (rho = {rho:e}, z = {z:e})",
            self.max_panels
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn on_axis_closed_forms() {
        let r0 = 2.5e-6;
        let h = HankelIntegrator::default();
        for z in [20e-9, 266e-9, 1e-6, 5e-6] {
            let v = h.integrate(r0, 0.0, z).unwrap();
            let phi = (1.0 - z / (z * z + r0 * r0).sqrt()) / r0;
            let ez = r0 / (z * z + r0 * r0).powf(1.5);
            assert_relative_eq!(v.potential, phi, max_relative = 1e-9);
            assert_relative_eq!(v.axial, ez, max_relative = 1e-9);
            assert_eq!(v.radial, 0.0);
        }
    }

    #[test]
    fn acceleration_agrees_with_plain_truncation() {
        let r0 = 2.5e-6;
        let fast = HankelIntegrator::default();
        let plain = HankelIntegrator::new(1e-12, false);
        for rho in [0.5e-6, 2.4e-6, 2.5e-6, 2.6e-6, 7e-6, 15e-6] {
            let a = fast.integrate(r0, rho, 266e-9).unwrap();
            let b = plain.integrate(r0, rho, 266e-9).unwrap();
            let scale = b.axial.abs().max(b.radial.abs());
            assert!((a.radial - b.radial).abs() < 1e-9 * scale, "rho {rho}");
            assert!((a.axial - b.axial).abs() < 1e-9 * scale, "rho {rho}");
            assert_relative_eq!(a.potential, b.potential, max_relative = 1e-8, epsilon = 1e-8 / r0);
        }
    }

    #[test]
    fn rejects_non_positive_height() {
        assert!(HankelIntegrator::default().integrate(1e-6, 0.0, 0.0).is_err());
    }
}
