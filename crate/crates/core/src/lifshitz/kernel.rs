//! Integrand of the rod–half-space free energy: the `N/D` kernel of the
//! dilute-cylinder expansion and its θ-derivative.

use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::materials::{matsubara_frequency, BirefringentMaterial, ResponseSample};

/// Which square-root argument is used in the anisotropy function f̃.
///
/// `Extraordinary` uses ρ₁∥² = Q² + ε₁∥ξ²/c², so the root is the decay
/// constant of the extraordinary wave and
/// `f̃ = -(ε₁∥/ε₁⊥ - 1) / (ρ_e + ρ₁⊥)` is regular everywhere.
/// `OrdinaryRoot` uses ρ₁⊥² in the root; it has a removable 0/0 point at
/// `Q² sin²φ = ρ₁⊥²` for ξ = 0. The two coincide at ξ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FTildeForm {
    #[default]
    Extraordinary,
    OrdinaryRoot,
}

/// All quantities the kernel needs at one `(Q, φ)` node and one Matsubara frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext {
    pub q: f64,
    pub phi: f64,
    pub theta: f64,
    pub d: f64,
    pub rho1_perp: f64,
    pub rho3: f64,
    pub f_tilde: f64,
    pub delta_perp: f64,
    pub delta_par: f64,
    pub eps1_perp: f64,
    pub eps1_par: f64,
    pub eps2_perp: f64,
    pub eps2_par: f64,
    pub eps3: f64,
}

impl KernelContext {
    pub fn new(
        q: f64,
        phi: f64,
        theta: f64,
        d: f64,
        sample: &ResponseSample,
        form: FTildeForm,
    ) -> Self {
        let xi_c2 = (sample.xi / C) * (sample.xi / C);
        let q2 = q * q;
        let (rho1_perp, rho3) = if sample.xi == 0.0 {
            (q, q)
        } else {
            (
                (q2 + sample.eps1_perp * xi_c2).sqrt(),
                (q2 + sample.eps3 * xi_c2).sqrt(),
            )
        };
        let cos2 = phi.cos().powi(2);
        let f_tilde = f_tilde_from_parts(
            q2,
            cos2,
            rho1_perp,
            sample.eps1_perp * xi_c2,
            sample.eps1_par * xi_c2,
            sample.eps1_par / sample.eps1_perp,
            form,
        );
        let (delta_perp, delta_par) = rod_anisotropy(sample);
        KernelContext {
            q,
            phi,
            theta,
            d,
            rho1_perp,
            rho3,
            f_tilde,
            delta_perp,
            delta_par,
            eps1_perp: sample.eps1_perp,
            eps1_par: sample.eps1_par,
            eps2_perp: sample.eps2_perp,
            eps2_par: sample.eps2_par,
            eps3: sample.eps3,
        }
    }

    /// `e^{-2dρ₃}`.
    pub fn decay(&self) -> f64 {
        (-2.0 * self.d * self.rho3).exp()
    }
}

/// (Δ⊥, Δ∥) of the rod relative to the gap medium.
#[inline]
pub(crate) fn rod_anisotropy(s: &ResponseSample) -> (f64, f64) {
    (
        (s.eps2_perp - s.eps3) / (s.eps2_perp + s.eps3),
        (s.eps2_par - s.eps3) / s.eps3,
    )
}

/// f̃ in cancellation-free form.
///
/// `kappa_perp2 = ε₁⊥ξ²/c²`, `kappa_par2 = ε₁∥ξ²/c²`, `ratio = ε₁∥/ε₁⊥`.
#[inline]
pub(crate) fn f_tilde_from_parts(
    q2: f64,
    cos2: f64,
    rho1_perp: f64,
    kappa_perp2: f64,
    kappa_par2: f64,
    ratio: f64,
    form: FTildeForm,
) -> f64 {
    let aniso = ratio - 1.0;
    if aniso == 0.0 {
        return 0.0;
    }
    match form {
        FTildeForm::Extraordinary => {
            let rho_e = (q2 * aniso * cos2 + q2 + kappa_par2).sqrt();
            -aniso / (rho_e + rho1_perp)
        }
        FTildeForm::OrdinaryRoot => {
            let root = (q2 * aniso * cos2 + rho1_perp * rho1_perp).sqrt();
            if kappa_perp2 == 0.0 {
                // Q²cos²φ cancels between numerator and denominator
                -aniso / (root + rho1_perp)
            } else {
                -aniso * q2 * cos2 / ((root + rho1_perp) * (q2 * cos2 + kappa_perp2))
            }
        }
    }
}

/// f̃(Q, φ) for the plate at the n-th Matsubara frequency.
pub fn f_tilde(
    q: f64,
    phi: f64,
    n: u32,
    plate: &BirefringentMaterial,
    temperature: f64,
    form: FTildeForm,
) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::domain(format!("Q must be >= 0, got {q:e}")));
    }
    let xi = matsubara_frequency(n, temperature)?;
    let e_perp = plate.eps_perp.at(xi);
    let e_par = plate.eps_par.at(xi);
    let xi_c2 = (xi / C) * (xi / C);
    let rho1 = if xi == 0.0 { q } else { (q * q + e_perp * xi_c2).sqrt() };
    Ok(f_tilde_from_parts(
        q * q,
        phi.cos().powi(2),
        rho1,
        e_perp * xi_c2,
        e_par * xi_c2,
        e_par / e_perp,
        form,
    ))
}

/// Trigonometric factors of one (φ, θ) pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AngleFactors {
    sin_phi: f64,
    sin2_phi: f64,
    cos2_phi: f64,
    cos_2phi: f64,
    sin_pt: f64,
    sin_2pt: f64,
    cos_p2t: f64,
    sin_t: f64,
    cos_t: f64,
    sin_2t: f64,
}

impl AngleFactors {
    pub(crate) fn new(phi: f64, theta: f64) -> Self {
        let (sin_phi, cos_phi) = phi.sin_cos();
        let (sin_t, cos_t) = theta.sin_cos();
        AngleFactors {
            sin_phi,
            sin2_phi: sin_phi * sin_phi,
            cos2_phi: cos_phi * cos_phi,
            cos_2phi: (2.0 * phi).cos(),
            sin_pt: (phi + theta).sin(),
            sin_2pt: (2.0 * (phi + theta)).sin(),
            cos_p2t: (phi + 2.0 * theta).cos(),
            sin_t,
            cos_t,
            sin_2t: (2.0 * theta).sin(),
        }
    }

    #[inline]
    pub(crate) fn cos2_phi(&self) -> f64 {
        self.cos2_phi
    }
}

/// Scalar inputs of the kernel at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeValues {
    pub q2: f64,
    pub rho1: f64,
    pub rho3: f64,
    pub f_tilde: f64,
    pub eps1_perp: f64,
    pub eps3: f64,
    pub delta_perp: f64,
    pub delta_par: f64,
}

/// Returns (N, ∂N/∂θ, D).
///
/// The θ-derivative differentiates the three θ-dependent factors
/// sin²(φ+θ), sinφ cosθ sin(φ+θ) and sin²θ analytically.
#[inline]
pub(crate) fn kernel_parts(v: &NodeValues, a: &AngleFactors) -> (f64, f64, f64) {
    let q2 = v.q2;
    let (r1, r3) = (v.rho1, v.rho3);
    let r3_2 = r3 * r3;
    let s2 = a.sin2_phi;
    let fe = v.f_tilde * v.eps1_perp;
    let d_eps = v.eps1_perp - v.eps3;

    let aniso = 0.5 * v.delta_par - v.delta_perp;
    let bracket = fe * (q2 * s2 * (r1 + r3) + r1 * r3 * (r3 - r1)) + d_eps * (r3 * (r1 + 2.0 * r3) - q2);
    let cross = 2.0 * fe * r1 * r3_2;
    let inner_rest = fe * r3_2 * (q2 * s2 * (r1 - r3) + r1 * r3 * (r1 + r3)) - r3_2 * d_eps * (q2 + r1 * r3);
    let outer = 2.0 * v.f_tilde * v.delta_perp * v.eps1_perp
        * (q2 * s2 * (q2 * r1 - r3_2 * r3) + r1 * r3_2 * (q2 * a.cos_2phi + r1 * r3))
        - v.delta_perp * d_eps * ((q2 + r3_2) * (q2 + r1 * r3) + (q2 - r3_2) * (q2 - r1 * r3));

    let n = aniso
        * (q2 * a.sin_pt * a.sin_pt * bracket
            - cross * (2.0 * q2 * a.sin_phi * a.cos_t * a.sin_pt + r3_2 * a.sin_t * a.sin_t)
            + inner_rest)
        + outer;
    let dn = aniso
        * (q2 * a.sin_2pt * bracket - cross * (2.0 * q2 * a.sin_phi * a.cos_p2t + r3_2 * a.sin_2t));
    let d = r3 * (r1 + r3) * (fe * (q2 * s2 - r1 * r3) + v.eps1_perp * r3 + v.eps3 * r1);
    (n, dn, d)
}

impl KernelContext {
    fn node_values(&self) -> NodeValues {
        NodeValues {
            q2: self.q * self.q,
            rho1: self.rho1_perp,
            rho3: self.rho3,
            f_tilde: self.f_tilde,
            eps1_perp: self.eps1_perp,
            eps3: self.eps3,
            delta_perp: self.delta_perp,
            delta_par: self.delta_par,
        }
    }

    fn parts(&self) -> (f64, f64, f64) {
        kernel_parts(&self.node_values(), &AngleFactors::new(self.phi, self.theta))
    }
}

/// Numerator N of the kernel.
pub fn kernel_n(c: &KernelContext) -> f64 {
    c.parts().0
}

/// ∂N/∂θ.
pub fn kernel_n_dtheta(c: &KernelContext) -> f64 {
    c.parts().1
}

/// Denominator D of the kernel.
pub fn kernel_d(c: &KernelContext) -> f64 {
    c.parts().2
}

/// D with a degeneracy check against a machine-precision floor scaled by the
/// magnitude of its terms.
pub fn kernel_d_checked(c: &KernelContext) -> Result<f64> {
    let q2 = c.q * c.q;
    let s2 = c.phi.sin().powi(2);
    let (r1, r3) = (c.rho1_perp, c.rho3);
    let scale = r3
        * (r1 + r3)
        * ((c.eps1_perp * c.f_tilde * (q2 * s2 - r1 * r3)).abs() + c.eps1_perp * r3 + c.eps3 * r1);
    let value = kernel_d(c);
    let floor = 64.0 * f64::EPSILON * scale;
    if !(value.abs() > floor) {
        return Err(Error::DegenerateDenominator { value, floor });
    }
    Ok(value)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::materials::{catalog, MaterialSet};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const D: f64 = 266e-9;

    fn batio3() -> MaterialSet {
        MaterialSet::with_plate("batio3").unwrap()
    }

    fn ctx(q: f64, phi: f64, theta: f64, n: u32, form: FTildeForm) -> KernelContext {
        let m = batio3();
        let xi = matsubara_frequency(n, 300.0).unwrap();
        KernelContext::new(q, phi, theta, D, &m.sample(xi), form)
    }

    /// Straight transcription of the printed expressions, no rearrangement.
    fn naive(c: &KernelContext, root_eps: f64, xi: f64) -> (f64, f64, f64) {
        let q = c.q;
        let (phi, th) = (c.phi, c.theta);
        let (e1p, e3) = (c.eps1_perp, c.eps3);
        let (r1, r3) = (c.rho1_perp, c.rho3);
        let (dp, da) = (c.delta_perp, c.delta_par);
        let r1root = (q * q + root_eps * xi * xi / (C * C)).sqrt();
        let ft = ((q * q * (c.eps1_par / e1p - 1.0) * phi.cos().powi(2) + r1root * r1root).sqrt() - r1)
            / (q * q * phi.sin().powi(2) - r1 * r1);
        let n = (da / 2.0 - dp)
            * (q * q
                * (phi + th).sin().powi(2)
                * (ft * e1p * (q * q * phi.sin().powi(2) * (r1 + r3) + r1 * r3 * (r3 - r1))
                    + (e1p - e3) * (r3 * (r1 + 2.0 * r3) - q * q))
                - 2.0 * ft * e1p * r1 * r3 * r3
                    * (2.0 * q * q * phi.sin() * th.cos() * (phi + th).sin() + r3 * r3 * th.sin().powi(2))
                + ft * e1p * r3 * r3 * (q * q * phi.sin().powi(2) * (r1 - r3) + r1 * r3 * (r1 + r3))
                + r3 * r3 * (e3 - e1p) * (q * q + r1 * r3))
            + 2.0 * ft * dp * e1p
                * (q * q * phi.sin().powi(2) * (q * q * r1 - r3.powi(3))
                    + r1 * r3 * r3 * (q * q * (2.0 * phi).cos() + r1 * r3))
            - dp * (e1p - e3)
                * ((q * q + r3 * r3) * (q * q + r1 * r3) + (q * q - r3 * r3) * (q * q - r1 * r3));
        let d = r3 * (r1 + r3) * (e1p * ft * (q * q * phi.sin().powi(2) - r1 * r3) + e1p * r3 + e3 * r1);
        (ft, n, d)
    }

    #[test]
    fn golden_spot_extraordinary() {
        let c = ctx(1.0 / D, 1.0, PI / 4.0, 1, FTildeForm::Extraordinary);
        assert_relative_eq!(c.f_tilde, -7.4623420983623756e-7, max_relative = 1e-12);
        assert_relative_eq!(kernel_n(&c), -2.2545437655968422e28, max_relative = 1e-11);
        assert_relative_eq!(kernel_d(&c), 8.5043524258889138e21, max_relative = 1e-12);
    }

    #[test]
    fn golden_spot_ordinary_root() {
        let c = ctx(1.0 / D, 1.0, PI / 4.0, 1, FTildeForm::OrdinaryRoot);
        assert_relative_eq!(c.f_tilde, -2.6716894020380779e-7, max_relative = 1e-12);
        assert_relative_eq!(kernel_n(&c), -1.2811345875414693e28, max_relative = 1e-11);
        assert_relative_eq!(kernel_d(&c), 4.9400853834139556e21, max_relative = 1e-12);
    }

    #[test]
    fn removable_point_of_ordinary_root() {
        let q = 1.0 / D;
        let m = batio3();
        let s = m.sample(0.0);
        let ratio = s.eps1_par / s.eps1_perp;
        let at = f_tilde(q, PI / 2.0, 0, &m.plate, 300.0, FTildeForm::OrdinaryRoot).unwrap();
        assert!(at.is_finite());
        // series limit of (sqrt(1 + (r-1)c²) - 1) / (-c²) / Q
        assert_relative_eq!(at, -(ratio - 1.0) / (2.0 * q), max_relative = 1e-12);
        for phi in [PI / 2.0 - 1e-6, PI / 2.0 + 1e-6] {
            let near = f_tilde(q, phi, 0, &m.plate, 300.0, FTildeForm::OrdinaryRoot).unwrap();
            assert_relative_eq!(at, near, max_relative = 1e-10);
            // the printed form loses ~12 digits to cancellation here (cos²φ ~ 1e-12)
            let c = KernelContext::new(q, phi, 0.3, D, &s, FTildeForm::OrdinaryRoot);
            let (ft, _, _) = naive(&c, s.eps1_perp, 0.0);
            assert_relative_eq!(at, ft, max_relative = 1e-3);
        }
    }

    #[test]
    fn vacuum_denominator_at_zero_frequency() {
        let s = ResponseSample { xi: 0.0, eps1_perp: 1.0, eps1_par: 1.0, eps2_perp: 1.0, eps2_par: 1.0, eps3: 1.0 };
        for q in [1e5, 1.0 / D, 3e8] {
            let c = KernelContext::new(q, 0.7, 0.2, D, &s, FTildeForm::Extraordinary);
            assert_relative_eq!(kernel_d(&c), 4.0 * q.powi(3), max_relative = 1e-14);
            assert_eq!(kernel_n(&c), 0.0);
            assert_eq!(c.f_tilde, 0.0);
        }
    }

    #[test]
    fn isotropic_plate_denominator_drops_f_term() {
        let iso = catalog::barium_titanate().isotropic_from_perp();
        let xi = matsubara_frequency(3, 300.0).unwrap();
        let s = ResponseSample {
            xi,
            eps1_perp: iso.eps_perp.at(xi),
            eps1_par: iso.eps_par.at(xi),
            eps2_perp: 2.0,
            eps2_par: 2.0,
            eps3: 1.0,
        };
        let c = KernelContext::new(2e6, 1.1, 0.4, D, &s, FTildeForm::Extraordinary);
        assert_eq!(c.f_tilde, 0.0);
        let (r1, r3) = (c.rho1_perp, c.rho3);
        assert_relative_eq!(kernel_d(&c), r3 * (r1 + r3) * (s.eps1_perp * r3 + r1), max_relative = 1e-14);
        assert!(kernel_d_checked(&c).is_ok());
    }

    proptest! {
        #[test]
        fn matches_transcription(
            q in 1e5f64..5e7,
            phi in 0.0f64..(2.0 * PI),
            theta in 0.0f64..PI,
            n in 0u32..40,
            ordinary in any::<bool>(),
        ) {
            let m = batio3();
            let xi = matsubara_frequency(n, 300.0).unwrap();
            let s = m.sample(xi);
            let form = if ordinary { FTildeForm::OrdinaryRoot } else { FTildeForm::Extraordinary };
            let c = KernelContext::new(q, phi, theta, D, &s, form);
            let root_eps = if ordinary { s.eps1_perp } else { s.eps1_par };
            // keep away from the removable point, where the printed form is 0/0
            prop_assume!((q * q * phi.sin().powi(2) - c.rho1_perp.powi(2)).abs() > 1e-6 * c.rho1_perp.powi(2));
            let (ft, n_ref, d_ref) = naive(&c, root_eps, xi);
            prop_assert!((c.f_tilde - ft).abs() <= 1e-8 * ft.abs() + 1e-300);
            // N is a sum of large terms of both signs; compare against their scale
            let scale = d_ref.abs() * q * q.max(c.rho3);
            prop_assert!((kernel_n(&c) - n_ref).abs() <= 1e-9 * scale.max(n_ref.abs()));
            prop_assert!((kernel_d(&c) - d_ref).abs() <= 1e-9 * d_ref.abs());
        }

        #[test]
        fn theta_period_is_pi(q in 1e5f64..5e7, phi in 0.0f64..(2.0 * PI), theta in 0.0f64..PI, n in 0u32..20) {
            let a = ctx(q, phi, theta, n, FTildeForm::Extraordinary);
            let b = ctx(q, phi, theta + PI, n, FTildeForm::Extraordinary);
            prop_assert!((kernel_n(&a) - kernel_n(&b)).abs() <= 1e-12 * kernel_n(&a).abs().max(1e-300) + 1e-3);
            prop_assert!((kernel_n_dtheta(&a) - kernel_n_dtheta(&b)).abs() <= 1e-10 * kernel_n_dtheta(&a).abs() + 1e-3);
        }

        #[test]
        fn theta_derivative_matches_difference(q in 1e5f64..5e7, phi in 0.0f64..(2.0 * PI), theta in 0.1f64..3.0, n in 0u32..20) {
            let h = 1e-5;
            let up = kernel_n(&ctx(q, phi, theta + h, n, FTildeForm::Extraordinary));
            let dn = kernel_n(&ctx(q, phi, theta - h, n, FTildeForm::Extraordinary));
            let fd = (up - dn) / (2.0 * h);
            let exact = kernel_n_dtheta(&ctx(q, phi, theta, n, FTildeForm::Extraordinary));
            let scale = up.abs().max(dn.abs());
            prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd:e} vs {exact:e}");
        }

        #[test]
        fn denominator_positive_for_physical_media(
            q in 1e4f64..1e8,
            phi in 0.0f64..(2.0 * PI),
            e1p in 1.0f64..5000.0,
            e1a in 1.0f64..5000.0,
            e2 in 1.0f64..20.0,
            xi in 0.0f64..1e17,
        ) {
            let s = ResponseSample { xi, eps1_perp: e1p, eps1_par: e1a, eps2_perp: e2, eps2_par: e2, eps3: 1.0 };
            for form in [FTildeForm::Extraordinary, FTildeForm::OrdinaryRoot] {
                let c = KernelContext::new(q, phi, 0.5, D, &s, form);
                prop_assert!(kernel_d(&c) > 0.0);
                prop_assert!(c.rho1_perp >= q && c.rho3 >= q);
            }
        }

        #[test]
        fn isotropic_plate_has_zero_f(q in 0.0f64..1e8, phi in 0.0f64..(2.0 * PI), n in 0u32..50) {
            let plate = catalog::calcite().isotropic_from_perp();
            for form in [FTildeForm::Extraordinary, FTildeForm::OrdinaryRoot] {
                prop_assert_eq!(f_tilde(q, phi, n, &plate, 300.0, form).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn identical_media_give_zero_numerator() {
        let s = ResponseSample { xi: 1e15, eps1_perp: 2.5, eps1_par: 2.5, eps2_perp: 2.5, eps2_par: 2.5, eps3: 2.5 };
        let c = KernelContext::new(3e6, 0.8, 1.2, D, &s, FTildeForm::Extraordinary);
        assert_eq!(kernel_n(&c), 0.0);
    }

    #[test]
    fn negative_q_is_a_domain_error() {
        let p = catalog::calcite();
        assert!(f_tilde(-1.0, 0.0, 0, &p, 300.0, FTildeForm::Extraordinary).is_err());
    }
}
