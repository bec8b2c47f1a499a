//! Central potentials and the effective radial coefficient Q_l(r).
//!
//! The screened family connects the pure Coulomb attraction (α = 0) to
//! exponentially short-ranged interactions: the static screened Coulomb
//! (Yukawa) form −Z e^{−αr}/r, the Hulthén form −Z α e^{−αr}/(1 − e^{−αr})
//! and the exponential-cosine screened form −Z e^{−αr} cos(αr)/r.
//! Derivatives are analytic throughout; nothing here differentiates
//! numerically.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Free,
    Coulomb { z: f64 },
    ScreenedCoulomb { z: f64, alpha: f64 },
    Hulthen { z: f64, alpha: f64 },
    ExpCosScreenedCoulomb { z: f64, alpha: f64 },
}

impl PotentialKind {
    /// Builds a potential from its CLI tag (case-insensitive):
    /// free | coulomb | scp | hulthen | ecscp.
    pub fn from_tag(tag: &str, z: f64, alpha: f64) -> Result<Self> {
        let kind = match tag.to_ascii_lowercase().as_str() {
            "free" => PotentialKind::Free,
            "coulomb" => PotentialKind::Coulomb { z },
            "scp" => PotentialKind::ScreenedCoulomb { z, alpha },
            "hulthen" => PotentialKind::Hulthen { z, alpha },
            "ecscp" => PotentialKind::ExpCosScreenedCoulomb { z, alpha },
            other => {
                return Err(Error::Config(format!(
                    "unknown potential tag '{other}' (expected free|coulomb|scp|hulthen|ecscp)"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            PotentialKind::Free => "free",
            PotentialKind::Coulomb { .. } => "coulomb",
            PotentialKind::ScreenedCoulomb { .. } => "scp",
            PotentialKind::Hulthen { .. } => "hulthen",
            PotentialKind::ExpCosScreenedCoulomb { .. } => "ecscp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialKind::Free => Ok(()),
            PotentialKind::Coulomb { z } => {
                if z > 0.0 && z.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("charge Z must be positive, got {z}")))
                }
            }
            PotentialKind::ScreenedCoulomb { z, alpha }
            | PotentialKind::Hulthen { z, alpha }
            | PotentialKind::ExpCosScreenedCoulomb { z, alpha } => {
                if !(z > 0.0 && z.is_finite()) {
                    Err(Error::Config(format!("charge Z must be positive, got {z}")))
                } else if alpha >= 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "screening parameter alpha must be non-negative, got {alpha}"
                    )))
                }
            }
        }
    }

    /// Screening parameter, 0 for the unscreened variants.
    pub fn alpha(&self) -> f64 {
        match *self {
            PotentialKind::Free | PotentialKind::Coulomb { .. } => 0.0,
            PotentialKind::ScreenedCoulomb { alpha, .. }
            | PotentialKind::Hulthen { alpha, .. }
            | PotentialKind::ExpCosScreenedCoulomb { alpha, .. } => alpha,
        }
    }

    pub fn charge(&self) -> f64 {
        match *self {
            PotentialKind::Free => 0.0,
            PotentialKind::Coulomb { z }
            | PotentialKind::ScreenedCoulomb { z, .. }
            | PotentialKind::Hulthen { z, .. }
            | PotentialKind::ExpCosScreenedCoulomb { z, .. } => z,
        }
    }

    pub fn is_screened(&self) -> bool {
        matches!(
            self,
            PotentialKind::ScreenedCoulomb { .. }
                | PotentialKind::Hulthen { .. }
                | PotentialKind::ExpCosScreenedCoulomb { .. }
        )
    }

    /// V(r) for r > 0.
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("potential requires r > 0, got {r}")));
        }
        Ok(self.value_unchecked(r))
    }

    pub(crate) fn value_unchecked(&self, r: f64) -> f64 {
        match *self {
            PotentialKind::Free => 0.0,
            PotentialKind::Coulomb { z } => -z / r,
            PotentialKind::ScreenedCoulomb { z, alpha } => -z * (-alpha * r).exp() / r,
            PotentialKind::Hulthen { z, alpha } => {
                if alpha == 0.0 {
                    return -z / r;
                }
                // −Zα e^{−αr} / (1 − e^{−αr}); the denominator via expm1
                // keeps small αr accurate.
                let e = (-alpha * r).exp();
                z * alpha * e / (-alpha * r).exp_m1()
            }
            PotentialKind::ExpCosScreenedCoulomb { z, alpha } => {
                -z * (-alpha * r).exp() * (alpha * r).cos() / r
            }
        }
    }

    /// dV/dr for r > 0, analytic per variant.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "potential derivative requires r > 0, got {r}"
            )));
        }
        Ok(self.derivative_unchecked(r))
    }

    pub(crate) fn derivative_unchecked(&self, r: f64) -> f64 {
        match *self {
            PotentialKind::Free => 0.0,
            PotentialKind::Coulomb { z } => z / (r * r),
            PotentialKind::ScreenedCoulomb { z, alpha } => {
                z * (-alpha * r).exp() * (1.0 + alpha * r) / (r * r)
            }
            PotentialKind::Hulthen { z, alpha } => {
                if alpha == 0.0 {
                    return z / (r * r);
                }
                let e = (-alpha * r).exp();
                let denom = -(-alpha * r).exp_m1(); // 1 − e^{−αr}
                z * alpha * alpha * e / (denom * denom)
            }
            PotentialKind::ExpCosScreenedCoulomb { z, alpha } => {
                let x = alpha * r;
                let e = (-x).exp();
                z * e * ((1.0 + x) * x.cos() + x * x.sin()) / (r * r)
            }
        }
    }
}

/// Physical problem definition: angular momentum, momentum k = √(2E) and
/// the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialContext {
    pub l: u32,
    pub k: f64,
    pub potential: PotentialKind,
}

impl RadialContext {
    pub fn new(l: u32, k: f64, potential: PotentialKind) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("momentum k must be positive, got {k}")));
        }
        potential.validate()?;
        Ok(Self { l, k, potential })
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.k * self.k
    }

    fn l_term(&self) -> f64 {
        (self.l as f64) * (self.l as f64 + 1.0)
    }

    /// Q_l(r) = k² − l(l+1)/r² − 2V(r).
    pub fn q_value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("Q_l requires r > 0, got {r}")));
        }
        Ok(self.q_unchecked(r))
    }

    pub(crate) fn q_unchecked(&self, r: f64) -> f64 {
        self.k * self.k - self.l_term() / (r * r) - 2.0 * self.potential.value_unchecked(r)
    }

    /// dQ_l/dr = 2l(l+1)/r³ − 2 dV/dr.
    pub fn q_derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("dQ_l/dr requires r > 0, got {r}")));
        }
        Ok(self.q_derivative_unchecked(r))
    }

    pub(crate) fn q_derivative_unchecked(&self, r: f64) -> f64 {
        2.0 * self.l_term() / (r * r * r) - 2.0 * self.potential.derivative_unchecked(r)
    }

    /// Q_l(1/ρ) = k² − l(l+1)ρ² − 2V(1/ρ), the coefficient seen by the
    /// inverted-coordinate solvers. At ρ = 0 this is the analytic limit k².
    pub(crate) fn q_at_inverse(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return self.k * self.k;
        }
        self.k * self.k
            - self.l_term() * rho * rho
            - 2.0 * self.potential.value_unchecked(1.0 / rho)
    }

    /// dQ_l/dr evaluated at r = 1/ρ and divided by ρ², kept in a form that
    /// stays finite as ρ → 0: 2l(l+1)ρ − 2V'(1/ρ)/ρ².
    pub(crate) fn q_derivative_at_inverse_over_rho2(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            // Coulomb-tailed potentials approach −2·limit(V'r²) = −2Z; the
            // solvers only collocate at interior nodes, so this is cosmetic.
            return 2.0 * self.l_term() * rho;
        }
        let r = 1.0 / rho;
        2.0 * self.l_term() * rho
            - 2.0 * self.potential.derivative_unchecked(r) / (rho * rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scp_alpha_zero_is_coulomb() {
        let scp = PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 0.0 };
        assert_relative_eq!(scp.value(2.0).unwrap(), -0.5, max_relative = 1e-15);
    }

    #[test]
    fn hulthen_value() {
        let hp = PotentialKind::Hulthen { z: 1.0, alpha: 1.0 };
        let expected = -(-1.0_f64).exp() / (1.0 - (-1.0_f64).exp());
        assert_relative_eq!(hp.value(1.0).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(hp.value(1.0).unwrap(), -0.5819767068693265, max_relative = 1e-12);
    }

    #[test]
    fn hulthen_tanh_form_equivalence() {
        // The same potential written with tanh:
        // e^{-αr}/(1 + e^{-αr}) · Zα / tanh(-αr/2) since
        // tanh(-x/2) = -(1 - e^{-x})/(1 + e^{-x}).
        let z = 1.0;
        let alpha = 0.7;
        let hp = PotentialKind::Hulthen { z, alpha };
        for r in [0.05, 0.3, 1.0, 4.0, 12.0] {
            let e = (-alpha * r).exp();
            let tanh_form = e / (1.0 + e) * z * alpha / (-alpha * r / 2.0).tanh();
            assert_relative_eq!(hp.value(r).unwrap(), tanh_form, max_relative = 1e-13);
        }
    }

    #[test]
    fn ecscp_cosine_zero() {
        let alpha = 2.0;
        let r = std::f64::consts::FRAC_PI_2 / alpha;
        let p = PotentialKind::ExpCosScreenedCoulomb { z: 1.0, alpha };
        assert_relative_eq!(p.value(r).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn coulomb_derivative() {
        let p = PotentialKind::Coulomb { z: 1.0 };
        assert_relative_eq!(p.derivative(2.0).unwrap(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn free_derivative_zero() {
        let p = PotentialKind::Free;
        for r in [0.01, 1.0, 500.0] {
            assert_eq!(p.derivative(r).unwrap(), 0.0);
        }
    }

    fn finite_difference(p: &PotentialKind, r: f64) -> f64 {
        let h = 1e-6 * r.max(1.0);
        (p.value(r + h).unwrap() - p.value(r - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cases = [
            PotentialKind::Coulomb { z: 1.0 },
            PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 1.0 },
            PotentialKind::ScreenedCoulomb { z: 2.0, alpha: 0.2 },
            PotentialKind::Hulthen { z: 1.0, alpha: 1.3 },
            PotentialKind::ExpCosScreenedCoulomb { z: 1.0, alpha: 0.8 },
        ];
        for p in cases {
            for r in [0.1, 0.5, 1.0, 2.5, 7.0] {
                assert_relative_eq!(
                    p.derivative(r).unwrap(),
                    finite_difference(&p, r),
                    max_relative = 1e-8,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn scp_derivative_spot_check() {
        let p = PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 1.0 };
        assert_relative_eq!(
            p.derivative(1.0).unwrap(),
            finite_difference(&p, 1.0),
            max_relative = 1e-9
        );
    }

    #[test]
    fn screened_family_approaches_coulomb() {
        let alpha = 1e-8;
        let coulomb = PotentialKind::Coulomb { z: 1.0 };
        let family = [
            PotentialKind::ScreenedCoulomb { z: 1.0, alpha },
            PotentialKind::Hulthen { z: 1.0, alpha },
            PotentialKind::ExpCosScreenedCoulomb { z: 1.0, alpha },
        ];
        for p in family {
            for r in [0.1, 1.0, 10.0] {
                let v = p.value(r).unwrap();
                let vc = coulomb.value(r).unwrap();
                assert!(
                    (v - vc).abs() <= 1.0 * alpha * 2.0,
                    "{p:?} at r = {r}: {v} vs {vc}"
                );
            }
        }
    }

    #[test]
    fn hulthen_small_r_coulomb_tail() {
        let hp = PotentialKind::Hulthen { z: 1.0, alpha: 1.0 };
        let r = 1e-6;
        assert_relative_eq!(r * hp.value(r).unwrap(), -1.0, max_relative = 1e-5);
    }

    #[test]
    fn hulthen_large_r_is_stable() {
        let hp = PotentialKind::Hulthen { z: 1.0, alpha: 100.0 };
        let v = hp.value(50.0).unwrap();
        assert!(v.is_finite());
        assert!(v.abs() < 1e-300);
        assert!(hp.derivative(50.0).unwrap().is_finite());
    }

    #[test]
    fn q_values() {
        let coulomb = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
        assert_relative_eq!(coulomb.q_value(1.0).unwrap(), 3.0, max_relative = 1e-15);

        let free = RadialContext::new(1, 1.0, PotentialKind::Free).unwrap();
        assert_relative_eq!(free.q_value(2.0).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn q_derivative_matches_finite_difference() {
        let ctx = RadialContext::new(
            2,
            1.0,
            PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 0.5 },
        )
        .unwrap();
        let mut state = 0xdeadbeefcafe1234_u64;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = 0.2 + (state >> 11) as f64 / (1u64 << 53) as f64 * 9.0;
            let h = 1e-6 * r;
            let fd = (ctx.q_value(r + h).unwrap() - ctx.q_value(r - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(ctx.q_derivative(r).unwrap(), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn inverse_coordinate_helpers() {
        let ctx = RadialContext::new(1, 1.2, PotentialKind::Coulomb { z: 1.0 }).unwrap();
        let rho = 0.25;
        let r = 1.0 / rho;
        assert_relative_eq!(ctx.q_at_inverse(rho), ctx.q_value(r).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(
            ctx.q_derivative_at_inverse_over_rho2(rho),
            ctx.q_derivative(r).unwrap() / (rho * rho),
            max_relative = 1e-13
        );
        assert_eq!(ctx.q_at_inverse(0.0), 1.2 * 1.2);
    }

    #[test]
    fn domain_errors() {
        let p = PotentialKind::Coulomb { z: 1.0 };
        assert!(p.value(0.0).is_err());
        assert!(p.value(-1.0).is_err());
        assert!(p.derivative(0.0).is_err());
        let ctx = RadialContext::new(0, 1.0, p).unwrap();
        assert!(ctx.q_value(0.0).is_err());
        assert!(RadialContext::new(0, 0.0, p).is_err());
        assert!(RadialContext::new(0, -2.0, p).is_err());
        assert!(PotentialKind::from_tag("nope", 1.0, 0.0).is_err());
        assert!(PotentialKind::from_tag("scp", 1.0, -0.5).is_err());
        assert!(PotentialKind::from_tag("coulomb", 0.0, 0.0).is_err());
    }

    #[test]
    fn tags_round_trip() {
        for tag in ["free", "coulomb", "scp", "hulthen", "ecscp"] {
            let p = PotentialKind::from_tag(tag, 1.0, 0.3).unwrap();
            assert_eq!(p.tag(), tag);
        }
        assert_eq!(
            PotentialKind::from_tag("SCP", 1.0, 0.3).unwrap().tag(),
            "scp"
        );
    }
}
