//! Inner regular solution, its first root r_π, and the synchronized phase.
//!
//! The phase satisfies Φ̇ = W/Y with W = 2/π, so it is known up to one
//! integration constant. With the convention Φ(0) = 0 for the reduced
//! solution, the phase gains π at every node of S, and anchoring at the
//! first node r_π of an arbitrarily normalized regular solution gives
//!
//!   Φ(r) = π + W ∫_{r_π}^{r} dx / Y(x),
//!
//! valid for every r ≥ r_min once Y is known.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::amplitude::{AmplitudeGeometry, AmplitudeSolution};
use crate::error::{Error, Result};
use crate::mesh::{legendre_nodes, propagate, Coordinate, Mesh, PiecewiseSolution};
use crate::potentials::RadialContext;
use crate::taylor::TaylorSeries;
use crate::WRONSKIAN;

/// Regular solution with arbitrary normalization on r ∈ [0, r_end].
#[derive(Debug, Clone)]
pub struct InnerSolution {
    ctx: RadialContext,
    psi: PiecewiseSolution,
    r_end: f64,
}

/// Points sampled per element when scanning for sign changes.
const SCAN_POINTS: usize = 64;

/// Forward-propagates the reduced radial equation ψ″ + Qψ = 0 on a uniform
/// mesh of element size ≈ (π/k)/8, enforcing the regular branch on the
/// first element by pinning C_0 … C_l = 0 and C_{l+1} = 1 (the small-r
/// behaviour ψ ~ r^{l+1}, at arbitrary scale). Extends r_end twice (×2,
/// ×4) if no sign change is found.
pub fn solve_inner_regular(ctx: &RadialContext, r_end: f64) -> Result<InnerSolution> {
    solve_inner_regular_with(ctx, r_end, 12)
}

pub fn solve_inner_regular_with(
    ctx: &RadialContext,
    r_end: f64,
    order: usize,
) -> Result<InnerSolution> {
    if !(r_end > 0.0) || !r_end.is_finite() {
        return Err(Error::Config(format!("r_end must be positive, got {r_end}")));
    }
    let mut last_err = None;
    for extension in [1.0, 2.0, 4.0] {
        let span = r_end * extension;
        // element size from the oscillation scale, shrunk if the screening
        // length is shorter
        let mut h = PI / ctx.k / 8.0;
        let alpha = ctx.potential.alpha();
        if alpha > 0.0 {
            h = h.min(0.7 / alpha);
        }
        let elements = ((span / h).ceil() as usize).max(2);
        let mesh = Mesh::uniform(0.0, span, elements, Coordinate::Radius)?;
        let first_nu = ctx.l as usize + 2;
        let mut known = vec![0.0; first_nu];
        known[first_nu - 1] = 1.0;
        let ctx_copy = *ctx;
        let psi = propagate(
            &mesh,
            move |_index, a, _b| {
                move |x: f64, s: &TaylorSeries| {
                    s.eval(x, 2) + ctx_copy.q_unchecked(a + x) * s.eval(x, 0)
                }
            },
            &known,
            first_nu,
            2,
            order,
        )?;
        let solution = InnerSolution {
            ctx: *ctx,
            psi,
            r_end: span,
        };
        if solution.first_sign_change().is_some() {
            return Ok(solution);
        }
        last_err = Some(Error::RootNotFound { r_end: span });
    }
    Err(last_err.unwrap())
}

impl InnerSolution {
    pub fn ctx(&self) -> &RadialContext {
        &self.ctx
    }

    pub fn r_end(&self) -> f64 {
        self.r_end
    }

    pub fn psi(&self) -> &PiecewiseSolution {
        &self.psi
    }

    /// ψ at r (arbitrary normalization).
    pub fn eval(&self, r: f64, deriv_order: usize) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::Domain(format!("inner solution requires r >= 0, got {r}")));
        }
        self.psi.eval(r, deriv_order)
    }

    /// Bracket around the first sign change of ψ, from a scan of
    /// `SCAN_POINTS` samples per element (r = 0 itself excluded).
    fn first_sign_change(&self) -> Option<(f64, f64)> {
        let mut prev: Option<(f64, f64)> = None;
        for element in self.psi.elements() {
            for i in 1..=SCAN_POINTS {
                let x = element.width() * i as f64 / SCAN_POINTS as f64;
                let r = element.center() + x;
                let v = element.eval(x, 0);
                if v == 0.0 {
                    continue;
                }
                if let Some((r0, v0)) = prev {
                    if v0 * v < 0.0 {
                        return Some((r0, r));
                    }
                }
                prev = Some((r, v));
            }
        }
        None
    }

    fn scan_scale(&self) -> f64 {
        let mut scale = 0.0_f64;
        for element in self.psi.elements() {
            for i in 1..=SCAN_POINTS {
                let x = element.width() * i as f64 / SCAN_POINTS as f64;
                scale = scale.max(element.eval(x, 0).abs());
            }
        }
        scale
    }
}

/// Smallest r > 0 with ψ(r) = 0: bracketed by the sign-change scan, then
/// polished by Newton steps on the element series, falling back to
/// bisection whenever a step would leave the bracket.
pub fn find_r_pi(inner: &InnerSolution) -> Result<f64> {
    let (mut lo, mut hi) = inner
        .first_sign_change()
        .ok_or(Error::RootNotFound {
            r_end: inner.r_end,
        })?;
    let scale = inner.scan_scale();
    let mut f_lo = inner.eval(lo, 0)?;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let f = inner.eval(x, 0)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f * f_lo > 0.0 {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let slope = inner.eval(x, 1)?;
        let mut next = x - f / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if f.abs() <= 1e-14 * scale && step <= 1e-14 * x {
            return Ok(x);
        }
    }
    if hi - lo <= 1e-12 * x {
        Ok(x)
    } else {
        Err(Error::Oracle(format!(
            "root polish stalled on bracket [{lo}, {hi}]"
        )))
    }
}

/// Synchronized phase: Φ(r_π) = π by construction, Φ̇ = W/Y > 0.
#[derive(Debug, Clone)]
pub struct PhaseSolution {
    amp: Arc<AmplitudeSolution>,
    r_pi: f64,
    /// fulls[j]: ∫ dr/Y over the r-extent of mesh element j. On the
    /// inverted-coordinate mesh, element 0 (touching ρ = 0) has an
    /// unbounded image and is never pre-integrated.
    fulls: Vec<f64>,
    /// prefix[j] = Σ_{i<=j} fulls[i].
    prefix: Vec<f64>,
    quad_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
}

/// Builds the phase from the amplitude and the root r_π. The amplitude
/// must reach below the anchor: r_min < r_π.
pub fn build_phase(amp: Arc<AmplitudeSolution>, r_pi: f64) -> Result<PhaseSolution> {
    let order = amp.expansion_order();
    build_phase_with_quadrature(amp, r_pi, order)
}

/// As [`build_phase`] with an explicit Gauss–Legendre panel order;
/// doubling the order is the quadrature self-consistency audit.
pub fn build_phase_with_quadrature(
    amp: Arc<AmplitudeSolution>,
    r_pi: f64,
    order: usize,
) -> Result<PhaseSolution> {
    if amp.r_min() >= r_pi {
        return Err(Error::Config(format!(
            "r_min = {} must lie strictly below the first node r_pi = {}",
            amp.r_min(),
            r_pi
        )));
    }
    let (quad_nodes, quad_weights) = legendre_nodes(order.max(4))?;
    let mut phase = PhaseSolution {
        amp,
        r_pi,
        fulls: Vec::new(),
        prefix: Vec::new(),
        quad_nodes,
        quad_weights,
    };
    let mut fulls = Vec::new();
    match phase.amp.representation() {
        AmplitudeGeometry::InverseRadius { y } => {
            let mesh = y.mesh();
            fulls.resize(mesh.element_count(), 0.0);
            for (j, full) in fulls.iter_mut().enumerate().skip(1) {
                let (rho_a, rho_b) = mesh.interval(j);
                *full = phase.panel_integral(1.0 / rho_b, 1.0 / rho_a)?;
            }
        }
        AmplitudeGeometry::Radius { y, .. } => {
            let mesh = y.mesh();
            fulls.resize(mesh.element_count(), 0.0);
            for (j, full) in fulls.iter_mut().enumerate() {
                let (a, b) = mesh.interval(j);
                *full = phase.panel_integral(a, b)?;
            }
        }
    }
    let mut prefix = vec![0.0; fulls.len()];
    let mut acc = 0.0;
    for (p, f) in prefix.iter_mut().zip(&fulls) {
        acc += f;
        *p = acc;
    }
    phase.fulls = fulls;
    phase.prefix = prefix;
    Ok(phase)
}

impl PhaseSolution {
    pub fn r_pi(&self) -> f64 {
        self.r_pi
    }

    pub fn wronskian(&self) -> f64 {
        WRONSKIAN
    }

    pub fn amplitude(&self) -> &Arc<AmplitudeSolution> {
        &self.amp
    }

    /// ∫ dr/Y over [r1, r2] by Gauss–Legendre panels, geometrically split
    /// so no panel spans more than a factor 1.3 in r.
    fn panel_integral(&self, r1: f64, r2: f64) -> Result<f64> {
        if r2 <= r1 {
            return Ok(0.0);
        }
        let panels = ((r2 / r1).ln() / 1.3_f64.ln()).ceil().max(1.0) as usize;
        let ratio = (r2 / r1).powf(1.0 / panels as f64);
        let mut total = 0.0;
        let mut left = r1;
        for i in 0..panels {
            let right = if i + 1 == panels { r2 } else { left * ratio };
            let half = 0.5 * (right - left);
            let mid = 0.5 * (right + left);
            let mut acc = 0.0;
            for (t, w) in self.quad_nodes.iter().zip(&self.quad_weights) {
                let r = mid + half * t;
                acc += w / self.amp.y_value(r)?;
            }
            total += acc * half;
            left = right;
        }
        Ok(total)
    }

    /// ∫ dr/Y over [r_lo, r_hi] (requires r_lo ≤ r_hi), assembled from
    /// cached full-element integrals plus partial panels at the ends.
    fn integral_between(&self, r_lo: f64, r_hi: f64) -> Result<f64> {
        if r_hi <= r_lo {
            return Ok(0.0);
        }
        match self.amp.representation() {
            AmplitudeGeometry::InverseRadius { y } => {
                let mesh = y.mesh();
                // larger r ↔ smaller ρ ↔ smaller element index
                let j_lo = mesh.locate((1.0 / r_lo).min(mesh.end()))?;
                let j_hi = mesh.locate(1.0 / r_hi)?;
                if j_lo == j_hi {
                    return self.panel_integral(r_lo, r_hi);
                }
                debug_assert!(j_hi < j_lo);
                let upper_edge_of_lo = 1.0 / mesh.interval(j_lo).0;
                let lower_edge_of_hi = 1.0 / mesh.interval(j_hi).1;
                let mut total = self.panel_integral(r_lo, upper_edge_of_lo)?;
                if j_lo - j_hi >= 2 {
                    // fulls over elements j_hi+1 ..= j_lo−1
                    total += self.prefix[j_lo - 1] - self.prefix[j_hi];
                }
                total += self.panel_integral(lower_edge_of_hi, r_hi)?;
                Ok(total)
            }
            AmplitudeGeometry::Radius { y, r_top, .. } => {
                let geometry = self.amp.representation();
                let mut total = 0.0;
                // analytic tail piece, exact as a free-phase difference
                if r_hi > r_top {
                    let from = r_lo.max(r_top);
                    total += geometry.tail_phase_delta(from, r_hi).unwrap_or(0.0) / WRONSKIAN;
                }
                let mesh_hi = r_hi.min(r_top);
                if r_lo >= mesh_hi {
                    return Ok(total);
                }
                let mesh = y.mesh();
                let j_lo = mesh.locate(r_lo.max(mesh.start()))?;
                let j_hi = mesh.locate(mesh_hi)?;
                if j_lo == j_hi {
                    return Ok(total + self.panel_integral(r_lo, mesh_hi)?);
                }
                debug_assert!(j_lo < j_hi);
                total += self.panel_integral(r_lo, mesh.interval(j_lo).1)?;
                if j_hi - j_lo >= 2 {
                    // fulls over elements j_lo+1 ..= j_hi−1
                    total += self.prefix[j_hi - 1] - self.prefix[j_lo];
                }
                total += self.panel_integral(mesh.interval(j_hi).0, mesh_hi)?;
                Ok(total)
            }
        }
    }

    /// Φ(r) for r ≥ r_min.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let r_min = self.amp.r_min();
        if r < r_min * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "phase evaluated at r = {r} below r_min = {r_min}"
            )));
        }
        let r = r.max(r_min);
        let w = WRONSKIAN;
        if r >= self.r_pi {
            Ok(PI + w * self.integral_between(self.r_pi, r)?)
        } else {
            Ok(PI - w * self.integral_between(r, self.r_pi)?)
        }
    }

    /// dΦ/dr = W / Y(r).
    pub fn derivative(&self, r: f64) -> Result<f64> {
        Ok(WRONSKIAN / self.amp.y_value(r)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::{solve_amplitude, AmplitudeMethod};
    use crate::potentials::PotentialKind;
    use approx::assert_relative_eq;

    fn free_ctx(l: u32, k: f64) -> RadialContext {
        RadialContext::new(l, k, PotentialKind::Free).unwrap()
    }

    fn inner_free(l: u32) -> InnerSolution {
        let ctx = free_ctx(l, 1.0);
        let r_end = 1.5 * PI + l as f64;
        solve_inner_regular(&ctx, r_end).unwrap()
    }

    #[test]
    fn inner_free_l0_is_sine() {
        let inner = inner_free(0);
        // normalization-independent ratio
        let ratio = inner.eval(PI / 2.0, 0).unwrap() / inner.eval(1.0, 0).unwrap();
        assert_relative_eq!(ratio, 1.0 / 1.0_f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn inner_free_l1_is_spherical_bessel() {
        let inner = inner_free(1);
        let analytic = |r: f64| r.sin() / r - r.cos();
        let ratio = inner.eval(2.0, 0).unwrap() / inner.eval(1.0, 0).unwrap();
        assert_relative_eq!(ratio, analytic(2.0) / analytic(1.0), epsilon = 1e-11);
    }

    #[test]
    fn inner_small_r_branch() {
        // ψ ~ r^{l+1}: for l = 2, ψ(r)/r³ tends to 1/6 with C_3 = 1
        let inner = inner_free(2);
        let r = 1e-3;
        assert_relative_eq!(
            inner.eval(r, 0).unwrap() / (r * r * r),
            1.0 / 6.0,
            max_relative = 1e-6
        );
    }

    #[test]
    fn r_pi_free_l0() {
        let inner = inner_free(0);
        let r_pi = find_r_pi(&inner).unwrap();
        assert_relative_eq!(r_pi, PI, epsilon = 1e-13);
    }

    #[test]
    fn r_pi_free_l1() {
        // first positive root of tan x = x
        let inner = inner_free(1);
        let r_pi = find_r_pi(&inner).unwrap();
        assert_relative_eq!(r_pi, 4.493409457909064, epsilon = 1e-12);
    }

    #[test]
    fn inner_extension_recovers_late_root() {
        // deliberately too-short request still finds the sine root by extension
        let inner = solve_inner_regular(&free_ctx(0, 1.0), 1.0).unwrap();
        let r_pi = find_r_pi(&inner).unwrap();
        assert_relative_eq!(r_pi, PI, epsilon = 1e-12);
    }

    fn phase_free_l0() -> PhaseSolution {
        let ctx = free_ctx(0, 1.0);
        let amp = solve_amplitude(&ctx, 0.001, AmplitudeMethod::LinearThirdOrder, 12).unwrap();
        build_phase(Arc::new(amp), PI).unwrap()
    }

    #[test]
    fn free_phase_is_identity() {
        let phase = phase_free_l0();
        for r in [0.001, 0.01, 0.5, 1.0, PI, 10.0, 77.3, 300.0] {
            assert_relative_eq!(phase.eval(r).unwrap(), r, epsilon = 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn phase_at_anchor_is_pi_exactly() {
        let phase = phase_free_l0();
        assert_eq!(phase.eval(PI).unwrap(), PI);
    }

    #[test]
    fn phase_derivative_is_w_over_y() {
        let phase = phase_free_l0();
        let y = phase.amplitude().y_value(2.0).unwrap();
        assert_relative_eq!(
            phase.derivative(2.0).unwrap(),
            WRONSKIAN / y,
            max_relative = 1e-15
        );
    }

    #[test]
    fn phase_monotone() {
        let phase = phase_free_l0();
        let mut last = f64::NEG_INFINITY;
        for i in 0..400 {
            let r = 0.001 * (300.0_f64 / 0.001).powf(i as f64 / 399.0);
            let value = phase.eval(r).unwrap();
            assert!(value > last);
            last = value;
        }
    }

    #[test]
    fn free_l1_phase_matches_analytic() {
        // Y = (2/π)(1 + 1/r²) gives Φ(r) = r − arctan r, and the anchor
        // r_π − arctan r_π = π is automatic.
        let ctx = free_ctx(1, 1.0);
        let amp = solve_amplitude(&ctx, 0.0001, AmplitudeMethod::LinearThirdOrder, 12).unwrap();
        let inner = inner_free(1);
        let r_pi = find_r_pi(&inner).unwrap();
        let phase = build_phase(Arc::new(amp), r_pi).unwrap();
        for r in [0.001, 0.5, 1.0, 2.0, 10.0, 100.0] {
            assert_relative_eq!(
                phase.eval(r).unwrap(),
                r - r.atan(),
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn quadrature_self_consistency() {
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
        let amp =
            Arc::new(solve_amplitude(&ctx, 0.001, AmplitudeMethod::LinearThirdOrder, 12).unwrap());
        let inner = solve_inner_regular(&ctx, 1.5 * PI).unwrap();
        let r_pi = find_r_pi(&inner).unwrap();
        let base = build_phase(amp.clone(), r_pi).unwrap();
        let order = amp.expansion_order();
        let double = build_phase_with_quadrature(amp, r_pi, 2 * order).unwrap();
        let a = base.eval(300.0).unwrap();
        let b = double.eval(300.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn phase_precondition() {
        let ctx = free_ctx(0, 1.0);
        let amp = solve_amplitude(&ctx, 10.0, AmplitudeMethod::LinearThirdOrder, 12).unwrap();
        let err = build_phase(Arc::new(amp), PI).unwrap_err();
        match err {
            Error::Config(message) => {
                assert!(message.contains("r_pi"));
                assert!(message.contains("10"));
            }
            other => panic!("expected configuration error, got {other:?}"),
        }
    }

    #[test]
    fn phase_domain_error_below_r_min() {
        let phase = phase_free_l0();
        assert!(phase.eval(0.0001).is_err());
    }
}
