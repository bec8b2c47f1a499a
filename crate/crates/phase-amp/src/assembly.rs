//! Assembly of the normalized regular and irregular solutions.
//!
//! With Y and Φ in hand, S = √Y sin Φ and C = √Y cos Φ for r ≥ r_min. The
//! regular solution is continued below r_min by the inner solve, rescaled
//! by the constant γ fixed at the root r_π: S(r_π) = 0 forces
//! Ṡ(r_π) = −W/A(r_π), so γ = −W / (A(r_π) ψ̇_inner(r_π)) matches the two
//! representations where the root is known to machine precision. The
//! irregular solution is not continued inward of r_min (it is singular at
//! the origin). Momentum-normalized (δ(k − k′)) states are the same
//! functions multiplied by √k.

use std::sync::Arc;

use crate::amplitude::{solve_amplitude_with, AmplitudeMethod, AmplitudeSolution, SolveOptions};
use crate::error::{Error, Result};
use crate::phase::{build_phase, find_r_pi, solve_inner_regular_with, InnerSolution, PhaseSolution};
use crate::potentials::RadialContext;
use crate::WRONSKIAN;

/// One fully assembled continuum state.
#[derive(Debug, Clone)]
pub struct ContinuumState {
    ctx: RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    amp: Arc<AmplitudeSolution>,
    phase: PhaseSolution,
    inner: InnerSolution,
    gamma: f64,
    r_pi: f64,
}

pub fn assemble(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
) -> Result<ContinuumState> {
    assemble_with(ctx, r_min, method, &SolveOptions::default())
}

pub fn assemble_with(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    opts: &SolveOptions,
) -> Result<ContinuumState> {
    let amp = solve_amplitude_with(ctx, r_min, method, opts)
        .map_err(|e| e.in_stage("amplitude solve"))?;
    let r_end = (1.5 * std::f64::consts::PI + ctx.l as f64) / ctx.k;
    let inner = solve_inner_regular_with(ctx, r_end, opts.order)
        .map_err(|e| e.in_stage("inner regular solve"))?;
    let r_pi = find_r_pi(&inner).map_err(|e| e.in_stage("first-node search"))?;
    if r_min >= r_pi {
        return Err(Error::Config(format!(
            "r_min = {r_min} must lie below the first node r_pi = {r_pi}"
        )));
    }
    let amp = Arc::new(amp);
    let phase = build_phase(amp.clone(), r_pi).map_err(|e| e.in_stage("phase synchronization"))?;
    let a_pi = amp.amplitude(r_pi).map_err(|e| e.in_stage("amplitude at r_pi"))?;
    let psi_dot = inner
        .eval(r_pi, 1)
        .map_err(|e| e.in_stage("inner derivative at r_pi"))?;
    if psi_dot.abs() < 1e-300 {
        return Err(Error::Domain(
            "inner solution has a vanishing derivative at its root; \
             the node search must have failed"
                .into(),
        ));
    }
    let gamma = -WRONSKIAN / (a_pi * psi_dot);
    Ok(ContinuumState {
        ctx: *ctx,
        r_min,
        method,
        amp,
        phase,
        inner,
        gamma,
        r_pi,
    })
}

impl ContinuumState {
    pub fn ctx(&self) -> &RadialContext {
        &self.ctx
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn method(&self) -> AmplitudeMethod {
        self.method
    }

    pub fn amplitude(&self) -> &Arc<AmplitudeSolution> {
        &self.amp
    }

    pub fn phase(&self) -> &PhaseSolution {
        &self.phase
    }

    pub fn inner(&self) -> &InnerSolution {
        &self.inner
    }

    /// Normalization constant of the inner solution, γ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// First node of the regular solution.
    pub fn r_pi(&self) -> f64 {
        self.r_pi
    }

    fn in_outer_region(&self, r: f64) -> bool {
        r >= self.r_min * (1.0 - 1e-12)
    }

    /// Regular solution S(r) for r > 0: A sin Φ outward of r_min, the
    /// rescaled inner solution below it.
    pub fn eval_regular(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "regular solution requires r > 0, got {r}"
            )));
        }
        if self.in_outer_region(r) {
            Ok(self.amp.amplitude(r)? * self.phase.eval(r)?.sin())
        } else {
            Ok(self.gamma * self.inner.eval(r, 0)?)
        }
    }

    /// Irregular solution C(r) = A cos Φ, defined for r ≥ r_min only.
    pub fn eval_irregular(&self, r: f64) -> Result<f64> {
        if !self.in_outer_region(r) {
            return Err(Error::Domain(format!(
                "irregular solution not continued below r_min = {}, got r = {r}",
                self.r_min
            )));
        }
        Ok(self.amp.amplitude(r)? * self.phase.eval(r)?.cos())
    }

    /// Full wavefunction Ψ = ψ/r of the regular solution.
    pub fn eval_regular_full(&self, r: f64) -> Result<f64> {
        Ok(self.eval_regular(r)? / r)
    }

    pub fn eval_y(&self, r: f64) -> Result<f64> {
        self.amp.y_value(r)
    }

    pub fn eval_phase(&self, r: f64) -> Result<f64> {
        self.phase.eval(r)
    }

    /// Ψ(0) = lim_{r→0} ψ(r)/r for an s-state: γ·ψ̇_inner(0), with
    /// ψ̇_inner(0) = 1 pinned by the inner normalization.
    pub fn psi_at_origin(&self) -> Result<f64> {
        if self.ctx.l != 0 {
            return Err(Error::Config(format!(
                "the full wavefunction vanishes at the origin for l = {}; \
                 the density at the origin needs l = 0",
                self.ctx.l
            )));
        }
        Ok(self.gamma * self.inner.eval(0.0, 1)?)
    }

    /// Wronskian C·Ṡ − S·Ċ from assembled values and derivatives;
    /// identically 2/π up to rounding.
    ///
    /// Expanding with Ṡ = Ȧ sinΦ + AΦ̇ cosΦ and Ċ = Ȧ cosΦ − AΦ̇ sinΦ, the
    /// two AȦ sinΦ cosΦ monomials are equal and opposite; they are dropped
    /// here symbolically rather than numerically, because at small r with
    /// l ≥ 2 they reach ~10¹⁴ and their floating-point difference would
    /// bury the 2/π-sized answer.
    pub fn wronskian(&self, r: f64) -> Result<f64> {
        let y = self.amp.y_value(r)?;
        let phi = self.phase.eval(r)?;
        let phi_dot = self.phase.derivative(r)?;
        let (sin, cos) = phi.sin_cos();
        Ok(y * phi_dot * (sin * sin + cos * cos))
    }

    /// Audit of the assembly invariants over a log-spaced grid on
    /// [r_min, r_audit_max] plus a splice comparison on [r_min, r_π].
    pub fn audit(&self, points: usize, r_audit_max: f64) -> Result<AuditReport> {
        let n = points.max(16);
        let mut wronskian_max_dev = 0.0_f64;
        let mut identity_max_rel = 0.0_f64;
        let mut phase_monotone = true;
        let mut last_phase = f64::NEG_INFINITY;
        let mut last_r = 0.0_f64;
        let ratio = r_audit_max / self.r_min;
        for i in 0..n {
            let r = self.r_min * ratio.powf(i as f64 / (n - 1) as f64);
            let w = self.wronskian(r)?;
            wronskian_max_dev = wronskian_max_dev.max((w - WRONSKIAN).abs());
            let y = self.amp.y_value(r)?;
            let s = self.eval_regular(r)?;
            let c = self.eval_irregular(r)?;
            identity_max_rel = identity_max_rel.max(((s * s + c * c - y) / y).abs());
            // Strict increase of Φ, rendered honestly in floating point:
            // the derivative W/Y must be positive, the value must never
            // drop beyond rounding, and wherever the true increment is
            // large enough to represent against the π-anchored value it
            // must actually appear.
            let phi = self.phase.eval(r)?;
            if self.phase.derivative(r)? <= 0.0 {
                phase_monotone = false;
            }
            // rounding scale of Φ = π + W·∫: the π anchor dominates when
            // the integral nearly cancels it
            let slack = 16.0 * f64::EPSILON * (std::f64::consts::PI + phi.abs());
            if i > 0 {
                let expected = (r - last_r) * WRONSKIAN / y;
                if phi < last_phase - slack
                    || (phi <= last_phase && expected > 1e3 * slack)
                {
                    phase_monotone = false;
                }
            }
            last_phase = phi;
            last_r = r;
        }
        // splice of the two regular representations on [r_min, r_pi]
        let mut splice_max_scaled = 0.0_f64;
        let m = 257;
        for i in 0..m {
            let r = self.r_min + (self.r_pi - self.r_min) * i as f64 / (m - 1) as f64;
            let outer = self.amp.amplitude(r)? * self.phase.eval(r)?.sin();
            let inner = self.gamma * self.inner.eval(r, 0)?;
            let a = self.amp.amplitude(r)?;
            splice_max_scaled = splice_max_scaled.max((outer - inner).abs() / a);
        }
        Ok(AuditReport {
            wronskian_max_dev,
            identity_max_rel,
            phase_monotone,
            splice_max_scaled,
            points: n,
        })
    }
}

/// Deviations gathered by [`ContinuumState::audit`].
#[derive(Debug, Clone, Copy)]
pub struct AuditReport {
    /// max |C·Ṡ − S·Ċ − 2/π|.
    pub wronskian_max_dev: f64,
    /// max |S² + C² − Y| / Y.
    pub identity_max_rel: f64,
    /// Φ strictly increasing over the grid.
    pub phase_monotone: bool,
    /// max |γψ − A sin Φ| / A on [r_min, r_π].
    pub splice_max_scaled: f64,
    pub points: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.wronskian_max_dev <= 1e-10
            && self.identity_max_rel <= 1e-12
            && self.phase_monotone
            && self.splice_max_scaled <= 1e-9
    }
}

/// Ψ₀(0) and Ψ₀²(0) for an s-state: the r → 0 limit of ψ/r is γ·ψ̇_inner(0),
/// and the inner normalization pins ψ̇_inner(0) = 1.
pub fn density_at_origin(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
) -> Result<(f64, f64)> {
    density_at_origin_with(ctx, r_min, method, &SolveOptions::default())
}

pub fn density_at_origin_with(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    opts: &SolveOptions,
) -> Result<(f64, f64)> {
    if ctx.l != 0 {
        return Err(Error::Config(format!(
            "the full wavefunction vanishes at the origin for l = {}; \
             the density at the origin needs l = 0",
            ctx.l
        )));
    }
    let state = assemble_with(ctx, r_min, method, opts)?;
    let psi0 = state.psi_at_origin()?;
    Ok((psi0, psi0 * psi0))
}
