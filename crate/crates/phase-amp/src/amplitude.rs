//! Squared-amplitude solver.
//!
//! The amplitude A of the phase-amplitude pair S = A sin Φ, C = A cos Φ
//! obeys the Milne equation Ä + Q A = W²/A³. Solving instead for Y = A²
//! gives two practical forms: a nonlinear second-order equation,
//!
//!   Ÿ + 2 Q Y = (Ẏ² + 4W²)/(2Y),
//!
//! and a linear third-order one that needs dQ/dr,
//!
//!   Y⃛ + 4 Q Ẏ + 2 Q̇ Y = 0.
//!
//! For potentials with an unscreened tail (free, Coulomb) the equations
//! are integrated on the inverted coordinate ρ = 1/r from ρ = 0 (r = ∞),
//! where fixing the single boundary value Y = 2/(kπ) pins the energy
//! normalization, inward to ρ = 1/r_min. The higher boundary derivatives
//! at infinity are never needed: the first element pins only that one
//! coefficient and collocation determines the rest.
//!
//! Exponentially screened potentials take a different route. Their
//! inverted-coordinate meshes would need elements spanning hundreds of
//! oscillations of the parasitic S², C² modes to resolve the screening
//! turn-on e^{−α/ρ}, and chains of such elements amplify those modes.
//! Instead the solver finds the radius where the potential drops below
//! 1e−13·k², takes the exact free-particle envelope there — which is
//! independent of the unknown phase shift — and marches the equation
//! inward in r on a mesh that resolves every oscillation. Beyond that
//! radius the amplitude is the analytic free envelope.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{
    propagate, solve_element_fixed_point, CollocationProblem, Coordinate, Mesh,
    PiecewiseSolution,
};
use crate::potentials::{PotentialKind, RadialContext};
use crate::taylor::TaylorSeries;
use crate::WRONSKIAN;

/// Which form of the squared-amplitude equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeMethod {
    /// Linear third-order form (the default; needs dV/dr).
    LinearThirdOrder,
    /// Nonlinear second-order form, solved by lagged fixed-point iteration.
    NonlinearSecondOrder,
}

impl AmplitudeMethod {
    /// CLI tag.
    pub fn tag(&self) -> &'static str {
        match self {
            AmplitudeMethod::LinearThirdOrder => "linear17",
            AmplitudeMethod::NonlinearSecondOrder => "nonlinear16",
        }
    }
}

/// Knobs for the amplitude solve; the defaults reproduce the study setup.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// N − ν, the number of collocated coefficients per element.
    pub order: usize,
    /// Relative coefficient tolerance of the nonlinear fixed point.
    pub fixed_point_tol: f64,
    /// Iteration cap of the nonlinear fixed point.
    pub fixed_point_max_iter: usize,
    /// Screening scale used for mesh geometry; defaults to the potential's
    /// α. Pinning it keeps the mesh identical across a parameter scan.
    pub mesh_alpha: Option<f64>,
    /// Uniform subdivision factor of every mesh element.
    pub mesh_subdivide: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            order: 12,
            fixed_point_tol: 1e-14,
            fixed_point_max_iter: 50,
            mesh_alpha: None,
            mesh_subdivide: 2,
        }
    }
}

/// Chain-rule transport of derivatives between u(ρ) = Y(1/ρ) and Y(r):
/// given u′, u″, u‴ at ρ, returns (Ẏ, Ÿ, Y⃛) with respect to r.
pub fn transform_derivatives(u1: f64, u2: f64, u3: f64, rho: f64) -> (f64, f64, f64) {
    let r2 = rho * rho;
    let r3 = r2 * rho;
    let r4 = r2 * r2;
    let r5 = r4 * rho;
    let r6 = r4 * r2;
    let y1 = -r2 * u1;
    let y2 = r4 * u2 + 2.0 * r3 * u1;
    let y3 = -(r6 * u3 + 6.0 * r5 * u2 + 6.0 * r4 * u1);
    (y1, y2, y3)
}

/// Element cap for the ρ mesh.
const MESH_ELEMENT_CAP: usize = 10_000;

/// Element cap for the inward radial march.
const MARCH_ELEMENT_CAP: usize = 200_000;

/// Width growth of successive ρ elements.
const MESH_GROWTH: f64 = 1.25;

/// First ρ breakpoint below which element chains start amplifying the
/// unresolved oscillatory modes (k = 1 units).
const RHO_HEAD_FLOOR: f64 = 0.003;

/// Builds the mesh on ρ ∈ [0, 1/r_min]: a first interval [0, ρ₁] sized so
/// that the asymptotic tail of Y is representable at collocation order,
/// then geometrically growing intervals. A positive `alpha_scale` pulls ρ₁
/// down towards α/30 (floored for propagation stability) to sharpen the
/// head; the production path for screened potentials uses the radial
/// march instead.
pub fn build_rho_mesh(r_min: f64, k: f64, alpha_scale: f64) -> Result<Mesh> {
    build_rho_mesh_subdivided(r_min, k, alpha_scale, SolveOptions::default().mesh_subdivide)
}

/// As [`build_rho_mesh`], with every element split into `subdivide` equal
/// parts. `subdivide = 2·n` against `n` is the mesh-convergence audit.
pub fn build_rho_mesh_subdivided(
    r_min: f64,
    k: f64,
    alpha_scale: f64,
    subdivide: usize,
) -> Result<Mesh> {
    if !(r_min > 0.0) || !r_min.is_finite() {
        return Err(Error::Config(format!("r_min must be positive, got {r_min}")));
    }
    if subdivide == 0 {
        return Err(Error::Config("mesh subdivision factor must be at least 1".into()));
    }
    let rho_max = 1.0 / r_min;
    let mut rho1 = (0.03 * k).min(0.03);
    if alpha_scale > 0.0 {
        rho1 = rho1.min((alpha_scale / 30.0).max(RHO_HEAD_FLOOR * k));
    }

    let mut base = vec![0.0];
    if rho_max <= 2.0 * rho1 {
        base.push(0.5 * rho_max);
        base.push(rho_max);
    } else {
        base.push(rho1);
        let mut width = rho1;
        let mut edge = rho1;
        loop {
            width *= MESH_GROWTH;
            edge += width;
            if edge >= rho_max * (1.0 - 1e-12) {
                // Snap the last breakpoint; merge a runt interval into its
                // neighbour rather than keeping a sliver.
                if rho_max - base.last().unwrap() < 0.25 * width {
                    base.pop();
                }
                base.push(rho_max);
                break;
            }
            base.push(edge);
            if base.len() > MESH_ELEMENT_CAP {
                return Err(Error::Config(format!(
                    "rho mesh for r_min = {r_min} exceeds {MESH_ELEMENT_CAP} elements"
                )));
            }
        }
    }

    subdivide_breakpoints(&base, subdivide, MESH_ELEMENT_CAP, Coordinate::InverseRadius)
}

fn subdivide_breakpoints(
    base: &[f64],
    subdivide: usize,
    cap: usize,
    coordinate: Coordinate,
) -> Result<Mesh> {
    let mut points = Vec::with_capacity((base.len() - 1) * subdivide + 1);
    points.push(base[0]);
    for pair in base.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for i in 1..=subdivide {
            points.push(a + (b - a) * i as f64 / subdivide as f64);
        }
    }
    if points.len() - 1 > cap {
        return Err(Error::Config(format!(
            "mesh would need {} elements, cap is {cap}",
            points.len() - 1
        )));
    }
    Mesh::new(points, coordinate)
}

/// Radius beyond which the potential term is below 1e−13·k².
fn decay_radius(potential: &PotentialKind, k: f64) -> Result<f64> {
    let threshold = 1e-13 * k * k;
    let mut r = 0.5 / k;
    while 2.0 * potential.value_unchecked(r).abs() > threshold {
        r *= 1.2;
        if r > 1e8 {
            return Err(Error::Config(
                "potential decays too slowly for the radial march; \
                 screening parameter is effectively zero"
                    .into(),
            ));
        }
    }
    Ok(r)
}

/// Ascending mesh for the inward march: relative widths ≈ 0.35·r near the
/// lower end (resolving the Coulomb-like core), capped by the smaller of
/// the oscillation-resolving width (π/k)/8 and the potential's own length
/// scale 0.7/α.
fn build_march_mesh(r_min: f64, r_top: f64, k: f64, alpha: f64, subdivide: usize) -> Result<Mesh> {
    let mut h_wave = PI / k / 8.0;
    if alpha > 0.0 {
        h_wave = h_wave.min(0.7 / alpha);
    }
    let mut base = vec![r_min];
    loop {
        let last = *base.last().unwrap();
        let width = (0.35 * last).min(h_wave);
        let next = last + width;
        if next >= r_top - 0.3 * width {
            base.push(r_top);
            break;
        }
        base.push(next);
        if base.len() > MARCH_ELEMENT_CAP {
            return Err(Error::Config(format!(
                "radial march from {r_top} to {r_min} exceeds \
                 {MARCH_ELEMENT_CAP} elements; screening parameter too small"
            )));
        }
    }
    subdivide_breakpoints(&base, subdivide.max(1), MARCH_ELEMENT_CAP, Coordinate::Radius)
}

/// Free-particle envelope data: the Riccati–Bessel pair satisfies
/// Ĝ + iF̂ = (−i)^l e^{ix} P(x) with the exact polynomial
/// P(x) = Σ_{m=0}^{l} (l+m)!/(m!(l−m)!) (i/2x)^m, so the envelope
/// Y = (2/πk)|P|² and the free phase x − lπ/2 + arg P are closed forms.
#[derive(Debug, Clone)]
pub(crate) struct FreeTail {
    k: f64,
    l: u32,
    poly: Vec<Complex64>,
}

impl FreeTail {
    fn new(l: u32, k: f64) -> Self {
        let mut poly = Vec::with_capacity(l as usize + 1);
        let mut coeff = Complex64::new(1.0, 0.0);
        poly.push(coeff);
        for m in 0..l as u64 {
            // ratio of successive coefficients: (l+m+1)(l−m) / (m+1) · i/2
            let l = l as u64;
            let ratio = ((l + m + 1) * (l - m)) as f64 / (m as f64 + 1.0);
            coeff *= Complex64::new(0.0, 0.5) * ratio;
            poly.push(coeff);
        }
        Self { k, l, poly }
    }

    fn p(&self, x: f64) -> Complex64 {
        let inv = 1.0 / x;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.poly.iter().rev() {
            acc = acc * inv + c;
        }
        acc
    }

    fn p_prime(&self, x: f64) -> Complex64 {
        let inv = 1.0 / x;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.poly.iter().enumerate().skip(1).rev() {
            acc = (acc + c * -(m as f64)) * inv;
        }
        acc * inv
    }

    fn p_second(&self, x: f64) -> Complex64 {
        let inv = 1.0 / x;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.poly.iter().enumerate().skip(1).rev() {
            acc = (acc + c * (m as f64 * (m as f64 + 1.0))) * inv;
        }
        acc * inv * inv
    }

    fn y(&self, r: f64) -> f64 {
        let x = self.k * r;
        2.0 / (PI * self.k) * self.p(x).norm_sqr()
    }

    fn y_dot(&self, r: f64) -> f64 {
        let x = self.k * r;
        let p = self.p(x);
        let dp = self.p_prime(x);
        2.0 / (PI * self.k) * 2.0 * (p.conj() * dp).re * self.k
    }

    fn y_ddot(&self, r: f64) -> f64 {
        let x = self.k * r;
        let p = self.p(x);
        let dp = self.p_prime(x);
        let ddp = self.p_second(x);
        2.0 / (PI * self.k)
            * 2.0
            * ((dp.conj() * dp).re + (p.conj() * ddp).re)
            * self.k
            * self.k
    }

    /// Continuous free phase; differences of it are W·∫ dr/Y over the tail.
    fn phase(&self, r: f64) -> f64 {
        let x = self.k * r;
        x - self.l as f64 * PI / 2.0 + self.p(x).arg()
    }
}

#[derive(Debug, Clone)]
enum Representation {
    /// u(ρ) = Y(1/ρ) on ρ ∈ [0, 1/r_min].
    InverseRadius { y: PiecewiseSolution },
    /// Y(r) on [r_min, r_top] plus the analytic free envelope beyond.
    Radius {
        y: PiecewiseSolution,
        tail: FreeTail,
        r_top: f64,
    },
}

/// Squared amplitude on r ∈ [r_min, ∞), with Y → 2/(kπ) at infinity and
/// Y > 0 throughout.
#[derive(Debug, Clone)]
pub struct AmplitudeSolution {
    ctx: RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    repr: Representation,
}

/// Solves for Y with default options.
pub fn solve_amplitude(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    order: usize,
) -> Result<AmplitudeSolution> {
    let opts = SolveOptions {
        order,
        ..SolveOptions::default()
    };
    solve_amplitude_with(ctx, r_min, method, &opts)
}

pub fn solve_amplitude_with(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    opts: &SolveOptions,
) -> Result<AmplitudeSolution> {
    if opts.order < 4 {
        return Err(Error::Config(format!(
            "expansion order N - nu must be at least 4, got {}",
            opts.order
        )));
    }
    if !(r_min > 0.0) || !r_min.is_finite() {
        return Err(Error::Config(format!("r_min must be positive, got {r_min}")));
    }
    let repr = if ctx.potential.is_screened() {
        solve_by_radial_march(ctx, r_min, method, opts)?
    } else {
        solve_on_inverse_coordinate(ctx, r_min, method, opts)?
    };
    let solution = AmplitudeSolution {
        ctx: *ctx,
        r_min,
        method,
        repr,
    };
    solution.check_positive()?;
    Ok(solution)
}

/// ρ-propagation for potentials without exponential screening.
fn solve_on_inverse_coordinate(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    opts: &SolveOptions,
) -> Result<Representation> {
    let mesh = build_rho_mesh_subdivided(r_min, ctx.k, 0.0, opts.mesh_subdivide)?;
    let y_infinity = 2.0 / (ctx.k * PI);
    let y = match method {
        AmplitudeMethod::LinearThirdOrder => {
            let ctx = *ctx;
            propagate(
                &mesh,
                move |_index, a, _b| linear_operator_rho(ctx, a),
                &[y_infinity],
                1,
                3,
                opts.order,
            )?
        }
        AmplitudeMethod::NonlinearSecondOrder => {
            solve_nonlinear_rho(ctx, &mesh, y_infinity, opts)?
        }
    };
    Ok(Representation::InverseRadius { y })
}

/// Third-order linear form rewritten in ρ and scaled by −1/ρ²:
///   ρ⁴u‴ + 6ρ³u″ + (6ρ² + 4Q)u′ − (2Q̇/ρ²)u = 0,
/// with Q and Q̇ taken at r = 1/ρ. The scaling keeps the first-element
/// rows O(1) as ρ → 0.
fn linear_operator_rho(ctx: RadialContext, a: f64) -> impl Fn(f64, &TaylorSeries) -> f64 {
    move |x: f64, s: &TaylorSeries| {
        let rho = a + x;
        let rho2 = rho * rho;
        let rho3 = rho2 * rho;
        let rho4 = rho2 * rho2;
        let q = ctx.q_at_inverse(rho);
        let qd = ctx.q_derivative_at_inverse_over_rho2(rho);
        rho4 * s.eval(x, 3)
            + 6.0 * rho3 * s.eval(x, 2)
            + (6.0 * rho2 + 4.0 * q) * s.eval(x, 1)
            - 2.0 * qd * s.eval(x, 0)
    }
}

/// Nonlinear second-order form in ρ. Left side (linear in the iterate):
///   ρ⁴u″ + 2ρ³u′ + 2Q u;
/// right side, lagged from the previous iterate with Ẏ = −ρ²u′:
///   (Ẏ² + 4W²)/(2u).
fn solve_nonlinear_rho(
    ctx: &RadialContext,
    mesh: &Mesh,
    y_infinity: f64,
    opts: &SolveOptions,
) -> Result<PiecewiseSolution> {
    let w = WRONSKIAN;
    let mut elements: Vec<TaylorSeries> = Vec::with_capacity(mesh.element_count());
    let mut known = vec![y_infinity];
    for index in 0..mesh.element_count() {
        let (a, b) = mesh.interval(index);
        let nu = if index == 0 { 1 } else { 2 };
        let n_coeffs = nu + opts.order;
        let ctx_local = *ctx;
        let lhs = move |x: f64, s: &TaylorSeries| {
            let rho = a + x;
            let rho2 = rho * rho;
            let rho3 = rho2 * rho;
            let rho4 = rho2 * rho2;
            rho4 * s.eval(x, 2)
                + 2.0 * rho3 * s.eval(x, 1)
                + 2.0 * ctx_local.q_at_inverse(rho) * s.eval(x, 0)
        };
        let rhs = move |x: f64, prev: &TaylorSeries| -> Result<f64> {
            let rho = a + x;
            let y = prev.eval(x, 0);
            if y <= 0.0 {
                return Err(Error::NonPositiveAmplitude { rho, value: y });
            }
            let y_dot = -rho * rho * prev.eval(x, 1);
            Ok((y_dot * y_dot + 4.0 * w * w) / (2.0 * y))
        };
        let series = march_nonlinear_element(
            &lhs, &rhs, a, b, nu, n_coeffs, &known, elements.last(), y_infinity, opts,
        )
        .map_err(|e| e.on_element(index))?;
        known = series.shift(series.width());
        known.truncate(2);
        elements.push(series);
    }
    PiecewiseSolution::new(mesh.clone(), elements)
}

#[allow(clippy::too_many_arguments)]
fn march_nonlinear_element(
    lhs: &dyn Fn(f64, &TaylorSeries) -> f64,
    rhs: &dyn Fn(f64, &TaylorSeries) -> Result<f64>,
    a: f64,
    b: f64,
    nu: usize,
    n_coeffs: usize,
    known: &[f64],
    previous: Option<&TaylorSeries>,
    flat_seed: f64,
    opts: &SolveOptions,
) -> Result<TaylorSeries> {
    let seed_coeffs = match previous {
        None => {
            let mut c = vec![0.0; n_coeffs];
            c[0] = flat_seed;
            c
        }
        Some(prev) => {
            let mut c = prev.shift(prev.width());
            c.resize(n_coeffs, 0.0);
            c
        }
    };
    let seed = TaylorSeries::new(a, b - a, seed_coeffs)?;
    let problem = CollocationProblem {
        operator: lhs,
        nu,
        n_coeffs,
        known,
    };
    solve_element_fixed_point(
        &problem,
        a,
        b,
        rhs,
        &seed,
        opts.fixed_point_tol,
        opts.fixed_point_max_iter,
    )
}

/// Inward radial march for screened potentials: starts from the exact
/// free envelope at the decay radius and integrates towards r_min on the
/// reversed axis s = r_top − r.
fn solve_by_radial_march(
    ctx: &RadialContext,
    r_min: f64,
    method: AmplitudeMethod,
    opts: &SolveOptions,
) -> Result<Representation> {
    let k = ctx.k;
    let tail = FreeTail::new(ctx.l, k);
    // The mesh geometry may be pinned to a surrogate screening parameter
    // so that parameter scans see a smooth α ↦ Y map; the equations always
    // use the real potential. A surrogate α below the real one only makes
    // the march start farther out, which is harmless.
    let geometry_potential = match opts.mesh_alpha {
        Some(alpha) if alpha > 0.0 => {
            PotentialKind::from_tag(ctx.potential.tag(), ctx.potential.charge(), alpha)?
        }
        _ => ctx.potential,
    };
    let ll = (ctx.l * (ctx.l + 1)) as f64;
    let r_top = decay_radius(&geometry_potential, k)?
        .max(r_min * 1.5)
        .max((ll + 1.0) / k);
    let mesh = build_march_mesh(
        r_min,
        r_top,
        k,
        geometry_potential.alpha(),
        opts.mesh_subdivide,
    )?;

    // boundary data at s = 0 (r = r_top), with g(s) = Y(r_top − s)
    let y0 = tail.y(r_top);
    let y1 = -tail.y_dot(r_top);
    let y2 = tail.y_ddot(r_top);

    let ctx_copy = *ctx;
    let span = r_top - r_min;
    let reversed: Vec<(f64, f64)> = mesh
        .breakpoints()
        .windows(2)
        .rev()
        .map(|w| ((r_top - w[1]).max(0.0), r_top - w[0]))
        .collect();

    let mut elements_rev: Vec<TaylorSeries> = Vec::with_capacity(reversed.len());
    match method {
        AmplitudeMethod::LinearThirdOrder => {
            // in s: g‴ + 4Q g′ − 2Q̇ g = 0 with r = r_top − s
            let mut known = vec![y0, y1, y2];
            for (index, &(s_a, s_b)) in reversed.iter().enumerate() {
                let operator = move |x: f64, s: &TaylorSeries| {
                    let r = (r_top - (s_a + x)).max(1e-300);
                    s.eval(x, 3) + 4.0 * ctx_copy.q_unchecked(r) * s.eval(x, 1)
                        - 2.0 * ctx_copy.q_derivative_unchecked(r) * s.eval(x, 0)
                };
                let problem = CollocationProblem {
                    operator: &operator,
                    nu: 3,
                    n_coeffs: 3 + opts.order,
                    known: &known,
                };
                let series = crate::mesh::solve_element_linear(&problem, s_a, s_b)
                    .map_err(|e| e.on_element(index))?;
                known = series.shift(series.width());
                known.truncate(3);
                elements_rev.push(series);
            }
        }
        AmplitudeMethod::NonlinearSecondOrder => {
            // in s: g″ + 2Q g = (g′² + 4W²)/(2g)
            let w = WRONSKIAN;
            let mut known = vec![y0, y1];
            for (index, &(s_a, s_b)) in reversed.iter().enumerate() {
                let lhs = move |x: f64, s: &TaylorSeries| {
                    let r = (r_top - (s_a + x)).max(1e-300);
                    s.eval(x, 2) + 2.0 * ctx_copy.q_unchecked(r) * s.eval(x, 0)
                };
                let rhs = move |x: f64, prev: &TaylorSeries| -> Result<f64> {
                    let y = prev.eval(x, 0);
                    if y <= 0.0 {
                        return Err(Error::NonPositiveAmplitude {
                            rho: 1.0 / (r_top - (s_a + x)).max(1e-300),
                            value: y,
                        });
                    }
                    let g1 = prev.eval(x, 1);
                    Ok((g1 * g1 + 4.0 * w * w) / (2.0 * y))
                };
                let series = march_nonlinear_element(
                    &lhs,
                    &rhs,
                    s_a,
                    s_b,
                    2,
                    2 + opts.order,
                    &known,
                    elements_rev.last(),
                    y0,
                    opts,
                )
                .map_err(|e| e.on_element(index))?;
                known = series.shift(series.width());
                known.truncate(2);
                elements_rev.push(series);
            }
        }
    }
    debug_assert!((reversed.last().unwrap().1 - span).abs() <= 1e-12 * span);

    // re-express each element about its left r-endpoint:
    // f(r) = g(r_top − r), f⁽ⁿ⁾(r_left) = (−1)ⁿ g⁽ⁿ⁾(s_right)
    let mut elements = Vec::with_capacity(elements_rev.len());
    for series in elements_rev.iter().rev() {
        let mut coeffs = series.shift(series.width());
        for (n, c) in coeffs.iter_mut().enumerate() {
            if n % 2 == 1 {
                *c = -*c;
            }
        }
        let r_left = r_top - (series.center() + series.width());
        elements.push(TaylorSeries::new(
            r_left.max(r_min),
            series.width(),
            coeffs,
        )?);
    }
    let y = PiecewiseSolution::new(mesh, elements)?;
    Ok(Representation::Radius {
        y,
        tail,
        r_top,
    })
}

impl AmplitudeSolution {
    pub fn ctx(&self) -> &RadialContext {
        &self.ctx
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn method(&self) -> AmplitudeMethod {
        self.method
    }

    /// The constant Wronskian, 2/π.
    pub fn wronskian(&self) -> f64 {
        WRONSKIAN
    }

    /// Largest per-element coefficient count in use.
    pub fn expansion_order(&self) -> usize {
        let y = match &self.repr {
            Representation::InverseRadius { y } => y,
            Representation::Radius { y, .. } => y,
        };
        y.elements().iter().map(|e| e.len()).max().unwrap_or(15)
    }

    pub(crate) fn representation(&self) -> AmplitudeGeometry<'_> {
        match &self.repr {
            Representation::InverseRadius { y } => AmplitudeGeometry::InverseRadius { y },
            Representation::Radius { y, r_top, tail } => AmplitudeGeometry::Radius {
                y,
                r_top: *r_top,
                free_phase: tail,
            },
        }
    }

    fn check_r(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("amplitude requires r > 0, got {r}")));
        }
        if r < self.r_min * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "amplitude evaluated at r = {r} below r_min = {}",
                self.r_min
            )));
        }
        Ok(r.max(self.r_min))
    }

    /// Y(r) (`deriv_order` 0) or Ẏ(r) (`deriv_order` 1).
    pub fn eval(&self, r: f64, deriv_order: usize) -> Result<f64> {
        if deriv_order > 1 {
            return Err(Error::Domain(format!(
                "amplitude derivative order must be 0 or 1, got {deriv_order}"
            )));
        }
        let r = self.check_r(r)?;
        match &self.repr {
            Representation::InverseRadius { y } => {
                let rho = (1.0 / r).min(y.mesh().end());
                if deriv_order == 0 {
                    y.eval(rho, 0)
                } else {
                    let u1 = y.eval(rho, 1)?;
                    Ok(transform_derivatives(u1, 0.0, 0.0, rho).0)
                }
            }
            Representation::Radius { y, tail, r_top } => {
                if r <= *r_top {
                    y.eval(r, deriv_order)
                } else if deriv_order == 0 {
                    Ok(tail.y(r))
                } else {
                    Ok(tail.y_dot(r))
                }
            }
        }
    }

    pub fn y_value(&self, r: f64) -> Result<f64> {
        self.eval(r, 0)
    }

    pub fn y_derivative(&self, r: f64) -> Result<f64> {
        self.eval(r, 1)
    }

    /// Ÿ(r), used by residual diagnostics.
    pub fn y_second_derivative(&self, r: f64) -> Result<f64> {
        let r = self.check_r(r)?;
        match &self.repr {
            Representation::InverseRadius { y } => {
                let rho = (1.0 / r).min(y.mesh().end());
                let u1 = y.eval(rho, 1)?;
                let u2 = y.eval(rho, 2)?;
                Ok(transform_derivatives(u1, u2, 0.0, rho).1)
            }
            Representation::Radius { y, tail, r_top } => {
                if r <= *r_top {
                    y.eval(r, 2)
                } else {
                    Ok(tail.y_ddot(r))
                }
            }
        }
    }

    /// A(r) = √Y(r).
    pub fn amplitude(&self, r: f64) -> Result<f64> {
        Ok(self.y_value(r)?.sqrt())
    }

    /// Ȧ(r) = Ẏ/(2√Y).
    pub fn amplitude_derivative(&self, r: f64) -> Result<f64> {
        let y = self.y_value(r)?;
        let y_dot = self.y_derivative(r)?;
        Ok(y_dot / (2.0 * y.sqrt()))
    }

    /// Residual of the Milne equation Ä + QA − W²/A³ at r.
    pub fn milne_residual(&self, r: f64) -> Result<f64> {
        let y = self.y_value(r)?;
        let y1 = self.y_derivative(r)?;
        let y2 = self.y_second_derivative(r)?;
        let a = y.sqrt();
        let a2 = y2 / (2.0 * a) - y1 * y1 / (4.0 * a * y);
        let w = WRONSKIAN;
        Ok(a2 + self.ctx.q_value(r)? * a - w * w / (a * a * a))
    }

    /// Residual of the nonlinear squared-amplitude equation at r.
    pub fn y_equation_residual(&self, r: f64) -> Result<f64> {
        let y = self.y_value(r)?;
        let y1 = self.y_derivative(r)?;
        let y2 = self.y_second_derivative(r)?;
        let w = WRONSKIAN;
        Ok(y2 + 2.0 * self.ctx.q_value(r)? * y - (y1 * y1 + 4.0 * w * w) / (2.0 * y))
    }

    fn check_positive(&self) -> Result<()> {
        let (y, inverse) = match &self.repr {
            Representation::InverseRadius { y } => (y, true),
            Representation::Radius { y, .. } => (y, false),
        };
        for (index, element) in y.elements().iter().enumerate() {
            let samples = 16;
            for i in 0..=samples {
                let x = element.width() * i as f64 / samples as f64;
                let value = element.eval(x, 0);
                if value <= 0.0 {
                    let position = element.center() + x;
                    return Err(Error::NonPositiveAmplitude {
                        rho: if inverse { position } else { 1.0 / position },
                        value,
                    }
                    .on_element(index));
                }
            }
        }
        Ok(())
    }
}

/// Geometry view used by the phase integrator.
pub(crate) enum AmplitudeGeometry<'a> {
    InverseRadius {
        y: &'a PiecewiseSolution,
    },
    Radius {
        y: &'a PiecewiseSolution,
        r_top: f64,
        free_phase: &'a FreeTail,
    },
}

impl AmplitudeGeometry<'_> {
    /// W·∫ dr/Y over [r1, r2] inside the analytic tail, as a phase
    /// difference (exact). Only meaningful for the radial representation.
    pub(crate) fn tail_phase_delta(&self, r1: f64, r2: f64) -> Option<f64> {
        match self {
            AmplitudeGeometry::InverseRadius { .. } => None,
            AmplitudeGeometry::Radius { free_phase, .. } => {
                Some(free_phase.phase(r2) - free_phase.phase(r1))
            }
        }
    }
}
