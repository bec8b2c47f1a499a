//! Independent reference solutions used to validate the production path.
//!
//! The oracle integrates the reduced radial equation ψ″ + Qψ = 0 directly
//! in r with an adaptive Taylor-series stepper whose local derivatives of
//! Q are generated analytically per potential. The regular solution is
//! seeded at small r by its Frobenius series, integrated outward to a
//! radius where the analytic asymptotic pair is valid, and normalized by
//! Wronskian projection onto that pair: for the screened and free cases
//! the pair is the Riccati–Bessel pair (the potential term decays below
//! 1e−12·k² there), for the pure Coulomb case the large-argument Coulomb
//! expansion with the phase constant from a complex log-gamma. The
//! irregular partner is started at the same radius from the orthogonal
//! mixture and integrated inward; a Wronskian check against the regular
//! solution certifies the pair.
//!
//! Nothing here is shared with the production path except the potential
//! definitions: different discretization (explicit stepping vs implicit
//! collocation), different coordinate (r vs ρ) and a different
//! normalization mechanism (asymptotic projection vs boundary pinning).

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potentials::{PotentialKind, RadialContext};
use crate::WRONSKIAN;

/// |computed − reference| / amplitude: pointwise error scaled by the local
/// envelope so zeros of the oscillating functions do not blow it up.
pub fn scaled_error(computed: f64, reference: f64, amplitude: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::Domain(format!(
            "scaling amplitude must be positive, got {amplitude}"
        )));
    }
    Ok((computed - reference).abs() / amplitude)
}

// ---------------------------------------------------------------------------
// complex log-gamma and the Coulomb phase constant
// ---------------------------------------------------------------------------

#[allow(clippy::excessive_precision)] // published constants, extra digits kept verbatim
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// ln Γ(z): Lanczos approximation (g = 7), reflection for Re z < 0.5.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        // Γ(z) Γ(1 − z) = π / sin(πz)
        Complex64::new(pi.ln(), 0.0)
            - (z * pi).sin().ln()
            - ln_gamma_complex(Complex64::new(1.0, 0.0) - z)
    } else {
        let shifted = z - 1.0;
        let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (shifted + i as f64);
        }
        let t = shifted + 7.5;
        (2.0 * pi).sqrt().ln() + (shifted + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Coulomb phase constant σ_l = arg Γ(l + 1 + iη).
pub fn coulomb_sigma(l: u32, eta: f64) -> f64 {
    ln_gamma_complex(Complex64::new(l as f64 + 1.0, eta)).im
}

// ---------------------------------------------------------------------------
// asymptotic solution pairs
// ---------------------------------------------------------------------------

/// Values (F, F′, G, G′) of a solution basis at radius r, with the
/// Wronskian convention G·F′ − G′·F = k (derivatives in r).
#[derive(Debug, Clone, Copy)]
struct BasisValues {
    f: f64,
    f_dot: f64,
    g: f64,
    g_dot: f64,
}

/// Riccati–Bessel pair F = x j_l(x), G = −x y_l(x) at x = kr; exact
/// solutions wherever the potential vanishes. Upward recurrence, stable
/// for the x ≫ l regime the oracle uses.
fn riccati_bessel(l: u32, k: f64, r: f64) -> BasisValues {
    let x = k * r;
    let (sin, cos) = x.sin_cos();
    // f-branch: x j_l; g-branch: −x y_l. Both satisfy the same recurrence
    // u_{n+1} = (2n+1)/x · u_n − u_{n−1}.
    let mut f_prev = cos; // x j_{-1}
    let mut f = sin; // x j_0
    let mut g_prev = -sin; // "−x y_{-1}"
    let mut g = cos; // −x y_0
    for n in 0..l {
        let c = (2 * n + 1) as f64 / x;
        (f_prev, f) = (f, c * f - f_prev);
        (g_prev, g) = (g, c * g - g_prev);
    }
    // (x j_l)' = x j_{l−1} − l j_l, same shape for the irregular branch
    let lox = l as f64 / x;
    BasisValues {
        f,
        f_dot: k * (f_prev - lox * f),
        g,
        g_dot: k * (g_prev - lox * g),
    }
}

/// Large-argument Coulomb pair from the exponential expansion
/// G + iF = e^{iθ(x)} Σ_m c_m x^{−m}, θ = x − η ln 2x − lπ/2 + σ_l, with
/// c_{m+1} = [(2m+1)η + i(η² + L − m(m+1))] c_m / (2(m+1)).
struct CoulombAsymptotic {
    eta: f64,
    l: u32,
    k: f64,
    sigma: f64,
}

impl CoulombAsymptotic {
    fn new(l: u32, k: f64, z: f64) -> Self {
        let eta = -z / k;
        Self {
            eta,
            l,
            k,
            sigma: coulomb_sigma(l, eta),
        }
    }

    /// (w, ŵ) with G + iF = e^{iθ} w and (G + iF)′ = e^{iθ} ŵ (d/dx).
    fn series(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let ll = (self.l * (self.l + 1)) as f64;
        let eta = self.eta;
        let mut c = Complex64::new(1.0, 0.0);
        let mut w = c;
        let mut w_hat = Complex64::new(0.0, 1.0); // i·c_0
        let mut x_pow = 1.0;
        let mut converged = false;
        let mut previous_term = f64::INFINITY;
        for m in 0..(2.0 * x) as usize {
            let m_f = m as f64;
            let c_next = c
                * Complex64::new(
                    (2.0 * m_f + 1.0) * eta,
                    eta * eta + ll - m_f * (m_f + 1.0),
                )
                / (2.0 * (m_f + 1.0));
            x_pow /= x;
            let term = c_next * x_pow;
            // ŵ = iw − iηw/x + w′ has, at order x^{−(m+1)}, the coefficient
            // i c_{m+1} − (iη + m) c_m
            let hat_term =
                (Complex64::new(0.0, 1.0) * c_next - Complex64::new(m_f, eta) * c) * x_pow;
            w += term;
            w_hat += hat_term;
            let size = term.norm();
            if size > previous_term {
                // asymptotic series started diverging before reaching
                // machine precision
                if previous_term > 1e-15 * w.norm() {
                    return Err(Error::Oracle(format!(
                        "Coulomb asymptotic series stalled at {previous_term:.3e} \
                         relative term size for x = {x}"
                    )));
                }
                converged = true;
                break;
            }
            if size <= 1e-17 * w.norm() {
                converged = true;
                break;
            }
            previous_term = size;
            c = c_next;
        }
        if !converged {
            return Err(Error::Oracle(format!(
                "Coulomb asymptotic series needs a larger match radius than x = {x}"
            )));
        }
        Ok((w, w_hat))
    }

    fn theta(&self, x: f64) -> f64 {
        x - self.eta * (2.0 * x).ln() - self.l as f64 * std::f64::consts::FRAC_PI_2 + self.sigma
    }

    fn eval(&self, r: f64) -> Result<BasisValues> {
        let x = self.k * r;
        let (w, w_hat) = self.series(x)?;
        let phase = Complex64::from_polar(1.0, self.theta(x));
        let gf = phase * w;
        let gf_dot = phase * w_hat;
        Ok(BasisValues {
            f: gf.im,
            f_dot: self.k * gf_dot.im,
            g: gf.re,
            g_dot: self.k * gf_dot.re,
        })
    }

    /// The exact continuous phase of the pair: θ(x) + arg w(x).
    fn phase(&self, r: f64) -> Result<f64> {
        let x = self.k * r;
        let (w, _) = self.series(x)?;
        Ok(self.theta(x) + w.arg())
    }
}

/// Asymptotic phase Φ(r) of the energy-normalized Coulomb pair, exact up
/// to the truncation of the large-argument expansion. Available at radii
/// beyond the expansion's validity radius only.
pub fn coulomb_asymptotic_phase(l: u32, k: f64, z: f64, r: f64) -> Result<f64> {
    CoulombAsymptotic::new(l, k, z).phase(r)
}

/// Squared amplitude of the energy-normalized Coulomb pair at large r:
/// Y = (2/(πk)) |w(kr)|².
pub fn coulomb_asymptotic_y(l: u32, k: f64, z: f64, r: f64) -> Result<f64> {
    let asym = CoulombAsymptotic::new(l, k, z);
    let (w, _) = asym.series(k * r)?;
    Ok(2.0 / (std::f64::consts::PI * k) * w.norm_sqr())
}

// ---------------------------------------------------------------------------
// analytic derivative series of Q at a point
// ---------------------------------------------------------------------------

fn binomial_rows(n_max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![1.0; n + 1];
        for j in 1..n {
            row[j] = rows[n - 1][j - 1] + rows[n - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// V⁽ⁿ⁾(r) for n = 0..=n_max.
fn potential_derivatives(
    potential: &PotentialKind,
    r: f64,
    n_max: usize,
    binom: &[Vec<f64>],
) -> Vec<f64> {
    // derivative values of 1/r: (−1)^i i! / r^{i+1}
    let inv_r_derivs = |n: usize| -> Vec<f64> {
        let mut v = Vec::with_capacity(n + 1);
        v.push(1.0 / r);
        for i in 1..=n {
            let last = v[i - 1];
            v.push(last * -(i as f64) / r);
        }
        v
    };
    match *potential {
        PotentialKind::Free => vec![0.0; n_max + 1],
        PotentialKind::Coulomb { z } => {
            inv_r_derivs(n_max).iter().map(|d| -z * d).collect()
        }
        PotentialKind::ScreenedCoulomb { z, alpha } => {
            let inv = inv_r_derivs(n_max);
            let e = (-alpha * r).exp();
            // e^{−αr} derivative values: (−α)^j e^{−αr}
            let mut e_derivs = Vec::with_capacity(n_max + 1);
            let mut ej = e;
            for _ in 0..=n_max {
                e_derivs.push(ej);
                ej *= -alpha;
            }
            (0..=n_max)
                .map(|n| {
                    let mut acc = 0.0;
                    for j in 0..=n {
                        acc += binom[n][j] * e_derivs[j] * inv[n - j];
                    }
                    -z * acc
                })
                .collect()
        }
        PotentialKind::ExpCosScreenedCoulomb { z, alpha } => {
            let inv = inv_r_derivs(n_max);
            // e^{−αr} cos(αr) = Re e^{wr}, w = α(−1 + i)
            let w = Complex64::new(-alpha, alpha);
            let ewr = (w * r).exp();
            let mut c_derivs = Vec::with_capacity(n_max + 1);
            let mut wj = Complex64::new(1.0, 0.0);
            for _ in 0..=n_max {
                c_derivs.push((wj * ewr).re);
                wj *= w;
            }
            (0..=n_max)
                .map(|n| {
                    let mut acc = 0.0;
                    for j in 0..=n {
                        acc += binom[n][j] * c_derivs[j] * inv[n - j];
                    }
                    -z * acc
                })
                .collect()
        }
        PotentialKind::Hulthen { z, alpha } => {
            if alpha == 0.0 {
                return inv_r_derivs(n_max).iter().map(|d| -z * d).collect();
            }
            // g = E/(1 − E) with E = e^{−αr}; derivative values by Leibniz
            // algebra: D = 1 − E, R = 1/D, g = E·R.
            let e = (-alpha * r).exp();
            let mut e_derivs = Vec::with_capacity(n_max + 1);
            let mut ej = e;
            for _ in 0..=n_max {
                e_derivs.push(ej);
                ej *= -alpha;
            }
            let mut d_derivs = vec![0.0; n_max + 1];
            d_derivs[0] = -(-alpha * r).exp_m1();
            for j in 1..=n_max {
                d_derivs[j] = -e_derivs[j];
            }
            let mut r_derivs = vec![0.0; n_max + 1];
            r_derivs[0] = 1.0 / d_derivs[0];
            for n in 1..=n_max {
                let mut acc = 0.0;
                for j in 1..=n {
                    acc += binom[n][j] * d_derivs[j] * r_derivs[n - j];
                }
                r_derivs[n] = -r_derivs[0] * acc;
            }
            (0..=n_max)
                .map(|n| {
                    let mut acc = 0.0;
                    for j in 0..=n {
                        acc += binom[n][j] * e_derivs[j] * r_derivs[n - j];
                    }
                    -z * alpha * acc
                })
                .collect()
        }
    }
}

/// Q⁽ⁿ⁾(r) for n = 0..=n_max.
fn q_derivatives(ctx: &RadialContext, r: f64, n_max: usize, binom: &[Vec<f64>]) -> Vec<f64> {
    let v = potential_derivatives(&ctx.potential, r, n_max, binom);
    let ll = (ctx.l * (ctx.l + 1)) as f64;
    // derivative values of 1/r²: (−1)^n (n+1)! / r^{n+2}
    let mut centrifugal = Vec::with_capacity(n_max + 1);
    centrifugal.push(1.0 / (r * r));
    for n in 1..=n_max {
        let last: f64 = centrifugal[n - 1];
        centrifugal.push(last * -((n + 1) as f64) / r);
    }
    (0..=n_max)
        .map(|n| {
            let base = if n == 0 { ctx.k * ctx.k } else { 0.0 };
            base - ll * centrifugal[n] - 2.0 * v[n]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// adaptive Taylor-series integration of ψ″ + Qψ = 0
// ---------------------------------------------------------------------------

/// Oracle accuracy/effort knobs.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Local truncation target, relative to the solution scale.
    pub tol: f64,
    /// Taylor order per step.
    pub order: usize,
    /// Frobenius terms for the small-r seed.
    pub series_terms: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            order: 28,
            series_terms: 48,
        }
    }
}

struct Segment {
    r0: f64,
    h: f64,
    /// ψ⁽ⁿ⁾(r0)
    derivs: Vec<f64>,
}

impl Segment {
    fn eval(&self, r: f64, deriv_order: usize) -> f64 {
        let x = r - self.r0;
        if deriv_order >= self.derivs.len() {
            return 0.0;
        }
        let top = self.derivs.len() - 1;
        let mut acc = self.derivs[top];
        for j in (deriv_order..top).rev() {
            acc = self.derivs[j] + acc * x / (j - deriv_order + 1) as f64;
        }
        acc
    }
}

struct Trajectory {
    segments: Vec<Segment>,
    ascending: bool,
    /// accumulated truncation estimate, relative
    accuracy: f64,
}

impl Trajectory {
    fn r_first(&self) -> f64 {
        self.segments.first().map_or(f64::NAN, |s| s.r0)
    }

    fn r_last(&self) -> f64 {
        self.segments.last().map_or(f64::NAN, |s| s.r0 + s.h)
    }

    fn eval(&self, r: f64, deriv_order: usize) -> Result<f64> {
        let (lo, hi) = if self.ascending {
            (self.r_first(), self.r_last())
        } else {
            (self.r_last(), self.r_first())
        };
        if r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "oracle trajectory evaluated at r = {r} outside [{lo}, {hi}]"
            )));
        }
        // binary search over segment start points
        let mut low = 0usize;
        let mut high = self.segments.len();
        while high - low > 1 {
            let mid = (low + high) / 2;
            let starts_after = if self.ascending {
                self.segments[mid].r0 > r
            } else {
                self.segments[mid].r0 < r
            };
            if starts_after {
                high = mid;
            } else {
                low = mid;
            }
        }
        Ok(self.segments[low].eval(r, deriv_order))
    }
}

/// Integrates ψ″ + Qψ = 0 from (r_start, ψ, ψ̇) to r_stop with dense output.
fn integrate(
    ctx: &RadialContext,
    r_start: f64,
    psi: f64,
    dpsi: f64,
    r_stop: f64,
    cfg: &OracleConfig,
) -> Result<Trajectory> {
    let order = cfg.order.max(8);
    let binom = binomial_rows(order);
    let ascending = r_stop > r_start;
    let direction = if ascending { 1.0 } else { -1.0 };
    // Taylor steps are limited by the singularity at the origin; h ≤ 0.4·r
    // keeps every series inside its convergence disk. The free s-wave has
    // no singularity at all.
    let origin_limited = !(matches!(ctx.potential, PotentialKind::Free) && ctx.l == 0);
    let mut segments = Vec::new();
    let mut accuracy = 0.0_f64;
    let mut r = r_start;
    let mut p = psi;
    let mut dp = dpsi;
    let mut h_mag = (0.5 / ctx.k).min((r_stop - r_start).abs());
    let max_segments = 400_000;
    while (r_stop - r) * direction > 0.0 {
        if segments.len() >= max_segments {
            return Err(Error::Oracle(format!(
                "integration exceeded {max_segments} steps (achieved accuracy {accuracy:.3e})"
            )));
        }
        let q = q_derivatives(ctx, r, order.saturating_sub(2), &binom);
        let mut derivs = vec![0.0; order + 1];
        derivs[0] = p;
        derivs[1] = dp;
        for n in 0..=order - 2 {
            let mut acc = 0.0;
            for j in 0..=n {
                acc += binom[n][j] * q[j] * derivs[n - j];
            }
            derivs[n + 2] = -acc;
        }
        // step-size control on the scaled tail of the series
        let mut cap = (r_stop - r).abs();
        if origin_limited {
            cap = cap.min(0.4 * r);
        }
        h_mag = h_mag.min(cap).max(f64::MIN_POSITIVE);
        let tail_ok = |h: f64| -> (bool, f64) {
            let mut term_max = 0.0_f64;
            let mut tail = 0.0_f64;
            let mut t = 1.0;
            for (n, d) in derivs.iter().enumerate() {
                let term = (d * t).abs();
                if n + 3 >= derivs.len() {
                    tail += term;
                } else {
                    term_max = term_max.max(term);
                }
                t *= h / (n + 1) as f64;
            }
            let scale = term_max.max(f64::MIN_POSITIVE);
            (tail <= cfg.tol * scale, tail / scale)
        };
        let mut rel;
        let mut shrink_count = 0;
        loop {
            let (ok, measured) = tail_ok(h_mag);
            rel = measured;
            if ok || h_mag >= cap && measured <= cfg.tol {
                break;
            }
            if ok {
                break;
            }
            h_mag *= 0.65;
            shrink_count += 1;
            if shrink_count > 200 || h_mag < 1e-13 * r.abs().max(1e-3) {
                return Err(Error::Oracle(format!(
                    "cannot reach local tolerance {:.1e} near r = {r} \
                     (achieved {rel:.3e})",
                    cfg.tol
                )));
            }
        }
        let h = direction * h_mag.min(cap);
        let segment = Segment {
            r0: r,
            h,
            derivs,
        };
        p = segment.eval(r + h, 0);
        dp = segment.eval(r + h, 1);
        accuracy += rel.min(cfg.tol);
        segments.push(segment);
        r += h;
        if rel < 0.01 * cfg.tol {
            h_mag *= 1.25;
        }
        if (r_stop - r) * direction <= 1e-14 * r.abs() {
            break;
        }
    }
    Ok(Trajectory {
        segments,
        ascending,
        accuracy,
    })
}

// ---------------------------------------------------------------------------
// Frobenius seed at small r
// ---------------------------------------------------------------------------

/// Laurent data of 2V at the origin: 2V = −w/r + Σ_p v_p r^p.
fn coulomb_tail_series(potential: &PotentialKind, terms: usize) -> (f64, Vec<f64>) {
    match *potential {
        PotentialKind::Free => (0.0, Vec::new()),
        PotentialKind::Coulomb { z } => (2.0 * z, Vec::new()),
        PotentialKind::ScreenedCoulomb { z, alpha } => {
            // −2Z e^{−αr}/r
            let mut v = Vec::with_capacity(terms);
            let mut pow = -alpha; // (−α)^{p+1}/(p+1)!
            for p in 0..terms {
                v.push(-2.0 * z * pow);
                pow *= -alpha / (p as f64 + 2.0);
            }
            (2.0 * z, v)
        }
        PotentialKind::ExpCosScreenedCoulomb { z, alpha } => {
            let w = Complex64::new(-alpha, alpha);
            let mut v = Vec::with_capacity(terms);
            let mut pow = w; // w^{p+1}/(p+1)!
            for p in 0..terms {
                v.push(-2.0 * z * pow.re);
                pow *= w / (p as f64 + 2.0);
            }
            (2.0 * z, v)
        }
        PotentialKind::Hulthen { z, alpha } => {
            if alpha == 0.0 {
                return (2.0 * z, Vec::new());
            }
            // e^{αr} − 1 = αr·m(r) with m_j = α^j/(j+1)!; 1/m by power-series
            // inversion, then 2V = −(2Z/r)·(1/m).
            let n = terms + 1;
            let mut m = Vec::with_capacity(n);
            let mut pow = 1.0;
            for j in 0..n {
                m.push(pow / (j as f64 + 1.0));
                pow *= alpha;
            }
            let mut mu = vec![0.0; n];
            mu[0] = 1.0;
            for p in 1..n {
                let mut acc = 0.0;
                for j in 1..=p {
                    acc += m[j] * mu[p - j];
                }
                mu[p] = -acc;
            }
            let v = (0..terms).map(|p| -2.0 * z * mu[p + 1]).collect();
            (2.0 * z, v)
        }
    }
}

/// Coefficients c_j of ψ = Σ_j c_j r^{l+1+j}, c_0 = 1 (arbitrary scale).
fn frobenius_coefficients(ctx: &RadialContext, terms: usize) -> Vec<f64> {
    let (w, v) = coulomb_tail_series(&ctx.potential, terms);
    let k2 = ctx.k * ctx.k;
    let l = ctx.l as f64;
    let mut c = Vec::with_capacity(terms);
    c.push(1.0);
    for j in 1..terms {
        let mut acc = w * c[j - 1];
        if j >= 2 {
            acc += k2 * c[j - 2];
            for (p, vp) in v.iter().enumerate().take(j - 1) {
                acc -= vp * c[j - 2 - p];
            }
        }
        c.push(-acc / (j as f64 * (j as f64 + 2.0 * l + 1.0)));
    }
    c
}

fn frobenius_eval(l: u32, c: &[f64], r: f64) -> (f64, f64) {
    let l = l as f64;
    let mut psi = 0.0;
    let mut dpsi = 0.0;
    let mut r_pow = r.powi(l as i32 + 1);
    for (j, cj) in c.iter().enumerate() {
        psi += cj * r_pow;
        dpsi += cj * (l + 1.0 + j as f64) * r_pow / r;
        r_pow *= r;
    }
    (psi, dpsi)
}

/// Handoff radius where the truncated Frobenius series is at rounding level.
fn frobenius_radius(ctx: &RadialContext, c: &[f64]) -> f64 {
    let alpha = ctx.potential.alpha();
    let mut r0 = (0.5 / ctx.k).min(0.1);
    if alpha > 0.0 {
        // stay well inside the Hulthén pole ring |r| = 2π/α
        r0 = r0.min(0.5 / alpha);
    }
    loop {
        let mut r_pow = 1.0;
        let mut total = 0.0_f64;
        let mut tail = 0.0_f64;
        for (j, cj) in c.iter().enumerate() {
            let term = (cj * r_pow).abs();
            total += term;
            if j + 4 >= c.len() {
                tail += term;
            }
            r_pow *= r0;
        }
        if tail <= 1e-16 * total.max(f64::MIN_POSITIVE) || r0 < 1e-4 {
            return r0;
        }
        r0 *= 0.5;
    }
}

// ---------------------------------------------------------------------------
// the assembled oracle
// ---------------------------------------------------------------------------

enum AsymptoticBasis {
    Riccati,
    Coulomb(CoulombAsymptotic),
}

impl AsymptoticBasis {
    fn eval(&self, l: u32, k: f64, r: f64) -> Result<BasisValues> {
        match self {
            AsymptoticBasis::Riccati => Ok(riccati_bessel(l, k, r)),
            AsymptoticBasis::Coulomb(asym) => asym.eval(r),
        }
    }
}

/// Reference pair for one physical context, valid on [r_lo, r_hi].
pub struct OracleSolution {
    ctx: RadialContext,
    lambda: f64,
    mix_f: f64,
    mix_g: f64,
    r_seed: f64,
    frobenius: Vec<f64>,
    outward: Trajectory,
    inward: Option<Trajectory>,
    r_far: f64,
    basis: AsymptoticBasis,
    r_lo: f64,
    accuracy: f64,
}

/// Builds the regular reference solution (and optionally the certified
/// irregular partner) for radii in [r_lo, r_hi].
pub fn solve_reference(
    ctx: &RadialContext,
    r_lo: f64,
    r_hi: f64,
    with_irregular: bool,
    cfg: &OracleConfig,
) -> Result<OracleSolution> {
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
        return Err(Error::Config(format!(
            "oracle range must satisfy 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    let k = ctx.k;
    let threshold = 1e-12 * k * k;
    let (basis, r_far) = match ctx.potential {
        PotentialKind::Free => (AsymptoticBasis::Riccati, 1.05 * r_hi + 10.0 / k),
        PotentialKind::Coulomb { z } => {
            let eta = (z / k).abs();
            let ll = (ctx.l * (ctx.l + 1)) as f64;
            let x_far = (60.0 + 4.0 * (eta * eta + ll)).max(1.02 * k * r_hi);
            (
                AsymptoticBasis::Coulomb(CoulombAsymptotic::new(ctx.l, k, z)),
                x_far / k,
            )
        }
        _ => {
            // first radius where the potential term is negligible
            let mut r_star: f64 = 1.0 / k;
            while 2.0 * ctx.potential.value(r_star)?.abs() > threshold {
                r_star *= 1.3;
                if r_star > 1e9 {
                    return Err(Error::Oracle(
                        "potential does not decay below the matching threshold".into(),
                    ));
                }
            }
            (
                AsymptoticBasis::Riccati,
                r_star.max(1.02 * r_hi).max(10.0 / k),
            )
        }
    };

    let frobenius = frobenius_coefficients(ctx, cfg.series_terms);
    let mut r_seed = frobenius_radius(ctx, &frobenius).min(0.5 * r_far);
    if r_seed >= r_lo {
        // keep the seed at or below the smallest requested radius when
        // possible so the series region covers [r_lo, r_seed]
        r_seed = r_seed.min(r_lo.max(1e-4));
    }
    let (psi_seed, dpsi_seed) = frobenius_eval(ctx.l, &frobenius, r_seed);
    let outward = integrate(ctx, r_seed, psi_seed, dpsi_seed, r_far, cfg)?;

    let psi_far = outward.eval(r_far, 0)?;
    let dpsi_far = outward.eval(r_far, 1)?;
    let far = basis.eval(ctx.l, k, r_far)?;
    // ψ = p·F + q·G via Wronskian projection with W{G, F} = k
    let p = (dpsi_far * far.g - psi_far * far.g_dot) / k;
    let q = (psi_far * far.f_dot - dpsi_far * far.f) / k;
    let norm = p.hypot(q);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Oracle(format!(
            "degenerate asymptotic projection (p = {p}, q = {q})"
        )));
    }
    let energy_scale = (2.0 / (std::f64::consts::PI * k)).sqrt();
    let lambda = energy_scale / norm;
    let (mix_f, mix_g) = (p / norm, q / norm);

    let mut solution = OracleSolution {
        ctx: *ctx,
        lambda,
        mix_f,
        mix_g,
        r_seed,
        frobenius,
        outward,
        inward: None,
        r_far,
        basis,
        r_lo,
        accuracy: cfg.tol,
    };
    solution.accuracy = (solution.outward.accuracy * cfg.tol).max(cfg.tol);

    if with_irregular {
        // orthogonal mixture: C = scale·(p̂ G − q̂ F), so that C Ṡ − S Ċ = 2/π
        let c_far = energy_scale * (mix_f * far.g - mix_g * far.f);
        let c_dot_far = energy_scale * (mix_f * far.g_dot - mix_g * far.f_dot);
        let inward = integrate(ctx, r_far, c_far, c_dot_far, r_lo * 0.999, cfg)?;
        solution.inward = Some(inward);
        solution.certify()?;
    }
    Ok(solution)
}

impl OracleSolution {
    pub fn ctx(&self) -> &RadialContext {
        &self.ctx
    }

    /// Declared relative accuracy estimate.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn regular(&self, r: f64) -> Result<f64> {
        self.regular_deriv(r, 0)
    }

    pub fn regular_deriv(&self, r: f64, order: usize) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("oracle requires r > 0, got {r}")));
        }
        if r <= self.r_seed {
            let (psi, dpsi) = frobenius_eval(self.ctx.l, &self.frobenius, r);
            return match order {
                0 => Ok(self.lambda * psi),
                1 => Ok(self.lambda * dpsi),
                _ => Err(Error::Domain("oracle derivative order must be 0 or 1".into())),
            };
        }
        if r <= self.r_far {
            return Ok(self.lambda * self.outward.eval(r, order)?);
        }
        let far = self.basis.eval(self.ctx.l, self.ctx.k, r)?;
        let energy_scale = (2.0 / (std::f64::consts::PI * self.ctx.k)).sqrt();
        match order {
            0 => Ok(energy_scale * (self.mix_f * far.f + self.mix_g * far.g)),
            1 => Ok(energy_scale * (self.mix_f * far.f_dot + self.mix_g * far.g_dot)),
            _ => Err(Error::Domain("oracle derivative order must be 0 or 1".into())),
        }
    }

    pub fn irregular(&self, r: f64) -> Result<f64> {
        self.irregular_deriv(r, 0)
    }

    pub fn irregular_deriv(&self, r: f64, order: usize) -> Result<f64> {
        let inward = self.inward.as_ref().ok_or_else(|| {
            Error::Oracle("irregular partner was not requested for this oracle".into())
        })?;
        if r < self.r_lo * 0.999 {
            return Err(Error::Domain(format!(
                "irregular oracle evaluated at r = {r} below its floor {}",
                self.r_lo
            )));
        }
        if r <= self.r_far {
            return inward.eval(r, order);
        }
        let far = self.basis.eval(self.ctx.l, self.ctx.k, r)?;
        let energy_scale = (2.0 / (std::f64::consts::PI * self.ctx.k)).sqrt();
        match order {
            0 => Ok(energy_scale * (self.mix_f * far.g - self.mix_g * far.f)),
            1 => Ok(energy_scale * (self.mix_f * far.g_dot - self.mix_g * far.f_dot)),
            _ => Err(Error::Domain("oracle derivative order must be 0 or 1".into())),
        }
    }

    /// Energy-normalized amplitude envelope √(S² + C²).
    pub fn amplitude(&self, r: f64) -> Result<f64> {
        let s = self.regular(r)?;
        let c = self.irregular(r)?;
        Ok(s.hypot(c))
    }

    /// Wronskian C·Ṡ − S·Ċ of the oracle pair.
    pub fn wronskian(&self, r: f64) -> Result<f64> {
        let s = self.regular(r)?;
        let s_dot = self.regular_deriv(r, 1)?;
        let c = self.irregular(r)?;
        let c_dot = self.irregular_deriv(r, 1)?;
        Ok(c * s_dot - s * c_dot)
    }

    fn certify(&self) -> Result<()> {
        let n = 24;
        let lo = self.r_lo;
        let hi = 0.98 * self.r_far;
        let mut worst = 0.0_f64;
        for i in 0..n {
            let r = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let w = self.wronskian(r)?;
            worst = worst.max((w - WRONSKIAN).abs());
        }
        if worst > 1e-10 {
            return Err(Error::Oracle(format!(
                "Wronskian certification failed: |W − 2/π| = {worst:.3e} \
                 (asymptotic start too close or tolerance too loose)"
            )));
        }
        Ok(())
    }
}

/// Energy-normalized regular solution on a grid.
pub fn oracle_regular(ctx: &RadialContext, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, hi) = grid_range(grid)?;
    let solution = solve_reference(ctx, lo, hi, false, &OracleConfig::default())?;
    grid.iter().map(|&r| solution.regular(r)).collect()
}

/// Energy-normalized irregular solution on a grid, certified by the
/// Wronskian against the regular partner.
pub fn oracle_irregular(ctx: &RadialContext, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, hi) = grid_range(grid)?;
    let solution = solve_reference(ctx, lo, hi, true, &OracleConfig::default())?;
    grid.iter().map(|&r| solution.irregular(r)).collect()
}

fn grid_range(grid: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &r in grid {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("grid point {r} outside (0, ∞)")));
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo == hi {
        hi = lo * (1.0 + 1e-9) + 1e-12;
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// fixture tables
// ---------------------------------------------------------------------------

/// Reference values on a grid, stored as a plain-text table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub potential: String,
    pub z: f64,
    pub alpha: f64,
    pub l: u32,
    pub k: f64,
    /// declared accuracy of the values; must be at or below 1e-11
    pub accuracy: f64,
    pub generated_by: String,
    pub date: String,
    pub grid: Vec<f64>,
    pub regular: Vec<f64>,
    pub irregular: Vec<f64>,
}

impl ReferenceTable {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.regular.len() || self.grid.len() != self.irregular.len() {
            return Err(Error::Domain("reference table column lengths differ".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "reference table grid must be strictly increasing".into(),
            ));
        }
        if self
            .grid
            .iter()
            .chain(&self.regular)
            .chain(&self.irregular)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Domain("reference table holds non-finite values".into()));
        }
        if !(self.accuracy > 0.0 && self.accuracy <= 1e-11) {
            return Err(Error::Domain(format!(
                "reference table accuracy tag must be in (0, 1e-11], got {}",
                self.accuracy
            )));
        }
        Ok(())
    }

    /// Builds a table by running the oracle on `grid`.
    pub fn from_oracle(ctx: &RadialContext, grid: &[f64], date: &str) -> Result<Self> {
        let (lo, hi) = grid_range(grid)?;
        let cfg = OracleConfig::default();
        let solution = solve_reference(ctx, lo, hi, true, &cfg)?;
        let regular = grid
            .iter()
            .map(|&r| solution.regular(r))
            .collect::<Result<Vec<_>>>()?;
        let irregular = grid
            .iter()
            .map(|&r| solution.irregular(r))
            .collect::<Result<Vec<_>>>()?;
        let table = Self {
            potential: ctx.potential.tag().to_string(),
            z: ctx.potential.charge(),
            alpha: ctx.potential.alpha(),
            l: ctx.l,
            k: ctx.k,
            accuracy: 1e-11_f64.min(solution.accuracy() * 10.0).max(1e-13),
            generated_by: format!("phase-amp oracle {}", env!("CARGO_PKG_VERSION")),
            date: date.to_string(),
            grid: grid.to_vec(),
            regular,
            irregular,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let mut text = String::new();
        let _ = writeln!(text, "# continuum reference table");
        let _ = writeln!(
            text,
            "# potential={} z={:.16e} alpha={:.16e} l={} k={:.16e}",
            self.potential, self.z, self.alpha, self.l, self.k
        );
        let _ = writeln!(text, "# accuracy={:.16e}", self.accuracy);
        let _ = writeln!(text, "# generated-by={}", self.generated_by);
        let _ = writeln!(text, "# date={}", self.date);
        let _ = writeln!(text, "# columns: r value_regular value_irregular");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                text,
                "{:.16e} {:.16e} {:.16e}",
                self.grid[i], self.regular[i], self.irregular[i]
            );
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut table = ReferenceTable {
            potential: String::new(),
            z: f64::NAN,
            alpha: f64::NAN,
            l: 0,
            k: f64::NAN,
            accuracy: f64::NAN,
            generated_by: String::new(),
            date: String::new(),
            grid: Vec::new(),
            regular: Vec::new(),
            irregular: Vec::new(),
        };
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for token in rest.split_whitespace() {
                    let Some((key, value)) = token.split_once('=') else {
                        continue;
                    };
                    match key {
                        "potential" => table.potential = value.to_string(),
                        "z" => table.z = parse_float(value)?,
                        "alpha" => table.alpha = parse_float(value)?,
                        "l" => {
                            table.l = value.parse().map_err(|_| {
                                Error::Domain(format!("bad l in reference table: {value}"))
                            })?
                        }
                        "k" => table.k = parse_float(value)?,
                        "accuracy" => table.accuracy = parse_float(value)?,
                        "generated-by" => table.generated_by = value.to_string(),
                        "date" => table.date = value.to_string(),
                        _ => {}
                    }
                }
                // free-text provenance tokens with spaces
                if let Some(value) = rest.trim().strip_prefix("generated-by=") {
                    table.generated_by = value.to_string();
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let r = parse_float(fields.next().unwrap_or_default())?;
            let s = parse_float(fields.next().unwrap_or_default())?;
            let c = parse_float(fields.next().unwrap_or_default())?;
            table.grid.push(r);
            table.regular.push(s);
            table.irregular.push(c);
        }
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn parse_float(text: &str) -> Result<f64> {
    text.parse()
        .map_err(|_| Error::Domain(format!("bad numeric field '{text}' in reference table")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const TWO_OVER_PI: f64 = std::f64::consts::FRAC_2_PI;

    #[test]
    fn lanczos_matches_known_moduli() {
        // |Γ(1+i)|² = π / sinh π
        let g = ln_gamma_complex(Complex64::new(1.0, 1.0));
        let modulus = g.re.exp();
        assert_relative_eq!(
            modulus,
            (PI / PI.sinh()).sqrt(),
            max_relative = 1e-12
        );
        // Γ(5) = 24
        let g5 = ln_gamma_complex(Complex64::new(5.0, 0.0));
        assert_relative_eq!(g5.re.exp(), 24.0, max_relative = 1e-12);
    }

    #[test]
    fn lanczos_recurrence_property() {
        // ln Γ(z + 1) = ln z + ln Γ(z)
        for z in [
            Complex64::new(0.7, -1.3),
            Complex64::new(2.5, 0.4),
            Complex64::new(1.0, -1.0),
        ] {
            let lhs = ln_gamma_complex(z + 1.0);
            let rhs = z.ln() + ln_gamma_complex(z);
            assert_relative_eq!(lhs.re, rhs.re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(lhs.im, rhs.im, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_matches_product_formula() {
        // arg Γ(1 + iy) = −γ_E y + Σ_n [y/n − atan(y/n)], evaluated as an
        // independent check of the Lanczos path.
        let y = -1.0_f64;
        let gamma_e = 0.5772156649015329;
        let mut sum = 0.0;
        let n_terms = 2_000_000;
        for n in 1..=n_terms {
            let n = n as f64;
            sum += y / n - (y / n).atan();
        }
        // tail: Σ_{n>N} y³/(3n³) ≈ y³/(6N²)
        sum += y.powi(3) / (6.0 * (n_terms as f64).powi(2));
        let reference = -gamma_e * y + sum;
        assert_relative_eq!(coulomb_sigma(0, y), reference, max_relative = 1e-9);
    }

    #[test]
    fn riccati_bessel_values() {
        let x = 7.3;
        let b0 = riccati_bessel(0, 1.0, x);
        assert_relative_eq!(b0.f, x.sin(), max_relative = 1e-14);
        assert_relative_eq!(b0.g, x.cos(), max_relative = 1e-14);
        assert_relative_eq!(b0.f_dot, x.cos(), max_relative = 1e-13);
        let b1 = riccati_bessel(1, 1.0, x);
        assert_relative_eq!(b1.f, x.sin() / x - x.cos(), max_relative = 1e-13);
        assert_relative_eq!(b1.g, x.cos() / x + x.sin(), max_relative = 1e-13);
        // Wronskian G·F′ − Ġ·F = k for every l
        for l in 0..=5 {
            let b = riccati_bessel(l, 2.0, 9.1);
            assert_relative_eq!(b.g * b.f_dot - b.g_dot * b.f, 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn coulomb_asymptotic_wronskian() {
        for l in [0u32, 2, 4] {
            let asym = CoulombAsymptotic::new(l, 1.0, 1.0);
            for r in [40.0, 120.0, 300.0] {
                let b = asym.eval(r).unwrap();
                assert_relative_eq!(
                    b.g * b.f_dot - b.g_dot * b.f,
                    1.0,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn coulomb_asymptotic_reduces_to_free() {
        // vanishing charge: the expansion must reproduce the Riccati pair
        let asym = CoulombAsymptotic::new(1, 1.0, 1e-300);
        let b = asym.eval(50.0).unwrap();
        let free = riccati_bessel(1, 1.0, 50.0);
        assert_relative_eq!(b.f, free.f, max_relative = 1e-10, epsilon = 1e-10);
        assert_relative_eq!(b.g, free.g, max_relative = 1e-10, epsilon = 1e-10);
    }

    fn fd_check(potential: PotentialKind, r: f64) {
        let binom = binomial_rows(8);
        let derivs = potential_derivatives(&potential, r, 3, &binom);
        let h = 1e-5 * r;
        let v = |r: f64| potential.value(r).unwrap();
        let fd1 = (v(r + h) - v(r - h)) / (2.0 * h);
        let fd2 = (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h);
        assert_relative_eq!(derivs[0], v(r), max_relative = 1e-14);
        assert_relative_eq!(derivs[1], fd1, max_relative = 1e-7, epsilon = 1e-10);
        assert_relative_eq!(derivs[2], fd2, max_relative = 1e-4, epsilon = 1e-7);
    }

    #[test]
    fn potential_derivative_series_match_finite_differences() {
        fd_check(PotentialKind::Coulomb { z: 1.0 }, 1.7);
        fd_check(PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 0.7 }, 1.1);
        fd_check(PotentialKind::Hulthen { z: 1.0, alpha: 1.3 }, 0.8);
        fd_check(
            PotentialKind::ExpCosScreenedCoulomb { z: 1.0, alpha: 0.9 },
            1.4,
        );
    }

    #[test]
    fn q_series_is_consistent_with_potentials_module() {
        let ctx = RadialContext::new(
            2,
            1.3,
            PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 0.5 },
        )
        .unwrap();
        let binom = binomial_rows(8);
        let q = q_derivatives(&ctx, 2.2, 3, &binom);
        assert_relative_eq!(q[0], ctx.q_value(2.2).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(q[1], ctx.q_derivative(2.2).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn free_oracle_reproduces_sine() {
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Free).unwrap();
        let grid: Vec<f64> = (1..=60).map(|i| 0.5 * i as f64).collect();
        let values = oracle_regular(&ctx, &grid).unwrap();
        let scale = TWO_OVER_PI.sqrt();
        for (r, v) in grid.iter().zip(values) {
            assert_relative_eq!(v, scale * r.sin(), epsilon = 1e-11);
        }
    }

    #[test]
    fn free_oracle_l1() {
        let ctx = RadialContext::new(1, 1.0, PotentialKind::Free).unwrap();
        let grid: Vec<f64> = vec![0.3, 1.0, 2.0, 5.0, 12.0, 30.0];
        let values = oracle_regular(&ctx, &grid).unwrap();
        let scale = TWO_OVER_PI.sqrt();
        for (r, v) in grid.iter().zip(values) {
            assert_relative_eq!(v, scale * (r.sin() / r - r.cos()), epsilon = 1e-10);
        }
    }

    #[test]
    fn free_oracle_irregular_is_cosine() {
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Free).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
        let values = oracle_irregular(&ctx, &grid).unwrap();
        let scale = TWO_OVER_PI.sqrt();
        for (r, v) in grid.iter().zip(values) {
            assert_relative_eq!(v, scale * r.cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn hydrogen_oracle_density_limit() {
        // ψ(r)/r approaches 2/√(1 − e^{−2π}) for Z = 1, k = 1 as r → 0.
        // The approach is linear in r (the series opens 1 − Zr + …), so at
        // r = 1e−6 the raw quotient still deviates by 1e−6 of the limit.
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
        let grid = vec![1e-9, 1e-6, 1.0];
        let values = oracle_regular(&ctx, &grid).unwrap();
        let expected = 2.0 / (1.0 - (-2.0 * PI).exp()).sqrt();
        assert_relative_eq!(values[0] / 1e-9, expected, max_relative = 1e-8);
        assert_relative_eq!(
            values[1] / 1e-6 / (1.0 - 1e-6),
            expected,
            max_relative = 1e-9
        );
    }

    #[test]
    fn oracle_wronskian_certification() {
        for l in [0u32, 2] {
            let ctx = RadialContext::new(l, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
            let sol =
                solve_reference(&ctx, 0.001, 300.0, true, &OracleConfig::default()).unwrap();
            for r in [0.001, 0.05, 1.0, 20.0, 290.0] {
                assert_relative_eq!(sol.wronskian(r).unwrap(), WRONSKIAN, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn oracle_pair_smooth_for_ecscp() {
        let ctx = RadialContext::new(
            0,
            1.0,
            PotentialKind::ExpCosScreenedCoulomb { z: 1.0, alpha: 1.0 },
        )
        .unwrap();
        let sol = solve_reference(&ctx, 0.01, 40.0, true, &OracleConfig::default()).unwrap();
        let mut last_y = f64::NAN;
        for i in 0..200 {
            let r = 0.01 * (40.0_f64 / 0.01).powf(i as f64 / 199.0);
            let y = sol.amplitude(r).unwrap().powi(2);
            assert!(y > 0.0, "amplitude collapsed at r = {r}");
            if i > 0 {
                assert!((y / last_y).abs() < 40.0, "jump at r = {r}");
            }
            last_y = y;
        }
    }

    #[test]
    fn oracle_self_consistency_under_tolerance_change() {
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
        let base = solve_reference(&ctx, 0.01, 50.0, false, &OracleConfig::default()).unwrap();
        let tighter = solve_reference(
            &ctx,
            0.01,
            50.0,
            false,
            &OracleConfig {
                tol: 0.5e-13,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        for r in [0.01, 0.3, 2.0, 17.0, 49.0] {
            let a = base.regular(r).unwrap();
            let b = tighter.regular(r).unwrap();
            assert!(
                (a - b).abs() <= 10.0 * 1e-11,
                "tolerance halving moved the oracle by {}",
                (a - b).abs()
            );
        }
    }

    #[test]
    fn scaled_error_arithmetic() {
        assert_eq!(scaled_error(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(
            scaled_error(1e-9, 0.0, TWO_OVER_PI.sqrt()).unwrap(),
            1.2533141373155003e-9,
            max_relative = 1e-12
        );
        assert!(scaled_error(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn reference_table_round_trip() {
        let ctx = RadialContext::new(0, 1.0, PotentialKind::Free).unwrap();
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.7).collect();
        let table = ReferenceTable::from_oracle(&ctx, &grid, "2026-08-08").unwrap();
        let mut buffer = Vec::new();
        table.write_to(&mut buffer).unwrap();
        let read = ReferenceTable::read_from(&buffer[..]).unwrap();
        assert_eq!(table, read);
        // bit-identical numeric round trip
        for (a, b) in table.regular.iter().zip(&read.regular) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn reference_table_rejects_bad_data() {
        let text = "# potential=free z=1 alpha=0 l=0 k=1\n# accuracy=1e-12\n1.0 0.5 0.5\n0.5 0.2 0.2\n";
        assert!(ReferenceTable::read_from(text.as_bytes()).is_err());
        let loose = "# potential=free z=1 alpha=0 l=0 k=1\n# accuracy=1e-3\n1.0 0.5 0.5\n";
        assert!(ReferenceTable::read_from(loose.as_bytes()).is_err());
    }
}
