//! Spectral-element collocation engine.
//!
//! Each mesh element carries a Taylor-basis series whose first ν
//! coefficients are pinned by boundary data; the remaining N − ν are
//! determined by enforcing the differential operator at the mapped roots
//! of the Legendre polynomial of order N − ν. Elements chain left to
//! right, each seeding the next with its endpoint derivative values.

use crate::error::{Error, Result};
use crate::taylor::TaylorSeries;

/// Coordinate carried by a mesh, radial r or inverted ρ = 1/r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Radius,
    InverseRadius,
}

/// Strictly increasing element boundaries.
#[derive(Debug, Clone)]
pub struct Mesh {
    breakpoints: Vec<f64>,
    coordinate: Coordinate,
}

impl Mesh {
    pub fn new(breakpoints: Vec<f64>, coordinate: Coordinate) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Domain("a mesh needs at least two breakpoints".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain("mesh breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "mesh breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            coordinate,
        })
    }

    pub fn uniform(a: f64, b: f64, elements: usize, coordinate: Coordinate) -> Result<Self> {
        if elements == 0 || !(b > a) {
            return Err(Error::Domain(format!(
                "invalid uniform mesh request [{a}, {b}] with {elements} elements"
            )));
        }
        let pts = (0..=elements)
            .map(|i| a + (b - a) * i as f64 / elements as f64)
            .collect();
        Mesh::new(pts, coordinate)
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn element_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn interval(&self, index: usize) -> (f64, f64) {
        (self.breakpoints[index], self.breakpoints[index + 1])
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Index of the element containing `x` (boundaries resolve rightward,
    /// the final endpoint leftward). Accepts a few ulps of slack outside.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let slack = 1e-12 * (self.end() - self.start()).abs();
        if x < self.start() - slack || x > self.end() + slack {
            return Err(Error::Domain(format!(
                "point {x} outside mesh [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let n = self.element_count();
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => Ok(i.min(n - 1)),
            Err(0) => Ok(0),
            Err(i) => Ok((i - 1).min(n - 1)),
        }
    }
}

/// Roots and weights of the Legendre polynomial of order `q` on [−1, 1],
/// ascending. Newton iteration on the three-term recurrence, started from
/// Chebyshev estimates.
pub fn legendre_nodes(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q == 0 {
        return Err(Error::Domain("Legendre order must be at least 1".into()));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let half = q.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(q, z);
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Oracle(format!(
                "Legendre root iteration failed to converge for order {q}"
            )));
        }
        let (_, dp) = legendre_and_derivative(q, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[q - 1 - i] = z;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_and_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=q {
        let next = ((2 * n - 1) as f64 * x * p - (n - 1) as f64 * p_prev) / n as f64;
        p_prev = p;
        p = next;
    }
    let dp = q as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Affine image of [−1, 1] nodes in the local coordinate [0, b − a].
pub fn map_to_element(nodes: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    if !(b > a) {
        return Err(Error::Domain(format!(
            "element bounds must satisfy b > a, got [{a}, {b}]"
        )));
    }
    let w = b - a;
    Ok(nodes.iter().map(|t| (t + 1.0) * 0.5 * w).collect())
}

/// One element's collocation statement: a linear differential operator
/// evaluated pointwise on a trial series, ν known leading coefficients and
/// a total of N coefficients.
pub struct CollocationProblem<'a> {
    /// Residual of the operator applied to the trial series at a local point.
    /// Must be linear in the series.
    pub operator: &'a dyn Fn(f64, &TaylorSeries) -> f64,
    /// ν, number of leading coefficients fixed by boundary data.
    pub nu: usize,
    /// N, total coefficient count.
    pub n_coeffs: usize,
    /// The fixed leading coefficients, length ν.
    pub known: &'a [f64],
}

impl CollocationProblem<'_> {
    fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.n_coeffs <= self.nu {
            return Err(Error::Config(format!(
                "need N > nu >= 1, got N = {}, nu = {}",
                self.n_coeffs, self.nu
            )));
        }
        if self.known.len() != self.nu {
            return Err(Error::Config(format!(
                "expected {} known coefficients, got {}",
                self.nu,
                self.known.len()
            )));
        }
        Ok(())
    }
}

/// Relative residual above which a diagnostic is printed; well-resolved
/// elements sit many orders below this.
const RESIDUAL_WARN: f64 = 1e-10;

/// Solves one element of a homogeneous problem, `operator(f) = 0`.
pub fn solve_element_linear(p: &CollocationProblem, a: f64, b: f64) -> Result<TaylorSeries> {
    solve_element_forced(p, a, b, &|_| 0.0)
}

/// Solves one element of `operator(f) = rhs`, with `rhs` a plain function
/// of the local coordinate.
pub fn solve_element_forced(
    p: &CollocationProblem,
    a: f64,
    b: f64,
    rhs: &dyn Fn(f64) -> f64,
) -> Result<TaylorSeries> {
    p.validate()?;
    let n = p.n_coeffs;
    let nu = p.nu;
    let q = n - nu;
    let (ref_nodes, _) = legendre_nodes(q)?;
    let nodes = map_to_element(&ref_nodes, a, b)?;
    let width = b - a;

    // Operator applied to each basis series at each node.
    let mut columns = vec![vec![0.0; q]; n];
    let mut unit = vec![0.0; n];
    for (col, column) in columns.iter_mut().enumerate() {
        unit[col] = 1.0;
        let basis = TaylorSeries::new(a, width, unit.clone())?;
        for (row, &x) in nodes.iter().enumerate() {
            column[row] = (p.operator)(x, &basis);
        }
        unit[col] = 0.0;
    }
    let scale = columns
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));

    // System rows: Σ_{n >= nu} S_mn C_n = rhs(x_m) − Σ_{n < nu} S_mn C_n.
    let mut matrix = vec![0.0; q * q];
    let mut rhs_vec = vec![0.0; q];
    for row in 0..q {
        for col in 0..q {
            matrix[row * q + col] = columns[nu + col][row];
        }
        let mut f = rhs(nodes[row]);
        for (col, &c) in p.known.iter().enumerate() {
            f -= columns[col][row] * c;
        }
        rhs_vec[row] = f;
    }

    let solved = lu_solve(&mut matrix, &mut rhs_vec, q)?;

    let mut coeffs = Vec::with_capacity(n);
    coeffs.extend_from_slice(p.known);
    coeffs.extend_from_slice(&solved);
    let series = TaylorSeries::new(a, width, coeffs)?;

    // Residual audit at the collocation nodes.
    let coeff_scale = series
        .coeffs()
        .iter()
        .fold(0.0_f64, |m, c| m.max(c.abs()))
        .max(1.0);
    let mut worst = 0.0_f64;
    for &x in &nodes {
        worst = worst.max(((p.operator)(x, &series) - rhs(x)).abs());
    }
    if scale > 0.0 && worst > RESIDUAL_WARN * scale * coeff_scale {
        eprintln!(
            "warning: collocation residual {:.3e} on element [{a:.6e}, {b:.6e}] \
             (scale {:.3e}); solution may be under-resolved",
            worst,
            scale * coeff_scale
        );
    }
    Ok(series)
}

/// Scaled residual of a solved element at its own collocation nodes,
/// relative to the largest operator matrix entry.
pub fn element_residual(
    p: &CollocationProblem,
    series: &TaylorSeries,
    rhs: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let q = p.n_coeffs - p.nu;
    let (ref_nodes, _) = legendre_nodes(q)?;
    let nodes = map_to_element(&ref_nodes, series.center(), series.right())?;
    let mut unit = vec![0.0; p.n_coeffs];
    let mut scale = 0.0_f64;
    for col in 0..p.n_coeffs {
        unit[col] = 1.0;
        let basis = TaylorSeries::new(series.center(), series.width(), unit.clone())?;
        for &x in &nodes {
            scale = scale.max((p.operator)(x, &basis).abs());
        }
        unit[col] = 0.0;
    }
    let worst = nodes
        .iter()
        .map(|&x| ((p.operator)(x, series) - rhs(x)).abs())
        .fold(0.0_f64, f64::max);
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

/// Solves one element of a nonlinear problem by lagging the nonlinearity:
/// the right-hand side is evaluated from the previous iterate until the
/// coefficients settle to `tol` (relative, against the largest coefficient).
///
/// When successive changes stop contracting the iterate is averaged with
/// its predecessor before the next solve. The lagged split has a unit-
/// magnitude iteration multiplier wherever the solution is near its
/// asymptotic value, so the raw sequence merely oscillates there; the
/// average damps that mode to zero. The value returned is always a direct
/// solve output, never a blend.
pub fn solve_element_fixed_point(
    p: &CollocationProblem,
    a: f64,
    b: f64,
    rhs_from_previous: &dyn Fn(f64, &TaylorSeries) -> Result<f64>,
    seed: &TaylorSeries,
    tol: f64,
    max_iter: usize,
) -> Result<TaylorSeries> {
    p.validate()?;
    if seed.len() != p.n_coeffs {
        return Err(Error::Config(format!(
            "seed has {} coefficients, problem expects {}",
            seed.len(),
            p.n_coeffs
        )));
    }
    let q = p.n_coeffs - p.nu;
    let (ref_nodes, _) = legendre_nodes(q)?;
    let nodes = map_to_element(&ref_nodes, a, b)?;
    let width = b - a;

    // Contraction is judged on function and slope values at the
    // collocation nodes. Raw coefficients are useless for this: on short
    // elements the top coefficients carry rounding noise amplified by the
    // inverse basis scale, which never settles even when the represented
    // function has long converged.
    let node_change = |old: &TaylorSeries, new: &TaylorSeries| -> f64 {
        let mut change = 0.0_f64;
        let mut scale = f64::MIN_POSITIVE;
        for &x in &nodes {
            let (v0, v1) = (old.eval(x, 0), new.eval(x, 0));
            let (d0, d1) = (old.eval(x, 1), new.eval(x, 1));
            change = change.max((v1 - v0).abs()).max(width * (d1 - d0).abs());
            scale = scale.max(v1.abs()).max(width * d1.abs());
        }
        change / scale
    };

    let mut previous = seed.clone();
    let mut last_change = f64::INFINITY;
    let mut damped = false;
    let mut stalled = 0usize;
    for iteration in 0..max_iter {
        let frozen = previous.clone();
        let mut rhs_err = None;
        // A failing right-hand side is re-evaluated below to surface
        // the error; NAN keeps this closure total in the meantime.
        let rhs = |x: f64| rhs_from_previous(x, &frozen).unwrap_or(f64::NAN);
        let next = solve_element_forced(p, a, b, &rhs)?;
        // Surface any right-hand-side domain failure.
        for &x in &nodes {
            if let Err(e) = rhs_from_previous(x, &frozen) {
                rhs_err = Some(e);
            }
        }
        if let Some(e) = rhs_err {
            return Err(e);
        }
        let change = node_change(&previous, &next);
        if change <= tol {
            return Ok(next);
        }
        // A damped sequence that has stopped improving while sitting within
        // three decades of the tolerance is at the rounding floor of the
        // element solve; more iterations only reproduce the same cycle.
        if damped && change >= 0.9 * last_change {
            stalled += 1;
            if stalled >= 2 && change <= tol * 1e3 {
                return Ok(next);
            }
        } else {
            stalled = 0;
        }
        if iteration >= 1 && !(change < 0.7 * last_change) {
            damped = true;
        }
        previous = if damped {
            let blended: Vec<f64> = previous
                .coeffs()
                .iter()
                .zip(next.coeffs())
                .map(|(old, new)| 0.5 * (old + new))
                .collect();
            TaylorSeries::new(a, width, blended)?
        } else {
            next
        };
        last_change = change;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_change,
    })
}

/// Element series spanning a mesh, with derivative continuity across
/// interior breakpoints up to the propagation order.
#[derive(Debug, Clone)]
pub struct PiecewiseSolution {
    mesh: Mesh,
    elements: Vec<TaylorSeries>,
}

impl PiecewiseSolution {
    pub fn new(mesh: Mesh, elements: Vec<TaylorSeries>) -> Result<Self> {
        if elements.len() != mesh.element_count() {
            return Err(Error::Domain(format!(
                "{} elements for {} mesh intervals",
                elements.len(),
                mesh.element_count()
            )));
        }
        Ok(Self { mesh, elements })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn elements(&self) -> &[TaylorSeries] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &TaylorSeries {
        &self.elements[index]
    }

    /// Derivative of the piecewise polynomial at a global coordinate.
    pub fn eval(&self, x: f64, deriv_order: usize) -> Result<f64> {
        let index = self.mesh.locate(x)?;
        let series = &self.elements[index];
        Ok(series.eval(x - series.center(), deriv_order))
    }

    /// Largest relative mismatch of derivatives 0..nu−1 across interior
    /// breakpoints.
    pub fn continuity_defect(&self, nu: usize) -> f64 {
        let mut worst = 0.0_f64;
        for i in 1..self.elements.len() {
            let left = &self.elements[i - 1];
            let right = &self.elements[i];
            for order in 0..nu {
                let a = left.eval(left.width(), order);
                let b = right.eval(0.0, order);
                let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((a - b).abs() / scale);
            }
        }
        worst
    }
}

/// Marches a linear problem across a mesh. The first element is solved
/// with `first_nu` pinned coefficients (`first_known`); every later
/// element takes its `later_nu` leading coefficients from the previous
/// element's endpoint derivatives. `order` is N − ν for every element.
pub fn propagate<F, Op>(
    mesh: &Mesh,
    make_operator: F,
    first_known: &[f64],
    first_nu: usize,
    later_nu: usize,
    order: usize,
) -> Result<PiecewiseSolution>
where
    F: Fn(usize, f64, f64) -> Op,
    Op: Fn(f64, &TaylorSeries) -> f64,
{
    if first_known.len() != first_nu {
        return Err(Error::Config(format!(
            "first element expects {} known coefficients, got {}",
            first_nu,
            first_known.len()
        )));
    }
    let mut elements = Vec::with_capacity(mesh.element_count());
    let mut known: Vec<f64> = first_known.to_vec();
    for index in 0..mesh.element_count() {
        let (a, b) = mesh.interval(index);
        let nu = if index == 0 { first_nu } else { later_nu };
        let operator = make_operator(index, a, b);
        let problem = CollocationProblem {
            operator: &operator,
            nu,
            n_coeffs: nu + order,
            known: &known,
        };
        let series =
            solve_element_linear(&problem, a, b).map_err(|e| e.on_element(index))?;
        known = series.shift(series.width());
        known.truncate(later_nu);
        elements.push(series);
    }
    PiecewiseSolution::new(mesh.clone(), elements)
}

/// Dense LU with partial pivoting for the small per-element systems.
fn lu_solve(matrix: &mut [f64], rhs: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let scale = matrix.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = matrix[col * n + col].abs();
        for row in col + 1..n {
            let v = matrix[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= scale * 1e-300 || pivot_val == 0.0 {
            return Err(Error::SingularMatrix {
                pivot: pivot_val,
                scale,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                matrix.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        let inv = 1.0 / matrix[col * n + col];
        for row in col + 1..n {
            let factor = matrix[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            matrix[row * n + col] = 0.0;
            for k in col + 1..n {
                matrix[row * n + k] -= factor * matrix[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for col in row + 1..n {
            acc -= matrix[row * n + col] * x[col];
        }
        x[row] = acc / matrix[row * n + row];
    }
    Ok(x)
}
