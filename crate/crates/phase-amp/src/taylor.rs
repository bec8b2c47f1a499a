//! Taylor-basis polynomials and local polynomial series.
//!
//! The basis is T_n(x) = x^n / n!. A function on an element [a, b] is
//! expanded in the local coordinate x ∈ [0, b − a] as
//! f(a + x) = Σ_n T_n(x) C_n, which makes every coefficient a derivative
//! value, C_n = f⁽ⁿ⁾(a). Derivative continuity of any order across
//! elements then amounts to copying leading coefficients, and pairing the
//! rapidly growing factorials with the basis keeps the coefficients at a
//! uniform magnitude even for high orders.

use crate::error::{Error, Result};

/// Evaluates T_0(x) … T_{n_max}(x) with the two-term recurrence
/// T_n = (x / n) · T_{n−1}, T_0 = 1. No factorial is ever formed.
pub fn tb_eval_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(1.0);
    for n in 1..=n_max {
        let prev = values[n - 1];
        values.push(prev * x / n as f64);
    }
    values
}

/// Coefficient in the product identity T_m · T_n = binom(m + n, n) · T_{m+n}.
pub fn tb_product_coeff(m: u32, n: u32) -> Result<f64> {
    let m = m as f64;
    let mut acc = 1.0_f64;
    for i in 1..=n {
        acc = acc * (m + i as f64) / i as f64;
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::Domain(format!(
            "binomial({}, {}) exceeds the representable range",
            m + n as f64,
            n
        )))
    }
}

/// Number of m-variable monomials of total degree n: binom(n + m − 1, m − 1).
pub fn multinomial_term_count(n: u64, m: u64) -> Result<u64> {
    if m < 1 {
        return Err(Error::Domain(format!(
            "variable count m must be at least 1, got {m}"
        )));
    }
    // binom(n + m - 1, m - 1) with exact integer arithmetic.
    let mut acc: u128 = 1;
    for i in 1..m {
        acc = acc
            .checked_mul((n + i) as u128)
            .ok_or_else(|| Error::Domain("multinomial term count overflow".into()))?;
        acc /= i as u128;
    }
    u64::try_from(acc).map_err(|_| Error::Domain("multinomial term count overflow".into()))
}

/// Polynomial on one element, stored as derivative values at the left endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    center: f64,
    width: f64,
    coeffs: Vec<f64>,
}

impl TaylorSeries {
    /// `center` is the element's left endpoint, `width` its length and
    /// `coeffs[n]` the n-th derivative of the represented function there.
    pub fn new(center: f64, width: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!(
                "element width must be positive and finite, got {width}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("a series needs at least one coefficient".into()));
        }
        Ok(Self {
            center,
            width,
            coeffs,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn right(&self) -> f64 {
        self.center + self.width
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when `x_local` lies outside [0, width] and evaluation
    /// therefore extrapolates.
    pub fn is_extrapolation(&self, x_local: f64) -> bool {
        !(0.0..=self.width).contains(&x_local)
    }

    /// Value of the `deriv_order`-th derivative at `center + x_local`.
    ///
    /// Differentiation lowers the basis index (d/dx T_n = T_{n−1}), so the
    /// k-th derivative is Σ_j T_j(x) C_{j+k}. Orders at or beyond the
    /// coefficient count return 0 exactly. Evaluation outside [0, width]
    /// is permitted but extrapolates; see [`Self::is_extrapolation`].
    pub fn eval(&self, x_local: f64, deriv_order: usize) -> f64 {
        if deriv_order >= self.coeffs.len() {
            return 0.0;
        }
        // Horner form of Σ_j (x^j / j!) C_{j + deriv_order}.
        let top = self.coeffs.len() - 1;
        let mut acc = self.coeffs[top];
        for j in (deriv_order..top).rev() {
            let steps = (j - deriv_order + 1) as f64;
            acc = self.coeffs[j] + acc * x_local / steps;
        }
        acc
    }

    /// Derivative values of the represented polynomial at `center + h`,
    /// D_k = Σ_j T_j(h) C_{k+j}. Exact in exact arithmetic; this is the
    /// carrier of boundary continuity between elements.
    pub fn shift(&self, h: f64) -> Vec<f64> {
        let n = self.coeffs.len();
        let basis = tb_eval_all(n - 1, h);
        (0..n)
            .map(|k| {
                // Sum smallest terms first: T_j(h) decays with j for the
                // step sizes elements use.
                let mut acc = 0.0;
                for j in (0..n - k).rev() {
                    acc += basis[j] * self.coeffs[k + j];
                }
                acc
            })
            .collect()
    }
}
