//! Energy-normalized continuum states of the radial Schrödinger equation.
//!
//! Regular and irregular solutions are built in phase-amplitude form,
//! S = A sin Φ and C = A cos Φ. The squared amplitude Y = A² is integrated
//! inward on the inverted coordinate ρ = 1/r so its boundary value at
//! ρ = 0 pins the Dirac-delta energy normalization, and the phase follows
//! from the constant Wronskian W = 2/π once it is synchronized at the
//! first node of the regular solution. All local solves use Taylor-basis
//! spectral-element collocation.

pub mod error;
pub mod taylor;
pub mod mesh;
pub mod potentials;
pub mod amplitude;
pub mod phase;
pub mod assembly;
pub mod oracle;
pub mod cli;

pub use error::{Error, Result};
pub use potentials::{PotentialKind, RadialContext};
pub use taylor::TaylorSeries;

/// Wronskian of energy-normalized solution pairs, C·Ṡ − S·Ċ = 2/π.
pub const WRONSKIAN: f64 = std::f64::consts::FRAC_2_PI;
