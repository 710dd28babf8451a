//! Physical constants and frequency conventions.
//!
//! Parameter records carry linear frequencies ν in Hz. Everything that
//! enters a Hamiltonian or an equation of motion is an angular frequency
//! ω = 2πν in rad/s, with ħ divided out.

use std::f64::consts::TAU;

/// Planck constant h in J·s (CODATA 2018, exact).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant k_B in J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Hz → rad/s.
#[inline]
pub fn angular(nu: f64) -> f64 {
    TAU * nu
}

/// rad/s → Hz.
#[inline]
pub fn linear(omega: f64) -> f64 {
    omega / TAU
}

pub const KHZ: f64 = 1e3;
pub const MHZ: f64 = 1e6;
pub const GHZ: f64 = 1e9;
