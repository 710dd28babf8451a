//! Mixed spin-boson coupling for superconducting-qubit readout.
//!
//! A qubit coupled to both quadratures of a resonator can have its linear
//! dispersive shift χ cancelled while keeping a Kerr shift χ′. This crate
//! builds the relevant Hamiltonians, extracts χ and χ′ from exact spectra,
//! evaluates photon shot-noise dephasing and simulates readout through χ′.
//!
//! ```
//! use mixcoupling::dispersive::{chi_zero_gp, mixed_model_shifts};
//! use mixcoupling::models::MixedCouplingParams;
//! use mixcoupling::units::{GHZ, MHZ};
//!
//! let p = MixedCouplingParams::new(5.0 * GHZ, 8.0 * GHZ, 100.0 * MHZ, 0.0, 10);
//! let plain = mixed_model_shifts(&p)?;
//!
//! // On the lower zero-χ branch χ nearly vanishes but χ′ survives.
//! let (g_p, _) = chi_zero_gp(100.0 * MHZ, 5.0 * GHZ, 8.0 * GHZ)?;
//! let mixed = mixed_model_shifts(&p.with_couplings(100.0 * MHZ, g_p))?;
//! assert!(mixed.chi.abs() < 0.01 * plain.chi.abs());
//! assert!(mixed.chi_prime.abs() > 1.0);
//! # Ok::<(), mixcoupling::Error>(())
//! ```
//!
//! Frequencies in parameter records are linear (Hz); see [`units`].

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dephasing;
pub mod diagnostics;
pub mod dispersive;
pub mod error;
pub mod models;
pub mod ode;
pub mod quantum;
pub mod readout;
pub mod units;

pub use error::{Error, Result};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/shifts.md")]
    mod shifts {}
    #[doc = include_str!("../../../book/src/dephasing.md")]
    mod dephasing {}
    #[doc = include_str!("../../../book/src/readout.md")]
    mod readout {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
