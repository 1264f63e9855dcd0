//! Side-band inequivalence (SI) of a driven optomechanical cavity.
//!
//! The SI δ is the offset of the mean of the red and blue first-order
//! side-band detunings from the pump detuning. This crate evaluates it in
//! closed form, solves the underlying harmonic-balance equations
//! numerically, integrates the classical Langevin equations, and measures δ
//! from spectra by Lorentzian fitting.
//!
//! All rates are angular frequencies.

pub mod closed_form;
pub mod cubic;
pub mod error;
pub mod harmonic_balance;
pub mod langevin;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{DimGroups, DriveParams, OmParams};
