//! Classical-field Langevin integration of the driven cavity and its
//! mechanical mode, spectra of the result, and δ measured from them.
//!
//! Equations, in the frame rotating at the pump:
//!
//! ```text
//! da/dt = (iΔ − κ/2) a + i g0 a (b + b*) + E
//! db/dt = (−iΩ − Γ/2) b − i g0 |a|² + √Γ ξ(t)
//! ```
//!
//! with ξ white noise of strength n_th. Γ = 0 is admitted here.

mod integrate;
mod measure;
mod welch;

pub use integrate::{integrate_classical, static_state, SimConfig, StaticState, Trajectory};
pub use measure::{inject_red_shift, measure_si_from_sim, measure_si_ringdown, MeasureOptions, RingDown, SimMeasurement};
pub use welch::{psd, welch_psd, WelchConfig, Window};
