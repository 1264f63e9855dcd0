//! Physical parameters, dimensionless groups, mean displacement and the
//! steady-state photon number.
//!
//! All rates are angular (rad/s). Only the ratios between them matter for
//! every closed form in this crate, so any consistent unit (for instance
//! multiples of Ω) works as well.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubic;
use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Default κ/Ω cut between "resolved" and "Doppler" reporting.
pub const RESOLVED_THRESHOLD: f64 = 0.25;

/// Cavity and oscillator rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmParams {
    /// Mechanical frequency Ω.
    pub mech_freq: f64,
    /// Optical decay rate κ.
    pub optical_decay: f64,
    /// Mechanical decay rate Γ.
    pub mech_decay: f64,
    /// Single-photon coupling g0.
    pub coupling: f64,
    /// Pump detuning Δ = ω_c − ω.
    #[serde(default)]
    pub detuning: f64,
}

impl OmParams {
    /// Builds and validates a parameter set for the closed-form operations
    /// (Γ > 0 required).
    pub fn new(mech_freq: f64, optical_decay: f64, mech_decay: f64, coupling: f64, detuning: f64) -> Result<Self> {
        let p = OmParams {
            mech_freq,
            optical_decay,
            mech_decay,
            coupling,
            detuning,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_mech_decay(mut self, mech_decay: f64) -> Self {
        self.mech_decay = mech_decay;
        self
    }

    /// Total decay γ = κ + Γ.
    pub fn gamma_total(&self) -> f64 {
        self.optical_decay + self.mech_decay
    }

    /// Invariants for the closed forms: Ω, κ, Γ > 0, g0 ≥ 0, all finite.
    pub fn validate(&self) -> Result<()> {
        self.validate_undamped()?;
        if self.mech_decay <= 0.0 {
            return Err(Error::invalid("mech_decay", "must be > 0"));
        }
        Ok(())
    }

    /// As [`OmParams::validate`] but admitting Γ = 0 (simulator only).
    pub fn validate_undamped(&self) -> Result<()> {
        let fields = [
            ("mech_freq", self.mech_freq),
            ("optical_decay", self.optical_decay),
            ("mech_decay", self.mech_decay),
            ("coupling", self.coupling),
            ("detuning", self.detuning),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.mech_freq <= 0.0 {
            return Err(Error::invalid("mech_freq", "must be > 0"));
        }
        if self.optical_decay <= 0.0 {
            return Err(Error::invalid("optical_decay", "must be > 0"));
        }
        if self.mech_decay < 0.0 {
            return Err(Error::invalid("mech_decay", "must be >= 0"));
        }
        if self.coupling < 0.0 {
            return Err(Error::invalid("coupling", "must be >= 0"));
        }
        Ok(())
    }

    /// Multiplies every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        OmParams {
            mech_freq: self.mech_freq * factor,
            optical_decay: self.optical_decay * factor,
            mech_decay: self.mech_decay * factor,
            coupling: self.coupling * factor,
            detuning: self.detuning * factor,
        }
    }
}

/// Optical pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Pump power P_op in W.
    pub pump_power: f64,
    /// Pump angular frequency ω_L in rad/s.
    pub pump_freq: f64,
    /// External coupling efficiency η ∈ [0, 1].
    pub external_coupling: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_power.is_finite() && self.pump_power >= 0.0) {
            return Err(Error::invalid("pump_power", "must be finite and >= 0"));
        }
        if !(self.pump_freq.is_finite() && self.pump_freq > 0.0) {
            return Err(Error::invalid("pump_freq", "must be finite and > 0"));
        }
        if !(0.0..=1.0).contains(&self.external_coupling) {
            return Err(Error::invalid("external_coupling", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Intracavity photon influx η κ P_op / (ħ ω_L), in 1/s².
    pub fn photon_influx(&self, optical_decay: f64) -> f64 {
        self.external_coupling * optical_decay * self.pump_power / (HBAR * self.pump_freq)
    }
}

/// Dimensionless constants of the normalised SI curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimGroups {
    /// α = 4 g0² / Γ²
    pub alpha: f64,
    /// β = 2 g0² / Ω²
    pub beta: f64,
    /// ϑ = γ / (2Ω)
    pub theta: f64,
    /// ψ = Γ² / (2Ω²)
    pub psi: f64,
    /// γ = κ + Γ, rad/s
    pub gamma_total: f64,
}

impl DimGroups {
    /// Groups given directly (e.g. read off a figure) rather than derived
    /// from rates. ψ and γ only scale the curve and may be set to 1.
    pub fn from_raw(alpha: f64, beta: f64, theta: f64, psi: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("theta", theta), ("psi", psi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        Ok(DimGroups {
            alpha,
            beta,
            theta,
            psi,
            gamma_total: f64::NAN,
        })
    }
}

pub fn dimensionless_groups(p: &OmParams) -> Result<DimGroups> {
    p.validate()?;
    let (om, g0, gm) = (p.mech_freq, p.coupling, p.mech_decay);
    let gamma = p.gamma_total();
    Ok(DimGroups {
        alpha: 4.0 * g0 * g0 / (gm * gm),
        beta: 2.0 * g0 * g0 / (om * om),
        theta: gamma / (2.0 * om),
        psi: gm * gm / (2.0 * om * om),
        gamma_total: gamma,
    })
}

/// κ/Ω.
pub fn sideband_resolution_ratio(p: &OmParams) -> f64 {
    p.optical_decay / p.mech_freq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Resolved,
    Doppler,
    Unresolved,
}

/// Reporting label for κ/Ω: below `threshold` resolved, up to 1 Doppler,
/// above 1 unresolved.
pub fn classify_resolution(ratio: f64, threshold: f64) -> Resolution {
    if ratio < threshold {
        Resolution::Resolved
    } else if ratio <= 1.0 {
        Resolution::Doppler
    } else {
        Resolution::Unresolved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDisplacement {
    pub b0: Complex64,
    /// x0 = b0 + b0* = 2 Re b0
    pub x0: f64,
}

/// Static phonon amplitude driven by `nbar` photons.
///
/// Steady state of db/dt = (−iΩ − Γ/2) b − i g0 n̄, i.e.
/// b0 = −i g0 n̄ / (iΩ + Γ/2) and x0 = −2 g0 n̄ Ω / (Ω² + Γ²/4).
/// The sign is the one carried through the side-band algebra; the
/// displacement is linear in n̄.
pub fn mean_displacement(p: &OmParams, nbar: f64) -> Result<MeanDisplacement> {
    p.validate_undamped()?;
    check_nbar(nbar)?;
    let denom = Complex64::new(p.mech_decay / 2.0, p.mech_freq);
    let b0 = Complex64::new(0.0, -p.coupling * nbar) / denom;
    Ok(MeanDisplacement { b0, x0: 2.0 * b0.re })
}

/// dx0/dn̄, the displacement per intracavity photon.
pub(crate) fn displacement_per_photon(p: &OmParams) -> f64 {
    let om = p.mech_freq;
    let gm = p.mech_decay;
    -2.0 * p.coupling * om / (om * om + gm * gm / 4.0)
}

pub(crate) fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::invalid("nbar", "must be finite and >= 0"));
    }
    Ok(())
}

/// Real non-negative steady-state photon numbers for a given pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonSteadyState {
    /// Ascending.
    pub roots: Vec<f64>,
    /// Three distinct roots.
    pub bistable: bool,
}

/// Solves n̄ [(κ/2)² + (Δ + g0 x0(n̄))²] = η κ P_op / (ħ ω_L).
pub fn steady_state_photon(p: &OmParams, d: &DriveParams) -> Result<PhotonSteadyState> {
    p.validate_undamped()?;
    d.validate()?;
    solve_photon_cubic(p, d.photon_influx(p.optical_decay))
}

/// Same cubic with the right-hand side (photon influx, 1/s²) given directly.
pub fn solve_photon_cubic(p: &OmParams, influx: f64) -> Result<PhotonSteadyState> {
    if !(influx.is_finite() && influx >= 0.0) {
        return Err(Error::invalid("influx", "must be finite and >= 0"));
    }
    if influx == 0.0 {
        return Ok(PhotonSteadyState {
            roots: vec![0.0],
            bistable: false,
        });
    }
    let (delta, half_k) = (p.detuning, p.optical_decay / 2.0);
    // Δ_eff = Δ + s n̄
    let s = p.coupling * displacement_per_photon(p);
    let residual = |n: f64| n * (half_k * half_k + (delta + s * n).powi(2)) - influx;
    let slope = |n: f64| half_k * half_k + (delta + s * n).powi(2) + 2.0 * s * n * (delta + s * n);

    let raw = cubic::real_roots(s * s, 2.0 * delta * s, delta * delta + half_k * half_k, -influx);
    let mut roots: Vec<f64> = raw.into_iter().map(|r| cubic::polish(residual, slope, r)).collect();
    let max_root = roots.iter().fold(0.0f64, |m, r| m.max(*r));
    for r in roots.iter_mut() {
        if r.abs() < 1e-12 * max_root {
            *r = 0.0;
        }
    }
    roots.retain(|r| *r >= 0.0);
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * max_root);
    if roots.is_empty() {
        return Err(Error::NoPhysicalRoot);
    }
    let bistable = roots.len() == 3;
    Ok(PhotonSteadyState { roots, bistable })
}
