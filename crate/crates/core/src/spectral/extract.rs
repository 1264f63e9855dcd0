use serde::{Deserialize, Serialize};

use super::{LorentzianFit, LorentzianPeak, SiEstimate};
use crate::error::{Error, Result};

/// How side-band centres are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Folding {
    /// Signed offsets on a two-sided axis (heterodyne): red above, blue below.
    Unfolded,
    /// Absolute frequencies on a one-sided axis (homodyne).
    Folded,
}

/// Each first-order side-band sits at ±Ω + δ/2, so
/// δ̂ = (f_r − pump) + (f_b − pump) unfolded and δ̂ = |f_r| − |f_b| folded.
/// δ̄ uses Ω estimated from the doublet half-separation.
pub fn extract_si(red: &LorentzianPeak, blue: &LorentzianPeak, pump_offset: f64, mode: Folding) -> Result<SiEstimate> {
    let (delta, om) = delta_and_midpoint(red.center, blue.center, pump_offset, mode)?;
    Ok(SiEstimate {
        delta_hat: delta,
        delta_normalized: delta / om,
        ci_low: delta,
        ci_high: delta,
        fit_rms: 0.0,
        n_peaks_used: 2,
        std_error: 0.0,
    })
}

fn delta_and_midpoint(red: f64, blue: f64, pump: f64, mode: Folding) -> Result<(f64, f64)> {
    match mode {
        Folding::Unfolded => {
            if red <= blue {
                return Err(Error::OrderingViolation);
            }
            Ok(((red - pump) + (blue - pump), (red - blue) / 2.0))
        }
        Folding::Folded => Ok((red.abs() - blue.abs(), (red.abs() + blue.abs()) / 2.0)),
    }
}

/// δ̂ from two peaks of a fit, with a 95 % interval from the centre
/// covariance. `mech_freq` overrides the doublet-midpoint Ω for δ̄.
pub fn estimate_from_fit(
    fit: &LorentzianFit,
    red: usize,
    blue: usize,
    pump_offset: f64,
    mode: Folding,
    mech_freq: Option<f64>,
) -> Result<SiEstimate> {
    let n = fit.peaks.len();
    if red >= n || blue >= n || red == blue {
        return Err(Error::invalid("peak index", format!("need two distinct indices below {n}")));
    }
    let (cr, cb) = (fit.peaks[red].center, fit.peaks[blue].center);
    let (delta, om) = delta_and_midpoint(cr, cb, pump_offset, mode)?;
    let cross = match mode {
        Folding::Unfolded => 1.0,
        Folding::Folded => -cr.signum() * cb.signum(),
    };
    let var = fit.center_std(red).powi(2) + fit.center_std(blue).powi(2) + 2.0 * cross * fit.center_cov(red, blue);
    let se = var.max(0.0).sqrt();
    let om = mech_freq.unwrap_or(om);
    Ok(SiEstimate {
        delta_hat: delta,
        delta_normalized: delta / om,
        ci_low: delta - 1.96 * se,
        ci_high: delta + 1.96 * se,
        fit_rms: fit.rms,
        n_peaks_used: 2,
        std_error: se,
    })
}
