//! Lorentzian spectra: synthesis, least-squares fitting, extraction of δ
//! from a fitted side-band pair and bootstrap intervals.

mod bootstrap;
mod extract;
mod fit;
pub mod io;
pub mod lm;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bootstrap::{bootstrap_ci, BootstrapConfig};
pub use extract::{estimate_from_fit, extract_si, Folding};
pub use fit::{fit_lorentzians, FitOptions, LorentzianFit};
pub use synth::{triplet_grid, triplet_peaks, lorentzian, synth_spectrum, uniform_grid, NoiseSpec};

/// Sampled power spectral density on an increasing frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freq: Vec<f64>,
    pub values: Vec<f64>,
    /// Optional per-point standard deviation.
    pub sigma: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn new(freq: Vec<f64>, values: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if freq.len() != values.len() || sigma.as_ref().is_some_and(|s| s.len() != freq.len()) {
            return Err(Error::Parse("column lengths differ".into()));
        }
        if freq.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite value in spectrum".into()));
        }
        if let Some(s) = &sigma {
            if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Parse("sigma must be finite and > 0".into()));
            }
        }
        if freq.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("frequency grid must be strictly increasing".into()));
        }
        Ok(Spectrum { freq, values, sigma })
    }

    /// Sorts an arbitrary-order grid ascending. Returns the spectrum and
    /// whether any reordering happened.
    pub fn sorted(freq: Vec<f64>, values: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<(Self, bool)> {
        if freq.windows(2).all(|w| w[1] > w[0]) {
            return Ok((Spectrum::new(freq, values, sigma)?, false));
        }
        if freq.len() != values.len() {
            return Err(Error::Parse("column lengths differ".into()));
        }
        let mut idx: Vec<usize> = (0..freq.len()).collect();
        idx.sort_by(|&a, &b| freq[a].total_cmp(&freq[b]));
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let s = Spectrum::new(pick(&freq), pick(&values), sigma.as_deref().map(pick))?;
        Ok((s, true))
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Points with `lo <= f <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Spectrum {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.freq[i] >= lo && self.freq[i] <= hi).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Spectrum {
            freq: pick(&self.freq),
            values: pick(&self.values),
            sigma: self.sigma.as_deref().map(pick),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianPeak {
    pub center: f64,
    /// Full width at half maximum.
    pub fwhm: f64,
    /// Peak height above the baseline.
    pub amplitude: f64,
}

impl LorentzianPeak {
    pub fn new(center: f64, fwhm: f64, amplitude: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid("center", "must be finite"));
        }
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return Err(Error::invalid("fwhm", "must be finite and > 0"));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid("amplitude", "must be finite and > 0"));
        }
        Ok(LorentzianPeak { center, fwhm, amplitude })
    }
}

/// δ measured from a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiEstimate {
    pub delta_hat: f64,
    pub delta_normalized: f64,
    /// 95 % interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Root-mean-square fit residual.
    pub fit_rms: f64,
    pub n_peaks_used: usize,
    /// Standard error of `delta_hat` from the fit covariance.
    pub std_error: f64,
}
