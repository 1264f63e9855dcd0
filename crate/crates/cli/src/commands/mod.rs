mod closed;
mod simulate;
mod spectra;

pub use closed::{classify, optimum, si, sweep};
pub use simulate::simulate;
pub use spectra::{fit, synth, FitArgs};

use serde::Serialize;
use sideband_core::spectral::{LorentzianPeak, SiEstimate};

use crate::config::{RunConfig, Units};
use crate::Format;

/// Resolved command-line and config state shared by all commands.
pub struct Ctx {
    pub cfg: RunConfig,
    pub units: Units,
    pub seed: u64,
    pub format: Option<Format>,
}

impl Ctx {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// A rate in rad/s expressed in the configured units.
    pub fn rate(&self, rad: f64) -> f64 {
        rad / self.units.to_rad()
    }
}

#[derive(Debug, Serialize)]
pub struct PeakOut {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

impl PeakOut {
    /// `scale` converts the axis units of the fit into output units.
    pub fn new(p: &LorentzianPeak, scale: f64) -> Self {
        PeakOut {
            center: p.center * scale,
            fwhm: p.fwhm * scale,
            amplitude: p.amplitude,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateOut {
    pub delta_hat: f64,
    pub delta_normalized: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fit_rms: f64,
    pub std_error: f64,
}

impl EstimateOut {
    pub fn new(e: &SiEstimate, scale: f64) -> Self {
        EstimateOut {
            delta_hat: e.delta_hat * scale,
            delta_normalized: e.delta_normalized,
            ci_low: e.ci_low * scale,
            ci_high: e.ci_high * scale,
            fit_rms: e.fit_rms,
            std_error: e.std_error * scale,
        }
    }
}
