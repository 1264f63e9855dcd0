use std::f64::consts::TAU;
use std::path::Path;

use serde::Deserialize;
use sideband_core::langevin::{WelchConfig, Window};
use sideband_core::{DriveParams, OmParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Cyclic frequencies (ω/2π); converted to rad/s on input and back on output.
    Hz,
    /// Angular frequencies, used as given.
    Rad,
}

impl Units {
    /// Factor taking a rate in these units to rad/s.
    pub fn to_rad(self) -> f64 {
        match self {
            Units::Hz => TAU,
            Units::Rad => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Units::Hz => "hz",
            Units::Rad => "rad",
        }
    }
}

/// Everything a subcommand may read; each uses only its own sections.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: Option<Units>,
    pub params: Option<ParamsSection>,
    /// Intracavity photon number.
    pub nbar: Option<f64>,
    pub drive: Option<DriveSection>,
    pub sweep: Option<SweepSection>,
    pub classify: Option<ClassifySection>,
    pub simulate: Option<SimulateSection>,
    pub fit: Option<FitSection>,
    pub synth: Option<SynthSection>,
    pub output: Option<OutputSection>,
    pub seed: Option<u64>,
}

/// Rates in the configured units.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub mech_freq: f64,
    pub optical_decay: f64,
    pub mech_decay: f64,
    pub coupling: f64,
    #[serde(default)]
    pub detuning: f64,
}

impl ParamsSection {
    pub fn to_rad(self, u: Units) -> OmParams {
        let k = u.to_rad();
        OmParams {
            mech_freq: self.mech_freq * k,
            optical_decay: self.optical_decay * k,
            mech_decay: self.mech_decay * k,
            coupling: self.coupling * k,
            detuning: self.detuning * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// W.
    pub pump_power: f64,
    /// Pump frequency in the configured units.
    pub pump_freq: f64,
    pub external_coupling: f64,
    /// Which steady state to use when the cavity is bistable.
    #[serde(default)]
    pub branch: Branch,
}

impl DriveSection {
    pub fn to_rad(self, u: Units) -> DriveParams {
        DriveParams {
            pump_power: self.pump_power,
            pump_freq: self.pump_freq * u.to_rad(),
            external_coupling: self.external_coupling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Nbar,
    MechFreq,
    OpticalDecay,
    MechDecay,
    Coupling,
    Detuning,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Nbar => "nbar",
            SweepVariable::MechFreq => "mech_freq",
            SweepVariable::OpticalDecay => "optical_decay",
            SweepVariable::MechDecay => "mech_decay",
            SweepVariable::Coupling => "coupling",
            SweepVariable::Detuning => "detuning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepSection {
    /// Grid values in the configured units, endpoints included.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let (a, b, n) = (self.start, self.stop, self.points);
        if !(a.is_finite() && b.is_finite()) {
            return Err(CliError::validation("sweep range must be finite"));
        }
        if n == 0 || b < a || (n > 1 && a == b) {
            return Err(CliError::validation(format!("sweep range [{a}, {b}] with {n} points is empty")));
        }
        if self.scale == Scale::Log && a <= 0.0 {
            return Err(CliError::validation("log sweep needs a positive start"));
        }
        let at = |i: usize| {
            if n == 1 {
                return a;
            }
            let t = i as f64 / (n - 1) as f64;
            match self.scale {
                Scale::Linear => a + t * (b - a),
                Scale::Log => a * (b / a).powf(t),
            }
        };
        // pin the far endpoint exactly
        Ok((0..n).map(|i| if i + 1 == n { b } else { at(i) }).collect())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Driven from rest, optionally with a thermal bath.
    #[default]
    Driven,
    /// Kicked from the strongly driven fixed point.
    Ringdown,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default)]
    pub mode: SimMode,
    /// Step in units of 1/Ω.
    pub dt: f64,
    /// Record length in units of 1/Ω.
    pub duration: f64,
    /// Drive E, in configured rate units (driven mode).
    #[serde(default)]
    pub drive: f64,
    #[serde(default)]
    pub thermal_occupation: f64,
    #[serde(default)]
    pub transient_fraction: f64,
    #[serde(default = "one")]
    pub sample_stride: usize,
    /// Ring-down: photon number of the fixed point.
    pub photons: Option<f64>,
    /// Ring-down: pins Δ + g0·x0 at the fixed point, overriding the
    /// configured detuning; configured units.
    pub effective_detuning: Option<f64>,
    #[serde(default = "default_kick")]
    pub kick: f64,
    #[serde(default = "default_phases")]
    pub phases: usize,
    /// Fit half-window in units of Ω.
    #[serde(default = "default_half_window")]
    pub half_window: f64,
    /// Shift added to the red side-band before analysis, configured units.
    pub inject_red_shift: Option<f64>,
    /// Welch segment length; 0 is a single periodogram of the whole record.
    #[serde(default)]
    pub segment_length: usize,
    #[serde(default)]
    pub overlap: f64,
    #[serde(default = "default_window")]
    pub window: Window,
}

fn one() -> usize {
    1
}

fn default_kick() -> f64 {
    0.1
}

fn default_phases() -> usize {
    2
}

fn default_half_window() -> f64 {
    0.5
}

fn default_window() -> Window {
    Window::Rectangular
}

impl SimulateSection {
    pub fn welch(&self) -> WelchConfig {
        WelchConfig {
            segment_length: self.segment_length,
            overlap: self.overlap,
            window: self.window,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: Option<String>,
    /// Number of Lorentzians; the outermost two are the side-bands.
    pub peaks: Option<usize>,
    /// Pump position on the frequency axis.
    pub pump_offset: Option<f64>,
    /// One-sided axis with absolute side-band frequencies.
    pub folded: Option<bool>,
    /// Ω for δ̄; the doublet half-separation when absent.
    pub mech_freq: Option<f64>,
    /// Bootstrap resamples for a percentile interval; 0 keeps the
    /// covariance interval.
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSpec {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    /// Explicit peaks; the blue/central/red triplet of `delta_normalized`
    /// is used when absent.
    pub peaks: Option<Vec<PeakSpec>>,
    pub mech_freq: Option<f64>,
    pub delta_normalized: Option<f64>,
    /// Grid [lo, hi] and point count; ±2Ω with 2001 points by default.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
    /// Noise level; noiseless when absent.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub format: Option<crate::Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
        }
    }

    pub fn params(&self) -> Result<ParamsSection, CliError> {
        self.params
            .ok_or_else(|| CliError::validation("missing [params] section (mech_freq, optical_decay, mech_decay, coupling)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_field_is_named() {
        let err = toml::from_str::<RunConfig>("[params]\noptical_decay = 0.1\nmech_decay = 0.001\ncoupling = 0.01\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("mech_freq"), "{err}");
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let s = SweepSection {
            variable: SweepVariable::Nbar,
            start: 1.0,
            stop: 1e4,
            points: 5,
            scale: Scale::Log,
        };
        let g = s.grid().unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[4], 1e4);
        assert!((g[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn empty_ranges_rejected() {
        for (a, b, n) in [(1.0, 2.0, 0), (2.0, 1.0, 3), (1.0, 1.0, 4)] {
            let s = SweepSection {
                variable: SweepVariable::Nbar,
                start: a,
                stop: b,
                points: n,
                scale: Scale::Linear,
            };
            assert!(s.grid().is_err());
        }
    }

    #[test]
    fn hz_converts_rates() {
        let p = ParamsSection {
            mech_freq: 1.0,
            optical_decay: 0.1,
            mech_decay: 0.001,
            coupling: 0.01,
            detuning: 0.0,
        }
        .to_rad(Units::Hz);
        assert_eq!(p.mech_freq, TAU);
        assert_eq!(p.coupling, 0.01 * TAU);
    }
}
