use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use super::{integrate_classical, static_state, welch_psd, SimConfig, Trajectory, WelchConfig, Window};
use crate::error::{Error, Result};
use crate::params::OmParams;
use crate::spectral::{fit_lorentzians, FitOptions, LorentzianPeak, SiEstimate, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    /// Segment length 0 takes the whole record as one periodogram, which
    /// suits deterministic ring-down records; stationary noisy records are
    /// better served by Hann-windowed Welch averaging.
    pub welch: WelchConfig,
    /// Half-width of each fit window, in units of Ω. The windows are centred
    /// on the tallest point of the spectrum beyond this distance from the
    /// pump on either side.
    pub half_window: f64,
    /// Calibration hook: shifts every positive-frequency component of a(t)
    /// (the red side-band) by this many rad/s before the spectrum is taken.
    pub inject_red_shift: Option<f64>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            welch: WelchConfig {
                segment_length: 0,
                overlap: 0.0,
                window: Window::Rectangular,
            },
            half_window: 0.5,
            inject_red_shift: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimMeasurement {
    pub estimate: SiEstimate,
    pub red: LorentzianPeak,
    pub blue: LorentzianPeak,
    /// Frequency resolution of the spectrum, rad/s.
    pub bin_width: f64,
    pub spectrum: Spectrum,
    pub trajectory: Trajectory,
}

/// Integrates, takes the spectrum of a(t), fits one Lorentzian in a window
/// around each of the two strongest side-bands and reads
/// δ̂ = f_red + f_blue (offsets from the pump, which sits at zero in the
/// rotating frame).
pub fn measure_si_from_sim(p: &OmParams, cfg: &SimConfig, opts: &MeasureOptions) -> Result<SimMeasurement> {
    check_window(opts)?;
    let trajectory = integrate_classical(p, cfg)?;
    let spectrum = spectrum_of(&trajectory, opts)?;
    analyse(p, spectrum, trajectory, opts)
}

/// A deterministic ring-down: the system starts at the fixed point holding
/// `photons` in the cavity, with the mechanics displaced by `kick`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingDown {
    pub photons: f64,
    pub kick: f64,
    /// Number of kick phases, spread evenly over [0, π), whose spectra are
    /// averaged. A single coherent record carries an interference term
    /// between the red and blue lines that pulls both centres; it goes as
    /// e^{2iφ} in the kick phase φ, so two phases already cancel it.
    pub phases: usize,
}

/// Runs one ring-down per kick phase (in parallel), averages the spectra
/// and analyses the result as [`measure_si_from_sim`] does. The drive and
/// initial state in `cfg` are replaced; the returned trajectory is the
/// zero-phase one.
pub fn measure_si_ringdown(p: &OmParams, ring: &RingDown, cfg: &SimConfig, opts: &MeasureOptions) -> Result<SimMeasurement> {
    check_window(opts)?;
    if ring.phases == 0 {
        return Err(Error::invalid("phases", "must be >= 1"));
    }
    if !(ring.kick.is_finite() && ring.kick > 0.0) {
        return Err(Error::invalid("kick", "must be finite and > 0"));
    }
    let fixed = static_state(p, ring.photons)?;
    let runs: Vec<(Trajectory, Spectrum)> = (0..ring.phases)
        .into_par_iter()
        .map(|k| {
            let phase = std::f64::consts::PI * k as f64 / ring.phases as f64;
            let c = SimConfig {
                drive: fixed.drive,
                a_init: fixed.a,
                b_init: fixed.b + Complex64::from_polar(ring.kick, phase),
                ..*cfg
            };
            let tr = integrate_classical(p, &c)?;
            let s = spectrum_of(&tr, opts)?;
            Ok((tr, s))
        })
        .collect::<Result<_>>()?;
    let mut runs = runs.into_iter();
    let (trajectory, mut spectrum) = runs.next().expect("at least one phase");
    for (_, s) in runs {
        for (acc, v) in spectrum.values.iter_mut().zip(&s.values) {
            *acc += v;
        }
    }
    let k = ring.phases as f64;
    spectrum.values.iter_mut().for_each(|v| *v /= k);
    analyse(p, spectrum, trajectory, opts)
}

fn check_window(opts: &MeasureOptions) -> Result<()> {
    if !(opts.half_window > 0.0 && opts.half_window < 1.0) {
        return Err(Error::invalid("half_window", "must lie in (0, 1)"));
    }
    Ok(())
}

fn spectrum_of(tr: &Trajectory, opts: &MeasureOptions) -> Result<Spectrum> {
    let h = tr.sample_spacing();
    let signal = match opts.inject_red_shift {
        Some(d) => inject_red_shift(&tr.a, h, d),
        None => tr.a.clone(),
    };
    let mut welch = opts.welch;
    if welch.segment_length == 0 {
        welch.segment_length = signal.len();
    }
    welch_psd(&signal, h, &welch)
}

fn analyse(p: &OmParams, spectrum: Spectrum, trajectory: Trajectory, opts: &MeasureOptions) -> Result<SimMeasurement> {
    let bin_width = spectrum.freq[1] - spectrum.freq[0];
    let om = p.mech_freq;
    let hw = opts.half_window * om;
    let tallest = |lo: f64, hi: f64| {
        (0..spectrum.len())
            .filter(|&i| spectrum.freq[i] >= lo && spectrum.freq[i] <= hi)
            .max_by(|&i, &j| spectrum.values[i].total_cmp(&spectrum.values[j]))
            .map(|i| spectrum.freq[i])
    };
    let fit_one = |c: Option<f64>| -> Result<(LorentzianPeak, f64, f64)> {
        let c = c.ok_or(Error::NoPeaksFound { found: 0, wanted: 1 })?;
        let win = spectrum.window(c - hw, c + hw);
        let fit = fit_lorentzians(&win, 1, &FitOptions::default())?;
        Ok((fit.peaks[0], fit.center_std(0), fit.rms))
    };
    let (red, sd_r, rms_r) = fit_one(tallest(hw, f64::INFINITY))?;
    let (blue, sd_b, rms_b) = fit_one(tallest(f64::NEG_INFINITY, -hw))?;
    if red.center <= blue.center {
        return Err(Error::OrderingViolation);
    }
    let delta = red.center + blue.center;
    let se = (sd_r * sd_r + sd_b * sd_b).sqrt();
    let estimate = SiEstimate {
        delta_hat: delta,
        delta_normalized: delta / om,
        ci_low: delta - 1.96 * se,
        ci_high: delta + 1.96 * se,
        fit_rms: ((rms_r * rms_r + rms_b * rms_b) / 2.0).sqrt(),
        n_peaks_used: 2,
        std_error: se,
    };
    Ok(SimMeasurement {
        estimate,
        red,
        blue,
        bin_width,
        spectrum,
        trajectory,
    })
}

/// Splits `x` into positive- and non-positive-frequency parts and
/// multiplies the positive part by e^{iδ₀t}. The record is padded to twice
/// its length with its mean and the padded half is treated as negative
/// time, so the split's ringing around the record edges is shifted
/// coherently; the padded record is returned.
pub fn inject_red_shift(x: &[Complex64], spacing: f64, shift: f64) -> Vec<Complex64> {
    let n = 2 * x.len();
    let mean = x.iter().sum::<Complex64>() / x.len() as f64;
    let mut padded: Vec<Complex64> = x.iter().map(|v| v - mean).collect();
    padded.resize(n, Complex64::default());
    let mut planner = FftPlanner::new();
    let mut pos = padded.clone();
    planner.plan_fft_forward(n).process(&mut pos);
    for (k, v) in pos.iter_mut().enumerate() {
        if k == 0 || k > (n - 1) / 2 {
            *v = Complex64::default();
        }
    }
    planner.plan_fft_inverse(n).process(&mut pos);
    padded
        .iter()
        .zip(&pos)
        .enumerate()
        .map(|(i, (v, p))| {
            let p = p / n as f64;
            let t = if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * spacing;
            mean + (v - p) + p * Complex64::from_polar(1.0, shift * t)
        })
        .collect()
}
