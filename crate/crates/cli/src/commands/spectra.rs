use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::Serialize;
use sideband_core::spectral::io::{read_spectrum, write_spectrum};
use sideband_core::spectral::{
    bootstrap_ci, estimate_from_fit, triplet_peaks, fit_lorentzians, synth_spectrum, uniform_grid, BootstrapConfig,
    FitOptions, Folding, LorentzianFit, LorentzianPeak, NoiseSpec,
};

use super::{Ctx, EstimateOut, PeakOut};
use crate::error::CliError;
use crate::output::{json, Artifact, Outcome};
use crate::Format;

/// Command-line overrides for the [fit] section.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct FitArgs {
    /// Spectrum file: `f,S[,sigma]` rows, comma or whitespace separated.
    pub spectrum: Option<PathBuf>,
    /// Number of Lorentzians to fit (default 3).
    #[arg(long)]
    pub peaks: Option<usize>,
    /// Pump position on the frequency axis (default 0).
    #[arg(long)]
    pub pump_offset: Option<f64>,
    /// The axis is one-sided with absolute side-band frequencies.
    #[arg(long)]
    pub folded: bool,
    /// Ω for δ̄; the doublet half-separation when absent.
    #[arg(long)]
    pub mech_freq: Option<f64>,
    /// Bootstrap resamples for a percentile interval.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    #[serde(flatten)]
    estimate: EstimateOut,
    ci_method: &'static str,
    folded: bool,
    pump_offset: f64,
    peaks: Vec<PeakOut>,
    baseline: f64,
    iterations: usize,
    /// The input grid was not increasing and had to be sorted.
    resorted: bool,
}

pub fn fit(ctx: &Ctx, args: &FitArgs) -> Result<Outcome, CliError> {
    let sec = ctx.cfg.fit.clone().unwrap_or_default();
    let path = args
        .spectrum
        .clone()
        .or(sec.input.map(PathBuf::from))
        .ok_or_else(|| CliError::validation("no spectrum file given"))?;
    let file = File::open(&path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let (spec, resorted) = read_spectrum(BufReader::new(file))?;

    let n_peaks = args.peaks.or(sec.peaks).unwrap_or(3);
    if n_peaks < 2 {
        return Err(CliError::validation("need at least two peaks (the side-bands)"));
    }
    let pump = args.pump_offset.or(sec.pump_offset).unwrap_or(0.0);
    let folded = args.folded || sec.folded.unwrap_or(false);
    let mech_freq = args.mech_freq.or(sec.mech_freq);
    let resamples = args.bootstrap.or(sec.bootstrap).unwrap_or(0);
    let mode = if folded { Folding::Folded } else { Folding::Unfolded };
    // peaks come back sorted by centre
    let (red, blue) = if folded { (n_peaks - 1, n_peaks - 2) } else { (n_peaks - 1, 0) };

    let fit = fit_lorentzians(&spec, n_peaks, &FitOptions::default())?;
    let mut est = estimate_from_fit(&fit, red, blue, pump, mode, mech_freq)?;
    let ci_method = if resamples > 0 {
        let cfg = BootstrapConfig {
            resamples,
            seed: ctx.seed,
            ..Default::default()
        };
        let stat = |f: &LorentzianFit| estimate_from_fit(f, red, blue, pump, mode, mech_freq).map(|e| e.delta_hat);
        (est.ci_low, est.ci_high) = bootstrap_ci(&spec, &fit, &cfg, stat)?;
        "bootstrap"
    } else {
        "covariance"
    };

    let report = FitReport {
        estimate: EstimateOut::new(&est, 1.0),
        ci_method,
        folded,
        pump_offset: pump,
        peaks: fit.peaks.iter().map(|p| PeakOut::new(p, 1.0)).collect(),
        baseline: fit.baseline,
        iterations: fit.iterations,
        resorted,
    };
    super::closed::single_row(ctx, "fit", &report, |r| {
        let e = &r.estimate;
        use crate::output::num;
        vec![
            ("delta_hat", num(e.delta_hat)),
            ("delta_normalized", num(e.delta_normalized)),
            ("ci_low", num(e.ci_low)),
            ("ci_high", num(e.ci_high)),
            ("fit_rms", num(e.fit_rms)),
            ("std_error", num(e.std_error)),
        ]
    })
}

#[derive(Debug, Serialize)]
struct SynthJson {
    freq: Vec<f64>,
    values: Vec<f64>,
}

pub fn synth(ctx: &Ctx) -> Result<Outcome, CliError> {
    let sec = ctx.cfg.synth.clone().unwrap_or_default();
    let om = sec.mech_freq.unwrap_or(1.0);
    let peaks: Vec<LorentzianPeak> = match &sec.peaks {
        Some(ps) => ps
            .iter()
            .map(|p| LorentzianPeak::new(p.center, p.fwhm, p.amplitude))
            .collect::<Result<_, _>>()?,
        None => triplet_peaks(om, sec.delta_normalized.unwrap_or(0.02)),
    };
    let grid = uniform_grid(sec.lo.unwrap_or(-2.0 * om), sec.hi.unwrap_or(2.0 * om), sec.points.unwrap_or(2001))?;
    let noise = sec.snr_db.map(|snr_db| NoiseSpec { snr_db, seed: ctx.seed });
    let s = synth_spectrum(&peaks, &grid, noise)?;

    let artifact = match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut bytes = Vec::new();
            write_spectrum(&mut bytes, &s)?;
            Artifact {
                name: "synth.csv".into(),
                bytes,
            }
        }
        Format::Json => json(
            "synth",
            &SynthJson {
                freq: s.freq,
                values: s.values,
            },
        )?,
    };
    Ok(Outcome::single(artifact))
}
