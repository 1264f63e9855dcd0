use serde::Serialize;
use sideband_core::langevin::{
    measure_si_from_sim, measure_si_ringdown, static_state, MeasureOptions, RingDown, SimConfig, SimMeasurement,
};
use sideband_core::params::mean_displacement;
use sideband_core::spectral::{io::write_spectrum, Spectrum};

use super::{Ctx, EstimateOut, PeakOut};
use crate::config::{SimMode, SimulateSection};
use crate::error::CliError;
use crate::output::{json, Artifact, Outcome};

#[derive(Debug, Serialize)]
struct SimulateReport {
    units: &'static str,
    mode: &'static str,
    detuning: f64,
    drive: f64,
    samples: usize,
    bin_width: f64,
    #[serde(flatten)]
    estimate: EstimateOut,
    red: PeakOut,
    blue: PeakOut,
    /// |δ̂| below both 3σ and one bin.
    consistent_with_zero: bool,
    verdict: String,
}

pub fn simulate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let s: SimulateSection = ctx.cfg.simulate.ok_or_else(|| CliError::validation("missing [simulate] section"))?;
    let k = ctx.units.to_rad();
    let mut p = ctx.cfg.params()?.to_rad(ctx.units);
    p.validate()?;
    let cfg = SimConfig {
        dt: s.dt,
        duration: s.duration,
        drive: s.drive * k,
        thermal_occupation: s.thermal_occupation,
        seed: ctx.seed,
        transient_fraction: s.transient_fraction,
        sample_stride: s.sample_stride,
        ..Default::default()
    };
    cfg.validate()?;
    let opts = MeasureOptions {
        welch: s.welch(),
        half_window: s.half_window,
        inject_red_shift: s.inject_red_shift.map(|d| d * k),
    };

    let (m, mode, drive): (SimMeasurement, &str, f64) = match s.mode {
        SimMode::Driven => (measure_si_from_sim(&p, &cfg, &opts)?, "driven", cfg.drive),
        SimMode::Ringdown => {
            let photons = s.photons.ok_or_else(|| CliError::validation("ring-down needs `photons`"))?;
            if let Some(eff) = s.effective_detuning {
                let x0 = mean_displacement(&p, photons)?.x0;
                p = p.with_detuning(eff * k - p.coupling * x0);
            }
            let ring = RingDown {
                photons,
                kick: s.kick,
                phases: s.phases,
            };
            let drive = static_state(&p, photons)?.drive;
            (measure_si_ringdown(&p, &ring, &cfg, &opts)?, "ringdown", drive)
        }
    };

    let e = &m.estimate;
    let quiet = e.delta_hat.abs() < 3.0 * e.std_error && e.delta_hat.abs() < m.bin_width;
    let verdict = if quiet {
        "classical regime: δ consistent with 0".to_string()
    } else {
        format!("δ̂ = {:e} resolved from 0", ctx.rate(e.delta_hat))
    };
    let scale = 1.0 / k;
    let report = SimulateReport {
        units: ctx.units.label(),
        mode,
        detuning: ctx.rate(p.detuning),
        drive: ctx.rate(drive),
        samples: m.trajectory.len(),
        bin_width: ctx.rate(m.bin_width),
        estimate: EstimateOut::new(e, scale),
        red: PeakOut::new(&m.red, scale),
        blue: PeakOut::new(&m.blue, scale),
        consistent_with_zero: quiet,
        verdict,
    };

    let mut traj = Vec::new();
    m.trajectory.write_csv(&mut traj)?;
    let shown = Spectrum {
        freq: m.spectrum.freq.iter().map(|f| f * scale).collect(),
        ..m.spectrum.clone()
    };
    let mut spec = Vec::new();
    write_spectrum(&mut spec, &shown)?;
    Ok(Outcome {
        primary: json("simulate", &report)?,
        extra: vec![
            Artifact {
                name: "trajectory.csv".into(),
                bytes: traj,
            },
            Artifact {
                name: "spectrum.csv".into(),
                bytes: spec,
            },
        ],
    })
}
