use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{LorentzianPeak, Spectrum};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// 10·log10(mean(S²)/σ²) for white Gaussian noise of std σ.
    pub snr_db: f64,
    pub seed: u64,
}

pub fn lorentzian(f: f64, p: &LorentzianPeak) -> f64 {
    let u = 2.0 * (f - p.center) / p.fwhm;
    p.amplitude / (1.0 + u * u)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("grid", "need at least two points on a finite, non-empty range"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

/// Sum of Lorentzians on `grid`, optionally with seeded white noise.
pub fn synth_spectrum(peaks: &[LorentzianPeak], grid: &[f64], noise: Option<NoiseSpec>) -> Result<Spectrum> {
    let (lo, hi) = match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::invalid("grid", "empty")),
    };
    for p in peaks {
        LorentzianPeak::new(p.center, p.fwhm, p.amplitude)?;
        if p.center < lo || p.center > hi {
            return Err(Error::invalid("peaks", format!("centre {} outside grid [{lo}, {hi}]", p.center)));
        }
    }
    let mut values: Vec<f64> = grid.iter().map(|&f| peaks.iter().map(|p| lorentzian(f, p)).sum()).collect();
    if let Some(n) = noise {
        if !n.snr_db.is_finite() {
            return Err(Error::invalid("snr_db", "must be finite"));
        }
        let power = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        let sd = (power / 10f64.powf(n.snr_db / 10.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
        let normal = Normal::new(0.0, sd).map_err(|e| Error::invalid("snr_db", e.to_string()))?;
        for v in values.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Spectrum::new(grid.to_vec(), values, None)
}

/// Doublet plus central resonance: side-bands at −Ω + δ/2 (blue) and
/// +Ω + δ/2 (red) with width 0.1Ω, the central line at 0 with width 0.2Ω.
/// The red peak is the taller one.
pub fn triplet_peaks(mech_freq: f64, delta_normalized: f64) -> Vec<LorentzianPeak> {
    let d = delta_normalized * mech_freq;
    vec![
        LorentzianPeak {
            center: -mech_freq + d / 2.0,
            fwhm: 0.1 * mech_freq,
            amplitude: 0.6,
        },
        LorentzianPeak {
            center: 0.0,
            fwhm: 0.2 * mech_freq,
            amplitude: 1.0,
        },
        LorentzianPeak {
            center: mech_freq + d / 2.0,
            fwhm: 0.1 * mech_freq,
            amplitude: 0.8,
        },
    ]
}

/// [−2Ω, 2Ω] with 2001 points.
pub fn triplet_grid(mech_freq: f64) -> Vec<f64> {
    uniform_grid(-2.0 * mech_freq, 2.0 * mech_freq, 2001).expect("valid fixed grid")
}
