use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_length: usize,
    /// Overlap as a fraction of the segment, in [0, 1).
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_length: 4096,
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

/// PSD of the optical amplitude of a trajectory.
pub fn psd(traj: &Trajectory, cfg: &WelchConfig) -> Result<Spectrum> {
    welch_psd(&traj.a, traj.sample_spacing(), cfg)
}

/// Two-sided Welch estimate of a complex signal sampled every `spacing`.
///
/// Each segment has its mean removed before windowing. The frequency axis
/// is angular and ascending; a component e^{iωt} appears at +ω. Scaled so
/// that Σ S·Δω equals the mean detrended power of the signal.
pub fn welch_psd(x: &[Complex64], spacing: f64, cfg: &WelchConfig) -> Result<Spectrum> {
    let seg = cfg.segment_length;
    if seg < 2 {
        return Err(Error::invalid("segment_length", "must be >= 2"));
    }
    if seg > x.len() {
        return Err(Error::SegmentTooLong {
            segment: seg,
            len: x.len(),
        });
    }
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(Error::invalid("overlap", "must lie in [0, 1)"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::invalid("spacing", "must be finite and > 0"));
    }
    let hop = ((seg as f64 * (1.0 - cfg.overlap)).round() as usize).max(1);
    let count = 1 + (x.len() - seg) / hop;

    let window: Vec<f64> = match cfg.window {
        // periodic Hann
        Window::Hann => (0..seg).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / seg as f64).cos()).collect(),
        Window::Rectangular => vec![1.0; seg],
    };
    let wpow: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg];
    let mut buf = vec![Complex64::default(); seg];
    for s in 0..count {
        let chunk = &x[s * hop..s * hop + seg];
        let mean = chunk.iter().sum::<Complex64>() / seg as f64;
        for ((b, v), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = (v - mean) * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = spacing / (2.0 * PI * wpow * count as f64);
    let dw = 2.0 * PI / (seg as f64 * spacing);
    // fftshift: bins above (seg − 1)/2 are negative frequencies
    let half = (seg - 1) / 2;
    let order = (half + 1..seg).chain(0..=half);
    let (freq, values) = order
        .map(|k| {
            let signed = if k > half { k as f64 - seg as f64 } else { k as f64 };
            (signed * dw, acc[k] * scale)
        })
        .unzip();
    Spectrum::new(freq, values, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn tone(w: f64, amp: f64, n: usize, h: f64) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(amp, w * k as f64 * h)).collect()
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter().enumerate().fold((0, f64::MIN), |m, (i, x)| if *x > m.1 { (i, *x) } else { m }).0
    }

    #[test]
    fn single_tone_location() {
        let h = 0.1;
        let x = tone(1.2345, 1.0, 16384, h);
        let s = welch_psd(&x, h, &WelchConfig::default()).unwrap();
        let dw = s.freq[1] - s.freq[0];
        assert!((s.freq[argmax(&s.values)] - 1.2345).abs() <= dw);
        let x = tone(-0.7, 1.0, 16384, h);
        let s = welch_psd(&x, h, &WelchConfig::default()).unwrap();
        assert!((s.freq[argmax(&s.values)] + 0.7).abs() <= dw);
    }

    #[test]
    fn two_tone_power_ratio() {
        let h = 0.1;
        let seg = 4096;
        let dw = 2.0 * PI / (seg as f64 * h);
        // bin-centred tones so the peak bins carry the full line power
        let (w1, w2) = (100.0 * dw, -150.0 * dw);
        let r = 0.4;
        let x: Vec<Complex64> = tone(w1, 1.0, 16384, h).iter().zip(tone(w2, r, 16384, h)).map(|(a, b)| a + b).collect();
        let s = welch_psd(&x, h, &WelchConfig::default()).unwrap();
        let at = |w: f64| s.values[s.freq.iter().position(|f| (f - w).abs() < dw / 2.0).unwrap()];
        assert!((at(w2) / at(w1) / (r * r) - 1.0).abs() < 0.05);
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 0.05;
        let x: Vec<Complex64> = (0..32768)
            .map(|k| {
                let n = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                n + Complex64::from_polar(2.0, 0.9 * k as f64 * h)
            })
            .collect();
        let mean = x.iter().sum::<Complex64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / x.len() as f64;
        let s = welch_psd(&x, h, &WelchConfig::default()).unwrap();
        let dw = s.freq[1] - s.freq[0];
        let total: f64 = s.values.iter().sum::<f64>() * dw;
        assert!((total / var - 1.0).abs() < 0.01, "{total} vs {var}");
    }

    #[test]
    fn odd_segment_axis_is_increasing() {
        let x = tone(0.5, 1.0, 1001, 0.1);
        let cfg = WelchConfig {
            segment_length: 999,
            ..Default::default()
        };
        let s = welch_psd(&x, 0.1, &cfg).unwrap();
        assert_eq!(s.len(), 999);
    }

    #[test]
    fn segment_longer_than_signal() {
        let x = vec![Complex64::default(); 100];
        let cfg = WelchConfig {
            segment_length: 128,
            ..Default::default()
        };
        assert_eq!(welch_psd(&x, 1.0, &cfg).unwrap_err(), Error::SegmentTooLong { segment: 128, len: 100 });
    }
}
