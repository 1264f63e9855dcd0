use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_lorentzians, FitOptions, LorentzianFit, Spectrum};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided coverage of the percentile interval.
    pub level: f64,
    /// Fraction of failed refits tolerated.
    pub max_failure_fraction: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 200,
            seed: 0,
            level: 0.95,
            max_failure_fraction: 0.2,
        }
    }
}

/// Residual-resampling bootstrap of `statistic` over refits of `fit`.
///
/// Resample `i` draws from a ChaCha8 stream seeded with `seed` on stream
/// `i`, so intervals are reproducible regardless of thread scheduling.
pub fn bootstrap_ci<S>(s: &Spectrum, fit: &LorentzianFit, cfg: &BootstrapConfig, statistic: S) -> Result<(f64, f64)>
where
    S: Fn(&LorentzianFit) -> Result<f64> + Sync,
{
    if cfg.resamples == 0 {
        return Err(Error::InvalidConfig("bootstrap needs at least one resample".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidConfig("bootstrap level must lie in (0, 1)".into()));
    }
    if fit.fitted.len() != s.len() {
        return Err(Error::invalid("fit", "was not produced from this spectrum"));
    }
    let resid: Vec<f64> = s.values.iter().zip(&fit.fitted).map(|(y, f)| y - f).collect();
    let m = resid.len();
    let opts = FitOptions {
        init: Some(fit.peaks.clone()),
        init_baseline: Some(fit.baseline),
        ..Default::default()
    };

    let stats: Vec<Option<f64>> = (0..cfg.resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let values: Vec<f64> = fit.fitted.iter().map(|f| f + resid[rng.random_range(0..m)]).collect();
            let sample = Spectrum {
                freq: s.freq.clone(),
                values,
                sigma: s.sigma.clone(),
            };
            fit_lorentzians(&sample, fit.peaks.len(), &opts)
                .and_then(|f| statistic(&f))
                .ok()
                .filter(|v| v.is_finite())
        })
        .collect();

    let mut ok: Vec<f64> = stats.into_iter().flatten().collect();
    let failed = cfg.resamples - ok.len();
    if failed as f64 > cfg.max_failure_fraction * cfg.resamples as f64 {
        return Err(Error::FitDiverged(format!("{failed} of {} bootstrap refits failed", cfg.resamples)));
    }
    if failed > 0 {
        log::warn!("{failed} of {} bootstrap refits failed and were dropped", cfg.resamples);
    }
    ok.sort_by(|a, b| a.total_cmp(b));
    let tail = (1.0 - cfg.level) / 2.0;
    Ok((quantile(&ok, tail), quantile(&ok, 1.0 - tail)))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}
