use nalgebra::{DMatrix, DVector};

use super::lm::{levenberg_marquardt, normal_equations, LmOptions};
use super::{LorentzianPeak, Spectrum};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    /// Starting peaks; found by a local-maxima scan when absent.
    pub init: Option<Vec<LorentzianPeak>>,
    pub init_baseline: Option<f64>,
    pub lm: LmOptions,
}

/// Peaks plus constant baseline. Parameters are ordered
/// (centre, fwhm, amplitude) per peak, then the baseline.
#[derive(Debug, Clone)]
pub struct LorentzianFit {
    /// Sorted by centre.
    pub peaks: Vec<LorentzianPeak>,
    pub baseline: f64,
    /// s²(JᵀJ)⁻¹ with s² the residual variance per degree of freedom.
    pub covariance: DMatrix<f64>,
    /// Root-mean-square of the (weighted) residuals.
    pub rms: f64,
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    /// Model values on the fitted grid.
    pub fitted: Vec<f64>,
}

impl LorentzianFit {
    pub fn center_index(i: usize) -> usize {
        3 * i
    }

    pub fn center_std(&self, i: usize) -> f64 {
        let k = Self::center_index(i);
        self.covariance[(k, k)].max(0.0).sqrt()
    }

    pub fn center_cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[(Self::center_index(i), Self::center_index(j))]
    }

    pub fn evaluate(&self, f: f64) -> f64 {
        self.baseline + self.peaks.iter().map(|p| super::lorentzian(f, p)).sum::<f64>()
    }
}

/// Least-squares fit of `n_peaks` Lorentzians and a constant baseline.
pub fn fit_lorentzians(s: &Spectrum, n_peaks: usize, opts: &FitOptions) -> Result<LorentzianFit> {
    if n_peaks == 0 {
        return Err(Error::invalid("n_peaks", "must be >= 1"));
    }
    let m = s.len();
    let np = 3 * n_peaks + 1;
    if m <= np {
        return Err(Error::invalid("spectrum", format!("{m} points cannot constrain {np} parameters")));
    }
    let (init, base0) = match &opts.init {
        Some(p) if p.len() != n_peaks => {
            return Err(Error::invalid("init", format!("{} peaks given, {n_peaks} wanted", p.len())))
        }
        Some(p) => (p.clone(), opts.init_baseline.unwrap_or_else(|| low_quantile(&s.values))),
        None => {
            let (p, b) = scan_peaks(s, n_peaks)?;
            (p, opts.init_baseline.unwrap_or(b))
        }
    };

    let mut x0 = DVector::zeros(np);
    for (i, p) in init.iter().enumerate() {
        x0[3 * i] = p.center;
        x0[3 * i + 1] = p.fwhm;
        x0[3 * i + 2] = p.amplitude;
    }
    x0[np - 1] = base0;

    let weights: Vec<f64> = match &s.sigma {
        Some(sig) => sig.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; m],
    };
    // column-major fill: one contiguous column per parameter
    let model = |x: &DVector<f64>| {
        let mut y = vec![x[np - 1]; m];
        let mut jac = vec![0.0; m * np];
        for k in 0..n_peaks {
            let (c, fw, a) = (x[3 * k], x[3 * k + 1], x[3 * k + 2]);
            let (jc, rest) = jac[3 * k * m..].split_at_mut(m);
            let (jw, rest) = rest.split_at_mut(m);
            let ja = &mut rest[..m];
            for i in 0..m {
                let w = weights[i];
                let u = 2.0 * (s.freq[i] - c) / fw;
                let d = 1.0 / (1.0 + u * u);
                y[i] += a * d;
                let add = w * a * u * d * d / fw;
                jc[i] = 4.0 * add;
                jw[i] = 2.0 * u * add;
                ja[i] = w * d;
            }
        }
        jac[(np - 1) * m..].copy_from_slice(&weights);
        let r = DVector::from_iterator(m, (0..m).map(|i| weights[i] * (y[i] - s.values[i])));
        (r, DMatrix::from_vec(m, np, jac))
    };
    let feasible = |x: &DVector<f64>| (0..n_peaks).all(|k| x[3 * k + 1] > 0.0 && x[3 * k + 2] > 0.0);

    let res = levenberg_marquardt(model, feasible, x0, &opts.lm)?;
    let dof = (m - np) as f64;
    let s2 = 2.0 * res.cost / dof;
    let (jtj, _) = normal_equations(&res.jacobian, &res.residuals);
    let inv = jtj
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::FitDiverged("singular normal matrix at optimum".into()))?;
    let cov = inv * s2;

    // sort peaks by centre, permuting the covariance alongside
    let x = &res.params;
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| x[3 * a].total_cmp(&x[3 * b]));
    let mut perm: Vec<usize> = order.iter().flat_map(|&k| [3 * k, 3 * k + 1, 3 * k + 2]).collect();
    perm.push(np - 1);
    let covariance = DMatrix::from_fn(np, np, |i, j| cov[(perm[i], perm[j])]);
    let peaks: Vec<LorentzianPeak> = order
        .iter()
        .map(|&k| LorentzianPeak {
            center: x[3 * k],
            fwhm: x[3 * k + 1],
            amplitude: x[3 * k + 2],
        })
        .collect();
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite covariance".into()));
    }
    let fitted: Vec<f64> = (0..m).map(|i| s.values[i] + res.residuals[i] / weights[i]).collect();

    Ok(LorentzianFit {
        peaks,
        baseline: x[np - 1],
        covariance,
        rms: (2.0 * res.cost / m as f64).sqrt(),
        cost_trace: res.cost_trace,
        iterations: res.iterations,
        fitted,
    })
}

fn low_quantile(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 10]
}

/// Initial peaks from local maxima, tallest first, skipping maxima that sit
/// inside the half-maximum span of an already chosen peak.
fn scan_peaks(s: &Spectrum, n_peaks: usize) -> Result<(Vec<LorentzianPeak>, f64)> {
    let v = &s.values;
    let m = v.len();
    let base = low_quantile(v);
    let top = v.iter().cloned().fold(f64::MIN, f64::max);

    let mut diffs: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(|a, b| a.total_cmp(b));
    let noise = diffs.get(diffs.len() / 2).copied().unwrap_or(0.0) / (0.6745 * 2f64.sqrt());
    let floor = (3.0 * noise).max(1e-3 * (top - base));

    let mut cands: Vec<usize> = (0..m)
        .filter(|&i| {
            let left = i == 0 || v[i] >= v[i - 1];
            let right = i + 1 == m || v[i] > v[i + 1];
            left && right && v[i] - base > floor
        })
        .collect();
    cands.sort_by(|&a, &b| v[b].total_cmp(&v[a]));

    let mut picked: Vec<(LorentzianPeak, f64, f64)> = Vec::new();
    for i in cands {
        if picked.len() == n_peaks {
            break;
        }
        let f = s.freq[i];
        if picked.iter().any(|(_, lo, hi)| f >= *lo && f <= *hi) {
            continue;
        }
        let half = base + 0.5 * (v[i] - base);
        let lo = crossing(s, i, half, false);
        let hi = crossing(s, i, half, true);
        let fwhm = (hi - lo).max(s.freq.get(1).map_or(1.0, |f1| f1 - s.freq[0]));
        picked.push((
            LorentzianPeak {
                center: f,
                fwhm,
                amplitude: v[i] - base,
            },
            lo,
            hi,
        ));
    }
    if picked.len() < n_peaks {
        return Err(Error::NoPeaksFound {
            found: picked.len(),
            wanted: n_peaks,
        });
    }
    let mut peaks: Vec<LorentzianPeak> = picked.into_iter().map(|p| p.0).collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok((peaks, base))
}

/// Frequency where the spectrum first drops below `level` walking away
/// from index `i`, linearly interpolated.
fn crossing(s: &Spectrum, i: usize, level: f64, up: bool) -> f64 {
    let v = &s.values;
    let f = &s.freq;
    let mut k = i;
    loop {
        let next = if up {
            if k + 1 >= v.len() {
                return f[k];
            }
            k + 1
        } else {
            if k == 0 {
                return f[0];
            }
            k - 1
        };
        if v[next] < level {
            let t = (v[k] - level) / (v[k] - v[next]);
            return f[k] + t * (f[next] - f[k]);
        }
        k = next;
    }
}
