use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{mean_displacement, OmParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Time quantities are in units of 1/Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Step, ≤ 0.05.
    pub dt: f64,
    /// Total integration time, ≥ 2¹⁴·dt.
    pub duration: f64,
    /// Drive E (same units as a times a rate).
    pub drive: f64,
    /// Thermal occupation of the mechanical bath; 0 is deterministic.
    #[serde(default)]
    pub thermal_occupation: f64,
    #[serde(default)]
    pub seed: u64,
    /// Leading fraction of samples discarded.
    #[serde(default)]
    pub transient_fraction: f64,
    /// Keep every `sample_stride`-th step.
    #[serde(default = "one")]
    pub sample_stride: usize,
    #[serde(default)]
    pub a_init: Complex64,
    #[serde(default)]
    pub b_init: Complex64,
}

fn one() -> usize {
    1
}

impl Default for SimConfig {
    /// Undriven, deterministic, the shortest admissible record at dt = 0.05.
    fn default() -> Self {
        SimConfig {
            dt: 0.05,
            duration: 16384.0 * 0.05,
            drive: 0.0,
            thermal_occupation: 0.0,
            seed: 0,
            transient_fraction: 0.0,
            sample_stride: 1,
            a_init: Complex64::default(),
            b_init: Complex64::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= 0.05) {
            return Err(Error::invalid("dt", "must satisfy 0 < dt·Ω <= 0.05"));
        }
        if !(self.duration.is_finite() && self.duration >= 16384.0 * self.dt) {
            return Err(Error::invalid("duration", "must be at least 2^14·dt"));
        }
        if !(self.drive.is_finite()) {
            return Err(Error::invalid("drive", "must be finite"));
        }
        if !(self.thermal_occupation.is_finite() && self.thermal_occupation >= 0.0) {
            return Err(Error::invalid("thermal_occupation", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::invalid("transient_fraction", "must lie in [0, 1)"));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample_stride", "must be >= 1"));
        }
        for z in [self.a_init, self.b_init] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::invalid("initial state", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Retained samples after the transient.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Physical time, s (or whatever unit the rates imply).
    pub t: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn sample_spacing(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
        }
    }

    /// CSV with columns t, Re a, Im a, Re b, Im b.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# t,re_a,im_a,re_b,im_b")?;
        for i in 0..self.len() {
            let (a, b) = (self.a[i], self.b[i]);
            writeln!(w, "{:e},{:e},{:e},{:e},{:e}", self.t[i], a.re, a.im, b.re, b.im)?;
        }
        Ok(())
    }
}

/// A fixed point of the drift: the drive that holds `photons` in the cavity
/// and the corresponding amplitudes. Whether it is stable depends on the
/// effective detuning Δ + g0·x0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticState {
    pub drive: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub effective_detuning: f64,
}

pub fn static_state(p: &OmParams, photons: f64) -> Result<StaticState> {
    let m = mean_displacement(p, photons)?;
    let eff = p.detuning + p.coupling * m.x0;
    let resp = Complex64::new(p.optical_decay / 2.0, -eff);
    let drive = photons.sqrt() * resp.norm();
    Ok(StaticState {
        drive,
        a: drive / resp,
        b: m.b0,
        effective_detuning: eff,
    })
}

struct Drift {
    delta: f64,
    half_k: f64,
    om: f64,
    half_g: f64,
    g0: f64,
    e: f64,
}

impl Drift {
    #[inline]
    fn eval(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let x = 2.0 * b.re;
        let da = Complex64::new(-self.half_k, self.delta + self.g0 * x) * a + self.e;
        let db = Complex64::new(-self.half_g, -self.om) * b - I * (self.g0 * a.norm_sqr());
        (da, db)
    }
}

/// Fixed-step RK4 for the drift with an additive Euler–Maruyama kick on b
/// when the bath is thermal.
pub fn integrate_classical(p: &OmParams, cfg: &SimConfig) -> Result<Trajectory> {
    p.validate_undamped()?;
    cfg.validate()?;
    let h = cfg.dt / p.mech_freq;
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let skip = (cfg.transient_fraction * steps as f64).ceil() as usize;

    let f = Drift {
        delta: p.detuning,
        half_k: p.optical_decay / 2.0,
        om: p.mech_freq,
        half_g: p.mech_decay / 2.0,
        g0: p.coupling,
        e: cfg.drive,
    };
    let scale = [
        cfg.a_init.norm(),
        cfg.b_init.norm(),
        2.0 * cfg.drive.abs() / p.optical_decay,
        cfg.thermal_occupation.sqrt(),
        1.0,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let limit = 1e6 * scale;

    let noisy = cfg.thermal_occupation > 0.0 && p.mech_decay > 0.0;
    let kick = (p.mech_decay * cfg.thermal_occupation * h / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let keep = (steps - skip) / cfg.sample_stride + 1;
    let mut out = Trajectory {
        t: Vec::with_capacity(keep),
        a: Vec::with_capacity(keep),
        b: Vec::with_capacity(keep),
    };
    let (mut a, mut b) = (cfg.a_init, cfg.b_init);
    for n in 0..=steps {
        if n >= skip && (n - skip) % cfg.sample_stride == 0 {
            out.t.push(n as f64 * h);
            out.a.push(a);
            out.b.push(b);
        }
        if n == steps {
            break;
        }
        let (k1a, k1b) = f.eval(a, b);
        let (k2a, k2b) = f.eval(a + k1a * (h / 2.0), b + k1b * (h / 2.0));
        let (k3a, k3b) = f.eval(a + k2a * (h / 2.0), b + k2b * (h / 2.0));
        let (k4a, k4b) = f.eval(a + k3a * h, b + k3b * h);
        a += (k1a + 2.0 * k2a + 2.0 * k3a + k4a) * (h / 6.0);
        b += (k1b + 2.0 * k2b + 2.0 * k3b + k4b) * (h / 6.0);
        if noisy {
            let (x, y): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            b += Complex64::new(x, y) * kick;
        }
        let mag = a.norm().max(b.norm());
        if !(mag <= limit) {
            return Err(Error::Instability {
                time: (n + 1) as f64 * h,
                magnitude: mag,
            });
        }
    }
    Ok(out)
}
