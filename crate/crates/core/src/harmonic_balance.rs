//! Numerical harmonic balance of the mean-field side-band equations.
//!
//! The optical field is expanded as a0 + a_b e^{i(−Ω+δ/2)t} + a_r e^{i(Ω+δ/2)t}
//! (optionally + a_bb e^{i(−2Ω+δ)t} + a_rr e^{i(2Ω+δ)t}) around the pump, the
//! phonon as the doublet b_b e^{−i(Ω−δ/2)t} + b_r e^{−i(Ω+δ/2)t}. Matching
//! coefficients gives equations that are homogeneous in the side-band
//! amplitudes, so the phonon doublet is pinned to a real gauge amplitude u
//! and the solver looks for δ (complex) and the optical side-bands.
//!
//! Every equation is written multiplied through by its denominators; the
//! division form of the phonon equations is singular at the uncoupled root
//! δ = iΓ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::si_linearized;
use crate::error::{Error, Result};
use crate::params::{check_nbar, mean_displacement, OmParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbState {
    /// Complex δ; its real part is the side-band inequivalence.
    pub delta: Complex64,
    pub a0: Complex64,
    pub ab: Complex64,
    pub ar: Complex64,
    pub bb: Complex64,
    pub br: Complex64,
    pub abb: Option<Complex64>,
    pub arr: Option<Complex64>,
}

impl HbState {
    pub fn si(&self) -> f64 {
        self.delta.re
    }

    pub fn is_order2(&self) -> bool {
        self.abb.is_some() || self.arr.is_some()
    }

    fn check(&self) -> Result<()> {
        if self.a0.im != 0.0 || self.a0.re < 0.0 {
            return Err(Error::invalid("a0", "gauge requires a0 real and non-negative"));
        }
        let all = [self.delta, self.a0, self.ab, self.ar, self.bb, self.br];
        let extra = [self.abb, self.arr];
        if all.iter().chain(extra.iter().flatten()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("state", "amplitudes must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbOptions {
    /// Residual-norm target.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: Option<HbState>,
    /// Gauge amplitude u of the phonon doublet; default 2√n̄ (0 when g0 = 0).
    pub phonon_amplitude: Option<f64>,
}

impl Default for HbOptions {
    fn default() -> Self {
        HbOptions {
            tol: 1e-10,
            max_iter: 100,
            initial: None,
            phonon_amplitude: None,
        }
    }
}

/// Normalised magnitudes of the equations that are not part of the solved
/// system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbDiagnostics {
    /// b_b(iδ + Γ) + 2ig0 a0 a_b (+ order-2 feedback).
    pub blue_phonon: f64,
    /// b_r(−iδ + Γ) + 2ig0 a_r* a0 (+ order-2 feedback).
    pub red_phonon: f64,
    /// Pump line: (κ/2) a0 − ig0 (a0 x0 + a_b b_b* + a_r b_r).
    pub pump_line: f64,
    /// Blue-line characteristic equation for δ.
    pub blue_characteristic: f64,
    /// Red-line characteristic equation for δ.
    pub red_characteristic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbResidual {
    /// Real and imaginary parts of the solved equations.
    pub solved: Vec<f64>,
    pub norm: f64,
    pub diagnostics: HbDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order2Report {
    /// Inequivalence of the second-order pair, from their solved frequencies.
    pub delta2: f64,
    /// Re δ of the first-order-only solve.
    pub first_order_delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbSolution {
    pub state: HbState,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: HbDiagnostics,
    pub order2: Option<Order2Report>,
}

/// Default gauge amplitude: 2√n̄, which makes |a_bb|/|a_b| ≈ g0√n̄/Ω.
pub fn default_phonon_amplitude(p: &OmParams, nbar: f64) -> f64 {
    if p.coupling > 0.0 {
        2.0 * nbar.sqrt()
    } else {
        0.0
    }
}

struct Model {
    om: f64,
    half_k: f64,
    gm: f64,
    g0: f64,
    x0: f64,
    nbar: f64,
    /// Amplitude scale used to normalise the amplitude equations.
    scale: f64,
    /// With g0·n̄ = 0 the phonon equations carry no information on δ and
    /// the characteristic equation is solved instead.
    coupled: bool,
}

struct Lines {
    blue_phonon: Complex64,
    red_phonon: Complex64,
    line_b: Complex64,
    line_r: Complex64,
    line_bb: Option<Complex64>,
    line_rr: Option<Complex64>,
    pump: Complex64,
    char_blue: Complex64,
    char_red: Complex64,
}

impl Model {
    fn new(p: &OmParams, nbar: f64, u: f64) -> Result<Self> {
        p.validate()?;
        check_nbar(nbar)?;
        let x0 = mean_displacement(p, nbar)?.x0;
        let scale = nbar.sqrt().max(u);
        Ok(Model {
            om: p.mech_freq,
            half_k: p.optical_decay / 2.0,
            gm: p.mech_decay,
            g0: p.coupling,
            x0,
            nbar,
            scale: if scale > 0.0 { scale } else { 1.0 },
            coupled: p.coupling > 0.0 && nbar > 0.0,
        })
    }

    fn lines(&self, s: &HbState) -> Lines {
        let (om, hk, gm, g0, x0) = (self.om, self.half_k, self.gm, self.g0, self.x0);
        let d = s.delta;
        let ig0 = I * g0;
        let abb = s.abb.unwrap_or_default();
        let arr = s.arr.unwrap_or_default();

        let blue_phonon = s.bb * (I * d + gm) + 2.0 * ig0 * (s.a0.conj() * s.ab + s.ab.conj() * abb);
        let red_phonon = s.br * (-I * d + gm) + 2.0 * ig0 * (s.ar.conj() * s.a0 + arr.conj() * s.ar);

        let lb = I * (d / 2.0 - om) + hk;
        let lr = I * (d / 2.0 + om) + hk;
        let line_b = lb * s.ab - ig0 * (s.ab * x0 + s.a0 * s.bb + abb * s.bb.conj());
        let line_r = lr * s.ar - ig0 * (s.ar * x0 + s.a0 * s.br.conj() + arr * s.br);
        let line_bb = s.abb.map(|abb| (I * (d - 2.0 * om) + hk) * abb - ig0 * (abb * x0 + s.ab * s.bb));
        let line_rr = s.arr.map(|arr| (I * (d + 2.0 * om) + hk) * arr - ig0 * (arr * x0 + s.ar * s.br.conj()));
        let pump = hk * s.a0 - ig0 * (s.a0 * x0 + s.ab * s.bb.conj() + s.ar * s.br);

        let g2n = g0 * g0 * self.nbar;
        let char_blue = (I * d + gm) * (lb - ig0 * x0) - 2.0 * g2n;
        let char_red = (I * d.conj() + gm) * (lr - ig0 * x0) + 2.0 * g2n;

        Lines {
            blue_phonon,
            red_phonon,
            line_b,
            line_r,
            line_bb,
            line_rr,
            pump,
            char_blue,
            char_red,
        }
    }

    fn residual(&self, s: &HbState) -> HbResidual {
        let l = self.lines(s);
        let amp = 1.0 / (self.om * self.scale);
        let chr = 1.0 / (self.om * self.om);
        let first = if self.coupled {
            l.blue_phonon * amp
        } else {
            l.char_blue * chr
        };
        let mut eqs = vec![first, l.line_b * amp, l.line_r * amp];
        eqs.extend(l.line_bb.map(|z| z * amp));
        eqs.extend(l.line_rr.map(|z| z * amp));
        let solved: Vec<f64> = eqs.iter().flat_map(|z| [z.re, z.im]).collect();
        let norm = solved.iter().map(|v| v * v).sum::<f64>().sqrt();
        HbResidual {
            solved,
            norm,
            diagnostics: HbDiagnostics {
                blue_phonon: (l.blue_phonon * amp).norm(),
                red_phonon: (l.red_phonon * amp).norm(),
                pump_line: (l.pump * amp).norm(),
                blue_characteristic: (l.char_blue * chr).norm(),
                red_characteristic: (l.char_red * chr).norm(),
            },
        }
    }

    /// Unknowns: δ/Ω, then optical side-band amplitudes over `scale`.
    fn pack(&self, s: &HbState) -> Vec<f64> {
        let mut zs = vec![s.delta / self.om, s.ab / self.scale, s.ar / self.scale];
        zs.extend(s.abb.map(|z| z / self.scale));
        zs.extend(s.arr.map(|z| z / self.scale));
        zs.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    fn unpack(&self, x: &[f64], template: &HbState) -> HbState {
        let z = |k: usize| Complex64::new(x[2 * k], x[2 * k + 1]);
        let mut s = *template;
        s.delta = z(0) * self.om;
        s.ab = z(1) * self.scale;
        s.ar = z(2) * self.scale;
        if template.abb.is_some() {
            s.abb = Some(z(3) * self.scale);
            s.arr = Some(z(4) * self.scale);
        }
        s
    }

    /// Optical amplitudes that satisfy the side-band lines for a given δ,
    /// neglecting order-2 feedback.
    fn back_substitute(&self, mut s: HbState) -> HbState {
        let ig0x0 = I * self.g0 * self.x0;
        let ig0 = I * self.g0;
        let d = s.delta;
        let lb = I * (d / 2.0 - self.om) + self.half_k - ig0x0;
        let lr = I * (d / 2.0 + self.om) + self.half_k - ig0x0;
        s.ab = ig0 * s.a0 * s.bb / lb;
        s.ar = ig0 * s.a0 * s.br.conj() / lr;
        if s.abb.is_some() {
            let lbb = I * (d - 2.0 * self.om) + self.half_k - ig0x0;
            let lrr = I * (d + 2.0 * self.om) + self.half_k - ig0x0;
            s.abb = Some(ig0 * s.ab * s.bb / lbb);
            s.arr = Some(ig0 * s.ar * s.br.conj() / lrr);
        }
        s
    }
}

/// Residual of the harmonic-balance system at `s`.
///
/// The solved block holds three (order 1) or five (order 2) complex
/// equations: the δ equation (blue phonon line when g0·n̄ > 0, the
/// blue characteristic equation otherwise), the blue and red optical lines
/// and, for order 2, the two second-order lines. Amplitude equations are
/// divided by Ω·max(√n̄, u), the characteristic equation by Ω².
pub fn hb_residual(s: &HbState, p: &OmParams, nbar: f64) -> Result<HbResidual> {
    s.check()?;
    let u = s.bb.norm().max(s.br.norm());
    Ok(Model::new(p, nbar, u)?.residual(s))
}

/// Initial state: δ from the linearized closed form plus iΓ, phonon doublet
/// pinned at u, optical amplitudes by back-substitution.
pub fn initial_state(p: &OmParams, nbar: f64, u: f64, order2: bool) -> Result<HbState> {
    let m = Model::new(p, nbar, u)?;
    let lin = si_linearized(p, nbar)?.result.delta;
    let zero = Complex64::default();
    let s = HbState {
        delta: Complex64::new(lin, p.mech_decay),
        a0: Complex64::new(nbar.sqrt(), 0.0),
        ab: zero,
        ar: zero,
        bb: Complex64::new(u, 0.0),
        br: Complex64::new(u, 0.0),
        abb: order2.then_some(zero),
        arr: order2.then_some(zero),
    };
    Ok(m.back_substitute(s))
}

/// First-order harmonic balance by damped Newton iteration.
pub fn hb_solve(p: &OmParams, nbar: f64, opts: &HbOptions) -> Result<HbSolution> {
    solve(p, nbar, opts, false)
}

/// Harmonic balance including the second-order side-bands a_bb, a_rr.
///
/// Their exponents e^{i(∓2Ω+δ)t} follow from mixing the solved first-order
/// components, so the second-order pair is offset by δ₂ = 2 Re δ. The
/// report compares δ₂ against δ from the first-order-only system.
pub fn hb_solve_order2(p: &OmParams, nbar: f64, opts: &HbOptions) -> Result<HbSolution> {
    let first = solve(p, nbar, &HbOptions { initial: None, ..opts.clone() }, false)?;
    let mut sol = solve(p, nbar, opts, true)?;
    let delta2 = 2.0 * sol.state.delta.re;
    let first_order_delta = first.state.delta.re;
    sol.order2 = Some(Order2Report {
        delta2,
        first_order_delta,
        ratio: delta2 / first_order_delta,
    });
    Ok(sol)
}

fn solve(p: &OmParams, nbar: f64, opts: &HbOptions, order2: bool) -> Result<HbSolution> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::invalid("tol", "must be finite and > 0"));
    }
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be >= 1"));
    }
    let u = match opts.phonon_amplitude {
        Some(u) if !(u.is_finite() && u >= 0.0) => return Err(Error::invalid("phonon_amplitude", "must be finite and >= 0")),
        Some(u) => u,
        None => default_phonon_amplitude(p, nbar),
    };
    let model = Model::new(p, nbar, u)?;
    let mut state = match opts.initial {
        Some(mut s) => {
            s.check()?;
            s.a0 = Complex64::new(nbar.sqrt(), 0.0);
            s.bb = Complex64::new(u, 0.0);
            s.br = Complex64::new(u, 0.0);
            if order2 && !s.is_order2() {
                s.abb = Some(Complex64::default());
                s.arr = Some(Complex64::default());
                s = model.back_substitute(s);
            } else if !order2 {
                s.abb = None;
                s.arr = None;
            }
            s
        }
        None => initial_state(p, nbar, u, order2)?,
    };

    let mut x = model.pack(&state);
    let mut res = model.residual(&state);
    let mut iterations = 0;
    while res.norm > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: res.norm,
            });
        }
        iterations += 1;
        let step = newton_step(&model, &state, &x, &res.solved)?;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + lambda * b).collect();
            let ts = model.unpack(&trial, &state);
            let tr = model.residual(&ts);
            if tr.norm < res.norm {
                accepted = Some((trial, ts, tr));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((nx, ns, nr)) => {
                x = nx;
                state = ns;
                res = nr;
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: res.norm,
                })
            }
        }
    }
    log::debug!("harmonic balance converged in {iterations} iterations, residual {:e}", res.norm);
    Ok(HbSolution {
        state,
        residual_norm: res.norm,
        iterations,
        converged: true,
        diagnostics: res.diagnostics,
        order2: None,
    })
}

/// Solves J·dx = −F with a forward-difference Jacobian.
fn newton_step(model: &Model, state: &HbState, x: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-7 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = model.residual(&model.unpack(&xp, state)).solved;
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - f[i]) / h;
        }
    }
    let rhs = -DVector::from_column_slice(f);
    let dx = jac.lu().solve(&rhs).ok_or(Error::JacobianSingular)?;
    if dx.iter().any(|v| !v.is_finite()) {
        return Err(Error::JacobianSingular);
    }
    Ok(dx.iter().copied().collect())
}
