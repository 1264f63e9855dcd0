//! Closed-form side-band inequivalence: the full rational form, the
//! quadratic it comes from, its resolved-cavity and linear approximations,
//! the dimensionless form with its optimum, regimes and asymmetry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_nbar, dimensionless_groups, mean_displacement, DimGroups, OmParams};

/// δ̄ above which a closed-form value is reported but flagged.
pub const VALIDITY_LIMIT: f64 = 0.1;
/// |Im δ / Re δ| above which the quadratic root is flagged.
pub const IMAG_RATIO_LIMIT: f64 = 0.1;
/// Relative gap between the two rational forms that gets flagged.
pub const FORM_DIVERGENCE: f64 = 0.01;
/// Default regime margin (one decade each side of n̄_max).
pub const REGIME_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Full,
    Quadratic,
    Resolved,
    Linearized,
    Dimensionless,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Full,
        Method::Quadratic,
        Method::Resolved,
        Method::Linearized,
        Method::Dimensionless,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Quadratic => "quadratic",
            Method::Resolved => "resolved",
            Method::Linearized => "linearized",
            Method::Dimensionless => "dimensionless",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiResult {
    /// δ, rad/s.
    pub delta: f64,
    /// δ/Ω.
    pub delta_normalized: f64,
    pub method: Method,
    /// False outside the perturbative domain (δ̄ > 0.1, or a strongly
    /// complex quadratic root).
    pub valid: bool,
}

impl SiResult {
    fn new(delta: f64, mech_freq: f64, method: Method) -> Self {
        let delta_normalized = delta / mech_freq;
        SiResult {
            delta,
            delta_normalized,
            method,
            valid: delta_normalized.abs() <= VALIDITY_LIMIT,
        }
    }
}

/// A, B, C, D of δ = Re[(A + B n̄)/(C − i D n̄)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiCoefficients {
    pub a: Complex64,
    pub b: f64,
    pub c: Complex64,
    pub d: f64,
}

pub fn coefficients(p: &OmParams, nbar: f64) -> Result<SiCoefficients> {
    p.validate()?;
    check_nbar(nbar)?;
    let (om, k, gm, g0) = (p.mech_freq, p.optical_decay, p.mech_decay, p.coupling);
    let s = om * om + gm * gm / 4.0;
    let g2 = g0 * g0;
    let a = gm * Complex64::new(-k, 2.0 * om) + Complex64::new(1.0, 1.0) * (4.0 * g2 * nbar * gm * om / s);
    Ok(SiCoefficients {
        a,
        b: 4.0 * g2 * (om - gm / 2.0).powi(2) / s,
        c: Complex64::new(2.0 * om, p.gamma_total()),
        d: 4.0 * g2 * om / s,
    })
}

/// Expanded real form:
/// δ = (2Γ²Ω + 2Ω(B − ΓD) n̄) / (|C|² − 4ΩD n̄ + D² n̄²).
pub fn si_full(p: &OmParams, nbar: f64) -> Result<SiResult> {
    let c = coefficients(p, nbar)?;
    let (om, gm) = (p.mech_freq, p.mech_decay);
    let den = c.c.norm_sqr() - 4.0 * om * c.d * nbar + c.d * c.d * nbar * nbar;
    if !(den > 0.0) {
        return Err(Error::SingularDenominator(den));
    }
    let num = 2.0 * gm * gm * om + 2.0 * om * (c.b - gm * c.d) * nbar;
    Ok(SiResult::new(num / den, om, Method::Full))
}

/// Both rational forms side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullForms {
    /// The expanded line returned by [`si_full`].
    pub expanded: f64,
    /// Re[(A + B n̄)/(C − i D n̄)] with the complete A.
    pub complex: f64,
    pub relative_gap: f64,
    /// Gap above [`FORM_DIVERGENCE`].
    pub diverge: bool,
}

pub fn si_full_forms(p: &OmParams, nbar: f64) -> Result<FullForms> {
    let expanded = si_full(p, nbar)?.delta;
    let c = coefficients(p, nbar)?;
    let den = c.c - Complex64::new(0.0, c.d * nbar);
    let complex = ((c.a + c.b * nbar) / den).re;
    let relative_gap = (complex - expanded).abs() / expanded.abs().max(f64::MIN_POSITIVE);
    Ok(FullForms {
        expanded,
        complex,
        relative_gap,
        diverge: relative_gap > FORM_DIVERGENCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSi {
    pub result: SiResult,
    /// Smaller-modulus root first.
    pub roots: [Complex64; 2],
    /// |Im/Re| of the selected root.
    pub imag_ratio: f64,
}

/// δ² − [2Ω + iγ + 2g0x0] δ + [(2iΩ − κ)Γ + 4g0²n̄ + 2iΓg0x0] = 0,
/// keeping the smaller root.
pub fn si_quadratic(p: &OmParams, nbar: f64) -> Result<QuadraticSi> {
    p.validate()?;
    let x0 = mean_displacement(p, nbar)?.x0;
    let (om, k, gm, g0) = (p.mech_freq, p.optical_decay, p.mech_decay, p.coupling);
    let lin = Complex64::new(2.0 * om + 2.0 * g0 * x0, p.gamma_total());
    let cst = Complex64::new(-k * gm + 4.0 * g0 * g0 * nbar, 2.0 * om * gm + 2.0 * gm * g0 * x0);
    let [small, big] = monic_quadratic_roots(lin, cst);
    let imag_ratio = if small.re == 0.0 {
        f64::INFINITY
    } else {
        (small.im / small.re).abs()
    };
    let mut result = SiResult::new(small.re, om, Method::Quadratic);
    result.valid &= imag_ratio <= IMAG_RATIO_LIMIT;
    Ok(QuadraticSi {
        result,
        roots: [small, big],
        imag_ratio,
    })
}

/// Roots of z² − s z + q, smaller modulus first. The large root is taken
/// from the branch without cancellation and the small one as q / large.
pub(crate) fn monic_quadratic_roots(s: Complex64, q: Complex64) -> [Complex64; 2] {
    let disc = (s * s - 4.0 * q).sqrt();
    let plus = (s + disc) / 2.0;
    let minus = (s - disc) / 2.0;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    if big.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q / big, big]
}

/// Resolved-cavity form (2Γ²Ω + 8g0²Ωn̄)/(γ² + 4Ω²(1 − 2(g0/Ω)²n̄)²).
pub fn si_resolved(p: &OmParams, nbar: f64) -> Result<SiResult> {
    p.validate()?;
    check_nbar(nbar)?;
    let (om, gm, g0) = (p.mech_freq, p.mech_decay, p.coupling);
    let gamma = p.gamma_total();
    let beta = 2.0 * (g0 / om).powi(2);
    let num = 2.0 * gm * gm * om + 8.0 * g0 * g0 * om * nbar;
    let den = gamma * gamma + 4.0 * om * om * (1.0 - beta * nbar).powi(2);
    Ok(SiResult::new(num / den, om, Method::Resolved))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSi {
    pub result: SiResult,
    /// 2g0²n̄/Ω.
    pub coarse: f64,
    pub intercept: f64,
    pub slope: f64,
}

/// Small-n̄ line 2Γ²Ω/(4Ω²+γ²) + 8g0²Ω(4Ω²+γ²+Γ²)/(γ²+4Ω²)²·n̄.
///
/// Meaningful only for n̄ ≪ Ω²/g0²; beyond a tenth of that a warning is
/// logged and the result is flagged invalid.
pub fn si_linearized(p: &OmParams, nbar: f64) -> Result<LinearizedSi> {
    p.validate()?;
    check_nbar(nbar)?;
    let (om, gm, g0) = (p.mech_freq, p.mech_decay, p.coupling);
    let gamma = p.gamma_total();
    let c2 = 4.0 * om * om + gamma * gamma;
    let intercept = 2.0 * gm * gm * om / c2;
    let slope = 8.0 * g0 * g0 * om * (c2 + gm * gm) / (c2 * c2);
    let mut result = SiResult::new(intercept + slope * nbar, om, Method::Linearized);
    if g0 > 0.0 && nbar > 0.1 * om * om / (g0 * g0) {
        log::warn!("linearized SI used at n̄ = {nbar:e}, beyond 0.1·Ω²/g0²");
        result.valid = false;
    }
    Ok(LinearizedSi {
        result,
        coarse: 2.0 * g0 * g0 * nbar / om,
        intercept,
        slope,
    })
}

/// Ωψ(1 + αn̄)/(ϑ² + (1 − βn̄)²).
pub fn si_normalized_form(g: &DimGroups, mech_freq: f64, nbar: f64) -> Result<SiResult> {
    check_nbar(nbar)?;
    if !(mech_freq.is_finite() && mech_freq > 0.0) {
        return Err(Error::invalid("mech_freq", "must be finite and > 0"));
    }
    let delta = mech_freq * normalized_shape(g, nbar);
    Ok(SiResult::new(delta, mech_freq, Method::Dimensionless))
}

/// ψ(1 + αn̄)/(ϑ² + (1 − βn̄)²), i.e. δ/Ω of the dimensionless form.
fn normalized_shape(g: &DimGroups, nbar: f64) -> f64 {
    g.psi * (1.0 + g.alpha * nbar) / (g.theta * g.theta + (1.0 - g.beta * nbar).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiLimits {
    /// 2Γ²Ω/(4Ω² + γ²).
    pub delta_at_zero: f64,
    /// Ω/β = Ω³/(2g0²); absent for g0 = 0.
    pub tail_coefficient: Option<f64>,
}

impl SiLimits {
    pub fn tail(&self) -> Result<f64> {
        self.tail_coefficient.ok_or(Error::TailUndefined)
    }
}

pub fn si_limits(p: &OmParams) -> Result<SiLimits> {
    p.validate()?;
    let (om, gm, g0) = (p.mech_freq, p.mech_decay, p.coupling);
    let gamma = p.gamma_total();
    Ok(SiLimits {
        delta_at_zero: 2.0 * gm * gm * om / (4.0 * om * om + gamma * gamma),
        tail_coefficient: (g0 > 0.0).then(|| om.powi(3) / (2.0 * g0 * g0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// √((α+β)² + α²ϑ²)/(αβ) − 1/α.
    pub nbar_max: f64,
    /// 1/β.
    pub nbar_max_approx: f64,
    /// Arg-max of the dimensionless form found by golden-section search.
    pub nbar_max_search: f64,
    /// Dimensionless form evaluated at `nbar_max`, rad/s.
    pub delta_max: f64,
    /// Ω/ϑ² = 4Ω³/γ², rad/s.
    pub delta_max_approx: f64,
    /// ϑ·n̄_max.
    pub nbar_linewidth: f64,
}

pub fn optimum(p: &OmParams) -> Result<Optimum> {
    if p.coupling == 0.0 {
        p.validate()?;
        return Err(Error::CouplingZero);
    }
    optimum_from_groups(&dimensionless_groups(p)?, p.mech_freq)
}

pub fn optimum_from_groups(g: &DimGroups, mech_freq: f64) -> Result<Optimum> {
    if g.alpha == 0.0 || g.beta == 0.0 {
        return Err(Error::CouplingZero);
    }
    let (a, b, th) = (g.alpha, g.beta, g.theta);
    let nbar_max = ((a + b).powi(2) + (a * th).powi(2)).sqrt() / (a * b) - 1.0 / a;
    // the maximum never lies beyond (1 + ϑ)/β
    let hi = 2.0 * (1.0 + th) / b;
    let nbar_max_search = golden_max(|n| normalized_shape(g, n), 0.0, hi);
    Ok(Optimum {
        nbar_max,
        nbar_max_approx: 1.0 / b,
        nbar_max_search,
        delta_max: mech_freq * normalized_shape(g, nbar_max),
        delta_max_approx: mech_freq / (th * th),
        nbar_linewidth: th * nbar_max,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..400 {
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    FullyLinear,
    WeaklyNonlinear,
    StronglyNonlinear,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::FullyLinear => "FullyLinear",
            Regime::WeaklyNonlinear => "WeaklyNonlinear",
            Regime::StronglyNonlinear => "StronglyNonlinear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub nbar: f64,
    pub nbar_max: f64,
    pub delta_max: f64,
    pub nbar_linewidth: f64,
    /// δ from the asymptotic line of the selected regime, rad/s.
    pub asymptotic_delta: f64,
}

pub fn classify_regime(p: &OmParams, nbar: f64) -> Result<RegimeReport> {
    classify_regime_with_margin(p, nbar, REGIME_MARGIN)
}

pub fn classify_regime_with_margin(p: &OmParams, nbar: f64, margin: f64) -> Result<RegimeReport> {
    let opt = optimum(p)?;
    let g = dimensionless_groups(p)?;
    classify_from_optimum(&opt, g.theta, nbar, margin)
}

/// Regime of `nbar` relative to a known optimum: fully linear below
/// (1 − ϑ)·n̄_max/margin, strongly nonlinear above (1 + ϑ)·n̄_max·margin.
pub fn classify_from_optimum(opt: &Optimum, theta: f64, nbar: f64, margin: f64) -> Result<RegimeReport> {
    check_nbar(nbar)?;
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(Error::invalid("margin", "must be finite and >= 1"));
    }
    let (nm, dm) = (opt.nbar_max, opt.delta_max);
    let regime = if nbar < (1.0 - theta) * nm / margin {
        Regime::FullyLinear
    } else if nbar > (1.0 + theta) * nm * margin {
        Regime::StronglyNonlinear
    } else {
        Regime::WeaklyNonlinear
    };
    let x = nbar / nm;
    let asymptotic_delta = match regime {
        Regime::FullyLinear => x * dm,
        Regime::WeaklyNonlinear => dm / (1.0 + (x - 1.0).powi(2) / (theta * theta)),
        Regime::StronglyNonlinear => dm / x,
    };
    Ok(RegimeReport {
        regime,
        nbar,
        nbar_max: nm,
        delta_max: dm,
        nbar_linewidth: opt.nbar_linewidth,
        asymptotic_delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryResult {
    /// n̄_r − n̄_b.
    pub population_difference: f64,
    /// N̄ = ψ(1 + αn̄)/(ϑ² + (1 − βn̄)²).
    pub normalized: f64,
}

pub fn population_asymmetry(p: &OmParams, nbar: f64) -> Result<AsymmetryResult> {
    let delta = si_full(p, nbar)?.delta;
    let g = dimensionless_groups(p)?;
    let (om, gm) = (p.mech_freq, p.mech_decay);
    Ok(AsymmetryResult {
        population_difference: om * nbar / (om * om + gm * gm / 4.0) * delta,
        normalized: normalized_shape(&g, nbar),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanSi {
    /// ½Γ²/(Ω² + γ²/4).
    pub normalized: f64,
    /// ½Γ²/Ω².
    pub coarse: f64,
}

/// Weak-coupling δ̄ of a single line; the caller is responsible for
/// g0√n̄ < Γ.
pub fn raman_line_si(mech_freq: f64, mech_decay: f64, optical_decay: f64) -> Result<RamanSi> {
    for (name, v) in [("mech_decay", mech_decay), ("optical_decay", optical_decay)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(name, "must be finite and >= 0"));
        }
    }
    if !(mech_freq.is_finite() && mech_freq > 0.0) {
        return Err(Error::invalid("mech_freq", "must be finite and > 0"));
    }
    let gamma = mech_decay + optical_decay;
    let g2 = mech_decay * mech_decay;
    Ok(RamanSi {
        normalized: 0.5 * g2 / (mech_freq * mech_freq + gamma * gamma / 4.0),
        coarse: 0.5 * g2 / (mech_freq * mech_freq),
    })
}
