use rayon::prelude::*;
use serde::Serialize;
use sideband_core::closed_form::{
    classify_regime, classify_regime_with_margin, optimum as find_optimum, population_asymmetry, si_full, si_full_forms,
    si_limits, si_linearized, si_normalized_form, si_quadratic, si_resolved, Optimum, RegimeReport, SiResult, REGIME_MARGIN,
};
use sideband_core::params::{dimensionless_groups, steady_state_photon};
use sideband_core::{DimGroups, Error, OmParams};

use super::Ctx;
use crate::config::{Branch, SweepVariable};
use crate::error::CliError;
use crate::output::{csv_table, json, num, Artifact, Outcome};
use crate::Format;

#[derive(Debug, Serialize)]
struct MethodOut {
    method: &'static str,
    delta: f64,
    delta_normalized: f64,
    valid: bool,
}

#[derive(Debug, Serialize)]
struct OptimumOut {
    nbar_max: f64,
    nbar_max_approx: f64,
    nbar_max_search: f64,
    delta_max: f64,
    delta_max_approx: f64,
    nbar_linewidth: f64,
}

impl OptimumOut {
    fn new(o: &Optimum, ctx: &Ctx) -> Self {
        OptimumOut {
            nbar_max: o.nbar_max,
            nbar_max_approx: o.nbar_max_approx,
            nbar_max_search: o.nbar_max_search,
            delta_max: ctx.rate(o.delta_max),
            delta_max_approx: ctx.rate(o.delta_max_approx),
            nbar_linewidth: o.nbar_linewidth,
        }
    }
}

#[derive(Debug, Serialize)]
struct RegimeOut {
    regime: &'static str,
    nbar: f64,
    nbar_max: f64,
    delta_max: f64,
    nbar_linewidth: f64,
    asymptotic_delta: f64,
}

impl RegimeOut {
    fn new(r: &RegimeReport, ctx: &Ctx) -> Self {
        RegimeOut {
            regime: r.regime.name(),
            nbar: r.nbar,
            nbar_max: r.nbar_max,
            delta_max: ctx.rate(r.delta_max),
            nbar_linewidth: r.nbar_linewidth,
            asymptotic_delta: ctx.rate(r.asymptotic_delta),
        }
    }
}

#[derive(Debug, Serialize)]
struct PhotonOut {
    roots: Vec<f64>,
    bistable: bool,
    branch: &'static str,
}

#[derive(Debug, Serialize)]
struct FormsOut {
    complex_line: f64,
    relative_gap: f64,
    diverge: bool,
}

#[derive(Debug, Serialize)]
struct SiReport {
    units: &'static str,
    nbar: f64,
    steady_state: Option<PhotonOut>,
    methods: Vec<MethodOut>,
    quadratic_imag_ratio: f64,
    full_forms: FormsOut,
    population_asymmetry: f64,
    delta_at_zero: f64,
    tail_coefficient: Option<f64>,
    groups: DimGroups,
    optimum: Option<OptimumOut>,
    regime: Option<RegimeOut>,
}

/// γ is the only dimensional group.
fn groups_out(ctx: &Ctx, mut g: DimGroups) -> DimGroups {
    g.gamma_total = ctx.rate(g.gamma_total);
    g
}

/// δ by every closed-form method, in `Method::ALL` order.
fn all_methods(p: &OmParams, g: &DimGroups, nbar: f64) -> sideband_core::Result<[SiResult; 5]> {
    Ok([
        si_full(p, nbar)?,
        si_quadratic(p, nbar)?.result,
        si_resolved(p, nbar)?,
        si_linearized(p, nbar)?.result,
        si_normalized_form(g, p.mech_freq, nbar)?,
    ])
}

/// Optimum and regime are undefined without coupling.
fn when_coupled<T>(r: sideband_core::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::CouplingZero) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn params(ctx: &Ctx) -> Result<OmParams, CliError> {
    let p = ctx.cfg.params()?.to_rad(ctx.units);
    p.validate()?;
    Ok(p)
}

/// n̄ from the config, directly or through the steady-state cubic.
fn photon_number(ctx: &Ctx, p: &OmParams) -> Result<(f64, Option<PhotonOut>), CliError> {
    match (ctx.cfg.nbar, ctx.cfg.drive) {
        (Some(_), Some(_)) => Err(CliError::validation("give either `nbar` or a [drive] section, not both")),
        (Some(n), None) => Ok((n, None)),
        (None, Some(d)) => {
            let ss = steady_state_photon(p, &d.to_rad(ctx.units))?;
            let n = match d.branch {
                Branch::Lower => ss.roots[0],
                Branch::Upper => *ss.roots.last().expect("at least one root"),
            };
            if ss.bistable {
                log::warn!("drive is bistable; using the {:?} branch n̄ = {n:e}", d.branch);
            }
            let out = PhotonOut {
                roots: ss.roots,
                bistable: ss.bistable,
                branch: match d.branch {
                    Branch::Lower => "lower",
                    Branch::Upper => "upper",
                },
            };
            Ok((n, Some(out)))
        }
        (None, None) => Err(CliError::validation("missing `nbar` (or a [drive] section)")),
    }
}

pub fn si(ctx: &Ctx) -> Result<Outcome, CliError> {
    let p = params(ctx)?;
    let (nbar, steady_state) = photon_number(ctx, &p)?;
    let g = dimensionless_groups(&p)?;
    let results = all_methods(&p, &g, nbar)?;
    let methods: Vec<MethodOut> = results
        .iter()
        .map(|r| MethodOut {
            method: r.method.name(),
            delta: ctx.rate(r.delta),
            delta_normalized: r.delta_normalized,
            valid: r.valid,
        })
        .collect();
    let forms = si_full_forms(&p, nbar)?;
    let limits = si_limits(&p)?;
    let opt = when_coupled(find_optimum(&p))?;
    let regime = when_coupled(classify_regime(&p, nbar))?;

    match ctx.format_or(Format::Json) {
        Format::Json => {
            let report = SiReport {
                units: ctx.units.label(),
                nbar,
                steady_state,
                methods,
                quadratic_imag_ratio: si_quadratic(&p, nbar)?.imag_ratio,
                full_forms: FormsOut {
                    complex_line: ctx.rate(forms.complex),
                    relative_gap: forms.relative_gap,
                    diverge: forms.diverge,
                },
                population_asymmetry: population_asymmetry(&p, nbar)?.normalized,
                delta_at_zero: ctx.rate(limits.delta_at_zero),
                tail_coefficient: limits.tail_coefficient.map(|t| ctx.rate(t)),
                groups: groups_out(ctx, g),
                optimum: opt.as_ref().map(|o| OptimumOut::new(o, ctx)),
                regime: regime.as_ref().map(|r| RegimeOut::new(r, ctx)),
            };
            Ok(Outcome::single(json("si", &report)?))
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = methods
                .iter()
                .map(|m| vec![m.method.to_string(), num(nbar), num(m.delta), num(m.delta_normalized), m.valid.to_string()])
                .collect();
            Ok(Outcome::single(csv_table(
                "si",
                &["method", "nbar", "delta", "delta_normalized", "valid"],
                &rows,
            )?))
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    value: f64,
    nbar: f64,
    delta_full: f64,
    delta_quadratic: f64,
    delta_resolved: f64,
    delta_linearized: f64,
    delta_dimensionless: f64,
    delta_normalized: f64,
    valid: bool,
    regime: Option<&'static str>,
    population_asymmetry: f64,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    units: &'static str,
    variable: &'static str,
    rows: Vec<SweepRow>,
}

fn sweep_point(ctx: &Ctx, var: SweepVariable, value: f64) -> Result<SweepRow, CliError> {
    let mut section = ctx.cfg.params()?;
    let mut nbar = ctx.cfg.nbar;
    match var {
        SweepVariable::Nbar => nbar = Some(value),
        SweepVariable::MechFreq => section.mech_freq = value,
        SweepVariable::OpticalDecay => section.optical_decay = value,
        SweepVariable::MechDecay => section.mech_decay = value,
        SweepVariable::Coupling => section.coupling = value,
        SweepVariable::Detuning => section.detuning = value,
    }
    let nbar = nbar.ok_or_else(|| CliError::validation(format!("sweeping `{}` needs a fixed `nbar`", var.name())))?;
    let p = section.to_rad(ctx.units);
    p.validate()?;
    let g = dimensionless_groups(&p)?;
    let r = all_methods(&p, &g, nbar)?;
    let regime = when_coupled(classify_regime(&p, nbar))?.map(|r| r.regime.name());
    Ok(SweepRow {
        value,
        nbar,
        delta_full: ctx.rate(r[0].delta),
        delta_quadratic: ctx.rate(r[1].delta),
        delta_resolved: ctx.rate(r[2].delta),
        delta_linearized: ctx.rate(r[3].delta),
        delta_dimensionless: ctx.rate(r[4].delta),
        delta_normalized: r[0].delta_normalized,
        valid: r[0].valid,
        regime,
        population_asymmetry: population_asymmetry(&p, nbar)?.normalized,
    })
}

pub fn sweep(ctx: &Ctx) -> Result<Outcome, CliError> {
    let s = ctx.cfg.sweep.ok_or_else(|| CliError::validation("missing [sweep] section"))?;
    let grid = s.grid()?;
    // collect keeps grid order whatever order the workers finish in
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| sweep_point(ctx, s.variable, v))
        .collect::<Result<_, _>>()?;

    match ctx.format_or(Format::Csv) {
        Format::Json => {
            let report = SweepReport {
                units: ctx.units.label(),
                variable: s.variable.name(),
                rows,
            };
            Ok(Outcome::single(json("sweep", &report)?))
        }
        Format::Csv => {
            // an n̄ sweep already has n̄ as its first column
            let dup = s.variable == SweepVariable::Nbar;
            let mut header = vec![
                s.variable.name(),
                "nbar",
                "delta_full",
                "delta_quadratic",
                "delta_resolved",
                "delta_linearized",
                "delta_dimensionless",
                "delta_normalized",
                "valid",
                "regime",
                "population_asymmetry",
            ];
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        num(r.value),
                        num(r.nbar),
                        num(r.delta_full),
                        num(r.delta_quadratic),
                        num(r.delta_resolved),
                        num(r.delta_linearized),
                        num(r.delta_dimensionless),
                        num(r.delta_normalized),
                        r.valid.to_string(),
                        r.regime.unwrap_or("").to_string(),
                        num(r.population_asymmetry),
                    ];
                    if dup {
                        row.remove(1);
                    }
                    row
                })
                .collect();
            if dup {
                header.remove(1);
            }
            Ok(Outcome::single(csv_table("sweep", &header, &cells)?))
        }
    }
}

#[derive(Debug, Serialize)]
struct OptimumReport {
    units: &'static str,
    groups: DimGroups,
    #[serde(flatten)]
    optimum: OptimumOut,
}

pub fn optimum(ctx: &Ctx) -> Result<Outcome, CliError> {
    let p = params(ctx)?;
    let o = find_optimum(&p)?;
    let report = OptimumReport {
        units: ctx.units.label(),
        groups: groups_out(ctx, dimensionless_groups(&p)?),
        optimum: OptimumOut::new(&o, ctx),
    };
    single_row(ctx, "optimum", &report, |r| {
        let o = &r.optimum;
        vec![
            ("nbar_max", num(o.nbar_max)),
            ("nbar_max_approx", num(o.nbar_max_approx)),
            ("nbar_max_search", num(o.nbar_max_search)),
            ("delta_max", num(o.delta_max)),
            ("delta_max_approx", num(o.delta_max_approx)),
            ("nbar_linewidth", num(o.nbar_linewidth)),
        ]
    })
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    units: &'static str,
    margin: f64,
    #[serde(flatten)]
    regime: RegimeOut,
}

pub fn classify(ctx: &Ctx) -> Result<Outcome, CliError> {
    let p = params(ctx)?;
    let (nbar, _) = photon_number(ctx, &p)?;
    let margin = ctx.cfg.classify.map_or(REGIME_MARGIN, |c| c.margin);
    let r = classify_regime_with_margin(&p, nbar, margin)?;
    let report = ClassifyReport {
        units: ctx.units.label(),
        margin,
        regime: RegimeOut::new(&r, ctx),
    };
    single_row(ctx, "classify", &report, |r| {
        let g = &r.regime;
        vec![
            ("regime", g.regime.to_string()),
            ("nbar", num(g.nbar)),
            ("nbar_max", num(g.nbar_max)),
            ("delta_max", num(g.delta_max)),
            ("nbar_linewidth", num(g.nbar_linewidth)),
            ("asymptotic_delta", num(g.asymptotic_delta)),
        ]
    })
}

/// JSON report, or a one-row CSV of the listed columns.
pub(super) fn single_row<T: Serialize>(
    ctx: &Ctx,
    name: &str,
    report: &T,
    columns: impl Fn(&T) -> Vec<(&'static str, String)>,
) -> Result<Outcome, CliError> {
    let artifact: Artifact = match ctx.format_or(Format::Json) {
        Format::Json => json(name, report)?,
        Format::Csv => {
            let cols = columns(report);
            let header: Vec<&str> = cols.iter().map(|c| c.0).collect();
            let row: Vec<String> = cols.into_iter().map(|c| c.1).collect();
            csv_table(name, &header, &[row])?
        }
    };
    Ok(Outcome::single(artifact))
}
