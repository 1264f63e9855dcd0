use proptest::prelude::*;
use sideband_core::closed_form::{
    golden_max, optimum, population_asymmetry, si_full, si_limits, si_normalized_form, si_quadratic, si_resolved,
};
use sideband_core::params::dimensionless_groups;
use sideband_core::OmParams;

/// Resolved, weakly damped parameters with n̄ up to a tenth of 1/β.
fn grid_point() -> impl Strategy<Value = (OmParams, f64)> {
    (0.0f64..7.0, 1e-3f64..0.1, 1e-4f64..0.1, 1e-5f64..1e-2, 0.0f64..0.1).prop_map(|(lg, k, gm, g, frac)| {
        let om = 10f64.powf(lg);
        let p = OmParams::new(om, k * om, gm * om, g * om, 0.0).unwrap();
        let nbar = frac * om * om / (2.0 * p.coupling * p.coupling);
        (p, nbar)
    })
}

fn any_params() -> impl Strategy<Value = OmParams> {
    (0.0f64..7.0, 1e-3f64..3.0, 1e-4f64..1.0, 1e-6f64..0.5).prop_map(|(lg, k, gm, g)| {
        let om = 10f64.powf(lg);
        OmParams::new(om, k * om, gm * om, g * om, 0.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // The tail numerator goes as (Ω − Γ/2)² − ΓΩ, which changes sign at
    // Γ = (4 − 2√3)Ω: strongly damped mechanics lose positivity at high power.
    #[test]
    fn si_is_positive(p in any_params(), ln in -3.0f64..12.0) {
        let nbar = 10f64.powf(ln);
        prop_assert!(si_full(&p, 0.0).unwrap().delta >= 0.0);
        let critical = (4.0 - 12f64.sqrt()) * p.mech_freq;
        if p.mech_decay < critical {
            prop_assert!(si_full(&p, nbar).unwrap().delta >= 0.0);
        } else if p.mech_decay > 1.01 * critical {
            let g = dimensionless_groups(&p).unwrap();
            prop_assert!(si_full(&p, 1e9 / g.beta).unwrap().delta < 0.0);
        }
    }

    // Past n̄_max the linear coefficient 2Ω + 2g0x0 turns negative and the
    // small root heads to −Ω; such roots are flagged invalid instead.
    #[test]
    fn quadratic_root_is_positive_up_to_the_optimum(p in any_params(), frac in 0.0f64..1.0) {
        let g = dimensionless_groups(&p).unwrap();
        let q = si_quadratic(&p, frac / g.beta).unwrap();
        prop_assert!(q.roots[0].re >= 0.0, "{:?}", q.roots);
        let far = si_quadratic(&p, 1e3 / g.beta).unwrap();
        prop_assert!(far.result.delta >= 0.0 || !far.result.valid);
    }

    #[test]
    fn resolved_form_tracks_full((p, nbar) in grid_point()) {
        let full = si_full(&p, nbar).unwrap().delta;
        let res = si_resolved(&p, nbar).unwrap().delta;
        // the (B − ΓD) numerator of the full form is 1 − 2Γ/Ω of the resolved one
        let om = p.mech_freq;
        let bound = 2.0 * (p.optical_decay + p.mech_decay) / (om - 2.0 * p.mech_decay);
        prop_assert!((full - res).abs() / full <= bound, "gap {} bound {bound}", (full - res).abs() / full);
    }

    #[test]
    fn quadratic_gap_bounded_by_dropped_term((p, nbar) in grid_point()) {
        let full = si_full(&p, nbar).unwrap().delta;
        let q = si_quadratic(&p, nbar).unwrap();
        let root = q.roots[0];
        prop_assert!((root.re - full).abs() <= root.norm_sqr() / p.mech_freq);
    }

    #[test]
    fn optimum_matches_bracketed_search(p in any_params()) {
        let opt = optimum(&p).unwrap();
        let g = dimensionless_groups(&p).unwrap();
        let om = p.mech_freq;
        // independent bracket: a log-spaced scan followed by golden refinement
        let f = |n: f64| si_normalized_form(&g, om, n).unwrap().delta;
        let grid: Vec<f64> = (0..=4000).map(|i| 10f64.powf(-6.0 + 18.0 * i as f64 / 4000.0) / g.beta).collect();
        let i = (0..grid.len()).max_by(|&a, &b| f(grid[a]).total_cmp(&f(grid[b]))).unwrap();
        let (lo, hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
        let arg = golden_max(f, lo, hi);
        prop_assert!((arg / opt.nbar_max - 1.0).abs() < 1e-6, "{arg} vs {}", opt.nbar_max);
    }

    #[test]
    fn zero_photon_limit_is_exact(p in any_params()) {
        let (om, gm, gamma) = (p.mech_freq, p.mech_decay, p.optical_decay + p.mech_decay);
        let want = 2.0 * gm * gm * om / (4.0 * om * om + gamma * gamma);
        let got = si_full(&p, 0.0).unwrap().delta;
        prop_assert!((got - want).abs() <= 4.0 * f64::EPSILON * want);
        prop_assert_eq!(si_limits(&p).unwrap().delta_at_zero, got);
    }

    // The tail is Ω/β only to O(Γ/Ω); weakly damped mechanics keep it within 1%.
    #[test]
    fn high_power_tail(p in any_params(), gm in 1e-5f64..2e-3, lb in 3.0f64..8.0) {
        let p = p.with_mech_decay(gm * p.mech_freq);
        let g = dimensionless_groups(&p).unwrap();
        let nbar = 10f64.powf(lb) / g.beta;
        let tail = si_limits(&p).unwrap().tail().unwrap();
        let got = nbar * si_full(&p, nbar).unwrap().delta;
        prop_assert!((got / tail - 1.0).abs() < 0.01, "{got} vs {tail}");
    }

    #[test]
    fn gamma_scaling_law(p in any_params(), s in 0.1f64..10.0) {
        let base = si_full(&p, 0.0).unwrap().delta;
        let scaled = si_full(&p.with_mech_decay(s * p.mech_decay), 0.0).unwrap().delta;
        let (om, k, gm) = (p.mech_freq, p.optical_decay, p.mech_decay);
        let law = s * s * (4.0 * om * om + (k + gm).powi(2)) / (4.0 * om * om + (k + s * gm).powi(2));
        prop_assert!((scaled / base / law - 1.0).abs() < 1e-12);
    }

    #[test]
    fn population_form_is_normalized_si(p in any_params(), ln in -3.0f64..10.0) {
        let nbar = 10f64.powf(ln);
        let g = dimensionless_groups(&p).unwrap();
        let n = population_asymmetry(&p, nbar).unwrap().normalized;
        let d = si_normalized_form(&g, p.mech_freq, nbar).unwrap().delta / p.mech_freq;
        prop_assert!((n - d).abs() <= 1e-12 * d.abs());
    }
}
