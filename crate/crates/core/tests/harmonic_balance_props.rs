use proptest::prelude::*;
use sideband_core::closed_form::si_quadratic;
use sideband_core::harmonic_balance::{hb_residual, hb_solve, HbOptions};
use sideband_core::OmParams;

/// Resolved cavity, weak coupling, n̄ at most a tenth of the optimum.
fn resolved() -> impl Strategy<Value = (OmParams, f64)> {
    (1e-3f64..0.1, 1e-4f64..0.1, 1e-5f64..1e-2, 0.0f64..0.1).prop_map(|(k, gm, g, frac)| {
        let p = OmParams::new(1.0, k, gm, g, 0.0).unwrap();
        (p, frac / (2.0 * g * g))
    })
}

fn opts(tol: f64) -> HbOptions {
    HbOptions {
        tol,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn agrees_with_quadratic_root((p, nbar) in resolved()) {
        let tol = 1e-9;
        if let Ok(sol) = hb_solve(&p, nbar, &opts(tol)) {
            let q = si_quadratic(&p, nbar).unwrap();
            let gap = (sol.state.si() - q.result.delta).abs() / p.mech_freq;
            prop_assert!(gap <= 10.0 * tol, "gap {gap:e}");
        }
    }

    #[test]
    fn residual_certificate_is_idempotent((p, nbar) in resolved(), lt in -12.0f64..-6.0) {
        let tol = 10f64.powf(lt);
        if let Ok(sol) = hb_solve(&p, nbar, &opts(tol)) {
            prop_assert!(sol.converged);
            prop_assert!(sol.residual_norm <= tol);
            let again = hb_residual(&sol.state, &p, nbar).unwrap();
            prop_assert!(again.norm <= tol, "{:e} > {tol:e}", again.norm);
        }
    }

    #[test]
    fn solves_are_deterministic((p, nbar) in resolved()) {
        let a = hb_solve(&p, nbar, &opts(1e-10));
        let b = hb_solve(&p, nbar, &opts(1e-10));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.iterations, b.iterations);
                prop_assert_eq!(a.state.delta.re.to_bits(), b.state.delta.re.to_bits());
                prop_assert_eq!(a.state.delta.im.to_bits(), b.state.delta.im.to_bits());
                prop_assert_eq!(a, b);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn side_bands_below_pump((p, nbar) in resolved(), cap in 0.0f64..0.1) {
        // rescale n̄ so that g0√n̄ ≤ 0.1Ω
        let nbar = nbar.min((cap * p.mech_freq / p.coupling).powi(2));
        if let Ok(sol) = hb_solve(&p, nbar, &opts(1e-10)) {
            let a0 = sol.state.a0.norm();
            prop_assert!(sol.state.ab.norm() <= a0);
            prop_assert!(sol.state.ar.norm() <= a0);
        }
    }
}

#[test]
fn grid_converges() {
    // the oracle test above skips non-converged points; make sure that is rare
    let mut failures = 0;
    for k in [1e-3, 1e-2, 0.1] {
        for gm in [1e-4, 1e-3, 1e-2, 0.1] {
            for frac in [0.0, 1e-3, 0.05, 0.1] {
                let p = OmParams::new(1.0, k, gm, 1e-3, 0.0).unwrap();
                if hb_solve(&p, frac / 2e-6, &opts(1e-9)).is_err() {
                    failures += 1;
                }
            }
        }
    }
    assert_eq!(failures, 0);
}
