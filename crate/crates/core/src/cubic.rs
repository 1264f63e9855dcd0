//! Real roots of low-degree polynomials.

use std::f64::consts::PI;

/// Real roots of `c3 x³ + c2 x² + c1 x + c0`, ascending, duplicates merged.
///
/// Three-root case uses the trigonometric form, one-root case Cardano;
/// every root is then polished with Newton steps on the original
/// polynomial. Falls back to lower degree only when the leading coefficient
/// is zero or too small to divide by: a tiny c3 still places a large root.
pub fn real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    if c3 == 0.0 || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return quadratic_roots(c2, c1, c0);
    }
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut roots = if disc > 0.0 {
        let sq = disc.sqrt();
        // pick the larger-magnitude branch first to avoid cancellation
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        vec![t - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };

    for r in roots.iter_mut() {
        *r = polish(|x| ((c3 * x + c2) * x + c1) * x + c0, |x| (3.0 * c3 * x + 2.0 * c2) * x + c1, *r);
    }
    sort_dedup(roots)
}

pub fn quadratic_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c2 == 0.0 || !(c1 / c2).is_finite() || !(c0 / c2).is_finite() {
        return if c1 == 0.0 { Vec::new() } else { vec![-c0 / c1] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let mut roots = vec![q / c2];
    if q != 0.0 {
        roots.push(c0 / q);
    }
    sort_dedup(roots)
}

/// A few guarded Newton steps; keeps the original point if a step makes
/// the residual worse.
pub fn polish(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut x: f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..8 {
        let d = df(x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - fx / d;
        let fnext = f(next);
        if !(fnext.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

fn sort_dedup(mut roots: Vec<f64>) -> Vec<f64> {
    roots.retain(|r| r.is_finite());
    roots.sort_by(|a, b| a.total_cmp(b));
    let scale = roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    roots
}
