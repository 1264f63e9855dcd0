//! Levenberg–Marquardt for small dense least-squares problems.
//!
//! Marquardt's scaled damping (JᵀJ + λ·D) with D the running maximum of
//! diag(JᵀJ); only cost-decreasing steps are accepted, so the recorded cost
//! trace is monotone.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative step size below which an accepted step counts as converged.
    /// There is no cost-reduction test: near the minimum the cost changes
    /// quadratically in the step, so it would stop at √ftol precision.
    pub xtol: f64,
    /// Scaled-gradient tolerance.
    pub gtol: f64,
    pub initial_lambda: f64,
    /// Undamped Gauss–Newton steps taken after convergence.
    pub polish_steps: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 500,
            xtol: 1e-13,
            gtol: 1e-15,
            initial_lambda: 1e-3,
            polish_steps: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: DVector<f64>,
    /// ½‖r‖² at `params`.
    pub cost: f64,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub jacobian: DMatrix<f64>,
    pub residuals: DVector<f64>,
}

/// Minimises ½‖r(x)‖². `model` returns residuals and Jacobian; `feasible`
/// rejects trial points outside the parameter domain.
pub fn levenberg_marquardt<M, F>(model: M, feasible: F, x0: DVector<f64>, opts: &LmOptions) -> Result<LmResult>
where
    M: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    F: Fn(&DVector<f64>) -> bool,
{
    let n = x0.len();
    let mut x = x0;
    let (mut r, mut j) = model(&x);
    let mut cost = 0.5 * r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::FitDiverged("non-finite initial cost".into()));
    }
    let mut trace = vec![cost];
    let mut lambda = opts.initial_lambda;
    let mut scale = DVector::<f64>::zeros(n);
    let mut iterations = 0;

    loop {
        let (jtj, g) = normal_equations(&j, &r);
        for k in 0..n {
            scale[k] = scale[k].max(jtj[(k, k)]);
        }
        let gnorm = (0..n)
            .map(|k| if scale[k] > 0.0 { g[k].abs() / scale[k].sqrt() } else { 0.0 })
            .fold(0.0, f64::max);
        if gnorm <= opts.gtol * (2.0 * cost).sqrt().max(f64::MIN_POSITIVE) {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::FitDiverged(format!("no convergence in {} iterations", opts.max_iter)));
        }
        iterations += 1;

        let done;
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * scale[k].max(f64::MIN_POSITIVE);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        return Err(Error::FitDiverged("damped normal matrix not positive definite".into()));
                    }
                    continue;
                }
            };
            let small_x = step.norm() <= opts.xtol * (x.norm() + opts.xtol);
            let trial = &x + &step;
            if trial.iter().all(|v| v.is_finite()) && feasible(&trial) {
                let (tr, tj) = model(&trial);
                let tcost = 0.5 * tr.norm_squared();
                if tcost.is_finite() && tcost < cost {
                    x = trial;
                    r = tr;
                    j = tj;
                    cost = tcost;
                    trace.push(cost);
                    lambda = (lambda / 10.0).max(1e-15);
                    done = small_x;
                    break;
                }
            }
            if small_x {
                // more damping only shortens a step that is already negligible
                done = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // no decrease possible at this point: a minimum to working precision
                done = true;
                break;
            }
        }
        if done {
            break;
        }
    }

    // Cost comparisons cannot resolve the minimum beyond ~√ε in the
    // parameters; finish with undamped Gauss–Newton steps, judged by the
    // shrinking step instead. They move the cost only at roundoff level and
    // are not recorded in the trace.
    let mut prev = f64::INFINITY;
    for _ in 0..opts.polish_steps {
        let (jtj, g) = normal_equations(&j, &r);
        let Some(ch) = jtj.cholesky() else { break };
        let step = ch.solve(&(-&g));
        let size = step.norm();
        if !(size < prev) {
            break;
        }
        let trial = &x + &step;
        if !(trial.iter().all(|v| v.is_finite()) && feasible(&trial)) {
            break;
        }
        let (tr, tj) = model(&trial);
        let tcost = 0.5 * tr.norm_squared();
        if !(tcost <= cost * (1.0 + 1e-12)) {
            break;
        }
        x = trial;
        r = tr;
        j = tj;
        cost = tcost;
        prev = size;
        if size <= opts.xtol * (x.norm() + opts.xtol) {
            break;
        }
    }

    Ok(LmResult {
        params: x,
        cost,
        cost_trace: trace,
        iterations,
        jacobian: j,
        residuals: r,
    })
}

/// JᵀJ and Jᵀr over contiguous columns; nalgebra's generic product is
/// several times slower for tall, narrow Jacobians.
pub(crate) fn normal_equations(j: &DMatrix<f64>, r: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let (m, n) = j.shape();
    let data = j.as_slice();
    let col = |k: usize| &data[k * m..(k + 1) * m];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut jtj = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = dot(col(a), col(b));
            jtj[(a, b)] = v;
            jtj[(b, a)] = v;
        }
    }
    let g = DVector::from_iterator(n, (0..n).map(|k| dot(col(k), r.as_slice())));
    (jtj, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_equations_match_products() {
        let j = DMatrix::from_fn(7, 3, |i, k| (i as f64 + 1.0).powi(k as i32) - 0.5 * k as f64);
        let r = DVector::from_fn(7, |i, _| (i as f64).sin());
        let (jtj, g) = normal_equations(&j, &r);
        assert!((jtj - j.transpose() * &j).norm() < 1e-9);
        assert!((g - j.transpose() * &r).norm() < 1e-9);
    }

    #[test]
    fn rosenbrock_as_least_squares() {
        let model = |x: &DVector<f64>| {
            let r = DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
            (r, j)
        };
        let res = levenberg_marquardt(model, |_| true, DVector::from_vec(vec![-1.2, 1.0]), &LmOptions::default()).unwrap();
        assert!((res.params[0] - 1.0).abs() < 1e-10);
        assert!((res.params[1] - 1.0).abs() < 1e-10);
        assert!(res.cost_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exponential_decay_fit() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let model = |x: &DVector<f64>| {
            let r = DVector::from_iterator(t.len(), t.iter().zip(&y).map(|(t, y)| x[0] * (-x[1] * t).exp() - y));
            let mut j = DMatrix::zeros(t.len(), 2);
            for (i, t) in t.iter().enumerate() {
                let e = (-x[1] * t).exp();
                j[(i, 0)] = e;
                j[(i, 1)] = -x[0] * t * e;
            }
            (r, j)
        };
        let res = levenberg_marquardt(model, |_| true, DVector::from_vec(vec![1.0, 0.1]), &LmOptions::default()).unwrap();
        assert!((res.params[0] - 3.0).abs() < 1e-9);
        assert!((res.params[1] - 0.7).abs() < 1e-9);
    }
}
