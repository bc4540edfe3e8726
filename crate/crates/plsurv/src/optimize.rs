//! Bounded maximization of a smooth scalar objective by Newton ascent with
//! numerically differenced gradient and curvature, falling back to
//! golden-section coordinate search when a Newton step fails to make
//! progress. Everything here is deterministic.
//!
//! Objectives are expected on a scale of order one per coordinate (the
//! likelihood code passes the mean log-likelihood); the default gradient
//! tolerance is meaningful on that scale.

use crate::numeric::{golden_max, solve_dense};

/// Relative finite-difference step, near cbrt(machine epsilon): balances
/// truncation against roundoff for first and second differences.
const REL_STEP: f64 = 6.0e-6;

/// Below this gradient norm the quadratic model is trusted and full Newton
/// steps are accepted without a strict ascent check (ascent differences sit
/// at float resolution there).
const ENDGAME_GRAD: f64 = 1e-4;

#[derive(Debug, Clone)]
pub(crate) struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    fn clamp(&self, theta: &mut [f64]) {
        for j in 0..theta.len() {
            theta[j] = theta[j].clamp(self.lo[j], self.hi[j]);
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Maximized {
    pub theta: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Infinity norm of the projected gradient at exit.
    pub grad_norm: f64,
}

fn step_size(theta_j: f64) -> f64 {
    REL_STEP * theta_j.abs().max(1.0)
}

/// Central-difference gradient, degrading to a second-order one-sided
/// stencil against the active bound.
pub(crate) fn gradient(f: &dyn Fn(&[f64]) -> f64, theta: &[f64], bounds: &BoxBounds) -> Vec<f64> {
    let p = theta.len();
    let mut g = vec![0.0; p];
    let mut work = theta.to_vec();
    for j in 0..p {
        let h = step_size(theta[j]);
        let up_ok = theta[j] + h <= bounds.hi[j];
        let down_ok = theta[j] - h >= bounds.lo[j];
        g[j] = if up_ok && down_ok {
            work[j] = theta[j] + h;
            let fp = f(&work);
            work[j] = theta[j] - h;
            let fm = f(&work);
            work[j] = theta[j];
            (fp - fm) / (2.0 * h)
        } else if up_ok {
            let f0 = f(theta);
            work[j] = theta[j] + h;
            let f1 = f(&work);
            work[j] = (theta[j] + 2.0 * h).min(bounds.hi[j]);
            let h2 = work[j] - theta[j];
            let g_est = if h2 > 1.5 * h {
                let f2 = f(&work);
                (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
            } else {
                (f1 - f0) / h
            };
            work[j] = theta[j];
            g_est
        } else {
            let f0 = f(theta);
            work[j] = theta[j] - h;
            let f1 = f(&work);
            work[j] = (theta[j] - 2.0 * h).max(bounds.lo[j]);
            let h2 = theta[j] - work[j];
            let g_est = if h2 > 1.5 * h {
                let f2 = f(&work);
                (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h)
            } else {
                (f0 - f1) / h
            };
            work[j] = theta[j];
            g_est
        };
    }
    g
}

/// Second-difference Hessian. The stencil point is pulled far enough inside
/// the box that every evaluation stays feasible; curvature a few microsteps
/// from a bound is indistinguishable for stepping purposes.
pub(crate) fn hessian(f: &dyn Fn(&[f64]) -> f64, theta: &[f64], bounds: &BoxBounds) -> Vec<Vec<f64>> {
    let p = theta.len();
    let mut center = theta.to_vec();
    for j in 0..p {
        let h = step_size(theta[j]);
        center[j] = center[j].clamp(bounds.lo[j] + 2.0 * h, bounds.hi[j] - 2.0 * h);
        // Degenerate box narrower than the stencil: keep the midpoint.
        if bounds.hi[j] - bounds.lo[j] < 4.0 * h {
            center[j] = 0.5 * (bounds.lo[j] + bounds.hi[j]);
        }
    }
    let f0 = f(&center);
    let mut hmat = vec![vec![0.0; p]; p];
    let mut work = center.clone();
    for i in 0..p {
        let hi = step_size(center[i]);
        work[i] = center[i] + hi;
        let fp = f(&work);
        work[i] = center[i] - hi;
        let fm = f(&work);
        work[i] = center[i];
        hmat[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..p {
            let hj = step_size(center[j]);
            work[i] = center[i] + hi;
            work[j] = center[j] + hj;
            let fpp = f(&work);
            work[j] = center[j] - hj;
            let fpm = f(&work);
            work[i] = center[i] - hi;
            let fmm = f(&work);
            work[j] = center[j] + hj;
            let fmp = f(&work);
            work[i] = center[i];
            work[j] = center[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hmat[i][j] = v;
            hmat[j][i] = v;
        }
    }
    hmat
}

fn projected_grad_norm(g: &[f64], theta: &[f64], bounds: &BoxBounds) -> f64 {
    let mut norm = 0.0f64;
    for j in 0..g.len() {
        let at_lo = theta[j] <= bounds.lo[j] && g[j] < 0.0;
        let at_hi = theta[j] >= bounds.hi[j] && g[j] > 0.0;
        if !(at_lo || at_hi) {
            norm = norm.max(g[j].abs());
        }
    }
    norm
}

/// Maximizes `f` over the box from `theta0`.
///
/// Each iteration: numerical gradient, convergence test on the projected
/// gradient, Newton step from the numerical Hessian with backtracking, and
/// on failure one golden-section pass along each coordinate (window first,
/// then the full box). The best point ever seen is returned, so the result
/// never falls below the starting value.
pub(crate) fn maximize(
    f: &dyn Fn(&[f64]) -> f64,
    theta0: &[f64],
    bounds: &BoxBounds,
    max_iter: usize,
    grad_tol: f64,
) -> Maximized {
    let p = theta0.len();
    let mut theta = theta0.to_vec();
    bounds.clamp(&mut theta);
    let mut value = f(&theta);
    let mut best_theta = theta.clone();
    let mut best_value = value;
    let mut grad_norm;
    let mut stalls = 0usize;
    let mut used = 0usize;

    for iter in 1..=max_iter {
        used = iter;
        let g = gradient(f, &theta, bounds);
        grad_norm = projected_grad_norm(&g, &theta, bounds);
        if grad_norm < grad_tol {
            return Maximized {
                theta: best_theta,
                value: best_value,
                iterations: iter,
                converged: true,
                grad_norm,
            };
        }

        let hmat = hessian(f, &theta, bounds);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut moved = false;

        if let Some(dir) = solve_dense(&hmat, &neg_g) {
            // Backtracking line search along the Newton direction.
            let mut t = 1.0;
            for _ in 0..30 {
                let mut cand = theta.clone();
                for j in 0..p {
                    cand[j] += t * dir[j];
                }
                bounds.clamp(&mut cand);
                let fc = f(&cand);
                let accept = fc > value
                    || (grad_norm < ENDGAME_GRAD && t == 1.0 && fc >= value - 1e-12);
                if accept {
                    if fc > best_value {
                        best_value = fc;
                        best_theta = cand.clone();
                    }
                    theta = cand;
                    value = fc;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
        }

        if !moved {
            // Coordinate fallback: golden-section in a local window, then
            // over the whole box if the window finds nothing.
            for wide in [false, true] {
                for j in 0..p {
                    let (wl, wh) = if wide {
                        (bounds.lo[j], bounds.hi[j])
                    } else {
                        let w = 0.25 * theta[j].abs().max(1.0);
                        ((theta[j] - w).max(bounds.lo[j]), (theta[j] + w).min(bounds.hi[j]))
                    };
                    if wh - wl < 1e-14 {
                        continue;
                    }
                    let profile = |x: f64| {
                        let mut cand = theta.clone();
                        cand[j] = x;
                        f(&cand)
                    };
                    let xj = golden_max(&profile, wl, wh, 70);
                    let fx = profile(xj);
                    if fx > value {
                        theta[j] = xj;
                        value = fx;
                        moved = true;
                    }
                }
                if moved {
                    break;
                }
            }
            if moved && value > best_value {
                best_value = value;
                best_theta = theta.clone();
            }
        }

        if moved {
            stalls = 0;
        } else {
            // Neither Newton nor the coordinate sweeps can improve: we are
            // at the resolution limit. One more gradient pass decides.
            stalls += 1;
            if stalls >= 2 {
                break;
            }
        }
    }

    let g = gradient(f, &best_theta, bounds);
    grad_norm = projected_grad_norm(&g, &best_theta, bounds);
    Maximized {
        theta: best_theta,
        value: best_value,
        iterations: used,
        converged: grad_norm < grad_tol,
        grad_norm,
    }
}
