//! Shared helpers for the integration tests: an independent quadrature
//! oracle (composite Simpson, written from scratch so it shares no code
//! with the crate's internal integrator) and generators for random valid
//! models.

// Each test target compiles its own copy and uses a subset.
#![allow(dead_code)]

use plsurv::PiecewisePowerLaw;
use rand::Rng;

/// Composite Simpson on a fixed panel count (even), no adaptivity.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Integral of the model pdf over [lo, hi], split at the change points and
/// computed in log-time coordinates: with t = ln x the integrand becomes
/// f(e^t) e^t, which stays well scaled over wide supports.
pub fn integrate_pdf(model: &PiecewisePowerLaw, lo: f64, hi: f64, panels: usize) -> f64 {
    assert!(lo >= model.x_min() && hi > lo);
    let mut cuts = vec![lo];
    for &b in model.breaks() {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        // exp(ln x) can land an ulp outside the window, and the right edge is
        // a change point whose density belongs to the next segment; clamp to
        // keep every abscissa strictly inside this one.
        let g = |t: f64| {
            let x = t.exp().clamp(w[0], w[1].next_down());
            model.pdf(x).expect("x inside support") * x
        };
        total += simpson(&g, w[0].ln(), w[1].ln(), panels);
    }
    total
}

/// Integral of x^r times the pdf over [lo, hi], same scheme.
pub fn integrate_moment(
    model: &PiecewisePowerLaw,
    r: u32,
    lo: f64,
    hi: f64,
    panels: usize,
) -> f64 {
    let mut cuts = vec![lo];
    for &b in model.breaks() {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let g = |t: f64| {
            let x = t.exp().clamp(w[0], w[1].next_down());
            x.powi(r as i32) * model.pdf(x).expect("x inside support") * x
        };
        total += simpson(&g, w[0].ln(), w[1].ln(), panels);
    }
    total
}

/// A random valid model drawn from the given generator: 1 to 4 segments,
/// x_min in [0.2, 10], break ratios in [1.3, 8], exponents in [1.1, 9].
pub fn random_model(rng: &mut impl Rng) -> PiecewisePowerLaw {
    let k = rng.random_range(1..=4usize);
    let x_min = 0.2 + 9.8 * rng.random::<f64>();
    let mut breaks = Vec::with_capacity(k - 1);
    let mut edge = x_min;
    for _ in 0..k - 1 {
        edge *= 1.3 + 6.7 * rng.random::<f64>();
        breaks.push(edge);
    }
    let alphas = (0..k).map(|_| 1.1 + 7.9 * rng.random::<f64>()).collect();
    PiecewisePowerLaw::new(x_min, breaks, alphas).expect("generated parameters are valid")
}

/// Tail mass cutoff used when checking normalization by quadrature: the
/// integral runs to the u-quantile and the analytic survival covers the
/// rest.
pub fn normalization_gap(model: &PiecewisePowerLaw, panels: usize) -> f64 {
    let hi = model.quantile(1.0 - 1e-9).expect("valid probability");
    let mass = integrate_pdf(model, model.x_min(), hi, panels);
    let tail = model.survival(hi).expect("inside support");
    (mass + tail - 1.0).abs()
}
