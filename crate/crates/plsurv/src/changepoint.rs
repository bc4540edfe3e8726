//! Change-point estimation by grid search.
//!
//! Candidate break locations come from a user grid; each admissible
//! combination (ascending breaks with at least [`MIN_EVENTS_PER_SEGMENT`]
//! events per segment) is fitted by maximum likelihood and scored by the
//! supremum distance between the fitted population survival and the
//! Kaplan-Meier curve at observed event times. The classical
//! Kolmogorov-Smirnov statistic assumes complete data, so the KM curve
//! stands in as the nonparametric reference under censoring.
//!
//! One and two change points are searched exhaustively. For three or more
//! the search is greedy-sequential: each round keeps the breaks found so
//! far and scans the grid for the single best addition. Candidate fits are
//! independent, so rounds evaluate them in parallel; scores are collected
//! in grid order and reduced sequentially, which keeps the selection
//! identical to a serial scan (ties go to the smallest break values).

use rayon::prelude::*;

use crate::cure::LongTermModel;
use crate::distribution::PiecewisePowerLaw;
use crate::error::{Error, Result};
use crate::estimation::{loglik, mle_fit, truncate_below_xmin, FitOptions, FitResult};
use crate::nonparam::{km_fit, KmCurve, SurvivalSample};

/// Minimum number of events a candidate segment must contain.
pub const MIN_EVENTS_PER_SEGMENT: usize = 3;

/// Local refinement window and step for exponents.
const REFINE_ALPHA_RANGE: f64 = 0.10;
const REFINE_ALPHA_STEP: f64 = 0.01;
/// Local refinement window and step for the cure fraction.
const REFINE_PI_RANGE: f64 = 0.05;
const REFINE_PI_STEP: f64 = 0.005;
const REFINE_PASSES: usize = 2;

/// Knobs for [`estimate_changepoints`].
#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Passed through to every candidate fit (cure on/off, iteration caps,
    /// AIC counting convention for the searched breaks).
    pub fit: FitOptions,
    /// Run the local sup-distance refinement on the winning fit.
    pub refine: bool,
}

/// Supremum of |S_pop(t) - KM(t)| over the curve's event times, evaluating
/// both the fitted survival and the KM step function at each step location
/// (right-continuous, so at the post-drop value).
pub fn sup_distance_to_km(model: &LongTermModel, km: &KmCurve) -> Result<f64> {
    let mut sup = 0.0f64;
    for (i, &t) in km.times.iter().enumerate() {
        let fitted = model.survival_pop(t)?;
        let gap = (fitted - km.survival[i]).abs();
        if gap > sup {
            sup = gap;
        }
    }
    Ok(sup)
}

/// Grid search for `k - 1` change points; returns the admissible fit whose
/// population survival stays closest (in sup distance at event times) to
/// the Kaplan-Meier curve.
///
/// Grid values must be ascending and lie above `x_min`. Candidates whose
/// fit fails (degenerate segment, non-convergence) are dropped from the
/// ranking; an empty admissible set, or one where every candidate fails,
/// is a search error. When the fit options count searched breaks as AIC
/// parameters (the default), `n_params` grows by `k - 1`.
pub fn estimate_changepoints(
    samples: &[SurvivalSample],
    x_min: f64,
    k: usize,
    grid: &[f64],
    options: &SearchOptions,
) -> Result<FitResult> {
    if k < 2 {
        return Err(Error::invalid(
            "k",
            format!("change-point search needs at least 2 segments, got {k}"),
        ));
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("change-point grid is empty"));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(
                "grid",
                format!("grid must be strictly ascending, got {} then {}", w[0], w[1]),
            ));
        }
    }
    if !grid[0].is_finite() || grid[0] <= x_min || !grid[grid.len() - 1].is_finite() {
        return Err(Error::invalid(
            "grid",
            format!("grid values must be finite and exceed x_min = {x_min}"),
        ));
    }

    let (clean, _) = truncate_below_xmin(samples, x_min)?;
    let km = km_fit(&clean)?;
    let mut event_times: Vec<f64> = clean
        .iter()
        .filter(|s| s.event)
        .map(|s| s.time)
        .collect();
    event_times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    if event_times.len() < MIN_EVENTS_PER_SEGMENT * k {
        return Err(Error::Search(format!(
            "{} events cannot populate {k} segments with {MIN_EVENTS_PER_SEGMENT} each",
            event_times.len()
        )));
    }

    let admissible = |breaks: &[f64]| -> bool {
        let mut prev = 0usize;
        for &b in breaks {
            let at = event_times.partition_point(|&t| t < b);
            if at - prev < MIN_EVENTS_PER_SEGMENT {
                return false;
            }
            prev = at;
        }
        event_times.len() - prev >= MIN_EVENTS_PER_SEGMENT
    };

    let winner = if k - 1 <= 2 {
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if k - 1 == 1 {
            for &b in grid {
                candidates.push(vec![b]);
            }
        } else {
            for (i, &b1) in grid.iter().enumerate() {
                for &b2 in &grid[i + 1..] {
                    candidates.push(vec![b1, b2]);
                }
            }
        }
        candidates.retain(|c| admissible(c));
        if candidates.is_empty() {
            return Err(Error::Search(format!(
                "no grid combination leaves {MIN_EVENTS_PER_SEGMENT} events in every segment"
            )));
        }
        best_fit(&clean, x_min, &candidates, &km, &options.fit)?
    } else {
        // Greedy-sequential: add one break per round, keeping the rest.
        let mut breaks: Vec<f64> = Vec::new();
        let mut current: Option<(FitResult, f64)> = None;
        for _ in 0..k - 1 {
            let mut candidates: Vec<Vec<f64>> = Vec::new();
            for &b in grid {
                if breaks.iter().any(|&x| x == b) {
                    continue;
                }
                let mut c = breaks.clone();
                c.push(b);
                c.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
                if admissible(&c) {
                    candidates.push(c);
                }
            }
            if candidates.is_empty() {
                return Err(Error::Search(format!(
                    "greedy round {} found no admissible break to add",
                    breaks.len() + 1
                )));
            }
            let (fit, score) = best_fit(&clean, x_min, &candidates, &km, &options.fit)?;
            breaks = fit.model.base().breaks().to_vec();
            current = Some((fit, score));
        }
        current.expect("k >= 2 runs at least one round")
    };

    let (mut fit, _) = winner;
    if options.refine {
        fit = refine_fit(&fit, &clean, &km)?;
    }
    if options.fit.count_searched_breaks {
        let n_params = fit.n_params + (k - 1);
        fit = fit.with_n_params(n_params);
    }
    Ok(fit)
}

/// Fits every candidate break vector and returns the sup-distance winner.
/// Candidates are scored in parallel but reduced in input order with a
/// strict comparison, so the first (lexicographically smallest) candidate
/// wins ties.
fn best_fit(
    clean: &[SurvivalSample],
    x_min: f64,
    candidates: &[Vec<f64>],
    km: &KmCurve,
    fit_options: &FitOptions,
) -> Result<(FitResult, f64)> {
    let scored: Vec<Option<(FitResult, f64)>> = candidates
        .par_iter()
        .map(|breaks| {
            let fit = mle_fit(clean, x_min, breaks, fit_options).ok()?;
            let score = sup_distance_to_km(&fit.model, km).ok()?;
            Some((fit, score))
        })
        .collect();

    let mut best: Option<(FitResult, f64)> = None;
    for entry in scored.into_iter().flatten() {
        match &best {
            Some((_, s)) if entry.1 >= *s => {}
            _ => best = Some(entry),
        }
    }
    best.ok_or_else(|| {
        Error::Search("every admissible candidate failed to fit".into())
    })
}

/// Local refinement of a fitted model: coordinate sweeps over each
/// exponent (window 0.10, step 0.01) and, when the fit carries a cure
/// fraction, over it too (window 0.05, step 0.005), minimizing the sup
/// distance to the KM curve. Two passes. The refined parameters are no
/// longer likelihood-maximal, so the log-likelihood and AIC are
/// re-evaluated at the new point; standard errors keep the per-segment
/// Fisher form at the refined exponents.
pub fn refine_fit(
    fit: &FitResult,
    samples: &[SurvivalSample],
    km: &KmCurve,
) -> Result<FitResult> {
    let x_min = fit.model.base().x_min();
    let breaks = fit.model.base().breaks().to_vec();
    let mut alphas = fit.model.base().alphas().to_vec();
    let mut pi = fit.model.pi();
    let sweep_pi = pi > 0.0;

    let score_of = |alphas: &[f64], pi: f64| -> Result<f64> {
        let base = PiecewisePowerLaw::new(x_min, breaks.clone(), alphas.to_vec())?;
        let model = LongTermModel::new(pi, base)?;
        sup_distance_to_km(&model, km)
    };
    let mut best = score_of(&alphas, pi)?;

    for _ in 0..REFINE_PASSES {
        for j in 0..alphas.len() {
            let center = alphas[j];
            let mut step = -REFINE_ALPHA_RANGE;
            while step <= REFINE_ALPHA_RANGE + 1e-12 {
                let cand = (center + step).clamp(1.0 + 1e-9, 50.0);
                step += REFINE_ALPHA_STEP;
                let mut trial = alphas.clone();
                trial[j] = cand;
                if let Ok(s) = score_of(&trial, pi) {
                    if s < best {
                        best = s;
                        alphas[j] = cand;
                    }
                }
            }
        }
        if sweep_pi {
            let center = pi;
            let mut step = -REFINE_PI_RANGE;
            while step <= REFINE_PI_RANGE + 1e-12 {
                let cand = (center + step).clamp(0.0, 1.0 - 1e-9);
                step += REFINE_PI_STEP;
                if let Ok(s) = score_of(&alphas, cand) {
                    if s < best {
                        best = s;
                        pi = cand;
                    }
                }
            }
        }
    }

    let base = PiecewisePowerLaw::new(x_min, breaks, alphas.clone())?;
    let model = LongTermModel::new(pi, base)?;
    let ll = loglik(&model, samples)?;
    let std_errors = alphas
        .iter()
        .zip(&fit.segment_d)
        .map(|(a, &d)| (a - 1.0) / (d as f64).sqrt())
        .collect();
    Ok(FitResult {
        model,
        segment_n: fit.segment_n.clone(),
        segment_d: fit.segment_d.clone(),
        std_errors,
        pi_std_error: None,
        loglik: ll,
        aic: 2.0 * fit.n_params as f64 - 2.0 * ll,
        n_params: fit.n_params,
        converged: fit.converged,
        iterations: fit.iterations,
        censored_below_xmin: fit.censored_below_xmin,
    })
}
