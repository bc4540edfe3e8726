//! Maximum-likelihood estimation for piecewise power-law survival models
//! with right censoring and an optional cure fraction.
//!
//! Two estimation paths are provided:
//!
//! * closed-form estimators for fixed change points without a cure fraction
//!   (each exponent has an explicit solution of its likelihood equation),
//! * a numerical maximizer over `(alpha_1..alpha_k, pi)` for the cure
//!   model, Newton ascent with numerically differenced derivatives and a
//!   golden-section coordinate fallback.
//!
//! Censored observations sitting below `x_min` (possible under uniform
//! censoring) carry survival 1 and hence no likelihood information; the
//! fitting entry points truncate them up to `x_min` and report how many
//! were affected.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cure::LongTermModel;
use crate::distribution::PiecewisePowerLaw;
use crate::error::{Error, Result};
use crate::nonparam::SurvivalSample;
use crate::optimize::{self, BoxBounds};

/// Exponent search bounds for the numerical maximizer.
pub const ALPHA_LO: f64 = 1.0 + 1e-9;
pub const ALPHA_HI: f64 = 50.0;
/// Upper bound keeping the cure fraction away from the log-likelihood
/// singularity at 1.
pub const PI_HI: f64 = 1.0 - 1e-9;

// ---------------------------------------------------------------------------
// Sample preparation and per-segment sufficient statistics
// ---------------------------------------------------------------------------

/// Per-segment observation and event counts attached to a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentCounts {
    /// Observations (events and censorings) per segment.
    pub n: Vec<usize>,
    /// Events per segment.
    pub d: Vec<usize>,
    /// Censored observations found below `x_min` and truncated up to it.
    pub censored_below_xmin: usize,
}

/// Validates samples against the support bound: events below `x_min` are a
/// domain error, censored times below `x_min` are clamped to `x_min` (they
/// carry survival 1 and no information). Returns the cleaned samples and
/// the number clamped.
pub fn truncate_below_xmin(
    samples: &[SurvivalSample],
    x_min: f64,
) -> Result<(Vec<SurvivalSample>, usize)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("estimation needs at least one sample"));
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut clamped = 0usize;
    for s in samples {
        if !s.time.is_finite() || s.time <= 0.0 {
            return Err(Error::invalid(
                "samples",
                format!("observed time must be positive and finite, got {}", s.time),
            ));
        }
        if s.time < x_min {
            if s.event {
                return Err(Error::Domain(format!(
                    "event observed at {} below the support bound x_min = {x_min}",
                    s.time
                )));
            }
            clamped += 1;
            out.push(SurvivalSample { time: x_min, event: false });
        } else {
            out.push(*s);
        }
    }
    Ok((out, clamped))
}

/// Sufficient statistics of a sample under fixed `x_min` and breaks.
///
/// Event contributions enter the log-likelihood only through per-segment
/// counts and log-sums; censored observations keep an individual term
/// because the cure fraction makes their contribution nonlinear.
struct SegmentData {
    k: usize,
    n: Vec<usize>,
    d: Vec<usize>,
    /// Per segment: sum of ln(x/lower) over events in the segment.
    event_log_sum: Vec<f64>,
    /// Per segment: sum of ln(x/lower) over all observations in it.
    all_log_sum: Vec<f64>,
    /// Per censored observation: (segment index, ln(x/lower)).
    censored: Vec<(usize, f64)>,
    /// ln(upper/lower) per non-final segment.
    log_width: Vec<f64>,
    /// ln(lower boundary) per segment.
    log_lower: Vec<f64>,
    censored_below_xmin: usize,
}

impl SegmentData {
    fn new(samples: &[SurvivalSample], x_min: f64, breaks: &[f64]) -> Result<Self> {
        // Boundary validation is the distribution constructor's job.
        let probe = PiecewisePowerLaw::new(x_min, breaks.to_vec(), vec![2.0; breaks.len() + 1])?;
        let (clean, clamped) = truncate_below_xmin(samples, x_min)?;

        let k = breaks.len() + 1;
        let lower = |i: usize| if i == 0 { x_min } else { breaks[i - 1] };
        let mut data = SegmentData {
            k,
            n: vec![0; k],
            d: vec![0; k],
            event_log_sum: vec![0.0; k],
            all_log_sum: vec![0.0; k],
            censored: Vec::new(),
            log_width: (0..k - 1).map(|i| (breaks[i] / lower(i)).ln()).collect(),
            log_lower: (0..k).map(|i| lower(i).ln()).collect(),
            censored_below_xmin: clamped,
        };
        for s in &clean {
            let i = probe.segment_index(s.time);
            let term = (s.time / lower(i)).ln();
            data.n[i] += 1;
            data.all_log_sum[i] += term;
            if s.event {
                data.d[i] += 1;
                data.event_log_sum[i] += term;
            } else {
                data.censored.push((i, term));
            }
        }
        Ok(data)
    }

    fn counts(&self) -> SegmentCounts {
        SegmentCounts {
            n: self.n.clone(),
            d: self.d.clone(),
            censored_below_xmin: self.censored_below_xmin,
        }
    }

    fn total(&self) -> usize {
        self.n.iter().sum()
    }

    fn require_events_per_segment(&self) -> Result<()> {
        for (i, &d) in self.d.iter().enumerate() {
            if d == 0 {
                return Err(Error::Degenerate(format!(
                    "segment {} (of {}) contains no events; exponent not estimable",
                    i + 1,
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// Closed-form exponent estimates: alpha_j = 1 + d_j / W_j with
    /// W_j = sum of ln(x/lower_j) over segment-j observations plus
    /// (observations beyond segment j) * ln(upper_j/lower_j).
    fn closed_form(&self) -> Result<Vec<f64>> {
        self.require_events_per_segment()?;
        let mut beyond = vec![0usize; self.k];
        for j in (0..self.k - 1).rev() {
            beyond[j] = beyond[j + 1] + self.n[j + 1];
        }
        let mut alphas = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let w = self.all_log_sum[j]
                + if j < self.k - 1 {
                    beyond[j] as f64 * self.log_width[j]
                } else {
                    0.0
                };
            if w <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "segment {}: all observed mass sits at the segment boundary (weight {w})",
                    j + 1
                )));
            }
            alphas.push(1.0 + self.d[j] as f64 / w);
        }
        Ok(alphas)
    }

    /// Log-likelihood at `(alphas, pi)` from the cached statistics. Returns
    /// negative infinity outside the parameter domain, which the maximizer
    /// treats as a rejected step.
    fn loglik(&self, alphas: &[f64], pi: f64) -> f64 {
        if !(0.0..1.0).contains(&pi) || alphas.iter().any(|&a| a <= 1.0) {
            return f64::NEG_INFINITY;
        }
        // Continuity constants in log space.
        let mut log_c = vec![0.0; self.k];
        for j in 1..self.k {
            log_c[j] = log_c[j - 1] + (1.0 - alphas[j - 1]) * self.log_width[j - 1];
        }
        let log_sus = (1.0 - pi).ln();
        let mut total = 0.0;
        for j in 0..self.k {
            if self.d[j] > 0 {
                total += self.d[j] as f64
                    * (log_sus + log_c[j] + (alphas[j] - 1.0).ln() - self.log_lower[j])
                    - alphas[j] * self.event_log_sum[j];
            }
        }
        for &(j, term) in &self.censored {
            let log_s0 = log_c[j] + (1.0 - alphas[j]) * term;
            total += if pi == 0.0 {
                log_s0
            } else {
                (pi + (1.0 - pi) * log_s0.exp()).ln()
            };
        }
        total
    }
}

// ---------------------------------------------------------------------------
// Closed-form estimators and Fisher intervals
// ---------------------------------------------------------------------------

/// Closed-form censored MLEs for the two-segment model with the change
/// point fixed at `x_c`:
///
/// ```text
/// alpha_1 = 1 + d_1 / (sum_{x_i < x_c} ln(x_i/x_min) + n_2 ln(x_c/x_min))
/// alpha_2 = 1 + d_2 / sum_{x_i >= x_c} ln(x_i/x_c)
/// ```
///
/// where `d_j` counts events per segment and `n_2` counts all observations
/// at or beyond `x_c`. Complete data is the all-events special case.
pub fn mle_closed_form(
    samples: &[SurvivalSample],
    x_min: f64,
    x_c: f64,
) -> Result<(f64, f64, SegmentCounts)> {
    let fit = mle_closed_form_k(samples, x_min, &[x_c])?;
    Ok((fit.0[0], fit.0[1], fit.1))
}

/// Closed-form censored MLEs for any number of fixed change points; the
/// per-segment likelihood equations solve independently.
pub fn mle_closed_form_k(
    samples: &[SurvivalSample],
    x_min: f64,
    breaks: &[f64],
) -> Result<(Vec<f64>, SegmentCounts)> {
    let data = SegmentData::new(samples, x_min, breaks)?;
    let alphas = data.closed_form()?;
    Ok((alphas, data.counts()))
}

/// Fisher-information confidence interval for one exponent estimated from
/// `d` events: `alpha_hat +/- z_{(1+level)/2} (alpha_hat - 1)/sqrt(d)`.
/// The information matrix is diagonal, so intervals for different segments
/// are independent.
pub fn fisher_ci(alpha_hat: f64, d: usize, level: f64) -> Result<(f64, f64)> {
    if !alpha_hat.is_finite() || alpha_hat <= 1.0 {
        return Err(Error::invalid(
            "alpha_hat",
            format!("exponent must exceed 1, got {alpha_hat}"),
        ));
    }
    if d == 0 {
        return Err(Error::Degenerate(
            "confidence interval undefined with zero events".into(),
        ));
    }
    if !level.is_finite() || !(0.0..1.0).contains(&level) {
        return Err(Error::invalid(
            "level",
            format!("confidence level must lie in [0, 1), got {level}"),
        ));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 * (1.0 + level));
    let half = z * (alpha_hat - 1.0) / (d as f64).sqrt();
    Ok((alpha_hat - half, alpha_hat + half))
}

/// Normal-approximation interval `estimate +/- z_{(1+level)/2} se` for any
/// estimate with a standard error (cure fractions, survival bands).
pub fn wald_ci(estimate: f64, std_error: f64, level: f64) -> Result<(f64, f64)> {
    if !estimate.is_finite() {
        return Err(Error::invalid(
            "estimate",
            format!("estimate must be finite, got {estimate}"),
        ));
    }
    if !std_error.is_finite() || std_error < 0.0 {
        return Err(Error::invalid(
            "std_error",
            format!("standard error must be nonnegative, got {std_error}"),
        ));
    }
    if !level.is_finite() || !(0.0..1.0).contains(&level) {
        return Err(Error::invalid(
            "level",
            format!("confidence level must lie in [0, 1), got {level}"),
        ));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 * (1.0 + level));
    Ok((estimate - z * std_error, estimate + z * std_error))
}

/// Censored log-likelihood of a cure model:
/// `sum delta_i ln f_pop(x_i) + (1 - delta_i) ln S_pop(x_i)`, evaluated in
/// log space. Every sample time must lie at or above the model's `x_min`.
pub fn loglik(model: &LongTermModel, samples: &[SurvivalSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("loglik needs at least one sample"));
    }
    let mut total = 0.0;
    for s in samples {
        total += if s.event {
            model.log_pdf_pop(s.time)?
        } else {
            model.log_survival_pop(s.time)?
        };
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

/// Outcome of a maximum-likelihood fit (closed-form or numerical).
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Fitted model; `pi = 0` encodes a no-cure fit.
    pub model: LongTermModel,
    /// Observations per segment.
    pub segment_n: Vec<usize>,
    /// Events per segment.
    pub segment_d: Vec<usize>,
    /// Per-exponent standard errors: observed information for cure fits
    /// with an interior cure fraction, the closed Fisher form
    /// `(alpha-1)/sqrt(d)` otherwise.
    pub std_errors: Vec<f64>,
    /// Standard error of the cure fraction when the observed information
    /// is available; absent for no-cure fits and boundary estimates.
    pub pi_std_error: Option<f64>,
    /// Maximized log-likelihood.
    pub loglik: f64,
    /// `2 n_params - 2 loglik`; kept in lockstep with `n_params`.
    pub aic: f64,
    /// Free parameters counted for AIC: one per exponent, plus the cure
    /// fraction when it was fitted, plus one per change point when the
    /// breaks were estimated by grid search (default counting convention).
    pub n_params: usize,
    /// Whether the maximizer met its gradient tolerance (closed-form fits
    /// report true).
    pub converged: bool,
    /// Iterations used by the numerical maximizer (0 for closed form).
    pub iterations: usize,
    /// Censored observations truncated up to `x_min` before fitting.
    pub censored_below_xmin: usize,
}

impl FitResult {
    /// Replaces the AIC parameter count (used when searched change points
    /// are added to, or excluded from, the count) and refreshes `aic`.
    pub fn with_n_params(mut self, n_params: usize) -> Self {
        self.n_params = n_params;
        self.aic = 2.0 * n_params as f64 - 2.0 * self.loglik;
        self
    }
}

/// Starting point for the numerical maximizer.
#[derive(Debug, Clone)]
pub struct FitInit {
    pub alphas: Vec<f64>,
    pub pi: f64,
}

/// Configuration of [`mle_fit`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Fit the cure fraction (true) or pin it at zero.
    pub cure: bool,
    /// Starting point; defaults to the closed-form exponents with
    /// `pi_0 = censoring rate / 2`.
    pub init: Option<FitInit>,
    /// Iteration cap for the maximizer.
    pub max_iterations: usize,
    /// Convergence tolerance on the projected gradient of the mean
    /// log-likelihood (per-observation scale).
    pub grad_tol: f64,
    /// Whether grid-searched change points are counted as AIC parameters.
    pub count_searched_breaks: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            cure: true,
            init: None,
            max_iterations: 500,
            grad_tol: 1e-8,
            count_searched_breaks: true,
        }
    }
}

/// Numerical MLE of the cure model with fixed change points; maximizes over
/// `(alpha_1..alpha_k, pi)`. See [`mle_fit`] for the knobs.
pub fn mle_cure(
    samples: &[SurvivalSample],
    x_min: f64,
    breaks: &[f64],
    init: Option<FitInit>,
) -> Result<FitResult> {
    mle_fit(
        samples,
        x_min,
        breaks,
        &FitOptions { init, ..FitOptions::default() },
    )
}

/// Numerical maximum-likelihood fit with fixed change points.
///
/// Exponents are searched on `(1, 50]` and the cure fraction on
/// `[0, 1 - 1e-9]`; the objective is the mean log-likelihood, so the
/// gradient tolerance is per observation. Non-convergence raises
/// [`Error::NoConvergence`] carrying the best iterate found. Deterministic
/// given data and init.
pub fn mle_fit(
    samples: &[SurvivalSample],
    x_min: f64,
    breaks: &[f64],
    options: &FitOptions,
) -> Result<FitResult> {
    let data = SegmentData::new(samples, x_min, breaks)?;
    data.require_events_per_segment()?;
    let k = data.k;
    let n_total = data.total() as f64;
    let cure = options.cure;

    let mut theta0 = match &options.init {
        Some(init) => {
            if init.alphas.len() != k {
                return Err(Error::invalid(
                    "init",
                    format!("expected {k} starting exponents, got {}", init.alphas.len()),
                ));
            }
            if init.alphas.iter().any(|a| !a.is_finite() || *a <= 1.0 || *a > ALPHA_HI) {
                return Err(Error::invalid(
                    "init",
                    format!("starting exponents must lie in (1, {ALPHA_HI}]"),
                ));
            }
            if !init.pi.is_finite() || !(0.0..=PI_HI).contains(&init.pi) {
                return Err(Error::invalid(
                    "init",
                    format!("starting cure fraction must lie in [0, {PI_HI}], got {}", init.pi),
                ));
            }
            let mut t = init.alphas.clone();
            t.push(if cure { init.pi } else { 0.0 });
            t
        }
        None => {
            let mut t: Vec<f64> = data
                .closed_form()?
                .into_iter()
                .map(|a| a.clamp(1.0 + 1e-6, ALPHA_HI))
                .collect();
            let censored_frac = data.censored.len() as f64 / n_total;
            t.push(if cure { 0.5 * censored_frac } else { 0.0 });
            t
        }
    };

    if !cure {
        theta0.truncate(k);
    }

    let bounds = BoxBounds {
        lo: {
            let mut lo = vec![ALPHA_LO; k];
            if cure {
                lo.push(0.0);
            }
            lo
        },
        hi: {
            let mut hi = vec![ALPHA_HI; k];
            if cure {
                hi.push(PI_HI);
            }
            hi
        },
    };

    let objective = |theta: &[f64]| {
        let pi = if cure { theta[k] } else { 0.0 };
        data.loglik(&theta[..k], pi) / n_total
    };

    let out = optimize::maximize(&objective, &theta0, &bounds, options.max_iterations, options.grad_tol);

    let alphas = out.theta[..k].to_vec();
    let pi = if cure { out.theta[k] } else { 0.0 };
    let total_loglik = data.loglik(&alphas, pi);
    debug_assert!(
        (out.value * n_total - total_loglik).abs() <= 1e-7 * (1.0 + total_loglik.abs()),
        "maximizer value and direct evaluation disagree"
    );

    let (std_errors, pi_std_error) =
        standard_errors(&data, &alphas, pi, cure, &bounds);

    let base = PiecewisePowerLaw::new(x_min, breaks.to_vec(), alphas)?;
    let model = LongTermModel::new(pi, base)?;
    let n_params = k + usize::from(cure);
    let fit = FitResult {
        model,
        segment_n: data.n.clone(),
        segment_d: data.d.clone(),
        std_errors,
        pi_std_error,
        loglik: total_loglik,
        aic: 2.0 * n_params as f64 - 2.0 * total_loglik,
        n_params,
        converged: out.converged,
        iterations: out.iterations,
        censored_below_xmin: data.censored_below_xmin,
    };

    if !out.converged {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            grad_norm: out.grad_norm,
            best: Box::new(fit),
        });
    }
    Ok(fit)
}

/// Standard errors at the optimum. Cure fits with an interior cure fraction
/// invert the observed information (numerical Hessian of the total
/// log-likelihood); everything else uses the per-segment Fisher form.
fn standard_errors(
    data: &SegmentData,
    alphas: &[f64],
    pi: f64,
    cure: bool,
    bounds: &BoxBounds,
) -> (Vec<f64>, Option<f64>) {
    let k = data.k;
    let fisher: Vec<f64> = (0..k)
        .map(|j| (alphas[j] - 1.0) / (data.d[j] as f64).sqrt())
        .collect();

    if !cure || pi <= 1e-9 || pi >= PI_HI - 1e-9 {
        return (fisher, None);
    }

    let objective = |theta: &[f64]| data.loglik(&theta[..k], theta[k]);
    let mut theta = alphas.to_vec();
    theta.push(pi);
    let h = optimize::hessian(&objective, &theta, bounds);
    let p = k + 1;
    let neg: Vec<Vec<f64>> = h.iter().map(|row| row.iter().map(|v| -v).collect()).collect();

    // Invert -H column by column; reject non positive-definite outcomes.
    let mut diag = Vec::with_capacity(p);
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        match crate::numeric::solve_dense(&neg, &e) {
            Some(col) if col[j] > 0.0 && col[j].is_finite() => diag.push(col[j].sqrt()),
            _ => return (fisher, None),
        }
    }
    let pi_se = diag.pop();
    (diag, pi_se)
}

// ---------------------------------------------------------------------------
// Residual diagnostics
// ---------------------------------------------------------------------------

/// One Cox-Snell residual: `-ln S_pop(x_i)` with the censoring flag carried
/// through. Under a correct model these behave as censored unit-exponential
/// data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoxSnellResidual {
    pub value: f64,
    pub event: bool,
}

/// Cox-Snell residuals of a fit on the given samples.
pub fn cox_snell(fit: &FitResult, samples: &[SurvivalSample]) -> Result<Vec<CoxSnellResidual>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("cox_snell needs at least one sample"));
    }
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let ls = fit.model.log_survival_pop(s.time)?;
        if ls == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "fitted survival underflows to zero at x = {}; residual infinite",
                s.time
            )));
        }
        out.push(CoxSnellResidual { value: -ls, event: s.event });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
