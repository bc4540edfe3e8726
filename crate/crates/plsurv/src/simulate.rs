//! Sample generation, censoring injection, and the Monte Carlo
//! estimator-quality study (bias, RMSE, confidence-interval coverage as
//! functions of sample size).
//!
//! All randomness flows from explicit seeds through ChaCha8, so every
//! output is reproducible bit for bit across runs, platforms, and thread
//! counts. Replication r of sample size slot s uses the child seed
//! `child_seed(master, s, r)`, so any single replication can be re-run in
//! isolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cure::LongTermModel;
use crate::distribution::PiecewisePowerLaw;
use crate::error::{Error, Result};
use crate::estimation::{fisher_ci, mle_closed_form_k, mle_cure};
use crate::nonparam::SurvivalSample;
use crate::numeric::{adaptive_simpson, child_seed, pairwise_sum};

/// Proportion tolerance met by [`calibrate_ymax`].
pub const CALIBRATION_TOL: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Draws `n` lifetimes by quantile inversion of uniform variates from a
/// ChaCha8 stream seeded with `seed`.
pub fn sample(model: &PiecewisePowerLaw, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput("sample needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(model, n, &mut rng))
}

pub(crate) fn sample_with(model: &PiecewisePowerLaw, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            model.quantile(u).expect("uniform draw lies in [0, 1)")
        })
        .collect()
}

/// Draws `n` observations from a cure population observed up to `horizon`:
/// with probability `pi` the unit never fails and is censored at the
/// horizon; otherwise its lifetime comes from the base model and is
/// censored at the horizon only if it outlives it. Each unit spends one
/// uniform draw on the cure decision, susceptible units a second on the
/// lifetime.
pub fn sample_cure(
    model: &LongTermModel,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<SurvivalSample>> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_cure needs n >= 1"));
    }
    if !horizon.is_finite() || horizon <= model.base().x_min() {
        return Err(Error::invalid(
            "horizon",
            format!(
                "observation horizon must exceed x_min = {}, got {horizon}",
                model.base().x_min()
            ),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = model.pi();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // With pi = 0 no cure draw is spent, so the stream (and output)
        // coincides with plain sampling truncated at the horizon.
        let cured = pi > 0.0 && rng.random::<f64>() < pi;
        if cured {
            out.push(SurvivalSample { time: horizon, event: false });
            continue;
        }
        let x = model
            .base()
            .quantile(rng.random())
            .expect("uniform draw lies in [0, 1)");
        out.push(if x > horizon {
            SurvivalSample { time: horizon, event: false }
        } else {
            SurvivalSample { time: x, event: true }
        });
    }
    Ok(out)
}

/// Censors each lifetime at an independent Uniform(0, y_max] draw: the
/// observed time is `min(x, y)` with an event flag when the lifetime won.
/// The uniform is taken on the half-open interval excluding zero so
/// observed times stay positive.
pub fn apply_censoring(times: &[f64], y_max: f64, seed: u64) -> Result<Vec<SurvivalSample>> {
    if times.is_empty() {
        return Err(Error::EmptyInput("apply_censoring needs at least one time"));
    }
    if !y_max.is_finite() || y_max <= 0.0 {
        return Err(Error::invalid(
            "y_max",
            format!("censoring bound must be positive and finite, got {y_max}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(censor_with(times, y_max, &mut rng))
}

pub(crate) fn censor_with(times: &[f64], y_max: f64, rng: &mut impl Rng) -> Vec<SurvivalSample> {
    times
        .iter()
        .map(|&x| {
            let y = (1.0 - rng.random::<f64>()) * y_max;
            if x <= y {
                SurvivalSample { time: x, event: true }
            } else {
                SurvivalSample { time: y, event: false }
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Censoring calibration
// ---------------------------------------------------------------------------

/// Probability that a Uniform(0, y_max) censoring time undercuts a
/// lifetime from the model: `E[min(X, y_max)] / y_max`, with the partial
/// expectation integrated by adaptive quadrature segment by segment.
pub fn expected_censoring(model: &PiecewisePowerLaw, y_max: f64) -> Result<f64> {
    if !y_max.is_finite() || y_max <= 0.0 {
        return Err(Error::invalid(
            "y_max",
            format!("censoring bound must be positive and finite, got {y_max}"),
        ));
    }
    let x_min = model.x_min();
    if y_max <= x_min {
        // Every lifetime exceeds the bound, so censoring always wins.
        return Ok(1.0);
    }
    let mut cuts = vec![x_min];
    for &b in model.breaks() {
        if b < y_max {
            cuts.push(b);
        }
    }
    cuts.push(y_max);
    let mut partial = 0.0;
    for w in cuts.windows(2) {
        let f = |x: f64| x * model.pdf(x).expect("x inside the support");
        partial += adaptive_simpson(&f, w[0], w[1], 1e-11);
    }
    let e_min = partial + y_max * model.survival(y_max)?;
    Ok(e_min / y_max)
}

/// Finds the censoring bound whose expected censoring proportion matches
/// `target` within [`CALIBRATION_TOL`], by bisection on the monotone map
/// [`expected_censoring`]. Deterministic.
pub fn calibrate_ymax(model: &PiecewisePowerLaw, target: f64) -> Result<f64> {
    if !target.is_finite() || !(0.0..1.0).contains(&target) || target == 0.0 {
        return Err(Error::invalid(
            "target",
            format!("target censoring proportion must lie in (0, 1), got {target}"),
        ));
    }
    // Below x_min the proportion is exactly 1; expand upward until the
    // target is bracketed.
    let mut lo = model.x_min();
    let mut hi = 2.0 * model.x_min().max(1.0);
    let mut p_hi = expected_censoring(model, hi)?;
    let mut guard = 0;
    while p_hi > target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 80 {
            return Err(Error::Calibration(format!(
                "target proportion {target} not reached below y_max = {hi:.3e}"
            )));
        }
        p_hi = expected_censoring(model, hi)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = expected_censoring(model, mid)?;
        if (p - target).abs() <= CALIBRATION_TOL {
            return Ok(mid);
        }
        if p > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "bisection failed to localize the target proportion {target}"
    )))
}

// ---------------------------------------------------------------------------
// Monte Carlo study
// ---------------------------------------------------------------------------

fn default_seed() -> u64 {
    1234
}

fn default_level() -> f64 {
    0.95
}

/// Configuration of [`mc_study`], readable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub x_min: f64,
    pub breaks: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Cure fraction of the generating model; when present and positive
    /// the study fits the cure model instead of the closed forms.
    #[serde(default)]
    pub pi: Option<f64>,
    /// Sample sizes, one report row group per entry.
    pub n: Vec<usize>,
    /// Replications per sample size.
    pub replications: usize,
    /// Target censoring proportion; zero means complete data.
    pub censoring: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
}

impl McConfig {
    fn validate(&self) -> Result<PiecewisePowerLaw> {
        let model =
            PiecewisePowerLaw::new(self.x_min, self.breaks.clone(), self.alphas.clone())?;
        if self.n.is_empty() {
            return Err(Error::EmptyInput("sample-size list is empty"));
        }
        if let Some(&bad) = self.n.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(
                "n",
                format!("each sample size must be at least 2, got {bad}"),
            ));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "need at least 1"));
        }
        if !self.censoring.is_finite() || !(0.0..1.0).contains(&self.censoring) {
            return Err(Error::invalid(
                "censoring",
                format!("censoring proportion must lie in [0, 1), got {}", self.censoring),
            ));
        }
        if let Some(pi) = self.pi {
            if !pi.is_finite() || !(0.0..1.0).contains(&pi) {
                return Err(Error::invalid(
                    "pi",
                    format!("cure fraction must lie in [0, 1), got {pi}"),
                ));
            }
            if pi > 0.0 && self.censoring == 0.0 {
                return Err(Error::invalid(
                    "censoring",
                    "a positive cure fraction needs censoring, otherwise cured \
                     units are never observed",
                ));
            }
        }
        if !self.level.is_finite() || !(0.0..1.0).contains(&self.level) {
            return Err(Error::invalid(
                "level",
                format!("confidence level must lie in [0, 1), got {}", self.level),
            ));
        }
        Ok(model)
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.alphas.len())
            .map(|j| format!("alpha_{j}"))
            .collect();
        if self.pi.unwrap_or(0.0) > 0.0 {
            names.push("pi".into());
        }
        names
    }

    fn truths(&self) -> Vec<f64> {
        let mut t = self.alphas.clone();
        if let Some(pi) = self.pi {
            if pi > 0.0 {
                t.push(pi);
            }
        }
        t
    }
}

/// One (parameter, sample size) row of the study report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCell {
    pub parameter: String,
    pub n: usize,
    pub bias: f64,
    pub rmse: f64,
    /// Monte Carlo standard error of the RMSE estimate (delta method);
    /// quantifies how much of a change between adjacent n is noise.
    pub rmse_mc_se: f64,
    pub coverage: f64,
    /// Replications excluded from this row (degenerate fits, and for the
    /// cure fraction also fits without an information-based interval).
    pub dropped: usize,
}

/// Full study output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub cells: Vec<McCell>,
    /// Calibrated censoring bound, when censoring was requested.
    pub y_max: Option<f64>,
}

impl McReport {
    /// Flat table with one row per (parameter, n).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,n,bias,rmse,coverage,dropped\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.parameter, c.n, c.bias, c.rmse, c.coverage, c.dropped
            ));
        }
        out
    }
}

/// Per-parameter outcome of one replication: point estimate and interval,
/// or nothing when this parameter could not be assessed.
type RepEstimates = Vec<Option<(f64, f64, f64)>>;

/// Runs the bias/RMSE/coverage study: for every sample size, `replications`
/// rounds of generate, censor, fit, interval. Replications run in parallel
/// but are collected in replication order and reduced with pairwise sums,
/// so the report does not depend on thread count.
pub fn mc_study(config: &McConfig) -> Result<McReport> {
    let model = config.validate()?;
    let pi = config.pi.unwrap_or(0.0);
    let level = config.level;
    let fit_cure = pi > 0.0;
    let x_min = config.x_min;
    let breaks = config.breaks.clone();
    let estimator = move |samples: &[SurvivalSample]| -> Option<RepEstimates> {
        if fit_cure {
            let fit = mle_cure(samples, x_min, &breaks, None).ok()?;
            let alphas = fit.model.base().alphas();
            let mut out: RepEstimates = Vec::with_capacity(alphas.len() + 1);
            for (j, &a) in alphas.iter().enumerate() {
                let ci = fisher_ci(a, fit.segment_d[j], level).ok()?;
                out.push(Some((a, ci.0, ci.1)));
            }
            let z = Normal::new(0.0, 1.0)
                .expect("standard normal")
                .inverse_cdf(0.5 * (1.0 + level));
            out.push(fit.pi_std_error.map(|se| {
                let p = fit.model.pi();
                (p, (p - z * se).max(0.0), (p + z * se).min(1.0))
            }));
            Some(out)
        } else {
            let (alphas, counts) = mle_closed_form_k(samples, x_min, &breaks).ok()?;
            let mut out: RepEstimates = Vec::with_capacity(alphas.len());
            for (j, &a) in alphas.iter().enumerate() {
                let ci = fisher_ci(a, counts.d[j], level).ok()?;
                out.push(Some((a, ci.0, ci.1)));
            }
            Some(out)
        }
    };
    mc_study_with(config, &model, &estimator)
}

/// Study engine with the estimator injected; the unit tests swap in an
/// oracle that returns the truth to pin the aggregation arithmetic.
pub(crate) fn mc_study_with(
    config: &McConfig,
    model: &PiecewisePowerLaw,
    estimator: &(dyn Fn(&[SurvivalSample]) -> Option<RepEstimates> + Sync),
) -> Result<McReport> {
    config.validate()?;
    let pi = config.pi.unwrap_or(0.0);
    let names = config.parameter_names();
    let truths = config.truths();
    let y_max = if config.censoring > 0.0 {
        Some(calibrate_ymax(model, config.censoring)?)
    } else {
        None
    };

    let mut cells = Vec::with_capacity(names.len() * config.n.len());
    for (slot, &n) in config.n.iter().enumerate() {
        let outcomes: Vec<Option<RepEstimates>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = child_seed(config.seed, slot as u64, rep as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let xs: Vec<f64> = (0..n)
                    .map(|_| {
                        if pi > 0.0 && rng.random::<f64>() < pi {
                            f64::INFINITY
                        } else {
                            model.quantile(rng.random()).expect("uniform draw")
                        }
                    })
                    .collect();
                let samples = match y_max {
                    Some(ym) => censor_with(&xs, ym, &mut rng),
                    None => xs
                        .iter()
                        .map(|&x| SurvivalSample { time: x, event: true })
                        .collect(),
                };
                estimator(&samples)
            })
            .collect();

        for (p, name) in names.iter().enumerate() {
            let mut errors = Vec::new();
            let mut squares = Vec::new();
            let mut covered = Vec::new();
            for outcome in &outcomes {
                let Some(est) = outcome.as_ref().and_then(|o| o[p]) else {
                    continue;
                };
                let e = est.0 - truths[p];
                errors.push(e);
                squares.push(e * e);
                covered.push(f64::from(est.1 <= truths[p] && truths[p] <= est.2));
            }
            let kept = errors.len();
            if kept == 0 {
                return Err(Error::Study(format!(
                    "every replication at n = {n} was dropped for {name}"
                )));
            }
            let kf = kept as f64;
            let bias = pairwise_sum(&errors) / kf;
            let m2 = pairwise_sum(&squares) / kf;
            let rmse = m2.sqrt();
            // Delta method: var(rmse) = var(m2) / (4 m2).
            let var_sq: Vec<f64> = squares.iter().map(|&s| (s - m2) * (s - m2)).collect();
            let var_m2 = if kept > 1 {
                pairwise_sum(&var_sq) / (kf * (kf - 1.0))
            } else {
                0.0
            };
            let rmse_mc_se = if rmse > 0.0 { (var_m2 / (4.0 * m2)).sqrt() } else { 0.0 };
            cells.push(McCell {
                parameter: name.clone(),
                n,
                bias,
                rmse,
                rmse_mc_se,
                coverage: pairwise_sum(&covered) / kf,
                dropped: config.replications - kept,
            });
        }
    }
    Ok(McReport { cells, y_max })
}
