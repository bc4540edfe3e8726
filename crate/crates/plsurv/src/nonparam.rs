//! Nonparametric survival estimation from right-censored samples.
//!
//! Provides the Kaplan-Meier product-limit estimator with Greenwood
//! variances, step-function evaluation, and the observed censoring rate.
//! Ties between deaths and censorings at the same time are resolved
//! deaths-first, the standard convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed lifetime: `time = min(T, C)` with `event` true when the
/// event was observed (delta = 1) and false when censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    pub time: f64,
    pub event: bool,
}

impl SurvivalSample {
    /// Validated constructor; `time` must be positive and finite.
    pub fn new(time: f64, event: bool) -> Result<Self> {
        if !time.is_finite() || time <= 0.0 {
            return Err(Error::invalid(
                "time",
                format!("observed time must be positive and finite, got {time}"),
            ));
        }
        Ok(SurvivalSample { time, event })
    }

    /// An observed event at `time`.
    pub fn event(time: f64) -> Result<Self> {
        Self::new(time, true)
    }

    /// A censored observation at `time`.
    pub fn censored(time: f64) -> Result<Self> {
        Self::new(time, false)
    }
}

/// Kaplan-Meier curve: one entry per distinct event time (censoring-only
/// times do not appear; they only shrink the risk set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmCurve {
    /// Ascending distinct event times.
    pub times: Vec<f64>,
    /// Survival estimate just after each event time.
    pub survival: Vec<f64>,
    /// Number at risk at each event time (deaths-first tie convention).
    pub at_risk: Vec<usize>,
    /// Number of events at each event time.
    pub deaths: Vec<usize>,
    /// Greenwood variance of the survival estimate at each event time.
    pub variance: Vec<f64>,
}

impl KmCurve {
    /// Right-continuous step evaluation: 1 before the first event time,
    /// constant at the final value beyond the last.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.times.partition_point(|&t| t <= x);
        if idx == 0 {
            1.0
        } else {
            self.survival[idx - 1]
        }
    }
}

/// Fits the product-limit estimator.
///
/// While every removal from the risk set so far has been a death, the
/// product telescopes to `(n - cumulative deaths) / n`; that form is used
/// directly so the uncensored curve equals the empirical survival fraction
/// bit for bit. After the first censoring the usual multiplicative update
/// takes over.
pub fn km_fit(samples: &[SurvivalSample]) -> Result<KmCurve> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("km_fit needs at least one sample"));
    }
    for s in samples {
        if !s.time.is_finite() || s.time <= 0.0 {
            return Err(Error::invalid(
                "samples",
                format!("observed time must be positive and finite, got {}", s.time),
            ));
        }
    }

    let mut order: Vec<&SurvivalSample> = samples.iter().collect();
    order.sort_by(|a, b| a.time.total_cmp(&b.time));

    let n_total = order.len();
    let mut times = Vec::new();
    let mut survival = Vec::new();
    let mut at_risk_col = Vec::new();
    let mut deaths_col = Vec::new();
    let mut variance = Vec::new();

    let mut i = 0;
    let mut at_risk = n_total;
    let mut cum_deaths = 0usize;
    let mut censored_seen = false;
    let mut surv = 1.0f64;
    let mut greenwood_sum = 0.0f64;

    while i < order.len() {
        let t = order[i].time;
        let mut d = 0usize;
        let mut c = 0usize;
        while i < order.len() && order[i].time == t {
            if order[i].event {
                d += 1;
            } else {
                c += 1;
            }
            i += 1;
        }
        if d > 0 {
            cum_deaths += d;
            if censored_seen {
                surv *= 1.0 - d as f64 / at_risk as f64;
            } else {
                surv = (n_total - cum_deaths) as f64 / n_total as f64;
            }
            if at_risk == d {
                // Risk set exhausted by deaths: survival is exactly zero and
                // the Greenwood term is undefined; report zero variance.
                surv = 0.0;
                greenwood_sum = f64::INFINITY;
            } else {
                greenwood_sum += d as f64 / (at_risk as f64 * (at_risk - d) as f64);
            }
            times.push(t);
            survival.push(surv);
            at_risk_col.push(at_risk);
            deaths_col.push(d);
            variance.push(if surv == 0.0 {
                0.0
            } else {
                surv * surv * greenwood_sum
            });
        }
        at_risk -= d + c;
        if c > 0 {
            censored_seen = true;
        }
    }

    Ok(KmCurve {
        times,
        survival,
        at_risk: at_risk_col,
        deaths: deaths_col,
        variance,
    })
}

/// Fraction of censored observations (delta = 0).
pub fn censoring_rate(samples: &[SurvivalSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("censoring_rate needs at least one sample"));
    }
    let censored = samples.iter().filter(|s| !s.event).count();
    Ok(censored as f64 / samples.len() as f64)
}
