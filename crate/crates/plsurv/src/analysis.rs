//! Two-group comparison of observed times by attribute.
//!
//! The comparison is an unadjusted mean test on raw observed times
//! (censored values enter as observed), so callers should surface the
//! caveat that no survival correction is applied. Welch's unequal-variance
//! t-test is the primary procedure; a seeded permutation test on the mean
//! difference is available as a cross-check for skewed samples.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two labelled groups of observed times.
#[derive(Debug, Clone, Serialize)]
pub struct GroupedTimes {
    pub label_a: String,
    pub times_a: Vec<f64>,
    pub label_b: String,
    pub times_b: Vec<f64>,
}

impl GroupedTimes {
    pub fn new(
        label_a: impl Into<String>,
        times_a: Vec<f64>,
        label_b: impl Into<String>,
        times_b: Vec<f64>,
    ) -> Result<Self> {
        let g = GroupedTimes {
            label_a: label_a.into(),
            times_a,
            label_b: label_b.into(),
            times_b,
        };
        for (label, times) in [(&g.label_a, &g.times_a), (&g.label_b, &g.times_b)] {
            if times.is_empty() {
                return Err(Error::EmptyInput("a comparison group is empty"));
            }
            if times.iter().any(|t| !t.is_finite()) {
                return Err(Error::invalid(
                    "times",
                    format!("group {label} contains a non-finite time"),
                ));
            }
        }
        Ok(g)
    }
}

/// Welch test outcome.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator); None for singleton groups.
fn variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Welch's unequal-variance t-test for a difference in group means, with
/// Welch-Satterthwaite degrees of freedom and a two-sided p-value.
pub fn welch_test(g: &GroupedTimes) -> Result<WelchTest> {
    if g.times_a.len() < 2 || g.times_b.len() < 2 {
        return Err(Error::DegenerateTest(
            "Welch's test needs at least 2 observations per group".into(),
        ));
    }
    let (na, nb) = (g.times_a.len() as f64, g.times_b.len() as f64);
    let (va, vb) = (
        variance(&g.times_a).expect("size checked"),
        variance(&g.times_b).expect("size checked"),
    );
    if va == 0.0 && vb == 0.0 {
        return Err(Error::DegenerateTest(
            "both groups have zero variance; the t statistic is undefined".into(),
        ));
    }
    let sa = va / na;
    let sb = vb / nb;
    let t = (mean(&g.times_a) - mean(&g.times_b)) / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::DegenerateTest(format!("t distribution with df = {df}: {e}")))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(WelchTest { t, df, p })
}

/// Descriptive statistics of one group.
#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; absent for singleton groups.
    pub sd: Option<f64>,
}

fn summarize(label: &str, xs: &[f64]) -> GroupSummary {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    GroupSummary {
        label: label.to_string(),
        n: xs.len(),
        mean: mean(xs),
        median,
        sd: variance(xs).map(f64::sqrt),
    }
}

/// Per-group descriptive statistics, in (a, b) order.
pub fn group_summary(g: &GroupedTimes) -> (GroupSummary, GroupSummary) {
    (
        summarize(&g.label_a, &g.times_a),
        summarize(&g.label_b, &g.times_b),
    )
}

/// Two-sided permutation test on the difference of group means: the pooled
/// sample is reshuffled `resamples` times with a seeded generator and the
/// p-value is `(1 + #{|diff*| >= |diff|}) / (resamples + 1)`.
pub fn permutation_test(g: &GroupedTimes, resamples: usize, seed: u64) -> Result<f64> {
    if resamples == 0 {
        return Err(Error::invalid("resamples", "need at least 1"));
    }
    if g.times_a.is_empty() || g.times_b.is_empty() {
        return Err(Error::EmptyInput("a comparison group is empty"));
    }
    let observed = (mean(&g.times_a) - mean(&g.times_b)).abs();
    let mut pooled: Vec<f64> = g.times_a.iter().chain(&g.times_b).copied().collect();
    let na = g.times_a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..resamples {
        pooled.shuffle(&mut rng);
        let diff = (mean(&pooled[..na]) - mean(&pooled[na..])).abs();
        if diff >= observed {
            extreme += 1;
        }
    }
    Ok((1 + extreme) as f64 / (resamples + 1) as f64)
}
