//! JSON report assembly: fit summaries, curve tables, product-limit tables,
//! and the per-command report shapes.

use plsurv::{
    fisher_ci, wald_ci, CoxSnellResidual, FitResult, GroupSummary, KmCurve, LongTermModel,
    WelchTest,
};
use serde::Serialize;

use crate::dataset::DataError;

/// Pointwise confidence band around a curve.
#[derive(Serialize)]
pub struct Bands {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A named curve sampled on an explicit grid.
#[derive(Serialize)]
pub struct CurveTable {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bands: Option<Bands>,
}

/// Product-limit table: a curve plus the per-time risk-set counts.
#[derive(Serialize)]
pub struct KmTable {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub deaths: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bands: Option<Bands>,
}

/// Interval estimates attached to a fit, at one confidence level.
#[derive(Serialize)]
pub struct ConfidenceBlock {
    pub level: f64,
    pub alphas: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<[f64; 2]>,
}

/// Full machine-readable summary of one fitted model.
#[derive(Serialize)]
pub struct FitReport {
    pub x_min: f64,
    pub breaks: Vec<f64>,
    pub alphas: Vec<f64>,
    pub pi: f64,
    pub std_errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_std_error: Option<f64>,
    pub confidence: ConfidenceBlock,
    pub loglik: f64,
    pub aic: f64,
    pub n_params: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aic_counts_searched_breaks: Option<bool>,
    pub converged: bool,
    pub iterations: usize,
    pub n: usize,
    pub events: usize,
    pub censoring_rate: f64,
    pub censored_below_xmin: usize,
    pub segment_n: Vec<usize>,
    pub segment_d: Vec<usize>,
}

impl FitReport {
    /// Summarizes a fit of `n_total` ingested observations, of which
    /// `censored_below_xmin` were clamped to the threshold.
    ///
    /// Interval estimates use the per-segment event counts for the shape
    /// parameters and the estimated standard error for the cure fraction
    /// (skipped when the fraction sits on the boundary and has none).
    pub fn new(
        fit: &FitResult,
        n_total: usize,
        events: usize,
        level: f64,
        aic_counts_searched_breaks: Option<bool>,
    ) -> Result<FitReport, DataError> {
        let base = fit.model.base();
        let mut alpha_cis = Vec::with_capacity(base.alphas().len());
        for (alpha, &d) in base.alphas().iter().zip(&fit.segment_d) {
            let (lo, hi) = fisher_ci(*alpha, d, level)
                .map_err(|e| DataError(format!("confidence interval: {e}")))?;
            alpha_cis.push([lo, hi]);
        }
        let pi_ci = match fit.pi_std_error {
            Some(se) => {
                let (lo, hi) = wald_ci(fit.model.pi(), se, level)
                    .map_err(|e| DataError(format!("confidence interval: {e}")))?;
                Some([lo.max(0.0), hi.min(1.0)])
            }
            None => None,
        };
        Ok(FitReport {
            x_min: base.x_min(),
            breaks: base.breaks().to_vec(),
            alphas: base.alphas().to_vec(),
            pi: fit.model.pi(),
            std_errors: fit.std_errors.clone(),
            pi_std_error: fit.pi_std_error,
            confidence: ConfidenceBlock { level, alphas: alpha_cis, pi: pi_ci },
            loglik: fit.loglik,
            aic: fit.aic,
            n_params: fit.n_params,
            aic_counts_searched_breaks,
            converged: fit.converged,
            iterations: fit.iterations,
            n: n_total,
            events,
            censoring_rate: 1.0 - events as f64 / n_total as f64,
            censored_below_xmin: fit.censored_below_xmin,
            segment_n: fit.segment_n.clone(),
            segment_d: fit.segment_d.clone(),
        })
    }
}

/// One model's row in an AIC comparison.
#[derive(Serialize)]
pub struct AicRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breaks: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    pub n_params: usize,
    pub loglik: f64,
    pub aic: f64,
    /// False when the maximizer stalled and the row shows its best iterate.
    pub converged: bool,
}

/// One model's residuals against the shared dataset.
#[derive(Serialize)]
pub struct ResidualSet {
    pub label: String,
    pub values: Vec<CoxSnellResidual>,
}

/// Everything the model comparison emits: the nonparametric reference,
/// survival overlays on a common grid, the AIC ranking, and residuals.
#[derive(Serialize)]
pub struct CompareReport {
    pub km: KmTable,
    pub curves: Vec<CurveTable>,
    pub aic: Vec<AicRow>,
    pub residuals: Vec<ResidualSet>,
}

/// Stdout summary of a simulated dataset written to disk.
#[derive(Serialize)]
pub struct SimulateSummary {
    pub n: usize,
    pub events: usize,
    pub censoring_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub seed: u64,
    pub path: String,
}

/// One group's descriptive statistics plus its raw times.
#[derive(Serialize)]
pub struct GroupReport {
    #[serde(flatten)]
    pub summary: GroupSummary,
    pub times: Vec<f64>,
}

/// Permutation-test block of an attribute comparison.
#[derive(Serialize)]
pub struct PermutationBlock {
    pub resamples: usize,
    pub seed: u64,
    pub p: f64,
}

/// Full output of a two-group attribute comparison.
#[derive(Serialize)]
pub struct AttrReport {
    pub group_col: String,
    pub caveat: String,
    pub welch: WelchTest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationBlock>,
    pub groups: Vec<GroupReport>,
}

/// Logarithmically spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            // exp(ln lo) can land an ulp below the support; clamp back in.
            (llo + t * (lhi - llo)).exp().max(lo)
        })
        .collect()
}

/// Population survival curve on a log grid over the bulk of the support.
pub fn survival_curve(
    model: &LongTermModel,
    name: &str,
    points: usize,
) -> Result<CurveTable, plsurv::Error> {
    let hi = model.base().quantile(0.999)?;
    let x = log_grid(model.base().x_min(), hi, points);
    let y = x.iter().map(|&v| model.survival_pop(v)).collect::<Result<_, _>>()?;
    Ok(CurveTable { name: name.to_owned(), x, y, bands: None })
}

/// Population hazard curve on the same grid as `survival_curve`.
pub fn hazard_curve(
    model: &LongTermModel,
    name: &str,
    points: usize,
) -> Result<CurveTable, plsurv::Error> {
    let hi = model.base().quantile(0.999)?;
    let x = log_grid(model.base().x_min(), hi, points);
    let y = x.iter().map(|&v| model.hazard_pop(v)).collect::<Result<_, _>>()?;
    Ok(CurveTable { name: name.to_owned(), x, y, bands: None })
}

/// Product-limit table with pointwise Greenwood bands at `level`.
pub fn km_table(km: &KmCurve, name: &str, level: f64) -> Result<KmTable, DataError> {
    let mut lo = Vec::with_capacity(km.times.len());
    let mut hi = Vec::with_capacity(km.times.len());
    for (s, var) in km.survival.iter().zip(&km.variance) {
        let (l, h) = wald_ci(*s, var.sqrt(), level)
            .map_err(|e| DataError(format!("confidence band: {e}")))?;
        lo.push(l.max(0.0));
        hi.push(h.min(1.0));
    }
    Ok(KmTable {
        name: name.to_owned(),
        x: km.times.clone(),
        y: km.survival.clone(),
        at_risk: km.at_risk.clone(),
        deaths: km.deaths.clone(),
        bands: Some(Bands { lo, hi }),
    })
}
