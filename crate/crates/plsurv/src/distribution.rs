//! Piecewise power-law lifetime distribution with change points.
//!
//! The model glues together `k` power-law segments on `[x_min, inf)`. Segment
//! boundaries (the change points) are closed on the left and open on the
//! right, so a break point itself belongs to the segment to its right. Within
//! segment `i` (boundaries `b_{i-1}` to `b_i`, exponent `alpha_i`) the
//! survival function is
//!
//! ```text
//! S(x) = C_{i-1} * (x / b_{i-1})^(1 - alpha_i)
//! ```
//!
//! where the continuity constants `C_0 = 1` and
//! `C_j = prod_{m=1..j} (b_m / b_{m-1})^(1 - alpha_m)` make `S` continuous
//! across breaks. Density, hazard, quantile, and integer moments all have
//! closed forms, implemented here with log-space arithmetic where plain
//! powers would underflow.
//!
//! # Example
//!
//! ```
//! use plsurv::PiecewisePowerLaw;
//!
//! // Two segments: exponent 2 up to the break at 2.0, exponent 3 after.
//! let m = PiecewisePowerLaw::new(1.0, vec![2.0], vec![2.0, 3.0]).unwrap();
//! assert!((m.survival(2.0).unwrap() - 0.5).abs() < 1e-12);
//! assert!((m.quantile(0.875).unwrap() - 4.0).abs() < 1e-10);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents at or above this bound are rejected at construction. The fitting
/// routines search on (1, 50], so anything larger is a sign of corrupt input.
pub const MAX_EXPONENT: f64 = 1e6;

/// Threshold below which the moment antiderivative switches to its
/// logarithmic form (the exponent `r - alpha_i + 1` crosses zero).
const LOG_ANTIDERIVATIVE_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Model type and construction
// ---------------------------------------------------------------------------

/// A `k`-segment piecewise power-law distribution on `[x_min, inf)`.
///
/// Immutable after construction; all evaluation methods are pure and safe to
/// call concurrently. Serializes to `{x_min, breaks, alphas}`; the continuity
/// constants are derived, not stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelParams", into = "ModelParams")]
pub struct PiecewisePowerLaw {
    x_min: f64,
    breaks: Vec<f64>,
    alphas: Vec<f64>,
    /// Continuity constants C_0..C_{k-1}, C_0 = 1.
    constants: Vec<f64>,
    /// ln C_0..ln C_{k-1}, kept for log-space evaluation.
    log_constants: Vec<f64>,
}

/// Serialization mirror of [`PiecewisePowerLaw`]: the free parameters only.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelParams {
    x_min: f64,
    breaks: Vec<f64>,
    alphas: Vec<f64>,
}

impl TryFrom<ModelParams> for PiecewisePowerLaw {
    type Error = Error;

    fn try_from(p: ModelParams) -> Result<Self> {
        PiecewisePowerLaw::new(p.x_min, p.breaks, p.alphas)
    }
}

impl From<PiecewisePowerLaw> for ModelParams {
    fn from(m: PiecewisePowerLaw) -> Self {
        ModelParams {
            x_min: m.x_min,
            breaks: m.breaks,
            alphas: m.alphas,
        }
    }
}

impl PiecewisePowerLaw {
    /// Builds a validated model from its free parameters.
    ///
    /// `breaks` holds the `k - 1` change points (strictly ascending, each
    /// greater than `x_min`); `alphas` holds one exponent per segment, each
    /// strictly greater than 1. An empty `breaks` list gives the ordinary
    /// single-segment power law.
    pub fn new(x_min: f64, breaks: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if !x_min.is_finite() || x_min <= 0.0 {
            return Err(Error::invalid(
                "x_min",
                format!("must be positive and finite, got {x_min}"),
            ));
        }
        if alphas.len() != breaks.len() + 1 {
            return Err(Error::invalid(
                "alphas",
                format!(
                    "need one exponent per segment: {} breaks require {} exponents, got {}",
                    breaks.len(),
                    breaks.len() + 1,
                    alphas.len()
                ),
            ));
        }
        let mut prev = x_min;
        for (i, &b) in breaks.iter().enumerate() {
            if !b.is_finite() || b <= prev {
                let what = if i == 0 { "x_min" } else { "the previous break" };
                return Err(Error::invalid(
                    "breaks",
                    format!("breaks[{i}] = {b} must be finite and exceed {what} ({prev})"),
                ));
            }
            prev = b;
        }
        for (i, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || a <= 1.0 || a > MAX_EXPONENT {
                return Err(Error::invalid(
                    "alphas",
                    format!("alphas[{i}] = {a} must lie in (1, {MAX_EXPONENT}]"),
                ));
            }
        }

        // C_j = prod_{m=1..j} (b_m / b_{m-1})^(1 - alpha_m), accumulated in
        // log space. b_0 is x_min.
        let k = alphas.len();
        let mut log_constants = Vec::with_capacity(k);
        log_constants.push(0.0);
        let mut acc = 0.0;
        let mut lower = x_min;
        for j in 1..k {
            let b = breaks[j - 1];
            acc += (1.0 - alphas[j - 1]) * (b / lower).ln();
            log_constants.push(acc);
            lower = b;
        }
        let constants = log_constants.iter().map(|lc| lc.exp()).collect();

        Ok(PiecewisePowerLaw {
            x_min,
            breaks,
            alphas,
            constants,
            log_constants,
        })
    }

    /// Lower support bound.
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Change points (empty for a single-segment model).
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Per-segment scaling exponents.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Continuity constants `C_0..C_{k-1}` (derived; `C_0 = 1`).
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Number of segments `k`.
    pub fn segments(&self) -> usize {
        self.alphas.len()
    }

    /// Left boundary of segment `i` (0-based): `x_min` for the first segment,
    /// the preceding break otherwise.
    pub(crate) fn segment_lower(&self, i: usize) -> f64 {
        if i == 0 {
            self.x_min
        } else {
            self.breaks[i - 1]
        }
    }

    /// 0-based index of the segment containing `x`. Break points belong to
    /// the segment on their right.
    pub(crate) fn segment_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x < self.x_min {
            return Err(Error::Domain(format!(
                "x = {x} lies below the support bound x_min = {}",
                self.x_min
            )));
        }
        Ok(())
    }

    // -----------------------------------------------------------------------
    // Evaluation
    // -----------------------------------------------------------------------

    /// Natural log of the survival function. Preferred over
    /// [`survival`](Self::survival) inside likelihoods: it stays finite until
    /// `S` underflows past roughly `exp(-745)`.
    pub fn log_survival(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let i = self.segment_index(x);
        let lower = self.segment_lower(i);
        Ok(self.log_constants[i] + (1.0 - self.alphas[i]) * (x / lower).ln())
    }

    /// Survival function `S(x)`, the probability of exceeding `x`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        Ok(self.log_survival(x)?.exp())
    }

    /// Natural log of the density.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let i = self.segment_index(x);
        let lower = self.segment_lower(i);
        let alpha = self.alphas[i];
        Ok(self.log_constants[i] + (alpha - 1.0).ln() - lower.ln()
            - alpha * (x / lower).ln())
    }

    /// Probability density `f(x) = C_{i-1} (alpha_i - 1)/b_{i-1} *
    /// (x/b_{i-1})^(-alpha_i)`. At a break the right segment's formula
    /// applies.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Hazard rate `h(x) = f(x)/S(x) = (alpha_i - 1)/x`: decreasing within
    /// each segment, discontinuous at the breaks.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let i = self.segment_index(x);
        Ok((self.alphas[i] - 1.0) / x)
    }

    /// Inverse of the distribution function: the `x` with `S(x) = 1 - u`.
    ///
    /// The survival level `1 - u` is located among the continuity constants
    /// (segment `i` covers survival values in `(C_i, C_{i-1}]`), then the
    /// segment's power law is inverted. `u = 0` returns `x_min`; `u -> 1`
    /// diverges, so the domain is `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || !(0.0..1.0).contains(&u) {
            return Err(Error::Domain(format!(
                "quantile level u = {u} outside [0, 1)"
            )));
        }
        let s = 1.0 - u;
        let k = self.segments();
        // First segment whose lower constant the level still clears; the
        // last segment absorbs everything below C_{k-1}.
        let mut i = k - 1;
        for j in 1..k {
            if s >= self.constants[j] {
                i = j - 1;
                break;
            }
        }
        let lower = self.segment_lower(i);
        let t = (s.ln() - self.log_constants[i]) / (1.0 - self.alphas[i]);
        Ok(lower * t.exp())
    }

    // -----------------------------------------------------------------------
    // Moments
    // -----------------------------------------------------------------------

    /// The `r`-th raw moment, from the per-segment closed form.
    ///
    /// Finiteness requires `r < alpha_k - 1` for the last segment's exponent;
    /// interior segments are bounded integrals for any `r`. Segments where
    /// `r - alpha_i + 1` vanishes use the logarithmic antiderivative.
    pub fn moment(&self, r: u32) -> Result<f64> {
        if r == 0 {
            return Err(Error::invalid("r", "moment order must be >= 1"));
        }
        let rf = f64::from(r);
        let k = self.segments();
        let alpha_last = self.alphas[k - 1];
        if rf >= alpha_last - 1.0 {
            return Err(Error::DivergentMoment {
                order: r,
                limit: alpha_last - 1.0,
            });
        }

        let mut total = 0.0;
        for i in 0..k {
            let alpha = self.alphas[i];
            let c = self.constants[i];
            let a = self.segment_lower(i);
            if i == k - 1 {
                // Tail segment: integral collapses to C (alpha-1) a^r / (alpha-1-r).
                total += c * (alpha - 1.0) * a.powf(rf) / (alpha - 1.0 - rf);
            } else {
                let b = self.breaks[i];
                let p = rf - alpha + 1.0;
                if p.abs() < LOG_ANTIDERIVATIVE_EPS {
                    // alpha - 1 == r here, so a^(alpha-1) == a^r.
                    total += c * (alpha - 1.0) * a.powf(rf) * (b / a).ln();
                } else {
                    // C (alpha-1) a^(alpha-1) * (b^p - a^p) / p, with the
                    // powers fused in log space against overflow.
                    let coef = c * (alpha - 1.0);
                    let upper = (p * b.ln() + (alpha - 1.0) * a.ln()).exp();
                    total += coef * (upper - a.powf(rf)) / p;
                }
            }
        }
        Ok(total)
    }

    /// First raw moment.
    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Central second moment `mu_2 - mu_1^2`; requires `alpha_k > 3`.
    pub fn variance(&self) -> Result<f64> {
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        Ok(m2 - m1 * m1)
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
