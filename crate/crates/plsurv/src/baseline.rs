//! Mixture-of-Weibulls comparison baseline.
//!
//! Evaluation-only: the constants of a previously published reliability fit
//! of the same lifetimes are pinned in [`saleh_model`] for curve overlays
//! and residual comparison. Unlike the cure models in this crate, a Weibull
//! mixture's survival always decays to zero, which is exactly the contrast
//! the comparison is meant to expose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One Weibull component: mixture weight, scale (years), shape.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeibullComponent {
    pub weight: f64,
    pub scale: f64,
    pub shape: f64,
}

/// Fixed mixture of Weibull lifetime distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<WeibullComponent>", into = "Vec<WeibullComponent>")]
pub struct MixtureWeibull {
    components: Vec<WeibullComponent>,
}

impl TryFrom<Vec<WeibullComponent>> for MixtureWeibull {
    type Error = Error;

    fn try_from(c: Vec<WeibullComponent>) -> Result<Self> {
        MixtureWeibull::new(c)
    }
}

impl From<MixtureWeibull> for Vec<WeibullComponent> {
    fn from(m: MixtureWeibull) -> Self {
        m.components
    }
}

impl MixtureWeibull {
    /// Validates weights in (0,1) summing to 1 (within 1e-12) and positive
    /// scales and shapes.
    pub fn new(components: Vec<WeibullComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "need at least one component"));
        }
        let mut sum = 0.0;
        for (i, c) in components.iter().enumerate() {
            if !c.weight.is_finite() || c.weight <= 0.0 || c.weight > 1.0 {
                return Err(Error::invalid(
                    "components",
                    format!("weight[{i}] = {} outside (0, 1]", c.weight),
                ));
            }
            if !c.scale.is_finite() || c.scale <= 0.0 {
                return Err(Error::invalid(
                    "components",
                    format!("scale[{i}] = {} must be positive", c.scale),
                ));
            }
            if !c.shape.is_finite() || c.shape <= 0.0 {
                return Err(Error::invalid(
                    "components",
                    format!("shape[{i}] = {} must be positive", c.shape),
                ));
            }
            sum += c.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(
                "components",
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        Ok(MixtureWeibull { components })
    }

    pub fn components(&self) -> &[WeibullComponent] {
        &self.components
    }

    fn check_domain(x: f64) -> Result<()> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!(
                "mixture Weibull evaluated at negative or non-finite x = {x}"
            )));
        }
        Ok(())
    }

    /// Survival `sum_j w_j exp(-(x/lambda_j)^beta_j)`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        Self::check_domain(x)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.weight * (-(x / c.scale).powf(c.shape)).exp())
            .sum())
    }

    /// Density, the negative derivative of [`survival`](Self::survival).
    /// Diverges at `x = 0` when any shape is below 1 (integrable
    /// singularity).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check_domain(x)?;
        Ok(self
            .components
            .iter()
            .map(|c| {
                let z = x / c.scale;
                c.weight * (c.shape / c.scale) * z.powf(c.shape - 1.0) * (-z.powf(c.shape)).exp()
            })
            .sum())
    }
}

/// The published two-component mixture-Weibull fit used as the comparison
/// baseline: weights (0.876, 0.124), scales (12.835, 14.833) years, shapes
/// (0.618, 13.387).
pub fn saleh_model() -> MixtureWeibull {
    MixtureWeibull::new(vec![
        WeibullComponent {
            weight: 0.876,
            scale: 12.835,
            shape: 0.618,
        },
        WeibullComponent {
            weight: 0.124,
            scale: 14.833,
            shape: 13.387,
        },
    ])
    .expect("pinned baseline constants are valid")
}
