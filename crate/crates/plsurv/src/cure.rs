//! Long-term survivor (cure fraction) mixture.
//!
//! A fraction `pi` of the population is immune to the event; the remainder
//! follows a [`PiecewisePowerLaw`] baseline. Population-level quantities:
//!
//! ```text
//! S_pop(x) = pi + (1 - pi) * S_0(x)
//! f_pop(x) = (1 - pi) * f_0(x)
//! h_pop(x) = f_pop(x) / S_pop(x)
//! ```
//!
//! `S_pop` plateaus at `pi` instead of decaying to zero, and `f_pop` is an
//! improper density integrating to `1 - pi`. Setting `pi = 0` recovers the
//! baseline exactly, which is how no-cure fits are represented throughout
//! the crate.

use serde::{Deserialize, Serialize};

use crate::distribution::PiecewisePowerLaw;
use crate::error::{Error, Result};

/// Cure-fraction mixture over a piecewise power-law baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CureParams", into = "CureParams")]
pub struct LongTermModel {
    pi: f64,
    base: PiecewisePowerLaw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CureParams {
    pi: f64,
    base: PiecewisePowerLaw,
}

impl TryFrom<CureParams> for LongTermModel {
    type Error = Error;

    fn try_from(p: CureParams) -> Result<Self> {
        LongTermModel::new(p.pi, p.base)
    }
}

impl From<LongTermModel> for CureParams {
    fn from(m: LongTermModel) -> Self {
        CureParams {
            pi: m.pi,
            base: m.base,
        }
    }
}

impl LongTermModel {
    /// Wraps a baseline model with cure fraction `pi` in `[0, 1)`.
    pub fn new(pi: f64, base: PiecewisePowerLaw) -> Result<Self> {
        if !pi.is_finite() || !(0.0..1.0).contains(&pi) {
            return Err(Error::invalid(
                "pi",
                format!("cure fraction must lie in [0, 1), got {pi}"),
            ));
        }
        Ok(LongTermModel { pi, base })
    }

    /// Cure fraction.
    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// Baseline model of the susceptible group.
    pub fn base(&self) -> &PiecewisePowerLaw {
        &self.base
    }

    /// Population survival `pi + (1 - pi) S_0(x)`; bounded below by `pi`.
    pub fn survival_pop(&self, x: f64) -> Result<f64> {
        Ok(self.pi + (1.0 - self.pi) * self.base.survival(x)?)
    }

    /// Natural log of the population survival, evaluated without forming
    /// `S_0` outside log space when `pi` is zero.
    pub fn log_survival_pop(&self, x: f64) -> Result<f64> {
        let ls0 = self.base.log_survival(x)?;
        if self.pi == 0.0 {
            return Ok(ls0);
        }
        // ln(pi + (1-pi) e^ls0); the pi term keeps this away from -inf.
        Ok((self.pi + (1.0 - self.pi) * ls0.exp()).ln())
    }

    /// Population (improper) density `(1 - pi) f_0(x)`.
    pub fn pdf_pop(&self, x: f64) -> Result<f64> {
        Ok((1.0 - self.pi) * self.base.pdf(x)?)
    }

    /// Natural log of the population density.
    pub fn log_pdf_pop(&self, x: f64) -> Result<f64> {
        Ok((1.0 - self.pi).ln() + self.base.log_pdf(x)?)
    }

    /// Population hazard `f_pop / S_pop`; strictly below the baseline hazard
    /// whenever `pi > 0`.
    pub fn hazard_pop(&self, x: f64) -> Result<f64> {
        Ok(self.pdf_pop(x)? / self.survival_pop(x)?)
    }
}
