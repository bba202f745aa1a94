//! The four application-class utility functions mapping achievable data
//! rate to user satisfaction in [0, 1].
//!
//! Shapes follow the usual taxonomy: elastic traffic is strictly
//! concave, hard real-time is a step, delay-adaptive is a steep
//! normalized sigmoid, rate-adaptive a gentle one. All parameters are
//! configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    /// U(r) = log(1 + r/r0) / log(1 + r_max/r0), clamped at 1.
    Elastic { r0: f64, r_max: f64 },
    /// U(r) = 1 for r >= threshold, else 0.
    HardRealTime { threshold: f64 },
    /// Steep normalized logistic with a sharp knee at `midpoint`.
    DelayAdaptive { steepness: f64, midpoint: f64 },
    /// Gentle normalized logistic S-curve.
    RateAdaptive { steepness: f64, midpoint: f64 },
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// (sigma(a(r-b)) - sigma(-ab)) / (1 - sigma(-ab)): zero at r = 0,
/// approaches 1 for large r.
fn normalized_sigmoid(rate: f64, a: f64, b: f64) -> f64 {
    let s0 = logistic(-a * b);
    ((logistic(a * (rate - b)) - s0) / (1.0 - s0)).clamp(0.0, 1.0)
}

impl UtilitySpec {
    pub fn eval(&self, rate: f64) -> Result<f64> {
        if rate < 0.0 {
            return Err(SimError::Domain(format!("negative rate {rate}")));
        }
        Ok(match *self {
            UtilitySpec::Elastic { r0, r_max } => {
                ((1.0 + rate / r0).ln() / (1.0 + r_max / r0).ln()).min(1.0)
            }
            UtilitySpec::HardRealTime { threshold } => {
                if rate >= threshold {
                    1.0
                } else {
                    0.0
                }
            }
            UtilitySpec::DelayAdaptive { steepness, midpoint }
            | UtilitySpec::RateAdaptive { steepness, midpoint } => {
                normalized_sigmoid(rate, steepness, midpoint)
            }
        })
    }

    /// U(rate + delta) - U(rate); the greedy scheduler's selection metric.
    pub fn marginal(&self, rate: f64, delta: f64) -> Result<f64> {
        Ok(self.eval(rate + delta)? - self.eval(rate)?)
    }
}
