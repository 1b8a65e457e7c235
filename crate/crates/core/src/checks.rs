//! A uniform record for every checked inequality `value <= bound`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub inequality: String,
    pub value: f64,
    pub bound: f64,
    /// `value / bound`, zero when both vanish.
    pub ratio: f64,
    /// Largest admissible ratio.
    pub limit: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(inequality: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::with_limit(inequality, value, bound, 1.0)
    }

    pub fn with_limit(inequality: impl Into<String>, value: f64, bound: f64, limit: f64) -> Self {
        let ratio = ratio(value, bound);
        Self {
            inequality: inequality.into(),
            value,
            bound,
            ratio,
            limit,
            pass: ratio <= limit,
        }
    }
}

/// `value / bound` with `0/0 = 0`.
pub fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value / bound
    }
}

pub fn all_pass(checks: &[BoundCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}
