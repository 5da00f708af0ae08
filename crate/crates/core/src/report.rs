//! Numerical estimates and the verdicts of inequality checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A computed quantity together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error: error.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// Product with first-order error propagation.
    pub fn mul(self, other: Estimate) -> Estimate {
        Estimate::new(
            self.value * other.value,
            self.error * other.value.abs() + other.error * self.value.abs(),
        )
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate::new(self.value * c, self.error * c.abs())
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The margin is smaller than the numerical error budget, or a factor is
    /// infinite.
    Inconclusive,
}

impl Verdict {
    /// Stable process exit code for this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 3,
            Verdict::Inconclusive => 4,
        }
    }
}

/// Outcome of an inequality or identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed distance from violation: positive means the relation holds.
    pub margin: f64,
    /// Combined absolute error estimate of both sides.
    pub error_budget: f64,
    pub verdict: Verdict,
    pub parameters: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Checks `lhs ≤ rhs · (1 + slack)`.
    pub fn inequality(check: &str, lhs: Estimate, rhs: Estimate, slack: f64) -> Self {
        let bound = rhs.value * (1.0 + slack);
        let margin = bound - lhs.value;
        let budget = lhs.error + rhs.error * (1.0 + slack);
        let verdict = if rhs.value.is_infinite() || lhs.value.is_infinite() || margin.is_nan() {
            Verdict::Inconclusive
        } else if margin >= budget {
            Verdict::Pass
        } else if margin < -budget {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        Self::build(check, lhs.value, rhs.value, margin, budget, verdict)
    }

    /// Checks `|lhs − rhs| ≤ rel_tol · |rhs|`.
    pub fn equality(check: &str, lhs: Estimate, rhs: Estimate, rel_tol: f64) -> Self {
        let allowed = rel_tol * rhs.value.abs();
        let dev = (lhs.value - rhs.value).abs();
        let margin = allowed - dev;
        let budget = lhs.error + rhs.error;
        let verdict = if !lhs.value.is_finite() || !rhs.value.is_finite() {
            if lhs.value == rhs.value {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            }
        } else if margin >= budget {
            Verdict::Pass
        } else if margin < -budget {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        Self::build(check, lhs.value, rhs.value, margin, budget, verdict)
    }

    /// An empirical constant that certifies a bound when it is finite and
    /// positive. Both sides carry the constant itself.
    pub fn certificate(check: &str, value: Estimate) -> Self {
        let verdict = if value.value.is_finite() && value.value > value.error {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        Self::build(check, value.value, value.value, value.value, value.error, verdict)
    }

    /// A check that could not be decided.
    pub fn inconclusive(check: &str, reason: impl Into<String>) -> Self {
        let mut r = Self::build(check, f64::NAN, f64::NAN, f64::NAN, f64::NAN, Verdict::Inconclusive);
        r.notes.push(reason.into());
        r
    }

    fn build(check: &str, lhs: f64, rhs: f64, margin: f64, budget: f64, verdict: Verdict) -> Self {
        VerificationReport {
            check: check.to_string(),
            lhs,
            rhs,
            margin,
            error_budget: budget,
            verdict,
            parameters: BTreeMap::new(),
            labels: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn label(mut self, name: &str, value: impl Into<String>) -> Self {
        self.labels.insert(name.to_string(), value.into());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inequality_verdicts() {
        let r = VerificationReport::inequality("x", Estimate::exact(1.0), Estimate::exact(2.0), 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.margin, 1.0);
        let r = VerificationReport::inequality("x", Estimate::exact(3.0), Estimate::exact(2.0), 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = VerificationReport::inequality("x", Estimate::new(2.0, 0.1), Estimate::exact(2.0), 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        // equality configuration with slack and tiny errors passes
        let r = VerificationReport::inequality("x", Estimate::new(2.0, 1e-10), Estimate::new(2.0, 1e-10), 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = VerificationReport::inequality("x", Estimate::exact(1.0), Estimate::exact(f64::INFINITY), 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn equality_verdicts() {
        let r = VerificationReport::equality("x", Estimate::exact(1.0), Estimate::exact(1.0 + 1e-9), 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = VerificationReport::equality("x", Estimate::exact(1.0), Estimate::exact(1.1), 1e-6);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::Pass.exit_code(), 0);
        assert_eq!(Verdict::Fail.exit_code(), 3);
        assert_eq!(Verdict::Inconclusive.exit_code(), 4);
    }
}
