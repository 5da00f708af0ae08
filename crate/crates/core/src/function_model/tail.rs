use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::orlicz::YoungOrlicz;

use super::FunctionModel;

/// A tail function `T(t) = P(|ξ| > t)`, non-increasing on `[0, ∞)` with
/// values in `[0, 1]`.
#[derive(Clone)]
pub enum TailFunction {
    /// `Δ(t / scale) = min(1, 1 / N(t / scale))`.
    Envelope { young: YoungOrlicz, scale: f64 },
    /// Expression in `t`, assumed numerically zero beyond `support_hint`.
    Expression { expr: Expr, support_hint: f64 },
    /// Tail of a function, held as its non-increasing rearrangement.
    Of(Arc<FunctionModel>),
}

impl fmt::Debug for TailFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl TailFunction {
    pub fn envelope(young: YoungOrlicz, scale: f64) -> Result<TailFunction> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Invalid(format!("envelope scale must be positive, got {scale}")));
        }
        if !young.is_increasing() {
            return Err(Error::Invalid(format!(
                "N with p = {}, alpha = {} is not increasing; its envelope is not a tail function",
                young.p, young.alpha
            )));
        }
        Ok(TailFunction::Envelope { young, scale })
    }

    pub fn expression(src: &str, support_hint: f64) -> Result<TailFunction> {
        if !(support_hint > 0.0) {
            return Err(Error::Invalid(format!("support hint must be positive, got {support_hint}")));
        }
        let expr = Expr::parse(src, &["t"])?;
        let t = TailFunction::Expression { expr, support_hint };
        t.validate()?;
        Ok(t)
    }

    /// Tail of an already non-increasing model.
    pub(crate) fn of_rearranged(model: FunctionModel) -> TailFunction {
        TailFunction::Of(Arc::new(model))
    }

    pub fn describe(&self) -> String {
        match self {
            TailFunction::Envelope { young, scale } => format!(
                "envelope(p={}, alpha={}, C={}, K={})",
                young.p, young.alpha, young.dilation, scale
            ),
            TailFunction::Expression { expr, .. } => format!("tail({})", expr.source()),
            TailFunction::Of(m) => format!("tail_of({})", m.describe()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self {
            TailFunction::Envelope { young, scale } => young.delta(t / scale),
            TailFunction::Expression { expr, .. } => expr.eval1(t).clamp(0.0, 1.0),
            TailFunction::Of(m) => m.measure_gt(t),
        }
    }

    /// Beyond this point the tail is numerically zero.
    pub fn support_hint(&self) -> f64 {
        match self {
            TailFunction::Envelope { young, scale } => scale * young.inverse(1e300),
            TailFunction::Expression { support_hint, .. } => *support_hint,
            TailFunction::Of(m) => {
                let s = m.abs_eval(f64::MIN_POSITIVE);
                if s.is_finite() {
                    s.max(f64::MIN_POSITIVE)
                } else {
                    1e300
                }
            }
        }
    }

    /// Left-continuous generalized inverse `inf { t ≥ 0 : T(t) < u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            TailFunction::Envelope { young, scale } => {
                if u >= 1.0 {
                    return scale * young.inverse(1.0);
                }
                scale * young.inverse(1.0 / u)
            }
            TailFunction::Of(m) => m.abs_eval(u.min(1.0)),
            TailFunction::Expression { .. } => self.quantile_by_bisection(u),
        }
    }

    fn quantile_by_bisection(&self, u: f64) -> f64 {
        if self.eval(0.0) < u {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = self.support_hint();
        let mut guard = 0;
        while self.eval(hi) >= u {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 2000 || !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Checks range and monotonicity on a grid reaching `support_hint`.
    pub fn validate(&self) -> Result<()> {
        let hint = self.support_hint();
        let mut ts: Vec<f64> = (0..256).map(|k| hint.min(1e6) * k as f64 / 255.0).collect();
        let (a, b) = (1e-6f64.ln(), hint.max(2e-6).ln());
        ts.extend((0..256).map(|k| (a + (b - a) * k as f64 / 255.0).exp()));
        ts.sort_by(f64::total_cmp);
        let mut prev = f64::INFINITY;
        for &t in &ts {
            let v = match self {
                TailFunction::Expression { expr, .. } => expr.eval1(t),
                _ => self.eval(t),
            };
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::Invalid(format!("{}: value {v} at t = {t} is outside [0, 1]", self.describe())));
            }
            if v > prev + 1e-12 {
                return Err(Error::Invalid(format!("{}: increases near t = {t}", self.describe())));
            }
            prev = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_values() {
        let t = TailFunction::envelope(YoungOrlicz::new(2.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(1.0), 1.0);
        assert!((t.eval(10.0) - 0.01).abs() < 1e-15);
        assert!((t.quantile(0.01) - 10.0).abs() < 1e-9);
        assert!((t.quantile(1.0) - 1.0).abs() < 1e-12);
        t.validate().unwrap();
    }

    #[test]
    fn scaled_envelope() {
        let t = TailFunction::envelope(YoungOrlicz::new(2.0, 0.0).unwrap(), 2.0).unwrap();
        assert!((t.eval(4.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn expression_tail_quantile() {
        let t = TailFunction::expression("max(0, 1 - t)", 1.0).unwrap();
        for &u in &[0.1, 0.5, 0.9] {
            assert!((t.quantile(u) - (1.0 - u)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_increasing_tail() {
        assert!(TailFunction::expression("min(1, t)", 1.0).is_err());
        assert!(TailFunction::expression("2", 1.0).is_err());
    }
}
