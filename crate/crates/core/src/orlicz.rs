//! The Young functions `N(u) = |Cu|^p ln^α(e + |Cu|)`, their Luxemburg norms,
//! tail envelopes and the moment integral `J(α, p, s)`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_model::{tail_of, FunctionModel, ModelKind};
use crate::numerics::{find_root_monotone, integrate, optimize_1d_with, Sense, Tolerances, OVERFLOW_GUARD};
use crate::report::{Estimate, VerificationReport};

const LN_GUARD: f64 = 690.775_527_898_213_7; // ln(1e300)

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungOrlicz {
    pub p: f64,
    pub alpha: f64,
    /// Dilation factor `C`; the function is `u ↦ N(Cu)`.
    pub dilation: f64,
}

impl YoungOrlicz {
    pub fn new(p: f64, alpha: f64) -> Result<YoungOrlicz> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("Young function needs finite p ≥ 1, got {p}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(YoungOrlicz { p, alpha, dilation: 1.0 })
    }

    pub fn with_dilation(self, c: f64) -> Result<YoungOrlicz> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("dilation must be positive, got {c}")));
        }
        Ok(YoungOrlicz { dilation: c, ..self })
    }

    /// `ln N(u)`; `-∞` at `u = 0`.
    pub fn ln_eval(&self, u: f64) -> f64 {
        let x = (self.dilation * u).abs();
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_eval_log(x.ln())
    }

    /// `ln N` as a function of `lx = ln |Cu|`; finite for any finite `lx`.
    pub(crate) fn ln_eval_log(&self, lx: f64) -> f64 {
        let ll = if self.alpha == 0.0 {
            0.0
        } else if lx > 40.0 {
            // ln(e + x) = ln x + ln(1 + e/x)
            self.alpha * (lx + (std::f64::consts::E * (-lx).exp()).ln_1p()).ln()
        } else {
            self.alpha * (std::f64::consts::E + lx.exp()).ln().ln()
        };
        self.p * lx + ll
    }

    /// `N(u)`, saturating to `+∞` beyond the overflow guard.
    pub fn eval(&self, u: f64) -> f64 {
        let l = self.ln_eval(u);
        if l > LN_GUARD {
            f64::INFINITY
        } else {
            l.exp()
        }
    }

    /// `N` is increasing on `(0, ∞)` exactly when `α ≥ −p`.
    pub fn is_increasing(&self) -> bool {
        self.alpha >= -self.p
    }

    /// `min(1, 1/N(t))`.
    pub fn delta(&self, t: f64) -> f64 {
        let l = self.ln_eval(t);
        if l <= 0.0 {
            1.0
        } else {
            (-l).exp()
        }
    }

    /// The `u ≥ 0` with `N(u) = y`; requires an increasing `N`.
    pub fn inverse(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        if y.is_infinite() {
            return f64::INFINITY;
        }
        let ly = y.ln();
        // in z = ln(Cu)
        let unit = YoungOrlicz { dilation: 1.0, ..*self };
        let g = |z: f64| unit.ln_eval(z.exp()) - ly;
        let tol = Tolerances { abs_tol: 1e-15, rel_tol: 1e-15, max_subdivisions: 1 };
        let z0 = ly / self.p;
        match find_root_monotone(g, z0 - 1.0, z0 + 1.0, &tol) {
            Ok(z) => z.exp() / self.dilation,
            Err(_) => f64::NAN,
        }
    }
}

pub fn young_eval(n: &YoungOrlicz, u: f64) -> f64 {
    n.eval(u)
}

/// `Δ(t) = min(1, 1/N(t))`.
pub fn delta_tail_bound(n: &YoungOrlicz, t: f64) -> f64 {
    n.delta(t)
}

/// `Δ(t / K)`.
pub fn scaled_tail_bound(n: &YoungOrlicz, k: f64, t: f64) -> f64 {
    n.delta(t / k)
}

/// `E N(|f| / μ)`.
fn modular(f: &FunctionModel, n: &YoungOrlicz, mu: f64, tol: &Tolerances) -> Result<Estimate> {
    if let ModelKind::Tabulated(v) = f.kind() {
        let s: f64 = v.iter().map(|x| n.eval(x / mu)).sum::<f64>() / v.len() as f64;
        return Ok(Estimate::new(s, s * 8.0 * f64::EPSILON));
    }
    let r = integrate(|t| n.eval(f.abs_eval(t) / mu), 0.0, 1.0, tol)?;
    Ok(Estimate::new(r.value, r.abs_error_estimate))
}

/// Luxemburg norm `inf { μ > 0 : E N(f/μ) ≤ 1 }`.
pub fn luxemburg_norm(f: &FunctionModel, n: &YoungOrlicz, tol: &Tolerances) -> Result<Estimate> {
    tol.validate()?;
    let mtol = tol.tightened(10.0);
    // ‖f‖_1 sets the starting scale; outside L^1 only α < 0 can still be finite
    let mu0 = match crate::function_model::lp_norm(f, 1.0, &mtol) {
        Ok(s) if s.value == 0.0 => return Ok(Estimate::exact(0.0)),
        Ok(s) => s.value,
        Err(Error::NormInfinite(_)) if n.alpha < 0.0 => 1.0,
        Err(e) => return Err(e),
    };
    // integrability does not depend on μ; probe where N(f/μ) cannot overflow
    let probe = mu0 * 1e6;
    match modular(f, n, probe, &mtol) {
        Err(Error::NonIntegrable(m)) => {
            return Err(Error::NormInfinite(format!(
                "E N(f/μ) diverges for {} (p = {}, alpha = {}): {m}",
                f.describe(),
                n.p,
                n.alpha
            )))
        }
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    if n.alpha < 0.0 {
        check_modular_monotone(f, n, mu0, &mtol)?;
    }

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let log_modular = |lam: f64| -> f64 {
        match modular(f, n, lam.exp(), &mtol) {
            Ok(m) if m.value > 0.0 => m.value.ln(),
            Ok(_) => f64::NEG_INFINITY,
            // overflow at small μ only
            Err(Error::NonIntegrable(_)) => LN_GUARD,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let lam0 = mu0.ln();
    let rtol = Tolerances { abs_tol: tol.rel_tol * 0.1, ..*tol };
    let root = find_root_monotone(&log_modular, lam0 - 1.0, lam0 + 1.0, &rtol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let lam = root.map_err(|e| match e {
        Error::NoBracket { .. } => Error::NormInfinite(format!(
            "E N(f/μ) > 1 for every μ up to the guard ({})",
            f.describe()
        )),
        other => other,
    })?;
    let mu = lam.exp();
    if mu > OVERFLOW_GUARD {
        return Err(Error::NormInfinite(format!("Luxemburg norm of {} overflows", f.describe())));
    }
    let m = modular(f, n, mu, &mtol)?;
    // |d ln M / d ln μ| ≥ p + min(α, 0)
    let slope = (n.p + n.alpha.min(0.0)).max(0.1);
    let err = mu * (m.error / m.value.max(f64::MIN_POSITIVE) / slope + rtol.abs_tol);
    Ok(Estimate::new(mu, err))
}

fn check_modular_monotone(f: &FunctionModel, n: &YoungOrlicz, mu0: f64, tol: &Tolerances) -> Result<()> {
    let mut prev = f64::INFINITY;
    for k in 0..33 {
        let mu = mu0 * (-8.0 + 16.0 * k as f64 / 32.0f64).exp();
        let m = match modular(f, n, mu, tol) {
            Ok(m) => m.value,
            Err(Error::NonIntegrable(_)) => continue,
            Err(e) => return Err(e),
        };
        if m > prev * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::ModularNonMonotone(format!(
                "E N(f/μ) increases near μ = {mu:e} for {} (p = {}, alpha = {})",
                f.describe(),
                n.p,
                n.alpha
            )));
        }
        prev = m;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    AlphaBelow1,
    AlphaEq1,
    AlphaAbove1,
}

impl Regime {
    pub fn of(alpha: f64) -> Regime {
        if alpha < 1.0 {
            Regime::AlphaBelow1
        } else if alpha == 1.0 {
            Regime::AlphaEq1
        } else {
            Regime::AlphaAbove1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    pub s: f64,
    pub p: f64,
    pub alpha: f64,
    pub delta: f64,
    pub j_value: f64,
    pub j_error: f64,
    /// Split point `t*` with `N(t*) = 1`.
    pub split: f64,
    pub regime: Regime,
    /// Filled by [`regime_fit`].
    pub fitted_exponent_or_slope: Option<f64>,
}

/// `J(α, p, s) = s ∫_0^∞ t^{s−1} min(1, 1/N(t)) dt` for `1 ≤ s < p`.
pub fn moment_bound_j(alpha: f64, p: f64, s: f64, tol: &Tolerances) -> Result<MomentBoundReport> {
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("J needs s ≥ 1, got {s}")));
    }
    if !(s < p) {
        return Err(Error::Domain(format!("J needs s < p, got s = {s}, p = {p}")));
    }
    let n = YoungOrlicz::new(p, alpha)?;
    if !n.is_increasing() {
        return Err(Error::Domain(format!("N is not increasing for p = {p}, alpha = {alpha}")));
    }
    let ts = n.inverse(1.0);
    let head = ts.powf(s);
    // t = t*·exp(y/δ) turns the slowly decaying tail into ∫ e^{-y}·(log factor)
    let delta = p - s;
    let lts = ts.ln();
    let integrand = |y: f64| {
        let l = lts + y / delta;
        (s * l - n.ln_eval_log(l)).exp()
    };
    let tail = integrate(integrand, 0.0, f64::INFINITY, tol)?;
    let tail = crate::numerics::QuadratureResult {
        value: tail.value / delta,
        abs_error_estimate: tail.abs_error_estimate / delta,
        ..tail
    };
    let j = head + s * tail.value;
    Ok(MomentBoundReport {
        s,
        p,
        alpha,
        delta: p - s,
        j_value: j,
        j_error: s * tail.abs_error_estimate + 4.0 * f64::EPSILON * head,
        split: ts,
        regime: Regime::of(alpha),
        fitted_exponent_or_slope: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFit {
    pub alpha: f64,
    pub p: f64,
    pub regime: Regime,
    /// `α < 1`: exponent `c` of `J ≈ A + B δ^c`; `α = 1`: slope of `J`
    /// against `|ln δ|`; `α > 1`: max/min ratio of `J`.
    pub value: f64,
    /// Coefficient of determination of the `α = 1` line fit.
    pub r_squared: Option<f64>,
    pub deltas: Vec<f64>,
    pub j_values: Vec<f64>,
}

/// Rate of growth of `J(α, p, p − δ)` as `δ → 0`.
pub fn regime_fit(alpha: f64, p: f64, deltas: &[f64], tol: &Tolerances) -> Result<RegimeFit> {
    if deltas.len() < 4 {
        return Err(Error::Domain(format!("regime fit needs at least 4 deltas, got {}", deltas.len())));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < p - 1.0)) {
        return Err(Error::Domain(format!("delta {d} outside (0, p − 1) = (0, {})", p - 1.0)));
    }
    let ratios: Vec<f64> = deltas.windows(2).map(|w| w[1] / w[0]).collect();
    let r0 = ratios[0];
    if ratios.iter().any(|r| (r / r0 - 1.0).abs() > 0.05 || (r - 1.0).abs() < 1e-3) {
        return Err(Error::Domain("deltas must be geometrically spaced".into()));
    }
    let reports: Vec<Result<MomentBoundReport>> =
        crate::par::map(deltas, |&d| moment_bound_j(alpha, p, p - d, tol));
    let mut j_values = Vec::with_capacity(deltas.len());
    for r in reports {
        j_values.push(r?.j_value);
    }
    let regime = Regime::of(alpha);
    let (value, r_squared) = match regime {
        Regime::AlphaBelow1 => (power_exponent_fit(deltas, &j_values, tol)?, None),
        Regime::AlphaEq1 => {
            let xs: Vec<f64> = deltas.iter().map(|d| d.ln().abs()).collect();
            let (slope, _, r2) = linear_fit(&xs, &j_values, None);
            (slope, Some(r2))
        }
        Regime::AlphaAbove1 => {
            let mx = j_values.iter().cloned().fold(f64::MIN, f64::max);
            let mn = j_values.iter().cloned().fold(f64::MAX, f64::min);
            (mx / mn, None)
        }
    };
    Ok(RegimeFit { alpha, p, regime, value, r_squared, deltas: deltas.to_vec(), j_values })
}

/// Weighted least squares `y ≈ a + b x`; returns `(b, a, R²)`.
fn linear_fit(xs: &[f64], ys: &[f64], w: Option<&[f64]>) -> (f64, f64, f64) {
    let wt = |i: usize| w.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..xs.len()).map(wt).sum();
    let mx = (0..xs.len()).map(|i| wt(i) * xs[i]).sum::<f64>() / sw;
    let my = (0..xs.len()).map(|i| wt(i) * ys[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..xs.len()).map(|i| wt(i) * (xs[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..xs.len()).map(|i| wt(i) * (xs[i] - mx) * (ys[i] - my)).sum();
    let syy: f64 = (0..xs.len()).map(|i| wt(i) * (ys[i] - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (b, a, r2)
}

/// Exponent `c` of the relative least-squares fit `J ≈ A + B δ^c`.
fn power_exponent_fit(deltas: &[f64], js: &[f64], tol: &Tolerances) -> Result<f64> {
    let weights: Vec<f64> = js.iter().map(|j| 1.0 / (j * j)).collect();
    let residual = |c: f64| -> f64 {
        let xs: Vec<f64> = deltas.iter().map(|d| d.powf(c)).collect();
        let (b, a, _) = linear_fit(&xs, js, Some(&weights));
        (0..js.len()).map(|i| weights[i] * (a + b * xs[i] - js[i]).powi(2)).sum()
    };
    let opt = optimize_1d_with(residual, -4.0, -1e-3, Sense::Min, tol, 256)?;
    Ok(opt.argopt)
}

/// `‖f‖ under N(C·)` against `C ‖f‖_N`.
pub fn dilation_check(f: &FunctionModel, n: &YoungOrlicz, c: f64, tol: &Tolerances) -> Result<VerificationReport> {
    let dilated = n.with_dilation(n.dilation * c)?;
    let lhs = luxemburg_norm(f, &dilated, tol)?;
    let rhs = luxemburg_norm(f, n, tol)?.scale(c);
    Ok(VerificationReport::equality("dilation", lhs, rhs, 1e-6)
        .param("p", n.p)
        .param("alpha", n.alpha)
        .param("C", c)
        .label("function", f.describe()))
}

/// `N1 ≤ N2` pointwise implies `‖f‖_{N1} ≤ ‖f‖_{N2}`.
pub fn monotonicity_check(
    f: &FunctionModel,
    n1: &YoungOrlicz,
    n2: &YoungOrlicz,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    for k in 0..=240 {
        let u = 10f64.powf(-6.0 + 12.0 * k as f64 / 240.0);
        let (a, b) = (n1.eval(u), n2.eval(u));
        if a > b * (1.0 + 1e-12) {
            return Err(Error::PreconditionUnmet(format!(
                "N1({u:e}) = {a:e} exceeds N2({u:e}) = {b:e}"
            )));
        }
    }
    let lhs = luxemburg_norm(f, n1, tol)?;
    let rhs = luxemburg_norm(f, n2, tol)?;
    Ok(VerificationReport::inequality("monotonicity", lhs, rhs, 1e-8)
        .param("p1", n1.p)
        .param("alpha1", n1.alpha)
        .param("p2", n2.p)
        .param("alpha2", n2.alpha)
        .label("function", f.describe()))
}

/// Points where [`tail_domination_check`] compares the tail and envelope.
pub fn tail_grid(k: f64) -> Vec<f64> {
    (0..64).map(|i| k * 10f64.powf(-2.0 + 4.0 * i as f64 / 63.0)).collect()
}

/// `P(|f| > t) ≤ Δ(t / K) + 1e-6` with `K` the Luxemburg norm of `f`.
pub fn tail_domination_check(f: &FunctionModel, n: &YoungOrlicz, tol: &Tolerances) -> Result<VerificationReport> {
    let k = luxemburg_norm(f, n, tol)?;
    let tail = tail_of(f)?;
    let grid = tail_grid(k.value);
    let (worst_t, excess) = grid
        .iter()
        .map(|&t| (t, tail.eval(t) - n.delta(t / k.value)))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(
        VerificationReport::inequality("tail", Estimate::exact(excess), Estimate::exact(1e-6), 0.0)
            .param("p", n.p)
            .param("alpha", n.alpha)
            .param("K", k.value)
            .param("K_error", k.error)
            .param("worst_t", worst_t)
            .label("function", f.describe())
            .note("lhs is the largest excess of the tail over the envelope on 64 grid points"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::parse_expression;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Root of `(1/μ) ln(e + 1/μ) = 1` by plain bisection.
    fn scalar_oracle() -> f64 {
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if (1.0 / m) * (std::f64::consts::E + 1.0 / m).ln() > 1.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        lo
    }

    #[test]
    fn young_values() {
        let n = YoungOrlicz::new(2.0, 0.0).unwrap();
        assert!((n.eval(3.0) - 9.0).abs() < 1e-12);
        assert_eq!(YoungOrlicz::new(2.0, 1.0).unwrap().eval(0.0), 0.0);
        let n11 = YoungOrlicz::new(1.0, 1.0).unwrap();
        assert!((n11.eval(1.0) - (std::f64::consts::E + 1.0).ln()).abs() < 1e-14);
        assert_eq!(n.eval(1e200), f64::INFINITY);
    }

    #[test]
    fn delta_values() {
        let n = YoungOrlicz::new(2.0, 0.0).unwrap();
        assert_eq!(n.delta(1.0), 1.0);
        assert!((n.delta(2.0) - 0.25).abs() < 1e-15);
        assert!((n.delta(10.0) - 0.01).abs() < 1e-15);
        assert!((scaled_tail_bound(&n, 2.0, 4.0) - 0.25).abs() < 1e-15);
        assert_eq!(scaled_tail_bound(&n, 2.0, 0.0), 1.0);
    }

    #[test]
    fn inverse_round_trip() {
        for &(p, a) in &[(1.0, 1.0), (2.0, 0.0), (3.0, -1.0), (5.0, 3.0)] {
            let n = YoungOrlicz::new(p, a).unwrap();
            for &y in &[1e-6, 0.5, 1.0, 7.0, 1e200] {
                let u = n.inverse(y);
                assert!(((n.eval(u) - y) / y).abs() < 1e-12, "p={p} a={a} y={y}");
            }
        }
    }

    #[test]
    fn luxemburg_constants() {
        let one = FunctionModel::constant(1.0).unwrap();
        let n11 = YoungOrlicz::new(1.0, 1.0).unwrap();
        let mu = luxemburg_norm(&one, &n11, &tol()).unwrap();
        assert!((mu.value - scalar_oracle()).abs() < 1e-9);
        assert!((mu.value - 1.26).abs() < 0.01);
        let c = parse_expression("2.5").unwrap();
        let mu = luxemburg_norm(&c, &YoungOrlicz::new(3.0, 0.0).unwrap(), &tol()).unwrap();
        assert!((mu.value - 2.5).abs() < 1e-8);
        let z = FunctionModel::constant(0.0).unwrap();
        assert_eq!(luxemburg_norm(&z, &n11, &tol()).unwrap().value, 0.0);
    }

    #[test]
    fn luxemburg_infinite() {
        let f = parse_expression("t^(-0.5)").unwrap();
        let r = luxemburg_norm(&f, &YoungOrlicz::new(2.0, 1.0).unwrap(), &tol());
        assert!(matches!(r, Err(Error::NormInfinite(_))), "{r:?}");
    }

    #[test]
    fn modular_is_normalized() {
        let f = parse_expression("t^(-0.1)").unwrap();
        let n = YoungOrlicz::new(2.0, 1.0).unwrap();
        let mu = luxemburg_norm(&f, &n, &tol()).unwrap();
        let m = modular(&f, &n, mu.value, &tol()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn j_closed_form() {
        for &(p, s) in &[(2.0, 1.0), (3.0, 1.0), (3.0, 2.5)] {
            let r = moment_bound_j(0.0, p, s, &tol()).unwrap();
            let want = 1.0 + s / (p - s);
            assert!(((r.j_value - want) / want).abs() < 1e-6, "p={p} s={s}: {}", r.j_value);
        }
        assert!(moment_bound_j(0.0, 2.0, 2.0, &tol()).is_err());
    }

    #[test]
    fn dilation_identity() {
        let one = FunctionModel::constant(1.0).unwrap();
        let n11 = YoungOrlicz::new(1.0, 1.0).unwrap();
        let r = dilation_check(&one, &n11, 2.0, &tol()).unwrap();
        assert!(r.passed());
        assert!((r.lhs - 2.0 * scalar_oracle()).abs() < 1e-8);
        let r = dilation_check(&one, &n11, 1.0, &tol()).unwrap();
        assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn monotonicity_direction() {
        let f = parse_expression("t^(-0.1)").unwrap();
        let n1 = YoungOrlicz::new(2.0, 0.0).unwrap();
        let n2 = YoungOrlicz::new(2.0, 1.0).unwrap();
        let r = monotonicity_check(&f, &n1, &n2, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.lhs < r.rhs);
        let bad = monotonicity_check(&f, &YoungOrlicz::new(1.0, 0.0).unwrap(), &n1, &tol());
        assert!(matches!(bad, Err(Error::PreconditionUnmet(_))));
    }
}
