//! Weighted rearrangement norms, the Hölder bound and its best constant over
//! pairs of Grand Lebesgue spaces, the Zygmund-to-Lebesgue embedding constant
//! `Θ(r, p, γ)` with a sharpness harness, and the lower and inverse estimates
//! built on `κ[g](s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_model::{lp_norm, rearrangement, FunctionModel, ModelKind};
use crate::grand_spaces::{gls_norm, GeneratingFunction};
use crate::numerics::{gamma, integrate, ln_gamma, optimize_1d, optimize_1d_with, Sense, Tolerances};
use crate::orlicz::{luxemburg_norm, YoungOrlicz};
use crate::par;
use crate::report::{Estimate, VerificationReport};

const HOLDER_SLACK: f64 = 1e-6;
const GLS_WEIGHTED_SLACK: f64 = 1e-5;
const EMBEDDING_SLACK: f64 = 1e-5;
const MONOTONE_GRID: usize = 1024;
/// Scan points for `κ`; each evaluation is a Luxemburg root solve.
pub const KAPPA_GRID_POINTS: usize = 64;

/// `Θ(r, p, γ) = Γ(γp/(p−r) + 1)^{(p−r)/(pr)}`.
pub fn theta(r: f64, p: f64, gamma_: f64) -> Result<f64> {
    if !(r >= 1.0 && r < p && p.is_finite() && gamma_ >= 0.0) {
        return Err(Error::Domain(format!("theta needs 1 ≤ r < p < ∞ and γ ≥ 0, got ({r}, {p}, {gamma_})")));
    }
    if gamma_ == 0.0 {
        return Ok(1.0);
    }
    let x = gamma_ * p / (p - r) + 1.0;
    let e = (p - r) / (p * r);
    match gamma(x) {
        Ok(g) if g.is_finite() => Ok(g.powf(e)),
        _ => Ok((e * ln_gamma(x)?).exp()),
    }
}

/// Non-negative integrable weight `S` on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    model: FunctionModel,
    l1: f64,
}

impl WeightFunction {
    pub fn new(model: FunctionModel, tol: &Tolerances) -> Result<WeightFunction> {
        for t in crate::function_model::unit_grid(512) {
            let v = model.eval(t);
            if v.is_nan() || v < 0.0 {
                return Err(Error::Invalid(format!("weight {} is negative at t = {t:e}", model.describe())));
            }
        }
        let l1 = lp_norm(&model, 1.0, tol).map_err(|e| match e {
            Error::NormInfinite(m) => Error::Invalid(format!("weight is not integrable: {m}")),
            other => other,
        })?;
        Ok(WeightFunction { model, l1: l1.value })
    }

    pub fn model(&self) -> &FunctionModel {
        &self.model
    }

    /// `∫_0^1 S`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    fn eval(&self, t: f64) -> f64 {
        self.model.eval(t).max(0.0)
    }
}

fn infinite_to_norm(e: Error) -> Error {
    match e {
        Error::NonIntegrable(m) => Error::NormInfinite(m),
        other => other,
    }
}

/// `|f|` is non-increasing on a fine grid, so `f* = |f|`.
fn grid_non_increasing(f: &FunctionModel) -> bool {
    let g = crate::function_model::unit_grid(MONOTONE_GRID);
    let vals: Vec<f64> = g.iter().map(|&t| f.abs_eval(t)).collect();
    vals.iter().all(|v| v.is_finite()) && vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14))
}

/// `∫_0^1 (f*)^r w dt`.
pub fn star_power_integral<W: Fn(f64) -> f64>(
    f: &FunctionModel,
    r: f64,
    w: &W,
    tol: &Tolerances,
) -> Result<Estimate> {
    match f.kind() {
        ModelKind::Tabulated(v) => {
            let mut s: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            let n = s.len() as f64;
            let mut total = 0.0;
            let mut err = 0.0;
            for (k, x) in s.iter().enumerate() {
                let c = integrate(w, k as f64 / n, (k + 1) as f64 / n, tol).map_err(infinite_to_norm)?;
                let xr = x.powf(r);
                total += xr * c.value;
                err += xr * c.abs_error_estimate;
            }
            Ok(Estimate::new(total, err))
        }
        ModelKind::Rearranged { profile, .. } => {
            let (v, e) = profile.weighted_power_integral(r, w, tol)?;
            Ok(Estimate::new(v, e))
        }
        ModelKind::PrescribedTail(_) => {
            let q = integrate(|t| f.abs_eval(t).powf(r) * w(t), 0.0, 1.0, tol).map_err(infinite_to_norm)?;
            Ok(Estimate::new(q.value, q.abs_error_estimate))
        }
        ModelKind::Expression(_) => {
            if grid_non_increasing(f) {
                let q = integrate(|t| f.abs_eval(t).powf(r) * w(t), 0.0, 1.0, tol).map_err(infinite_to_norm)?;
                Ok(Estimate::new(q.value, q.abs_error_estimate))
            } else {
                star_power_integral(&rearrangement(f)?, r, w, tol)
            }
        }
    }
}

/// `‖f‖_[S] = ∫_0^1 f*(t) S(t) dt`.
pub fn weighted_norm(f: &FunctionModel, s: &WeightFunction, tol: &Tolerances) -> Result<Estimate> {
    let v = star_power_integral(f, 1.0, &|t| s.eval(t), tol)?;
    if !v.value.is_finite() {
        return Err(Error::NormInfinite(format!("‖{}‖_[S] overflows", f.describe())));
    }
    Ok(v)
}

fn norm_or_infinite(r: Result<Estimate>) -> Result<Estimate> {
    match r {
        Err(e) if e.is_infinite() => Ok(Estimate::exact(f64::INFINITY)),
        other => other,
    }
}

/// `‖f‖_[S] ≤ ‖f‖_p · ‖S‖_{p'}`.
pub fn holder_bound_check(
    f: &FunctionModel,
    s: &WeightFunction,
    p: f64,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("Hölder bound needs 1 < p < ∞, got {p}")));
    }
    let q = conjugate(p);
    let lhs = weighted_norm(f, s, tol)?;
    let nf = norm_or_infinite(lp_norm(f, p, tol))?;
    let ns = norm_or_infinite(lp_norm(&s.model, q, tol))?;
    Ok(VerificationReport::inequality("holder", lhs, nf.mul(ns), HOLDER_SLACK)
        .param("p", p)
        .param("p_conjugate", q)
        .param("norm_f_p", nf.value)
        .param("norm_s_p_conjugate", ns.value)
        .label("f", f.describe())
        .label("S", s.model.describe()))
}

/// `p/(p−1)`, with `1 ↔ ∞`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Result of [`zeta_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zeta {
    pub value: f64,
    /// Minimizing `p`; `None` on an empty feasible set.
    pub argmin_p: Option<f64>,
    /// Open interval of `p ∈ (a, b)` with `p' ∈ (c, d)`.
    pub feasible: Option<(f64, f64)>,
}

/// `{p ∈ (a, b) : p/(p−1) ∈ (c, d)}` for non-degenerate `ψ`, `ν`.
pub fn feasible_interval(psi: &GeneratingFunction, nu: &GeneratingFunction) -> Option<(f64, f64)> {
    let (a, b) = psi.domain();
    let (c, d) = nu.domain();
    // conjugation is decreasing, so (c, d) pulls back to (d', c')
    let lo = a.max(conjugate(d));
    let hi = b.min(conjugate(c));
    (lo < hi).then_some((lo, hi))
}

fn same_point(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

/// `ζ = inf_p ψ(p) · ν(p/(p−1))` over the feasible `p`; `+∞` when none is.
pub fn zeta_constant(psi: &GeneratingFunction, nu: &GeneratingFunction, tol: &Tolerances) -> Result<Zeta> {
    let empty = Zeta { value: f64::INFINITY, argmin_p: None, feasible: None };
    match (psi.degenerate_point(), nu.degenerate_point()) {
        (Some(r), Some(s)) => {
            if same_point(conjugate(r), s) {
                return Ok(Zeta { value: 1.0, argmin_p: Some(r), feasible: Some((r, r)) });
            }
            return Ok(empty);
        }
        (Some(r), None) => {
            let v = nu.eval(conjugate(r));
            if v.is_finite() {
                return Ok(Zeta { value: psi.eval(r) * v, argmin_p: Some(r), feasible: Some((r, r)) });
            }
            return Ok(empty);
        }
        (None, Some(s)) => {
            let p = conjugate(s);
            let v = psi.eval(p);
            if v.is_finite() {
                return Ok(Zeta { value: v * nu.eval(s), argmin_p: Some(p), feasible: Some((p, p)) });
            }
            return Ok(empty);
        }
        (None, None) => {}
    }
    let Some((lo, hi)) = feasible_interval(psi, nu) else {
        return Ok(empty);
    };
    let h = |p: f64| psi.eval(p) * nu.eval(conjugate(p));
    let opt = optimize_1d(h, lo, hi, Sense::Min, tol)?;
    Ok(Zeta { value: opt.opt, argmin_p: Some(opt.argopt), feasible: Some((lo, hi)) })
}

/// `‖f‖_[S] ≤ ζ · ‖f‖_{Gψ} · ‖S‖_{Gν}`.
pub fn gls_weighted_bound_check(
    f: &FunctionModel,
    s: &WeightFunction,
    psi: &GeneratingFunction,
    nu: &GeneratingFunction,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let lhs = weighted_norm(f, s, tol)?;
    let zeta = zeta_constant(psi, nu, tol)?;
    let gf = gls_norm(f, psi, tol);
    let gs = gls_norm(&s.model, nu, tol);
    let tag = |r: VerificationReport| {
        r.label("f", f.describe())
            .label("S", s.model.describe())
            .label("psi", psi.describe())
            .label("nu", nu.describe())
    };
    let (gf, gs) = match (gf, gs) {
        (Ok(a), Ok(b)) if zeta.value.is_finite() => (a, b),
        (Err(e), _) | (_, Err(e)) if !e.is_infinite() => return Err(e),
        _ => {
            let why = if zeta.value.is_infinite() {
                "ζ = +∞: no conjugate pair is feasible"
            } else {
                "a Grand Lebesgue norm is infinite"
            };
            return Ok(tag(VerificationReport::inconclusive("gls-weighted", why).param("zeta", zeta.value)));
        }
    };
    let rhs = Estimate::new(zeta.value, zeta.value * 1e-10).mul(gf.estimate()).mul(gs.estimate());
    Ok(tag(
        VerificationReport::inequality("gls-weighted", lhs, rhs, GLS_WEIGHTED_SLACK)
            .param("zeta", zeta.value)
            .param("gls_f", gf.value)
            .param("gls_s", gs.value)
            .param("zeta_argmin_p", zeta.argmin_p.unwrap_or(f64::NAN)),
    ))
}

/// Functional used for the left side of the embedding inequality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZygmundNorm {
    /// `(∫_0^1 (g*)^r |ln t|^γ dt)^{1/r}`.
    #[default]
    LorentzZygmund,
    /// Luxemburg norm for `N_{r,γ}`.
    Luxemburg,
}

impl ZygmundNorm {
    pub fn name(self) -> &'static str {
        match self {
            ZygmundNorm::LorentzZygmund => "lorentz_zygmund",
            ZygmundNorm::Luxemburg => "luxemburg",
        }
    }
}

/// `(∫_0^1 (g*)^r |ln t|^γ dt)^{1/r}`.
pub fn lorentz_zygmund_norm(g: &FunctionModel, r: f64, gamma_: f64, tol: &Tolerances) -> Result<Estimate> {
    if !(r >= 1.0) || !(gamma_ >= 0.0) {
        return Err(Error::Domain(format!("needs r ≥ 1 and γ ≥ 0, got ({r}, {gamma_})")));
    }
    let w = |t: f64| if gamma_ == 0.0 { 1.0 } else { t.ln().abs().powf(gamma_) };
    let i = star_power_integral(g, r, &w, tol)?;
    if i.value <= 0.0 {
        return Ok(Estimate::new(0.0, i.error.powf(1.0 / r)));
    }
    let v = i.value.powf(1.0 / r);
    if !v.is_finite() {
        return Err(Error::NormInfinite(format!("‖{}‖_({r},{gamma_}) overflows", g.describe())));
    }
    Ok(Estimate::new(v, v * i.error / i.value / r))
}

/// Left side of the embedding inequality under `variant`.
pub fn zygmund_norm(
    g: &FunctionModel,
    r: f64,
    gamma_: f64,
    variant: ZygmundNorm,
    tol: &Tolerances,
) -> Result<Estimate> {
    match variant {
        ZygmundNorm::LorentzZygmund => lorentz_zygmund_norm(g, r, gamma_, tol),
        ZygmundNorm::Luxemburg => luxemburg_norm(g, &YoungOrlicz::new(r, gamma_)?, tol),
    }
}

/// `‖g‖_{r,γ} ≤ Θ(r, p, γ) · ‖g‖_p`.
pub fn embedding_check(
    g: &FunctionModel,
    r: f64,
    p: f64,
    gamma_: f64,
    variant: ZygmundNorm,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    embedding_check_scaled(g, r, p, gamma_, variant, 1.0, tol)
}

/// [`embedding_check`] against `constant_scale · Θ`.
pub fn embedding_check_scaled(
    g: &FunctionModel,
    r: f64,
    p: f64,
    gamma_: f64,
    variant: ZygmundNorm,
    constant_scale: f64,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let th = theta(r, p, gamma_)?;
    let np = lp_norm(g, p, tol)?;
    let lhs = zygmund_norm(g, r, gamma_, variant, tol)?;
    let c = th * constant_scale;
    let rhs = Estimate::new(c, c * 1e-14).mul(np);
    Ok(VerificationReport::inequality("embedding", lhs, rhs, EMBEDDING_SLACK)
        .param("r", r)
        .param("p", p)
        .param("gamma", gamma_)
        .param("theta", th)
        .param("constant_scale", constant_scale)
        .param("norm_p", np.value)
        .label("g", g.describe())
        .label("lhs_norm", variant.name()))
}

/// One member of the sharpness family `|ln t|^κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCandidate {
    pub kappa: f64,
    pub label: String,
    pub u_value: f64,
    pub norm_p: f64,
    pub ratio: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub gamma: f64,
    pub r: f64,
    pub p: f64,
    pub theta: f64,
    pub best_ratio_found: f64,
    pub best_kappa: f64,
    pub maximizer_label: String,
    pub gap: f64,
    /// `r > 1`: the functional is `(∫ (f*)^r |ln t|^γ)^{1/r}` and the
    /// result carries no sharpness claim.
    pub exploratory: bool,
    pub candidates: Vec<SharpnessCandidate>,
}

impl SharpnessReport {
    /// `best_ratio_found ≤ Θ·(1 + 1e−6)`.
    pub fn within_bound(&self) -> bool {
        self.best_ratio_found <= self.theta * (1.0 + 1e-6)
    }

    pub fn candidate(&self, label: &str) -> Option<&SharpnessCandidate> {
        self.candidates.iter().find(|c| c.label == label)
    }
}

/// Candidate exponents: the Hölder-equality `γ/(p−r)`, `γ/(p−1)`, the
/// printed `γp/(p−1)`, and a uniform grid reaching twice the largest.
pub fn sharpness_kappas(r: f64, p: f64, gamma_: f64) -> Vec<(f64, String)> {
    let mut out = vec![
        (gamma_ / (p - 1.0), "holder".to_string()),
        (gamma_ * p / (p - 1.0), "printed".to_string()),
    ];
    if r != 1.0 {
        out.push((gamma_ / (p - r), "holder_r".to_string()));
    }
    let top = 2.0 * (gamma_ * p / (p - 1.0)).max(1.0);
    for k in 0..=32 {
        out.push((top * k as f64 / 32.0, format!("grid_{k}")));
    }
    out
}

fn log_power(kappa: f64) -> Result<FunctionModel> {
    Ok(FunctionModel::expression(&format!("abs(ln(t))^({kappa:e})"))?.with_label(format!("|ln t|^{kappa}")))
}

/// Scans `U(f)/‖f‖_p` over `f = |ln t|^κ`.
pub fn sharpness_search(r: f64, p: f64, gamma_: f64, tol: &Tolerances) -> Result<SharpnessReport> {
    let th = theta(r, p, gamma_)?;
    let kappas = sharpness_kappas(r, p, gamma_);
    let results = par::map(&kappas, |(kappa, label)| -> Result<SharpnessCandidate> {
        let f = log_power(*kappa)?;
        let u = lorentz_zygmund_norm(&f, r, gamma_, tol)?;
        let n = lp_norm(&f, p, tol)?;
        let ratio = u.value / n.value;
        Ok(SharpnessCandidate {
            kappa: *kappa,
            label: label.clone(),
            u_value: u.value,
            norm_p: n.value,
            ratio,
            error: ratio * (u.relative_error() + n.relative_error()),
        })
    });
    let candidates = results.into_iter().collect::<Result<Vec<_>>>()?;
    let best = candidates
        .iter()
        .filter(|c| c.ratio.is_finite())
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .ok_or(Error::AllSingular)?;
    Ok(SharpnessReport {
        gamma: gamma_,
        r,
        p,
        theta: th,
        best_ratio_found: best.ratio,
        best_kappa: best.kappa,
        maximizer_label: best.label.clone(),
        gap: th - best.ratio,
        exploratory: r != 1.0,
        candidates,
    })
}

fn bracket(s: f64, p: f64) -> f64 {
    s / (p - s)
}

/// `‖g‖_{p,−β}`: the Luxemburg norm for `N_{p,−β}`.
pub fn negative_log_norm(g: &FunctionModel, p: f64, beta: f64, tol: &Tolerances) -> Result<Estimate> {
    luxemburg_norm(g, &YoungOrlicz::new(p, -beta)?, tol)
}

/// `R(p) = ‖g‖_{p,−β} / ([s/(p−s)]^{−β/s} ‖g‖_s)` at every grid point.
pub fn lower_estimate_ratios(
    g: &FunctionModel,
    beta: f64,
    s: f64,
    p_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<(f64, Estimate)>> {
    if !(beta > 0.0) || !(s >= 1.0) {
        return Err(Error::Domain(format!("needs β > 0 and s ≥ 1, got ({beta}, {s})")));
    }
    if let Some(p) = p_grid.iter().find(|p| !(**p > s) || !p.is_finite()) {
        return Err(Error::Domain(format!("grid point p = {p} is not in (s, ∞) for s = {s}")));
    }
    let ns = lp_norm(g, s, tol)?;
    let rows = par::map(p_grid, |&p| -> Result<(f64, Estimate)> {
        let lux = negative_log_norm(g, p, beta, tol)?;
        let w = bracket(s, p).powf(-beta / s);
        let denom = ns.scale(w);
        let v = lux.value / denom.value;
        Ok((p, Estimate::new(v, v * (lux.relative_error() + denom.relative_error()))))
    });
    rows.into_iter().collect()
}

/// Empirical lower constant `min_p R(p)`; passes when it is finite and
/// positive.
pub fn lower_estimate_check(
    g: &FunctionModel,
    beta: f64,
    s: f64,
    p_grid: &[f64],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let rows = lower_estimate_ratios(g, beta, s, p_grid, tol)?;
    let (p_min, min) = rows
        .iter()
        .copied()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .ok_or_else(|| Error::Invalid("empty p grid".into()))?;
    Ok(VerificationReport::certificate("lower", min)
        .param("beta", beta)
        .param("s", s)
        .param("argmin_p", p_min)
        .param("grid_points", rows.len() as f64)
        .label("g", g.describe())
        .note("lhs is min over the grid of ‖g‖_{p,−β} / ([s/(p−s)]^{−β/s} ‖g‖_s)"))
}

/// Weight in front of `‖g‖_{p,−β}` inside `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaVariant {
    /// `s/(p−s)`.
    Plain,
    /// `[s/(p−s)]^{β/s}`.
    Exponent,
}

impl KappaVariant {
    pub fn name(self) -> &'static str {
        match self {
            KappaVariant::Plain => "plain",
            KappaVariant::Exponent => "exponent",
        }
    }

    pub fn weight(self, s: f64, p: f64, beta: f64) -> f64 {
        match self {
            KappaVariant::Plain => bracket(s, p),
            KappaVariant::Exponent => bracket(s, p).powf(beta / s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub argmin_p: f64,
    pub variant: KappaVariant,
}

/// `κ[g](s) = inf_{p ∈ domain} w(s, p) · ‖g‖_{p,−β}`.
pub fn kappa(
    g: &FunctionModel,
    s: f64,
    beta: f64,
    p_domain: (f64, f64),
    variant: KappaVariant,
    tol: &Tolerances,
) -> Result<Kappa> {
    kappa_with(g, s, beta, p_domain, variant, KAPPA_GRID_POINTS, tol)
}

/// [`kappa`] with an explicit scan resolution.
pub fn kappa_with(
    g: &FunctionModel,
    s: f64,
    beta: f64,
    p_domain: (f64, f64),
    variant: KappaVariant,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<Kappa> {
    let (lo, hi) = p_domain;
    if !(s >= 1.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!("κ needs s ≥ 1 and β > 0, got ({s}, {beta})")));
    }
    if !(lo >= s && lo < hi) {
        return Err(Error::Domain(format!("p domain ({lo}, {hi}) is not a non-empty subset of (s, ∞), s = {s}")));
    }
    let h = |p: f64| {
        if !(p > s) {
            return f64::INFINITY;
        }
        match negative_log_norm(g, p, beta, tol) {
            Ok(n) => variant.weight(s, p, beta) * n.value,
            Err(e) if e.is_infinite() => f64::INFINITY,
            Err(_) => f64::NAN,
        }
    };
    match optimize_1d_with(h, lo, hi, Sense::Min, tol, grid_points) {
        Ok(o) => Ok(Kappa { value: o.opt, argmin_p: o.argopt, variant }),
        Err(Error::AllSingular) => Ok(Kappa { value: f64::INFINITY, argmin_p: f64::NAN, variant }),
        Err(e) => Err(e),
    }
}

/// `sup_s ‖g‖_s / κ[g](s)` over `s_grid`, the Grand Lebesgue norm of `g`
/// for `υ = κ[g]`, reported as an empirical constant.
pub fn inverse_embedding_check(
    g: &FunctionModel,
    beta: f64,
    s_grid: &[f64],
    p_domain: (f64, f64),
    variant: KappaVariant,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    inverse_embedding_check_with(g, beta, s_grid, p_domain, variant, KAPPA_GRID_POINTS, tol)
}

/// [`inverse_embedding_check`] with an explicit `κ` scan resolution.
pub fn inverse_embedding_check_with(
    g: &FunctionModel,
    beta: f64,
    s_grid: &[f64],
    p_domain: (f64, f64),
    variant: KappaVariant,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if s_grid.is_empty() {
        return Err(Error::Invalid("empty s grid".into()));
    }
    let (lo, hi) = p_domain;
    let rows = par::map(s_grid, |&s| -> Result<Option<(f64, Estimate)>> {
        let dom_lo = lo.max(s);
        if !(dom_lo < hi) {
            return Ok(None);
        }
        let k = kappa_with(g, s, beta, (dom_lo, hi), variant, grid_points, tol)?;
        if !k.value.is_finite() {
            return Ok(None);
        }
        let ns = lp_norm(g, s, tol)?;
        let v = ns.value / k.value;
        Ok(Some((s, Estimate::new(v, v * (ns.relative_error() + tol.rel_tol)))))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let tag = |r: VerificationReport| {
        r.param("beta", beta)
            .param("p_lo", lo)
            .param("p_hi", hi)
            .param("s_points", s_grid.len() as f64)
            .label("g", g.describe())
            .label("kappa_variant", variant.name())
    };
    if rows.iter().any(Option::is_none) {
        return Ok(tag(VerificationReport::inconclusive(
            "inverse",
            "κ[g](s) is +∞ or undefined on part of the s grid",
        )));
    }
    let (s_max, sup) = rows
        .into_iter()
        .flatten()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .expect("non-empty grid");
    Ok(tag(VerificationReport::certificate("inverse", sup).param("argmax_s", s_max)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grand_spaces::GeneratingFunction;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(src: &str) -> FunctionModel {
        FunctionModel::expression(src).unwrap()
    }

    fn w(src: &str) -> WeightFunction {
        WeightFunction::new(e(src), &tol()).unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(1.0, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(theta(1.7, 3.1, 0.0).unwrap(), 1.0);
        assert!((theta(1.0, 2.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((theta(1.0, 2.0, 2.0).unwrap() - 24f64.sqrt()).abs() < 1e-12);
        assert!(theta(2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn weighted_norm_cases() {
        let t = tol();
        let f = e("abs(ln(t))");
        let one = w("1");
        assert!((weighted_norm(&f, &one, &t).unwrap().value - 1.0).abs() < 1e-8);
        let lw = w("abs(ln(t))");
        assert!((weighted_norm(&f, &lw, &t).unwrap().value - 2.0).abs() < 1e-6);
        let c = FunctionModel::constant(3.0).unwrap();
        assert!((weighted_norm(&c, &lw, &t).unwrap().value - 3.0).abs() < 1e-8);
        // non-monotone input goes through the rearrangement
        let g = e("abs(sin(20*t))");
        let direct = lp_norm(&g, 1.0, &t).unwrap().value;
        assert!((weighted_norm(&g, &one, &t).unwrap().value - direct).abs() < 1e-5 * direct);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightFunction::new(e("t - 0.5"), &tol()).is_err());
        assert!(WeightFunction::new(e("1/t"), &tol()).is_err());
    }

    #[test]
    fn holder_equality_case() {
        let r = holder_bound_check(&e("abs(ln(t))"), &w("abs(ln(t))"), 2.0, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.lhs - 2.0).abs() < 1e-6 && (r.rhs - 2.0).abs() < 1e-6);
        let r = holder_bound_check(&e("t^(-0.2)"), &w("abs(ln(t))"), 2.0, &tol()).unwrap();
        assert!(r.passed() && r.margin > 1e-3);
    }

    #[test]
    fn zeta_cases() {
        let t = tol();
        let pr = GeneratingFunction::power_root(1.0).unwrap();
        let z = zeta_constant(&pr, &pr, &t).unwrap();
        assert!((z.value - 4.0).abs() < 1e-8, "{z:?}");
        let a = GeneratingFunction::power_root_on(1.0, 1.0, 2.0).unwrap();
        let b = GeneratingFunction::power_root_on(1.0, 1.0, 1.5).unwrap();
        let z = zeta_constant(&a, &b, &t).unwrap();
        assert!(z.value.is_infinite() && z.feasible.is_none());
        let d2 = GeneratingFunction::degenerate(2.0).unwrap();
        assert_eq!(zeta_constant(&d2, &d2, &t).unwrap().value, 1.0);
        let d3 = GeneratingFunction::degenerate(3.0).unwrap();
        assert!(zeta_constant(&d2, &d3, &t).unwrap().value.is_infinite());
    }

    #[test]
    fn degenerate_gls_weighted_matches_holder() {
        let t = tol();
        let f = e("t^(-0.2)");
        let s = w("abs(ln(t))");
        let d = GeneratingFunction::degenerate(2.0).unwrap();
        let g = gls_weighted_bound_check(&f, &s, &d, &d, &t).unwrap();
        let h = holder_bound_check(&f, &s, 2.0, &t).unwrap();
        assert!(g.passed());
        assert!((g.rhs - h.rhs).abs() < 1e-9 * h.rhs);
    }

    #[test]
    fn embedding_worked_case() {
        let r = embedding_check(&e("abs(ln(t))"), 1.0, 2.0, 1.0, ZygmundNorm::LorentzZygmund, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = embedding_check(&e("t^(-0.2)"), 1.0, 3.0, 0.0, ZygmundNorm::LorentzZygmund, &tol()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn halved_constant_fails() {
        let r = embedding_check_scaled(&e("abs(ln(t))"), 1.0, 2.0, 1.0, ZygmundNorm::LorentzZygmund, 0.5, &tol())
            .unwrap();
        assert_eq!(r.verdict, crate::report::Verdict::Fail);
    }

    #[test]
    fn sharpness_worked_case() {
        let s = sharpness_search(1.0, 2.0, 1.0, &tol()).unwrap();
        let h = s.candidate("holder").unwrap();
        assert!((h.u_value - 2.0).abs() < 1e-6);
        assert!((h.norm_p - 2f64.sqrt()).abs() < 1e-6);
        assert!(s.gap.abs() < 1e-4 && s.within_bound());
        let s0 = sharpness_search(1.0, 2.0, 0.0, &tol()).unwrap();
        assert!((s0.best_ratio_found - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kappa_plain_constant() {
        let one = FunctionModel::constant(1.0).unwrap();
        let k = kappa(&one, 1.0, 1e-9, (1.0, 2.0), KappaVariant::Plain, &tol()).unwrap();
        assert!((k.value - 1.0).abs() < 1e-6, "{k:?}");
        assert!((k.argmin_p - 2.0).abs() < 1e-6);
    }

    #[test]
    fn kappa_domain_monotone() {
        let g = e("t^(-0.1)");
        let k1 = kappa(&g, 2.0, 1.0, (2.5, 4.0), KappaVariant::Plain, &tol()).unwrap();
        let k2 = kappa(&g, 2.0, 1.0, (2.1, 8.0), KappaVariant::Plain, &tol()).unwrap();
        assert!(k2.value <= k1.value + 1e-10);
    }

    #[test]
    fn inverse_constant() {
        let c = FunctionModel::constant(2.0).unwrap();
        for v in [KappaVariant::Plain, KappaVariant::Exponent] {
            let r = inverse_embedding_check(&c, 1.0, &[1.0, 1.5, 2.0, 3.0], (1.0, 8.0), v, &tol()).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
