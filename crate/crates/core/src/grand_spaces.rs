//! Grand Lebesgue norms `sup_p ‖f‖_p / ψ(p)` and Grand Zygmund norms
//! `sup_{(p,γ) ∈ Q} ‖f‖_{p,γ} / ρ(p, γ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::function_model::{lp_norm, rearrangement, FunctionModel};
use crate::numerics::{optimize_1d, scan_grid, Sense, Tolerances};
use crate::orlicz::{luxemburg_norm, YoungOrlicz};
use crate::par;
use crate::report::{Estimate, VerificationReport};

const PSI_CHECK_POINTS: usize = 256;

/// JSON form of a [`GeneratingFunction`]. A missing `b` means `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    PowerRoot {
        m: f64,
        #[serde(default = "one")]
        a: f64,
        #[serde(default)]
        b: Option<f64>,
    },
    DoubleSingular {
        a: f64,
        b: f64,
        alpha: f64,
        beta: f64,
    },
    Degenerate {
        r: f64,
    },
    Custom {
        expr: String,
        #[serde(default = "one")]
        a: f64,
        #[serde(default)]
        b: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
enum PsiKind {
    PowerRoot { m: f64 },
    DoubleSingular { alpha: f64, beta: f64 },
    Degenerate { r: f64 },
    Custom(Expr),
}

/// A generating function `ψ` on `(a, b)`; `+∞` outside. The degenerate
/// function lives on the single point `a = b = r`.
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    kind: PsiKind,
    a: f64,
    b: f64,
}

impl GeneratingFunction {
    pub fn power_root(m: f64) -> Result<GeneratingFunction> {
        GeneratingFunction::power_root_on(m, 1.0, f64::INFINITY)
    }

    pub fn power_root_on(m: f64, a: f64, b: f64) -> Result<GeneratingFunction> {
        if !(m > 0.0) {
            return Err(Error::Invalid(format!("power root needs m > 0, got {m}")));
        }
        GeneratingFunction::checked(PsiKind::PowerRoot { m }, a, b)
    }

    pub fn double_singular(a: f64, b: f64, alpha: f64, beta: f64) -> Result<GeneratingFunction> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::Invalid(format!("exponents must be ≥ 0, got ({alpha}, {beta})")));
        }
        if !b.is_finite() {
            return Err(Error::Invalid("double singular function needs finite b".into()));
        }
        GeneratingFunction::checked(PsiKind::DoubleSingular { alpha, beta }, a, b)
    }

    pub fn degenerate(r: f64) -> Result<GeneratingFunction> {
        if !(r >= 1.0) {
            return Err(Error::Invalid(format!("degenerate function needs r ≥ 1, got {r}")));
        }
        Ok(GeneratingFunction { kind: PsiKind::Degenerate { r }, a: r, b: r })
    }

    pub fn custom(src: &str, a: f64, b: f64) -> Result<GeneratingFunction> {
        GeneratingFunction::checked(PsiKind::Custom(Expr::parse(src, &["p"])?), a, b)
    }

    pub fn from_spec(spec: &PsiSpec) -> Result<GeneratingFunction> {
        let inf = |b: &Option<f64>| b.unwrap_or(f64::INFINITY);
        match spec {
            PsiSpec::PowerRoot { m, a, b } => GeneratingFunction::power_root_on(*m, *a, inf(b)),
            PsiSpec::DoubleSingular { a, b, alpha, beta } => {
                GeneratingFunction::double_singular(*a, *b, *alpha, *beta)
            }
            PsiSpec::Degenerate { r } => GeneratingFunction::degenerate(*r),
            PsiSpec::Custom { expr, a, b } => GeneratingFunction::custom(expr, *a, inf(b)),
        }
    }

    pub fn to_spec(&self) -> PsiSpec {
        let b = if self.b.is_finite() { Some(self.b) } else { None };
        match &self.kind {
            PsiKind::PowerRoot { m } => PsiSpec::PowerRoot { m: *m, a: self.a, b },
            PsiKind::DoubleSingular { alpha, beta } => {
                PsiSpec::DoubleSingular { a: self.a, b: self.b, alpha: *alpha, beta: *beta }
            }
            PsiKind::Degenerate { r } => PsiSpec::Degenerate { r: *r },
            PsiKind::Custom(e) => PsiSpec::Custom { expr: e.source().to_string(), a: self.a, b },
        }
    }

    fn checked(kind: PsiKind, a: f64, b: f64) -> Result<GeneratingFunction> {
        if !(a >= 1.0 && a < b) {
            return Err(Error::Invalid(format!("domain needs 1 ≤ a < b ≤ ∞, got ({a}, {b})")));
        }
        let g = GeneratingFunction { kind, a, b };
        let mut inf = f64::INFINITY;
        for p in scan_grid(a, b, PSI_CHECK_POINTS) {
            let v = g.eval(p);
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("{}: ψ({p}) = {v} is not positive", g.describe())));
            }
            inf = inf.min(v);
        }
        if !(inf > 0.0) {
            return Err(Error::Invalid(format!("{}: infimum over the domain is 0", g.describe())));
        }
        Ok(g)
    }

    /// Domain endpoints `(a, b)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn degenerate_point(&self) -> Option<f64> {
        match self.kind {
            PsiKind::Degenerate { r } => Some(r),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            PsiKind::PowerRoot { m } => format!("p^(1/{m}) on ({}, {})", self.a, self.b),
            PsiKind::DoubleSingular { alpha, beta } => {
                format!("(p-{a})^(-{alpha})·({b}-p)^(-{beta})", a = self.a, b = self.b)
            }
            PsiKind::Degenerate { r } => format!("degenerate at {r}"),
            PsiKind::Custom(e) => format!("{} on ({}, {})", e.source(), self.a, self.b),
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        if let PsiKind::Degenerate { r } = self.kind {
            return if p == r { 1.0 } else { f64::INFINITY };
        }
        if !(p > self.a && p < self.b) {
            return f64::INFINITY;
        }
        match &self.kind {
            PsiKind::PowerRoot { m } => p.powf(1.0 / m),
            PsiKind::DoubleSingular { alpha, beta } => {
                (p - self.a).powf(-alpha) * (self.b - p).powf(-beta)
            }
            PsiKind::Custom(e) => e.eval1(p),
            PsiKind::Degenerate { .. } => unreachable!(),
        }
    }
}

/// Value of a Grand Lebesgue norm and where the supremum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlsNorm {
    pub value: f64,
    pub error: f64,
    pub argmax_p: f64,
}

impl GlsNorm {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error)
    }
}

/// `sup_{p ∈ (a, b)} ‖f‖_p / ψ(p)`.
pub fn gls_norm(f: &FunctionModel, psi: &GeneratingFunction, tol: &Tolerances) -> Result<GlsNorm> {
    if let Some(r) = psi.degenerate_point() {
        let n = lp_norm(f, r, tol)?;
        return Ok(GlsNorm { value: n.value, error: n.error, argmax_p: r });
    }
    let (a, b) = psi.domain();
    // within this distance of an endpoint, divergence of the quadrature is not
    // distinguishable from a large finite norm; the trend of the finite values
    // decides instead
    let sliver = 1e-6 * if b.is_finite() { (b - a).max(1.0) } else { a.max(1.0) };
    let objective = |p: f64| match lp_norm(f, p, tol) {
        Ok(n) => n.value / psi.eval(p),
        Err(e) if e.is_infinite() => {
            if p - a < sliver || b - p < sliver {
                f64::NAN
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::NAN,
    };
    let opt = optimize_1d(objective, a, b, Sense::Max, tol)?;
    if opt.diverging || !opt.opt.is_finite() {
        let side = if (opt.argopt - a).abs() <= (b - opt.argopt).abs() { "a" } else { "b" };
        return Err(Error::NormInfinite(format!(
            "‖{}‖_p / ψ(p) is unbounded near p = {:.6} (endpoint {side} of ({a}, {b}))",
            f.describe(),
            opt.argopt
        )));
    }
    let at = lp_norm(f, opt.argopt, tol)?;
    let psi_at = psi.eval(opt.argopt);
    // golden refinement stops at a relative bracket of 1e-10
    let err = at.error / psi_at + opt.opt.abs() * 1e-10;
    Ok(GlsNorm { value: opt.opt, error: err, argmax_p: opt.argopt })
}

/// `‖f*‖_{Gψ} = ‖f‖_{Gψ}`, both computed over `(0, 1)`.
pub fn coincidence_check(f: &FunctionModel, psi: &GeneratingFunction, tol: &Tolerances) -> Result<VerificationReport> {
    let rhs = gls_norm(f, psi, tol)?;
    let fstar = rearrangement(f)?;
    let lhs = gls_norm(&fstar, psi, tol)?;
    Ok(VerificationReport::equality("coincidence", lhs.estimate(), rhs.estimate(), 1e-3)
        .param("argmax_p_rearranged", lhs.argmax_p)
        .param("argmax_p", rhs.argmax_p)
        .label("function", f.describe())
        .label("psi", psi.describe()))
}

/// JSON form of a [`GrandZygmundSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GzsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<RectSpec>,
    #[serde(default = "unit_rho")]
    pub rho: String,
}

fn unit_rho() -> String {
    "1".into()
}

/// `[lo, hi, n]` along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    pub p: [f64; 3],
    pub gamma: [f64; 3],
}

/// A finite grid `Q` of `(p, γ)` with `p > 1, γ > 0`, and a weight `ρ`.
#[derive(Debug, Clone)]
pub struct GrandZygmundSpace {
    points: Vec<(f64, f64)>,
    rect: Option<RectSpec>,
    rho: Expr,
}

impl GrandZygmundSpace {
    pub fn from_points(points: Vec<(f64, f64)>, rho: &str) -> Result<GrandZygmundSpace> {
        GrandZygmundSpace::checked(points, None, rho)
    }

    pub fn from_rect(rect: RectSpec, rho: &str) -> Result<GrandZygmundSpace> {
        let axis = |[lo, hi, n]: [f64; 3]| -> Result<Vec<f64>> {
            let n = n as usize;
            if n == 0 || !(lo <= hi) {
                return Err(Error::Invalid(format!("bad rectangle axis [{lo}, {hi}, {n}]")));
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
        };
        let ps = axis(rect.p)?;
        let gs = axis(rect.gamma)?;
        let points = ps.iter().flat_map(|&p| gs.iter().map(move |&g| (p, g))).collect();
        GrandZygmundSpace::checked(points, Some(rect), rho)
    }

    pub fn from_spec(spec: &GzsSpec) -> Result<GrandZygmundSpace> {
        match (&spec.points, &spec.rect) {
            (Some(pts), None) => {
                GrandZygmundSpace::from_points(pts.iter().map(|x| (x[0], x[1])).collect(), &spec.rho)
            }
            (None, Some(r)) => GrandZygmundSpace::from_rect(*r, &spec.rho),
            _ => Err(Error::Invalid("Q needs exactly one of `points` or `rect`".into())),
        }
    }

    fn checked(points: Vec<(f64, f64)>, rect: Option<RectSpec>, rho: &str) -> Result<GrandZygmundSpace> {
        if points.is_empty() {
            return Err(Error::Invalid("Q is empty".into()));
        }
        let rho = Expr::parse(rho, &["p", "gamma"])?;
        for &(p, g) in &points {
            if !(p > 1.0 && p.is_finite() && g > 0.0 && g.is_finite()) {
                return Err(Error::Invalid(format!("Q point ({p}, {g}) outside (1, ∞) × (0, ∞)")));
            }
            let r = rho.eval(&[p, g]);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!("rho({p}, {g}) = {r} is not positive")));
            }
        }
        Ok(GrandZygmundSpace { points, rect, rho })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn rho(&self, p: f64, gamma: f64) -> f64 {
        self.rho.eval(&[p, gamma])
    }

    pub fn rho_source(&self) -> &str {
        self.rho.source()
    }

    /// Same `Q`, weight `λ ρ`.
    pub fn with_scaled_rho(&self, lambda: f64) -> Result<GrandZygmundSpace> {
        let src = format!("({lambda:e})*({})", self.rho.source());
        GrandZygmundSpace::checked(self.points.clone(), self.rect, &src)
    }

    /// `Q ∪ other.Q`, keeping this weight.
    pub fn union(&self, extra: &[(f64, f64)]) -> Result<GrandZygmundSpace> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        GrandZygmundSpace::checked(pts, None, self.rho.source())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GzsNorm {
    pub value: f64,
    pub error: f64,
    pub argmax_p: f64,
    pub argmax_gamma: f64,
}

impl GzsNorm {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error)
    }
}

fn weighted_luxemburg(f: &FunctionModel, z: &GrandZygmundSpace, p: f64, g: f64, tol: &Tolerances) -> Result<Estimate> {
    let n = YoungOrlicz::new(p, g)?;
    let v = luxemburg_norm(f, &n, tol).map_err(|e| match e {
        Error::NormInfinite(m) => Error::NormInfinite(format!("at (p, gamma) = ({p}, {g}): {m}")),
        other => other,
    })?;
    Ok(v.scale(1.0 / z.rho(p, g)))
}

/// `sup_{(p,γ) ∈ Q} ‖f‖_{p,γ} / ρ(p, γ)` over the grid, refined locally for
/// rectangular `Q`. The result never exceeds the true supremum.
pub fn gzs_norm(f: &FunctionModel, z: &GrandZygmundSpace, tol: &Tolerances) -> Result<GzsNorm> {
    let vals = par::map(&z.points, |&(p, g)| weighted_luxemburg(f, z, p, g, tol));
    let mut best: Option<(usize, Estimate)> = None;
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if best.map_or(true, |(_, b)| v.value > b.value) {
            best = Some((i, v));
        }
    }
    let (i, mut est) = best.expect("Q is non-empty");
    let (mut bp, mut bg) = z.points[i];
    if let Some(rect) = z.rect {
        let step = |[lo, hi, n]: [f64; 3]| if n > 1.0 { (hi - lo) / (n - 1.0) } else { 0.0 };
        let (mut hp, mut hg) = (step(rect.p), step(rect.gamma));
        for _ in 0..4 {
            let mut cand = Vec::new();
            for a in -2..=2 {
                for b in -2..=2 {
                    let p = (bp + a as f64 * hp / 2.0).clamp(rect.p[0], rect.p[1]);
                    let g = (bg + b as f64 * hg / 2.0).clamp(rect.gamma[0], rect.gamma[1]);
                    cand.push((p, g));
                }
            }
            let vals = par::map(&cand, |&(p, g)| weighted_luxemburg(f, z, p, g, tol));
            for (c, v) in cand.iter().zip(vals) {
                let v = v?;
                if v.value > est.value {
                    est = v;
                    (bp, bg) = *c;
                }
            }
            hp /= 2.0;
            hg /= 2.0;
        }
    }
    Ok(GzsNorm { value: est.value, error: est.error, argmax_p: bp, argmax_gamma: bg })
}

/// `inf_{(p,γ) ∈ Q} Δ_{p,γ}(t / (V ρ(p, γ)))`.
pub fn gzs_tail_envelope(z: &GrandZygmundSpace, v: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    z.points
        .iter()
        .map(|&(p, g)| {
            let n = YoungOrlicz { p, alpha: g, dilation: 1.0 };
            n.delta(t / (v * z.rho(p, g)))
        })
        .fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::parse_expression;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn psi_validation() {
        assert!(GeneratingFunction::custom("p - 2", 1.0, 3.0).is_err());
        assert!(GeneratingFunction::custom("p - p", 1.0, f64::INFINITY).is_err());
        assert!(GeneratingFunction::double_singular(1.0, 4.0, 0.0, 0.25).is_ok());
        let g = GeneratingFunction::power_root(2.0).unwrap();
        assert_eq!(g.eval(4.0), 2.0);
        assert_eq!(g.eval(0.5), f64::INFINITY);
    }

    #[test]
    fn psi_spec_round_trip() {
        let spec: PsiSpec = serde_json::from_str(r#"{"kind":"double_singular","a":1,"b":3,"alpha":0.5,"beta":0.5}"#).unwrap();
        let g = GeneratingFunction::from_spec(&spec).unwrap();
        assert_eq!(g.to_spec(), spec);
        let spec: PsiSpec = serde_json::from_str(r#"{"kind":"power_root","m":1}"#).unwrap();
        assert_eq!(GeneratingFunction::from_spec(&spec).unwrap().domain(), (1.0, f64::INFINITY));
        assert!(serde_json::from_str::<PsiSpec>(r#"{"kind":"power_root","m":1,"x":2}"#).is_err());
    }

    #[test]
    fn degenerate_is_lp() {
        let f = parse_expression("t^(-0.25)").unwrap();
        let n = gls_norm(&f, &GeneratingFunction::degenerate(2.0).unwrap(), &tol()).unwrap();
        assert_eq!(n.value, lp_norm(&f, 2.0, &tol()).unwrap().value);
        assert!((n.value - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn constant_power_root() {
        let one = FunctionModel::constant(1.0).unwrap();
        let n = gls_norm(&one, &GeneratingFunction::power_root(1.0).unwrap(), &tol()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-8, "{n:?}");
    }

    #[test]
    fn unbounded_gls() {
        let f = parse_expression("t^(-0.25)").unwrap();
        let r = gls_norm(&f, &GeneratingFunction::power_root(1.0).unwrap(), &tol());
        assert!(matches!(r, Err(Error::NormInfinite(_))), "{r:?}");
    }

    #[test]
    fn gzs_singleton_and_scaling() {
        let f = parse_expression("t^(-0.1)").unwrap();
        let z = GrandZygmundSpace::from_points(vec![(2.0, 1.0)], "1").unwrap();
        let v = gzs_norm(&f, &z, &tol()).unwrap();
        let l = luxemburg_norm(&f, &YoungOrlicz::new(2.0, 1.0).unwrap(), &tol()).unwrap();
        assert_eq!(v.value, l.value);
        let z3 = z.with_scaled_rho(3.0).unwrap();
        assert!((gzs_norm(&f, &z3, &tol()).unwrap().value * 3.0 - v.value).abs() < 1e-12);
    }

    #[test]
    fn gzs_envelope_values() {
        let z = GrandZygmundSpace::from_points(vec![(2.0, 1.0), (4.0, 1.0)], "1").unwrap();
        assert_eq!(gzs_tail_envelope(&z, 1.0, 0.0), 1.0);
        let want = 1.0 / (1e4 * (std::f64::consts::E + 10.0).ln());
        assert!((gzs_tail_envelope(&z, 1.0, 10.0) - want).abs() < 1e-15);
    }

    #[test]
    fn gzs_spec_parsing() {
        let s: GzsSpec = serde_json::from_str(r#"{"rect":{"p":[2,4,3],"gamma":[0.5,1,2]},"rho":"p"}"#).unwrap();
        let z = GrandZygmundSpace::from_spec(&s).unwrap();
        assert_eq!(z.points().len(), 6);
        let bad: GzsSpec = serde_json::from_str(r#"{"points":[[1,1]]}"#).unwrap();
        assert!(GrandZygmundSpace::from_spec(&bad).is_err());
    }
}
