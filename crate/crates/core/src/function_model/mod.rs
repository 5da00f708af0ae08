//! Functions on the probability space `((0, 1), Lebesgue)`.
//!
//! A random variable is represented by any function with its law; the
//! quantile representative of a prescribed tail is one such choice.

mod rearrange;
mod tail;

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

pub use rearrange::Rearrangement;
pub use tail::TailFunction;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{integrate, rng, Tolerances, OVERFLOW_GUARD};
use crate::par;
use crate::report::Estimate;

/// Default number of base cells used when rearranging an expression.
pub const DEFAULT_RESOLUTION: usize = 4096;

/// Grid used by the level-set scan in [`anti_distribution`].
const LEVEL_GRID: usize = 512;

#[derive(Debug, Clone)]
pub enum ModelKind {
    Expression(Expr),
    /// Cell `i` (0-based) covers `(i/n, (i+1)/n]`.
    Tabulated(Arc<[f64]>),
    /// The function is the generalized inverse of the tail.
    PrescribedTail(TailFunction),
    /// Non-increasing rearrangement of an expression.
    Rearranged { profile: Arc<Rearrangement>, of: String },
}

#[derive(Debug, Clone)]
pub struct FunctionModel {
    kind: ModelKind,
    label: Option<String>,
}

impl FunctionModel {
    pub fn expression(src: &str) -> Result<FunctionModel> {
        let expr = Expr::parse(src, &["t"])?;
        for k in 0..LEVEL_GRID {
            let t = (k as f64 + 0.5) / LEVEL_GRID as f64;
            let v = expr.eval1(t);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!("{src} is not finite at t = {t}")));
            }
        }
        Ok(FunctionModel { kind: ModelKind::Expression(expr), label: None })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<FunctionModel> {
        if values.is_empty() {
            return Err(Error::Invalid("tabulated function needs at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("tabulated value {i} is not finite")));
        }
        Ok(FunctionModel { kind: ModelKind::Tabulated(values.into()), label: None })
    }

    pub fn prescribed_tail(tail: TailFunction) -> Result<FunctionModel> {
        tail.validate()?;
        Ok(FunctionModel { kind: ModelKind::PrescribedTail(tail), label: None })
    }

    pub fn constant(c: f64) -> Result<FunctionModel> {
        FunctionModel::tabulated(vec![c])
    }

    /// Reads one value per line with an optional `value` header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<FunctionModel> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Invalid(format!("csv line {}: {e}", line + 1)))?;
            if rec.len() != 1 {
                return Err(Error::Invalid(format!(
                    "csv line {}: expected one field, found {}",
                    line + 1,
                    rec.len()
                )));
            }
            let field = &rec[0];
            if line == 0 && field == "value" {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Invalid(format!("csv line {}: not a number: {field:?}", line + 1)))?;
            values.push(v);
        }
        FunctionModel::tabulated(values)
    }

    pub fn from_csv_path(path: &Path) -> Result<FunctionModel> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        Ok(FunctionModel::from_csv_reader(file)?.with_label(path.display().to_string()))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> FunctionModel {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// The label if set, otherwise a description of the representation.
    pub fn describe(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.kind {
            ModelKind::Expression(e) => e.source().to_string(),
            ModelKind::Tabulated(v) => format!("tabulated[{}]", v.len()),
            ModelKind::PrescribedTail(t) => format!("quantile({})", t.describe()),
            ModelKind::Rearranged { of, .. } => format!("rearranged({of})"),
        }
    }

    /// True when the representation is non-increasing by construction.
    pub fn is_non_increasing(&self) -> bool {
        match &self.kind {
            ModelKind::PrescribedTail(_) | ModelKind::Rearranged { .. } => true,
            ModelKind::Tabulated(v) => v.windows(2).all(|w| w[0] >= w[1]) && v.iter().all(|x| *x >= 0.0),
            ModelKind::Expression(_) => false,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ModelKind::Expression(e) => e.eval1(t),
            ModelKind::Tabulated(v) => v[cell(v.len(), t)],
            ModelKind::PrescribedTail(tail) => tail.quantile(t),
            ModelKind::Rearranged { profile, .. } => profile.eval(t),
        }
    }

    pub fn abs_eval(&self, t: f64) -> f64 {
        self.eval(t).abs()
    }

    /// `λ f`.
    pub fn scaled(&self, lambda: f64) -> Result<FunctionModel> {
        let kind = match &self.kind {
            ModelKind::Expression(e) => {
                ModelKind::Expression(Expr::parse(&format!("({lambda:e})*({})", e.source()), &["t"])?)
            }
            ModelKind::Tabulated(v) => ModelKind::Tabulated(v.iter().map(|x| x * lambda).collect()),
            ModelKind::PrescribedTail(TailFunction::Envelope { young, scale }) if lambda != 0.0 => {
                ModelKind::PrescribedTail(TailFunction::envelope(*young, scale * lambda.abs())?)
            }
            _ => return Err(Error::Invalid(format!("cannot scale {}", self.describe()))),
        };
        Ok(FunctionModel { kind, label: None })
    }

    /// Measure of `{|f| > t}`, i.e. `d_f(t+)`.
    pub(crate) fn measure_gt(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match &self.kind {
            ModelKind::Tabulated(v) => {
                v.iter().filter(|x| x.abs() > t).count() as f64 / v.len() as f64
            }
            ModelKind::PrescribedTail(tail) => tail.eval(t),
            _ => anti_distribution(self, nudge(t)).unwrap_or(f64::NAN),
        }
    }

    /// Finite maximum of `|f|` over an interior grid.
    fn grid_max(&self) -> f64 {
        match &self.kind {
            ModelKind::Tabulated(v) => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            _ => unit_grid(LEVEL_GRID)
                .into_iter()
                .map(|t| self.abs_eval(t))
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max),
        }
    }

    /// Midpoint-rule estimate of `‖f‖_p`, used to keep `∫ (|f|/scale)^p` of
    /// order one. Falls back to the grid maximum, then to 1.
    fn power_scale(&self, p: f64) -> f64 {
        let m = self.grid_max();
        if m == 0.0 {
            return 1.0;
        }
        let mean = (0..LEVEL_GRID)
            .map(|k| self.abs_eval((k as f64 + 0.5) / LEVEL_GRID as f64) / m)
            .filter(|v| v.is_finite())
            .map(|v| v.powf(p))
            .sum::<f64>()
            / LEVEL_GRID as f64;
        let s = m * mean.powf(1.0 / p);
        if s > 0.0 && s.is_finite() {
            s
        } else {
            m
        }
    }
}

fn nudge(t: f64) -> f64 {
    t + (4.0 * f64::EPSILON * t.abs()).max(1e-300)
}

fn cell(n: usize, t: f64) -> usize {
    let k = (t * n as f64).ceil() as isize - 1;
    k.clamp(0, n as isize - 1) as usize
}

/// Interior points of `(0, 1)`: `n` cell midpoints plus log-spaced points
/// reaching within 1e-15 of each endpoint.
pub(crate) fn unit_grid(n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
    let edge = 0.5 / n as f64;
    let (a, b) = (-15.0, edge.log10());
    for k in 0..64 {
        let x = 10f64.powf(a + (b - a) * k as f64 / 64.0);
        g.push(x);
        g.push(1.0 - x);
    }
    g.retain(|&x| x > 0.0 && x < 1.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// `d_f(σ)`: Lebesgue measure of `{t : |f(t)| ≥ σ}`.
pub fn anti_distribution(f: &FunctionModel, sigma: f64) -> Result<f64> {
    if sigma.is_nan() {
        return Err(Error::Domain("sigma is NaN".into()));
    }
    if sigma <= 0.0 {
        return Ok(1.0);
    }
    match &f.kind {
        ModelKind::Tabulated(v) => {
            Ok(v.iter().filter(|x| x.abs() >= sigma).count() as f64 / v.len() as f64)
        }
        ModelKind::PrescribedTail(tail) => {
            // P(|ξ| ≥ σ) = lim T(t) as t → σ⁻
            Ok(tail.eval(sigma * (1.0 - 1e-12)))
        }
        ModelKind::Rearranged { profile, .. } => Ok(profile.measure_ge(sigma)),
        ModelKind::Expression(e) => level_measure(e, sigma),
    }
}

fn level_measure(e: &Expr, sigma: f64) -> Result<f64> {
    let g = |t: f64| e.eval1(t).abs();
    let grid = unit_grid(LEVEL_GRID);
    let mut vals = Vec::with_capacity(grid.len());
    for &t in &grid {
        let v = g(t);
        if v.is_nan() {
            return Err(Error::Evaluation(format!("{} is NaN at t = {t:e}", e.source())));
        }
        vals.push(v);
    }
    let above = |v: f64| v >= sigma;
    let n = grid.len();
    let mut m = 0.0;
    if above(vals[0]) {
        m += grid[0];
    }
    if above(vals[n - 1]) {
        m += 1.0 - grid[n - 1];
    }
    for i in 0..n - 1 {
        let (a, b) = (above(vals[i]), above(vals[i + 1]));
        let w = grid[i + 1] - grid[i];
        match (a, b) {
            (true, true) => m += w,
            (false, false) => {}
            _ => {
                // bisect the crossing of |f| = σ
                let (mut lo, mut hi) = (grid[i], grid[i + 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if above(g(mid)) == a {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let c = 0.5 * (lo + hi);
                m += if a { c - grid[i] } else { grid[i + 1] - c };
            }
        }
    }
    Ok(m.clamp(0.0, 1.0))
}

/// Non-increasing rearrangement `f*`.
pub fn rearrangement(f: &FunctionModel) -> Result<FunctionModel> {
    rearrangement_with(f, DEFAULT_RESOLUTION)
}

/// [`rearrangement`] with an explicit base resolution for expressions.
pub fn rearrangement_with(f: &FunctionModel, resolution: usize) -> Result<FunctionModel> {
    let kind = match &f.kind {
        ModelKind::Tabulated(v) => {
            let mut s: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            ModelKind::Tabulated(s.into())
        }
        ModelKind::PrescribedTail(_) | ModelKind::Rearranged { .. } => f.kind.clone(),
        ModelKind::Expression(e) => ModelKind::Rearranged {
            profile: Arc::new(Rearrangement::from_expression(e, resolution)?),
            of: f.describe(),
        },
    };
    Ok(FunctionModel { kind, label: None })
}

/// `(∫_0^1 |f|^p dt)^{1/p}`, or the essential supremum for `p = ∞`.
pub fn lp_norm(f: &FunctionModel, p: f64, tol: &Tolerances) -> Result<Estimate> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("lp_norm needs p ≥ 1, got {p}")));
    }
    if p.is_infinite() {
        return ess_sup(f).map(Estimate::exact);
    }
    if let ModelKind::Tabulated(v) = &f.kind {
        let scale = f.grid_max();
        if scale == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        // ascending summation makes the result independent of cell order
        let mut terms: Vec<f64> = v.iter().map(|x| (x.abs() / scale).powf(p)).collect();
        terms.sort_by(f64::total_cmp);
        let s: f64 = terms.iter().sum::<f64>() / v.len() as f64;
        let value = scale * s.powf(1.0 / p);
        return Ok(Estimate::new(value, value * 4.0 * f64::EPSILON * v.len() as f64));
    }
    let scale = f.power_scale(p);
    if let ModelKind::Rearranged { profile, .. } = &f.kind {
        let i = profile.power_integral(p, scale)?;
        let value = scale * i.powf(1.0 / p);
        return Ok(Estimate::new(value, value * 16.0 * f64::EPSILON * profile.knots() as f64 / p));
    }
    let r = integrate(|t| (f.abs_eval(t) / scale).powf(p), 0.0, 1.0, tol).map_err(|e| match e {
        Error::NonIntegrable(m) => Error::NormInfinite(format!("∫|{}|^{p} diverges ({m})", f.describe())),
        other => other,
    })?;
    if r.value <= 0.0 {
        return Ok(Estimate::new(0.0, scale * r.abs_error_estimate.powf(1.0 / p)));
    }
    let value = scale * r.value.powf(1.0 / p);
    if !value.is_finite() || value > OVERFLOW_GUARD {
        return Err(Error::NormInfinite(format!("‖{}‖_{p} overflows", f.describe())));
    }
    Ok(Estimate::new(value, value * r.abs_error_estimate / r.value / p))
}

fn ess_sup(f: &FunctionModel) -> Result<f64> {
    let infinite = || Error::NormInfinite(format!("{} is unbounded", f.describe()));
    match &f.kind {
        ModelKind::Tabulated(v) => Ok(v.iter().fold(0.0f64, |m, x| m.max(x.abs()))),
        ModelKind::PrescribedTail(t) => {
            let s = t.quantile(f64::MIN_POSITIVE);
            if s.is_finite() && s <= OVERFLOW_GUARD {
                Ok(s)
            } else {
                Err(infinite())
            }
        }
        ModelKind::Rearranged { profile, .. } => {
            let s = profile.sup();
            if s.is_finite() {
                Ok(s)
            } else {
                Err(infinite())
            }
        }
        ModelKind::Expression(e) => {
            let g = |t: f64| e.eval1(t).abs();
            let left: Vec<f64> = (1..=300).map(|k| 10f64.powi(-k)).collect();
            let right: Vec<f64> = (1..=16).map(|k| 1.0 - 10f64.powi(-k)).collect();
            for edge in [&left, &right] {
                let vs: Vec<f64> = edge.iter().map(|&t| g(t)).filter(|v| v.is_finite()).collect();
                if vs.iter().any(|v| *v > OVERFLOW_GUARD) {
                    return Err(infinite());
                }
                if let [.., a, b, c] = vs[..] {
                    if c > b && b > a && (c - b) >= 0.99 * (b - a) {
                        return Err(infinite());
                    }
                }
            }
            let grid = unit_grid(4 * LEVEL_GRID);
            let mut pts: Vec<f64> = grid.clone();
            pts.extend(left.iter().chain(right.iter()));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let (i, best) = pts
                .iter()
                .map(|&t| g(t))
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .fold((0, 0.0f64), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            let lo = if i == 0 { pts[0] * 0.5 } else { pts[i - 1] };
            let hi = if i + 1 == pts.len() { 0.5 * (1.0 + pts[i]) } else { pts[i + 1] };
            Ok(best.max(golden_max(&g, lo, hi)))
        }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// `T(t) = P(|f| > t)`.
pub fn tail_of(f: &FunctionModel) -> Result<TailFunction> {
    match &f.kind {
        ModelKind::PrescribedTail(t) => Ok(t.clone()),
        _ => Ok(TailFunction::of_rearranged(rearrangement(f)?)),
    }
}

/// Values drawn by inverse-transform sampling from a tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Fraction of values strictly above `t`.
    pub fn empirical_tail(&self, t: f64) -> f64 {
        self.values.iter().filter(|v| **v > t).count() as f64 / self.values.len() as f64
    }

    /// Empirical `E|η|^s`.
    pub fn moment(&self, s: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(s)).sum::<f64>() / self.values.len() as f64
    }
}

/// `value_i = inf { t : T(t) < u_i }` for uniforms `u_i` from the seeded
/// stream. Uniforms are drawn sequentially; only the inversion fans out.
pub fn sample_from_tail(tail: &TailFunction, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::Invalid("sample size must be at least 1".into()));
    }
    tail.validate()?;
    let mut stream = rng::stream(seed);
    let us: Vec<f64> = (0..n).map(|_| rng::uniform_open(&mut stream)).collect();
    let values = par::map(&us, |&u| tail.quantile(u));
    Ok(Sample { values, seed })
}

/// Parses an expression in `t` into a function model.
pub fn parse_expression(src: &str) -> Result<FunctionModel> {
    FunctionModel::expression(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn anti_distribution_examples() {
        let f = FunctionModel::tabulated(vec![5., 5., 5., 0., 0., 0., 0., 0., 0., 0.]).unwrap();
        assert!((anti_distribution(&f, 3.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(anti_distribution(&f, 0.0).unwrap(), 1.0);
        let t = parse_expression("t").unwrap();
        assert!((anti_distribution(&t, 0.25).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn anti_distribution_nonmonotone() {
        let f = parse_expression("abs(sin(20*t))").unwrap();
        // {|sin x| ≥ 1/2} has density 2/3 over whole periods
        let d = anti_distribution(&f, 0.5).unwrap();
        let x: f64 = 20.0;
        let periods = (x / std::f64::consts::PI).floor();
        let rest = x - periods * std::f64::consts::PI;
        let part = (rest.min(5.0 * std::f64::consts::PI / 6.0) - std::f64::consts::PI / 6.0).max(0.0);
        let want = (periods * 2.0 * std::f64::consts::PI / 3.0 + part) / x;
        assert!((d - want).abs() < 1e-9, "{d} vs {want}");
    }

    #[test]
    fn tabulated_sort() {
        let f = FunctionModel::tabulated(vec![1., 3., 2.]).unwrap();
        let r = rearrangement(&f).unwrap();
        match r.kind() {
            ModelKind::Tabulated(v) => assert_eq!(&v[..], &[3., 2., 1.]),
            _ => panic!(),
        }
    }

    #[test]
    fn lp_examples() {
        let f = parse_expression("t^(-0.25)").unwrap();
        let n = lp_norm(&f, 2.0, &tol()).unwrap();
        assert!((n.value - 2f64.sqrt()).abs() < 1e-6);
        let c = parse_expression("3").unwrap();
        assert!((lp_norm(&c, 3.5, &tol()).unwrap().value - 3.0).abs() < 1e-9);
        let g = parse_expression("t^(-0.5)").unwrap();
        assert!(matches!(lp_norm(&g, 2.0, &tol()), Err(Error::NormInfinite(_))));
    }

    #[test]
    fn sup_norm() {
        let f = parse_expression("1 - (t - 0.3)^2").unwrap();
        assert!((lp_norm(&f, f64::INFINITY, &tol()).unwrap().value - 1.0).abs() < 1e-12);
        let g = parse_expression("abs(ln(t))").unwrap();
        assert!(matches!(lp_norm(&g, f64::INFINITY, &tol()), Err(Error::NormInfinite(_))));
        let h = parse_expression("sqrt(t)").unwrap();
        assert!((lp_norm(&h, f64::INFINITY, &tol()).unwrap().value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn tail_of_constant() {
        let f = FunctionModel::constant(2.0).unwrap();
        let t = tail_of(&f).unwrap();
        assert_eq!(t.eval(1.999), 1.0);
        assert_eq!(t.eval(2.0), 0.0);
        let s = sample_from_tail(&t, 5, 7).unwrap();
        assert_eq!(s.values, vec![2.0; 5]);
    }

    #[test]
    fn tail_of_identity() {
        let t = tail_of(&parse_expression("t").unwrap()).unwrap();
        for &s in &[0.1, 0.5, 0.9] {
            assert!((t.eval(s) - (1.0 - s)).abs() < 1e-6);
        }
    }

    #[test]
    fn csv_ingestion() {
        let f = FunctionModel::from_csv_reader("value\n1\n3\n2\n".as_bytes()).unwrap();
        assert_eq!(f.eval(0.5), 3.0);
        assert_eq!(f.eval(0.1), 1.0);
        assert!(FunctionModel::from_csv_reader("1\nx\n".as_bytes()).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let t = TailFunction::expression("max(0, 1 - t)", 1.0).unwrap();
        let a = sample_from_tail(&t, 100, 3).unwrap();
        let b = sample_from_tail(&t, 100, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_from_tail(&t, 100, 4).unwrap());
    }
}
