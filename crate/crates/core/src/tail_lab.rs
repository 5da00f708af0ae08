//! Monte Carlo experiments: extremal random variables whose tails equal the
//! `Δ_{p,α}` envelope, empirical tails against analytic envelopes with a DKW
//! band, and moment growth as `s → p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_model::{sample_from_tail, FunctionModel, Sample, TailFunction};
use crate::numerics::{integrate, rng, Tolerances};
use crate::orlicz::{moment_bound_j, YoungOrlicz};

pub const TAIL_GRID_POINTS: usize = 64;
/// Relative standard error above which a moment estimate is flagged.
pub const VARIANCE_WARNING_LEVEL: f64 = 0.5;
pub const RATIO_LOWER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { n: 100_000, seed: 20, confidence: 0.99 }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 100 {
            return Err(Error::Invalid(format!("sample count must be at least 100, got {}", self.n)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Invalid(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        Ok(())
    }

    /// `√(ln(2/(1−confidence)) / (2n))`.
    pub fn dkw_band(&self) -> f64 {
        ((2.0 / (1.0 - self.confidence)).ln() / (2.0 * self.n as f64)).sqrt()
    }
}

/// Sample with tail exactly `Δ_{p,α}` (norm constant 1).
pub fn extremal_rv(p: f64, alpha: f64, cfg: &MonteCarloConfig) -> Result<Sample> {
    cfg.validate()?;
    if !(p > 1.0) {
        return Err(Error::Domain(format!("extremal variable needs p > 1, got {p}")));
    }
    let env = TailFunction::envelope(YoungOrlicz::new(p, alpha)?, 1.0)?;
    sample_from_tail(&env, cfg.n, cfg.seed)
}

/// `|f(U)|` for uniform `U` on `(0, 1)`.
pub fn sample_function(f: &FunctionModel, cfg: &MonteCarloConfig) -> Result<Sample> {
    cfg.validate()?;
    let mut s = rng::stream(cfg.seed);
    let us: Vec<f64> = (0..cfg.n).map(|_| rng::uniform_open(&mut s)).collect();
    let values = crate::par::map(&us, |&u| f.abs_eval(u));
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("{} sampled to {v}", f.describe())));
    }
    Ok(Sample { values, seed: cfg.seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailComparisonReport {
    pub envelope_label: String,
    pub n: usize,
    pub confidence: f64,
    pub t_grid: Vec<f64>,
    pub empirical_tail: Vec<f64>,
    pub envelope: Vec<f64>,
    pub dkw_band: f64,
    /// Grid points where `empirical − band > envelope`.
    pub violations: usize,
}

impl TailComparisonReport {
    /// Rows `(t, empirical, envelope, band)`.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 4]> + '_ {
        (0..self.t_grid.len()).map(|i| [self.t_grid[i], self.empirical_tail[i], self.envelope[i], self.dkw_band])
    }
}

/// Log grid from the 1% sample quantile to the sample maximum.
pub fn sample_grid(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut lo = sorted[n / 100];
    let mut hi = sorted[n - 1];
    if !(lo > 0.0) {
        lo = sorted.iter().copied().find(|v| *v > 0.0).unwrap_or(1.0);
    }
    if !(hi > lo) {
        hi = lo * 10.0;
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..TAIL_GRID_POINTS)
        .map(|k| (a + (b - a) * k as f64 / (TAIL_GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Empirical tail against `envelope` on [`sample_grid`].
pub fn tail_domination_against<E: Fn(f64) -> f64>(
    sample: &Sample,
    envelope: E,
    envelope_label: &str,
    cfg: &MonteCarloConfig,
) -> Result<TailComparisonReport> {
    if sample.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    let sorted = sample.sorted();
    let n = sorted.len();
    let band = MonteCarloConfig { n, ..*cfg }.dkw_band();
    let t_grid = sample_grid(&sorted);
    let empirical: Vec<f64> = t_grid
        .iter()
        .map(|&t| (n - sorted.partition_point(|x| *x <= t)) as f64 / n as f64)
        .collect();
    let env: Vec<f64> = t_grid.iter().map(|&t| envelope(t)).collect();
    let violations = empirical.iter().zip(&env).filter(|(e, v)| **e - band > **v).count();
    Ok(TailComparisonReport {
        envelope_label: envelope_label.to_string(),
        n,
        confidence: cfg.confidence,
        t_grid,
        empirical_tail: empirical,
        envelope: env,
        dkw_band: band,
        violations,
    })
}

pub fn tail_domination_experiment(
    sample: &Sample,
    envelope: &TailFunction,
    cfg: &MonteCarloConfig,
) -> Result<TailComparisonReport> {
    cfg.validate()?;
    envelope.validate()?;
    tail_domination_against(sample, |t| envelope.eval(t), &envelope.describe(), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub s: f64,
    /// Sample mean of `η^s`; every value lies below the sample maximum.
    pub truncated_mean: f64,
    /// `E[η^s; η > M]` for the analytic tail beyond the sample maximum `M`.
    pub tail_correction: f64,
    pub empirical: f64,
    pub analytic_j: f64,
    pub ratio: f64,
    /// Standard error of the sample mean relative to it.
    pub relative_se: f64,
    pub band: [f64; 2],
    pub within_band: bool,
    pub variance_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentBlowupReport {
    pub p: f64,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub sample_max: f64,
    pub rows: Vec<MomentRow>,
}

impl MomentBlowupReport {
    pub fn all_within_band(&self) -> bool {
        self.rows.iter().all(|r| r.within_band)
    }

    pub fn variance_warnings(&self) -> usize {
        self.rows.iter().filter(|r| r.variance_warning).count()
    }
}

/// `M^s Δ(M) + s ∫_M^∞ t^{s−1} Δ(t) dt` for `Δ = 1/N` beyond `M ≥ t*`.
fn tail_correction(n: &YoungOrlicz, m: f64, s: f64, tol: &Tolerances) -> Result<f64> {
    let delta = n.p - s;
    let lm = m.ln();
    let boundary = (s * lm - n.ln_eval_log(lm)).exp();
    let integrand = |y: f64| {
        let l = lm + y / delta;
        (s * l - n.ln_eval_log(l)).exp()
    };
    let r = integrate(integrand, 0.0, f64::INFINITY, tol)?;
    Ok(boundary + s * r.value / delta)
}

/// Empirical `E η^s` of an extremal sample against `J(α, p, s)` for each `s`.
pub fn moment_blowup_experiment(
    p: f64,
    alpha: f64,
    s_grid: &[f64],
    cfg: &MonteCarloConfig,
    tol: &Tolerances,
) -> Result<MomentBlowupReport> {
    if let Some(s) = s_grid.iter().find(|s| !(**s >= 1.0 && **s < p)) {
        return Err(Error::Domain(format!("s = {s} is outside [1, p) for p = {p}")));
    }
    let sample = extremal_rv(p, alpha, cfg)?;
    let n = YoungOrlicz::new(p, alpha)?;
    let m = sample.values.iter().fold(0.0f64, |a, b| a.max(*b));
    let count = sample.len() as f64;
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let (sum, sum_sq) = sample
            .values
            .iter()
            .map(|v| v.powf(s))
            .fold((0.0, 0.0), |(a, b), x| (a + x, b + x * x));
        let mean = sum / count;
        let var = (sum_sq / count - mean * mean).max(0.0) * count / (count - 1.0);
        let rel_se = var.sqrt() / count.sqrt() / mean;
        let corr = tail_correction(&n, m, s, tol)?;
        let empirical = mean + corr;
        let j = moment_bound_j(alpha, p, s, tol)?.j_value;
        let ratio = empirical / j;
        let band = [RATIO_LOWER, 1.0 + 3.0 * rel_se];
        rows.push(MomentRow {
            s,
            truncated_mean: mean,
            tail_correction: corr,
            empirical,
            analytic_j: j,
            ratio,
            relative_se: rel_se,
            band,
            within_band: ratio >= band[0] && ratio <= band[1],
            variance_warning: rel_se > VARIANCE_WARNING_LEVEL,
        });
    }
    Ok(MomentBlowupReport { p, alpha, n: cfg.n, seed: cfg.seed, sample_max: m, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> MonteCarloConfig {
        MonteCarloConfig { n, seed: 7, confidence: 0.99 }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(99).validate().is_err());
        assert!(MonteCarloConfig { confidence: 1.0, ..cfg(100) }.validate().is_err());
        let band = cfg(100_000).dkw_band();
        assert!((band - (200f64.ln() / 200_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn extremal_tail_points() {
        let n = 20_000;
        let s = extremal_rv(2.0, 0.0, &cfg(n)).unwrap();
        let p10 = s.empirical_tail(10.0);
        let sd = (0.01f64 * 0.99 / n as f64).sqrt();
        assert!((p10 - 0.01).abs() < 3.0 * sd, "{p10}");
        assert!(s.empirical_tail(1.0) > 0.999);
        assert_eq!(s, extremal_rv(2.0, 0.0, &cfg(n)).unwrap());
    }

    #[test]
    fn domination_detects_heavier_tail() {
        let c = cfg(20_000);
        let env = TailFunction::envelope(YoungOrlicz::new(2.0, 0.0).unwrap(), 1.0).unwrap();
        let own = extremal_rv(2.0, 0.0, &c).unwrap();
        assert_eq!(tail_domination_experiment(&own, &env, &c).unwrap().violations, 0);
        let heavy = extremal_rv(1.5, 0.0, &c).unwrap();
        assert!(tail_domination_experiment(&heavy, &env, &c).unwrap().violations > 0);
        let one = TailFunction::expression("1", 1.0).unwrap();
        assert_eq!(tail_domination_experiment(&heavy, &one, &c).unwrap().violations, 0);
    }

    #[test]
    fn blowup_ratio_near_one() {
        let r = moment_blowup_experiment(2.0, 0.0, &[1.0, 1.5], &cfg(20_000), &Tolerances::default()).unwrap();
        assert!((r.rows[0].analytic_j - 2.0).abs() < 1e-8);
        assert!(r.all_within_band(), "{r:?}");
    }
}
