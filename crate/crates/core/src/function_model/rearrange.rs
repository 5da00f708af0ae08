//! Level-set profile of an expression and the non-increasing rearrangement
//! built from it.
//!
//! `(0, 1)` is cut at the local extrema of `|f|` into pieces on which `|f|` is
//! monotone. Each piece is sampled densely, with logarithmic clustering toward
//! both ends, so the measure of `{|f| ≥ σ}` inside it is an interpolated
//! inverse. Summing over pieces gives the anti-distribution `d_f`, and every
//! sampled level `σ` yields one knot `(d_f(σ), σ)` of the rearrangement.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{gk21, integrate, Tolerances};

/// Log-clustered samples per piece end: `DENSE` between `1e-12` and half the
/// piece width, `SPARSE` below that.
const DENSE_END_SAMPLES: usize = 1200;
const SPARSE_END_SAMPLES: usize = 300;

#[derive(Debug, Clone)]
struct Piece {
    width: f64,
    /// Distances from the end where `|f|` is largest, ascending.
    offsets: Vec<f64>,
    /// `|f|` at those offsets, non-increasing.
    values: Vec<f64>,
    /// Power-law exponent of `|f|` toward the high end (0 when bounded).
    head_exponent: f64,
}

impl Piece {
    fn measure_ge(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return self.width;
        }
        let v0 = self.values[0];
        let x0 = self.offsets[0];
        if sigma > v0 {
            if self.head_exponent > 0.0 {
                return x0 * (sigma / v0).powf(-1.0 / self.head_exponent);
            }
            return 0.0;
        }
        let last = self.values.len() - 1;
        if sigma <= self.values[last] {
            return self.width;
        }
        // first index whose value drops below sigma
        let k = self.values.partition_point(|&v| v >= sigma);
        let j = k - 1;
        interpolate_offset(self.offsets[j], self.offsets[k], self.values[j], self.values[k], sigma)
    }
}

fn interpolate_offset(x0: f64, x1: f64, v0: f64, v1: f64, sigma: f64) -> f64 {
    if v0 == v1 {
        return x1;
    }
    if x0 > 0.0 && v1 > 0.0 {
        // power-law segment
        let s = (sigma / v0).ln() / (v1 / v0).ln();
        return x0 * (x1 / x0).powf(s);
    }
    x0 + (x1 - x0) * (v0 - sigma) / (v0 - v1)
}

/// Non-increasing rearrangement `f*` of an expression on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct Rearrangement {
    pieces: Vec<Piece>,
    /// Knots of `f*`: `us` ascending, `sigmas` non-increasing.
    us: Vec<f64>,
    sigmas: Vec<f64>,
    resolution: usize,
}

impl Rearrangement {
    pub fn from_expression(expr: &Expr, resolution: usize) -> Result<Rearrangement> {
        let resolution = resolution.max(64);
        let f = |t: f64| expr.eval1(t).abs();
        let grid = super::unit_grid(resolution);
        let mut vals = Vec::with_capacity(grid.len());
        for &t in &grid {
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "{} is not finite at t = {t:e}",
                    expr.source()
                )));
            }
            vals.push(v);
        }

        let mut breaks = vec![0.0];
        breaks.extend(extrema(&f, &grid, &vals));
        breaks.push(1.0);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON);

        let per_piece = (resolution / (breaks.len() - 1)).max(64);
        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            pieces.push(sample_piece(&f, w[0], w[1], per_piece, expr)?);
        }

        let mut levels: Vec<f64> = pieces.iter().flat_map(|p| p.values.iter().copied()).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let mut r = Rearrangement { pieces, us: Vec::new(), sigmas: Vec::new(), resolution };
        let mut us = Vec::with_capacity(levels.len());
        let mut running = 0.0f64;
        for &s in &levels {
            running = running.max(r.measure_ge(s));
            us.push(running);
        }
        r.us = us;
        r.sigmas = levels;
        Ok(r)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn knots(&self) -> usize {
        self.us.len()
    }

    /// Lebesgue measure of `{t : |f(t)| ≥ sigma}`.
    pub fn measure_ge(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 1.0;
        }
        self.pieces.iter().map(|p| p.measure_ge(sigma)).sum::<f64>().min(1.0)
    }

    /// Essential supremum of `|f|`; infinite when some piece grows without
    /// bound toward its end.
    pub fn sup(&self) -> f64 {
        let top = self.sigmas[0];
        let unbounded = self
            .pieces
            .iter()
            .any(|p| p.head_exponent > 0.0 && p.values[0] >= top);
        if unbounded {
            f64::INFINITY
        } else {
            top
        }
    }

    /// `f*(u) = inf { σ > 0 : d_f(σ) < u }`.
    pub fn eval(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return self.sup();
        }
        let n = self.us.len();
        if u >= self.us[n - 1] {
            return self.sigmas[n - 1];
        }
        if u < self.us[0] {
            return self.invert_head(u);
        }
        let k = self.us.partition_point(|&x| x <= u);
        let j = k - 1;
        let (u0, u1) = (self.us[j], self.us[k]);
        let (s0, s1) = (self.sigmas[j], self.sigmas[k]);
        if u1 == u0 {
            return s1;
        }
        if u0 > 0.0 && s1 > 0.0 {
            let e = (s1 / s0).ln() / (u1 / u0).ln();
            return s0 * (u / u0).powf(e);
        }
        s0 + (s1 - s0) * (u - u0) / (u1 - u0)
    }

    /// `∫_0^1 (f*/scale)^p du`, exact for the interpolant between knots.
    pub fn power_integral(&self, p: f64, scale: f64) -> Result<f64> {
        let n = self.us.len();
        let s: Vec<f64> = self.sigmas.iter().map(|x| x / scale).collect();
        let mut total = 0.0;
        // head (0, us[0])
        let u0 = self.us[0];
        if u0 > 0.0 {
            let theta = self.head_exponent_at_top();
            if theta * p >= 1.0 {
                return Err(Error::NormInfinite(format!(
                    "f* ~ u^(-{theta:.6}) near 0, so ∫ (f*)^{p} diverges"
                )));
            }
            total += s[0].powf(p) * u0 / (1.0 - theta * p);
        }
        for k in 0..n - 1 {
            let (a, b) = (self.us[k], self.us[k + 1]);
            if b <= a {
                continue;
            }
            let (s0, s1) = (s[k], s[k + 1]);
            total += if a > 0.0 && s1 > 0.0 {
                let lr = (b / a).ln();
                let c = p * (s1 / s0).ln() / lr + 1.0;
                let factor = if (c * lr).abs() < 1e-300 { lr } else { (c * lr).exp_m1() / c };
                s0.powf(p) * a * factor
            } else if s0 == s1 {
                s0.powf(p) * (b - a)
            } else {
                (b - a) * (s0.powf(p + 1.0) - s1.powf(p + 1.0)) / ((p + 1.0) * (s0 - s1))
            };
        }
        total += s[n - 1].powf(p) * (1.0 - self.us[n - 1]).max(0.0);
        Ok(total)
    }

    /// `∫_0^1 (f*)^r w du` with `(value, error)`. One Gauss-Kronrod panel per
    /// knot segment; the head below the first knot follows the fitted power
    /// law and is integrated adaptively.
    pub(crate) fn weighted_power_integral<W: Fn(f64) -> f64>(
        &self,
        r: f64,
        w: &W,
        tol: &Tolerances,
    ) -> Result<(f64, f64)> {
        let n = self.us.len();
        let mut total = 0.0;
        let mut err = 0.0;
        let u0 = self.us[0];
        if u0 > 0.0 {
            let theta = self.head_exponent_at_top();
            let s0 = self.sigmas[0];
            let head = integrate(|u| (s0 * (u / u0).powf(-theta)).powf(r) * w(u), 0.0, u0, tol)
                .map_err(|e| match e {
                    Error::NonIntegrable(m) => Error::NormInfinite(m),
                    other => other,
                })?;
            total += head.value;
            err += head.abs_error_estimate;
        }
        let g = |u: f64| self.eval(u).powf(r) * w(u);
        for k in 0..n - 1 {
            let (a, b) = (self.us[k], self.us[k + 1]);
            if b > a {
                let (v, e) = gk21(&g, a, b)?;
                total += v;
                err += e;
            }
        }
        let last = self.us[n - 1];
        if last < 1.0 {
            let tail = integrate(|u| self.sigmas[n - 1].powf(r) * w(u), last, 1.0, tol)?;
            total += tail.value;
            err += tail.abs_error_estimate;
        }
        Ok((total, err))
    }

    fn head_exponent_at_top(&self) -> f64 {
        let top = self.sigmas[0];
        self.pieces
            .iter()
            .filter(|p| p.values[0] >= top)
            .map(|p| p.head_exponent)
            .fold(0.0, f64::max)
    }

    fn invert_head(&self, u: f64) -> f64 {
        let mut lo = self.sigmas[0];
        if self.measure_ge(lo * (1.0 + f64::EPSILON)) < u {
            return lo;
        }
        let mut hi = lo.max(f64::MIN_POSITIVE) * 2.0;
        let mut guard = 0;
        while self.measure_ge(hi) >= u {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 2000 || !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            if self.measure_ge(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }
}

/// Refined interior local extrema of `f` from its grid values.
fn extrema<F: Fn(f64) -> f64>(f: &F, grid: &[f64], vals: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last_sign = 0i8;
    let mut last_change = 0usize;
    for i in 0..vals.len() - 1 {
        let d = vals[i + 1] - vals[i];
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s == 0 {
            continue;
        }
        if last_sign != 0 && s != last_sign {
            // extremum lies between grid[last_change] and grid[i + 1]
            let lo = grid[last_change.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let maximize = last_sign > 0;
            out.push(refine_extremum(f, lo, hi, maximize));
        }
        last_sign = s;
        last_change = i + 1;
    }
    out.sort_by(f64::total_cmp);
    out
}

fn refine_extremum<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, maximize: bool) -> f64 {
    const G: f64 = 0.618_033_988_749_894_9;
    let score = |x: f64| if maximize { f(x) } else { -f(x) };
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let mut fc = score(c);
    let mut fd = score(d);
    for _ in 0..200 {
        if (b - a) <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = score(d);
        }
    }
    0.5 * (a + b)
}

fn sample_piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, m: usize, expr: &Expr) -> Result<Piece> {
    let width = b - a;
    let mut ts: Vec<f64> = (0..m).map(|k| a + width * (k as f64 + 0.5) / m as f64).collect();
    for (end, dir) in [(a, 1.0), (b, -1.0)] {
        let dmin = if end == 0.0 { 1e-300 } else { (8.0 * f64::EPSILON * end.abs()).max(1e-300) };
        let dmid = 1e-12f64.max(dmin);
        for (lo, hi, count) in [(dmin, dmid, SPARSE_END_SAMPLES), (dmid, 0.5 * width, DENSE_END_SAMPLES)] {
            if lo >= hi {
                continue;
            }
            let (l0, l1) = (lo.ln(), hi.ln());
            for k in 0..count {
                let d = (l0 + (l1 - l0) * k as f64 / count as f64).exp();
                ts.push(end + dir * d);
            }
        }
    }
    ts.retain(|&t| t > a && t < b && t > 0.0 && t < 1.0);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut vs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("{} is not finite at t = {t:e}", expr.source())));
        }
        vs.push(v);
    }
    if ts.is_empty() {
        let t = 0.5 * (a + b);
        ts.push(t);
        vs.push(f(t));
    }
    let decreasing = vs[0] >= vs[vs.len() - 1];
    let (mut offsets, mut values): (Vec<f64>, Vec<f64>) = if decreasing {
        ts.iter().map(|t| t - a).zip(vs.iter().copied()).unzip()
    } else {
        ts.iter().rev().map(|t| b - t).zip(vs.iter().rev().copied()).unzip()
    };
    // strip rounding wiggles
    for i in 1..values.len() {
        if values[i] > values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    if offsets[0] <= 0.0 {
        offsets[0] = f64::MIN_POSITIVE;
    }
    let head_exponent = if values.len() >= 2 && values[0] > 0.0 && values[1] > 0.0 && offsets[1] > offsets[0] {
        let th = -(values[1] / values[0]).ln() / (offsets[1] / offsets[0]).ln();
        if th > 1e-4 {
            th
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(Piece { width, offsets, values, head_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rearr(src: &str) -> Rearrangement {
        Rearrangement::from_expression(&Expr::parse(src, &["t"]).unwrap(), 4096).unwrap()
    }

    #[test]
    fn identity_reverses() {
        let r = rearr("t");
        for k in 1..100 {
            let u = k as f64 / 100.0;
            assert!((r.eval(u) - (1.0 - u)).abs() < 1e-3, "u = {u}");
        }
        assert_eq!(r.pieces(), 1);
    }

    #[test]
    fn monotone_input_is_fixed() {
        let r = rearr("1/(t+1)");
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            assert!((r.eval(u) - 1.0 / (u + 1.0)).abs() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn symmetric_bump() {
        // |f| = 1 - |2t - 1| has distribution 1 - σ, so f*(u) = 1 - u
        let r = rearr("1 - abs(2*t - 1)");
        assert_eq!(r.pieces(), 2);
        for k in 1..50 {
            let u = k as f64 / 50.0;
            assert!((r.eval(u) - (1.0 - u)).abs() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn power_singularity_head() {
        let r = rearr("t^(-0.25)");
        assert_eq!(r.sup(), f64::INFINITY);
        for &u in &[1e-30f64, 1e-12, 1e-4, 0.3] {
            let want = u.powf(-0.25);
            assert!(((r.eval(u) - want) / want).abs() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn constant_has_single_level() {
        let r = rearr("2");
        assert_eq!(r.sup(), 2.0);
        assert_eq!(r.eval(0.5), 2.0);
        assert_eq!(r.measure_ge(2.0), 1.0);
        assert_eq!(r.measure_ge(2.5), 0.0);
    }
}
