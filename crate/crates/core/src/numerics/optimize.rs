use serde::{Deserialize, Serialize};

use super::{Tolerances, OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Result of [`optimize_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub argopt: f64,
    pub opt: f64,
    /// The optimum sits at the grid point nearest an open endpoint and the
    /// objective keeps growing (for `Max`) or falling (for `Min`) toward it
    /// without its increments shrinking.
    pub diverging: bool,
    /// Grid points at which the objective was non-finite.
    pub singular_points: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 512;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Scan points over the open interval `(lo, hi)`: half of them uniform, half
/// logistic-spaced so that both endpoints are approached to within a relative
/// distance of 1e-9. For `hi = ∞` the offsets from `lo` are log-spaced from
/// 1e-9 to 1e4 (scaled by `max(1, |lo|)`).
pub fn scan_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(4);
    let mut pts = Vec::with_capacity(n + 2);
    if hi.is_finite() {
        let w = hi - lo;
        let half = n / 2;
        for k in 0..half {
            pts.push(lo + w * (k as f64 + 0.5) / half as f64);
        }
        let edge = (1.0f64 / 1e-9 - 1.0).ln();
        let m = n - half;
        for k in 0..m {
            let z = -edge + 2.0 * edge * k as f64 / (m - 1) as f64;
            let u = 1.0 / (1.0 + (-z).exp());
            pts.push(lo + w * u);
        }
    } else {
        let scale = lo.abs().max(1.0);
        let (a, b) = ((1e-9f64).ln(), (1e4f64).ln());
        for k in 0..n {
            let z = a + (b - a) * k as f64 / (n - 1) as f64;
            pts.push(lo + scale * z.exp());
        }
    }
    pts.retain(|x| *x > lo && *x < hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Grid scan followed by golden-section refinement around the best grid point.
pub fn optimize_1d<H: Fn(f64) -> f64 + Sync>(
    h: H,
    lo: f64,
    hi: f64,
    sense: Sense,
    tol: &Tolerances,
) -> Result<Optimum> {
    optimize_1d_with(h, lo, hi, sense, tol, DEFAULT_GRID_POINTS)
}

pub fn optimize_1d_with<H: Fn(f64) -> f64 + Sync>(
    h: H,
    lo: f64,
    hi: f64,
    sense: Sense,
    tol: &Tolerances,
    grid_points: usize,
) -> Result<Optimum> {
    tol.validate()?;
    if !(lo < hi) || lo.is_nan() {
        return Err(Error::Domain(format!("optimize_1d needs lo < hi, got ({lo}, {hi})")));
    }
    // work with "bigger is better"
    let sign = match sense {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    };
    let score = |x: f64| sign * h(x);
    let xs = scan_grid(lo, hi, grid_points);
    let vs: Vec<f64> = par::map(&xs, |&x| score(x));

    let singular_points = vs.iter().filter(|v| !v.is_finite()).count();
    // an objective of +∞ (in the optimized direction) is itself the answer
    if let Some(i) = vs.iter().position(|v| *v == f64::INFINITY) {
        return Ok(Optimum {
            argopt: xs[i],
            opt: sign * f64::INFINITY,
            diverging: true,
            singular_points,
        });
    }
    let best = vs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let Some(i) = best else {
        return Err(Error::AllSingular);
    };

    let n = xs.len();
    let diverging = edge_divergence(&vs, i) || vs[i] > OVERFLOW_GUARD;
    if diverging {
        return Ok(Optimum { argopt: xs[i], opt: sign * vs[i], diverging, singular_points });
    }

    let a = if i == 0 { lo } else { xs[i - 1] };
    let b = if i + 1 == n { hi.min(xs[i] + 2.0 * (xs[i] - xs[i.saturating_sub(1)]).abs().max(1.0)) } else { xs[i + 1] };
    let (mut bx, mut bv) = (xs[i], vs[i]);
    let xtol = 1e-10 * xs[i].abs().max(1.0);
    let (gx, gv) = golden_max(&score, a, b, xtol);
    if gv.is_finite() && gv > bv {
        bx = gx;
        bv = gv;
    }
    Ok(Optimum { argopt: bx, opt: sign * bv, diverging: false, singular_points })
}

/// Increments toward an outermost grid point that do not shrink.
fn edge_divergence(vs: &[f64], i: usize) -> bool {
    let n = vs.len();
    if n < 4 {
        return false;
    }
    let check = |a: f64, b: f64, c: f64| {
        // c is outermost
        let d1 = b - a;
        let d2 = c - b;
        d1 > 0.0 && d2 > 0.0 && d2 >= 0.99 * d1
    };
    if i == n - 1 {
        return check(vs[n - 3], vs[n - 2], vs[n - 1]);
    }
    if i == 0 {
        return check(vs[2], vs[1], vs[0]);
    }
    false
}

fn golden_max<S: Fn(f64) -> f64>(score: &S, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let eval = |x: f64| {
        let v = score(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
