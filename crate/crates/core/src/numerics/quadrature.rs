//! Adaptive Gauss-Kronrod quadrature for integrands with integrable endpoint
//! singularities.
//!
//! A finite interval `[a, b]` is split at its midpoint and each half is
//! covered by a geometric sequence of panels shrinking toward its outer
//! endpoint: `[a + w/2^(k+1), a + w/2^k]`. Every panel is integrated with
//! adaptive 21-point Gauss-Kronrod. For a power-law singularity `t^-θ` the
//! panel contributions form a geometric series with ratio `2^(θ-1)`; once the
//! ratio has settled the remainder is summed in closed form. A ratio pinned at
//! one signals a divergent integral.
//!
//! Infinite upper limits are mapped onto `(0, 1/max(lo, 1)]` by `t = 1/u`,
//! after integrating `[lo, 1]` directly when `lo < 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{Tolerances, OVERFLOW_GUARD};
use crate::error::{Error, Result};

/// Output of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452025,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Panels per endpoint series before the ratio tests engage.
const MIN_LEVELS: usize = 24;
/// Contribution ratio at or above which the endpoint series is divergent.
const DIVERGENT_RATIO: f64 = 1.0 - 1e-9;
/// Relative drift below which successive contribution ratios count as settled.
const SETTLED_RATIO: f64 = 1e-4;
const FALLING_RATIO: f64 = 1e-3;

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > e {
            e = min_err;
        }
    }
    e
}

/// One 21-point Gauss-Kronrod panel: (value, error estimate).
pub(crate) fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check_value(fc, center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let x1 = center - dx;
        let x2 = center + dx;
        let f1 = f(x1);
        let f2 = f(x2);
        check_value(f1, x1)?;
        check_value(f2, x2)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok((value, err))
}

fn check_value(v: f64, x: f64) -> Result<()> {
    if v.is_nan() {
        return Err(Error::Evaluation(format!("integrand is NaN at t = {x:e}")));
    }
    if v.is_infinite() || v.abs() > OVERFLOW_GUARD {
        return Err(Error::NonIntegrable(format!(
            "integrand exceeds the overflow guard at t = {x:e}"
        )));
    }
    Ok(())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive bisection of a single panel, worst segment first.
/// Returns (value, error estimate, segments used).
fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_target: f64,
    rel_target: f64,
    max_segments: usize,
) -> Result<(f64, f64, usize)> {
    let (v, e) = gk21(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    let mut used = 1;
    while total_err > abs_target.max(rel_target * total.abs()) && used < max_segments {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(f, worst.a, mid)?;
        let (v2, e2) = gk21(f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
        used += 1;
    }
    // recompute from the heap to shed accumulated cancellation
    let (value, err) = heap
        .iter()
        .fold((0.0, 0.0), |(s, e), seg| (s + seg.value, e + seg.err));
    Ok((value, err, used))
}

/// Covers the half-open interval between `anchor` (exclusive) and `other` with
/// panels shrinking geometrically toward `anchor`.
fn endpoint_series<F: Fn(f64) -> f64>(
    f: &F,
    anchor: f64,
    other: f64,
    tol: &Tolerances,
    budget: &mut usize,
) -> Result<(f64, f64, usize)> {
    let w = other - anchor;
    let floor = (4.0 * f64::EPSILON * anchor.abs()).max(1e-290);
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut panels = 0;
    let mut contrib: Vec<f64> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let panel_abs = tol.abs_tol / 64.0;
    let panel_rel = tol.rel_tol / 16.0;

    for k in 0..2000 {
        let outer = anchor + w * 0.5f64.powi(k as i32);
        let inner = anchor + w * 0.5f64.powi(k as i32 + 1);
        let (lo, hi) = if inner < outer { (inner, outer) } else { (outer, inner) };
        let per_panel = (*budget).clamp(1, 256);
        let (c, e, used) = adaptive_panel(f, lo, hi, panel_abs, panel_rel, per_panel)?;
        *budget = budget.saturating_sub(used);
        panels += used;
        sum += c;
        err += e;
        if sum.abs() > OVERFLOW_GUARD {
            return Err(Error::NonIntegrable(format!(
                "partial sums exceed the overflow guard near t = {anchor:e}"
            )));
        }
        if let Some(&prev) = contrib.last() {
            let prev: f64 = prev;
            let r = if prev == 0.0 {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (c / prev).abs()
            };
            ratios.push(r);
        }
        contrib.push(c);

        let target = tol.abs_tol.max(tol.rel_tol * sum.abs());
        let n = ratios.len();
        let width = (hi - lo).abs();

        if n >= 2 {
            let (r0, r1) = (ratios[n - 1], ratios[n - 2]);
            if c == 0.0 && contrib[contrib.len() - 2] == 0.0 && k + 1 >= MIN_LEVELS {
                return Ok((sum, err, panels));
            }
            if r0 <= 0.75 && r1 <= 0.75 {
                let tail = c.abs() * r0 / (1.0 - r0);
                if tail <= 0.01 * target {
                    return Ok((sum, err + tail, panels));
                }
            }
        }
        if n >= 3 && k + 1 >= MIN_LEVELS {
            let (r0, r1, r2) = (ratios[n - 1], ratios[n - 2], ratios[n - 3]);
            // ratios above 1 that keep falling come from log factors, which
            // can still end in a convergent tail
            let falling = r2 > r1 && r1 > r0 && r2 - r0 > FALLING_RATIO * r0;
            if r0 >= DIVERGENT_RATIO && r1 >= DIVERGENT_RATIO && r2 >= DIVERGENT_RATIO && !falling {
                return Err(Error::NonIntegrable(format!(
                    "endpoint contributions do not decay near t = {anchor:e} (ratio {r0:.12})"
                )));
            }
            let settled = (r0 - r1).abs() <= SETTLED_RATIO * r0
                && (r1 - r2).abs() <= SETTLED_RATIO * r1;
            if settled && r0 < DIVERGENT_RATIO {
                let tail = c * r0 / (1.0 - r0);
                let tail_prev = c * r1 / (1.0 - r1);
                let tail_err = (tail - tail_prev).abs() + 1e-13 * tail.abs();
                if tail_err <= 0.1 * target {
                    return Ok((sum + tail, err + tail_err, panels));
                }
            }
        }
        if width <= floor || *budget == 0 {
            // resolution exhausted: sum whatever tail the last ratio implies
            let r0 = ratios.last().copied().unwrap_or(0.0);
            if r0 >= DIVERGENT_RATIO {
                return Err(Error::NonIntegrable(format!(
                    "endpoint contributions do not decay near t = {anchor:e}"
                )));
            }
            let tail = c * r0 / (1.0 - r0);
            return Ok((sum + tail, err + tail.abs(), panels));
        }
    }
    Ok((sum, err, panels))
}

fn integrate_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: &Tolerances,
    budget: &mut usize,
) -> Result<(f64, f64, usize)> {
    let mid = 0.5 * (a + b);
    let (v1, e1, n1) = endpoint_series(f, a, mid, tol, budget)?;
    let (v2, e2, n2) = endpoint_series(f, b, mid, tol, budget)?;
    Ok((v1 + v2, e1 + e2, n1 + n2))
}

/// Integrates `f` over `(lo, hi)`; `hi` may be `f64::INFINITY`.
///
/// Endpoint singularities of integrable type are allowed, and `f` is never
/// evaluated at the endpoints themselves.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<QuadratureResult> {
    tol.validate()?;
    if lo.is_nan() || hi.is_nan() || lo.is_infinite() {
        return Err(Error::Domain(format!("invalid integration limits ({lo}, {hi})")));
    }
    if hi < lo {
        let r = integrate(f, hi, lo, tol)?;
        return Ok(QuadratureResult { value: -r.value, ..r });
    }
    if hi == lo {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, subdivisions: 1 });
    }
    let mut budget = tol.max_subdivisions;
    let (value, err, subdivisions) = if hi.is_finite() {
        integrate_finite(&f, lo, hi, tol, &mut budget)?
    } else {
        let split = lo.max(1.0);
        let (v0, e0, n0) = if lo < 1.0 {
            integrate_finite(&f, lo, 1.0, tol, &mut budget)?
        } else {
            (0.0, 0.0, 0)
        };
        let g = |u: f64| {
            let t = 1.0 / u;
            let y = f(t);
            if y == 0.0 {
                0.0
            } else {
                y / (u * u)
            }
        };
        let (v1, e1, n1) = integrate_finite(&g, 0.0, 1.0 / split, tol, &mut budget)?;
        (v0 + v1, e0 + e1, n0 + n1)
    };
    let target = tol.abs_tol.max(tol.rel_tol * value.abs());
    if !(err <= target) {
        return Err(Error::NonConvergent {
            estimate: err,
            tolerance: target,
            subdivisions,
        });
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate: err,
        subdivisions: subdivisions.max(1),
    })
}
