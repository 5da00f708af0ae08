use super::{Tolerances, OVERFLOW_GUARD};
use crate::error::{Error, Result};

/// Root of a strictly monotone `g` by Brent's method.
///
/// The bracket `[lo, hi]` is widened geometrically (away from the side whose
/// sign already matches) until `g(lo)` and `g(hi)` differ in sign or the
/// endpoints pass the overflow guard. The returned point lies in a sign-change
/// interval no wider than `tol.abs_tol`.
pub fn find_root_monotone<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<f64> {
    tol.validate()?;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = g(a);
    let mut fb = g(b);
    let mut expansions = 0;
    while fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        if fa.is_nan() || fb.is_nan() {
            return Err(Error::NoBracket { lo: a, hi: b });
        }
        let width = b - a;
        // move the endpoint whose value is closer to zero
        if fa.abs() < fb.abs() {
            a -= 1.6 * width;
            fa = g(a);
        } else {
            b += 1.6 * width;
            fb = g(b);
        }
        expansions += 1;
        if a.abs() > OVERFLOW_GUARD || b.abs() > OVERFLOW_GUARD || expansions > 200 {
            return Err(Error::NoBracket { lo: a, hi: b });
        }
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    brent(&g, a, b, fa, fb, tol.abs_tol)
}

fn brent<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, xtol: f64) -> Result<f64> {
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = g(b);
        if fb.is_nan() {
            return Err(Error::Evaluation(format!("root function is NaN at {b}")));
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances { abs_tol: 1e-12, ..Tolerances::default() }
    }

    #[test]
    fn simple_roots() {
        let r = find_root_monotone(|x| x - 2.0, 0.0, 10.0, &tol()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let r = find_root_monotone(|x| x * x * x - 8.0, 0.0, 10.0, &tol()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let r = find_root_monotone(f64::ln, 0.1, 10.0, &tol()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decreasing_function() {
        let r = find_root_monotone(|x| 3.0 - x, 0.0, 1.0, &tol()).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_expands() {
        let r = find_root_monotone(|x| x - 1e6, 0.0, 1.0, &tol()).unwrap();
        assert!((r - 1e6).abs() < 1e-6);
        let r = find_root_monotone(|x| x + 50.0, 0.0, 1.0, &tol()).unwrap();
        assert!((r + 50.0).abs() < 1e-10);
    }

    #[test]
    fn no_root() {
        let e = find_root_monotone(|x: f64| x.exp() + 1.0, 0.0, 1.0, &tol()).unwrap_err();
        assert!(matches!(e, Error::NoBracket { .. }));
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| x.powi(5) - 3.0 * x - 7.0;
        let a = find_root_monotone(f, 0.0, 3.0, &tol()).unwrap();
        let b = find_root_monotone(f, 0.0, 3.0, &tol()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
