use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Γ(x) for x > 0.
///
/// Integer arguments up to 171 return the exact factorial, so `gamma(1.0)`
/// is bit-exactly one.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x.fract() == 0.0 && x <= 171.0 {
        let n = x as u32;
        return Ok((1..n).fold(1.0, |acc, k| acc * k as f64));
    }
    if x < 0.5 {
        // reflection: Γ(x) Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma(1.0 - x)?));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let sum = lanczos_sum(z);
    // t^(z+0.5) split in two to delay overflow
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * std::f64::consts::PI).sqrt() * half * (half * (-t).exp()) * sum)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_exact() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(3.0).unwrap(), 2.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_eq!(gamma(11.0).unwrap(), 3_628_800.0);
    }

    #[test]
    fn half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let cases = [(0.5, sqrt_pi), (1.5, 0.5 * sqrt_pi), (2.5, 0.75 * sqrt_pi), (4.5, 11.631_728_396_567_45)];
        for (x, want) in cases {
            let got = gamma(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "Γ({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn reference_values() {
        // minimum near 1.4616, Γ(3.7), Γ(20.3)
        let cases = [
            (1.461_632_144_968_362_3, 0.885_603_194_410_888_7),
            (3.7, 4.170_651_783_796_603),
            (20.3, 2.972_461_075_235_565_9e17),
        ];
        for (x, want) in cases {
            let got = gamma(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "Γ({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn recurrence_on_grid() {
        let mut x = 1.0;
        while x <= 20.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs, "x = {x}");
            x += 0.5;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.3, 1.0, 2.5, 7.25, 40.0] {
            let a = ln_gamma(x).unwrap();
            let b = gamma(x).unwrap().ln();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
    }
}
