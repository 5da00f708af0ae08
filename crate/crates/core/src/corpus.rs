//! Standard test functions shared by the property suites, the acceptance
//! gate and the CLI.

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::function_model::FunctionModel;
use crate::numerics::rng;

/// Expression members of [`standard`].
pub const EXPRESSIONS: [&str; 11] = [
    "1",
    "t",
    "1 - t",
    "abs(ln(t))",
    "ln(t)^2",
    "t^(-0.1)",
    "t^(-0.2)",
    "sqrt(t)",
    "exp(t)",
    "1/(t+1)",
    "abs(sin(20*t))*t^(-0.1)",
];

/// Seed of the shuffled tabulated member.
pub const SHUFFLE_SEED: u64 = 20;

/// `n` cell values of `t^(-0.3)`, in seeded random order.
pub fn shuffled_tabulated(n: usize, seed: u64) -> Result<FunctionModel> {
    let mut v: Vec<f64> = (0..n).map(|k| ((k as f64 + 0.5) / n as f64).powf(-0.3)).collect();
    let mut s = rng::stream(seed);
    v.shuffle(&mut s);
    Ok(FunctionModel::tabulated(v)?.with_label(format!("shuffle(t^(-0.3), n={n}, seed={seed})")))
}

/// The twelve-function corpus: eleven expressions and one shuffled table.
pub fn standard() -> Result<Vec<FunctionModel>> {
    let mut out = EXPRESSIONS
        .iter()
        .map(|s| FunctionModel::expression(s))
        .collect::<Result<Vec<_>>>()?;
    out.push(shuffled_tabulated(256, SHUFFLE_SEED)?);
    Ok(out)
}

/// Six functions mixing monotone, non-monotone, singular and tabulated cases.
pub fn rearrangement_set() -> Result<Vec<FunctionModel>> {
    let mut out = ["t", "abs(ln(t))", "t^(-0.2)", "1/(t+1)", "abs(sin(20*t))*t^(-0.1)"]
        .iter()
        .map(|s| FunctionModel::expression(s))
        .collect::<Result<Vec<_>>>()?;
    out.push(shuffled_tabulated(256, SHUFFLE_SEED)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(standard().unwrap().len(), 12);
        assert_eq!(rearrangement_set().unwrap().len(), 6);
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = shuffled_tabulated(32, 1).unwrap();
        let b = shuffled_tabulated(32, 1).unwrap();
        for k in 0..32 {
            let t = (k as f64 + 0.5) / 32.0;
            assert_eq!(a.eval(t), b.eval(t));
        }
    }
}
