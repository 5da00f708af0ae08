//! Function specs, grid specs and JSON config loading.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use normlab::{FunctionModel, TailFunction, YoungOrlicz};

use crate::Failure;

/// Parameters of a `tail:{...}` function spec.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailSpec {
    p: f64,
    alpha: f64,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

/// `csv:PATH`, `tail:{"p":…, "alpha":…}` or an expression in `t`.
pub fn function(spec: &str) -> Result<FunctionModel, Failure> {
    if let Some(path) = spec.strip_prefix("csv:") {
        return Ok(FunctionModel::from_csv_path(Path::new(path))?.with_label(spec.to_string()));
    }
    if let Some(json) = spec.strip_prefix("tail:") {
        let t: TailSpec =
            serde_json::from_str(json).map_err(|e| Failure::usage(format!("bad tail spec {json}: {e}")))?;
        let env = TailFunction::envelope(YoungOrlicz::new(t.p, t.alpha)?, t.scale)?;
        return Ok(FunctionModel::prescribed_tail(env)?.with_label(spec.to_string()));
    }
    Ok(FunctionModel::expression(spec)?)
}

/// Reads `arg` as a file, or as inline JSON when it starts with `{` or `[`.
pub fn json_text(arg: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::usage(format!("cannot read {arg}: {e}")))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("invalid {what}: {e}")))
}

/// `key=v1,v2;key=v3` (inline) or a JSON object of arrays (file), expanded
/// to the cartesian product in key order of first appearance.
pub fn grid(arg: &str, keys: &[&str]) -> Result<Vec<BTreeMap<String, f64>>, Failure> {
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    if arg.contains('=') && !arg.trim_start().starts_with('{') {
        for part in arg.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("grid entry {part:?} is not key=values")))?;
            let vals = v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(format!("grid values for {k}: {e}")))?;
            axes.push((k.trim().to_string(), vals));
        }
    } else {
        let map: BTreeMap<String, Vec<f64>> = parse_json(&json_text(arg)?, "grid")?;
        axes.extend(map);
    }
    for (k, v) in &axes {
        if !keys.contains(&k.as_str()) {
            return Err(Failure::usage(format!("unknown grid key {k}; expected {keys:?}")));
        }
        if v.is_empty() {
            return Err(Failure::usage(format!("grid key {k} has no values")));
        }
    }
    for k in keys {
        if !axes.iter().any(|(a, _)| a == k) {
            return Err(Failure::usage(format!("grid is missing key {k}")));
        }
    }
    let mut rows = vec![BTreeMap::new()];
    for (k, vals) in &axes {
        let mut next = Vec::with_capacity(rows.len() * vals.len());
        for r in &rows {
            for v in vals {
                let mut r2 = r.clone();
                r2.insert(k.clone(), *v);
                next.push(r2);
            }
        }
        rows = next;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_grid() {
        let g = grid("r=1;p=2;gamma=0,1,2", &["r", "p", "gamma"]).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[2]["gamma"], 2.0);
        assert!(grid("r=1;p=2", &["r", "p", "gamma"]).is_err());
        assert!(grid("x=1", &["r"]).is_err());
    }

    #[test]
    fn function_specs() {
        assert!(function("t^2").is_ok());
        assert!(function(r#"tail:{"p":2,"alpha":0}"#).is_ok());
        assert!(function(r#"tail:{"p":2}"#).is_err());
        assert!(function("csv:/nonexistent.csv").is_err());
    }
}
