//! Subcommand implementations. Each builds a JSON result, a fixed-column
//! table and an exit code; rendering is left to [`crate::output`].

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use normlab::embeddings::{
    embedding_check_scaled, gls_weighted_bound_check, holder_bound_check, inverse_embedding_check,
    lower_estimate_check, sharpness_search, theta, weighted_norm, zeta_constant, KappaVariant, WeightFunction,
    ZygmundNorm,
};
use normlab::function_model::lp_norm;
use normlab::grand_spaces::{
    coincidence_check, gls_norm, gzs_norm, gzs_tail_envelope, GeneratingFunction, GrandZygmundSpace, GzsSpec,
    PsiSpec,
};
use normlab::orlicz::{dilation_check, luxemburg_norm, moment_bound_j, monotonicity_check, tail_domination_check};
use normlab::tail_lab::{
    extremal_rv, moment_blowup_experiment, sample_function, tail_domination_against, tail_domination_experiment,
    MonteCarloConfig,
};
use normlab::{par, Tolerances, TailFunction, Verdict, VerificationReport, YoungOrlicz};

use crate::input::{self, json_text, parse_json};
use crate::output::{num, Emit, Table};
use crate::{
    Cli, Command, Constant, ConstantsArgs, Experiment, Failure, Inequality, McArgs, NormArgs, SharpnessArgs, Space,
    VerifyArgs, DEFAULT_SEED, EXIT_FAIL, EXIT_PASS,
};

const VERIFY_COLUMNS: [&str; 7] = ["check", "verdict", "lhs", "rhs", "margin", "error_budget", "notes"];

struct Outcome {
    config: Value,
    result: Value,
    table: Table,
    summary: String,
    code: u8,
    tolerances: Tolerances,
    seed: u64,
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    configure_pool(cli.global.jobs)?;
    let (name, out) = match &cli.command {
        Command::Norm(a) => ("norm", norm(cli, a)?),
        Command::Verify(a) => ("verify", verify(cli, a)?),
        Command::Sharpness(a) => ("sharpness", sharpness(cli, a)?),
        Command::Constants(a) => ("constants", constants(cli, a)?),
        Command::Mc(a) => ("mc", mc(cli, a)?),
    };
    let emit = Emit {
        command: name,
        config: &out.config,
        seed: out.seed,
        tolerances: out.tolerances,
        timestamp: !cli.global.no_timestamp,
        format: cli.global.format,
        output: cli.global.output.as_deref(),
    };
    emit.write(&out.result, &out.table, &out.summary)?;
    Ok(out.code)
}

#[cfg(feature = "parallel")]
fn configure_pool(jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot size worker pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(jobs: Option<usize>) -> Result<(), Failure> {
    if jobs == Some(0) {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    Ok(())
}

/// Config tolerances, then `--abs-tol` / `--rel-tol` on top.
fn tolerances(cli: &Cli, from_config: Option<Tolerances>) -> Result<Tolerances, Failure> {
    let mut t = from_config.unwrap_or_default();
    if let Some(a) = cli.global.abs_tol {
        t.abs_tol = a;
    }
    if let Some(r) = cli.global.rel_tol {
        t.rel_tol = r;
    }
    t.validate()?;
    Ok(t)
}

/// `--seed`, then the config seed, then `NORMLAB_SEED`, then the default.
fn seed(cli: &Cli, from_config: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = cli.global.seed {
        return Ok(s);
    }
    if let Some(s) = from_config {
        return Ok(s);
    }
    match std::env::var("NORMLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::usage(format!("NORMLAB_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn worst(reports: &[VerificationReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

fn required<T: Copy>(x: Option<T>, flag: &str, space: &str) -> Result<T, Failure> {
    x.ok_or_else(|| Failure::usage(format!("--space {space} needs {flag}")))
}

fn norm(cli: &Cli, a: &NormArgs) -> Result<Outcome, Failure> {
    let tol = tolerances(cli, None)?;
    let f = input::function(&a.function)?;
    let mut extra = serde_json::Map::new();
    let (space, est) = match a.space {
        Space::Lp => {
            let p = required(a.p, "--p", "lp")?;
            ("lp", lp_norm(&f, p, &tol)?)
        }
        Space::LorentzZygmund => {
            let p = required(a.p, "--p", "lorentz-zygmund")?;
            let n = YoungOrlicz::new(p, a.alpha.unwrap_or(0.0))?;
            ("lorentz-zygmund", luxemburg_norm(&f, &n, &tol)?)
        }
        Space::Gls => {
            let src = a.psi.as_deref().ok_or_else(|| Failure::usage("--space gls needs --psi"))?;
            let spec: PsiSpec = parse_json(&json_text(src)?, "generating function")?;
            let psi = GeneratingFunction::from_spec(&spec)?;
            let g = gls_norm(&f, &psi, &tol)?;
            extra.insert("argmax_p".into(), json!(g.argmax_p));
            extra.insert("psi".into(), json!(psi.describe()));
            ("gls", g.estimate())
        }
        Space::Gzs => {
            let src = a.q.as_deref().ok_or_else(|| Failure::usage("--space gzs needs --q"))?;
            let spec: GzsSpec = parse_json(&json_text(src)?, "Grand Zygmund domain")?;
            let z = GrandZygmundSpace::from_spec(&spec)?;
            let g = gzs_norm(&f, &z, &tol)?;
            extra.insert("argmax_p".into(), json!(g.argmax_p));
            extra.insert("argmax_gamma".into(), json!(g.argmax_gamma));
            ("gzs", g.estimate())
        }
        Space::Weighted => {
            let src = a.weight.as_deref().ok_or_else(|| Failure::usage("--space weighted needs --S"))?;
            let s = WeightFunction::new(input::function(src)?, &tol)?;
            extra.insert("weight".into(), json!(s.model().describe()));
            ("weighted", weighted_norm(&f, &s, &tol)?)
        }
    };
    let config = json!({
        "space": space, "fn": a.function, "p": a.p, "alpha": a.alpha,
        "psi": a.psi, "q": a.q, "S": a.weight,
    });
    let mut result = json!({
        "space": space,
        "function": f.describe(),
        "p": a.p,
        "alpha": a.alpha,
        "value": est.value,
        "error": est.error,
    });
    result.as_object_mut().expect("object").extend(extra);
    let mut table = Table::new(&["space", "function", "value", "error"]);
    table.push(vec![space.into(), f.describe(), num(est.value), num(est.error)]);
    Ok(Outcome {
        config,
        result,
        table,
        summary: format!("{:.10}", est.value),
        code: EXIT_PASS,
        tolerances: tol,
        seed: seed(cli, None)?,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailCfg {
    function: String,
    p: f64,
    alpha: f64,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoincidenceCfg {
    function: String,
    psi: PsiSpec,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HolderCfg {
    function: String,
    weight: String,
    p: f64,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlsWeightedCfg {
    function: String,
    weight: String,
    psi: PsiSpec,
    nu: PsiSpec,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct McSection {
    n: Option<usize>,
    seed: Option<u64>,
    confidence: Option<f64>,
}

impl McSection {
    fn resolve(&self, cli: &Cli) -> Result<MonteCarloConfig, Failure> {
        let d = MonteCarloConfig::default();
        let cfg = MonteCarloConfig {
            n: self.n.unwrap_or(d.n),
            seed: seed(cli, self.seed)?,
            confidence: self.confidence.unwrap_or(d.confidence),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GzsTailCfg {
    /// Sampled variable; defaults to the extremal one for `(p, alpha)`.
    function: Option<String>,
    p: Option<f64>,
    alpha: Option<f64>,
    q: GzsSpec,
    #[serde(default)]
    mc: McSection,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingCfg {
    function: String,
    r: f64,
    p: f64,
    gamma: f64,
    #[serde(default)]
    lhs_norm: ZygmundNorm,
    /// Multiplies `Θ`; values below 1 assert a constant known to be too small.
    constant_scale: Option<f64>,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DilationCfg {
    function: String,
    p: f64,
    alpha: f64,
    c: f64,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct YoungCfg {
    p: f64,
    alpha: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonotonicityCfg {
    function: String,
    n1: YoungCfg,
    n2: YoungCfg,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerCfg {
    function: String,
    beta: f64,
    s: f64,
    p_grid: Vec<f64>,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantChoice {
    Plain,
    Exponent,
    #[default]
    Both,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InverseCfg {
    function: String,
    beta: f64,
    s_grid: Vec<f64>,
    p_domain: [f64; 2],
    #[serde(default)]
    variant: VariantChoice,
    tolerances: Option<Tolerances>,
}

fn typed<T: for<'de> Deserialize<'de>>(raw: &Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(raw.clone()).map_err(|e| Failure::usage(format!("invalid {what} config: {e}")))
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome, Failure> {
    let raw: Value = parse_json(&json_text(&a.config)?, "config")?;
    let name = a.inequality.to_possible_value().expect("named").get_name().to_string();
    let mut extra = serde_json::Map::new();
    let mut seed_used = None;
    let (reports, tol): (Vec<VerificationReport>, Tolerances) = match a.inequality {
        Inequality::Tail => {
            let c: TailCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            (vec![tail_domination_check(&f, &YoungOrlicz::new(c.p, c.alpha)?, &tol)?], tol)
        }
        Inequality::Coincidence => {
            let c: CoincidenceCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            (vec![coincidence_check(&f, &GeneratingFunction::from_spec(&c.psi)?, &tol)?], tol)
        }
        Inequality::Holder => {
            let c: HolderCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            let s = WeightFunction::new(input::function(&c.weight)?, &tol)?;
            (vec![holder_bound_check(&f, &s, c.p, &tol)?], tol)
        }
        Inequality::GlsWeighted => {
            let c: GlsWeightedCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            let s = WeightFunction::new(input::function(&c.weight)?, &tol)?;
            let psi = GeneratingFunction::from_spec(&c.psi)?;
            let nu = GeneratingFunction::from_spec(&c.nu)?;
            (vec![gls_weighted_bound_check(&f, &s, &psi, &nu, &tol)?], tol)
        }
        Inequality::GzsTail => {
            let c: GzsTailCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let mcfg = c.mc.resolve(cli)?;
            seed_used = Some(mcfg.seed);
            let z = GrandZygmundSpace::from_spec(&c.q)?;
            let (model, sample) = match &c.function {
                Some(src) => {
                    let f = input::function(src)?;
                    let s = sample_function(&f, &mcfg)?;
                    (f, s)
                }
                None => {
                    let p = c.p.ok_or_else(|| Failure::usage("gzs-tail config needs function or p"))?;
                    let alpha = c.alpha.unwrap_or(0.0);
                    let env = TailFunction::envelope(YoungOrlicz::new(p, alpha)?, 1.0)?;
                    (normlab::FunctionModel::prescribed_tail(env)?, extremal_rv(p, alpha, &mcfg)?)
                }
            };
            let v = gzs_norm(&model, &z, &tol)?;
            let cmp = tail_domination_against(&sample, |t| gzs_tail_envelope(&z, v.value, t), "gzs envelope", &mcfg)?;
            let rep = VerificationReport::inequality(
                "gzs-tail",
                normlab::report::Estimate::exact(cmp.violations as f64),
                normlab::report::Estimate::exact(0.0),
                0.0,
            )
            .param("V", v.value)
            .param("n", cmp.n as f64)
            .param("dkw_band", cmp.dkw_band)
            .label("function", model.describe())
            .note("lhs counts grid points where the empirical tail minus the DKW band exceeds the envelope");
            extra.insert("comparison".into(), to_value(&cmp));
            (vec![rep], tol)
        }
        Inequality::Embedding => {
            let c: EmbeddingCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            let scale = c.constant_scale.unwrap_or(1.0);
            (vec![embedding_check_scaled(&f, c.r, c.p, c.gamma, c.lhs_norm, scale, &tol)?], tol)
        }
        Inequality::Dilation => {
            let c: DilationCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            (vec![dilation_check(&f, &YoungOrlicz::new(c.p, c.alpha)?, c.c, &tol)?], tol)
        }
        Inequality::Monotonicity => {
            let c: MonotonicityCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            let n1 = YoungOrlicz::new(c.n1.p, c.n1.alpha)?;
            let n2 = YoungOrlicz::new(c.n2.p, c.n2.alpha)?;
            (vec![monotonicity_check(&f, &n1, &n2, &tol)?], tol)
        }
        Inequality::Lower => {
            let c: LowerCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            (vec![lower_estimate_check(&f, c.beta, c.s, &c.p_grid, &tol)?], tol)
        }
        Inequality::Inverse => {
            let c: InverseCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let f = input::function(&c.function)?;
            let variants: &[KappaVariant] = match c.variant {
                VariantChoice::Plain => &[KappaVariant::Plain],
                VariantChoice::Exponent => &[KappaVariant::Exponent],
                VariantChoice::Both => &[KappaVariant::Plain, KappaVariant::Exponent],
            };
            let dom = (c.p_domain[0], c.p_domain[1]);
            let reps = variants
                .iter()
                .map(|&v| inverse_embedding_check(&f, c.beta, &c.s_grid, dom, v, &tol))
                .collect::<Result<Vec<_>, _>>()?;
            (reps, tol)
        }
    };
    let verdict = worst(&reports);
    let mut table = Table::new(&VERIFY_COLUMNS);
    for r in &reports {
        table.push(vec![
            r.check.clone(),
            verdict_name(r.verdict).into(),
            num(r.lhs),
            num(r.rhs),
            num(r.margin),
            num(r.error_budget),
            r.notes.join("; "),
        ]);
    }
    let mut result = json!({ "inequality": name, "verdict": verdict, "reports": reports });
    result.as_object_mut().expect("object").extend(extra);
    let summary = format!(
        "{name}: {} (margin {})",
        verdict_name(verdict),
        reports.iter().map(|r| format!("{:e}", r.margin)).collect::<Vec<_>>().join(", ")
    );
    Ok(Outcome {
        config: json!({ "inequality": name, "config": raw }),
        result,
        table,
        summary,
        code: verdict.exit_code() as u8,
        tolerances: tol,
        seed: match seed_used {
            Some(s) => s,
            None => seed(cli, None)?,
        },
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn sharpness(cli: &Cli, a: &SharpnessArgs) -> Result<Outcome, Failure> {
    let tol = tolerances(cli, None)?;
    let rep = sharpness_search(a.r, a.p, a.gamma, &tol)?;
    let mut table = Table::new(&["kappa", "label", "u_value", "norm_p", "ratio", "error"]);
    for c in &rep.candidates {
        table.push(vec![num(c.kappa), c.label.clone(), num(c.u_value), num(c.norm_p), num(c.ratio), num(c.error)]);
    }
    let summary = format!(
        "theta {:.10}, best ratio {:.10} at kappa {} ({}), gap {:e}",
        rep.theta, rep.best_ratio_found, rep.best_kappa, rep.maximizer_label, rep.gap
    );
    let code = if rep.within_bound() { EXIT_PASS } else { EXIT_FAIL };
    Ok(Outcome {
        config: json!({ "r": a.r, "p": a.p, "gamma": a.gamma }),
        result: to_value(&rep),
        table,
        summary,
        code,
        tolerances: tol,
        seed: seed(cli, None)?,
    })
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ZetaPair {
    psi: PsiSpec,
    nu: PsiSpec,
}

fn status<T>(r: &Result<T, normlab::Error>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

fn constants(cli: &Cli, a: &ConstantsArgs) -> Result<Outcome, Failure> {
    let tol = tolerances(cli, None)?;
    let (what, rows, table) = match a.what {
        Constant::Theta => {
            let grid = input::grid(&a.grid, &["r", "p", "gamma"])?;
            let vals = par::map(&grid, |g| theta(g["r"], g["p"], g["gamma"]));
            let mut table = Table::new(&["r", "p", "gamma", "value", "error", "status"]);
            let mut rows = Vec::new();
            for (g, v) in grid.iter().zip(&vals) {
                let value = v.as_ref().copied().unwrap_or(f64::NAN);
                let err = value.abs() * 4.0 * f64::EPSILON;
                table.push(vec![num(g["r"]), num(g["p"]), num(g["gamma"]), num(value), num(err), status(v)]);
                rows.push(json!({ "r": g["r"], "p": g["p"], "gamma": g["gamma"], "value": value, "error": err, "status": status(v) }));
            }
            ("theta", rows, table)
        }
        Constant::J => {
            let grid = input::grid(&a.grid, &["alpha", "p", "s"])?;
            let vals = par::map(&grid, |g| moment_bound_j(g["alpha"], g["p"], g["s"], &tol));
            let mut table = Table::new(&["alpha", "p", "s", "value", "error", "status"]);
            let mut rows = Vec::new();
            for (g, v) in grid.iter().zip(&vals) {
                let (value, err) = v.as_ref().map(|r| (r.j_value, r.j_error)).unwrap_or((f64::NAN, f64::NAN));
                table.push(vec![num(g["alpha"]), num(g["p"]), num(g["s"]), num(value), num(err), status(v)]);
                rows.push(json!({ "alpha": g["alpha"], "p": g["p"], "s": g["s"], "value": value, "error": err, "status": status(v) }));
            }
            ("j", rows, table)
        }
        Constant::Zeta => {
            let pairs: Vec<ZetaPair> = parse_json(&json_text(&a.grid)?, "zeta grid")?;
            let vals = par::map(&pairs, |pr| -> Result<_, normlab::Error> {
                let psi = GeneratingFunction::from_spec(&pr.psi)?;
                let nu = GeneratingFunction::from_spec(&pr.nu)?;
                Ok((psi.describe(), nu.describe(), zeta_constant(&psi, &nu, &tol)?))
            });
            let mut table = Table::new(&["psi", "nu", "value", "error", "argmin_p", "status"]);
            let mut rows = Vec::new();
            for (pr, v) in pairs.iter().zip(&vals) {
                let (ps, ns, value, arg) = match v {
                    Ok((a, b, z)) => (a.clone(), b.clone(), z.value, z.argmin_p.unwrap_or(f64::NAN)),
                    Err(_) => (String::new(), String::new(), f64::NAN, f64::NAN),
                };
                // golden refinement stops at a relative bracket of 1e-10
                let err = if value.is_finite() { value.abs() * 1e-10 } else { 0.0 };
                let value_txt = if value.is_infinite() { "inf".to_string() } else { num(value) };
                table.push(vec![ps.clone(), ns.clone(), value_txt, num(err), num(arg), status(v)]);
                rows.push(json!({
                    "psi": to_value(&pr.psi), "nu": to_value(&pr.nu),
                    "value": if value.is_infinite() { json!("inf") } else { json!(value) },
                    "error": err, "argmin_p": arg, "status": status(v),
                }));
            }
            ("zeta", rows, table)
        }
    };
    let summary = format!("{what}: {} rows", rows.len());
    Ok(Outcome {
        config: json!({ "what": what, "grid": a.grid }),
        result: json!({ "what": what, "rows": rows }),
        table,
        summary,
        code: EXIT_PASS,
        tolerances: tol,
        seed: seed(cli, None)?,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtremalCfg {
    p: f64,
    alpha: f64,
    #[serde(default)]
    mc: McSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeCfg {
    p: f64,
    alpha: f64,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DominationCfg {
    /// Extremal source `(p, alpha)`, also the default envelope.
    p: f64,
    alpha: f64,
    /// Sample `|f(U)|` instead of the extremal variable.
    function: Option<String>,
    envelope: Option<EnvelopeCfg>,
    #[serde(default)]
    mc: McSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlowupCfg {
    p: f64,
    alpha: f64,
    s_grid: Vec<f64>,
    #[serde(default)]
    mc: McSection,
    tolerances: Option<Tolerances>,
}

fn tail_table(rows: impl Iterator<Item = [f64; 4]>) -> Table {
    let mut t = Table::new(&["t", "empirical", "envelope", "band"]);
    for r in rows {
        t.push(r.iter().map(|x| num(*x)).collect());
    }
    t
}

fn mc(cli: &Cli, a: &McArgs) -> Result<Outcome, Failure> {
    let raw: Value = parse_json(&json_text(&a.config)?, "config")?;
    let name = a.experiment.to_possible_value().expect("named").get_name().to_string();
    let (result, table, summary, code, tol, s) = match a.experiment {
        Experiment::Extremal => {
            let c: ExtremalCfg = typed(&raw, &name)?;
            let cfg = c.mc.resolve(cli)?;
            let sample = extremal_rv(c.p, c.alpha, &cfg)?;
            let n = YoungOrlicz::new(c.p, c.alpha)?;
            let mut checkpoints = Vec::new();
            let mut rows = Vec::new();
            for t in [1.0, 2.0, 5.0, 10.0, 100.0] {
                let emp = sample.empirical_tail(t);
                let env = n.delta(t);
                let band = 3.0 * (env * (1.0 - env) / cfg.n as f64).sqrt();
                checkpoints.push(json!({ "t": t, "empirical": emp, "envelope": env, "binomial_band": band }));
                rows.push([t, emp, env, band]);
            }
            let max = sample.values.iter().fold(0.0f64, |m, v| m.max(*v));
            let result = json!({
                "experiment": name, "p": c.p, "alpha": c.alpha, "n": cfg.n, "seed": cfg.seed,
                "sample_max": max, "sample_mean": sample.moment(1.0), "checkpoints": checkpoints,
            });
            let summary = format!("extremal p={} alpha={}: n={} max={max:e}", c.p, c.alpha, cfg.n);
            (result, tail_table(rows.into_iter()), summary, EXIT_PASS, tolerances(cli, None)?, cfg.seed)
        }
        Experiment::Domination => {
            let c: DominationCfg = typed(&raw, &name)?;
            let cfg = c.mc.resolve(cli)?;
            let sample = match &c.function {
                Some(src) => sample_function(&input::function(src)?, &cfg)?,
                None => extremal_rv(c.p, c.alpha, &cfg)?,
            };
            let env = match &c.envelope {
                Some(e) => TailFunction::envelope(YoungOrlicz::new(e.p, e.alpha)?, e.scale)?,
                None => TailFunction::envelope(YoungOrlicz::new(c.p, c.alpha)?, 1.0)?,
            };
            let rep = tail_domination_experiment(&sample, &env, &cfg)?;
            let summary = format!("violations = {} (band {:e}, n = {})", rep.violations, rep.dkw_band, rep.n);
            let code = if rep.violations == 0 { EXIT_PASS } else { EXIT_FAIL };
            let table = tail_table(rep.rows());
            (to_value(&rep), table, summary, code, tolerances(cli, None)?, cfg.seed)
        }
        Experiment::Blowup => {
            let c: BlowupCfg = typed(&raw, &name)?;
            let tol = tolerances(cli, c.tolerances)?;
            let cfg = c.mc.resolve(cli)?;
            let rep = moment_blowup_experiment(c.p, c.alpha, &c.s_grid, &cfg, &tol)?;
            let mut table = Table::new(&[
                "s",
                "empirical",
                "analytic_j",
                "ratio",
                "relative_se",
                "band_lo",
                "band_hi",
                "within_band",
                "variance_warning",
            ]);
            for r in &rep.rows {
                table.push(vec![
                    num(r.s),
                    num(r.empirical),
                    num(r.analytic_j),
                    num(r.ratio),
                    num(r.relative_se),
                    num(r.band[0]),
                    num(r.band[1]),
                    r.within_band.to_string(),
                    r.variance_warning.to_string(),
                ]);
            }
            let summary = format!(
                "blowup: {} of {} ratios within band, {} variance warnings",
                rep.rows.iter().filter(|r| r.within_band).count(),
                rep.rows.len(),
                rep.variance_warnings()
            );
            let code = if rep.all_within_band() { EXIT_PASS } else { EXIT_FAIL };
            (to_value(&rep), table, summary, code, tol, cfg.seed)
        }
    };
    Ok(Outcome {
        config: json!({ "experiment": name, "config": raw }),
        result,
        table,
        summary,
        code,
        tolerances: tol,
        seed: s,
    })
}
