//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::contracts::{solve_with, ContractSolution, SolveOptions};
use crate::error::{Error, Result, ValidationError};
use crate::model::{
    check_assumptions, in_degree, out_degree, parse_model, serialize_model, weak_components, ModelInstance,
};
use crate::oracle::{iterate_best_response, maximize_profit_numeric, simulate_outputs};
use crate::placement::{beta_sweep, default_beta_to, enumerate_placements, linspace, pay_crossings, placement_curves};
use crate::statics::{self, DerivativeReport, Parameter};

/// Environment variable capping worker threads (0 = one per core).
pub const THREADS_ENV: &str = "NETCONTRACT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "netcontract", version, about = "Optimal linear contracts on peer-effect networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the spectral conditions, weak components and degrees.
    Check { model: PathBuf },
    /// Compute the optimal contract, efforts and profit.
    Solve {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Solve even when the spectral conditions fail.
        #[arg(long = "unsafe")]
        unsafe_mode: bool,
    },
    /// Comparative statics with finite-difference cross-checks.
    Diff {
        model: PathBuf,
        /// g:FROM:TO, beta, cost, eta or sigma2.
        #[arg(long)]
        param: String,
    },
    /// Solve along a grid of peer-effect strengths (CSV).
    Sweep {
        model: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        beta_from: f64,
        /// Defaults to just below the largest admissible strength.
        #[arg(long)]
        beta_to: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Rank every assignment of a cost multiset to network positions.
    Place {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        costs: Vec<f64>,
        /// A single value, or FROM:TO:STEPS for profit curves.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Check the closed forms against numeric maximization, best-response
    /// dynamics and simulation. Accepts a model file or `solve` JSON output.
    Oracle {
        model: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

/// Entry point for the binary.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    if let Err(e) = configure_threads() {
        return report_error(&e, &mut err);
    }
    run(std::env::args_os().map(|a| a.to_string_lossy().into_owned()), &mut out, &mut err)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| ValidationError::Argument(format!("{THREADS_ENV} must be a non-negative integer, got `{raw}`")))?;
    // a second initialization (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command; returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let body = json!({"error": {"kind": "usage", "exit_code": 2, "message": e.kind().to_string(),
                "detail": e.to_string().trim()}});
            let _ = writeln!(err, "{body}");
            return 2;
        }
    };
    let outcome = match cli.command {
        Command::Check { model } => cmd_check(&model, out),
        Command::Solve { model, format, unsafe_mode } => cmd_solve(&model, format, unsafe_mode, out),
        Command::Diff { model, param } => cmd_diff(&model, &param, out),
        Command::Sweep { model, beta_from, beta_to, steps } => cmd_sweep(&model, beta_from, beta_to, steps, out),
        Command::Place { model, costs, beta, format } => cmd_place(&model, &costs, beta.as_deref(), format, out),
        Command::Oracle { model, draws, seed, format } => cmd_oracle(&model, draws, seed, format, out),
    };
    match outcome {
        Ok(code) => code,
        // downstream reader went away (e.g. `| head`)
        Err(Error::Numeric(m)) if m == BROKEN_PIPE => 0,
        Err(e) => report_error(&e, err),
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    let mut body = json!({"kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string()});
    if let Error::Stage { stage, .. } = e {
        body["stage"] = json!(stage);
    }
    match e.root() {
        Error::Assumption { condition, rho } => {
            body["condition"] = json!(condition.to_string());
            body["rho"] = json!(rho);
        }
        Error::NotConcave { min_eigenvalue } => body["min_eigenvalue"] = json!(min_eigenvalue),
        _ => {}
    }
    let _ = writeln!(err, "{}", json!({ "error": body }));
    e.exit_code()
}

const BROKEN_PIPE: &str = "output closed";

fn io_error(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        return Error::numeric(BROKEN_PIPE);
    }
    Error::numeric(format!("write failed: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(io),
        other => Error::numeric(format!("csv: {other:?}")),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| ValidationError::Argument(format!("cannot read {}: {e}", path.display())).into())
}

fn load_model(path: &Path) -> Result<ModelInstance> {
    Ok(parse_model(&read_text(path)?)?)
}

fn model_value(inst: &ModelInstance) -> Value {
    serde_json::from_str(&serialize_model(inst)).expect("model JSON re-parses")
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::numeric(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_error)
}

/// `%.12g`-style formatting for CSV and tables.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // the exponent after rounding to 12 digits decides the style, as in C
    let sci = format!("{x:.11e}");
    let (mantissa, e) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = e.parse().unwrap_or(0);
    if !(-4..12).contains(&exp) {
        return format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cmd_check(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let inst = load_model(path)?;
    let report = check_assumptions(&inst)?;
    let labels = inst.labels();
    let (c1, c2) = report.condition_names();
    let components: Vec<Vec<&str>> = weak_components(inst.network())
        .iter()
        .map(|c| c.iter().map(|&k| labels[k].as_str()).collect())
        .collect();
    let degrees: Vec<Value> = (0..inst.n())
        .map(|k| json!({"agent": labels[k], "in": in_degree(inst.network(), k), "out": out_degree(inst.network(), k)}))
        .collect();
    emit_json(
        out,
        &json!({
            "assumptions": report,
            "conditions": [c1, c2],
            "components": components,
            "degrees": degrees,
        }),
    )?;
    Ok(0)
}

fn solution_json(inst: &ModelInstance, s: &ContractSolution) -> Value {
    json!({
        "agents": inst.labels(),
        "v": s.contract.v.as_slice(),
        "z": s.contract.z.as_slice(),
        "a": s.efforts.as_slice(),
        "ce": s.ce.as_slice(),
        "profit": s.profit,
        "diagnostics": s.diagnostics,
        "path": s.path,
        "unsafe": s.unsafe_mode,
        "model": model_value(inst),
    })
}

fn cmd_solve(path: &Path, format: Format, unsafe_mode: bool, out: &mut dyn Write) -> Result<i32> {
    let inst = load_model(path)?;
    let s = solve_with(&inst, &SolveOptions { unsafe_mode })?;
    let labels = inst.labels();
    match format {
        Format::Json => emit_json(out, &solution_json(&inst, &s))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["agent", "v", "z", "a", "ce"]).map_err(csv_err)?;
            for k in 0..inst.n() {
                w.write_record([
                    labels[k].clone(),
                    fmt_g12(s.contract.v[k]),
                    fmt_g12(s.contract.z[k]),
                    fmt_g12(s.efforts[k]),
                    fmt_g12(s.ce[k]),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_error)?;
        }
        Format::Table => {
            let width = labels.iter().map(|l| l.len()).max().unwrap_or(5).max(5);
            let mut text = format!("{:<width$}  {:>18}  {:>18}  {:>18}  {:>18}\n", "agent", "v", "z", "a", "ce");
            for k in 0..inst.n() {
                text += &format!(
                    "{:<width$}  {:>18}  {:>18}  {:>18}  {:>18}\n",
                    labels[k],
                    fmt_g12(s.contract.v[k]),
                    fmt_g12(s.contract.z[k]),
                    fmt_g12(s.efforts[k]),
                    fmt_g12(s.ce[k])
                );
            }
            let (c1, c2) = s.diagnostics.condition_names();
            text += &format!(
                "profit {}\n{c1} rho={} {}  {c2} rho={} {}\n",
                fmt_g12(s.profit),
                fmt_g12(s.diagnostics.rho1),
                if s.diagnostics.a1_holds { "ok" } else { "VIOLATED" },
                fmt_g12(s.diagnostics.rho2),
                if s.diagnostics.a2_holds { "ok" } else { "VIOLATED" },
            );
            out.write_all(text.as_bytes()).map_err(io_error)?;
        }
    }
    Ok(0)
}

fn parse_param(inst: &ModelInstance, spec: &str) -> Result<Parameter> {
    let bad = || ValidationError::Argument(format!("unknown parameter `{spec}`; use g:FROM:TO, beta, cost, eta or sigma2"));
    Ok(match spec {
        "beta" => Parameter::Beta,
        "cost" => Parameter::Cost,
        "eta" => Parameter::Eta,
        "sigma2" => Parameter::Sigma2,
        _ => {
            let rest = spec.strip_prefix("g:").ok_or_else(bad)?;
            let (from, to) = rest.split_once(':').ok_or_else(bad)?;
            let (i, j) = (inst.index_of(from)?, inst.index_of(to)?);
            if i == j {
                return Err(ValidationError::SelfLoop(from.to_string()).into());
            }
            Parameter::Weight { i, j }
        }
    })
}

fn cmd_diff(path: &Path, spec: &str, out: &mut dyn Write) -> Result<i32> {
    let inst = load_model(path)?;
    let param = parse_param(&inst, spec)?;
    let reports: Vec<DerivativeReport> = [statics::Target::V, statics::Target::A, statics::Target::Profit]
        .into_iter()
        .map(|t| statics::derivative(&inst, t, param))
        .collect::<Result<_>>()?;
    let mut body = json!({
        "parameter": spec,
        "agents": inst.labels(),
        "fd_only": reports[0].fd_only,
        "v": reports[0],
        "a": reports[1],
        "profit": reports[2],
    });
    if reports[0].fd_only {
        body["note"] = json!("per-agent costs: finite differences only");
    }
    if let Parameter::Weight { i, j } = param {
        let (v, a) = statics::predict_link_effect(&inst, i, j);
        body["predicted"] = json!({"v": v, "a": a});
    }
    emit_json(out, &body)?;
    Ok(0)
}

fn cmd_sweep(path: &Path, from: f64, to: Option<f64>, steps: usize, out: &mut dyn Write) -> Result<i32> {
    let inst = load_model(path)?;
    let to = match to {
        Some(t) => t,
        None => default_beta_to(&inst)?,
    };
    if steps == 0 {
        return Err(ValidationError::Argument("--steps must be at least 1".into()).into());
    }
    if !(from >= 0.0) || !(to >= from) {
        return Err(ValidationError::Argument(format!("invalid range {from}..{to}")).into());
    }
    let sweep = beta_sweep(&inst, &linspace(from, to, steps))?;
    let labels = inst.labels();
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["beta", "agent", "v", "a", "profit", "feasible"]).map_err(csv_err)?;
        let mut rows = sweep.rows.iter().peekable();
        for &beta in &sweep.grid {
            match rows.peek() {
                Some(r) if r.beta == beta => {
                    for k in 0..inst.n() {
                        w.write_record([
                            fmt_g12(beta),
                            labels[k].clone(),
                            fmt_g12(r.v[k]),
                            fmt_g12(r.a[k]),
                            fmt_g12(r.profit),
                            "true".into(),
                        ])
                        .map_err(csv_err)?;
                    }
                    rows.next();
                }
                _ => {
                    for label in labels {
                        w.write_record([fmt_g12(beta), label.clone(), String::new(), String::new(), String::new(), "false".into()])
                            .map_err(csv_err)?;
                    }
                }
            }
        }
        w.flush().map_err(io_error)?;
    }
    let crossings: Vec<Value> = pay_crossings(&sweep, 1e-9)
        .iter()
        .map(|c| json!({"overtaking": labels[c.overtaking], "overtaken": labels[c.overtaken], "beta": c.beta}))
        .collect();
    let footer = json!({"crossings": crossings, "infeasible": sweep.infeasible.len(), "beta_to": to});
    writeln!(out, "# {footer}").map_err(io_error)?;
    Ok(0)
}

enum BetaSpec {
    Single(f64),
    Range(Vec<f64>),
}

fn parse_beta_spec(spec: &str) -> Result<BetaSpec> {
    let bad = || ValidationError::Argument(format!("--beta must be a number or FROM:TO:STEPS, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(BetaSpec::Single(x.trim().parse().map_err(|_| bad())?)),
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            Ok(BetaSpec::Range(linspace(a, b, n)))
        }
        _ => Err(bad().into()),
    }
}

fn join_costs(c: &[f64]) -> String {
    c.iter().map(|x| fmt_g12(*x)).collect::<Vec<_>>().join(";")
}

fn cmd_place(path: &Path, costs: &[f64], beta: Option<&str>, format: Format, out: &mut dyn Write) -> Result<i32> {
    let inst = load_model(path)?;
    let spec = match beta {
        Some(s) => parse_beta_spec(s)?,
        None => BetaSpec::Single(inst.beta()),
    };
    match spec {
        BetaSpec::Single(b) => {
            let r = enumerate_placements(inst.network(), costs, inst.params(), b)?;
            match format {
                Format::Json => emit_json(out, &json!({"result": r, "agents": inst.labels()}))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                            w.write_record(["rank", "assignment", "profit", "feasible"]).map_err(csv_err)?;
                    for (pos, &k) in r.ranking.iter().enumerate() {
                        let a = &r.assignments[k];
                        w.write_record([(pos + 1).to_string(), join_costs(&a.costs), fmt_g12(a.profit.unwrap_or(f64::NAN)), "true".into()])
                            .map_err(csv_err)?;
                    }
                    for a in r.assignments.iter().filter(|a| !a.feasible) {
                        w.write_record([String::new(), join_costs(&a.costs), String::new(), "false".into()]).map_err(csv_err)?;
                    }
                    w.flush().map_err(io_error)?;
                }
                Format::Table => {
                    let mut text = format!("beta {}  positions {}\n", fmt_g12(b), inst.labels().join(";"));
                    text += &format!("{:>4}  {:<32}  {:>18}\n", "rank", "costs by position", "profit");
                    for (pos, &k) in r.ranking.iter().enumerate() {
                        let a = &r.assignments[k];
                        let mark = if Some(k) == r.best { " *" } else { "" };
                        text += &format!(
                            "{:>4}  {:<32}  {:>18}{mark}\n",
                            pos + 1,
                            join_costs(&a.costs),
                            fmt_g12(a.profit.unwrap_or(f64::NAN))
                        );
                    }
                    for a in r.assignments.iter().filter(|a| !a.feasible) {
                        text += &format!("{:>4}  {:<32}  {:>18}\n", "-", join_costs(&a.costs), "inadmissible");
                    }
                    if r.all_tied {
                        text += "all assignments tie\n";
                    } else if r.tied_groups > 0 {
                        text += &format!("{} group(s) of tied assignments\n", r.tied_groups);
                    }
                    out.write_all(text.as_bytes()).map_err(io_error)?;
                }
            }
        }
        BetaSpec::Range(betas) => {
            let curves = placement_curves(inst.network(), costs, inst.params(), &betas)?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["beta", "assignment", "profit", "feasible"]).map_err(csv_err)?;
            for (b, &beta) in curves.betas.iter().enumerate() {
                for (a, costs) in curves.assignments.iter().enumerate() {
                    let p = curves.profit[a][b];
                    w.write_record([
                        fmt_g12(beta),
                        join_costs(costs),
                        p.map(fmt_g12).unwrap_or_default(),
                        p.is_some().to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            w.flush().map_err(io_error)?;
        }
    }
    Ok(0)
}

struct Check {
    name: String,
    closed_form: f64,
    oracle: f64,
    error: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn cmd_oracle(path: &Path, draws: usize, seed: u64, format: Format, out: &mut dyn Write) -> Result<i32> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| ValidationError::Json(e.to_string()))?;
    let (inst, recorded_profit) = match value.get("model") {
        Some(model) => {
            let recorded = value.get("profit").and_then(Value::as_f64);
            (parse_model(&model.to_string())?, recorded)
        }
        None => (parse_model(&text)?, None),
    };
    let s = solve_with(&inst, &SolveOptions::default())?;
    let n = inst.n();
    let labels = inst.labels();
    let mut checks = Vec::new();

    let numeric = maximize_profit_numeric(&inst, &DVector::zeros(n))?;
    for k in 0..n {
        let (cf, num) = (s.contract.v[k], numeric.v_opt[k]);
        checks.push(Check {
            name: format!("v[{}] vs numeric maximizer", labels[k]),
            closed_form: cf,
            oracle: num,
            error: (cf - num).abs() / cf.abs().max(1.0),
            tolerance: 1e-6,
        });
    }
    checks.push(Check {
        name: "profit vs numeric maximizer".into(),
        closed_form: s.profit,
        oracle: numeric.profit_opt,
        error: (s.profit - numeric.profit_opt).abs() / s.profit.abs().max(1.0),
        tolerance: 1e-8,
    });
    if let Some(p) = recorded_profit {
        checks.push(Check {
            name: "profit vs recorded solve output".into(),
            closed_form: s.profit,
            oracle: p,
            error: (s.profit - p).abs(),
            tolerance: 1e-9,
        });
    }

    let br = iterate_best_response(&inst, &s.contract.v, 1e-12)?;
    for k in 0..n {
        checks.push(Check {
            name: format!("a[{}] vs best-response dynamics", labels[k]),
            closed_form: s.efforts[k],
            oracle: br.efforts[k],
            error: (s.efforts[k] - br.efforts[k]).abs(),
            tolerance: 1e-9,
        });
    }
    for k in 0..n {
        let wbar = inst.params().reservation[k];
        checks.push(Check {
            name: format!("ce[{}] vs reservation wage", labels[k]),
            closed_form: s.ce[k],
            oracle: wbar,
            error: (s.ce[k] - wbar).abs(),
            tolerance: 1e-9,
        });
    }

    let sim = simulate_outputs(&inst, &s.contract, &s.efforts, draws, seed)?;
    let eta = inst.params().eta;
    for k in 0..n {
        let expected = -(-eta * inst.params().reservation[k]).exp();
        checks.push(Check {
            name: format!("mean utility[{}] (3 std err)", labels[k]),
            closed_form: expected,
            oracle: sim.mean_utility[k],
            error: (sim.mean_utility[k] - expected).abs(),
            tolerance: 3.0 * sim.std_err[k],
        });
    }
    for k in 0..n {
        // delta method: d(-ln(-u)/eta)/du = -1/(eta u)
        let se = sim.std_err[k] / (eta * sim.mean_utility[k].abs());
        let wbar = inst.params().reservation[k];
        checks.push(Check {
            name: format!("simulated ce[{}] (3 std err)", labels[k]),
            closed_form: wbar,
            oracle: sim.implied_ce[k],
            error: (sim.implied_ce[k] - wbar).abs(),
            tolerance: 3.0 * se,
        });
    }
    checks.push(Check {
        name: "mean profit (3 std err)".into(),
        closed_form: s.profit,
        oracle: sim.mean_profit,
        error: (sim.mean_profit - s.profit).abs(),
        tolerance: 3.0 * sim.profit_std_err,
    });

    let all_pass = checks.iter().all(Check::pass);
    match format {
        Format::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({"check": c.name, "closed_form": c.closed_form, "oracle": c.oracle,
                        "error": c.error, "tolerance": c.tolerance, "pass": c.pass()})
                })
                .collect();
            emit_json(
                out,
                &json!({"seed": seed, "draws": draws, "checks": rows, "pass": all_pass,
                    "maximizer_iterations": numeric.iterations, "best_response_iterations": br.iterations,
                    "best_response_contraction": br.contraction_ratio}),
            )?;
        }
        Format::Csv | Format::Table => {
            let mut text = format!("seed {seed}  draws {draws}\n");
            text += &format!(
                "{:<40}  {:>18}  {:>18}  {:>12}  {:>12}  {}\n",
                "check", "closed form", "oracle", "error", "tolerance", "result"
            );
            for c in &checks {
                text += &format!(
                    "{:<40}  {:>18}  {:>18}  {:>12.3e}  {:>12.3e}  {}\n",
                    c.name,
                    fmt_g12(c.closed_form),
                    fmt_g12(c.oracle),
                    c.error,
                    c.tolerance,
                    if c.pass() { "pass" } else { "FAIL" }
                );
            }
            out.write_all(text.as_bytes()).map_err(io_error)?;
        }
    }
    if all_pass {
        Ok(0)
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.as_str()).collect();
        Err(Error::consistency(format!("oracle disagreement: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g12(0.5), "0.5");
        assert_eq!(fmt_g12(4.0 / 3.0), "1.33333333333");
        assert_eq!(fmt_g12(-0.5555555555555556), "-0.555555555556");
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(123456.0), "123456");
        assert_eq!(fmt_g12(2.5e13), "2.5e+13");
        assert_eq!(fmt_g12(6.07658396369e-5), "6.07658396369e-05");
        assert_eq!(fmt_g12(0.000123), "0.000123");
        assert_eq!(fmt_g12(9.999999999999995e-5), "0.0001");
        assert_eq!(fmt_g12(999999999999.7), "1e+12");
    }

    #[test]
    fn beta_specs() {
        assert!(matches!(parse_beta_spec("0.2").unwrap(), BetaSpec::Single(x) if x == 0.2));
        assert!(matches!(parse_beta_spec("0:0.2:3").unwrap(), BetaSpec::Range(v) if v.len() == 3));
        assert!(parse_beta_spec("a:b").is_err());
    }
}
