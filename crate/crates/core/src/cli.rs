//! Command-line front end.
//!
//! [`run`] parses arguments, dispatches to the library and renders the
//! result, returning the exit status instead of exiting so that it can be
//! driven from tests. Exit status is 0 on success, 2 for bad input or an
//! inapplicable formula, and 1 for internal errors.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotics::{asymptotic_ratio, check_cor3_conditions, ProbeGrid};
use crate::diameter::{diameter_bounds, estimate_diameter, exact_diameter, DensityTable};
use crate::error::{Error, Result};
use crate::packing::{delta_1d, delta_via_theorem1, optimize_packing_config};
use crate::tau::{solve_tau_with, TauOptions};
use crate::weights::{
    critical_params, parse_weight_json, validate_class_a, ClassAParams, ValidationReport,
    WeightFunction,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PACKFN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "packfn",
    version,
    about = "Weighted best-packing constants and minimal diameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    output: OutputFormat,
    /// Packing density override `d=value`; may be repeated.
    #[arg(long = "density", value_name = "D=DELTA")]
    densities: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve f(t) = f(alpha t).
    Tau {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        alpha: f64,
        /// Use bisection even when a closed form exists.
        #[arg(long)]
        bisection: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Packing constant from the exact or bounded minimal diameter.
    Delta {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One-dimensional packing constant with its optimal configuration.
    Delta1d {
        #[arg(long)]
        weight: String,
        #[arg(long = "N")]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal N-point diameter: exact value, bounds, or numeric estimate.
    Diameter {
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        /// Run the numeric search with this many objective evaluations.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Search directly for a configuration maximizing the minimum weight.
    Optimize {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Ratio of the packing constant to its leading-order approximation.
    Asympt {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        d: usize,
        /// Comma-separated, strictly increasing.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Also probe the regularity conditions for this exponent.
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a weight against the admissible class.
    Validate {
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// What `validate` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub report: ValidationReport,
    pub params: Option<ClassAParams>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn ok(stdout: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn err(code: i32, stderr: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => 1,
        _ => 2,
    }
}

/// Parses `gaussian:<beta>`, `powerlaw:<p>,<q>`, `file:<path>` or inline JSON.
pub fn parse_weight_spec(spec: &str) -> Result<WeightFunction> {
    let spec = spec.trim();
    let number = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("`{s}` is not a number in weight `{spec}`")))
    };
    if spec.starts_with('{') {
        return parse_weight_json(spec);
    }
    let (kind, rest) = spec.split_once(':').ok_or_else(|| {
        Error::Parse(format!(
            "weight `{spec}` must be gaussian:<beta>, powerlaw:<p>,<q>, file:<path> or JSON"
        ))
    })?;
    match kind {
        "gaussian" => WeightFunction::gaussian(number(rest)?),
        "powerlaw" => {
            let (p, q) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("powerlaw needs p,q, got `{rest}`")))?;
            WeightFunction::power_law(number(p)?, number(q)?)
        }
        "file" => {
            let text = std::fs::read_to_string(rest)
                .map_err(|e| Error::Parse(format!("cannot read weight file {rest}: {e}")))?;
            parse_weight_json(&text).map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("{rest}: {msg}")),
                other => other,
            })
        }
        other => Err(Error::Parse(format!("unknown weight kind `{other}`"))),
    }
}

fn parse_densities(items: &[String]) -> Result<DensityTable> {
    let mut table = DensityTable::default();
    for item in items {
        let (d, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("density `{item}` must look like d=value")))?;
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension in density `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value in density `{item}`")))?;
        table.set(d, v)?;
    }
    Ok(table)
}

fn weight_and_params(spec: &str) -> Result<(WeightFunction, ClassAParams)> {
    let w = parse_weight_spec(spec)?;
    let p = critical_params(&w)?;
    Ok((w, p))
}

/// Sizes the global thread pool from [`THREADS_ENV`]; unset or invalid
/// values leave the default.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Only fails if the pool already exists, in which case it stays.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Runs one command. `args` excludes the program name.
pub fn run<I, S>(args: I) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv =
        std::iter::once(std::ffi::OsString::from("packfn")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                RunOutput::ok(text)
            } else {
                RunOutput::err(code, text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) => out,
        Err(e) => RunOutput::err(exit_code(&e), format!("error: {e}\n")),
    }
}

fn dispatch(cmd: Command) -> Result<RunOutput> {
    match cmd {
        Command::Tau {
            weight,
            alpha,
            bisection,
            common,
        } => {
            let (w, p) = weight_and_params(&weight)?;
            let opts = if bisection {
                TauOptions::bisection()
            } else {
                TauOptions::default()
            };
            let r = solve_tau_with(&w, &p, alpha, &opts)?;
            emit(&r, common.output, None, None)
        }
        Command::Delta {
            weight,
            d,
            n,
            common,
        } => {
            let (w, p) = weight_and_params(&weight)?;
            let table = parse_densities(&common.densities)?;
            let dia = match exact_diameter(d, n) {
                Some(e) => e,
                None => diameter_bounds(d, n, &table)?,
            };
            let r = delta_via_theorem1(&w, &p, d, n, &dia)?;
            let refusal = (!r.applicable).then(|| {
                format!(
                    "not applicable: D = {} does not exceed M/eps = {}",
                    r.d_used,
                    p.threshold()
                )
            });
            emit(&r, common.output, None, refusal)
        }
        Command::Delta1d { weight, n, common } => {
            let (w, p) = weight_and_params(&weight)?;
            let r = delta_1d(&w, &p, n)?;
            let refusal = r.delta.is_none().then(|| {
                format!(
                    "not applicable: D = {} does not exceed M/eps = {}",
                    r.d_used,
                    p.threshold()
                )
            });
            emit(&r, common.output, None, refusal)
        }
        Command::Diameter {
            d,
            n,
            budget,
            seed,
            common,
        } => {
            let table = parse_densities(&common.densities)?;
            let r = match (budget, exact_diameter(d, n)) {
                (Some(b), _) => estimate_diameter(d, n, b, seed, &table)?,
                (None, Some(e)) => e,
                (None, None) => diameter_bounds(d, n, &table)?,
            };
            emit(&r, common.output, None, None)
        }
        Command::Optimize {
            weight,
            d,
            n,
            budget,
            seed,
            common,
        } => {
            let (w, p) = weight_and_params(&weight)?;
            let r = optimize_packing_config(&w, &p, d, n, budget, seed)?;
            emit(&r, common.output, None, None)
        }
        Command::Asympt {
            weight,
            d,
            n,
            beta,
            common,
        } => {
            let (w, p) = weight_and_params(&weight)?;
            let table = parse_densities(&common.densities)?;
            let mut r = asymptotic_ratio(&w, &p, d, &table, &n)?;
            if let Some(b) = beta {
                r.beta_condition = Some(check_cor3_conditions(&w, b, &ProbeGrid::default())?);
            }
            let refusal = r
                .rows
                .is_empty()
                .then(|| "no requested N satisfies D > M/eps".to_string());
            emit(&r, common.output, Some("rows"), refusal)
        }
        Command::Validate {
            weight,
            grid,
            common,
        } => {
            let w = parse_weight_spec(&weight)?;
            let report = validate_class_a(&w, grid);
            let (params, error) = if report.passed() {
                match critical_params(&w) {
                    Ok(p) => (Some(p), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            } else {
                (None, None)
            };
            let refusal = params.is_none().then(|| match error.as_deref() {
                Some(e) => e.to_string(),
                None => "weight is not in class A".to_string(),
            });
            let out = ValidateOutput {
                report,
                params,
                error,
            };
            emit(&out, common.output, Some("report.clauses"), refusal)
        }
    }
}

fn emit<T: Serialize>(
    value: &T,
    format: OutputFormat,
    table_key: Option<&str>,
    refusal: Option<String>,
) -> Result<RunOutput> {
    let json = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    let text = match format {
        OutputFormat::Json => {
            let mut s =
                serde_json::to_string_pretty(&json).map_err(|e| Error::Internal(e.to_string()))?;
            s.push('\n');
            s
        }
        OutputFormat::Csv => to_csv(&json, table_key)?,
        OutputFormat::Human => to_human(&json),
    };
    Ok(match refusal {
        None => RunOutput::ok(text),
        Some(why) => RunOutput {
            code: 2,
            stdout: text,
            stderr: format!("{why}\n"),
        },
    })
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, key| cur.get(key))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

// Tabular results use one row per entry; everything else is one row of
// top-level fields, with nested values as embedded JSON.
fn to_csv(json: &Value, table_key: Option<&str>) -> Result<String> {
    let rows: Vec<&serde_json::Map<String, Value>> = match table_key
        .and_then(|k| lookup(json, k))
        .and_then(Value::as_array)
    {
        Some(items) => items.iter().filter_map(Value::as_object).collect(),
        None => json.as_object().into_iter().collect(),
    };
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| Error::Internal(e.to_string());
    if let Some(first) = rows.first() {
        wtr.write_record(first.keys()).map_err(internal)?;
        for row in &rows {
            wtr.write_record(row.values().map(cell)).map_err(internal)?;
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn to_human(json: &Value) -> String {
    let mut out = String::new();
    human_into(&mut out, json, "");
    out
}

fn human_into(out: &mut String, v: &Value, prefix: &str) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match item {
                    Value::Object(_) => human_into(out, item, &key),
                    Value::Array(a) if a.iter().any(|x| x.is_object()) => {
                        for (i, x) in a.iter().enumerate() {
                            human_into(out, x, &format!("{key}[{i}]"));
                        }
                    }
                    _ => {
                        let _ = writeln!(out, "{key}: {}", cell(item));
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{prefix}: {}", cell(other));
        }
    }
}
