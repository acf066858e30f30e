//! Command-line front end for `qsl-core`.
//!
//! Exit codes: `0` success, `1` a solver did not converge, the bound was
//! violated or output could not be written, `2` invalid arguments.

pub mod bench;
pub mod format;

use std::f64::consts::TAU;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsl_core::alpha::{
    self as alpha_mod, alpha_table, AlphaResult, Fidelity, GlmRoot, Method, TableRow,
};
use qsl_core::oracle::{verify_bound, OracleConfig, OracleReport};
use qsl_core::saturate::{default_resolution, first_passage_time, ml_bound, saturating_state};
use qsl_core::{QslError, RootConfig};
use serde::Serialize;

use crate::bench::{run_bench, BenchReport};
use crate::format::{
    columns, key_values, Format, OutputSpec, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exact CSV header of `table`.
pub const TABLE_HEADER: [&str; 8] = [
    "epsilon",
    "alpha_lower",
    "alpha_upper",
    "alpha_newton",
    "alpha_glm",
    "max_rel_diff",
    "iters_newton",
    "status",
];

/// Largest relative gap between bound and first passage accepted by `saturate`.
pub const SATURATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "qsl",
    version,
    about = "Margolus-Levitin speed-limit function alpha(eps)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate alpha(eps) with one backend.
    Alpha(AlphaArgs),
    /// Tabulate alpha over an evenly spaced fidelity grid.
    Table(TableArgs),
    /// Construct the two-level state that attains the bound.
    Saturate(SaturateArgs),
    /// Check the bound on random finite-level systems.
    Verify(VerifyArgs),
    /// Time the backends.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-14)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<RootConfig, QslError> {
        RootConfig::new(self.abs_tol, self.rel_tol, self.max_iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GlmRootArg {
    Newton,
    Brent,
}

#[derive(Debug, Clone, Args)]
pub struct GlmArgs {
    /// Weight p of the legacy initial guess p(1 - sqrt eps)/2 + (1 - p)/2.
    #[arg(long, default_value_t = 0.5)]
    pub glm_p: f64,
    #[arg(long, value_enum, default_value_t = GlmRootArg::Newton)]
    pub glm_root: GlmRootArg,
}

impl GlmArgs {
    fn root(&self) -> GlmRoot {
        match self.glm_root {
            GlmRootArg::Newton => GlmRoot::Newton { p: self.glm_p },
            GlmRootArg::Brent => GlmRoot::Brent,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Significant digits for csv and pretty output.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = parse_precision)]
    pub precision: usize,
}

impl OutputArgs {
    fn spec(&self) -> OutputSpec {
        OutputSpec {
            format: self.format,
            path: self.output.clone(),
            precision: self.precision,
        }
    }
}

fn parse_fidelity(s: &str) -> Result<Fidelity, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    Fidelity::new(v).map_err(|e| e.to_string())
}

fn parse_precision(s: &str) -> Result<usize, String> {
    let p: usize = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a digit count"))?;
    if (MIN_PRECISION..=MAX_PRECISION).contains(&p) {
        Ok(p)
    } else {
        Err(format!(
            "precision must lie in {MIN_PRECISION}..={MAX_PRECISION}"
        ))
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
pub struct AlphaArgs {
    #[arg(long, value_parser = parse_fidelity)]
    pub epsilon: Fidelity,
    #[arg(long, value_parser = parse_method, default_value = "newton")]
    pub method: Method,
    #[command(flatten)]
    pub glm: GlmArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub start: f64,
    #[arg(long)]
    pub stop: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "lower,upper,newton")]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub glm: GlmArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SaturateArgs {
    #[arg(long, value_parser = parse_fidelity)]
    pub epsilon: Fidelity,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Largest number of levels per sampled system.
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    #[arg(long, value_parser = parse_fidelity, value_delimiter = ',',
          default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub eps: Vec<Fidelity>,
    #[arg(long, default_value_t = 1.0)]
    pub energy_scale: f64,
    /// Time horizon in periods of the largest Bohr frequency.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Fidelity grid; defaults to 0.1, 0.2, ..., 0.9.
    #[arg(long, value_parser = parse_fidelity, value_delimiter = ',')]
    pub eps: Vec<Fidelity>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Calls per timed repetition.
    #[arg(long, default_value_t = 20)]
    pub batch: usize,
    #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "lower,upper,newton")]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub glm: GlmArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a subcommand before it produced a result.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid arguments; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Output could not be produced; exit code 1.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<QslError> for CliError {
    fn from(e: QslError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

/// Parse `args` (program name first) and run the subcommand; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Alpha(a) => cmd_alpha(a),
        Command::Table(a) => cmd_table(a),
        Command::Saturate(a) => cmd_saturate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn emit(spec: &OutputSpec, body: &str) -> Result<(), CliError> {
    let mut w = spec.open()?;
    w.write_all(body.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_alpha(a: &AlphaArgs) -> Result<i32, CliError> {
    let cfg = a.solver.config()?;
    let r = alpha_mod::alpha(a.epsilon, a.method, a.glm.root(), &cfg)?;
    let spec = a.output.spec();
    emit(&spec, &render_alpha(&r, &spec)?)?;
    if r.status.is_converged() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "{} did not converge: {}",
            r.method,
            r.diagnostic.as_deref().unwrap_or(r.status.as_str())
        );
        Ok(EXIT_FAILURE)
    }
}

pub fn render_alpha(r: &AlphaResult, spec: &OutputSpec) -> Result<String, CliError> {
    let n = |x| spec.num(x);
    Ok(match spec.format {
        Format::Json => json(r)?,
        Format::Csv => csv_string(
            &[
                "epsilon",
                "method",
                "alpha",
                "argopt",
                "iterations",
                "residual",
                "status",
            ],
            &[vec![
                n(r.epsilon.value()),
                r.method.to_string(),
                n(r.alpha),
                n(r.argopt),
                r.iterations.to_string(),
                n(r.residual),
                r.status.to_string(),
            ]],
        )?,
        Format::Pretty => {
            let mut pairs = vec![
                ("epsilon", n(r.epsilon.value())),
                ("method", r.method.to_string()),
                ("alpha", n(r.alpha)),
                ("argopt", n(r.argopt)),
                ("iterations", r.iterations.to_string()),
                ("residual", n(r.residual)),
                ("status", r.status.to_string()),
            ];
            if let Some(d) = &r.diagnostic {
                pairs.push(("diagnostic", d.clone()));
            }
            key_values(&pairs)
        }
    })
}

/// `steps` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

fn cmd_table(a: &TableArgs) -> Result<i32, CliError> {
    if !(0.0 <= a.start && a.start <= a.stop && a.stop <= 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 <= start <= stop <= 1, got start {} stop {}",
            a.start, a.stop
        )));
    }
    if a.steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if a.methods.is_empty() {
        return Err(CliError::Usage("no methods requested".into()));
    }
    let cfg = a.solver.config()?;
    let grid: Vec<Fidelity> = linspace(a.start, a.stop, a.steps)
        .into_iter()
        .map(Fidelity::new)
        .collect::<Result<_, _>>()?;
    let rows = alpha_table(&grid, &a.methods, a.glm.root(), &cfg);
    let spec = a.output.spec();
    emit(&spec, &render_table(&rows, &spec)?)?;
    Ok(if rows.iter().all(TableRow::all_converged) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

pub fn table_cells(row: &TableRow, spec: &OutputSpec) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| spec.num(x)).unwrap_or_default();
    vec![
        spec.num(row.epsilon),
        opt(row.alpha_lower),
        opt(row.alpha_upper),
        opt(row.alpha_newton),
        opt(row.alpha_glm),
        spec.num(row.max_rel_diff),
        row.iters_newton.map(|i| i.to_string()).unwrap_or_default(),
        row.status_string(),
    ]
}

pub fn render_table(rows: &[TableRow], spec: &OutputSpec) -> Result<String, CliError> {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| table_cells(r, spec)).collect();
    Ok(match spec.format {
        Format::Json => json(&rows)?,
        Format::Csv => csv_string(&TABLE_HEADER, &cells)?,
        Format::Pretty => columns(&TABLE_HEADER, &cells),
    })
}

/// Output of `saturate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturateReport {
    pub epsilon: f64,
    pub theta_opt: f64,
    pub phi_opt: f64,
    pub a1_sq: f64,
    pub gap_time: f64,
    pub alpha: f64,
    #[serde(with = "qsl_core::sentinel")]
    pub bound: f64,
    #[serde(with = "qsl_core::sentinel::option")]
    pub first_passage: Option<f64>,
    /// `|first_passage - bound| / bound`.
    #[serde(with = "qsl_core::sentinel")]
    pub saturation_residual: f64,
}

pub fn saturate_report(eps: Fidelity, cfg: &RootConfig) -> Result<SaturateReport, QslError> {
    let s = saturating_state(eps, cfg)?;
    let sys = s.to_system();
    let bound = ml_bound(&sys, eps, false)?;
    let t_max = TAU;
    let tau = first_passage_time(&sys, eps, t_max, default_resolution(&sys, t_max))?;
    let saturation_residual = match tau {
        Some(t) => (t - bound).abs() / bound,
        None => f64::INFINITY,
    };
    Ok(SaturateReport {
        epsilon: eps.value(),
        theta_opt: s.theta_opt,
        phi_opt: s.phi_opt,
        a1_sq: s.a1_sq,
        gap_time: s.gap_time,
        alpha: s.alpha,
        bound,
        first_passage: tau,
        saturation_residual,
    })
}

fn cmd_saturate(a: &SaturateArgs) -> Result<i32, CliError> {
    let cfg = a.solver.config()?;
    let r = saturate_report(a.epsilon, &cfg)?;
    let spec = a.output.spec();
    let n = |x| spec.num(x);
    let opt = |v: Option<f64>| v.map(n).unwrap_or_else(|| "none".into());
    let fields = [
        ("epsilon", n(r.epsilon)),
        ("theta_opt", n(r.theta_opt)),
        ("phi_opt", n(r.phi_opt)),
        ("a1_sq", n(r.a1_sq)),
        ("gap_time", n(r.gap_time)),
        ("alpha", n(r.alpha)),
        ("bound", n(r.bound)),
        ("first_passage", opt(r.first_passage)),
        ("saturation_residual", n(r.saturation_residual)),
    ];
    let body = match spec.format {
        Format::Json => json(&r)?,
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|f| f.0).collect();
            csv_string(&header, &[fields.iter().map(|f| f.1.clone()).collect()])?
        }
        Format::Pretty => key_values(&fields),
    };
    emit(&spec, &body)?;
    Ok(if r.saturation_residual <= SATURATION_TOLERANCE {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let cfg = OracleConfig {
        seed: a.seed,
        samples: a.samples,
        max_levels: a.levels,
        energy_scale: a.energy_scale,
        eps_grid: a.eps.clone(),
        horizon: a.horizon,
        injected: Vec::new(),
    };
    let rep = verify_bound(&cfg)?;
    let spec = a.output.spec();
    emit(&spec, &render_verify(&rep, &spec)?)?;
    Ok(if rep.violations == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

pub fn render_verify(rep: &OracleReport, spec: &OutputSpec) -> Result<String, CliError> {
    let n = |x| spec.num(x);
    let opt = |v: Option<f64>| v.map(n).unwrap_or_default();
    Ok(match spec.format {
        Format::Json => json(rep)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rep
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.sample.to_string(),
                        r.levels.to_string(),
                        n(r.epsilon.value()),
                        opt(r.tau),
                        n(r.bound),
                        n(r.bound_strengthened),
                        opt(r.margin),
                        serde_json::to_value(r.outcome)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_owned))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            csv_string(
                &[
                    "sample",
                    "levels",
                    "epsilon",
                    "tau",
                    "bound",
                    "bound_strengthened",
                    "margin",
                    "outcome",
                ],
                &rows,
            )?
        }
        Format::Pretty => key_values(&[
            ("seed", rep.config.seed.to_string()),
            ("systems", rep.systems.len().to_string()),
            ("checked", rep.checked.to_string()),
            ("skipped", rep.skipped.to_string()),
            ("violations", rep.violations.to_string()),
            ("min_margin", n(rep.min_margin)),
            ("min_relative_margin", n(rep.min_relative_margin)),
            (
                "strengthened_dominates",
                rep.strengthened_dominates.to_string(),
            ),
        ]),
    })
}

fn cmd_bench(a: &BenchArgs) -> Result<i32, CliError> {
    if a.repetitions == 0 || a.batch == 0 {
        return Err(CliError::Usage(
            "repetitions and batch must be at least 1".into(),
        ));
    }
    let cfg = a.solver.config()?;
    let grid = if a.eps.is_empty() {
        bench::default_grid()
    } else {
        a.eps.clone()
    };
    let rep = run_bench(
        &grid,
        &a.methods,
        a.repetitions,
        a.batch,
        a.glm.root(),
        &cfg,
    );
    let spec = a.output.spec();
    emit(&spec, &render_bench(&rep, &spec)?)?;
    Ok(EXIT_OK)
}

pub fn render_bench(rep: &BenchReport, spec: &OutputSpec) -> Result<String, CliError> {
    let header = ["method", "epsilon", "median_ns"];
    let cells: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                spec.num(r.epsilon),
                spec.num(r.median_ns),
            ]
        })
        .collect();
    Ok(match spec.format {
        Format::Json => json(rep)?,
        Format::Csv => csv_string(&header, &cells)?,
        Format::Pretty => {
            let mut s = columns(&header, &cells);
            s.push('\n');
            let summary: Vec<Vec<String>> = rep
                .summary
                .iter()
                .map(|x| vec![x.method.to_string(), spec.num(x.median_ns)])
                .collect();
            s.push_str(&columns(&["method", "median_ns"], &summary));
            s.push_str(&format!("fastest: {}\n", rep.fastest));
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_counts_points() {
        assert_eq!(linspace(0.0, 1.0, 2), vec![0.0, 1.0]);
        assert_eq!(linspace(0.3, 0.9, 1), vec![0.3]);
        let g = linspace(0.01, 0.99, 99);
        assert_eq!(g.len(), 99);
        assert!((g[1] - 0.02).abs() < 1e-15);
        assert_eq!(g[98], 0.99);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "qsl",
            "table",
            "--start",
            "0",
            "--stop",
            "1",
            "--steps",
            "2",
            "--methods",
            "upper,glm",
        ])
        .unwrap();
        match cli.command {
            Command::Table(t) => {
                assert_eq!(t.methods, vec![Method::Upper, Method::GlmLegacy]);
                assert_eq!(t.output.precision, 12);
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["qsl", "alpha", "--epsilon", "1.5"]).is_err());
        assert!(
            Cli::try_parse_from(["qsl", "alpha", "--epsilon", "0.5", "--precision", "3"]).is_err()
        );
        assert!(
            Cli::try_parse_from(["qsl", "alpha", "--epsilon", "0.5", "--method", "secant"])
                .is_err()
        );
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["qsl", "verify", "--samples", "0"]), EXIT_USAGE);
        assert_eq!(run(["qsl", "saturate", "--epsilon", "1"]), EXIT_USAGE);
        assert_eq!(
            run(["qsl", "table", "--start", "0.5", "--stop", "0.2", "--steps", "3"]),
            EXIT_USAGE
        );
        assert_eq!(run(["qsl", "bogus"]), EXIT_USAGE);
    }
}
