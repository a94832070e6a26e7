//! Command-line surface: load a run configuration, evaluate spectra, traces,
//! parameter maps or an optimization, and emit CSV/JSON artifacts plus a
//! short human-readable summary.
//!
//! Exit codes: 0 success, 1 I/O or internal, 2 configuration/validation,
//! 3 numerical fallback (near-defective geometry, singular kernel,
//! non-convergent quadrature), 4 infeasible optimization.

mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use photon_pair::scenarios::Scenario;
use photon_pair::sweep::{
    map_g2_tau, map_g2_zero, optimize, persistence, CellFlag, Evaluator, OptimizeStatus,
    Parallelism, PersistenceMetric, SweepResult,
};
use photon_pair::Error as CoreError;

use config::{MapKind, RunConfig};
use output::{format_float, write_json, write_table, Cell, OutputFormat, Provenance, Table};

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn new(message: impl Into<String>, code: u8) -> Self {
        Self {
            message: message.into(),
            code,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(message, 2)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(message, 3)
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self::new(message, 4)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(message, 1)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::InvalidInput(_)
            | CoreError::CoincidentAtoms { .. }
            | CoreError::GridTooCoarse { .. } => 2,
            CoreError::NearDefective { .. }
            | CoreError::SingularKernel { .. }
            | CoreError::QuadratureNoConvergence { .. }
            | CoreError::LinearAmplitudeZero { .. } => 3,
        };
        Self::new(e.to_string(), code)
    }
}

#[derive(Parser)]
#[command(
    name = "photon-pair",
    version,
    about = "Two-photon correlation engine for two-level emitter arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for map/optimize (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Tabular output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, decay rates and correlation weights of the array.
    Spectrum(CommonArgs),
    /// Delay-resolved correlation trace g²(τ) with persistence metrics.
    G2(CommonArgs),
    /// Dense parameter map (g²(0) over two parameters, or g² over
    /// detuning × delay).
    Map(CommonArgs),
    /// Two-stage derivative-free search for the configured objective.
    Optimize(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", a),
        Command::G2(a) => ("g2", a),
        Command::Map(a) => ("map", a),
        Command::Optimize(a) => ("optimize", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: &str, args: &CommonArgs) -> Result<(), CliError> {
    let (config, raw) = RunConfig::load(&args.config)?;
    let digest = hex(&Sha256::digest(&raw));
    let config_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let scenario = config.scenario(&config_dir)?;
    let provenance = Provenance::new(command, &digest, &scenario.name);
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };

    let body = || -> Result<(), CliError> {
        match command {
            "spectrum" => cmd_spectrum(&config, &scenario, args, &provenance, format),
            "g2" => cmd_g2(&config, &scenario, args, &provenance, format),
            "map" => cmd_map(&config, &scenario, args, &provenance, format),
            "optimize" => cmd_optimize(&config, &scenario, args, &provenance, format),
            _ => unreachable!(),
        }
    };

    #[cfg(feature = "parallel")]
    if let Some(n) = args.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::io(format!("cannot build thread pool: {e}")))?;
        return pool.install(body);
    }
    #[cfg(not(feature = "parallel"))]
    if args.threads.is_some() {
        eprintln!("note: built without the 'parallel' feature; --threads ignored");
    }
    body()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// (index, Re E, Im E, −2 Im E, |C|, arg C) for every eigenstate, with the
/// correlation weights evaluated at the configured detuning.
fn cmd_spectrum(
    config: &RunConfig,
    scenario: &Scenario,
    args: &CommonArgs,
    provenance: &Provenance,
    format: OutputFormat,
) -> Result<(), CliError> {
    let detuning = config.require_detuning()?;
    let evaluator = Evaluator::new(scenario)?;
    let c = evaluator.constants(detuning)?;
    let spec = evaluator.spectral();
    let mut rows = Vec::with_capacity(spec.len());
    for nu in 0..spec.len() {
        rows.push(vec![
            Cell::Int(nu as i64),
            Cell::Float(spec.eigenvalues()[nu].re),
            Cell::Float(spec.eigenvalues()[nu].im),
            Cell::Float(spec.decay_rate(nu)),
            Cell::Float(c[nu].norm()),
            Cell::Float(c[nu].arg()),
        ]);
    }
    let table = Table {
        columns: ["index", "re_e", "im_e", "decay", "abs_c", "arg_c"]
            .map(String::from)
            .to_vec(),
        rows,
    };
    let path = write_table(&args.out, "spectrum", &table, provenance, format)?;
    let min_decay = (0..spec.len())
        .map(|nu| spec.decay_rate(nu))
        .fold(f64::INFINITY, f64::min);
    println!(
        "spectrum: {} states, min decay {} at detuning {}; wrote {}",
        spec.len(),
        format_float(min_decay),
        format_float(detuning),
        path.display()
    );
    Ok(())
}

/// Correlation trace plus persistence summary.
fn cmd_g2(
    config: &RunConfig,
    scenario: &Scenario,
    args: &CommonArgs,
    provenance: &Provenance,
    format: OutputFormat,
) -> Result<(), CliError> {
    let detuning = config.require_detuning()?;
    let trace_cfg = config
        .trace
        .as_ref()
        .ok_or_else(|| CliError::validation("missing field 'trace' (tau_max, tau_step)"))?;
    let taus = trace_cfg.grid()?;
    let pers_cfg = config.persistence.clone().unwrap_or_default();

    let evaluator = Evaluator::new(scenario)?;
    let trace = evaluator.trace(detuning, &taus)?;
    let metric: PersistenceMetric = persistence(&trace, pers_cfg.threshold, pers_cfg.window)?;

    let n = trace.c_constants().len();
    let mut columns = vec!["tau".to_string(), "g2".to_string()];
    for nu in 0..n {
        columns.push(format!("state{nu}_re"));
        columns.push(format!("state{nu}_im"));
    }
    let mut rows = Vec::with_capacity(taus.len());
    for (&tau, &g2) in trace.tau_grid().iter().zip(trace.g2_values()) {
        let mut row = vec![Cell::Float(tau), Cell::Float(g2)];
        for nu in 0..n {
            let z = trace.contribution(nu, tau);
            row.push(Cell::Float(z.re));
            row.push(Cell::Float(z.im));
        }
        rows.push(row);
    }
    let path = write_table(
        &args.out,
        "trace",
        &table_of(columns, rows),
        provenance,
        format,
    )?;

    // constants table alongside the trace
    let spec = evaluator.spectral();
    let mut crows = Vec::with_capacity(n);
    for nu in 0..n {
        crows.push(vec![
            Cell::Int(nu as i64),
            Cell::Float(spec.eigenvalues()[nu].re),
            Cell::Float(spec.eigenvalues()[nu].im),
            Cell::Float(trace.c_constants()[nu].norm()),
            Cell::Float(trace.c_constants()[nu].arg()),
        ]);
    }
    let ctable = table_of(
        ["index", "re_e", "im_e", "abs_c", "arg_c"]
            .map(String::from)
            .to_vec(),
        crows,
    );
    write_table(&args.out, "constants", &ctable, provenance, format)?;

    let tau_half = metric
        .tau_half
        .map(format_float)
        .unwrap_or_else(|| "never".to_string());
    println!(
        "g2: g2(0) = {}, tau_half({}) = {}, max over [{}, {}] = {}; wrote {}",
        format_float(metric.g2_zero),
        format_float(pers_cfg.threshold),
        tau_half,
        format_float(metric.window.0),
        format_float(metric.window.1),
        format_float(metric.window_max),
        path.display()
    );
    Ok(())
}

fn table_of(columns: Vec<String>, rows: Vec<Vec<Cell>>) -> Table {
    Table { columns, rows }
}

/// Long-format map plus a JSON sidecar carrying axes, provenance and the
/// flagged cells.
fn cmd_map(
    config: &RunConfig,
    scenario: &Scenario,
    args: &CommonArgs,
    provenance: &Provenance,
    format: OutputFormat,
) -> Result<(), CliError> {
    let map_cfg = config
        .map
        .as_ref()
        .ok_or_else(|| CliError::validation("missing field 'map'"))?;
    let axis1 = map_cfg.axis1.axis()?;
    let axis2 = map_cfg.axis2.axis()?;
    let result: SweepResult = match map_cfg.kind {
        MapKind::G2Zero => map_g2_zero(scenario, &axis1, &axis2, Parallelism::default())?,
        MapKind::G2Tau => {
            if map_cfg.axis2.param != "tau" {
                return Err(CliError::validation(
                    "map.axis2.param must be 'tau' for kind 'g2_tau'",
                ));
            }
            map_g2_tau(scenario, &axis1, &axis2, Parallelism::default())?
        }
    };

    let mut rows = Vec::with_capacity(result.values.len());
    for i1 in 0..result.axis1.len() {
        for i2 in 0..result.axis2.len() {
            let (v, flag) = result.at(i1, i2);
            rows.push(vec![
                Cell::Float(result.axis1.values[i1]),
                Cell::Float(result.axis2.values[i2]),
                Cell::Float(v),
                Cell::Text(flag.as_str().to_string()),
            ]);
        }
    }
    let table = table_of(
        [
            result.axis1.param.as_str(),
            result.axis2.param.as_str(),
            "value",
            "flag",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    );
    let path = write_table(&args.out, "map", &table, provenance, format)?;

    let flagged: Vec<serde_json::Value> = result
        .flagged_cells()
        .into_iter()
        .map(|(i1, i2, flag)| {
            serde_json::json!({
                "i1": i1,
                "i2": i2,
                result.axis1.param.clone(): result.axis1.values[i1],
                result.axis2.param.clone(): result.axis2.values[i2],
                "flag": flag.as_str(),
            })
        })
        .collect();
    let sidecar = serde_json::json!({
        "provenance": provenance,
        "scenario": scenario,
        "axis1": { "param": result.axis1.param, "len": result.axis1.len(),
                   "min": result.axis1.values.first(), "max": result.axis1.values.last() },
        "axis2": { "param": result.axis2.param, "len": result.axis2.len(),
                   "min": result.axis2.values.first(), "max": result.axis2.values.last() },
        "flagged_cells": flagged,
    });
    write_json(&args.out.join("map.meta.json"), &sidecar)?;

    let ok_cells = result.flags.iter().filter(|f| **f == CellFlag::Ok).count();
    match result.argmin() {
        Some((i1, i2, v)) => println!(
            "map: {} cells ({} ok); min value {} at ({} = {}, {} = {}); wrote {}",
            result.values.len(),
            ok_cells,
            format_float(v),
            result.axis1.param,
            format_float(result.axis1.values[i1]),
            result.axis2.param,
            format_float(result.axis2.values[i2]),
            path.display()
        ),
        None => println!(
            "map: {} cells, none usable (all flagged); wrote {}",
            result.values.len(),
            path.display()
        ),
    }
    Ok(())
}

/// Two-stage search; always writes the audit trail, even when infeasible.
fn cmd_optimize(
    config: &RunConfig,
    scenario: &Scenario,
    args: &CommonArgs,
    provenance: &Provenance,
    format: OutputFormat,
) -> Result<(), CliError> {
    let opt_cfg = config
        .optimize
        .as_ref()
        .ok_or_else(|| CliError::validation("missing field 'optimize'"))?;
    let bounds: Vec<(String, f64, f64)> = opt_cfg
        .bounds
        .iter()
        .map(|(name, range)| (name.clone(), range[0], range[1]))
        .collect();
    let outcome = optimize(
        scenario,
        &opt_cfg.objective.objective(),
        &bounds,
        opt_cfg.budget,
    )?;

    // audit first, so an infeasible exit still leaves the trail behind
    let mut columns = vec!["eval".to_string()];
    columns.extend(bounds.iter().map(|(name, _, _)| name.clone()));
    columns.extend(["metric", "feasible", "stage"].map(String::from));
    let rows: Vec<Vec<Cell>> = outcome
        .audit
        .iter()
        .map(|row| {
            let mut cells = vec![Cell::Int(row.index as i64)];
            cells.extend(row.params.iter().map(|(_, v)| Cell::Float(*v)));
            cells.push(Cell::Float(row.metric));
            cells.push(Cell::Text(row.feasible.to_string()));
            cells.push(Cell::Text(row.stage.to_string()));
            cells
        })
        .collect();
    write_table(
        &args.out,
        "audit",
        &table_of(columns, rows),
        provenance,
        format,
    )?;

    let status = match outcome.status {
        OptimizeStatus::Converged => "converged",
        OptimizeStatus::BudgetExhausted => "budget_exhausted",
        OptimizeStatus::Infeasible => "infeasible",
    };
    let best_json = serde_json::json!({
        "provenance": provenance,
        "status": status,
        "objective": opt_cfg.objective,
        "budget": opt_cfg.budget,
        "evaluations": outcome.audit.len(),
        "best": outcome.best_params.as_ref().map(|params| {
            serde_json::json!({
                "params": params.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
                "metric": outcome.best_metric,
            })
        }),
    });
    write_json(&args.out.join("best.json"), &best_json)?;

    match (&outcome.best_params, outcome.best_metric) {
        (Some(params), Some(metric)) => {
            let rendered: Vec<String> = params
                .iter()
                .map(|(n, v)| format!("{n} = {}", format_float(*v)))
                .collect();
            println!(
                "optimize: {status}; best metric {} at {} after {} evaluations",
                format_float(metric),
                rendered.join(", "),
                outcome.audit.len()
            );
            Ok(())
        }
        _ => Err(CliError::infeasible(format!(
            "no feasible point within bounds (audit of {} evaluations written)",
            outcome.audit.len()
        ))),
    }
}
