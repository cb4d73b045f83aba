//! `masim`: run protocols, sweep grids, extract Pareto sets, validate DAG
//! files and check the hard-attention recall construction.
//!
//! Exit codes: 0 success, 1 a check failed (bound violation under oracle
//! agents, invalid DAG, construction mismatch), 2 bad configuration or
//! input, 3 protocol or infrastructure error, 4 J-L sampling failure.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use masim_agents::AgentError;
use masim_bounds::{
    bound_family, check, pareto_frontier, pareto_rows, read_csv, sweep, table1_bounds, write_csv, write_rows,
    BoundReport, BoundsError,
};
use masim_core::{from_text, measure, validate_dag};
use masim_llm_bridge::{HttpTransport, RemoteFactory};
use masim_protocols::{derive_seed, run, AgentFactory, NoisyFactory, OracleFactory, ProtocolError, RunFailure, RunRecord};
use masim_uhat::{verify, RecallOptions, UhatError, VerifyConfig};
use rayon::prelude::*;
use serde::Serialize;

use config::{AgentMode, ExperimentConfig};

#[derive(Parser)]
#[command(name = "masim", version, about = "Multi-agent protocol simulator")]
struct Cli {
    /// Seed override for every command that samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replications and sweep cells.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; the config's `output` otherwise.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol configuration for its replications.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every cell of the config's `[sweep]` grid and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reduce a sweep CSV to its depth/comm Pareto frontier.
    Pareto { csv: PathBuf },
    /// Check the structure of a DAG in the line format and print its metrics.
    ValidateDag { file: PathBuf },
    /// Build and check recall and manager networks up to `n_max`.
    UhatVerify {
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Replace the positional rotation angle (radians).
        #[arg(long, hide = true)]
        theta: Option<f64>,
    },
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn protocol(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Incompatible { .. } | ProtocolError::InvalidSpec(_) => Failure::config(e.to_string()),
            ProtocolError::Agent(AgentError::InvalidConfig(_)) => Failure::config(e.to_string()),
            _ => Failure::protocol(e.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Protocol(p) => p.into(),
            BoundsError::EmptyGrid | BoundsError::InvalidParams(_) | BoundsError::Task(_) => Failure::config(e.to_string()),
            _ => Failure::protocol(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
    }
    let result = match &cli.command {
        Command::Run { config } => cmd_run(&cli, config),
        Command::Sweep { config } => cmd_sweep(&cli, config),
        Command::Pareto { csv } => cmd_pareto(&cli, csv),
        Command::ValidateDag { file } => cmd_validate(file),
        Command::UhatVerify { n_max, instances, theta } => cmd_uhat(&cli, *n_max, *instances, *theta),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<(), String>) -> Result<(), Failure> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Failure::protocol(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::protocol(e.to_string()))?;
    write(tmp.as_file_mut()).map_err(Failure::protocol)?;
    tmp.as_file_mut().flush().map_err(|e| Failure::protocol(e.to_string()))?;
    tmp.persist(path).map_err(|e| Failure::protocol(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn output_path(cli: &Cli, cfg: Option<&ExperimentConfig>, default: &str) -> PathBuf {
    cli.output.clone().or_else(|| cfg.and_then(|c| c.output.clone())).unwrap_or_else(|| PathBuf::from(default))
}

fn factory(mode: &AgentMode) -> Result<Box<dyn AgentFactory>, Failure> {
    Ok(match mode {
        AgentMode::Oracle => Box::new(OracleFactory),
        AgentMode::Noisy { epsilon } => Box::new(NoisyFactory { epsilon: *epsilon }),
        AgentMode::Remote { config, .. } => {
            let transport = HttpTransport::from_config(config).map_err(|e| Failure::config(e.to_string()))?;
            Box::new(RemoteFactory::new(config.clone(), Arc::new(transport)))
        }
    })
}

#[derive(Serialize)]
struct RunOutput {
    records: Vec<RunRecord>,
    /// Present for protocols with a bound family.
    bounds: Vec<Option<BoundReport>>,
    summary: Summary,
}

#[derive(Serialize)]
struct Summary {
    runs: usize,
    correct: usize,
    accuracy: f64,
    incomplete: usize,
    bound_violations: usize,
}

fn cmd_run(cli: &Cli, path: &Path) -> Result<u8, Failure> {
    let cfg = ExperimentConfig::load(path, cli.seed).map_err(Failure::config)?;
    let reps = cfg.replications as u64;
    let mut audit_lines: Vec<String> = Vec::new();
    let results = if let AgentMode::Remote { config, .. } = &cfg.agents {
        // One factory per replication keeps each audit transcript separate.
        let transport = Arc::new(HttpTransport::from_config(config).map_err(|e| Failure::config(e.to_string()))?);
        let mut out = Vec::new();
        for r in 0..reps {
            let instance = cfg.instance.generate(derive_seed(cfg.seed, 2 * r)).map_err(|e| Failure::config(e.to_string()))?;
            let f = RemoteFactory::new(config.clone(), transport.clone());
            let result = run(&cfg.protocol, &instance, &f, derive_seed(cfg.seed, 2 * r + 1))?;
            for rec in f.audit.records() {
                let mut v = serde_json::to_value(&rec).map_err(|e| Failure::protocol(e.to_string()))?;
                v["replication"] = r.into();
                audit_lines.push(v.to_string());
            }
            out.push((instance, result));
        }
        out
    } else {
        let f = factory(&cfg.agents)?;
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let instance =
                    cfg.instance.generate(derive_seed(cfg.seed, 2 * r)).map_err(|e| Failure::config(e.to_string()))?;
                let result = run(&cfg.protocol, &instance, f.as_ref(), derive_seed(cfg.seed, 2 * r + 1))?;
                Ok((instance, result))
            })
            .collect::<Result<Vec<_>, Failure>>()?
    };

    let mut records = Vec::new();
    let mut bounds = Vec::new();
    let mut violations = 0;
    let mut incomplete = 0;
    for (instance, result) in &results {
        records.push(result.record(instance));
        if matches!(result.failure, Some(RunFailure::Agent(AgentError::Unavailable { .. }))) {
            incomplete += 1;
        }
        let report = match bound_family(&result.spec) {
            Some(fam) => {
                let spec = table1_bounds(fam, instance.n(), result.spec.width, instance.k(), result.spec.branching)?;
                Some(check(result, &spec)?)
            }
            None => None,
        };
        let violated = report.as_ref().is_some_and(|r| !r.all_within()) || !result.metrics.satisfies_depth_size_inequality();
        if violated && result.failure.is_none() {
            violations += 1;
        }
        bounds.push(report);
    }
    let correct = records.iter().filter(|r| r.correct).count();
    let summary = Summary {
        runs: records.len(),
        correct,
        accuracy: correct as f64 / records.len() as f64,
        incomplete,
        bound_violations: violations,
    };
    println!(
        "runs {} correct {} accuracy {:.4} incomplete {} bound_violations {}",
        summary.runs, summary.correct, summary.accuracy, summary.incomplete, summary.bound_violations
    );
    let out = output_path(cli, Some(&cfg), "run.json");
    let body = RunOutput { records, bounds, summary };
    write_atomic(&out, |w| {
        serde_json::to_writer_pretty(&mut *w, &body).map_err(|e| e.to_string())?;
        writeln!(w).map_err(|e| e.to_string())
    })?;
    if let AgentMode::Remote { audit: Some(audit), .. } = &cfg.agents {
        write_atomic(audit, |w| {
            audit_lines.iter().try_for_each(|l| writeln!(w, "{l}")).map_err(|e| e.to_string())
        })?;
    }
    if incomplete > 0 {
        return Err(Failure::protocol(format!("{incomplete} run(s) could not reach their agents")));
    }
    if matches!(cfg.agents, AgentMode::Oracle) && body.summary.bound_violations > 0 {
        eprintln!("bound violations under oracle agents: {}", body.summary.bound_violations);
        return Ok(1);
    }
    Ok(0)
}

fn pareto_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    csv.with_file_name(format!("{stem}.pareto.csv"))
}

fn cmd_sweep(cli: &Cli, path: &Path) -> Result<u8, Failure> {
    let cfg = ExperimentConfig::load(path, cli.seed).map_err(Failure::config)?;
    let grid = cfg.sweep.as_ref().ok_or_else(|| Failure::config("sweep: the config has no [sweep] section"))?;
    if matches!(cfg.agents, AgentMode::Remote { .. }) {
        return Err(Failure::config("agents.mode: sweeps run with oracle or noisy agents; use `run` for remote agents"));
    }
    let f = factory(&cfg.agents)?;
    let records = sweep(grid, f.as_ref())?;
    let out = output_path(cli, Some(&cfg), "sweep.csv");
    write_atomic(&out, |w| write_csv(&records, w).map_err(|e| e.to_string()))?;
    let frontier = pareto_frontier(&records);
    let companion = pareto_path(&out);
    write_atomic(&companion, |w| write_csv(&frontier, w).map_err(|e| e.to_string()))?;
    println!("cells {} frontier {} csv {} pareto {}", records.len(), frontier.len(), out.display(), companion.display());
    let broken = records.iter().filter(|r| !r.depth_size_inequality).count();
    if matches!(cfg.agents, AgentMode::Oracle) && broken > 0 {
        eprintln!("depth/size inequality fails in {broken} cell(s)");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_pareto(cli: &Cli, csv: &Path) -> Result<u8, Failure> {
    let file = std::fs::File::open(csv).map_err(|e| Failure::config(format!("{}: {e}", csv.display())))?;
    let rows = read_csv(file).map_err(|e| Failure::config(format!("{}: {e}", csv.display())))?;
    let frontier = pareto_rows(&rows);
    match &cli.output {
        Some(out) => write_atomic(out, |w| write_rows(&frontier, w).map_err(|e| e.to_string()))?,
        None => write_rows(&frontier, std::io::stdout().lock()).map_err(|e| Failure::protocol(e.to_string()))?,
    }
    Ok(0)
}

fn cmd_validate(file: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::config(format!("{}: {e}", file.display())))?;
    let dag = from_text(&text).map_err(|e| Failure::config(format!("{}: {e}", file.display())))?;
    let report = validate_dag(&dag);
    if !report.is_ok() {
        println!("invalid");
        println!("{report}");
        return Ok(1);
    }
    let m = measure(&dag).map_err(|e| Failure::protocol(e.to_string()))?;
    println!("ok");
    println!("depth {} width {} size {} comm_budget {}", m.depth, m.width, m.size, m.comm_budget);
    Ok(0)
}

fn cmd_uhat(cli: &Cli, n_max: usize, instances: usize, theta: Option<f64>) -> Result<u8, Failure> {
    if n_max == 0 {
        return Err(Failure::config("--n-max must be at least 1"));
    }
    let mut cfg = VerifyConfig::new(n_max, cli.seed.unwrap_or(0));
    cfg.instances = instances;
    cfg.options = RecallOptions { theta, ..cfg.options };
    let report = match verify(&cfg) {
        Ok(r) => r,
        Err(e @ UhatError::MaxTrialsExceeded { .. }) => return Err(Failure { code: 4, message: e.to_string() }),
        Err(e) => return Err(Failure::protocol(e.to_string())),
    };
    for (name, t) in [("recall", &report.recall), ("manager", &report.manager), ("select", &report.select)] {
        println!("{name} checked {} failed {}", t.checked, t.failed);
        for ex in &t.examples {
            println!("  {ex}");
        }
    }
    let passed = report.passed();
    println!("result {}", if passed { "pass" } else { "fail" });
    Ok(if passed { 0 } else { 1 })
}
