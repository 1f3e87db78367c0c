//! Thin command-line front end: `solve` runs a configured experiment,
//! `reproduce` checks the reference numbers, `inspect` pretty-prints a
//! stored JSON artifact. See the library examples for programmatic use.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pitask::contextuality::FarkasCertificate;
use pitask::game::{Behavior, QuantumModel, TaskSpec};
use pitask::report::{paper_reproduction, run, ExperimentConfig, Method, Report, ALL_METHODS};

#[derive(Parser)]
#[command(name = "pitask", version, about = "Bounds for partial-ignorance communication tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the methods described by a config file (flags override it).
    Solve {
        /// JSON config; omit to start from defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Task as "n,m", e.g. --task 4,1
        #[arg(long)]
        task: Option<String>,
        /// Comma-separated methods (classical,seesaw,outer,contextual,frames,witness) or "all".
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Comma-separated Hilbert dimensions for the see-saw.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report to stdout instead of the tables.
        #[arg(long)]
        json: bool,
    },
    /// Re-derive the reference numbers and report pass/fail per check.
    Reproduce {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Write the JSON reproduction report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print a stored report, model, behavior or certificate.
    Inspect { file: PathBuf },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch() -> pitask::Result<ExitCode> {
    match Cli::parse().command {
        Command::Solve { config, task, methods, dims, seed, restarts, out, json } => {
            let mut cfg = match config {
                Some(path) => {
                    serde_json::from_str::<ExperimentConfig>(&std::fs::read_to_string(path)?)?
                }
                None => ExperimentConfig::new(4, 1),
            };
            if let Some(task) = task {
                cfg.task = parse_task(&task)?;
            }
            if !methods.is_empty() {
                cfg.methods = parse_methods(&methods)?;
            }
            if !dims.is_empty() {
                cfg.dims = dims;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(restarts) = restarts {
                cfg.restarts = restarts;
            }
            let report = run(&cfg);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Reproduce { seed, restarts, out } => {
            let report = paper_reproduction(seed, restarts)?;
            print!("{}", report.render());
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Inspect { file } => {
            let text = std::fs::read_to_string(&file)?;
            print!("{}", inspect(&text)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_task(s: &str) -> pitask::Result<(u8, u8)> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || pitask::Error::Config(format!("expected --task n,m, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let n = parts[0].trim().parse().map_err(|_| bad())?;
    let m = parts[1].trim().parse().map_err(|_| bad())?;
    TaskSpec::new(n, m)?;
    Ok((n, m))
}

fn parse_methods(items: &[String]) -> pitask::Result<Vec<Method>> {
    let mut out = Vec::new();
    for item in items {
        if item == "all" {
            out.extend(ALL_METHODS);
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

/// Guesses the artifact type by trying the known schemas in order.
fn inspect(text: &str) -> pitask::Result<String> {
    if let Ok(report) = serde_json::from_str::<Report>(text) {
        return Ok(format!("experiment report\n{}", report.render()));
    }
    if let Ok(model) = serde_json::from_str::<QuantumModel>(text) {
        let mut out = format!("quantum model, dimension {}\n", model.dimension());
        for (label, rho) in model.states() {
            out.push_str(&format!(
                "  state {label}: trace {:.6}, eigenvalues {:?}\n",
                rho.trace(),
                rho.eigenvalues()
                    .iter()
                    .map(|e| (e * 1e6).round() / 1e6)
                    .collect::<Vec<_>>()
            ));
        }
        for (meas, povm) in model.povms() {
            out.push_str(&format!("  measurement {meas}: {} effects\n", povm.len()));
        }
        return Ok(out);
    }
    if let Ok(cert) = serde_json::from_str::<FarkasCertificate>(text) {
        let mut out = String::from("noncontextuality inequality certificate\n");
        out.push_str(&format!(
            "  bound {:.6}, achieved {:.9}, ratio {:.9}\n",
            cert.bound,
            cert.achieved,
            cert.violation_ratio()
        ));
        return Ok(out);
    }
    if let Ok(behavior) = serde_json::from_str::<Behavior>(text) {
        let mut out = String::from("behavior\n");
        for ((p, m, k), v) in behavior.iter() {
            out.push_str(&format!("  p({k}|{p},{m}) = {v:.9}\n"));
        }
        return Ok(out);
    }
    Err(pitask::Error::Config(
        "file is not a report, model, certificate or behavior".into(),
    ))
}
