//! `rado-lab` command-line frontend.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{AnalyzeArgs, ColorArgs, HyperArgs, McArgs, Output, PrimesArgs, SolutionsArgs};
use config::{parse_config, CommonArgs, ExperimentConfig};
use rado_lab::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "rado-lab", version, about = "Exact and Monte Carlo arithmetic-Ramsey computations")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ranks, columns conditions, m-parameters, abundance, irredundancy.
    Analyze(AnalyzeArgs),
    /// Solution counts, projections, threshold tables and related bounds.
    Solutions(SolutionsArgs),
    /// Sieve and arithmetic-progression statistics in the primes.
    Primes(PrimesArgs),
    /// Solution hypergraphs: restrictions, degrees, thresholds, substructures.
    Hyper(HyperArgs),
    /// Rado and Ramsey verdicts, monochromatic counts.
    Color(ColorArgs),
    /// Seeded Monte Carlo estimates and threshold fits.
    Mc(McArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Solutions(_) => "solutions",
            Command::Primes(_) => "primes",
            Command::Hyper(_) => "hyper",
            Command::Color(_) => "color",
            Command::Mc(_) => "mc",
        }
    }

    fn options(&self) -> serde_json::Value {
        let v = match self {
            Command::Analyze(a) => serde_json::to_value(a),
            Command::Solutions(a) => serde_json::to_value(a),
            Command::Primes(a) => serde_json::to_value(a),
            Command::Hyper(a) => serde_json::to_value(a),
            Command::Color(a) => serde_json::to_value(a),
            Command::Mc(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

fn run(cfg: &ExperimentConfig, command: &Command) -> Result<Output> {
    match command {
        Command::Analyze(a) => commands::analyze(cfg, a),
        Command::Solutions(a) => commands::solutions(cfg, a),
        Command::Primes(a) => commands::primes(cfg, a),
        Command::Hyper(a) => commands::hyper(cfg, a),
        Command::Color(a) => commands::color(cfg, a),
        Command::Mc(a) => commands::mc(cfg, a),
    }
}

fn header(cfg: &ExperimentConfig) -> serde_json::Value {
    json!({
        "tool": "rado-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seed": cfg.seed,
    })
}

fn emit(cfg: &ExperimentConfig, out: &Output) -> Result<()> {
    let doc = json!({"header": header(cfg), "result": out.result});
    if let Some(path) = &cfg.out {
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = if is_csv {
            let table = out
                .table
                .as_ref()
                .ok_or_else(|| Error::Invalid(format!("`{}` has no tabular output; use a .json file", cfg.command)))?;
            let mut s = format!(
                "# rado-lab {}\n# config: {}\n# seed: {}\n{}\n",
                env!("CARGO_PKG_VERSION"),
                serde_json::to_string(cfg)?,
                cfg.seed,
                table.header
            );
            for row in &table.rows {
                s.push_str(row);
                s.push('\n');
            }
            for line in &table.footer {
                s.push_str(&format!("# {line}\n"));
            }
            s
        } else {
            serde_json::to_string_pretty(&doc)? + "\n"
        };
        fs::write(path, body)?;
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    if cfg.json {
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        for line in &out.text {
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = parse_config(cli.command.name(), &cli.common, cli.command.options())?;
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(Error::Parse("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let out = run(&cfg, &cli.command)?;
    emit(&cfg, &out)?;
    Ok(out.unknown)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if informational { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match execute(&cli) {
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: some verdicts are unknown (node budget exhausted)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
