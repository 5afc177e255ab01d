//! `critlab` command-line entry point.
//!
//! Each subcommand writes its files plus `config.toml` (the fully resolved
//! options, re-runnable with `--config`) and `manifest.json` into
//! `<out>/<command>/<label>/`. Exit codes: 0 success, 2 configuration or
//! validation error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::*;
use error::CliError;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "critlab", version, about = "Critical behaviour of small-dispersion equations")]
struct Cli {
    /// TOML config file; relative names are also looked up in $CRITLAB_CONFIG_DIR.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root (default `critlab-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run directory name (default: UTC timestamp).
    #[arg(long, global = true)]
    label: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Characteristic solution u(x, t) on a grid.
    Hopf(HopfArgs),
    /// Point of gradient catastrophe.
    Catastrophe(CatastropheArgs),
    /// Lenard iterate and flow of the KdV hierarchy.
    Hierarchy(HierarchyArgs),
    /// Pseudospectral time evolution.
    Evolve(EvolveArgs),
    /// Real pole-free P_I² solution U(X, T) at one T.
    PainleveU(PainleveUArgs),
    /// Tritronquée Painlevé I solution along a ray.
    PainleveQ(PainleveQArgs),
    /// Determinant and cyclic consistency of a jump descriptor.
    RhCheck(RhCheckArgs),
    /// φ(λ) on a λ grid.
    Phi(PhiArgs),
    /// ε sweep against the double-scaling prediction.
    Universality(UniversalityArgs),
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: toml::Value,
    started_utc: String,
    wall_time_seconds: f64,
    diagnostics: serde_json::Value,
    outputs: Vec<String>,
}

/// Builds the resolved config file holding only `section`.
fn section_file(name: &str, section: impl Serialize) -> Result<toml::Value, CliError> {
    let value = toml::Value::try_from(section).map_err(|e| CliError::Config(e.to_string()))?;
    let mut table = toml::map::Map::new();
    table.insert(name.to_string(), value);
    Ok(toml::Value::Table(table))
}

macro_rules! dispatch {
    ($cmd:expr, $file:expr, $($variant:ident => $section:ident, $name:literal, $func:path);* $(;)?) => {
        match $cmd {
            $(Command::$variant(args) => {
                let run = $func(args.merged($file.$section.take()).resolved())?;
                ($name, section_file($name, &run.config)?, run.outputs, run.diagnostics)
            })*
        }
    };
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let name = command_name(&cli.command);
    let mut loaded = config::load(cli.config.as_deref(), name)?;
    let file = &mut loaded;
    let out = cli.out.or(file.out.take()).unwrap_or_else(|| PathBuf::from("critlab-out"));
    let label = cli.label.or(file.label.take());
    let (name, resolved, outputs, diagnostics) = dispatch!(cli.command, file,
        Hopf => hopf, "hopf", commands::hopf;
        Catastrophe => catastrophe, "catastrophe", commands::catastrophe;
        Hierarchy => hierarchy, "hierarchy", commands::hierarchy;
        Evolve => evolve, "evolve", commands::evolve_cmd;
        PainleveU => painleve_u, "painleve-u", commands::painleve_u;
        PainleveQ => painleve_q, "painleve-q", commands::painleve_q;
        RhCheck => rh_check, "rh-check", commands::rh_check;
        Phi => phi, "phi", commands::phi;
        Universality => universality, "universality", commands::universality;
    );
    let dir = output::run_dir(&out, name, label.as_deref());
    let config_text = toml::to_string(&resolved).map_err(|e| CliError::Config(e.to_string()))?;
    let mut names = outputs.names();
    names.push("config.toml".into());
    let manifest = Manifest {
        tool: "critlab",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        config: resolved,
        started_utc: started.to_rfc3339(),
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        diagnostics,
        outputs: names,
    };
    outputs.write_to(&dir)?;
    let mut extra = output::Outputs::default();
    extra.text("config.toml", config_text);
    extra.json("manifest.json", &manifest);
    extra.write_to(&dir)?;
    if !outputs.stdout.is_empty() {
        // a closed pipe is not an error of the run
        let _ = writeln!(std::io::stdout(), "{}", outputs.stdout);
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Hopf(_) => "hopf",
        Command::Catastrophe(_) => "catastrophe",
        Command::Hierarchy(_) => "hierarchy",
        Command::Evolve(_) => "evolve",
        Command::PainleveU(_) => "painleve-u",
        Command::PainleveQ(_) => "painleve-q",
        Command::RhCheck(_) => "rh-check",
        Command::Phi(_) => "phi",
        Command::Universality(_) => "universality",
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
