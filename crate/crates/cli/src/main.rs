//! `jetvar`: derive field equations, currents and checks for a model.

mod commands;
mod numeric;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use jetvar::modeldef::{parse_model, render_model, Model};
use jetvar::models::{build, BuiltinKind, BuiltinModelId};
use jetvar::{JetError, Result};

use commands::Sampling;
use report::Builder;

#[derive(Parser, Debug)]
#[command(
    name = "jetvar",
    version,
    about = "Symbolic variational calculus on jet bundles"
)]
struct Cli {
    /// `builtin:NAME` or a path to a model file.
    #[arg(long, global = true, default_value = "builtin:charged_fluid")]
    model: String,
    /// Base dimension of a builtin model.
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed of the random points used by numeric checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field equations and the boundary form.
    Derive,
    /// Noether current of a generator.
    Noether { generator: String },
    /// Superpotential of the vertical part of a generator.
    Superpotential { generator: String },
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        #[arg(long)]
        generator: Option<String>,
    },
    /// Lagrangian and field equations at seeded random points.
    Eval,
    /// Print the model itself.
    Emit {
        #[arg(value_enum)]
        what: EmitKind,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EmitKind {
    Dsl,
    Latex,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckKind {
    Covariance,
    Adapted,
    Jmap,
    Offshell,
}

fn load(spec: &str, dim: Option<usize>) -> Result<Model> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let kind: BuiltinKind = name.parse()?;
        return Ok(build(BuiltinModelId::new(kind, dim.unwrap_or(4))?));
    }
    let path = PathBuf::from(spec);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| JetError::Validation(format!("{}: {e}", path.display())))?;
    let m = parse_model(&text)?;
    if let Some(d) = dim.filter(|&d| d != m.n) {
        return Err(JetError::Validation(format!(
            "{} declares dimension {}, not {d}",
            path.display(),
            m.n
        )));
    }
    Ok(m)
}

fn fingerprint(m: &Model) -> Result<String> {
    let digest = Sha256::digest(render_model(m)?.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("sha256:{hex}"))
}

fn run(cli: &Cli, argv: Vec<String>) -> Result<bool> {
    let start = Instant::now();
    let m = load(&cli.model, cli.dim)?;
    let s = Sampling {
        seed: cli.seed,
        samples: cli.samples,
    };
    let mut out = Builder::new(&m);
    let mut format = cli.format;
    match &cli.command {
        Command::Derive => commands::derive(&m, &mut out)?,
        Command::Noether { generator } => {
            let g = commands::generator(&m, Some(generator))?;
            commands::noether(&m, g, &s, &mut out)?
        }
        Command::Superpotential { generator } => {
            let g = commands::generator(&m, Some(generator))?;
            commands::superpotential_cmd(&m, g, &s, &mut out)?
        }
        Command::Check { what, generator } => {
            let g = || commands::generator(&m, generator.as_deref());
            match what {
                CheckKind::Covariance => commands::covariance(&m, g()?, &s, &mut out)?,
                CheckKind::Adapted => commands::adapted(&m, &s, &mut out)?,
                CheckKind::Jmap => commands::jmap(&m, g()?, &s, &mut out)?,
                CheckKind::Offshell => commands::offshell(&m, g()?, &s, &mut out)?,
            }
        }
        Command::Eval => commands::eval(&m, &s, &mut out)?,
        Command::Emit { what } => {
            format = match what {
                EmitKind::Dsl => {
                    print!("{}", render_model(&m)?);
                    return Ok(true);
                }
                EmitKind::Latex => Format::Latex,
                EmitKind::Json => Format::Json,
            };
            commands::contents(&m, &mut out);
        }
    }
    let fp = fingerprint(&m)?;
    let report = out.finish(
        argv,
        fp,
        format == Format::Latex,
        start.elapsed().as_secs_f64(),
    )?;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
        _ => print!("{}", report.text()),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut argv: Vec<String> = std::env::args().skip(1).collect();
    argv.insert(0, "jetvar".into());
    match run(&cli, argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
