//! `codazzi`: verify Codazzi-type structures and curvature identities on
//! metrics given in coordinates.
//!
//! Exit status: 0 when every check passed or failed as declared, 1 when at
//! least one check failed unexpectedly, 2 on load or validation errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use codazzi_core::geometry::CONVENTIONS;
use codazzi_core::manifest::{load_manifest, Format};
use codazzi_core::residual::DEFAULT_TOL;
use codazzi_core::runner::{run_checks, RunOptions};
use codazzi_core::{catalog, Error};

#[derive(Parser)]
#[command(name = "codazzi", version, about = "Verify Codazzi tensors and curvature identities on coordinate charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks declared in a manifest.
    Verify {
        manifest: PathBuf,
        /// Comma-separated check ids or kinds to run.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Tolerance for checks without their own `tol`.
        #[arg(long, env = "CODAZZI_TOL")]
        tol: Option<f64>,
        /// Output format; defaults to the manifest's `output.format`, else text.
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Built-in fixture manifests.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print the index and sign conventions.
    Conventions,
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List the built-in manifests.
    List,
    /// Write a built-in manifest to a file (`-` for stdout).
    Emit { name: String, path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Records,
}

fn verify(
    path: &PathBuf,
    only: Option<Vec<String>>,
    tol: Option<f64>,
    format: Option<OutFormat>,
) -> anyhow::Result<u8> {
    let default_tol = tol.unwrap_or(DEFAULT_TOL);
    if !(default_tol.is_finite() && default_tol > 0.0) {
        bail!("tolerance must be a positive number, got {default_tol}");
    }
    let manifest = load_manifest(path)?;
    let report = run_checks(&manifest, &RunOptions { only, default_tol })?;
    let format = match (format, manifest.format) {
        (Some(OutFormat::Records), _) | (None, Some(Format::Records)) => Format::Records,
        _ => Format::Text,
    };
    let out = match format {
        Format::Records => report.to_records(),
        Format::Text => report.to_text(),
    };
    std::io::stdout().lock().write_all(out.as_bytes())?;
    Ok(report.summary.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Verify {
            manifest,
            only,
            tol,
            format,
        } => verify(&manifest, only, tol, format),
        Command::Catalog { action: CatalogAction::List } => {
            let mut out = std::io::stdout().lock();
            for name in catalog::names() {
                writeln!(out, "{name:<16} {}", catalog::describe(name)?)?;
            }
            Ok(0)
        }
        Command::Catalog {
            action: CatalogAction::Emit { name, path },
        } => {
            if path.as_os_str() == "-" {
                std::io::stdout().lock().write_all(catalog::source(&name)?.as_bytes())?;
            } else {
                catalog::emit(&name, &path).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(0)
        }
        Command::Conventions => {
            print!("{CONVENTIONS}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(Error::CatalogNotFound(_)) = e.downcast_ref::<Error>() {
                eprintln!("available: {}", catalog::names().collect::<Vec<_>>().join(", "));
            }
            ExitCode::from(2)
        }
    }
}
