mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kzmono::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "kzmono",
    version,
    about = "KZ connections, conformal blocks and braid monodromy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// run manifest (JSON)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// directory for output files; results go to stdout without it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// integrator tolerance, overriding the manifest
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// invariant, fusion and block dimensions
    Blocks,
    /// exact identities and rotation/BBW checks
    Verify,
    /// monodromy of the manifest's braid word
    Braid,
    /// fusion coefficients at the manifest level as CSV
    FusionTable,
    /// codimension bound and metaplectic parity
    CodimBound,
    /// representation and Ωⁱʲ matrices in exact form
    ExportRep,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Identity | ErrorKind::Numerical => 1,
        ErrorKind::Validation | ErrorKind::Io => 2,
        ErrorKind::OracleMismatch => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let Some(path) = cli.manifest.as_deref() else {
        eprintln!("error: --manifest is required");
        return ExitCode::from(2);
    };
    let run = || -> kzmono::Result<u8> {
        let mut m = manifest::RunManifest::load(path)?;
        if let Some(t) = cli.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {t}")));
            }
            m.tolerances.transport = t;
        }
        let out = cli.out.as_deref();
        match cli.command {
            Command::Blocks => commands::blocks(&m, out),
            Command::Verify => commands::verify(&m, out),
            Command::Braid => commands::braid(&m, out),
            Command::FusionTable => commands::fusion_table(&m, out),
            Command::CodimBound => commands::codim_bound(&m, out),
            Command::ExportRep => commands::export_rep(&m, out),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
