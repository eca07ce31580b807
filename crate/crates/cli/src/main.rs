use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use transvect_cli::commands::{cmd_certify, cmd_factor, cmd_lift, cmd_verify};
use transvect_cli::problem::Overrides;
use transvect_cli::report::Report;
use transvect_cli::CliError;

/// Elementary factorization of special-linear matrices over scalar and
/// function rings, with independently verified certificates.
#[derive(Parser)]
#[command(name = "transvect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct OverrideArgs {
    /// Reconstruction residual tolerance.
    #[arg(long)]
    tol_recon: Option<f64>,
    /// Determinant-one tolerance.
    #[arg(long)]
    tol_det: Option<f64>,
    /// Certificate residual tolerance.
    #[arg(long)]
    tol_cert: Option<f64>,
    /// Minimum pivot magnitude for patchwise elimination.
    #[arg(long)]
    pivot_floor: Option<f64>,
    /// Cap on fitted polynomial degree.
    #[arg(long)]
    max_degree: Option<u32>,
    /// Time-axis resolution for homotopies.
    #[arg(long)]
    t_res: Option<usize>,
    /// Seed echoed into the report.
    #[arg(long)]
    seed: Option<u64>,
}

impl OverrideArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            tol_recon: self.tol_recon,
            tol_det: self.tol_det,
            tol_cert: self.tol_cert,
            pivot_floor: self.pivot_floor,
            max_degree: self.max_degree,
            t_res: self.t_res,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Factor a matrix (near-identity cascade or pivoted elimination).
    Factor {
        problem: PathBuf,
        /// Write the certificate document here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
        #[command(flatten)]
        ov: OverrideArgs,
    },
    /// Lift a factorization into the smooth class, or produce a smooth
    /// determinant-one representative.
    Lift {
        problem: PathBuf,
        #[arg(long)]
        cert_out: Option<PathBuf>,
        #[command(flatten)]
        ov: OverrideArgs,
    },
    /// Produce a homotopy certificate or a contractible-domain
    /// factorization.
    Certify {
        problem: PathBuf,
        #[arg(long)]
        cert_out: Option<PathBuf>,
        #[command(flatten)]
        ov: OverrideArgs,
    },
    /// Re-verify a certificate file by independent re-multiplication.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        tol_cert: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, result): (&'static str, Result<Report, CliError>) = match &cli.command {
        Command::Factor {
            problem,
            cert_out,
            ov,
        } => (
            "factor",
            cmd_factor(problem, &ov.overrides(), cert_out.as_deref()),
        ),
        Command::Lift {
            problem,
            cert_out,
            ov,
        } => (
            "lift",
            cmd_lift(problem, &ov.overrides(), cert_out.as_deref()),
        ),
        Command::Certify {
            problem,
            cert_out,
            ov,
        } => (
            "certify",
            cmd_certify(problem, &ov.overrides(), cert_out.as_deref()),
        ),
        Command::Verify {
            certificate,
            tol_cert,
        } => ("verify", cmd_verify(certificate, *tol_cert)),
    };
    match result {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_millis();
            report.print();
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("transvect {name}: {err}");
            let mut report = Report::new(name);
            report.status = "fail";
            report.error = Some(err.to_string());
            report.elapsed_ms = start.elapsed().as_millis();
            report.print();
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
