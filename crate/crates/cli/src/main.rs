//! `isoclinic`: construct and check isoclinic families from the command line.
//!
//! Every command prints a JSON report on standard output and a one-line
//! summary on standard error. Exit codes: 0 verdict true, 1 verdict false,
//! 2 bad input or usage.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isoclinic_core::Tolerance;

use commands::Interpretation;
use report::Outcome;

#[derive(Debug, Parser)]
#[command(name = "isoclinic", version, about = "Isoclinic subspaces, Knill-Laflamme conditions and MUMs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Relative tolerance (scaled by the reference spectral norm).
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,
    /// Directory for matrices and bundles written by the command.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Omit the timestamp so identical inputs give byte-identical reports.
    #[arg(long, global = true)]
    reproducible: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical angles between two subspaces.
    Angles {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long = "as", value_enum, default_value_t = Interpretation::Span)]
        interpretation: Interpretation,
    },
    /// Isoclinic family checks.
    #[command(subcommand)]
    Isoclinic(IsoclinicCommand),
    /// Knill-Laflamme checks.
    #[command(subcommand)]
    Kl(KlCommand),
    /// Stabilizer codes given by Pauli generators.
    #[command(subcommand)]
    Stabilizer(StabilizerCommand),
    /// Families built from anti-commuting and ω-commuting unitaries.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Mutually unbiased measurements stored as bundles.
    #[command(subcommand)]
    Mum(MumCommand),
}

#[derive(Debug, Subcommand)]
enum IsoclinicCommand {
    /// Check that every pair of the given subspaces is isoclinic.
    Check {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long = "as", value_enum, default_value_t = Interpretation::Projection)]
        interpretation: Interpretation,
    },
}

#[derive(Debug, Subcommand)]
enum KlCommand {
    /// Generalized conditions (or the classic ones with `--classic`).
    Check {
        /// Code projection.
        #[arg(long)]
        code: PathBuf,
        /// Error operators.
        #[arg(long, required = true, num_args = 1..)]
        ops: Vec<PathBuf>,
        #[arg(long)]
        classic: bool,
    },
}

#[derive(Debug, Subcommand)]
enum StabilizerCommand {
    /// Code projection and dimension.
    Project {
        #[arg(long)]
        generators: String,
    },
    /// Class of each error relative to the group.
    Classify {
        #[arg(long)]
        generators: String,
        #[arg(long)]
        errors: String,
    },
    /// Range isoclinicity and agreement of error classes with the witnesses.
    Verify {
        #[arg(long)]
        generators: String,
        #[arg(long)]
        errors: String,
    },
}

#[derive(Debug, Subcommand)]
enum ConstructCommand {
    /// `2q+1` anti-commuting Hermitian unitaries of size `m = 2^q·p`.
    Anticommuting {
        #[arg(long)]
        m: usize,
    },
    /// Graph projections of the anti-commuting family plus `P_∞`.
    Graphs {
        #[arg(long)]
        m: usize,
    },
    /// `n` ω-commuting unitaries of order `d`.
    Omega {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// `n` MUMs with `d` outcomes from the ω-commuting family.
    Mum {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum MumCommand {
    /// Check a MUM bundle.
    Check { bundle: PathBuf },
    /// Canonical form of two measurements of a bundle.
    Canonical {
        bundle: PathBuf,
        /// Anchor effect of the first measurement.
        #[arg(long, default_value_t = 0)]
        anchor: usize,
        /// The two measurements to use.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"], default_values_t = [0, 1])]
        measurements: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Angles { .. } => "angles",
            Command::Isoclinic(IsoclinicCommand::Check { .. }) => "isoclinic check",
            Command::Kl(KlCommand::Check { .. }) => "kl check",
            Command::Stabilizer(StabilizerCommand::Project { .. }) => "stabilizer project",
            Command::Stabilizer(StabilizerCommand::Classify { .. }) => "stabilizer classify",
            Command::Stabilizer(StabilizerCommand::Verify { .. }) => "stabilizer verify",
            Command::Construct(ConstructCommand::Anticommuting { .. }) => "construct anticommuting",
            Command::Construct(ConstructCommand::Graphs { .. }) => "construct graphs",
            Command::Construct(ConstructCommand::Omega { .. }) => "construct omega",
            Command::Construct(ConstructCommand::Mum { .. }) => "construct mum",
            Command::Mum(MumCommand::Check { .. }) => "mum check",
            Command::Mum(MumCommand::Canonical { .. }) => "mum canonical",
        }
    }
}

fn dispatch(command: &Command, global: &GlobalArgs, tol: &Tolerance) -> isoclinic_core::Result<Outcome> {
    let out = global.out.as_deref();
    match command {
        Command::Angles { a, b, interpretation } => commands::angles(a, b, *interpretation, tol),
        Command::Isoclinic(IsoclinicCommand::Check { inputs, interpretation }) => {
            commands::isoclinic_check(inputs, *interpretation, tol)
        }
        Command::Kl(KlCommand::Check { code, ops, classic }) => {
            commands::kl_check(code, ops, *classic, out, tol)
        }
        Command::Stabilizer(StabilizerCommand::Project { generators }) => {
            commands::stabilizer_project(generators, out)
        }
        Command::Stabilizer(StabilizerCommand::Classify { generators, errors }) => {
            commands::stabilizer_classify(generators, errors)
        }
        Command::Stabilizer(StabilizerCommand::Verify { generators, errors }) => {
            commands::stabilizer_verify(generators, errors, tol)
        }
        Command::Construct(ConstructCommand::Anticommuting { m }) => {
            commands::construct_anticommuting(*m, out)
        }
        Command::Construct(ConstructCommand::Graphs { m }) => commands::construct_graphs(*m, out, tol),
        Command::Construct(ConstructCommand::Omega { d, n }) => commands::construct_omega(*d, *n, out),
        Command::Construct(ConstructCommand::Mum { d, n }) => commands::construct_mum(*d, *n, out),
        Command::Mum(MumCommand::Check { bundle }) => commands::mum_check_bundle(bundle, tol),
        Command::Mum(MumCommand::Canonical {
            bundle,
            anchor,
            measurements,
        }) => commands::mum_canonical(bundle, [measurements[0], measurements[1]], *anchor, out, tol),
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    let text = message.to_string();
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
    eprintln!("{}", line.trim());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage_error(e),
    };
    let tol = match Tolerance::new(cli.global.abs_tol, cli.global.rel_tol) {
        Ok(t) => t,
        Err(e) => return usage_error(format_args!("error: {e}")),
    };
    let name = cli.command.name();
    let outcome = match dispatch(&cli.command, &cli.global, &tol) {
        Ok(o) => o,
        Err(e) if e.is_verdict() => Outcome::from_verdict_error(&e),
        Err(e) => return usage_error(format_args!("error: {name}: {e}")),
    };
    let report = outcome.into_report(name, &tol, cli.global.reproducible);
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t,
        Err(e) => return usage_error(format_args!("error: {e}")),
    };
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return usage_error(format_args!("error: {e}"));
        }
    }
    eprintln!(
        "{name}: verdict {}, max residual {:.3e}, {} artifact(s) written",
        report.verdict,
        report.max_residual,
        report.artifacts_written.len()
    );
    if report.verdict {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
