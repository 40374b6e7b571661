//! Command-line front end. `cli_run` maps arguments to an exit code:
//! 0 when every check passed, 1 when a check failed or the run itself failed,
//! 2 for unusable arguments or configuration.

use std::ffi::OsString;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wignerlab_core::harness::{
    parse_sizes, resolve_config, run_experiment, ExperimentKind, Overrides, RunOutput,
};
use wignerlab_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wignerlab", version, about = "Monte Carlo experiments on generalized Wigner matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw matrices and export their spectra.
    Sample(Common),
    /// Audit the local semicircle law and the edge counting estimates.
    Locallaw(Common),
    /// Eigenvalue deviations from the classical locations.
    Rigidity(Common),
    /// Largest eigenvector component.
    Deloc(Common),
    /// Probability of two eigenvalues in a sub-spacing window.
    Repulsion(Common),
    /// Eigenvector overlaps recovered from resolvent integrals.
    Reconstruct(Common),
    /// Two-ensemble comparison of eigenvalue/eigenvector observables.
    Compare(Common),
    /// Smooth functions of the edge counting statistic under two ensembles.
    Gfct(Common),
    /// Helffer-Sjostrand trace against the direct eigenvalue sum.
    HsCheck(Common),
    /// Closed-form invariant suite.
    Selftest(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix sizes, comma separated.
    #[arg(long = "N", value_name = "N[,N...]")]
    sizes: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    parallelism: Option<usize>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Sample(c) => (ExperimentKind::Sample, c),
            Command::Locallaw(c) => (ExperimentKind::Locallaw, c),
            Command::Rigidity(c) => (ExperimentKind::Rigidity, c),
            Command::Deloc(c) => (ExperimentKind::Deloc, c),
            Command::Repulsion(c) => (ExperimentKind::Repulsion, c),
            Command::Reconstruct(c) => (ExperimentKind::Reconstruct, c),
            Command::Compare(c) => (ExperimentKind::Compare, c),
            Command::Gfct(c) => (ExperimentKind::Gfct, c),
            Command::HsCheck(c) => (ExperimentKind::HsCheck, c),
            Command::Selftest(c) => (ExperimentKind::Selftest, c),
        }
    }
}

fn flag_overrides(c: &Common) -> Result<Overrides, Error> {
    Ok(Overrides {
        seed: c.seed,
        sizes: c.sizes.as_deref().map(parse_sizes).transpose()?,
        trials: c.trials,
        parallelism: c.parallelism,
        out: c.out.clone(),
        csv: c.csv.clone(),
    })
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InadmissibleMoments { .. } | Error::IndexOutOfRange(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_FAILED,
    }
}

fn emit(run: &RunOutput, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let cfg = &run.report.config;
    match &cfg.output.json {
        Some(p) => run.report.write_json(p)?,
        None => writeln!(stdout, "{}", run.report.to_json()?)?,
    }
    if let Some(p) = &cfg.output.csv {
        run.csv.write_file(p)?;
    }
    let s = &run.report.summary;
    let passed = s.checks.iter().filter(|c| c.passed).count();
    let verdict = if s.passed { "PASS" } else { "FAIL" };
    writeln!(stderr, "{}: {verdict} ({passed}/{} checks)", run.report.experiment, s.checks.len())?;
    for c in s.checks.iter().filter(|c| !c.passed) {
        let at = c.n.map(|n| format!(" at N = {n}")).unwrap_or_default();
        writeln!(stderr, "  failed {}{at}: value {} vs threshold {}", c.name, c.value, c.threshold)?;
    }
    Ok(())
}

/// Runs the command line with an explicit environment and output streams.
pub fn cli_run_with<I, T>(
    argv: I,
    env: impl Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let (kind, common) = cli.command.split();
    let cfg = Overrides::from_env_with(env)
        .and_then(|env| Ok((env, flag_overrides(&common)?)))
        .and_then(|(env, flags)| resolve_config(kind, common.config.as_deref(), &env, &flags));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let run = match catch_unwind(AssertUnwindSafe(|| run_experiment(&cfg))) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code_for(&e);
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal failure while running {kind}");
            return EXIT_FAILED;
        }
    };
    if let Err(e) = emit(&run, stdout, stderr) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_FAILED;
    }
    if run.report.summary.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

/// Runs the command line against the process environment and standard streams.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    cli_run_with(argv, |k| std::env::var(k).ok(), &mut stdout.lock(), &mut stderr.lock())
}
