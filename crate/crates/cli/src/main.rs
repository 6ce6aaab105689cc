use std::path::PathBuf;
use std::process::ExitCode;

use birkhoff_cli::{run, CliError, Experiment, Format, PartialConfig, Rule};
use clap::Parser;

/// Seeded experiments on renormalized Birkhoff sums and their lattice
/// limit law.
#[derive(Debug, Parser)]
#[command(name = "birkhoff", version = env!("BIRKHOFF_GIT_DESCRIBE"))]
struct Args {
    /// Exponent of the singularity, in (0, 1).
    #[arg(long)]
    a: Option<f64>,
    /// Orbit length; repeatable.
    #[arg(long = "N")]
    n: Vec<u64>,
    /// Cutoff parameter; repeatable.
    #[arg(long)]
    eps: Vec<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Coefficients used in the limit kernel.
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    /// TOML file with the same keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main_inner() -> Result<i32, CliError> {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // Help and version go to stdout with status 0, usage errors to
            // stderr with status 2.
            e.print().map_err(CliError::Io)?;
            return Ok(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let file = match &args.config {
        Some(p) => PartialConfig::from_file(p)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        a: args.a,
        n_list: (!args.n.is_empty()).then_some(args.n),
        eps: (!args.eps.is_empty()).then_some(args.eps),
        samples: args.samples,
        seed: args.seed,
        out: args.out,
        format: args.format,
        experiment: args.experiment,
        rule: args.rule,
    };
    let cfg = file.overridden_by(flags).resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Usage("threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = pool.install(|| run(&cfg))?;
    for f in &report.files {
        println!("{}", f.display());
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {c:?}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
