use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smoothlab::harness::{
    fit_series, output_paths, read_csv, run_experiment, run_sweep, write_outputs, ExperimentConfig,
    RunOptions, OUT_DIR_ENV,
};
use smoothlab::verify::suite::{run_suite, SUITES};
use smoothlab::LabError;

#[derive(Parser)]
#[command(
    name = "smoothlab",
    version,
    about = "Online learning against smoothed and hinted adversaries"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Added to every configured seed (for `verify`, the suite seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed_base: u64,
    /// Worker threads for concurrent seeds.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the config path's directory and the
    /// SMOOTHLAB_OUT_DIR environment variable.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run { config: PathBuf },
    /// Run every point of the config's sweep grid.
    Sweep { config: PathBuf },
    /// Run the numeric lemma checks and print a JSON report array.
    Verify {
        /// One of the named suites, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Fit regret scaling exponents from an experiment CSV.
    Fit { csv: PathBuf },
}

enum Failure {
    Lab(LabError),
    Verification(usize),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Lab(e)
    }
}

fn out_dir(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
}

fn experiment(path: &Path, global: &Global, sweep: bool) -> Result<(), Failure> {
    let config = ExperimentConfig::load(path)?;
    let options = RunOptions {
        seed_base: global.seed_base,
        jobs: global.jobs,
    };
    let out = if sweep {
        run_sweep(&config, options)?
    } else {
        run_experiment(&config, options)?
    };
    for tr in &out.transcripts {
        for w in &tr.warnings {
            eprintln!("warning (seed {}): {w}", tr.seed);
        }
    }
    let (csv_path, transcript_path) = output_paths(&config, out_dir(&global.out).as_deref());
    write_outputs(&out, &csv_path, &transcript_path)?;
    for row in out.rows.iter().filter(|r| r.is_aggregate()) {
        println!(
            "{} {} vs {}: T={} sigma={} mean regret {} {}",
            row.experiment_id,
            row.learner,
            row.adversary,
            row.horizon,
            row.sigma,
            row.regret,
            row.seed
        );
    }
    println!(
        "wrote {} and {}",
        csv_path.display(),
        transcript_path.display()
    );
    Ok(())
}

fn verify(suite: &str, global: &Global) -> Result<(), Failure> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(LabError::Config(format!(
            "unknown suite {suite:?}; expected one of {} or all",
            SUITES.join(", ")
        ))
        .into());
    }
    let reports = run_suite(suite, global.seed_base)?;
    let json = serde_json::to_string_pretty(&reports).map_err(LabError::from)?;
    match out_dir(&global.out) {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(LabError::from)?;
            let path = dir.join(format!("verify_{suite}.json"));
            std::fs::write(&path, &json).map_err(LabError::from)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!("FAIL {}: {}", r.check, r.detail);
    }
    eprintln!("{} checks, {failed} failed", reports.len());
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}

fn fit(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    let rows = read_csv(&text)?;
    let mut any_ok = false;
    let mut first_err = None;
    for (key, fit) in fit_series(&rows) {
        match fit {
            Ok(f) => {
                any_ok = true;
                for w in &f.warnings {
                    eprintln!("warning ({} {}): {w}", key.learner, key.adversary);
                }
                let line = serde_json::json!({ "series": key, "alpha": f.alpha, "intercept": f.intercept,
                    "r_squared": f.r_squared, "points": f.points });
                println!("{line}");
            }
            Err(e) => {
                eprintln!("{} {}: {e}", key.learner, key.adversary);
                first_err.get_or_insert(e);
            }
        }
    }
    match (any_ok, first_err) {
        (false, Some(e)) => Err(e.into()),
        (false, None) => Err(LabError::Fit("no data rows".into()).into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    // Usage errors are config errors here; clap's own code 2 would read as
    // a verification failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { config } => experiment(config, &cli.global, false),
        Command::Sweep { config } => experiment(config, &cli.global, true),
        Command::Verify { suite } => verify(suite, &cli.global),
        Command::Fit { csv } => fit(csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(n)) => {
            eprintln!("verification failed: {n} check(s)");
            ExitCode::from(2)
        }
        Err(Failure::Lab(e)) => {
            eprintln!("error: {e}");
            match e {
                LabError::Capacity(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
