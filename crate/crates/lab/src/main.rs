use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kleinflow::acceptance::{run_all_criteria, suite_ok};
use kleinflow::config::{load_scenarios, Scenario};
use kleinflow::profile::TolProfile;
use kleinflow::runner::{run_all, write_manifests, RunOptions};
use kleinflow::{builtin, catalog};

#[derive(Parser)]
#[command(name = "kleinflow", version, about = "Renormalization and flow experiments on Kleinian group actions")]
struct Cli {
    /// Output directory; overrides `output_dir` in scenario files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every scenario; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `strict` tightens scenario error bounds tenfold.
    #[arg(long, global = true, default_value = "default")]
    tol_profile: TolProfile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the scenarios of a file, or the builtin ones.
    ListScenarios { file: Option<PathBuf> },
    /// Run every scenario of a file. `builtin` runs the shipped scenarios.
    Run { file: PathBuf },
    /// List the builtin groups.
    Catalog,
    /// Run the acceptance suite.
    Selftest,
}

fn scenarios_of(file: Option<&PathBuf>) -> Result<Vec<Scenario>, String> {
    match file {
        Some(f) if f.as_os_str() != "builtin" => load_scenarios(f).map_err(|e| e.to_string()),
        _ => builtin::scenarios().map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { out: cli.out.clone(), seed: cli.seed, profile: cli.tol_profile };
    match cli.command {
        Command::ListScenarios { file } => match scenarios_of(file.as_ref()) {
            Ok(list) => {
                for s in list {
                    println!("{:<24} {:<20} seed {}", s.id, s.pipeline, s.seed);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { file } => {
            let scenarios = match scenarios_of(Some(&file)) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let results = run_all(&scenarios, &opts);
            let mut all_passed = true;
            for r in &results {
                match r {
                    Ok(o) => {
                        all_passed &= o.output.passed;
                        let v = if o.output.passed { "PASS" } else { "FAIL" };
                        println!("{v} {:<24} {}", o.id, o.output.summary);
                    }
                    Err(e) => {
                        all_passed = false;
                        println!("ERR  {e}");
                    }
                }
            }
            match write_manifests(&scenarios, &results, &opts) {
                Ok(paths) => {
                    for p in paths {
                        println!("manifest {}", p.display());
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    all_passed = false;
                }
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Catalog => {
            for e in catalog::ENTRIES {
                println!("{:<10} {}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let scratch = cli.out.is_none();
            let work = cli
                .out
                .unwrap_or_else(|| std::env::temp_dir().join(format!("kleinflow-selftest-{}", std::process::id())));
            let results = run_all_criteria(&work);
            if scratch {
                let _ = std::fs::remove_dir_all(&work);
            }
            for r in &results {
                println!("{}", r.line());
            }
            if suite_ok(&results) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
