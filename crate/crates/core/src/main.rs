use std::process::ExitCode;

use clap::Parser;

use eda_core::harness::cli::{Cli, Command};
use eda_core::harness::{emit_density_comparison, run_experiment};
use eda_core::objectives::catalog;
use eda_core::{BenchmarkFunction, EdaError};

fn execute(command: Command) -> Result<(), EdaError> {
    match command {
        Command::Catalog => {
            println!(
                "{:<14} {:<8} {:<22} known minimum",
                "function", "dims", "box (first axis)"
            );
            for e in catalog() {
                let dims: Vec<String> = e.dimensions.iter().map(|d| d.to_string()).collect();
                let f = BenchmarkFunction::new(e.id, e.dimensions[0])?;
                let (lo, hi) = f.bounds::<f64>();
                println!(
                    "{:<14} {:<8} {:<22} {}",
                    e.name,
                    dims.join(","),
                    format!("[{}, {}]", lo[0], hi[0]),
                    f.known_optimum().0
                );
            }
        }
        Command::Density { dofs, out } => {
            emit_density_comparison(&dofs, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Run(spec) => {
            let result = run_experiment(&spec)?;
            println!(
                "{:<18} {:<16} {:>5} {:>6} {:>16} {:>14}",
                "case",
                "algorithm",
                "runs",
                "failed",
                "mean best",
                spec.spread.name()
            );
            for case in &result.cases {
                for arm in &case.arms {
                    let s = &arm.summary;
                    println!(
                        "{:<18} {:<16} {:>5} {:>6} {:>16.6} {:>14.6}",
                        case.name(),
                        s.label,
                        s.run_count,
                        s.failed_runs,
                        s.mean_best,
                        s.spread_best
                    );
                }
            }
            if let Some(dir) = &spec.out_dir {
                eprintln!("reports written to {}", dir.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.into_command().and_then(execute) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
