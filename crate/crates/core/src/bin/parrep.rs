use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parrep::harness::{
    self, compare_against_oracle, config_reference, emit_csv, model_reference, read_reference,
    run_experiment, validate_suite, write_reference, ExperimentConfig, ModelKind,
};
use parrep::Error;

#[derive(Parser)]
#[command(
    name = "parrep",
    version,
    about = "Parallel replica estimation of equilibrium averages"
)]
struct Cli {
    /// Worker threads (overrides PARREP_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV.
    Run {
        config: PathBuf,
        /// Reference-values file to compare the trial means against.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Compute reference values for a model (entropic, biased, or a config file).
    Oracle {
        model: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also solve each set's QSD (slow for the entropic walk).
        #[arg(long)]
        with_qsd: bool,
    },
    /// Run the invariant suite.
    Validate,
}

fn run(cli: Cli) -> Result<(), Error> {
    let workers = harness::worker_count(cli.workers)?;
    match cli.command {
        Command::Run { config, oracle } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = harness::with_workers(workers, || run_experiment(&cfg))??;
            emit_csv(&result.records, &result.observables, &cfg.output)?;
            println!(
                "wrote {} records to {}",
                result.records.len(),
                cfg.output.display()
            );
            for s in &result.summaries {
                let est: Vec<String> = result
                    .observables
                    .iter()
                    .zip(&s.estimates)
                    .map(|(o, e)| format!("{o}={:.6}±{:.6}", e.mean, e.std))
                    .collect();
                println!(
                    "{}={} {} speedup={:.3}±{:.3} loops={:.1}",
                    cfg.sweep.name(),
                    s.sweep,
                    est.join(" "),
                    s.speedup.mean,
                    s.speedup.std,
                    s.n_par_loops.mean
                );
            }
            if let Some(path) = oracle {
                let reference = read_reference(&path)?;
                let report =
                    compare_against_oracle(&result.records, &result.observables, &reference)?;
                print!("{}", report.to_text());
                if !report.all_pass() {
                    let failed = report.rows.iter().filter(|r| !r.pass).count();
                    return Err(Error::CheckFailed(format!(
                        "{failed} estimate(s) outside 3 standard errors of the oracle"
                    )));
                }
            }
        }
        Command::Oracle {
            model,
            output,
            with_qsd,
        } => {
            let reference = harness::with_workers(workers, || match ModelKind::parse(&model) {
                Ok(kind) if kind != ModelKind::Matrix => model_reference(kind, with_qsd),
                _ => config_reference(&ExperimentConfig::load(model.as_ref())?, with_qsd),
            })??;
            match output {
                Some(p) => write_reference(&reference, &p)?,
                None => print!("{}", harness::oracle::format_reference(&reference)),
            }
        }
        Command::Validate => {
            let checks = harness::with_workers(workers, validate_suite)?;
            for c in &checks {
                println!("{}", c.line());
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(Error::CheckFailed(format!("{failed} invariant check(s)")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
