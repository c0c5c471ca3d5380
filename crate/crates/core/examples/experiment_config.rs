//! A T_corr sweep driven by the key = value experiment format, written to CSV
//! and compared with the exact averages.
//!
//! cargo run --release --example experiment_config -- [config]

use std::path::PathBuf;

use parrep::harness::{
    compare_against_oracle, config_reference, emit_csv, run_experiment, ExperimentConfig,
};

const DEFAULT: &str = "examples/configs/biased_tcorr.cfg";

fn main() -> parrep::Result<()> {
    let path = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| format!("{}/{DEFAULT}", env!("CARGO_MANIFEST_DIR"))),
    );
    let cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join("parrep_experiment_config.csv");
    let result = run_experiment(&cfg)?;
    emit_csv(&result.records, &result.observables, &out)?;
    println!("wrote {} rows to {}", result.records.len(), out.display());

    let oracle = config_reference(&cfg, false)?;
    let report = compare_against_oracle(&result.records, &result.observables, &oracle)?;
    print!("{}", report.to_text());
    Ok(())
}
