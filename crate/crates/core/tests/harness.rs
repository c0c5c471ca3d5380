use std::fs;
use std::path::Path;
use std::process::Command;

use parrep::harness::{
    compare_against_oracle, emit_csv, parse_csv, read_reference, run_experiment, with_workers,
    ExperimentConfig,
};

const BIASED_CONFIG: &str = "\
model = biased
sweep = n
sweep_values = 1, 4
t_corr_base = 20
stop_t_sim = 50000
trials = 3
seed = 11
output = out/results.csv
";

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("exp.cfg");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn experiment_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&write_config(dir.path(), BIASED_CONFIG)).unwrap();
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.records.len(), 6);
    assert_eq!(res.summaries.len(), 2);
    assert_eq!(res.observables, vec!["x", "f"]);
    let order: Vec<(u64, usize)> = res.records.iter().map(|r| (r.sweep, r.trial)).collect();
    assert_eq!(order, vec![(1, 0), (1, 1), (1, 2), (4, 0), (4, 1), (4, 2)]);
    for r in &res.records {
        assert!(r.t_sim > 50_000);
        assert!(r.speedup.is_finite() && r.estimates.iter().all(|e| e.is_finite()));
    }
    emit_csv(&res.records, &res.observables, &cfg.output).unwrap();
    let (names, back) = parse_csv(&cfg.output).unwrap();
    assert_eq!(names, res.observables);
    assert_eq!(back, res.records);
}

#[test]
fn csv_is_byte_identical_across_runs_and_pools() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&write_config(dir.path(), BIASED_CONFIG)).unwrap();
    let mut files = Vec::new();
    for (i, workers) in [1, 8, 1].into_iter().enumerate() {
        let res = with_workers(Some(workers), || run_experiment(&cfg))
            .unwrap()
            .unwrap();
        let p = dir.path().join(format!("r{i}.csv"));
        emit_csv(&res.records, &res.observables, &p).unwrap();
        files.push(fs::read(&p).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn records_do_not_depend_on_the_number_of_trials() {
    let dir = tempfile::tempdir().unwrap();
    let three = ExperimentConfig::load(&write_config(dir.path(), BIASED_CONFIG)).unwrap();
    let five = ExperimentConfig {
        trials: 5,
        ..three.clone()
    };
    let a = run_experiment(&three).unwrap().records;
    let b = run_experiment(&five).unwrap().records;
    for r in &a {
        assert!(b.contains(r));
    }
}

#[test]
fn matrix_model_from_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("chain.txt"),
        "# two wells joined through state 2\n5\n\
         0.90 0.09 0.01 0.00 0.00\n\
         0.10 0.88 0.02 0.00 0.00\n\
         0.25 0.00 0.50 0.00 0.25\n\
         0.00 0.00 0.02 0.88 0.10\n\
         0.00 0.00 0.01 0.09 0.90\n",
    )
    .unwrap();
    let text = "model = matrix\nmatrix_file = chain.txt\nset.L = 0 1\nset.R = 3 4\nsweep = t_corr_base\nsweep_values = 5, 10\nn = 4\nstop_t_sim = 20000\ntrials = 2\n";
    let cfg = ExperimentConfig::load(&write_config(dir.path(), text)).unwrap();
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.observables, vec!["x", "in_L", "in_R"]);
    assert_eq!(res.records.len(), 4);
    for r in &res.records {
        assert!(r.estimates[1] + r.estimates[2] <= 1.0 + 1e-12);
    }
    let reference = parrep::harness::config_reference(&cfg, true).unwrap();
    assert!((reference.get("in_L").unwrap() - reference.get("in_R").unwrap()).abs() < 1e-12);
    assert!(reference.get("escape.L").unwrap() > 0.0);
}

#[test]
fn constant_estimates_compare_with_zero_bias() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "2\n0.9 0.1\n0.1 0.9\n").unwrap();
    let text = "model = matrix\nmatrix_file = c.txt\nset.A = 0\nset.B = 1\nsweep = n\nsweep_values = 2\nt_corr_base = 3\nstop_t_sim = 1000\ntrials = 2\n";
    let cfg = ExperimentConfig::load(&write_config(dir.path(), text)).unwrap();
    let res = run_experiment(&cfg).unwrap();
    // in_A + in_B is identically one.
    let mut records = res.records.clone();
    for r in &mut records {
        r.estimates = vec![r.estimates[1] + r.estimates[2]];
    }
    let reference = parrep::models::ReferenceValues {
        model: "matrix".into(),
        values: vec![("total".into(), 1.0)],
    };
    let report = compare_against_oracle(&records, &["total".into()], &reference).unwrap();
    assert!(report.rows.iter().all(|r| r.bias.abs() < 1e-12 && r.pass));
}

fn parrep_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_parrep"))
        .args(args)
        .env("PARREP_WORKERS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BIASED_CONFIG);
    let reference = dir.path().join("biased.ref");
    let (code, _) = parrep_cli(&["oracle", "biased", "-o", reference.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(read_reference(&reference).unwrap().model, "biased");

    let (code, out) = parrep_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(dir.path().join("out/results.csv").exists());

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "model = biased\nsweeps = n\n").unwrap();
    assert_eq!(parrep_cli(&["run", bad.to_str().unwrap()]).0, 2);
    assert_eq!(parrep_cli(&["run", "/definitely/missing.cfg"]).0, 2);

    let wrong = dir.path().join("wrong.ref");
    fs::write(&wrong, "model = biased\nx = 10\nf = 0.9\n").unwrap();
    let (code, out) = parrep_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--oracle",
        wrong.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{out}");

    let incomplete = dir.path().join("incomplete.ref");
    fs::write(&incomplete, "model = biased\nx = 27.5\n").unwrap();
    assert_eq!(
        parrep_cli(&[
            "run",
            cfg.to_str().unwrap(),
            "--oracle",
            incomplete.to_str().unwrap()
        ])
        .0,
        3
    );

    let out = Command::new(env!("CARGO_BIN_EXE_parrep"))
        .args(["validate"])
        .env("PARREP_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
