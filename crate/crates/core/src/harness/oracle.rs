//! Reference values and the comparison of trial estimates against them.
//!
//! A reference-values file is flat `key = value` text. The `model` key names
//! the model; every other key is an observable name or a derived quantity
//! such as `escape.S1`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::TrialRecord;
use crate::error::{Error, Result};
use crate::models::ReferenceValues;
use crate::stats::Summary;
use crate::tolerances::Z_THRESHOLD;

pub fn format_reference(r: &ReferenceValues) -> String {
    let mut out = format!("model = {}\n", r.model);
    for (k, v) in &r.values {
        writeln!(out, "{k} = {v:?}").unwrap();
    }
    out
}

pub fn write_reference(r: &ReferenceValues, path: &Path) -> Result<()> {
    fs::write(path, format_reference(r))?;
    Ok(())
}

pub fn parse_reference(text: &str, origin: &Path) -> Result<ReferenceValues> {
    let mut model = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "model" {
            model = Some(v.to_string());
        } else {
            let x: f64 = v.parse().map_err(|_| err(format!("bad value {v:?}")))?;
            if values.iter().any(|(n, _): &(String, f64)| n == k) {
                return Err(err(format!("duplicate key {k:?}")));
            }
            values.push((k.to_string(), x));
        }
    }
    let model = model.ok_or_else(|| Error::Parse {
        path: origin.to_path_buf(),
        line: 0,
        msg: "missing model".into(),
    })?;
    Ok(ReferenceValues { model, values })
}

pub fn read_reference(path: &Path) -> Result<ReferenceValues> {
    parse_reference(&fs::read_to_string(path)?, path)
}

/// Comparison of one observable at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub sweep: u64,
    pub observable: String,
    pub oracle: f64,
    pub mean: f64,
    pub bias: f64,
    pub std: f64,
    /// `bias / (std / sqrt(trials))`; zero when both vanish.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn pass_fraction(&self) -> f64 {
        self.rows.iter().filter(|r| r.pass).count() as f64 / self.rows.len().max(1) as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("sweep,observable,oracle,mean,bias,std,z,pass\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3},{}",
                r.sweep, r.observable, r.oracle, r.mean, r.bias, r.std, r.z, r.pass
            )
            .unwrap();
        }
        out
    }
}

/// z-scores of the trial means against the oracle, per sweep value and
/// observable. Passing means `|z| <= 3`.
pub fn compare_against_oracle(
    records: &[TrialRecord],
    observables: &[String],
    oracle: &ReferenceValues,
) -> Result<OracleReport> {
    let truth = observables
        .iter()
        .map(|o| {
            oracle
                .get(o)
                .ok_or_else(|| Error::MissingOracle(format!("{} for model {}", o, oracle.model)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sweeps: Vec<u64> = Vec::new();
    for r in records {
        if !sweeps.contains(&r.sweep) {
            sweeps.push(r.sweep);
        }
    }
    let mut rows = Vec::new();
    for s in sweeps {
        let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.sweep == s).collect();
        for (i, name) in observables.iter().enumerate() {
            let sum = Summary::of(&rs.iter().map(|r| r.estimates[i]).collect::<Vec<_>>());
            let bias = sum.mean - truth[i];
            let se = sum.std_error();
            let z = if bias == 0.0 {
                0.0
            } else if se > 0.0 {
                bias / se
            } else {
                f64::INFINITY.copysign(bias)
            };
            rows.push(OracleRow {
                sweep: s,
                observable: name.clone(),
                oracle: truth[i],
                mean: sum.mean,
                bias,
                std: sum.std,
                z,
                pass: z.abs() <= Z_THRESHOLD,
            });
        }
    }
    Ok(OracleReport { rows })
}
