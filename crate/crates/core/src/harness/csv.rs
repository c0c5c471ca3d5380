//! CSV emission and parse-back of trial records.
//!
//! Columns: `trial,sweep,estimate_<obs>...,T_sim,wall_clock,speedup,n_decorr,
//! n_par_steps,n_par_loops,seed`. Floats are written in shortest round-trip
//! form, so parsing an emitted file reproduces the records exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::TrialRecord;
use crate::error::{Error, Result};

pub fn header(observables: &[String]) -> String {
    let mut cols = vec!["trial".to_string(), "sweep".to_string()];
    cols.extend(observables.iter().map(|o| format!("estimate_{o}")));
    cols.extend(
        [
            "T_sim",
            "wall_clock",
            "speedup",
            "n_decorr",
            "n_par_steps",
            "n_par_loops",
            "seed",
        ]
        .map(String::from),
    );
    cols.join(",")
}

pub fn to_csv_string(records: &[TrialRecord], observables: &[String]) -> String {
    let mut out = header(observables);
    out.push('\n');
    for r in records {
        write!(out, "{},{}", r.trial, r.sweep).unwrap();
        for e in &r.estimates {
            write!(out, ",{e:?}").unwrap();
        }
        writeln!(
            out,
            ",{},{},{:?},{},{},{},{}",
            r.t_sim, r.wall_clock, r.speedup, r.n_decorr, r.n_par_steps, r.n_par_loops, r.seed
        )
        .unwrap();
    }
    out
}

pub fn emit_csv(records: &[TrialRecord], observables: &[String], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_csv_string(records, observables))?;
    Ok(())
}

/// Parses a file written by [`emit_csv`]; returns observable names and records.
pub fn parse_csv(path: &Path) -> Result<(Vec<String>, Vec<TrialRecord>)> {
    parse_csv_str(&fs::read_to_string(path)?, path)
}

pub fn parse_csv_str(text: &str, origin: &Path) -> Result<(Vec<String>, Vec<TrialRecord>)> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines();
    let head: Vec<&str> = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?
        .split(',')
        .collect();
    if head.len() < 9 || head[0] != "trial" || head[1] != "sweep" {
        return Err(err(1, "unexpected header".into()));
    }
    let k = head.len() - 9;
    let observables = head[2..2 + k]
        .iter()
        .map(|c| {
            c.strip_prefix("estimate_")
                .map(String::from)
                .ok_or_else(|| err(1, format!("unexpected column {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if header(&observables) != head.join(",") {
        return Err(err(1, "unexpected header".into()));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != head.len() {
            return Err(err(
                lineno,
                format!("expected {} fields, found {}", head.len(), f.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(lineno, format!("bad integer {s:?}")))
        };
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("bad number {s:?}")))
        };
        records.push(TrialRecord {
            trial: int(f[0])? as usize,
            sweep: int(f[1])?,
            estimates: f[2..2 + k]
                .iter()
                .map(|s| float(s))
                .collect::<Result<_>>()?,
            t_sim: int(f[2 + k])?,
            wall_clock: int(f[3 + k])?,
            speedup: float(f[4 + k])?,
            n_decorr: int(f[5 + k])?,
            n_par_steps: int(f[6 + k])?,
            n_par_loops: int(f[7 + k])?,
            seed: int(f[8 + k])?,
        });
    }
    Ok((observables, records))
}
