//! Experiment configuration: a flat `key = value` text file.
//!
//! ```text
//! # comment
//! model = biased                 # entropic | biased | matrix
//! matrix_file = chain.txt        # model = matrix only
//! set.A = 0 1                    # model = matrix only: state indices of a set
//! sweep = t_corr_base            # t_corr_base | n
//! sweep_values = 20, 40, 60
//! n = 100                        # fixed N when sweeping t_corr_base
//! t_corr_base = 60               # fixed base when sweeping n
//! t_corr_scale = S1:1.5, S2:1.5, S3:1
//! t_phase_scale = S1:1.5, S2:1.5, S3:1
//! t_poll = 1
//! stop_t_sim = 10000000
//! trials = 20
//! seed = 1
//! dephasing = fleming_viot       # fleming_viot | rejection | exact
//! idealized = false
//! initial = 1                    # state: "x" (biased, matrix) or "x,y" (entropic)
//! output = results.csv
//! ```
//!
//! `T_corr(S) = round(t_corr_scale[S] * base)` and likewise for `T_phase`.
//! `t_phase_scale` defaults to `t_corr_scale`, i.e. `T_phase = T_corr`.
//! Unknown keys are rejected. Relative paths resolve against the directory
//! of the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::DephasingMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Entropic,
    Biased,
    Matrix,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Entropic => "entropic",
            ModelKind::Biased => "biased",
            ModelKind::Matrix => "matrix",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "entropic" => Ok(ModelKind::Entropic),
            "biased" => Ok(ModelKind::Biased),
            "matrix" => Ok(ModelKind::Matrix),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    TCorrBase,
    Replicas,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::TCorrBase => "t_corr_base",
            SweepVariable::Replicas => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub matrix_file: Option<PathBuf>,
    /// Declared sets of a matrix model, in file order.
    pub sets: Vec<(String, Vec<usize>)>,
    pub sweep: SweepVariable,
    pub sweep_values: Vec<u64>,
    pub replicas: Option<usize>,
    pub t_corr_base: Option<u64>,
    pub t_corr_scale: Vec<(String, f64)>,
    pub t_phase_scale: Vec<(String, f64)>,
    pub t_poll: u64,
    pub stop_t_sim: u64,
    pub trials: usize,
    pub seed: u64,
    pub dephasing: DephasingMode,
    pub idealized: bool,
    pub initial: Option<Vec<i64>>,
    pub output: PathBuf,
}

const KEYS: &[&str] = &[
    "model",
    "matrix_file",
    "sweep",
    "sweep_values",
    "n",
    "t_corr_base",
    "t_corr_scale",
    "t_phase_scale",
    "t_poll",
    "stop_t_sim",
    "trials",
    "seed",
    "dephasing",
    "idealized",
    "initial",
    "output",
];

/// Default couplings: `T_corr(S2) = 4 T_corr(S1)` for the entropic walk,
/// `T_corr(S1) = T_corr(S2) = 3/2 T_corr(S3)` for the biased walk.
pub fn default_scales(model: ModelKind, sets: &[(String, Vec<usize>)]) -> Vec<(String, f64)> {
    match model {
        ModelKind::Entropic => vec![("S1".into(), 1.0), ("S2".into(), 4.0)],
        ModelKind::Biased => vec![("S1".into(), 1.5), ("S2".into(), 1.5), ("S3".into(), 1.0)],
        ModelKind::Matrix => sets.iter().map(|(n, _)| (n.clone(), 1.0)).collect(),
    }
}

pub fn set_names(model: ModelKind, sets: &[(String, Vec<usize>)]) -> Vec<String> {
    default_scales(model, sets)
        .into_iter()
        .map(|(n, _)| n)
        .collect()
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    let cleaned: String = v.chars().filter(|c| *c != '_').collect();
    if let Ok(x) = cleaned.parse() {
        return Ok(x);
    }
    // Allow 1e7-style integers.
    if let Ok(f) = cleaned.parse::<f64>() {
        if f.fract() == 0.0 && f >= 0.0 {
            if let Ok(x) = format!("{}", f as u128).parse() {
                return Ok(x);
            }
        }
    }
    Err(Error::Config(format!(
        "{key}: expected an integer, got {v:?}"
    )))
}

fn parse_scales(key: &str, v: &str) -> Result<Vec<(String, f64)>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (name, value) = item.split_once(':').ok_or_else(|| {
                Error::Config(format!("{key}: expected NAME:FACTOR, got {item:?}"))
            })?;
            let f: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: bad factor {value:?}")))?;
            if !(f > 0.0) {
                return Err(Error::Config(format!("{key}: factor must be positive")));
            }
            Ok((name.trim().to_string(), f))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, path)
    }

    pub fn parse(text: &str, base_dir: &Path, origin: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        let mut sets = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(name) = k.strip_prefix("set.") {
                let idx = v
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| parse_err(format!("bad state index {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                sets.push((name.to_string(), idx));
                continue;
            }
            if !KEYS.contains(&k) {
                return Err(parse_err(format!("unknown key {k:?}")));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(parse_err(format!("duplicate key {k:?}")));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let require = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key {k:?}")));

        let model = ModelKind::parse(require("model")?)?;
        let matrix_file = get("matrix_file").map(|p| base_dir.join(p));
        match model {
            ModelKind::Matrix => {
                if matrix_file.is_none() {
                    return Err(Error::Config("model = matrix needs matrix_file".into()));
                }
                if sets.is_empty() {
                    return Err(Error::Config(
                        "model = matrix needs at least one set.NAME".into(),
                    ));
                }
            }
            _ => {
                if matrix_file.is_some() || !sets.is_empty() {
                    return Err(Error::Config(
                        "matrix_file and set.* apply to model = matrix only".into(),
                    ));
                }
            }
        }
        let sweep = match require("sweep")? {
            "t_corr_base" => SweepVariable::TCorrBase,
            "n" => SweepVariable::Replicas,
            other => return Err(Error::Config(format!("unknown sweep variable {other:?}"))),
        };
        let sweep_values = require("sweep_values")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_int::<u64>("sweep_values", s))
            .collect::<Result<Vec<_>>>()?;
        if sweep_values.is_empty() {
            return Err(Error::Config("sweep_values is empty".into()));
        }
        if sweep_values.contains(&0) {
            return Err(Error::Config("sweep values must be positive".into()));
        }
        let replicas = get("n").map(|v| parse_int::<usize>("n", v)).transpose()?;
        let t_corr_base = get("t_corr_base")
            .map(|v| parse_int::<u64>("t_corr_base", v))
            .transpose()?;
        match sweep {
            SweepVariable::TCorrBase if replicas.is_none() => {
                return Err(Error::Config("sweeping t_corr_base needs n".into()))
            }
            SweepVariable::Replicas if t_corr_base.is_none() => {
                return Err(Error::Config("sweeping n needs t_corr_base".into()))
            }
            _ => {}
        }
        if replicas == Some(0) || t_corr_base == Some(0) {
            return Err(Error::Config("n and t_corr_base must be positive".into()));
        }

        let names = set_names(model, &sets);
        let t_corr_scale = match get("t_corr_scale") {
            Some(v) => parse_scales("t_corr_scale", v)?,
            None => default_scales(model, &sets),
        };
        let t_phase_scale = match get("t_phase_scale") {
            Some(v) => parse_scales("t_phase_scale", v)?,
            None => t_corr_scale.clone(),
        };
        for (key, scales) in [
            ("t_corr_scale", &t_corr_scale),
            ("t_phase_scale", &t_phase_scale),
        ] {
            for (n, _) in scales.iter() {
                if !names.contains(n) {
                    return Err(Error::Config(format!("{key}: unknown set {n:?}")));
                }
            }
            for n in &names {
                if !scales.iter().any(|(m, _)| m == n) {
                    return Err(Error::Config(format!("{key}: no factor for set {n:?}")));
                }
            }
        }

        let trials = get("trials")
            .map(|v| parse_int::<usize>("trials", v))
            .transpose()?
            .unwrap_or(20);
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let t_poll = get("t_poll")
            .map(|v| parse_int::<u64>("t_poll", v))
            .transpose()?
            .unwrap_or(1);
        let stop_t_sim = get("stop_t_sim")
            .map(|v| parse_int::<u64>("stop_t_sim", v))
            .transpose()?
            .unwrap_or(10_000_000);
        if t_poll == 0 || stop_t_sim == 0 {
            return Err(Error::Config(
                "t_poll and stop_t_sim must be positive".into(),
            ));
        }
        let seed = get("seed")
            .map(|v| parse_int::<u64>("seed", v))
            .transpose()?
            .unwrap_or(0);
        let dephasing = get("dephasing")
            .map(str::parse)
            .transpose()?
            .unwrap_or_default();
        let idealized = match get("idealized") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(Error::Config(format!(
                    "idealized: expected true or false, got {other:?}"
                )))
            }
        };
        let initial = get("initial")
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Config(format!("initial: bad coordinate {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let output = base_dir.join(get("output").unwrap_or("results.csv"));

        Ok(Self {
            model,
            matrix_file,
            sets,
            sweep,
            sweep_values,
            replicas,
            t_corr_base,
            t_corr_scale,
            t_phase_scale,
            t_poll,
            stop_t_sim,
            trials,
            seed,
            dephasing,
            idealized,
            initial,
            output,
        })
    }

    /// `(N, base)` for one sweep value.
    pub fn point(&self, value: u64) -> (usize, u64) {
        match self.sweep {
            SweepVariable::TCorrBase => (self.replicas.expect("validated"), value),
            SweepVariable::Replicas => (value as usize, self.t_corr_base.expect("validated")),
        }
    }

    /// `(T_corr, T_phase)` of a set at a given base.
    pub fn times(&self, set: &str, base: u64) -> (u64, u64) {
        let scale = |v: &[(String, f64)]| {
            let f = v.iter().find(|(n, _)| n == set).map_or(1.0, |(_, f)| *f);
            ((f * base as f64).round() as u64).max(1)
        };
        (scale(&self.t_corr_scale), scale(&self.t_phase_scale))
    }
}
