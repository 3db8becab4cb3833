//! Versioned JSON report envelope and artifact writing.
//!
//! Every report has the shape
//!
//! ```json
//! {
//!   "schema": "besov-lab/report/v1",
//!   "command": "sweep",
//!   "version": "0.1.0",
//!   "timestamp_unix": 1760000000,
//!   "status": "pass",
//!   "provenance": { "grid": {..}, "seed": 2024, "exponents": {..}, "tolerances": {..}, "config": ".." },
//!   "flags": [],
//!   "checks": [ { "name": "..", "value": 1.2, "bound": 3.0, "pass": true } ],
//!   "result": { .. }
//! }
//! ```
//!
//! `timestamp_unix` is the only field that differs between runs of the
//! same config. Non-finite numbers are written as `null`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::besov::REMAINDER_WARNING;
use crate::config::{Config, Exponents};
use crate::dyadic::k_max;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field};
use crate::solvers::SINGULAR_PENCIL;
use crate::symbols::DERIVATIVE_CONSISTENCY;

pub const SCHEMA: &str = "besov-lab/report/v1";

/// Slack allowed on `sup ‖σ_{1λ}‖ ≤ 1 + M̂`.
pub const SIGMA1_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One numerical bound and whether it held.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// `value ≤ bound`, failing on NaN.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dim: usize,
    pub half_width: f64,
    pub samples: usize,
    pub spacing: f64,
    pub freq_spacing: f64,
    pub max_freq: f64,
    pub k_max: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub singular_pencil: f64,
    pub remainder_warning: f64,
    pub derivative_consistency: f64,
    pub sigma1_slack: f64,
    pub decade_factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub grid: GridInfo,
    pub seed: u64,
    pub probe_count: usize,
    pub exponents: Exponents,
    pub tolerances: Tolerances,
    /// Canonical config text; parsing it reproduces the run.
    pub config: String,
}

impl Provenance {
    pub fn from_config(c: &Config) -> Result<Self> {
        let g = c.grid()?;
        Ok(Self {
            grid: GridInfo {
                dim: g.dim(),
                half_width: g.half_width(),
                samples: g.samples(),
                spacing: g.spacing(),
                freq_spacing: g.freq_spacing(),
                max_freq: g.max_freq(),
                k_max: k_max(&g),
            },
            seed: c.sweep.seed,
            probe_count: c.probes().count(),
            exponents: c.besov.exponents()?,
            tolerances: Tolerances {
                singular_pencil: SINGULAR_PENCIL,
                remainder_warning: REMAINDER_WARNING,
                derivative_consistency: DERIVATIVE_CONSISTENCY,
                sigma1_slack: SIGMA1_SLACK,
                decade_factor: c.sweep.decade_factor,
            },
            config: c.to_string(),
        })
    }
}

/// Result of one subcommand before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub checks: Vec<Check>,
    pub flags: Vec<String>,
    pub result: Value,
    /// Extra files: `(name, contents)`.
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(command: &str, result: Value) -> Self {
        Self {
            command: command.into(),
            checks: Vec::new(),
            flags: Vec::new(),
            result,
            artifacts: Vec::new(),
        }
    }

    pub fn status(&self) -> Status {
        if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    command: &'a str,
    version: &'static str,
    timestamp_unix: u64,
    status: Status,
    provenance: &'a Provenance,
    flags: &'a [String],
    checks: &'a [Check],
    result: &'a Value,
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Data(format!("serialization failed: {e}")))
}

/// Pretty JSON text of the report with the given timestamp.
pub fn render(outcome: &Outcome, prov: &Provenance, timestamp_unix: u64) -> Result<String> {
    let env = Envelope {
        schema: SCHEMA,
        command: &outcome.command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix,
        status: outcome.status(),
        provenance: prov,
        flags: &outcome.flags,
        checks: &outcome.checks,
        result: &outcome.result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes `<command>.json` and the artifacts into `dir`; returns the paths.
pub fn write_outcome(dir: &Path, outcome: &Outcome, prov: &Provenance) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let main = dir.join(format!("{}.json", outcome.command));
    std::fs::write(&main, render(outcome, prov, now_unix())?)?;
    paths.push(main);
    for (name, text) in &outcome.artifacts {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Serializable snapshot of a [`Field`] in the physical domain.
#[derive(Debug, Clone, Serialize)]
pub struct FieldDump {
    pub dim: usize,
    pub half_width: f64,
    pub samples: usize,
    pub components: usize,
    /// Node-major `[re, im]` pairs: entry `node * components + c`.
    pub values: Vec<[f64; 2]>,
}

impl FieldDump {
    pub fn new(f: &Field) -> Result<Self> {
        let f = if f.domain() == Domain::Physical { f.clone() } else { f.to_physical()? };
        let g = f.grid();
        Ok(Self {
            dim: g.dim(),
            half_width: g.half_width(),
            samples: g.samples(),
            components: f.components(),
            values: f.values().iter().map(|z| [z.re, z.im]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn status_follows_checks() {
        let mut o = Outcome::new("x", json!({}));
        assert_eq!(o.exit_code(), 0);
        o.checks.push(Check::at_most("a", 1.0, 2.0));
        assert_eq!(o.status(), Status::Pass);
        o.checks.push(Check::at_most("b", f64::NAN, 2.0));
        assert_eq!(o.exit_code(), 1);
    }

    #[test]
    fn render_is_deterministic_apart_from_timestamp() {
        let c = Config::default();
        let prov = Provenance::from_config(&c).unwrap();
        let o = Outcome::new("norm", json!({"value": 1.5}));
        let a = render(&o, &prov, 1).unwrap();
        let b = render(&o, &prov, 1).unwrap();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["provenance"]["grid"]["samples"], 512);
        assert_eq!(v["provenance"]["seed"], 2024);
        assert_ne!(a, render(&o, &prov, 2).unwrap());
    }
}
