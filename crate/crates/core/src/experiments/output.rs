//! Result files: long-format CSV (`n,rep,metric,value`) and a JSON manifest.
//!
//! Per-replication rows carry the replication index; aggregates use `*`.
//! Values print with Rust's shortest round-trip formatting, so files are
//! byte-identical across runs with the same configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::records::{ConvergenceRecord, ExtremeRecord, ExtremeStats, MomentRecord, MomentStats, RatePoint, RhoStats};
use super::sanity::SanityCheck;
use super::ExperimentConfig;
use crate::error::Result;

pub const CSV_HEADER: &str = "n,rep,metric,value";

/// Version of this build, `v<semver>` plus the git revision when known.
pub fn version_string() -> String {
    match option_env!("HULLSHAPE_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("v{}-g{rev}", env!("CARGO_PKG_VERSION")),
        _ => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Default, Clone)]
pub struct CsvTable {
    body: String,
}

impl CsvTable {
    pub fn new() -> Self {
        Self {
            body: format!("{CSV_HEADER}\n"),
        }
    }

    pub fn rep(&mut self, n: u64, rep: usize, metric: &str, value: f64) {
        let _ = writeln!(self.body, "{n},{rep},{metric},{value}");
    }

    pub fn agg(&mut self, n: u64, metric: &str, value: f64) {
        let _ = writeln!(self.body, "{n},*,{metric},{value}");
    }

    pub fn as_str(&self) -> &str {
        &self.body
    }

    pub fn into_string(self) -> String {
        self.body
    }
}

fn rho_rows(t: &mut CsvTable, n: u64, s: &RhoStats, suffix: &str) {
    for (rep, v) in s.rho.iter().enumerate() {
        t.rep(n, rep, &format!("rho{suffix}"), *v);
    }
    t.agg(n, &format!("grid_points{suffix}"), s.grid_points as f64);
    t.agg(n, &format!("rho_mean{suffix}"), s.mean);
    t.agg(n, &format!("rho_se{suffix}"), s.se);
    t.agg(n, &format!("rate{suffix}"), s.rate);
    t.agg(n, &format!("mean_support{suffix}"), s.mean_support);
}

pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut t = CsvTable::new();
    for r in records {
        rho_rows(&mut t, r.n, &r.coarse, "");
        if let Some(f) = &r.fine {
            rho_rows(&mut t, r.n, f, "_fine");
        }
        t.agg(r.n, "directions", r.directions as f64);
        t.agg(r.n, "mesh_error", r.mesh_error);
        if let Some(g) = r.resolution_gap {
            t.agg(r.n, "resolution_gap", g);
        }
    }
    t.into_string()
}

pub fn rate_csv(points: &[RatePoint]) -> String {
    let mut t = CsvTable::new();
    for p in points {
        t.agg(p.n, "rate", p.rate);
        t.agg(p.n, "rate_se", p.se);
    }
    t.into_string()
}

fn moment_rows(t: &mut CsvTable, n: u64, s: &MomentStats, suffix: &str) {
    for (rep, v) in s.values.iter().enumerate() {
        t.rep(n, rep, &format!("value{suffix}"), *v);
    }
    t.agg(n, &format!("grid_points{suffix}"), s.grid_points as f64);
    t.agg(n, &format!("estimate{suffix}"), s.estimate);
    t.agg(n, &format!("se{suffix}"), s.se);
}

pub fn moments_csv(records: &[MomentRecord]) -> String {
    let mut t = CsvTable::new();
    for r in records {
        moment_rows(&mut t, r.n, &r.coarse, "");
        if let Some(f) = &r.fine {
            moment_rows(&mut t, r.n, f, "_fine");
        }
        t.agg(r.n, "degree", r.degree as f64);
        t.agg(r.n, "power", r.power as f64);
        t.agg(r.n, "target", r.target);
        t.agg(r.n, "ratio", r.ratio);
        t.agg(r.n, "ratio_se", r.ratio_se);
        t.agg(r.n, "relative_gap", r.relative_gap);
        if let Some(g) = r.resolution_gap {
            t.agg(r.n, "resolution_gap", g);
        }
    }
    t.into_string()
}

fn extreme_rows(t: &mut CsvTable, n: u64, s: &ExtremeStats, suffix: &str) {
    for (rep, v) in s.z.iter().enumerate() {
        t.rep(n, rep, &format!("z{suffix}"), *v);
    }
    t.agg(n, &format!("grid_points{suffix}"), s.grid_points as f64);
    t.agg(n, &format!("z_mean{suffix}"), s.mean);
    t.agg(n, &format!("z_se{suffix}"), s.se);
    for (i, k) in super::records::MOMENT_ORDERS.iter().enumerate() {
        t.agg(n, &format!("moment_{k}{suffix}"), s.moments[i]);
        t.agg(n, &format!("moment_{k}_se{suffix}"), s.moment_se[i]);
    }
}

pub fn extremes_csv(records: &[ExtremeRecord]) -> String {
    let mut t = CsvTable::new();
    for r in records {
        extreme_rows(&mut t, r.n, &r.coarse, "");
        if let Some(f) = &r.fine {
            extreme_rows(&mut t, r.n, f, "_fine");
        }
        t.agg(r.n, "target", r.target);
        if let Some(o) = &r.oracle {
            t.agg(r.n, "oracle_mean", o.mean);
            t.agg(r.n, "oracle_sd", o.sd);
            t.agg(r.n, "oracle_moment_2", o.second);
            t.agg(r.n, "oracle_moment_4", o.fourth);
        }
        if let Some(g) = r.resolution_gap {
            t.agg(r.n, "resolution_gap", g);
        }
    }
    t.into_string()
}

/// Everything needed to rerun an experiment, plus what it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command line of the run, program name first.
    pub invocation: Vec<String>,
    pub config: ExperimentConfig,
    /// Subcommand-specific parameters (functional, power, direction, ...).
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub sanity: Vec<SanityCheck>,
    pub passed: bool,
    /// Non-fatal findings, e.g. `k` and `2k` results more than 1% apart.
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, parameters: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: version_string(),
            command: command.to_string(),
            invocation: Vec::new(),
            config: config.clone(),
            parameters,
            seed: config.seed,
            wall_time_seconds: 0.0,
            sanity: Vec::new(),
            passed: true,
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }
}

/// Writes `files` (name, contents) and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, files: &[(String, String)], manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        manifest.files.push(name.clone());
        written.push(path);
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
