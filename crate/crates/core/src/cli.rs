//! Command-line front end.
//!
//! Settings come from an optional `--config` file of `key = value` lines
//! (keys are the long flag names without dashes; `#` starts a comment) and
//! from flags, which take precedence. `HULLSHAPE_THREADS` stands in for
//! `--threads` when the flag is absent.
//!
//! Exit status: 0 on success, 1 on numerical/model errors or failed sanity
//! checks, 2 on usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::acceptance::{self, SuiteOptions};
use crate::error::{Error, Result};
use crate::experiments::{self, output, ExperimentConfig, Manifest, SanityCheck};
use crate::geometry::io::{polygon_to_csv, profile_to_csv};
use crate::geometry::{hausdorff, DirectionGrid, Functional};
use crate::limit::{limit_shape, LimitShape};
use crate::models::{CovarianceModel, ModelSpec, TimeGrid};
use crate::rng::{cell_stream_id, SeedSpec};

#[derive(Debug, Parser)]
#[command(name = "hullshape", version, about = "Convex hulls of Gaussian process samples and their limit shapes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample hulls for each n (first replication) and write their profiles.
    Simulate(CommonArgs),
    /// Write the support profile of the limit shape.
    LimitShape(LimitArgs),
    /// Hausdorff distance of the normalized hull to the limit shape.
    Converge(CommonArgs),
    /// Moments of perimeter, area or diameter of the normalized hull.
    Moments(MomentArgs),
    /// Normalized directional maxima and their moments.
    Extremes(ExtremeArgs),
    /// Rate diagnostic sqrt(ln n) * mean rho_n.
    Rate(RateArgs),
    /// Run the fixed acceptance suite and print a pass/fail table.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Settings file of `key = value` lines; flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// bm | fbm:H=<h> | fbb:H=<h> | singleton:var=<v>
    #[arg(long)]
    pub model: Option<String>,
    /// Dimension d of the process.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Time-grid size k (points j/k, j = 1..=k).
    #[arg(long, value_name = "K")]
    pub grid_points: Option<usize>,
    /// Strictly increasing sample counts, comma separated.
    #[arg(long, value_name = "N,N,...")]
    pub n_schedule: Option<String>,
    /// Replications per n (default 32 up to 10^4, 8 beyond).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Direction-grid size q.
    #[arg(long, value_name = "Q")]
    pub dirs: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also sample on the 2k grid and report both resolutions.
    #[arg(long)]
    pub two_res: bool,
    /// Worker threads, 0 = one per core.
    #[arg(long, env = "HULLSHAPE_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LimitArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// bm | fbm:H=<h> | fbb:H=<h> | singleton:var=<v>
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Time-grid size k for models without a closed form.
    #[arg(long, value_name = "K")]
    pub grid_points: Option<usize>,
    #[arg(long, value_name = "Q")]
    pub dirs: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// perimeter | area | diameter
    #[arg(long)]
    pub functional: Option<String>,
    /// Power m' of the functional.
    #[arg(long)]
    pub power: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtremeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Unit direction, comma separated (default: first coordinate axis).
    #[arg(long, value_name = "X,Y,...", allow_hyphen_values = true)]
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Measure against the centred ball of this radius instead of the limit shape.
    #[arg(long, value_name = "R")]
    pub reference_ball: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "HULLSHAPE_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Error that decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
    Sanity(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) | Failure::Sanity(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "error: {e}"),
            Failure::Sanity(m) => write!(f, "sanity check failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Settings = BTreeMap<String, String>;

thread_local! {
    static INVOCATION: std::cell::RefCell<Vec<String>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Parses a `key = value` settings file.
pub fn parse_config(text: &str, allowed: &[&str]) -> Result<Settings> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn merge(config: Option<&Path>, flags: Vec<(&str, Option<String>)>) -> std::result::Result<Settings, Failure> {
    let allowed: Vec<&str> = flags.iter().map(|(k, _)| *k).collect();
    let mut s = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text, &allowed).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => Settings::new(),
    };
    for (k, v) in flags {
        if let Some(v) = v {
            s.insert(k.to_string(), v);
        }
    }
    Ok(s)
}

fn get<T: std::str::FromStr>(s: &Settings, key: &str) -> std::result::Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.get(key)
        .map(|v| v.parse::<T>().map_err(|e| Failure::Usage(format!("{key} = `{v}`: {e}"))))
        .transpose()
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|x| {
            let x = x.trim().replace('_', "");
            x.parse::<T>()
                .or_else(|e| {
                    // Allow scientific notation such as 1e4 for counts.
                    x.parse::<f64>()
                        .ok()
                        .filter(|f| f.fract() == 0.0)
                        .and_then(|f| format!("{f:.0}").parse::<T>().ok())
                        .ok_or(e)
                })
                .map_err(|e| Failure::Usage(format!("{key}: `{x}`: {e}")))
        })
        .collect()
}

fn common_flags(a: &CommonArgs) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("model", a.model.clone()),
        ("dim", a.dim.map(|v| v.to_string())),
        ("grid-points", a.grid_points.map(|v| v.to_string())),
        ("n-schedule", a.n_schedule.clone()),
        ("reps", a.reps.map(|v| v.to_string())),
        ("dirs", a.dirs.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
        ("two-res", a.two_res.then(|| "true".to_string())),
        ("threads", a.threads.map(|v| v.to_string())),
        ("out", a.out.as_ref().map(|p| p.display().to_string())),
    ]
}

fn experiment_config(s: &Settings) -> std::result::Result<ExperimentConfig, Failure> {
    let d = ExperimentConfig::default();
    let model = match s.get("model") {
        Some(m) => m.parse::<ModelSpec>().map_err(|e| Failure::Usage(e.to_string()))?,
        None => d.model,
    };
    let cfg = ExperimentConfig {
        model,
        dim: get(s, "dim")?.unwrap_or(d.dim),
        grid_points: get(s, "grid-points")?.unwrap_or(d.grid_points),
        n_schedule: match s.get("n-schedule") {
            Some(v) => parse_list("n-schedule", v)?,
            None => d.n_schedule,
        },
        replications: get(s, "reps")?,
        directions: get(s, "dirs")?.unwrap_or(d.directions),
        seed: get(s, "seed")?.unwrap_or(d.seed),
        two_resolution: get(s, "two-res")?.unwrap_or(d.two_resolution),
        threads: get(s, "threads")?.unwrap_or(d.threads),
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn out_dir(s: &Settings, command: &str) -> PathBuf {
    s.get("out")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results").join(command))
}

/// Writes files and manifest, prints the file list and returns the status.
fn finish(
    dir: &Path,
    files: Vec<(String, String)>,
    mut manifest: Manifest,
    start: Instant,
) -> std::result::Result<(), Failure> {
    manifest.invocation = INVOCATION.with(|a| a.borrow().clone());
    manifest.passed = experiments::all_passed(&manifest.sanity);
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    let written = output::write_outputs(dir, &files, &mut manifest)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    match manifest.sanity.iter().find(|c| !c.passed) {
        Some(c) => Err(Failure::Sanity(format!("{}: {}", c.name, c.detail))),
        None => Ok(()),
    }
}

fn divergence_warnings(gaps: impl Iterator<Item = (u64, Option<f64>)>) -> Vec<String> {
    gaps.filter_map(|(n, g)| g.filter(|g| *g > experiments::RESOLUTION_TOLERANCE).map(|g| (n, g)))
        .map(|(n, g)| format!("n={n}: k and 2k results differ by {:.2}%", 100.0 * g))
        .collect()
}

fn cmd_simulate(a: &CommonArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let s = merge(a.config.as_deref(), common_flags(a))?;
    let cfg = experiment_config(&s)?;
    let model = CovarianceModel::new(cfg.model, cfg.dim)?;
    let dirs = Arc::new(DirectionGrid::for_dim(cfg.dim, cfg.directions)?);
    let limit = limit_shape(&model, &TimeGrid::uniform(cfg.grid_points)?, &dirs)?;
    let mut table = output::CsvTable::new();
    let mut files = Vec::new();
    let mut sanity_fail = Vec::new();
    for (i, &n) in cfg.n_schedule.iter().enumerate() {
        let run = experiments::run_hull(&model, cfg.grid_points, n, SeedSpec::new(cfg.seed, cell_stream_id(0, i as u32)), &dirs)?;
        let rho = hausdorff(&run.scaled.profile, &limit.profile)?.distance;
        table.rep(n, 0, "rho", rho);
        table.rep(n, 0, "max_support", run.scaled.profile.max_value());
        table.rep(n, 0, "min_support", run.scaled.profile.min_value());
        if !(rho.is_finite() && rho >= 0.0) {
            sanity_fail.push(format!("n={n}: rho = {rho}"));
        }
        files.push((format!("hull_n{n}_profile.csv"), profile_to_csv(&run.scaled.profile)));
        if let Some(poly) = &run.scaled.polygon {
            for f in [Functional::Perimeter, Functional::Area, Functional::Diameter] {
                table.rep(n, 0, f.name(), f.eval(poly));
            }
            files.push((format!("hull_n{n}_polygon.csv"), polygon_to_csv(poly)));
        }
    }
    files.insert(0, ("simulate.csv".into(), table.into_string()));
    let mut manifest = Manifest::new("simulate", &cfg, json!({ "replication": 0 }));
    manifest.sanity.push(SanityCheck {
        name: "rho finite and nonnegative".into(),
        passed: sanity_fail.is_empty(),
        detail: sanity_fail.first().cloned().unwrap_or_else(|| format!("{} checked", cfg.n_schedule.len())),
    });
    finish(&out_dir(&s, "simulate"), files, manifest, start)
}

fn cmd_limit_shape(a: &LimitArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let s = merge(
        a.config.as_deref(),
        vec![
            ("model", a.model.clone()),
            ("dim", a.dim.map(|v| v.to_string())),
            ("grid-points", a.grid_points.map(|v| v.to_string())),
            ("dirs", a.dirs.map(|v| v.to_string())),
            ("out", a.out.as_ref().map(|p| p.display().to_string())),
        ],
    )?;
    let cfg = experiment_config(&s)?;
    let model = CovarianceModel::new(cfg.model, cfg.dim)?;
    let dirs = Arc::new(DirectionGrid::for_dim(cfg.dim, cfg.directions)?);
    let shape = limit_shape(&model, &TimeGrid::uniform(cfg.grid_points)?, &dirs)?;
    let meta = limit_metadata(&shape, &cfg);
    let ok = shape.profile.values().iter().all(|v| v.is_finite() && *v >= 0.0);
    let mut manifest = Manifest::new("limit-shape", &cfg, meta.clone());
    manifest.sanity.push(SanityCheck {
        name: "support values finite and nonnegative".into(),
        passed: ok,
        detail: format!("{} directions", dirs.len()),
    });
    println!(
        "{}: {} support in [{}, {}]",
        cfg.model,
        serde_json::to_value(shape.provenance).unwrap_or_default(),
        shape.profile.min_value(),
        shape.profile.max_value()
    );
    let files = vec![
        ("limit_shape.csv".into(), profile_to_csv(&shape.profile)),
        ("limit_shape.json".into(), serde_json::to_string_pretty(&meta).map_err(Error::from)? + "\n"),
    ];
    finish(&out_dir(&s, "limit-shape"), files, manifest, start)
}

fn limit_metadata(shape: &LimitShape, cfg: &ExperimentConfig) -> serde_json::Value {
    let grid = shape.profile.grid();
    json!({
        "model": cfg.model.to_string(),
        "dim": cfg.dim,
        "time_points": cfg.grid_points,
        "directions": grid.len(),
        "direction_layout": grid.layout(),
        "covering_radius": grid.covering_radius(),
        "provenance": shape.provenance,
        "min_support": shape.profile.min_value(),
        "max_support": shape.profile.max_value(),
    })
}

fn print_convergence(records: &[experiments::ConvergenceRecord]) {
    println!("{:>10} {:>10} {:>10} {:>12}", "n", "mean rho", "se", "sqrt(ln n)rho");
    for r in records {
        println!("{:>10} {:>10.5} {:>10.5} {:>12.5}", r.n, r.coarse.mean, r.coarse.se, r.coarse.rate);
    }
}

fn cmd_converge(a: &CommonArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let s = merge(a.config.as_deref(), common_flags(a))?;
    let cfg = experiment_config(&s)?;
    let sim = experiments::simulate(&cfg, None)?;
    let records = experiments::convergence_records(&sim);
    print_convergence(&records);
    let mut manifest = Manifest::new("converge", &cfg, json!({}));
    manifest.sanity = experiments::simulation_checks(&sim);
    manifest.warnings = divergence_warnings(records.iter().map(|r| (r.n, r.resolution_gap)));
    let files = vec![("convergence.csv".into(), output::convergence_csv(&records))];
    finish(&out_dir(&s, "converge"), files, manifest, start)
}

fn cmd_moments(a: &MomentArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let mut flags = common_flags(&a.common);
    flags.push(("functional", a.functional.clone()));
    flags.push(("power", a.power.map(|v| v.to_string())));
    let s = merge(a.common.config.as_deref(), flags)?;
    let cfg = experiment_config(&s)?;
    let functional: Functional = get(&s, "functional")?.unwrap_or(Functional::Perimeter);
    let power: u32 = get(&s, "power")?.unwrap_or(1);
    if power == 0 {
        return Err(Failure::Usage("power must be at least 1".into()));
    }
    if cfg.dim != 2 && !(cfg.dim == 1 && functional == Functional::Diameter) {
        return Err(Failure::Usage(format!("{functional} needs --dim 2")));
    }
    let sim = experiments::simulate(&cfg, None)?;
    let records = experiments::moment_records(&sim, functional, power)?;
    println!("{:>10} {:>12} {:>10} {:>10} {:>10}", "n", "estimate", "se", "target", "ratio");
    for r in &records {
        println!(
            "{:>10} {:>12.5} {:>10.5} {:>10.5} {:>10.5}",
            r.n, r.coarse.estimate, r.coarse.se, r.target, r.ratio
        );
    }
    let mut manifest = Manifest::new("moments", &cfg, json!({ "functional": functional, "power": power }));
    manifest.sanity = experiments::simulation_checks(&sim);
    manifest.warnings = divergence_warnings(records.iter().map(|r| (r.n, r.resolution_gap)));
    let files = vec![(format!("moments_{functional}.csv"), output::moments_csv(&records))];
    finish(&out_dir(&s, "moments"), files, manifest, start)
}

fn cmd_extremes(a: &ExtremeArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let mut flags = common_flags(&a.common);
    flags.push(("theta", a.theta.clone()));
    let s = merge(a.common.config.as_deref(), flags)?;
    let cfg = experiment_config(&s)?;
    let theta: Vec<f64> = match s.get("theta") {
        Some(v) => parse_list("theta", v)?,
        None => (0..cfg.dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
    };
    if theta.len() != cfg.dim {
        return Err(Failure::Usage(format!("theta has {} entries, dim is {}", theta.len(), cfg.dim)));
    }
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Failure::Usage(format!("theta has norm {norm}, expected 1")));
    }
    let rows = experiments::simulate_extremes(&cfg, &theta)?;
    let model = CovarianceModel::new(cfg.model, cfg.dim)?;
    let target = crate::limit::sigma(&model, &TimeGrid::uniform(cfg.grid_points)?, &theta)?;
    let records = experiments::extreme_records(&rows, &theta, target, crate::oracle::SupLaw::for_model(&model));
    println!("{:>10} {:>10} {:>10} {:>10} {:>12}", "n", "mean Z", "se", "E Z^4", "oracle mean");
    for r in &records {
        let oracle = r.oracle.map(|o| format!("{:.5}", o.mean)).unwrap_or_else(|| "-".into());
        println!(
            "{:>10} {:>10.5} {:>10.5} {:>10.5} {:>12}",
            r.n, r.coarse.mean, r.coarse.se, r.coarse.moments[2], oracle
        );
    }
    let mut manifest = Manifest::new("extremes", &cfg, json!({ "theta": theta }));
    manifest.sanity = experiments::extreme_checks(&rows);
    manifest.warnings = divergence_warnings(records.iter().map(|r| (r.n, r.resolution_gap)));
    let files = vec![("extremes.csv".into(), output::extremes_csv(&records))];
    finish(&out_dir(&s, "extremes"), files, manifest, start)
}

fn cmd_rate(a: &RateArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let mut flags = common_flags(&a.common);
    flags.push(("reference-ball", a.reference_ball.map(|v| v.to_string())));
    let s = merge(a.common.config.as_deref(), flags)?;
    let cfg = experiment_config(&s)?;
    let ball: Option<f64> = get(&s, "reference-ball")?;
    let reference = match ball {
        Some(r) if r > 0.0 && r.is_finite() => {
            Some(LimitShape::ball(Arc::new(DirectionGrid::for_dim(cfg.dim, cfg.directions)?), r))
        }
        Some(r) => return Err(Failure::Usage(format!("reference-ball radius {r} must be positive"))),
        None => None,
    };
    let sim = experiments::simulate(&cfg, reference.as_ref())?;
    let records = experiments::convergence_records(&sim);
    let series = experiments::rate_series(&records);
    print_convergence(&records);
    let mut manifest = Manifest::new("rate", &cfg, json!({ "reference_ball": ball }));
    manifest.sanity = experiments::simulation_checks(&sim);
    manifest.warnings = divergence_warnings(records.iter().map(|r| (r.n, r.resolution_gap)));
    let files = vec![
        ("rate.csv".into(), output::rate_csv(&series)),
        ("convergence.csv".into(), output::convergence_csv(&records)),
    ];
    finish(&out_dir(&s, "rate"), files, manifest, start)
}

fn cmd_repro(a: &ReproArgs) -> std::result::Result<(), Failure> {
    let opts = SuiteOptions {
        seed: a.seed.unwrap_or(acceptance::SEED),
        threads: a.threads.unwrap_or(0),
    };
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("results").join("repro"));
    let results = acceptance::run_suite(&opts, Some(&dir), |r| println!("{}", acceptance::format_line(r)))?;
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{}/{} criteria passed; results in {}", results.len() - failed, results.len(), dir.display());
    if failed > 0 {
        return Err(Failure::Sanity(format!("{failed} acceptance criteria failed")));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::LimitShape(a) => cmd_limit_shape(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Extremes(a) => cmd_extremes(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Repro(a) => cmd_repro(a),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    INVOCATION.with(|a| *a.borrow_mut() = args.iter().map(|s| s.to_string_lossy().into_owned()).collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let s = parse_config("# comment\nmodel = fbb:H=0.5\n\nn_schedule = 10, 100  # trailing\n", &["model", "n-schedule"])
            .unwrap();
        assert_eq!(s["model"], "fbb:H=0.5");
        assert_eq!(s["n-schedule"], "10, 100");
        assert!(parse_config("bogus = 1", &["model"]).is_err());
        assert!(parse_config("model fbb", &["model"]).is_err());
    }

    #[test]
    fn schedule_accepts_scientific_notation() {
        let v: Vec<u64> = parse_list("n-schedule", "1e2, 1000,1e4").unwrap();
        assert_eq!(v, vec![100, 1000, 10_000]);
        assert!(parse_list::<u64>("n-schedule", "1.5e0").is_err());
        assert!(parse_list::<u64>("n-schedule", "abc").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("hullshape-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.txt");
        std::fs::write(&path, "dim = 3\nseed = 7\n").unwrap();
        let s = merge(Some(&path), vec![("dim", Some("2".into())), ("seed", None)]).unwrap();
        assert_eq!(s["dim"], "2");
        assert_eq!(s["seed"], "7");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["hullshape", "converge", "--bogus"]), 2);
        assert_eq!(run(["hullshape", "converge", "--n-schedule", "100,10", "--out", "/nonexistent"]), 2);
        assert_eq!(run(["hullshape", "converge", "--model", "fbm:H=1.5"]), 2);
        assert_eq!(run(["hullshape", "nope"]), 2);
    }
}
