//! `polariton`: runs configured scenarios and parameter sweeps, writing CSV
//! and JSON results next to a manifest.

mod config;
mod report;
mod scenarios;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use config::{ScenarioConfig, SweepSpec};
use report::{
    clear_previous, file_entry, print_failure, write_manifest, Failure, FileEntry, Manifest, Sink, Status, Summary,
};

#[derive(Parser)]
#[command(name = "polariton", version, about = "Two-photon bound states of Rydberg polaritons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario.
    Run(Common),
    /// Run a scenario over a parameter grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set params.xi=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; for sweeps this caps concurrently running points.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(Value, PathBuf), Failure> {
        let mut value = config::load(self.config.as_deref())?;
        for s in &self.sets {
            config::apply_set(&mut value, s)?;
        }
        config::materialize_params(&mut value);
        let map = value.as_object_mut().expect("config root is an object");
        let from_config = map.remove("output_dir");
        let out = match (&self.out, from_config) {
            (Some(p), _) => p.clone(),
            (None, Some(Value::String(p))) => PathBuf::from(p),
            (None, Some(_)) => return Err(Failure::config("output_dir must be a string")),
            (None, None) => return Err(Failure::config("no output directory: pass --out or set output_dir")),
        };
        Ok((value, out))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, sweep) = match &cli.command {
        Command::Run(c) => (c, false),
        Command::Sweep(c) => (c, true),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            print_failure(&Failure::config("--threads must be at least 1"));
            return ExitCode::from(report::EXIT_CONFIG as u8);
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = common.resolve().and_then(|(value, out)| if sweep { run_sweep(value, &out) } else { run_single(value, &out) });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            print_failure(&f);
            ExitCode::from(f.exit_code as u8)
        }
    }
}

fn run_single(value: Value, out: &Path) -> Result<(), Failure> {
    if value.get("sweep").is_some() {
        return Err(Failure::config("`sweep` block given to `run`; use the sweep command"));
    }
    let manifest = run_point(value, out, false);
    match manifest.error {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

/// Runs one scenario into `dir`. Never panics; the outcome is in the
/// returned manifest, which is also on disk.
fn run_point(value: Value, dir: &Path, inject_failure: bool) -> Manifest {
    let scenario = value.get("scenario").and_then(Value::as_str).unwrap_or("").to_string();
    let mut manifest = Manifest::new(scenario, value.clone());
    if let Err(e) = std::fs::create_dir_all(dir) {
        manifest.status = Status::Failed;
        manifest.error = Some(Failure::config(format!("{}: {e}", dir.display())));
        return manifest;
    }
    clear_previous(dir);
    if let Err(f) = write_manifest(dir, &manifest) {
        manifest.status = Status::Failed;
        manifest.error = Some(f);
        return manifest;
    }
    let mut sink = Sink::new(dir);
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        if inject_failure {
            return Err(Failure::numerical("injected failure"));
        }
        execute(&value, &mut sink)
    }))
        .unwrap_or_else(|panic| Err(Failure::numerical(format!("internal panic: {}", panic_text(&panic)))));
    let mut files = Vec::new();
    for f in &sink.files {
        match file_entry(dir, f) {
            Ok(e) => files.push(e),
            Err(e) => manifest.error = Some(e),
        }
    }
    manifest.files = files;
    match outcome {
        Ok(summary) => {
            manifest.bunching_metric = summary.get("bunching_metric").copied();
            manifest.summary = summary;
        }
        Err(f) => manifest.error = Some(f),
    }
    manifest.status = if manifest.error.is_some() { Status::Failed } else { Status::Ok };
    if let Err(f) = write_manifest(dir, &manifest) {
        manifest.status = Status::Failed;
        manifest.error.get_or_insert(f);
    }
    manifest
}

fn execute(value: &Value, sink: &mut Sink) -> Result<Summary, Failure> {
    let cfg = ScenarioConfig::from_value(value)?;
    let ctx = scenarios::Context::new(cfg.params()?, cfg.numerics.clone())?;
    sink.json("derived_scales.json", &scenarios::derived_record(&ctx))?;
    scenarios::run(cfg.scenario, &ctx, sink)
}

fn panic_text(panic: &Box<dyn std::any::Any + Send>) -> String {
    panic
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Debug, Serialize)]
struct PointRecord {
    index: usize,
    dir: String,
    values: Vec<(String, Value)>,
    status: Status,
    summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<Failure>,
}

#[derive(Debug, Serialize)]
struct SweepManifest {
    tool: &'static str,
    version: &'static str,
    scenario: String,
    config_sha256: String,
    config: Value,
    axes: Vec<(String, Vec<Value>)>,
    max_points: usize,
    status: Status,
    succeeded: usize,
    failed: usize,
    points: Vec<PointRecord>,
    files: Vec<FileEntry>,
}

/// Grid points in row-major order: the last axis varies fastest.
fn grid_points(axes: &[(String, Vec<Value>)]) -> Vec<Vec<Value>> {
    let mut points = vec![Vec::new()];
    for (_, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| values.iter().map(move |v| {
                let mut q = p.clone();
                q.push(v.clone());
                q
            }))
            .collect();
    }
    points
}

fn run_sweep(value: Value, out: &Path) -> Result<(), Failure> {
    let cfg = ScenarioConfig::from_value(&value)?;
    let spec: SweepSpec = cfg.sweep.clone().ok_or_else(|| Failure::config("sweep needs a `sweep` block"))?;
    let axes: Vec<(String, Vec<Value>)> = spec.axes.into_iter().collect();
    if axes.is_empty() || axes.iter().any(|(_, v)| v.is_empty()) {
        return Err(Failure::config("sweep axes must be non-empty"));
    }
    if let Some((name, _)) = axes.iter().find(|(_, v)| v.iter().any(|x| !x.is_number())) {
        return Err(Failure::config(format!("sweep axis `{name}` must hold numbers")));
    }
    let total = axes.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len())).unwrap_or(usize::MAX);
    if total > spec.max_points {
        return Err(Failure::config(format!("sweep has {total} points, above the cap of {}", spec.max_points)));
    }
    let mut base = value.clone();
    base.as_object_mut().expect("object").remove("sweep");
    let mut point_configs = Vec::with_capacity(total);
    for values in grid_points(&axes) {
        let mut v = base.clone();
        for ((name, _), x) in axes.iter().zip(&values) {
            config::set_path(&mut v, &config::axis_path(name), x.clone())?;
        }
        point_configs.push((values, v));
    }

    std::fs::create_dir_all(out).map_err(|e| Failure::config(format!("{}: {e}", out.display())))?;
    clear_previous(out);
    let mut manifest = SweepManifest {
        tool: "polariton",
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.to_string(),
        config_sha256: report::config_hash(&value),
        config: value,
        axes: axes.clone(),
        max_points: spec.max_points,
        status: Status::Running,
        succeeded: 0,
        failed: 0,
        points: Vec::new(),
        files: Vec::new(),
    };
    write_manifest(out, &manifest)?;

    let results: Vec<Manifest> = point_configs
        .par_iter()
        .enumerate()
        .map(|(k, (_, v))| run_point(v.clone(), &out.join(point_dir(k)), spec.fail_points.contains(&k)))
        .collect();

    let summary_keys: std::collections::BTreeSet<&String> = results.iter().flat_map(|m| m.summary.keys()).collect();
    let mut headers = vec!["point".to_string()];
    headers.extend(axes.iter().map(|(n, _)| n.clone()));
    headers.push("ok".into());
    headers.extend(summary_keys.iter().map(|k| k.to_string()));
    let mut table = polariton_core::io::Table::new(headers);
    for (k, ((values, _), m)) in point_configs.iter().zip(&results).enumerate() {
        let mut row = vec![k as f64];
        row.extend(values.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)));
        row.push(if m.status == Status::Ok { 1.0 } else { 0.0 });
        row.extend(summary_keys.iter().map(|key| m.summary.get(*key).copied().unwrap_or(f64::NAN)));
        table.push(row);
    }
    table.write_csv(&out.join("sweep.csv"))?;

    let mut files = vec![file_entry(out, "sweep.csv")?];
    let mut worst: Option<Failure> = None;
    for (k, ((values, _), m)) in point_configs.iter().zip(results).enumerate() {
        let dir = point_dir(k);
        if file_entry(out, &format!("{dir}/manifest.json")).map(|e| files.push(e)).is_err() {
            // Directory could not be created; nothing to list.
        }
        files.extend(m.files.iter().map(|f| FileEntry { path: format!("{dir}/{}", f.path), ..f.clone() }));
        if let Some(f) = &m.error {
            if worst.as_ref().is_none_or(|w| f.exit_code > w.exit_code) {
                worst = Some(f.clone());
            }
        }
        manifest.points.push(PointRecord {
            index: k,
            dir,
            values: axes.iter().map(|(n, _)| n.clone()).zip(values.iter().cloned()).collect(),
            status: m.status,
            summary: m.summary,
            error: m.error,
        });
    }
    manifest.failed = manifest.points.iter().filter(|p| p.status != Status::Ok).count();
    manifest.succeeded = manifest.points.len() - manifest.failed;
    manifest.files = files;
    manifest.status = if manifest.failed == 0 { Status::Ok } else { Status::Failed };
    write_manifest(out, &manifest)?;
    match worst {
        None => Ok(()),
        Some(w) => Err(Failure {
            message: format!("{} of {} sweep points failed; first worst: {}", manifest.failed, total, w.message),
            ..w
        }),
    }
}

fn point_dir(k: usize) -> String {
    format!("point_{k:03}")
}
