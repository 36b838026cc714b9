//! Command-line front end for `hetcycle`.

pub mod json;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use hetcycle::config::{apply_override, load_config, ConfigError};
use hetcycle::export::{write_events_csv, write_orbit_csv, write_trajectory_csv};
use hetcycle::hybrid::{crosscheck_closed_forms_with, integrate_hybrid, HybridError, HybridSettings, CROSSCHECK_HORIZON};
use hetcycle::model::validate_hypotheses_with;
use hetcycle::orbits::{assemble_cycle, CertificateSettings, CycleCertificate, HorizonOverrides, OrbitError, OrbitSample};
use hetcycle::{presets, verify, ModelError, SystemParams64, Vec3, VerifyError, VerifySettings};

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CERTIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hetcycle", version, about = "Certify heteroclinic cycles in two-zone piecewise-affine systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a parameter file; exit 0 if a cycle is certified, 2 if not, 1 on error.
    Check {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Build orbit certificates for certified cycles.
        #[arg(long)]
        certify: bool,
    },
    /// Run one of the built-in example systems with certificates.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        n: u8,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Integrate the switched system from one initial state.
    Simulate {
        config: PathBuf,
        /// Initial state `x1,x2,x3`.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        x0: Vec3<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        /// Override a parameter, `KEY=VALUE` (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Integrate the negated field.
        #[arg(long)]
        reversed: bool,
        /// Also compare the simulator with the closed-form flows on this many random states.
        #[arg(long, value_name = "TRIALS")]
        oracle: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `trajectory.csv` and `events.csv`.
        #[arg(long, default_value = ".")]
        csv_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Override a parameter, `KEY=VALUE` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Backward horizon for certificate segments.
    #[arg(long)]
    pub tback: Option<f64>,
    /// Forward horizon for certificate segments.
    #[arg(long)]
    pub tfwd: Option<f64>,
    /// Tolerance for equality conditions and closed interval ends.
    #[arg(long, default_value_t = hetcycle::model::DEFAULT_TOL)]
    pub tol: f64,
    /// Directory for orbit CSV files; none are written for `check` unless given.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// One CSV file per segment instead of a single file.
    #[arg(long)]
    pub split: bool,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    pub no_timing: bool,
}

fn parse_vec3(s: &str) -> Result<Vec3<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
    }
    Ok(Vec3(v))
}

/// Runs the command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Check { config, run, certify } => {
            let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "check".into());
            cmd_check(Source::File(config), &run, certify, &stem)
        }
        Command::Example { n, run } => {
            let run = RunArgs { csv_dir: run.csv_dir.clone().or_else(|| Some(PathBuf::from("."))), ..run };
            cmd_check(Source::Example(n), &run, true, &format!("example{n}"))
        }
        Command::Simulate { config, x0, t0, t1, overrides, reversed, oracle, seed, csv_dir, out } => {
            cmd_simulate(&config, x0, (t0, t1), &overrides, reversed, oracle, seed, &csv_dir, out.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

enum Source {
    File(PathBuf),
    Example(u8),
}

#[derive(Serialize)]
struct SegmentSummary {
    role: &'static str,
    side: &'static str,
    points: usize,
    t_start: f64,
    t_end: f64,
    containment_margin: f64,
    max_gap: f64,
}

fn summarize(s: &OrbitSample<f64>) -> SegmentSummary {
    SegmentSummary {
        role: s.role.as_str(),
        side: s.side.as_str(),
        points: s.points.len(),
        t_start: s.first().t,
        t_end: s.last().t,
        containment_margin: s.containment_margin,
        max_gap: s.max_gap(),
    }
}

fn certificate_value(c: &CycleCertificate<f64>) -> Result<Value> {
    Ok(json!({
        "label": c.label,
        "segments": c.segments.iter().map(summarize).collect::<Vec<_>>(),
        "endpoint_residuals": c.endpoint_residuals,
        "containment_ok": c.containment_ok,
        "horizons": c.horizons,
    }))
}

fn params_value(p: &SystemParams64) -> Value {
    let mut m = Map::new();
    for (k, v) in p.named_values() {
        m.insert(k.to_string(), json!(v));
    }
    Value::Object(m)
}

/// Error entry for the report: a class name, the message and, for configuration
/// errors, the offending key.
fn error_value(e: &anyhow::Error) -> Value {
    let (class, key) = if let Some(c) = e.downcast_ref::<ConfigError>() {
        ("config", c.key().map(str::to_string))
    } else if e.downcast_ref::<VerifyError>().is_some() {
        ("verify", None)
    } else if e.downcast_ref::<OrbitError>().is_some() {
        ("certificate", None)
    } else if e.downcast_ref::<ModelError>().is_some() {
        ("model", None)
    } else if e.downcast_ref::<HybridError>().is_some() {
        ("simulation", None)
    } else {
        ("io", None)
    };
    let mut m = Map::new();
    m.insert("class".into(), json!(class));
    m.insert("message".into(), json!(format!("{e:#}")));
    if let Some(k) = key {
        m.insert("key".into(), json!(k));
    }
    Value::Object(m)
}

fn emit(report: &Value, out: Option<&Path>) -> Result<()> {
    let text = json::to_string(report);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_params(source: &Source, overrides: &[String]) -> Result<SystemParams64> {
    let mut p = match source {
        Source::File(path) => load_config::<f64>(path)?,
        Source::Example(n) => presets::example::<f64>(*n).context("unknown example")?,
    };
    for o in overrides {
        apply_override(&mut p, o)?;
    }
    Ok(p)
}

fn cmd_check(source: Source, args: &RunArgs, certify: bool, stem: &str) -> Result<i32> {
    let mut report = Map::new();
    let mut timing = Map::new();
    let outcome = check_inner(&source, args, certify, stem, &mut report, &mut timing);
    if !args.no_timing {
        report.insert("timing_ms".into(), Value::Object(timing));
    }
    let code = match &outcome {
        Ok(true) => EXIT_CERTIFIED,
        Ok(false) => EXIT_NOT_CERTIFIED,
        Err(e) => {
            report.insert("error".into(), error_value(e));
            EXIT_ERROR
        }
    };
    emit(&Value::Object(report), args.out.as_deref())?;
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
    }
    Ok(code)
}

fn ms(since: Instant) -> Value {
    json!(since.elapsed().as_secs_f64() * 1e3)
}

fn check_inner(
    source: &Source,
    args: &RunArgs,
    certify: bool,
    stem: &str,
    report: &mut Map<String, Value>,
    timing: &mut Map<String, Value>,
) -> Result<bool> {
    let start = Instant::now();
    let params = load_params(source, &args.overrides)?;
    timing.insert("load".into(), ms(start));
    report.insert("params".into(), params_value(&params));
    if !(args.tol >= 0.0 && args.tol.is_finite()) {
        bail!("--tol must be a non-negative number");
    }

    let start = Instant::now();
    let hyp = validate_hypotheses_with(&params, args.tol);
    report.insert("hypotheses".into(), serde_json::to_value(hyp)?);
    let verdict = verify(&params, &VerifySettings { tol: args.tol })?;
    timing.insert("verify".into(), ms(start));
    report.insert("verdict".into(), serde_json::to_value(&verdict)?);

    if certify {
        let start = Instant::now();
        let settings = CertificateSettings {
            horizons: HorizonOverrides { t_back: args.tback, t_fwd: args.tfwd },
            ..CertificateSettings::default()
        };
        let certs = assemble_cycle(&params, &verdict, &settings)?;
        timing.insert("certify".into(), ms(start));
        let values = certs.iter().map(certificate_value).collect::<Result<Vec<_>>>()?;
        report.insert("certificates".into(), Value::Array(values));
        if let Some(dir) = &args.csv_dir {
            let files = write_certificate_csvs(dir, stem, &certs, args.split)?;
            report.insert("csv_files".into(), json!(files));
        }
    }
    Ok(verdict.certified())
}

/// The shared `Γ₁` segments are written once.
fn certificate_segments(certs: &[CycleCertificate<f64>]) -> Vec<(String, &OrbitSample<f64>)> {
    let mut out = Vec::new();
    for (i, c) in certs.iter().enumerate() {
        for s in &c.segments {
            let shared = matches!(s.role, hetcycle::orbits::Role::Gamma1Back | hetcycle::orbits::Role::Gamma1Fwd);
            if shared && i > 0 {
                continue;
            }
            let tag = if shared { String::new() } else { format!("_{}", file_label(&c.label)) };
            out.push((format!("{}{tag}", s.role.as_str()), s));
        }
    }
    out
}

fn file_label(label: &str) -> String {
    label.replace('+', "plus").replace('-', "minus")
}

fn write_certificate_csvs(dir: &Path, stem: &str, certs: &[CycleCertificate<f64>], split: bool) -> Result<Vec<String>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let segments = certificate_segments(certs);
    let mut files = Vec::new();
    if split {
        for (name, seg) in &segments {
            let path = dir.join(format!("{stem}_{name}.csv"));
            write_orbit_csv(create(&path)?, std::slice::from_ref(*seg))?;
            files.push(path.display().to_string());
        }
    } else {
        let path = dir.join(format!("{stem}_orbits.csv"));
        let all: Vec<OrbitSample<f64>> = segments.iter().map(|(_, s)| (*s).clone()).collect();
        write_orbit_csv(create(&path)?, &all)?;
        files.push(path.display().to_string());
    }
    Ok(files)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config: &Path,
    x0: Vec3<f64>,
    t_span: (f64, f64),
    overrides: &[String],
    reversed: bool,
    oracle: Option<usize>,
    seed: u64,
    csv_dir: &Path,
    out: Option<&Path>,
) -> Result<i32> {
    let params = load_params(&Source::File(config.to_path_buf()), overrides)?;
    let settings = HybridSettings { reversed, ..HybridSettings::default() };
    let traj = integrate_hybrid(&params, x0, t_span, &settings)?;

    fs::create_dir_all(csv_dir).with_context(|| format!("creating {}", csv_dir.display()))?;
    let traj_path = csv_dir.join("trajectory.csv");
    let events_path = csv_dir.join("events.csv");
    write_trajectory_csv(create(&traj_path)?, &traj)?;
    write_events_csv(create(&events_path)?, &traj.events)?;

    let last = traj.last().expect("trajectory has its initial sample");
    let mut report = Map::new();
    report.insert("params".into(), params_value(&params));
    report.insert("x0".into(), json!(x0));
    report.insert("t_span".into(), json!([t_span.0, t_span.1]));
    report.insert("samples".into(), json!(traj.samples.len()));
    report.insert("events".into(), json!(traj.events.len()));
    report.insert("final".into(), json!({"t": last.t, "x": last.x, "side": last.side}));
    report.insert(
        "cycle_residual".into(),
        json!(hetcycle::orbits::distance_to_cycle(&params, last.x)),
    );
    report.insert("csv_files".into(), json!([traj_path.display().to_string(), events_path.display().to_string()]));
    if let Some(trials) = oracle {
        let r = crosscheck_closed_forms_with(&params, trials, seed, CROSSCHECK_HORIZON, &HybridSettings::default())?;
        report.insert(
            "oracle".into(),
            json!({"trials": trials, "seed": seed, "horizon": r.horizon, "max_error": r.max_error}),
        );
    }
    emit(&Value::Object(report), out)?;
    Ok(EXIT_CERTIFIED)
}
