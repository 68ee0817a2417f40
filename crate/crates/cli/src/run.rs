//! Run orchestration: ensemble members, diagnostics CSVs, snapshots,
//! checkpoints, restarts and the run manifest.
//!
//! Layout of an output directory:
//!
//! ```text
//! config.json                      canonical configuration (hashed in the manifest)
//! diagnostics_m0000.csv            one diagnostics series per member
//! summary.json                     ensemble mean and standard error of the final row
//! snapshots/m0000/step00000000/    raw float64 fields + JSON sidecars
//! checkpoints/step00000100/        checkpoint.json + m0000/ states
//! manifest.json                    written last; lists every other file
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sabi_core::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use sabi_core::ensemble::{run_members, summarize, Summary};
use sabi_core::noise::WienerDriver;
use sabi_core::{Error, Grid, Real, Result};

use crate::config::{to_canonical_json, Precision, RunConfig};
use crate::error::{CliError, CliResult};
use crate::system::{build_system, initial_state, MemberState, MemberSystem};

pub const OUTPUT_ROOT_ENV: &str = "SABI_OUTPUT_ROOT";
pub const CHECKPOINT_SCHEMA: &str = "sabi.checkpoint/1";
pub const MANIFEST_SCHEMA: &str = "sabi.manifest/1";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Resolves the output directory; a relative directory is placed under
/// `$SABI_OUTPUT_ROOT` when that is set.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    let dir = &cfg.output.directory;
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() && !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.clone(),
    }
}

pub fn diagnostics_file(member: usize) -> String {
    format!("diagnostics_m{member:04}.csv")
}

fn member_dir(member: usize) -> String {
    format!("m{member:04}")
}

fn step_dir(step: u64) -> String {
    format!("step{step:08}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub schema: String,
    pub step: u64,
    pub time: f64,
    pub members: usize,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberEntry {
    pub index: usize,
    /// Wiener increments are keyed by `(seed, member, step)`.
    pub seed: u64,
    pub member: u64,
    pub diagnostics: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub model: String,
    pub precision: Precision,
    pub config: String,
    pub config_sha256: String,
    pub steps: u64,
    pub dt: f64,
    pub members: Vec<MemberEntry>,
    pub summary: String,
    /// Every file in the output directory except the manifest, relative and sorted.
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub columns: Vec<String>,
    #[serde(flatten)]
    pub summary: Summary,
}

/// What a finished run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub steps: u64,
    pub finals: Vec<DiagnosticsRecord>,
    pub summary: Summary,
}

/// Removes artefacts a previous run left in `out`, leaving other files alone.
fn clear_previous(out: &Path) -> std::io::Result<()> {
    for sub in ["snapshots", "checkpoints"] {
        let p = out.join(sub);
        if p.is_dir() {
            fs::remove_dir_all(p)?;
        }
    }
    for entry in fs::read_dir(out)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let owned = matches!(name.as_str(), "config.json" | "summary.json" | "manifest.json")
            || (name.starts_with("diagnostics_m") && name.ends_with(".csv"));
        if owned && entry.file_type()?.is_file() {
            fs::remove_file(entry.path())?;
        }
    }
    Ok(())
}

/// Runs a finalized configuration from its initial state.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let out = output_dir(cfg);
    fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("output.directory: {}: {e}", out.display())))?;
    clear_previous(&out)
        .map_err(|e| CliError::Config(format!("output.directory: {}: {e}", out.display())))?;
    fs::write(out.join("config.json"), to_canonical_json(cfg))
        .map_err(|e| CliError::Config(format!("output.directory: {}: {e}", out.display())))?;
    dispatch(cfg, &out, None)
}

/// Continues a run from a checkpoint directory inside its output directory.
/// The result is bit-identical to the uninterrupted run.
pub fn resume(checkpoint: &Path) -> CliResult<RunOutcome> {
    let text = fs::read_to_string(checkpoint.join(CHECKPOINT_FILE))
        .map_err(|e| CliError::Config(format!("{}: {e}", checkpoint.display())))?;
    let cp: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", checkpoint.display())))?;
    if cp.schema != CHECKPOINT_SCHEMA {
        return Err(CliError::Config(format!("unsupported checkpoint schema {:?}", cp.schema)));
    }
    let cfg = cp.config.clone().finalize()?;
    if cfg != cp.config || cp.members != cfg.ensemble.members {
        return Err(CliError::Config("checkpoint configuration is inconsistent".into()));
    }
    for m in 0..cp.members {
        if !checkpoint.join(member_dir(m)).is_dir() {
            return Err(CliError::Config(format!(
                "checkpoint is missing the state of member {m}"
            )));
        }
    }
    let out = checkpoint
        .parent()
        .and_then(Path::parent)
        .ok_or_else(|| CliError::Config("checkpoint is not inside an output directory".into()))?;
    dispatch(&cfg, out, Some((checkpoint, cp.step)))
}

fn dispatch(cfg: &RunConfig, out: &Path, from: Option<(&Path, u64)>) -> CliResult<RunOutcome> {
    match cfg.precision {
        Precision::F64 => execute::<f64>(cfg, out, from),
        Precision::F32 => execute::<f32>(cfg, out, from),
    }
}

fn member_error(e: Error) -> CliError {
    match &e {
        Error::Member { source, .. } if matches!(**source, Error::Io(_) | Error::Json(_)) => {
            CliError::Io(e.to_string())
        }
        _ => CliError::from(e),
    }
}

fn execute<T: Real>(cfg: &RunConfig, out: &Path, from: Option<(&Path, u64)>) -> CliResult<RunOutcome> {
    let grid = Grid::<T>::new(cfg.grid)?;
    let sys = build_system(cfg, grid)?;
    let finals = run_members(cfg.ensemble.members, |m| run_member(cfg, &sys, out, m, from))
        .map_err(member_error)?;
    let values: Vec<Vec<f64>> = finals.iter().map(DiagnosticsRecord::values).collect();
    let summary = summarize(&values)?;
    let es = EnsembleSummary {
        columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
        summary: summary.clone(),
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&es)? + "\n")?;
    write_manifest(cfg, out)?;
    Ok(RunOutcome {
        output: out.to_path_buf(),
        steps: cfg.steps(),
        finals,
        summary,
    })
}

/// Keeps the header and every row up to and including `step`.
fn truncate_csv(path: &Path, step: u64) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is empty", path.display())))?;
    let mut kept = String::from(header);
    kept.push('\n');
    for line in lines {
        match DiagnosticsRecord::from_csv_row(line) {
            Ok(r) if r.step <= step => {
                kept.push_str(line);
                kept.push('\n');
            }
            _ => break,
        }
    }
    fs::write(path, kept)?;
    Ok(())
}

fn write_row(w: &mut impl Write, r: &DiagnosticsRecord) -> Result<()> {
    writeln!(w, "{}", r.to_csv_row())?;
    Ok(())
}

fn run_member<T: Real>(
    cfg: &RunConfig,
    sys: &MemberSystem<T>,
    out: &Path,
    m: usize,
    from: Option<(&Path, u64)>,
) -> Result<DiagnosticsRecord> {
    let icfg = cfg.integrator_config();
    let steps = icfg.steps();
    let dt = icfg.dt;
    let seed = cfg.ensemble.seed;
    let driver = WienerDriver::new(seed, m as u64, sys.noise_modes());
    let csv_path = out.join(diagnostics_file(m));
    let snap_dir = |n: u64| out.join("snapshots").join(member_dir(m)).join(step_dir(n));
    let (mut x, first, mut csv, mut last) = match from {
        None => {
            let x = initial_state(cfg, sys.grid())?;
            let mut csv = BufWriter::new(File::create(&csv_path)?);
            writeln!(csv, "{}", DiagnosticsRecord::csv_header(0))?;
            let r = sys.record(cfg.model, &x, 0, 0.0)?;
            write_row(&mut csv, &r)?;
            sys.write_state(&snap_dir(0), &x, 0.0, 0, seed)?;
            (x, 0, csv, r)
        }
        Some((dir, step)) => {
            let x = sys.read_state(&dir.join(member_dir(m)))?;
            truncate_csv(&csv_path, step)?;
            let csv = BufWriter::new(OpenOptions::new().append(true).open(&csv_path)?);
            let r = sys.record(cfg.model, &x, step, step as f64 * dt)?;
            (x, step, csv, r)
        }
    };
    for step in first..steps {
        let dw: Vec<T> = if sys.noise_modes() > 0 {
            driver.increments(step, dt)
        } else {
            Vec::new()
        };
        x = sys.step(&icfg, &x, step, &dw)?;
        let n = step + 1;
        let time = n as f64 * dt;
        let is_last = n == steps;
        if n % cfg.output.diagnostics_interval == 0 || is_last {
            last = sys.record(cfg.model, &x, n, time)?;
            write_row(&mut csv, &last)?;
        }
        let snap = cfg.output.snapshot_interval;
        if (snap > 0 && n % snap == 0) || is_last {
            sys.write_state(&snap_dir(n), &x, time, n, seed)?;
        }
        let every = cfg.checkpoint_interval;
        if every > 0 && n % every == 0 {
            csv.flush()?;
            write_checkpoint(cfg, sys, out, m, &x, n, time)?;
        }
    }
    csv.flush()?;
    Ok(last)
}

fn write_checkpoint<T: Real>(
    cfg: &RunConfig,
    sys: &MemberSystem<T>,
    out: &Path,
    m: usize,
    x: &MemberState<T>,
    step: u64,
    time: f64,
) -> Result<()> {
    let dir = out.join("checkpoints").join(step_dir(step));
    sys.write_state(&dir.join(member_dir(m)), x, time, step, cfg.ensemble.seed)?;
    let cp = Checkpoint {
        schema: CHECKPOINT_SCHEMA.into(),
        step,
        time,
        members: cfg.ensemble.members,
        config: cfg.clone(),
    };
    // every member writes the same content; the rename keeps the file whole
    let tmp = dir.join(format!("{CHECKPOINT_FILE}.{}.tmp", member_dir(m)));
    fs::write(&tmp, serde_json::to_string_pretty(&cp)? + "\n")?;
    fs::rename(&tmp, dir.join(CHECKPOINT_FILE))?;
    Ok(())
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("inside root");
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_manifest(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let config_text = fs::read(out.join("config.json"))?;
    let mut files = Vec::new();
    collect_files(out, out, &mut files)?;
    files.retain(|f| f != "manifest.json");
    files.sort();
    let icfg = cfg.integrator_config();
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model: cfg.model.to_string(),
        precision: cfg.precision,
        config: "config.json".into(),
        config_sha256: sha256_hex(&config_text),
        steps: icfg.steps(),
        dt: icfg.dt,
        members: (0..cfg.ensemble.members)
            .map(|m| MemberEntry {
                index: m,
                seed: cfg.ensemble.seed,
                member: m as u64,
                diagnostics: diagnostics_file(m),
            })
            .collect(),
        summary: "summary.json".into(),
        files,
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
