//! Script replay against a fresh instrument, with CSV and PBM artifacts.

use crate::config::{load_config, ConfigError};
use crate::csv::{export_csv, CsvCapture};
use crate::script::{parse_script, Action, Record, ScriptError};
use miniscope_core::{Scope, ScopeConfig, Tick};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Ticks simulated when neither a script nor `--ticks` bounds the run.
pub const DEFAULT_TICKS: Tick = 1 << 21;

#[derive(Debug, Error)]
pub enum HeadlessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("{0}")]
    Instrument(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub ticks: Option<Tick>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub tick: Tick,
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

#[derive(Debug)]
pub struct SessionRun {
    pub scope: Scope,
    pub snapshots: Vec<Artifact>,
    pub csvs: Vec<Artifact>,
}

impl SessionRun {
    /// PBM of the final framebuffer.
    pub fn final_pbm(&self) -> Vec<u8> {
        self.scope.framebuffer().to_pbm()
    }

    /// CSV of the last completed acquisition.
    pub fn final_csv(&self) -> Result<Vec<u8>, HeadlessError> {
        let cap = CsvCapture::from_sys(self.scope.sys()).map_err(|e| HeadlessError::Instrument(e.to_string()))?;
        Ok(export_csv(&cap))
    }
}

/// Replay `records`, then run on to `ticks` if that is later.
pub fn run_session(config: &ScopeConfig, records: &[Record], ticks: Option<Tick>) -> Result<SessionRun, HeadlessError> {
    let mut scope = Scope::new(config).map_err(|e| HeadlessError::Instrument(e.to_string()))?;
    let mut snapshots = Vec::new();
    let mut csvs = Vec::new();
    for rec in records {
        scope.tick(rec.at_tick - scope.now());
        if let Some(cmd) = rec.action.command() {
            scope.push(cmd);
            continue;
        }
        match &rec.action {
            Action::Snapshot { path } => snapshots.push(Artifact {
                tick: scope.now(),
                path: path.clone(),
                bytes: scope.framebuffer().to_pbm(),
            }),
            Action::ExportCsv { path } => {
                let cap = CsvCapture::from_sys(scope.sys())
                    .map_err(|e| ScriptError { line: rec.line, reason: e.to_string() })?;
                csvs.push(Artifact { tick: scope.now(), path: path.clone(), bytes: export_csv(&cap) });
            }
            _ => unreachable!("commands handled above"),
        }
    }
    let end = match (ticks, records.last()) {
        (Some(t), _) => t,
        (None, Some(last)) => last.at_tick,
        (None, None) => DEFAULT_TICKS,
    };
    if end > scope.now() {
        scope.tick(end - scope.now());
    }
    Ok(SessionRun { scope, snapshots, csvs })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HeadlessError> {
    std::fs::write(path, bytes).map_err(|source| HeadlessError::Io { path: path.display().to_string(), source })
}

/// Load, replay and write artifacts. Snapshot and CSV actions without a
/// path, and the final state, go to the `outputs` paths.
pub fn run_headless(
    config_path: Option<&Path>,
    script_path: Option<&Path>,
    allow_unsafe_adc_n: bool,
    outputs: &Outputs,
) -> Result<SessionRun, HeadlessError> {
    let config = match config_path {
        Some(p) => load_config(p, allow_unsafe_adc_n)?,
        None => ScopeConfig { allow_unsafe_adc_n, ..ScopeConfig::default() },
    };
    let records = match script_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|source| HeadlessError::Io { path: p.display().to_string(), source })?;
            parse_script(&text)?
        }
        None => Vec::new(),
    };
    let run = run_session(&config, &records, outputs.ticks)?;
    for (artifacts, fallback) in [(&run.snapshots, &outputs.snapshot), (&run.csvs, &outputs.csv)] {
        for a in artifacts.iter() {
            if let Some(p) = a.path.as_ref().or(fallback.as_ref()) {
                write(p, &a.bytes)?;
            }
        }
    }
    if let Some(p) = &outputs.snapshot {
        if run.snapshots.iter().all(|a| a.path.is_some()) {
            write(p, &run.final_pbm())?;
        }
    }
    if let Some(p) = &outputs.csv {
        if run.csvs.iter().all(|a| a.path.is_some()) {
            write(p, &run.final_csv()?)?;
        }
    }
    Ok(run)
}
