//! JSON-lines session scripts: one `{"at_tick": n, "action": ..., ...}`
//! record per line, in non-decreasing `at_tick` order.

use miniscope_core::scope::Command;
use miniscope_core::signal::{Jumper, ProbeInput, SignalSpec};
use miniscope_core::{KeyEvent, Tick};
use serde::Deserialize;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    KeyPress { key: KeyEvent },
    ConnectProbeToCal { probe: usize },
    SetJumpers { jumpers: [Jumper; 8] },
    ArmSingle,
    SetSignal { probe: usize, signal: SignalSpec },
    /// PBM of the framebuffer; without a path it goes to the `--snapshot` output.
    Snapshot {
        #[serde(default)]
        path: Option<PathBuf>,
    },
    ExportCsv {
        #[serde(default)]
        path: Option<PathBuf>,
    },
}

impl Action {
    /// The instrument command this action queues, if any.
    pub fn command(&self) -> Option<Command> {
        Some(match self {
            Action::KeyPress { key } => Command::Key(*key),
            Action::ConnectProbeToCal { probe } => Command::ConnectProbeToCal { probe: *probe },
            Action::SetJumpers { jumpers } => Command::SetJumpers { jumpers: *jumpers },
            Action::ArmSingle => Command::ArmSingle,
            Action::SetSignal { probe, signal } => {
                Command::SetSignal { probe: *probe, input: ProbeInput::Signal(signal.clone()) }
            }
            Action::Snapshot { .. } | Action::ExportCsv { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub line: usize,
    pub at_tick: Tick,
    pub action: Action,
}

#[derive(Debug, Error, PartialEq)]
#[error("script line {line}: {reason}")]
pub struct ScriptError {
    pub line: usize,
    pub reason: String,
}

fn parse_record(line: usize, text: &str) -> Result<Record, ScriptError> {
    let err = |reason: String| ScriptError { line, reason };
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| err("record must be an object".into()))?;
    let at_tick = obj
        .remove("at_tick")
        .ok_or_else(|| err("missing field `at_tick`".into()))?
        .as_u64()
        .ok_or_else(|| err("at_tick: expected a non-negative integer".into()))?;
    let name = match obj.remove("action") {
        Some(serde_json::Value::String(s)) => s,
        Some(_) => return Err(err("action: expected a string".into())),
        None => return Err(err("missing field `action`".into())),
    };
    // Externally tagged, so error paths reach into the action's fields. A
    // bare name is the unit form (`arm_single`).
    let bare = obj.is_empty().then(|| serde_json::Value::String(name.clone()));
    let unit = bare.and_then(|b| serde_json::from_value::<Action>(b).ok());
    let tagged = serde_json::json!({ name: value });
    let action: Action = match unit {
        Some(a) => Ok(a),
        None => serde_path_to_error::deserialize(tagged),
    }
    .map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = path.split_once('.').map(|(_, f)| f).filter(|f| !f.is_empty());
        err(match field {
            Some(f) => format!("{f}: {inner}"),
            None => inner.to_string(),
        })
    })?;
    match &action {
        Action::ConnectProbeToCal { probe } | Action::SetSignal { probe, .. } if *probe > 1 => {
            return Err(err(format!("probe: {probe} outside 0..=1")));
        }
        Action::SetSignal { signal, .. } => signal.validate().map_err(|e| err(format!("signal.{e}")))?,
        _ => {}
    }
    Ok(Record { line, at_tick, action })
}

/// Parse and validate a whole script before anything runs.
pub fn parse_script(text: &str) -> Result<Vec<Record>, ScriptError> {
    let mut records: Vec<Record> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec = parse_record(line, raw)?;
        if let Some(prev) = records.last() {
            if rec.at_tick < prev.at_tick {
                return Err(ScriptError {
                    line,
                    reason: format!("at_tick {} is before the previous record's {}", rec.at_tick, prev.at_tick),
                });
            }
        }
        records.push(rec);
    }
    Ok(records)
}
