//! WebSocket wire protocol: JSON text messages `{"kind": ..., "payload": ...}`.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use miniscope_core::display::{FrameBuffer, LCD_TOTAL_DATA};
use miniscope_core::scope::Command;
use miniscope_core::signal::{FrontEndConfig, Jumper, ProbeInput};
use miniscope_core::{KeyEvent, Scope};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Snapshot,
    KeyPress,
    ConfigPatch,
    ArmSingle,
    CalStart,
    Ack,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub kind: Kind,
    #[serde(default)]
    pub payload: Value,
}

impl WireMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }

    pub fn ack(command: Kind, queued_tick: u64) -> Self {
        Self { kind: Kind::Ack, payload: serde_json::json!({ "command": command, "tick": queued_tick }) }
    }

    pub fn error(reason: impl Into<String>) -> Self {
        Self { kind: Kind::Error, payload: serde_json::json!({ "reason": reason.into() }) }
    }

    pub fn snapshot(s: &SnapshotPayload) -> Self {
        Self { kind: Kind::Snapshot, payload: serde_json::to_value(s).expect("snapshot serializes") }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPayload {
    /// Base64 of the 1056-byte page-major framebuffer.
    pub framebuffer: String,
    pub leds: [bool; 4],
    pub status_text: String,
    pub collect_state: String,
    pub tick: u64,
}

impl SnapshotPayload {
    pub fn of(scope: &Scope) -> Self {
        Self {
            framebuffer: BASE64.encode(scope.framebuffer().serialize()),
            leds: scope.leds().leds,
            status_text: scope.sys().status_line(),
            collect_state: format!("{:?}", scope.sys().collect_state),
            tick: scope.now(),
        }
    }

    pub fn framebuffer_bytes(&self) -> Result<Vec<u8>, String> {
        let bytes = BASE64.decode(&self.framebuffer).map_err(|e| e.to_string())?;
        if bytes.len() != LCD_TOTAL_DATA {
            return Err(format!("framebuffer: expected {LCD_TOTAL_DATA} bytes, got {}", bytes.len()));
        }
        Ok(bytes)
    }

    pub fn decode_framebuffer(&self) -> Result<FrameBuffer, String> {
        FrameBuffer::deserialize(&self.framebuffer_bytes()?).map_err(|e| e.to_string())
    }

    /// Whether two snapshots show the same thing, ignoring the clock.
    pub fn same_view(&self, other: &Self) -> bool {
        (&self.framebuffer, self.leds, &self.status_text, &self.collect_state)
            == (&other.framebuffer, other.leds, &other.status_text, &other.collect_state)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigPatch {
    pub jumpers: Option<[Jumper; 8]>,
    pub sources: Option<[Option<ProbeInput>; 2]>,
    pub front_end: Option<FrontEndConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClientCommand {
    KeyPress(KeyEvent),
    ConfigPatch(Box<ConfigPatch>),
    ArmSingle,
    CalStart(usize),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyPayload {
    key: KeyEvent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbePayload {
    probe: usize,
}

impl ClientCommand {
    pub fn kind(&self) -> Kind {
        match self {
            Self::KeyPress(_) => Kind::KeyPress,
            Self::ConfigPatch(_) => Kind::ConfigPatch,
            Self::ArmSingle => Kind::ArmSingle,
            Self::CalStart(_) => Kind::CalStart,
        }
    }

    /// Instrument commands, in the order they are queued.
    pub fn commands(&self) -> Vec<Command> {
        match self {
            Self::KeyPress(k) => vec![Command::Key(*k)],
            Self::ArmSingle => vec![Command::ArmSingle],
            Self::CalStart(p) => vec![Command::Key(if *p == 0 { KeyEvent::K7 } else { KeyEvent::K9 })],
            Self::ConfigPatch(patch) => {
                let mut out = Vec::new();
                if let Some(fe) = &patch.front_end {
                    out.push(Command::SetFrontEnd(fe.clone()));
                }
                if let Some(jumpers) = patch.jumpers {
                    out.push(Command::SetJumpers { jumpers });
                }
                for (probe, src) in patch.sources.iter().flatten().enumerate() {
                    if let Some(input) = src {
                        out.push(Command::SetSignal { probe, input: input.clone() });
                    }
                }
                out
            }
        }
    }

    pub fn to_message(&self) -> WireMessage {
        let payload = match self {
            Self::KeyPress(k) => serde_json::json!({ "key": k }),
            Self::ArmSingle => serde_json::json!({}),
            Self::CalStart(p) => serde_json::json!({ "probe": p }),
            Self::ConfigPatch(_) => unimplemented!("patches are only parsed"),
        };
        WireMessage { kind: self.kind(), payload }
    }
}

fn payload<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T, String> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            format!("payload: {inner}")
        } else {
            format!("payload.{path}: {inner}")
        }
    })
}

/// Parse a client message; the error string is the reason sent back.
pub fn parse_client(text: &str) -> Result<ClientCommand, String> {
    let raw: Value = serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
    let obj = raw.as_object().ok_or("malformed message: expected an object")?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or("malformed message: missing kind")?;
    let body = obj.get("payload").cloned().unwrap_or(Value::Null);
    let body_or_empty = if body.is_null() { serde_json::json!({}) } else { body.clone() };
    match kind {
        "KeyPress" => Ok(ClientCommand::KeyPress(payload::<KeyPayload>(body)?.key)),
        "ConfigPatch" => {
            let patch: ConfigPatch = payload(body_or_empty)?;
            if let Some(fe) = &patch.front_end {
                fe.validate().map_err(|e| format!("payload.front_end: {e}"))?;
            }
            Ok(ClientCommand::ConfigPatch(Box::new(patch)))
        }
        "ArmSingle" => Ok(ClientCommand::ArmSingle),
        "CalStart" => {
            let p = payload::<ProbePayload>(body)?.probe;
            if p > 1 {
                return Err(format!("payload.probe: {p} outside 0..=1"));
            }
            Ok(ClientCommand::CalStart(p))
        }
        "Snapshot" | "Ack" | "Error" => Err(format!("{kind} is server-to-client only")),
        _ => Err("unknown kind".into()),
    }
}
