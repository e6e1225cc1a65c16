//! Session config loading. Parse errors carry the JSON path of the field.

use miniscope_core::ScopeConfig;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

pub fn parse_config(text: &str) -> Result<ScopeConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScopeConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        ConfigError::Field { field, reason: e.into_inner().to_string() }
    })?;
    cfg.validate().map_err(|e| match e {
        miniscope_core::scope::ScopeError::Config { field, reason } => ConfigError::Field { field, reason },
        other => ConfigError::Field { field: ".".into(), reason: other.to_string() },
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path, allow_unsafe_adc_n: bool) -> Result<ScopeConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::Field { field: ".".into(), reason: e.to_string() })?;
    if allow_unsafe_adc_n {
        if let Some(obj) = value.as_object_mut() {
            obj.insert("allow_unsafe_adc_n".into(), true.into());
        }
    }
    parse_config(&value.to_string())
}
