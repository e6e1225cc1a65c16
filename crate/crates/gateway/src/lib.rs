//! Headless runner, artifact export and live WebSocket service for the
//! miniscope core.

pub mod config;
pub mod csv;
pub mod headless;
pub mod script;
pub mod server;
pub mod session;
pub mod wire;
