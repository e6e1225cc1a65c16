//! Core of a deterministic virtual oscilloscope modeled on the NUC-140 scope
//! firmware: signal sources and analog front end, the 8-channel SAR ADC with
//! its ISR copy race, the trigger state machine, and the LCD framebuffer.

pub mod acquisition;
pub mod batch;
pub mod display;
pub mod font;
pub mod scope;
pub mod signal;
pub mod trigger;

pub use acquisition::{quantize, AdcTimingConfig, Capture, IsrTimingConfig, Tick};
pub use display::{CalRange, FrameBuffer, VScale};
pub use scope::{Command, KeyEvent, Scope, ScopeConfig, SysState};
pub use trigger::{CollectState, TriggerMode};
