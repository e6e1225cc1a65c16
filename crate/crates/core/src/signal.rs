//! Test-signal sources and the analog path from a probe tip to each ADC pin.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Logic-high rail of the board, also the ADC reference.
pub const RAIL_VOLTS: f64 = 3.3;

/// Cycle positions this close to 1.0 are folded back to 0.0 so that an edge
/// landing on an exact tick is not lost to rounding in `t * f`.
const CYCLE_SNAP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("{field}: frequency must be finite and > 0 (got {value})")]
    Frequency { field: &'static str, value: f64 },
    #[error("{field}: duty must lie strictly between 0 and 1 (got {value})")]
    Duty { field: &'static str, value: f64 },
    #[error("table: breakpoints must be non-empty with strictly increasing times")]
    Table,
    #[error("time_constant: must be finite and > 0 (got {0})")]
    TimeConstant(f64),
    #[error("{field}: must be finite and >= 0 (got {value})")]
    Impedance { field: &'static str, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Square,
    Sine,
    /// Steady-state response of an RC low-pass driven by a 0/`amplitude` square.
    RcDecay,
    /// Constant level equal to `offset`.
    Dc,
    /// Piecewise-linear through `(seconds, volts)` breakpoints, held flat outside them.
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub frequency: f64,
    /// Peak for sine, high level above `offset` for square and RC.
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    pub duty: f64,
    /// RC only; defaults to a fifth of the period.
    pub time_constant: Option<f64>,
    pub table: Vec<(f64, f64)>,
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self {
            kind: SignalKind::Dc,
            frequency: 1000.0,
            amplitude: 0.0,
            offset: 0.0,
            phase: 0.0,
            duty: 0.5,
            time_constant: None,
            table: Vec::new(),
        }
    }
}

impl SignalSpec {
    pub fn dc(volts: f64) -> Self {
        Self { kind: SignalKind::Dc, offset: volts, ..Self::default() }
    }

    pub fn square(frequency: f64, high: f64, duty: f64) -> Self {
        Self { kind: SignalKind::Square, frequency, amplitude: high, duty, ..Self::default() }
    }

    pub fn sine(frequency: f64, amplitude: f64, offset: f64) -> Self {
        Self { kind: SignalKind::Sine, frequency, amplitude, offset, ..Self::default() }
    }

    pub fn rc(frequency: f64, high: f64, time_constant: f64) -> Self {
        Self {
            kind: SignalKind::RcDecay,
            frequency,
            amplitude: high,
            time_constant: Some(time_constant),
            ..Self::default()
        }
    }

    pub fn table(points: Vec<(f64, f64)>) -> Self {
        Self { kind: SignalKind::Table, table: points, ..Self::default() }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, SignalKind::Square | SignalKind::Sine | SignalKind::RcDecay)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.is_periodic() && !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(SignalError::Frequency { field: "frequency", value: self.frequency });
        }
        if matches!(self.kind, SignalKind::Square | SignalKind::RcDecay)
            && !(self.duty > 0.0 && self.duty < 1.0)
        {
            return Err(SignalError::Duty { field: "duty", value: self.duty });
        }
        if let Some(tau) = self.time_constant {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(SignalError::TimeConstant(tau));
            }
        }
        if self.kind == SignalKind::Table
            && (self.table.is_empty() || self.table.windows(2).any(|w| w[1].0 <= w[0].0))
        {
            return Err(SignalError::Table);
        }
        Ok(())
    }

    /// Position within the current cycle, in `[0, 1)`.
    fn cycle_position(&self, t: f64) -> f64 {
        let x = self.frequency * t + self.phase / TAU;
        let c = x - x.floor();
        if 1.0 - c < CYCLE_SNAP {
            0.0
        } else {
            c
        }
    }

    /// Source voltage at `t` seconds.
    pub fn voltage_at(&self, t: f64) -> f64 {
        match self.kind {
            SignalKind::Dc => self.offset,
            SignalKind::Square => {
                if self.cycle_position(t) < self.duty {
                    self.offset + self.amplitude
                } else {
                    self.offset
                }
            }
            SignalKind::Sine => {
                self.offset + self.amplitude * (TAU * self.frequency * t + self.phase).sin()
            }
            SignalKind::RcDecay => self.offset + self.rc_level(self.cycle_position(t)),
            SignalKind::Table => table_lookup(&self.table, t),
        }
    }

    fn rc_level(&self, cycle: f64) -> f64 {
        let period = 1.0 / self.frequency;
        let tau = self.time_constant.unwrap_or(period / 5.0);
        let high_time = self.duty * period;
        let a = (-high_time / tau).exp();
        let b = (-(period - high_time) / tau).exp();
        // Steady state: the charge phase ends at `peak`, the discharge phase at `trough`.
        let peak = self.amplitude * (1.0 - a) / (1.0 - a * b);
        let trough = peak * b;
        let t = cycle * period;
        if t < high_time {
            self.amplitude + (trough - self.amplitude) * (-t / tau).exp()
        } else {
            peak * (-(t - high_time) / tau).exp()
        }
    }
}

fn table_lookup(points: &[(f64, f64)], t: f64) -> f64 {
    let Some(&(t0, v0)) = points.first() else {
        return 0.0;
    };
    if t <= t0 {
        return v0;
    }
    match points.windows(2).find(|w| t < w[1].0) {
        Some(w) => {
            let ((ta, va), (tb, vb)) = (w[0], w[1]);
            va + (vb - va) * (t - ta) / (tb - ta)
        }
        None => points[points.len() - 1].1,
    }
}

/// Which probe a given ADC channel is jumpered to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Jumper {
    Probe0,
    Probe1,
    Open,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeRatio {
    #[default]
    OneToOne,
    FiveToOne,
}

/// The development board's potentiometer wiper hanging on ADC channel 7.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotLoading {
    pub enabled: bool,
    pub wiper_voltage: f64,
    pub pot_impedance: f64,
}

impl Default for PotLoading {
    fn default() -> Self {
        Self { enabled: true, wiper_voltage: 1.65, pot_impedance: 10_000.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndConfig {
    pub jumper: [Jumper; 8],
    pub probe_ratio: [ProbeRatio; 2],
    /// Ohms between the probe tip and the pin; only matters against the pot load.
    pub probe_series_impedance: [f64; 2],
    pub ch7_pot: PotLoading,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self::single(0)
    }
}

impl FrontEndConfig {
    /// Every ADC channel jumpered to one probe.
    pub fn single(probe: usize) -> Self {
        let j = if probe == 0 { Jumper::Probe0 } else { Jumper::Probe1 };
        Self {
            jumper: [j; 8],
            probe_ratio: [ProbeRatio::OneToOne; 2],
            probe_series_impedance: [0.0; 2],
            ch7_pot: PotLoading::default(),
        }
    }

    /// Even channels to probe 0, odd channels to probe 1.
    pub fn dual() -> Self {
        let mut cfg = Self::single(0);
        for (ch, j) in cfg.jumper.iter_mut().enumerate() {
            *j = if ch % 2 == 0 { Jumper::Probe0 } else { Jumper::Probe1 };
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        for (i, r) in self.probe_series_impedance.iter().enumerate() {
            if !(r.is_finite() && *r >= 0.0) {
                let field = ["probe_series_impedance[0]", "probe_series_impedance[1]"][i];
                return Err(SignalError::Impedance { field, value: *r });
            }
        }
        let pot = self.ch7_pot.pot_impedance;
        if !(pot.is_finite() && pot > 0.0) {
            return Err(SignalError::Impedance { field: "ch7_pot.pot_impedance", value: pot });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalPinMode {
    #[default]
    Pwm,
    GpioDrive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveLevel {
    #[default]
    High,
    Low,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalPinState {
    pub mode: CalPinMode,
    pub drive_level: DriveLevel,
    pub pwm_frequency: f64,
}

impl Default for CalPinState {
    fn default() -> Self {
        Self { mode: CalPinMode::Pwm, drive_level: DriveLevel::High, pwm_frequency: 2500.0 }
    }
}

impl CalPinState {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.pwm_frequency.is_finite() && self.pwm_frequency > 0.0) {
            return Err(SignalError::Frequency { field: "pwm_frequency", value: self.pwm_frequency });
        }
        Ok(())
    }

    pub fn voltage_at(&self, t: f64) -> f64 {
        match self.mode {
            CalPinMode::Pwm => SignalSpec::square(self.pwm_frequency, RAIL_VOLTS, 0.5).voltage_at(t),
            CalPinMode::GpioDrive => match self.drive_level {
                DriveLevel::High => RAIL_VOLTS,
                DriveLevel::Low => 0.0,
            },
        }
    }
}

/// What a probe tip is touching.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeInput {
    Signal(SignalSpec),
    CalPin,
}

impl Default for ProbeInput {
    fn default() -> Self {
        ProbeInput::Signal(SignalSpec::dc(0.0))
    }
}

impl ProbeInput {
    pub fn voltage_at(&self, cal: &CalPinState, t: f64) -> f64 {
        match self {
            ProbeInput::Signal(spec) => spec.voltage_at(t),
            ProbeInput::CalPin => cal.voltage_at(t),
        }
    }
}

/// Voltage at ADC pin `channel` at time `t`.
///
/// With the channel-7 pot in circuit the probe is a source behind its series
/// impedance, loaded by the pot toward the wiper; the nominal probe division
/// assumes the high-impedance input that the pot replaces.
pub fn front_end_voltage(
    cfg: &FrontEndConfig,
    sources: &[ProbeInput; 2],
    cal: &CalPinState,
    channel: usize,
    t: f64,
) -> f64 {
    let probe = match cfg.jumper[channel] {
        Jumper::Probe0 => 0,
        Jumper::Probe1 => 1,
        Jumper::Open => return 0.0,
    };
    let source = sources[probe].voltage_at(cal, t);
    let pot = &cfg.ch7_pot;
    let series = cfg.probe_series_impedance[probe];
    if channel == 7 && pot.enabled && series > 0.0 {
        return (source * pot.pot_impedance + pot.wiper_voltage * series)
            / (pot.pot_impedance + series);
    }
    match cfg.probe_ratio[probe] {
        ProbeRatio::OneToOne => source,
        ProbeRatio::FiveToOne => source / 5.0,
    }
}
