//! The instrument controller: system state, keypad, calibration, LEDs and
//! the main loop that drives the simulated hardware on one tick timeline.

use crate::acquisition::{
    AcquisitionError, AdcEngine, AdcTimingConfig, Capture, ChannelBuffer, IsrTimingConfig, Tick,
    ADC_N_MAX, ADC_N_MIN_SAFE,
};
use crate::display::{CalRange, FrameBuffer, PlotConfig, VScale, STATUS_PAGES, WAVEFORM_PAGES};
use crate::signal::{
    front_end_voltage, CalPinMode, CalPinState, DriveLevel, FrontEndConfig, Jumper, ProbeInput,
    SignalError,
};
use crate::trigger::{
    capture_samples_step, CollectState, Edge, EdgeDetector, EdgeTracker, TriggerHardware,
    TriggerMode,
};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

pub const MAIN_LOOP_TICKS: Tick = 2048;
const TRACE_LIMIT: usize = 1 << 16;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScopeError {
    #[error("{field}: {reason}")]
    Config { field: String, reason: String },
    #[error("probe {0} is disabled")]
    ChannelDisabled(usize),
    #[error("calibration rejected: high {high} <= low {low}")]
    CalibrationRejected { high: u16, low: u16 },
    #[error("calibration did not finish within {0} ticks")]
    Timeout(Tick),
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
}

fn config_err(field: impl Into<String>, reason: impl ToString) -> ScopeError {
    ScopeError::Config { field: field.into(), reason: reason.to_string() }
}

/// Operator-visible state overrides applied by [`init_system`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub trigger_mode: TriggerMode,
    pub vscale: VScale,
    pub ch_enabled: [bool; 2],
    pub cal: [CalRange; 2],
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            trigger_mode: TriggerMode::Auto,
            vscale: VScale::One,
            ch_enabled: [true, false],
            cal: [CalRange::default(); 2],
        }
    }
}

/// Everything needed to build an instrument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScopeConfig {
    pub sources: [ProbeInput; 2],
    pub front_end: FrontEndConfig,
    pub adc: AdcTimingConfig,
    pub isr: IsrTimingConfig,
    pub cal_pin: CalPinState,
    pub initial: InitialState,
    pub allow_unsafe_adc_n: bool,
    pub main_loop_ticks: Tick,
}

impl Default for ScopeConfig {
    fn default() -> Self {
        Self {
            sources: [ProbeInput::CalPin, ProbeInput::default()],
            front_end: FrontEndConfig::default(),
            adc: AdcTimingConfig::default(),
            isr: IsrTimingConfig::default(),
            cal_pin: CalPinState::default(),
            initial: InitialState::default(),
            allow_unsafe_adc_n: false,
            main_loop_ticks: MAIN_LOOP_TICKS,
        }
    }
}

impl ScopeConfig {
    pub fn validate(&self) -> Result<(), ScopeError> {
        self.adc.validate(self.allow_unsafe_adc_n).map_err(|e| config_err("adc", e))?;
        for (i, src) in self.sources.iter().enumerate() {
            if let ProbeInput::Signal(spec) = src {
                spec.validate().map_err(|e| config_err(format!("sources[{i}]"), e))?;
            }
        }
        self.front_end.validate().map_err(|e| config_err("front_end", e))?;
        self.cal_pin.validate().map_err(|e: SignalError| config_err("cal_pin", e))?;
        for (i, c) in self.initial.cal.iter().enumerate() {
            if c.high <= c.low {
                return Err(config_err(format!("initial.cal[{i}]"), "high must exceed low"));
            }
        }
        if self.main_loop_ticks == 0 {
            return Err(config_err("main_loop_ticks", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyEvent {
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
    K8,
    K9,
    ChanA,
    ChanB,
    None,
}

impl KeyEvent {
    pub const ALL: [KeyEvent; 12] = [
        Self::K1,
        Self::K2,
        Self::K3,
        Self::K4,
        Self::K5,
        Self::K6,
        Self::K7,
        Self::K8,
        Self::K9,
        Self::ChanA,
        Self::ChanB,
        Self::None,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LedState {
    pub leds: [bool; 4],
}

pub fn led_state(sys: &SysState) -> LedState {
    let mut leds = [false; 4];
    leds[sys.collect_state.index()] = true;
    LedState { leds }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalPhase {
    /// Waiting for the operator to connect the probe and press K3.
    Prompt,
    MeasureHigh,
    MeasureLow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CalibrationRun {
    pub probe: usize,
    pub phase: CalPhase,
    /// An acquisition under the current drive level has been started.
    pub started: bool,
    pub high: Option<u16>,
}

/// One observed `collect_state` value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub tick: Tick,
    pub state: CollectState,
    pub mode: TriggerMode,
    pub calibrating: bool,
    /// Single-mode arm commands applied so far.
    pub arm_commands: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SysState {
    pub trigger_mode: TriggerMode,
    pub collect_state: CollectState,
    pub adc_n: u8,
    pub vscale: VScale,
    pub ch_enabled: [bool; 2],
    pub cal: [CalRange; 2],
    pub buffer: ChannelBuffer,
    pub tick: Tick,
    pub single_armed: bool,
    pub capture: Option<Capture>,
    /// Probes that the buffer in flight (or the last capture) belongs to.
    pub acq_channels: [bool; 2],
    pub calibration: Option<CalibrationRun>,
    pub last_calibration: Option<Result<CalRange, ScopeError>>,
    pub notice: Option<String>,
    pub allow_unsafe_adc_n: bool,
    pub arm_commands: u64,
    pub trace: Vec<TraceEntry>,
}

pub fn init_system(config: &ScopeConfig) -> Result<SysState, ScopeError> {
    config.validate()?;
    let init = &config.initial;
    let dual = init.ch_enabled[0] && init.ch_enabled[1];
    let mut sys = SysState {
        trigger_mode: init.trigger_mode,
        collect_state: CollectState::Armed,
        adc_n: config.adc.adc_n,
        vscale: init.vscale,
        ch_enabled: init.ch_enabled,
        cal: init.cal,
        buffer: ChannelBuffer::new(dual),
        tick: 0,
        single_armed: false,
        capture: None,
        acq_channels: init.ch_enabled,
        calibration: None,
        last_calibration: None,
        notice: None,
        allow_unsafe_adc_n: config.allow_unsafe_adc_n,
        arm_commands: 0,
        trace: Vec::new(),
    };
    sys.record();
    Ok(sys)
}

impl SysState {
    pub fn dual_capture(&self) -> bool {
        self.ch_enabled[0] && self.ch_enabled[1]
    }

    pub fn required_samples(&self) -> usize {
        ChannelBuffer::new(self.dual_capture()).required_samples()
    }

    pub fn calibration_measuring(&self) -> bool {
        self.calibration.is_some_and(|c| c.phase != CalPhase::Prompt)
    }

    pub fn adc_n_min(&self) -> u8 {
        if self.allow_unsafe_adc_n {
            0
        } else {
            ADC_N_MIN_SAFE
        }
    }

    /// `"A N=5 YN x1"`.
    pub fn status_line(&self) -> String {
        let flag = |on: bool| if on { 'Y' } else { 'N' };
        format!(
            "{} N={} {}{} x{}",
            self.trigger_mode.token(),
            self.adc_n,
            flag(self.ch_enabled[0]),
            flag(self.ch_enabled[1]),
            self.vscale.label()
        )
    }

    /// Second status row: calibration prompt or the latest notice.
    pub fn aux_line(&self) -> Option<String> {
        match self.calibration {
            Some(c) => Some(match c.phase {
                CalPhase::Prompt => format!("CAL P{}: PRESS 3", c.probe),
                CalPhase::MeasureHigh => format!("CAL P{}: HIGH", c.probe),
                CalPhase::MeasureLow => format!("CAL P{}: LOW", c.probe),
            }),
            None => self.notice.clone(),
        }
    }

    /// Per-probe arrays of the last capture, in probe order.
    pub fn probe_arrays(&self) -> Vec<(usize, &[u16])> {
        let Some(cap) = &self.capture else { return Vec::new() };
        match (&cap.probe1, self.acq_channels) {
            (Some(p1), _) => vec![(0, &cap.probe0[..]), (1, &p1[..])],
            (None, [false, true]) => vec![(1, &cap.probe0[..])],
            (None, [true, _]) => vec![(0, &cap.probe0[..])],
            (None, [false, false]) => Vec::new(),
        }
    }

    pub fn probe_samples(&self, probe: usize) -> Option<&[u16]> {
        self.probe_arrays().into_iter().find(|&(p, _)| p == probe).map(|(_, s)| s)
    }

    fn record(&mut self) {
        if self.trace.len() >= TRACE_LIMIT {
            self.trace.drain(..TRACE_LIMIT / 2);
        }
        self.trace.push(TraceEntry {
            tick: self.tick,
            state: self.collect_state,
            mode: self.trigger_mode,
            calibrating: self.calibration_measuring(),
            arm_commands: self.arm_commands,
        });
    }
}

/// Apply one keypad event to the operator state. Steps saturate.
pub fn handle_key(sys: &mut SysState, key: KeyEvent) {
    if key == KeyEvent::None {
        return;
    }
    sys.notice = None;
    if let Some(cal) = &mut sys.calibration {
        if cal.phase == CalPhase::Prompt {
            if key == KeyEvent::K3 {
                cal.phase = CalPhase::MeasureHigh;
                cal.started = false;
            }
            return;
        }
    }
    match key {
        KeyEvent::K1 => sys.trigger_mode = sys.trigger_mode.next(),
        KeyEvent::K2 => sys.vscale = sys.vscale.up(),
        KeyEvent::K8 => sys.vscale = sys.vscale.down(),
        KeyEvent::K4 => {
            if sys.adc_n > sys.adc_n_min() {
                sys.adc_n -= 1;
            }
        }
        KeyEvent::K6 => {
            if sys.adc_n < ADC_N_MAX {
                sys.adc_n += 1;
            }
        }
        KeyEvent::K5 => arm_single(sys),
        KeyEvent::K7 | KeyEvent::K9 => {
            let probe = usize::from(key == KeyEvent::K9);
            if sys.calibration.is_none() {
                if sys.ch_enabled[probe] {
                    sys.calibration = Some(CalibrationRun { probe, phase: CalPhase::Prompt, started: false, high: None });
                } else {
                    sys.notice = Some(format!("P{probe} DISABLED"));
                }
            }
        }
        KeyEvent::ChanA => sys.ch_enabled[0] = !sys.ch_enabled[0],
        KeyEvent::ChanB => sys.ch_enabled[1] = !sys.ch_enabled[1],
        KeyEvent::K3 | KeyEvent::None => {}
    }
}

/// The operator's single-shot arm; ignored outside Single mode.
pub fn arm_single(sys: &mut SysState) {
    if sys.trigger_mode == TriggerMode::Single {
        sys.single_armed = true;
        sys.arm_commands += 1;
    }
}

/// Integer mean rounded half up.
pub fn mean_round_half_up(samples: &[u16]) -> u16 {
    let n = samples.len() as u64;
    if n == 0 {
        return 0;
    }
    let sum: u64 = samples.iter().map(|&s| u64::from(s)).sum();
    ((2 * sum + n) / (2 * n)) as u16
}

/// Commands queued by callers and applied at loop boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Key(KeyEvent),
    ArmSingle,
    ConnectProbeToCal { probe: usize },
    SetJumpers { jumpers: [Jumper; 8] },
    SetSignal { probe: usize, input: ProbeInput },
    SetFrontEnd(FrontEndConfig),
}

impl Command {
    /// Keypad polls report at most one key.
    fn is_key(&self) -> bool {
        matches!(self, Command::Key(_))
    }
}

/// Simulated hardware: signal path, cal pin, ADC and the pin interrupt.
#[derive(Clone, Debug)]
pub struct Hardware {
    pub sources: [ProbeInput; 2],
    pub front_end: FrontEndConfig,
    pub cal_pin: CalPinState,
    pub adc: AdcTimingConfig,
    pub isr: IsrTimingConfig,
    engine: Option<AdcEngine>,
    edge: Option<EdgeTracker>,
    now: Tick,
    origins: Vec<Tick>,
}

impl Hardware {
    fn new(config: &ScopeConfig) -> Self {
        Self {
            sources: config.sources.clone(),
            front_end: config.front_end.clone(),
            cal_pin: config.cal_pin,
            adc: config.adc,
            isr: config.isr,
            engine: None,
            edge: None,
            now: 0,
            origins: Vec::new(),
        }
    }

    pub fn pin_voltage(&self, channel: usize, seconds: f64) -> f64 {
        front_end_voltage(&self.front_end, &self.sources, &self.cal_pin, channel, seconds)
    }

    pub fn adc_running(&self) -> bool {
        self.engine.is_some()
    }

    pub fn edge_armed(&self) -> bool {
        self.edge.as_ref().is_some_and(EdgeTracker::is_enabled)
    }

    /// Start tick of every acquisition so far (the tick channel 0 of its
    /// first scan is sampled).
    pub fn acquisition_origins(&self) -> &[Tick] {
        &self.origins
    }

    fn start_adc(&mut self, adc_n: u8) {
        self.edge = None;
        self.engine = Some(AdcEngine::start(self.now, self.adc.with_adc_n(adc_n), self.isr));
        self.origins.push(self.now);
    }
}

impl TriggerHardware for Hardware {
    fn enable_adc(&mut self, sys: &SysState) {
        self.start_adc(sys.adc_n);
    }

    fn arm_edge(&mut self, edge: Edge) {
        self.engine = None;
        self.edge = Some(EdgeTracker::new(EdgeDetector::new(edge)));
    }
}

/// A running instrument: state, hardware, display and the command queue.
#[derive(Clone, Debug)]
pub struct Scope {
    sys: SysState,
    hw: Hardware,
    fb: FrameBuffer,
    queue: VecDeque<Command>,
    loop_ticks: Tick,
    last_loop: Option<Tick>,
    loops: u64,
}

impl Scope {
    pub fn new(config: &ScopeConfig) -> Result<Self, ScopeError> {
        let sys = init_system(config)?;
        Ok(Self {
            sys,
            hw: Hardware::new(config),
            fb: FrameBuffer::new(),
            queue: VecDeque::new(),
            loop_ticks: config.main_loop_ticks,
            last_loop: None,
            loops: 0,
        })
    }

    pub fn sys(&self) -> &SysState {
        &self.sys
    }

    pub fn hardware(&self) -> &Hardware {
        &self.hw
    }

    pub fn framebuffer(&self) -> &FrameBuffer {
        &self.fb
    }

    pub fn now(&self) -> Tick {
        self.sys.tick
    }

    pub fn loop_ticks(&self) -> Tick {
        self.loop_ticks
    }

    pub fn loops_run(&self) -> u64 {
        self.loops
    }

    pub fn leds(&self) -> LedState {
        led_state(&self.sys)
    }

    pub fn push(&mut self, cmd: Command) {
        self.queue.push_back(cmd);
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Advance the master clock by `n` ticks. Main-loop iterations run at
    /// every multiple of the loop period, hardware events in between.
    pub fn tick(&mut self, n: Tick) {
        let target = self.sys.tick + n;
        while self.sys.tick < target {
            let now = self.sys.tick;
            if now.is_multiple_of(self.loop_ticks) && self.last_loop != Some(now) {
                self.last_loop = Some(now);
                self.main_loop();
            }
            let boundary = (now / self.loop_ticks + 1) * self.loop_ticks;
            let end = boundary.min(target);
            self.advance_hardware(end);
            self.sys.tick = end;
        }
    }

    /// Run whole loop periods until `done` holds or `max_ticks` pass.
    pub fn run_until<F>(&mut self, max_ticks: Tick, mut done: F) -> bool
    where
        F: FnMut(&Scope) -> bool,
    {
        let limit = self.sys.tick + max_ticks;
        while self.sys.tick < limit {
            if done(self) {
                return true;
            }
            self.tick(self.loop_ticks - self.sys.tick % self.loop_ticks);
        }
        done(self)
    }

    /// Calibrate `probe` against the cal pin: press K7/K9, acknowledge the
    /// prompt, and run until both rails are measured.
    pub fn calibrate_probe(&mut self, probe: usize) -> Result<CalRange, ScopeError> {
        if !self.sys.ch_enabled[probe] {
            return Err(ScopeError::ChannelDisabled(probe));
        }
        self.push(Command::Key(if probe == 0 { KeyEvent::K7 } else { KeyEvent::K9 }));
        self.push(Command::Key(KeyEvent::K3));
        self.sys.last_calibration = None;
        let budget = 64 * self.loop_ticks
            + 8 * (BUDGET_SCANS * self.hw.adc.with_adc_n(ADC_N_MAX).scan_period_ticks());
        if !self.run_until(budget, |s| s.queue.is_empty() && s.sys.calibration.is_none()) {
            return Err(ScopeError::Timeout(budget));
        }
        self.sys.last_calibration.clone().unwrap_or(Err(ScopeError::Timeout(budget)))
    }

    fn main_loop(&mut self) {
        self.loops += 1;
        self.apply_commands();
        self.hw.now = self.sys.tick;
        let before = self.sys.collect_state;
        let measuring = self.sys.calibration_measuring();
        if let Some(next) = capture_samples_step(&mut self.sys, &mut self.hw) {
            if before == CollectState::Armed && next == CollectState::Triggered {
                self.sys.acq_channels = self.sys.ch_enabled;
                if measuring {
                    if let Some(c) = &mut self.sys.calibration {
                        c.started = true;
                    }
                }
            }
            self.sys.record();
            if next == CollectState::Display {
                self.on_display();
            }
        }
        self.render_status();
    }

    fn apply_commands(&mut self) {
        let mut key_seen = false;
        while let Some(cmd) = self.queue.front() {
            if cmd.is_key() {
                if key_seen {
                    break;
                }
                key_seen = true;
            }
            let cmd = self.queue.pop_front().expect("front exists");
            self.apply(cmd);
        }
    }

    fn apply(&mut self, cmd: Command) {
        let mode = self.sys.trigger_mode;
        let phase = self.sys.calibration.map(|c| c.phase);
        match cmd {
            Command::Key(k) => handle_key(&mut self.sys, k),
            Command::ArmSingle => arm_single(&mut self.sys),
            Command::ConnectProbeToCal { probe } => self.hw.sources[probe.min(1)] = ProbeInput::CalPin,
            Command::SetSignal { probe, input } => self.hw.sources[probe.min(1)] = input,
            Command::SetJumpers { jumpers } => self.hw.front_end.jumper = jumpers,
            Command::SetFrontEnd(fe) => self.hw.front_end = fe,
        }
        self.hw.now = self.sys.tick;
        let waiting = self.sys.collect_state == CollectState::Triggered && !self.hw.adc_running();

        if phase == Some(CalPhase::Prompt) && self.sys.calibration.map(|c| c.phase) == Some(CalPhase::MeasureHigh) {
            self.hw.cal_pin.mode = CalPinMode::GpioDrive;
            self.hw.cal_pin.drive_level = DriveLevel::High;
            if self.sys.collect_state == CollectState::Triggered {
                // Restart the acquisition in flight under the driven rail.
                let dual = self.sys.dual_capture();
                self.sys.buffer.reset(dual);
                self.sys.acq_channels = self.sys.ch_enabled;
                self.hw.start_adc(self.sys.adc_n);
                if let Some(c) = &mut self.sys.calibration {
                    c.started = true;
                }
            }
            return;
        }
        if !waiting || self.sys.calibration_measuring() {
            return;
        }
        if self.sys.trigger_mode != mode {
            match self.sys.trigger_mode.edge() {
                Some(edge) => match &mut self.hw.edge {
                    Some(tr) => tr.retarget(edge),
                    None => self.hw.arm_edge(edge),
                },
                None => self.hw.edge = None,
            }
        }
        let start = match self.sys.trigger_mode {
            TriggerMode::Auto => true,
            TriggerMode::Single => std::mem::take(&mut self.sys.single_armed),
            _ => false,
        };
        if start {
            self.hw.start_adc(self.sys.adc_n);
        }
    }

    fn advance_hardware(&mut self, end: Tick) {
        let from = self.sys.tick;
        if let Some(tr) = self.hw.edge.as_mut().filter(|t| t.is_enabled()) {
            let fe = &self.hw.front_end;
            let (sources, cal, adc) = (&self.hw.sources, &self.hw.cal_pin, &self.hw.adc);
            let hit = (from..end).find_map(|t| tr.feed(t, front_end_voltage(fe, sources, cal, 0, adc.seconds(t))));
            if let Some(accept) = hit {
                self.hw.now = accept;
                self.hw.start_adc(self.sys.adc_n);
            }
        }
        let Hardware { engine, sources, front_end, cal_pin, .. } = &mut self.hw;
        let Some(eng) = engine.as_mut() else { return };
        let pin = |ch: usize, t: f64| front_end_voltage(front_end, sources, cal_pin, ch, t);
        while eng.next_fire() < end {
            let fire = eng.next_fire();
            let words = eng.service(&pin);
            if self.sys.buffer.push_scan(&words) {
                *engine = None;
                let tick = self.sys.tick;
                self.sys.tick = fire;
                self.sys.collect_state = CollectState::Done;
                self.sys.record();
                self.sys.tick = tick;
                return;
            }
        }
    }

    fn on_display(&mut self) {
        let Some(mut run) = self.sys.calibration.filter(|c| c.phase != CalPhase::Prompt) else {
            self.replot();
            return;
        };
        if !run.started {
            return;
        }
        let Some(mean) = self.sys.probe_samples(run.probe).map(mean_round_half_up) else {
            self.finish_calibration(run.probe, Err(ScopeError::ChannelDisabled(run.probe)));
            return;
        };
        match (run.phase, run.high) {
            (CalPhase::MeasureHigh, _) => {
                run.high = Some(mean);
                run.phase = CalPhase::MeasureLow;
                run.started = false;
                self.sys.calibration = Some(run);
                self.hw.cal_pin.drive_level = DriveLevel::Low;
            }
            (CalPhase::MeasureLow, Some(high)) => {
                let result = if high > mean {
                    Ok(CalRange { high, low: mean })
                } else {
                    Err(ScopeError::CalibrationRejected { high, low: mean })
                };
                self.finish_calibration(run.probe, result);
            }
            _ => unreachable!("low measured before high"),
        }
    }

    fn finish_calibration(&mut self, probe: usize, result: Result<CalRange, ScopeError>) {
        match &result {
            Ok(range) => self.sys.cal[probe] = *range,
            Err(_) => self.sys.notice = Some(format!("CAL P{probe} REJECTED")),
        }
        self.sys.last_calibration = Some(result);
        self.sys.calibration = None;
        self.hw.cal_pin.mode = CalPinMode::Pwm;
        self.sys.collect_state = CollectState::Armed;
        self.sys.record();
    }

    fn replot(&mut self) {
        self.fb.clear_pages(WAVEFORM_PAGES);
        let cfg = PlotConfig { vscale: self.sys.vscale };
        for (probe, samples) in self.sys.probe_arrays() {
            self.fb
                .plot_data(samples, self.sys.cal[probe], &cfg)
                .expect("calibration ranges are kept non-degenerate");
        }
    }

    fn render_status(&mut self) {
        render_status(&mut self.fb, &self.sys);
    }
}

/// Scans an acquisition can need: a dual buffer is 32 scans.
const BUDGET_SCANS: Tick = 32;

/// Clear the status region and write the status line (page 7) and the
/// prompt line (page 6).
pub fn render_status(fb: &mut FrameBuffer, sys: &SysState) {
    fb.clear_pages(STATUS_PAGES);
    let top = *STATUS_PAGES.end();
    fb.draw_text(top, 0, &sys.status_line()).expect("status page in range");
    if let Some(aux) = sys.aux_line() {
        fb.draw_text(top - 1, 0, &aux).expect("status page in range");
    }
}
