//! Trigger modes, the acquisition state machine, and the debounced edge
//! detector on the channel-0 pin.

use crate::acquisition::{postproc_samples, Tick};
use crate::scope::SysState;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMode {
    #[default]
    Auto,
    TriggeredRising,
    TriggeredFalling,
    Single,
}

impl TriggerMode {
    pub const ALL: [TriggerMode; 4] =
        [Self::Auto, Self::TriggeredRising, Self::TriggeredFalling, Self::Single];

    /// Keypad cycle order.
    pub fn next(self) -> Self {
        match self {
            Self::Auto => Self::TriggeredRising,
            Self::TriggeredRising => Self::TriggeredFalling,
            Self::TriggeredFalling => Self::Single,
            Self::Single => Self::Auto,
        }
    }

    /// Status-line token.
    pub fn token(self) -> &'static str {
        match self {
            Self::Auto => "A",
            Self::TriggeredRising => "TR",
            Self::TriggeredFalling => "TF",
            Self::Single => "S",
        }
    }

    pub fn edge(self) -> Option<Edge> {
        match self {
            Self::TriggeredRising => Some(Edge::Rising),
            Self::TriggeredFalling => Some(Edge::Falling),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectState {
    #[default]
    Armed,
    Triggered,
    Done,
    Display,
}

impl CollectState {
    pub const ALL: [CollectState; 4] = [Self::Armed, Self::Triggered, Self::Done, Self::Display];

    pub fn successor(self) -> Self {
        match self {
            Self::Armed => Self::Triggered,
            Self::Triggered => Self::Done,
            Self::Done => Self::Display,
            Self::Display => Self::Armed,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Armed => "armed",
            Self::Triggered => "triggered",
            Self::Done => "done",
            Self::Display => "display",
        }
    }
}

/// True if `trace` is a prefix of `(Armed Triggered Done Display)*` with
/// repeated entries allowed.
pub fn is_valid_trace(trace: &[CollectState]) -> bool {
    if trace.first().is_some_and(|&s| s != CollectState::Armed) {
        return false;
    }
    trace.windows(2).all(|w| w[1] == w[0] || w[1] == w[0].successor())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Rising,
    Falling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDetector {
    pub threshold_high: f64,
    pub threshold_low: f64,
    pub debounce_ticks: Tick,
    pub armed_edge: Edge,
    pub enabled: bool,
}

impl EdgeDetector {
    pub fn new(edge: Edge) -> Self {
        Self {
            threshold_high: 0.7 * 3.3,
            threshold_low: 0.3 * 3.3,
            debounce_ticks: 1 << 5,
            armed_edge: edge,
            enabled: true,
        }
    }
}

/// Streaming form of the detector, fed one pin sample per master tick.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTracker {
    det: EdgeDetector,
    /// Schmitt-trigger logic level, unknown until the pin leaves the dead band.
    high: Option<bool>,
    candidate: Option<Tick>,
}

impl EdgeTracker {
    pub fn new(det: EdgeDetector) -> Self {
        Self { det, high: None, candidate: None }
    }

    pub fn detector(&self) -> &EdgeDetector {
        &self.det
    }

    pub fn is_enabled(&self) -> bool {
        self.det.enabled
    }

    pub fn retarget(&mut self, edge: Edge) {
        self.det.armed_edge = edge;
        self.candidate = None;
    }

    /// Feed the pin voltage at `tick`; returns the acceptance tick once a
    /// crossing has held for the debounce period, then disables itself.
    pub fn feed(&mut self, tick: Tick, volts: f64) -> Option<Tick> {
        if !self.det.enabled {
            return None;
        }
        let prev = self.high;
        let level = match prev {
            _ if volts >= self.det.threshold_high => true,
            _ if volts <= self.det.threshold_low => false,
            Some(l) => l,
            None => return None,
        };
        self.high = Some(level);
        let target = self.det.armed_edge == Edge::Rising;
        if level != target {
            self.candidate = None;
            return None;
        }
        if prev == Some(!target) {
            self.candidate = Some(tick);
        }
        let start = self.candidate?;
        if tick + 1 - start >= self.det.debounce_ticks {
            self.det.enabled = false;
            self.candidate = None;
            return Some(start + self.det.debounce_ticks);
        }
        None
    }
}

/// First tick at or after `from_tick` where a debounced armed edge is
/// accepted, scanning `horizon` ticks of `pin`.
pub fn edge_event<F>(det: &EdgeDetector, pin: F, from_tick: Tick, horizon: Tick) -> Option<Tick>
where
    F: Fn(Tick) -> f64,
{
    let mut tracker = EdgeTracker::new(*det);
    (from_tick..from_tick + horizon).find_map(|t| tracker.feed(t, pin(t)))
}

/// Hardware hooks the state machine drives.
pub trait TriggerHardware {
    /// Start continuous scanning now.
    fn enable_adc(&mut self, sys: &SysState);
    /// Enable the channel-0 pin interrupt for `edge`.
    fn arm_edge(&mut self, edge: Edge);
}

/// One pass of the main loop's acquisition handling. Returns the new state
/// if it changed.
pub fn capture_samples_step<H: TriggerHardware>(
    sys: &mut SysState,
    hw: &mut H,
) -> Option<CollectState> {
    let next = match sys.collect_state {
        CollectState::Armed => {
            let dual = sys.dual_capture();
            if sys.calibration_measuring() {
                sys.buffer.reset(dual);
                hw.enable_adc(sys);
                Some(CollectState::Triggered)
            } else {
                match sys.trigger_mode {
                    TriggerMode::TriggeredRising | TriggerMode::TriggeredFalling => {
                        sys.buffer.reset(dual);
                        hw.arm_edge(sys.trigger_mode.edge().expect("edge mode"));
                        Some(CollectState::Triggered)
                    }
                    TriggerMode::Single if !sys.single_armed => None,
                    TriggerMode::Auto | TriggerMode::Single => {
                        sys.single_armed = false;
                        sys.buffer.reset(dual);
                        hw.enable_adc(sys);
                        Some(CollectState::Triggered)
                    }
                }
            }
        }
        // The ISR moves Triggered to Done.
        CollectState::Triggered => None,
        CollectState::Done => {
            let dual = sys.buffer.is_dual();
            // A Done state always follows a completed buffer.
            sys.capture = Some(postproc_samples(&sys.buffer, dual).expect("completed buffer"));
            Some(CollectState::Display)
        }
        CollectState::Display => {
            let rearm = sys.calibration_measuring()
                || match sys.trigger_mode {
                    TriggerMode::Single => sys.single_armed,
                    _ => true,
                };
            rearm.then_some(CollectState::Armed)
        }
    };
    if let Some(s) = next {
        sys.collect_state = s;
    }
    next
}
