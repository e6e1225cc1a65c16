//! Eight-channel continuous-scan SAR ADC, the ISR that copies its result
//! registers, and post-processing of the copied words.
//!
//! Time is counted in master-clock ticks. Channel `i` of scan `m` starts
//! converting at `origin + m*S + i*P` (`P` = conversion period, `S = 8P`) and
//! its result register is final at `origin + m*S + (i+1)*P`. The first
//! `conversion_clocks - resolution_bits` ADC clocks of each conversion are the
//! sampling phase; after that the SAR decides one bit per ADC clock, MSB
//! first, and the result register exposes the approximation in progress
//! (decided bits plus the trial bit). A register read during that window is
//! a torn read.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Tick = u64;

pub const SCAN_CHANNELS: usize = 8;
pub const SAMPLES_PER_PROBE: usize = 128;
pub const BUFFER_WORDS: usize = 2 * SAMPLES_PER_PROBE;

pub const RESULT_MASK: u32 = 0x0000_0FFF;
/// Synthetic status bit: register holds a conversion result.
pub const STATUS_VALID: u32 = 1 << 16;
/// Synthetic status bit: register changed since the scan the ISR was servicing.
pub const STATUS_OVERRUN: u32 = 1 << 17;

pub const ADC_N_MIN_SAFE: u8 = 3;
pub const ADC_N_MAX: u8 = 10;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AcquisitionError {
    #[error("adc_n: {value} outside {min}..={max}")]
    AdcN { value: u8, min: u8, max: u8 },
    #[error("conversion_clocks: {clocks} must exceed resolution_bits ({bits})")]
    ConversionClocks { clocks: u32, bits: u32 },
    #[error("{field}: must be finite and > 0")]
    NonPositive { field: &'static str },
    #[error("resolution_bits: only 12-bit conversion is modeled (got {0})")]
    Resolution(u32),
    #[error("incomplete acquisition: {collected} of {required} samples")]
    Incomplete { collected: usize, required: usize },
    #[error("buffer holds {required} samples but {mode} post-processing needs {expected}")]
    ModeMismatch { required: usize, expected: usize, mode: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcTimingConfig {
    /// Clock divider: the ADC clock is `master_clock / (adc_n + 1)`.
    pub adc_n: u8,
    pub conversion_clocks: u32,
    pub master_clock: f64,
    pub vref: f64,
    pub resolution_bits: u32,
}

impl Default for AdcTimingConfig {
    fn default() -> Self {
        Self { adc_n: 5, conversion_clocks: 21, master_clock: 22e6, vref: 3.3, resolution_bits: 12 }
    }
}

impl AdcTimingConfig {
    pub fn with_adc_n(self, adc_n: u8) -> Self {
        Self { adc_n, ..self }
    }

    pub fn validate(&self, allow_unsafe_adc_n: bool) -> Result<(), AcquisitionError> {
        let min = if allow_unsafe_adc_n { 0 } else { ADC_N_MIN_SAFE };
        if !(min..=ADC_N_MAX).contains(&self.adc_n) {
            return Err(AcquisitionError::AdcN { value: self.adc_n, min, max: ADC_N_MAX });
        }
        if self.resolution_bits != 12 {
            return Err(AcquisitionError::Resolution(self.resolution_bits));
        }
        if self.conversion_clocks <= self.resolution_bits {
            return Err(AcquisitionError::ConversionClocks {
                clocks: self.conversion_clocks,
                bits: self.resolution_bits,
            });
        }
        if !(self.master_clock.is_finite() && self.master_clock > 0.0) {
            return Err(AcquisitionError::NonPositive { field: "master_clock" });
        }
        if !(self.vref.is_finite() && self.vref > 0.0) {
            return Err(AcquisitionError::NonPositive { field: "vref" });
        }
        Ok(())
    }

    pub fn adc_clock_ticks(&self) -> Tick {
        Tick::from(self.adc_n) + 1
    }

    pub fn conversion_period_ticks(&self) -> Tick {
        Tick::from(self.conversion_clocks) * self.adc_clock_ticks()
    }

    pub fn scan_period_ticks(&self) -> Tick {
        SCAN_CHANNELS as Tick * self.conversion_period_ticks()
    }

    pub fn sampling_clocks(&self) -> Tick {
        Tick::from(self.conversion_clocks - self.resolution_bits)
    }

    pub fn full_scale(&self) -> u16 {
        ((1u32 << self.resolution_bits) - 1) as u16
    }

    pub fn seconds(&self, tick: Tick) -> f64 {
        tick as f64 / self.master_clock
    }

    /// Samples per second on one ADC channel stream (all eight interleaved).
    pub fn sample_rate(&self) -> f64 {
        self.master_clock / self.conversion_period_ticks() as f64
    }
}

/// Free function form of [`AdcTimingConfig::conversion_period_ticks`].
pub fn conversion_period_ticks(cfg: &AdcTimingConfig) -> Tick {
    cfg.conversion_period_ticks()
}

/// Ideal quantizer: clamp to `[0, vref]`, then `floor(v / vref * 2^bits)`
/// saturated at full scale.
pub fn quantize(v: f64, cfg: &AdcTimingConfig) -> u16 {
    let levels = f64::from(1u32 << cfg.resolution_bits);
    let clamped = if v.is_nan() { 0.0 } else { v.clamp(0.0, cfg.vref) };
    let code = (clamped / cfg.vref * levels).floor() as u32;
    code.min(u32::from(cfg.full_scale())) as u16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsrTimingConfig {
    pub entry_latency_ticks: Tick,
    pub per_register_copy_ticks: Tick,
}

impl Default for IsrTimingConfig {
    fn default() -> Self {
        Self { entry_latency_ticks: 10, per_register_copy_ticks: 75 }
    }
}

impl IsrTimingConfig {
    pub fn read_offset(&self, register: usize) -> Tick {
        self.entry_latency_ticks + register as Tick * self.per_register_copy_ticks
    }

    /// Ticks from ISR entry until it returns: eight copies plus bookkeeping
    /// costed as one more copy slot.
    pub fn busy_ticks(&self) -> Tick {
        self.entry_latency_ticks + SCAN_CHANNELS as Tick * self.per_register_copy_ticks
    }
}

/// What a single result-register read returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterRead {
    pub counts: u16,
    /// Scan whose channel sample the counts belong to.
    pub scan: u64,
    /// Read landed while the SAR was still resolving bits.
    pub torn: bool,
    /// At least one conversion has completed into this register.
    pub valid: bool,
}

/// Tick at which channel `channel` of scan `scan` is sampled.
pub fn sample_tick(origin: Tick, scan: u64, channel: usize, adc: &AdcTimingConfig) -> Tick {
    origin + scan * adc.scan_period_ticks() + channel as Tick * adc.conversion_period_ticks()
}

/// Contents of result register `channel` at `read_tick`, for an ADC that has
/// been scanning continuously since `origin`.
pub fn read_register<F>(
    origin: Tick,
    read_tick: Tick,
    channel: usize,
    adc: &AdcTimingConfig,
    pin: &F,
) -> RegisterRead
where
    F: Fn(usize, f64) -> f64,
{
    let p = adc.conversion_period_ticks();
    let s = adc.scan_period_ticks();
    let sample = |scan: u64| quantize(pin(channel, adc.seconds(sample_tick(origin, scan, channel, adc))), adc);

    let first_done = origin + (channel as Tick + 1) * p;
    if read_tick < first_done {
        let start = origin + channel as Tick * p;
        return match torn_bits(read_tick, start, adc) {
            Some(decided) => RegisterRead { counts: partial(sample(0), decided, adc), scan: 0, torn: true, valid: false },
            None => RegisterRead { counts: 0, scan: 0, torn: false, valid: false },
        };
    }
    let done_scan = (read_tick - first_done) / s;
    let next_start = sample_tick(origin, done_scan + 1, channel, adc);
    match torn_bits(read_tick, next_start, adc) {
        Some(decided) => RegisterRead {
            counts: partial(sample(done_scan + 1), decided, adc),
            scan: done_scan + 1,
            torn: true,
            valid: true,
        },
        None => RegisterRead { counts: sample(done_scan), scan: done_scan, torn: false, valid: true },
    }
}

/// Number of bits already decided if `tick` falls in the resolving window of
/// a conversion starting at `start`.
fn torn_bits(tick: Tick, start: Tick, adc: &AdcTimingConfig) -> Option<u32> {
    if tick < start {
        return None;
    }
    let clocks = (tick - start) / adc.adc_clock_ticks();
    let resolving = clocks.checked_sub(adc.sampling_clocks())?;
    (resolving < Tick::from(adc.resolution_bits)).then_some(resolving as u32)
}

/// SAR register after `decided` bits: the settled MSBs of `target`, the trial
/// bit, zeros below.
fn partial(target: u16, decided: u32, adc: &AdcTimingConfig) -> u16 {
    let bits = adc.resolution_bits;
    let below = bits - decided;
    let settled = (u32::from(target) >> below) << below;
    (settled | (1 << (below - 1))) as u16
}

fn encode(read: RegisterRead, overrun: bool) -> u32 {
    let mut word = u32::from(read.counts) & RESULT_MASK;
    if read.valid {
        word |= STATUS_VALID;
    }
    if overrun {
        word |= STATUS_OVERRUN;
    }
    word
}

/// The ISR body: entered at `fire_tick`, it copies the eight result registers
/// in ascending order, register `i` at `fire_tick + entry + i*copy`.
pub fn isr_copy<F>(
    origin: Tick,
    fire_tick: Tick,
    adc: &AdcTimingConfig,
    isr: &IsrTimingConfig,
    pin: &F,
) -> [u32; SCAN_CHANNELS]
where
    F: Fn(usize, f64) -> f64,
{
    let s = adc.scan_period_ticks();
    // The scan whose end-of-scan flag this entry is servicing.
    let serviced = (fire_tick.saturating_sub(origin) / s).saturating_sub(1);
    std::array::from_fn(|i| {
        let read = read_register(origin, fire_tick + isr.read_offset(i), i, adc, pin);
        encode(read, read.torn || read.scan > serviced)
    })
}

/// One scan starting at `start_tick` followed by the ISR it raises at its end,
/// with the ADC still scanning while the copy runs.
pub fn scan_and_isr_copy<F>(
    start_tick: Tick,
    adc: &AdcTimingConfig,
    isr: &IsrTimingConfig,
    pin: F,
) -> [u32; SCAN_CHANNELS]
where
    F: Fn(usize, f64) -> f64,
{
    isr_copy(start_tick, start_tick + adc.scan_period_ticks(), adc, isr, &pin)
}

/// Bits 11:0 of a copied result word.
pub fn extract_result(word: u32) -> u16 {
    (word & RESULT_MASK) as u16
}

/// A running ADC: continuous scanning since `origin`, with the ISR entry
/// schedule. The end-of-scan flag is a single latch, so scans that finish
/// while the ISR is still busy are serviced once, on its return.
#[derive(Clone, Debug, PartialEq)]
pub struct AdcEngine {
    origin: Tick,
    next_fire: Tick,
    adc: AdcTimingConfig,
    isr: IsrTimingConfig,
}

impl AdcEngine {
    pub fn start(origin: Tick, adc: AdcTimingConfig, isr: IsrTimingConfig) -> Self {
        Self { origin, next_fire: origin + adc.scan_period_ticks(), adc, isr }
    }

    pub fn origin(&self) -> Tick {
        self.origin
    }

    pub fn next_fire(&self) -> Tick {
        self.next_fire
    }

    pub fn timing(&self) -> &AdcTimingConfig {
        &self.adc
    }

    /// Run the ISR due at [`Self::next_fire`] and schedule the next entry.
    pub fn service<F>(&mut self, pin: &F) -> [u32; SCAN_CHANNELS]
    where
        F: Fn(usize, f64) -> f64,
    {
        let fire = self.next_fire;
        let words = isr_copy(self.origin, fire, &self.adc, &self.isr, pin);
        let s = self.adc.scan_period_ticks();
        let returns = fire + self.isr.busy_ticks();
        let next_scan_end = self.origin + ((fire - self.origin) / s + 1) * s;
        self.next_fire = if next_scan_end <= returns { returns } else { next_scan_end };
        words
    }
}

/// The ISR's copy destination (`channel_data` plus `buffer_idx`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelBuffer {
    raw: [u32; BUFFER_WORDS],
    buffer_idx: usize,
    required_samples: usize,
    ready: bool,
}

impl ChannelBuffer {
    pub fn new(dual: bool) -> Self {
        let required_samples = if dual { BUFFER_WORDS } else { SAMPLES_PER_PROBE };
        Self { raw: [0; BUFFER_WORDS], buffer_idx: 0, required_samples, ready: false }
    }

    /// A completed buffer holding `words` (128 or 256 of them).
    pub fn from_raw(words: &[u32]) -> Self {
        let mut buf = Self::new(words.len() > SAMPLES_PER_PROBE);
        let n = words.len().min(BUFFER_WORDS);
        buf.raw[..n].copy_from_slice(&words[..n]);
        buf.ready = n >= buf.required_samples;
        buf
    }

    pub fn raw(&self) -> &[u32] {
        &self.raw[..self.required_samples]
    }

    pub fn buffer_idx(&self) -> usize {
        self.buffer_idx
    }

    pub fn required_samples(&self) -> usize {
        self.required_samples
    }

    pub fn is_dual(&self) -> bool {
        self.required_samples == BUFFER_WORDS
    }

    pub fn is_ready(&self) -> bool {
        self.ready
    }

    /// Clear for a new acquisition.
    pub fn reset(&mut self, dual: bool) {
        *self = Self::new(dual);
    }

    /// ISR-side append of one scan. Returns true when the acquisition just
    /// completed, at which point `buffer_idx` is back to zero.
    pub fn push_scan(&mut self, words: &[u32; SCAN_CHANNELS]) -> bool {
        if self.ready {
            return false;
        }
        let end = (self.buffer_idx + SCAN_CHANNELS).min(BUFFER_WORDS);
        self.raw[self.buffer_idx..end].copy_from_slice(&words[..end - self.buffer_idx]);
        self.buffer_idx += SCAN_CHANNELS;
        if self.buffer_idx >= self.required_samples {
            self.buffer_idx = 0;
            self.ready = true;
        }
        self.ready
    }
}

/// Post-processed samples of one acquisition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capture {
    /// Probe 0 in dual mode, otherwise the single enabled probe.
    pub probe0: Vec<u16>,
    pub probe1: Option<Vec<u16>>,
}

/// Extract the result field of every word; in dual mode split even ADC
/// channels (probe 0) from odd ones (probe 1).
pub fn postproc_samples(buf: &ChannelBuffer, dual: bool) -> Result<Capture, AcquisitionError> {
    let expected = if dual { BUFFER_WORDS } else { SAMPLES_PER_PROBE };
    if buf.required_samples != expected {
        return Err(AcquisitionError::ModeMismatch {
            required: buf.required_samples,
            expected,
            mode: if dual { "dual" } else { "single" },
        });
    }
    if !buf.ready {
        return Err(AcquisitionError::Incomplete { collected: buf.buffer_idx, required: expected });
    }
    let raw = buf.raw();
    if dual {
        let probe0 = raw.iter().step_by(2).copied().map(extract_result).collect();
        let probe1 = raw.iter().skip(1).step_by(2).copied().map(extract_result).collect();
        Ok(Capture { probe0, probe1: Some(probe1) })
    } else {
        Ok(Capture { probe0: raw.iter().copied().map(extract_result).collect(), probe1: None })
    }
}
