use miniscope_core::acquisition::SAMPLES_PER_PROBE;
use miniscope_core::display::{FrameBuffer, LCD_TOTAL_DATA, PBM_HEADER};
use miniscope_core::scope::TraceEntry;
use miniscope_core::{batch, CalRange, CollectState, ScopeConfig, TriggerMode};
use miniscope_gateway::config::parse_config;
use miniscope_gateway::csv::parse_csv;
use miniscope_gateway::headless::{run_headless, run_session, Outputs, SessionRun};
use miniscope_gateway::script::parse_script;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scope_acceptance::{run_all, Outcome};
use std::collections::HashSet;
use std::path::PathBuf;
use std::time::Instant;

const MASTER_HZ: f64 = 22e6;
const CONVERSION_CLOCKS: u64 = 21;
const CAL_HZ: f64 = 2500.0;

// Tolerances.
const BIJECTION_MAX_SECS: f64 = 1.0;
const DUTY_TARGET: f64 = 0.50;
const DUTY_TOL: f64 = 0.05;
const RAIL_BAND_COUNTS: i32 = 2;
const PHASE_LOCK_TOL_PERIODS: u64 = 1;
const RANDOM_SESSIONS: usize = 1000;
const CAL_DIVIDER_TOL_COUNTS: i32 = 1;
const ATTENUATION_MAX_RATIO: f64 = 0.10;
const PBM_EXPECTED_LEN: usize = 1032;

/// Exact quantizer over integer microvolts: floor(uv * 4096 / 3_300_000).
fn oracle_counts(uv: i64) -> i32 {
    (uv.clamp(0, 3_300_000) * 4096 / 3_300_000).min(4095) as i32
}

fn volts_to_uv(v: f64) -> i64 {
    (v * 1e6).round() as i64
}

fn config(json: &str) -> ScopeConfig {
    parse_config(json).unwrap_or_else(|e| panic!("config: {e}"))
}

fn session(cfg: &ScopeConfig, script: &str) -> SessionRun {
    let records = parse_script(script).unwrap_or_else(|e| panic!("script: {e}"));
    run_session(cfg, &records, None).unwrap_or_else(|e| panic!("run: {e}"))
}

fn capture_csv(cfg: &ScopeConfig, at_tick: u64) -> miniscope_gateway::csv::CsvCapture {
    let run = session(cfg, &format!("{{\"at_tick\": {at_tick}, \"action\": \"export_csv\"}}"));
    let text = String::from_utf8(run.csvs[0].bytes.clone()).unwrap();
    parse_csv(&text).unwrap()
}

fn in_band(c: u16, rail: i32) -> bool {
    (i32::from(c) - rail).abs() <= RAIL_BAND_COUNTS
}

// 1 ---------------------------------------------------------------------------

fn pixel_map_bijection() -> Outcome {
    let start = Instant::now();
    let mut targets = HashSet::new();
    let mut bytes_ok = true;
    for x in 0..128 {
        for y in 0..64 {
            let mut fb = FrameBuffer::new();
            fb.plot_at(x, y).unwrap();
            let raw = fb.serialize();
            let set: Vec<(usize, u8)> = raw.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, &b)| (i, b)).collect();
            assert_eq!(set.len(), 1, "({x},{y}) touched {} bytes", set.len());
            let (offset, bits) = set[0];
            assert_eq!(bits.count_ones(), 1);
            let (page, byte) = (offset / 132, offset % 132);
            bytes_ok &= (2..=129).contains(&byte);
            targets.insert((page, byte, bits));
        }
    }
    let corner = |x, y| {
        let mut fb = FrameBuffer::new();
        fb.plot_at(x, y).unwrap();
        fb.serialize()
    };
    let corners = corner(0, 0)[7 * 132 + 129] == 0x80 && corner(127, 63)[2] == 0x01 && corner(0, 8)[6 * 132 + 129] == 0x80;
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        targets.len() == 8192 && bytes_ok && corners && secs < BIJECTION_MAX_SECS,
        format!("{} distinct targets, bytes in [2,129]: {bytes_ok}, corners: {corners}, {secs:.3}s < {BIJECTION_MAX_SECS}s", targets.len()),
    )
}

// 2 ---------------------------------------------------------------------------

/// Duty of a two-level capture folded at `samples_per_period`: each sample
/// owns the phase interval up to the next sample's phase.
fn folded_duty(samples: &[u16], samples_per_period: f64, high_rail: i32) -> f64 {
    let mut pts: Vec<(f64, bool)> = samples
        .iter()
        .enumerate()
        .map(|(i, &c)| ((i as f64 / samples_per_period).fract(), in_band(c, high_rail)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    (0..pts.len())
        .filter(|&k| pts[k].1)
        .map(|k| {
            let next = if k + 1 < pts.len() { pts[k + 1].0 } else { pts[0].0 + 1.0 };
            next - pts[k].0
        })
        .sum()
}

fn cal_signal_reproduction() -> Outcome {
    let adc_n = 3u64;
    let cfg = config(r#"{"sources": ["cal_pin", {"signal": {"kind": "dc"}}], "adc": {"adc_n": 3}}"#);
    let cap = capture_csv(&cfg, 40_960);
    let samples = cap.probe(0).unwrap();
    let sample_rate = MASTER_HZ / ((adc_n + 1) * CONVERSION_CLOCKS) as f64;
    let spp = sample_rate / CAL_HZ;
    let (lo, hi) = (oracle_counts(0), oracle_counts(3_300_000));
    let duty = folded_duty(samples, spp, hi);
    let n_lo = samples.iter().filter(|&&c| in_band(c, lo)).count();
    let n_hi = samples.iter().filter(|&&c| in_band(c, hi)).count();
    let two_clusters = n_lo > 0 && n_hi > 0 && n_lo + n_hi == samples.len();
    Outcome::check(
        (duty - DUTY_TARGET).abs() <= DUTY_TOL && two_clusters && samples.len() == SAMPLES_PER_PROBE,
        format!("duty {duty:.4} (target {DUTY_TARGET} +/- {DUTY_TOL}), {n_lo} samples near {lo}, {n_hi} near {hi}, {spp:.3} samples/period"),
    )
}

// 3 ---------------------------------------------------------------------------

/// Brute force over registers: does any ISR read land at or after the tick
/// the next scan starts altering that register (end of its sampling phase)?
fn oracle_register_race(adc_n: u64) -> bool {
    let clock = adc_n + 1;
    let p = CONVERSION_CLOCKS * clock;
    let s = 8 * p;
    let sampling = (CONVERSION_CLOCKS - 12) * clock;
    (0..8u64).any(|i| {
        let read = s + 10 + 75 * i;
        let altered = s + i * p + sampling;
        read >= altered
    })
}

fn corruption_boundary() -> Outcome {
    let base = config(r#"{"sources": ["cal_pin", {"signal": {"kind": "dc"}}], "allow_unsafe_adc_n": true}"#);
    let sweep: Vec<u64> = (0..=10).collect();
    let counts = batch::map(sweep.clone(), |n| {
        let mut cfg = base.clone();
        cfg.adc.adc_n = n as u8;
        let cap = capture_csv(&cfg, 60_000);
        let s = cap.probe(0).unwrap().to_vec();
        let (lo, hi) = (oracle_counts(0), oracle_counts(3_300_000));
        s[1..s.len() - 1].iter().filter(|&&c| !in_band(c, lo) && !in_band(c, hi)).count()
    });
    let mut ok = true;
    let mut parts = Vec::new();
    for (&n, &bad) in sweep.iter().zip(&counts) {
        let expect_corrupt = n < 3;
        ok &= (bad > 0) == expect_corrupt;
        ok &= oracle_register_race(n) == expect_corrupt;
        parts.push(format!("n={n}:{bad}"));
    }
    Outcome::check(ok, format!("out-of-band interior samples {}; oracle race set {:?}", parts.join(" "), sweep.iter().filter(|&&n| oracle_register_race(n)).collect::<Vec<_>>()))
}

// 4 ---------------------------------------------------------------------------

/// Smallest arc (in ticks) of the cal period covering every phase.
fn phase_spread(phases: &[u64], period: u64) -> u64 {
    let mut p = phases.to_vec();
    p.sort_unstable();
    let max_gap = (0..p.len())
        .map(|k| if k + 1 < p.len() { p[k + 1] - p[k] } else { p[0] + period - p[k] })
        .max()
        .unwrap_or(period);
    period - max_gap
}

fn origin_phases(mode: &str, count: usize) -> Vec<u64> {
    let cfg = config(&format!(r#"{{"sources": ["cal_pin", {{"signal": {{"kind": "dc"}}}}], "initial": {{"trigger_mode": "{mode}"}}}}"#));
    let run = session(&cfg, "{\"at_tick\": 800000, \"action\": \"snapshot\"}");
    let period = (MASTER_HZ / CAL_HZ).round() as u64;
    let origins = run.scope.hardware().acquisition_origins();
    assert!(origins.len() >= count, "{mode}: only {} acquisitions", origins.len());
    origins[..count].iter().map(|o| o % period).collect()
}

fn edge_trigger_stability() -> Outcome {
    let period = (MASTER_HZ / CAL_HZ).round() as u64;
    let conversion = CONVERSION_CLOCKS * 6;
    let tol = PHASE_LOCK_TOL_PERIODS * conversion;
    let locked = phase_spread(&origin_phases("triggered_rising", 10), period);
    let free = phase_spread(&origin_phases("auto", 10), period);
    Outcome::check(
        locked <= tol && free > tol,
        format!("rising-edge phase spread {locked} ticks (<= {tol}), auto spread {free} ticks (> {tol})"),
    )
}

// 5 ---------------------------------------------------------------------------

const KEYS: [&str; 12] = ["K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8", "K9", "ChanA", "ChanB", "None"];
const MODES: [&str; 4] = ["auto", "triggered_rising", "triggered_falling", "single"];

fn random_session(seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source = match rng.random_range(0..3) {
        0 => "\"cal_pin\"".to_string(),
        1 => format!("{{\"signal\": {{\"kind\": \"dc\", \"offset\": {:.3}}}}}", rng.random_range(0.0..3.3)),
        _ => format!("{{\"signal\": {{\"kind\": \"square\", \"frequency\": {:.1}, \"amplitude\": 3.3}}}}", rng.random_range(200.0..5000.0)),
    };
    let cfg = format!(
        r#"{{"sources": [{source}, "cal_pin"], "front_end": {{"jumper": ["probe0","probe1","probe0","probe1","probe0","probe1","probe0","probe1"]}}, "initial": {{"trigger_mode": "{}"}}}}"#,
        MODES[rng.random_range(0..4)]
    );
    let mut script = String::new();
    let mut t = 0u64;
    for _ in 0..rng.random_range(0..24) {
        t += rng.random_range(0..30_000);
        let line = match rng.random_range(0..10) {
            0 => format!("{{\"at_tick\": {t}, \"action\": \"arm_single\"}}"),
            1 => format!("{{\"at_tick\": {t}, \"action\": \"connect_probe_to_cal\", \"probe\": {}}}", rng.random_range(0..2)),
            _ => format!("{{\"at_tick\": {t}, \"action\": \"key_press\", \"key\": \"{}\"}}", KEYS[rng.random_range(0..KEYS.len())]),
        };
        script.push_str(&line);
        script.push('\n');
    }
    script.push_str(&format!("{{\"at_tick\": {}, \"action\": \"snapshot\"}}\n", t + 200_000));
    (cfg, script)
}

/// Independent trace checker: starts Armed, each step stays or advances by
/// one around Armed Triggered Done Display.
fn trace_matches_cycle(trace: &[TraceEntry]) -> bool {
    let order = [CollectState::Armed, CollectState::Triggered, CollectState::Done, CollectState::Display];
    let idx = |s: CollectState| order.iter().position(|&o| o == s).unwrap();
    trace.first().is_none_or(|e| e.state == CollectState::Armed)
        && trace.windows(2).all(|w| {
            let (a, b) = (idx(w[0].state), idx(w[1].state));
            b == a || b == (a + 1) % 4
        })
}

/// Each Single-mode acquisition start, and each return to Armed from a
/// Single-mode display, needs an arm command newer than the last start.
/// Calibration acquisitions neither need nor consume an arm command, and
/// the return to Armed that ends a calibration is not a re-arm.
fn single_never_rearms_unasked(trace: &[TraceEntry]) -> bool {
    let mut arms_at_last_start: Option<u64> = None;
    for w in trace.windows(2) {
        let (a, b) = (w[0], w[1]);
        let single = b.mode == TriggerMode::Single && !b.calibrating && !a.calibrating;
        if a.state == CollectState::Armed && b.state == CollectState::Triggered {
            if single && arms_at_last_start.is_some_and(|n| b.arm_commands <= n) {
                return false;
            }
            if single && arms_at_last_start.is_none() && b.arm_commands == 0 {
                return false;
            }
            if !b.calibrating {
                arms_at_last_start = Some(b.arm_commands);
            }
        }
        if a.state == CollectState::Display
            && b.state == CollectState::Armed
            && single
            && b.arm_commands <= arms_at_last_start.unwrap_or(0)
        {
            return false;
        }
    }
    true
}

fn fsm_trace_property() -> Outcome {
    let seeds: Vec<u64> = (0..RANDOM_SESSIONS as u64).collect();
    let results = batch::map(seeds, |seed| {
        let (cfg, script) = random_session(seed);
        let run = session(&config(&cfg), &script);
        let trace = &run.scope.sys().trace;
        (trace_matches_cycle(trace), single_never_rearms_unasked(trace), trace.len())
    });
    let bad_trace = results.iter().filter(|r| !r.0).count();
    let bad_single = results.iter().filter(|r| !r.1).count();
    let entries: usize = results.iter().map(|r| r.2).sum();
    Outcome::check(
        bad_trace == 0 && bad_single == 0 && results.len() == RANDOM_SESSIONS,
        format!("{} sessions, {entries} trace entries, {bad_trace} cycle violations, {bad_single} unarmed single re-arms", results.len()),
    )
}

// 6 ---------------------------------------------------------------------------

fn dual_csv(jumpers: &str) -> Vec<u8> {
    let cfg = config(&format!(
        r#"{{"sources": [{{"signal": {{"kind": "dc", "offset": 1.0}}}}, {{"signal": {{"kind": "dc", "offset": 2.0}}}}],
            "front_end": {{"jumper": {jumpers}}}, "initial": {{"ch_enabled": [true, true]}}}}"#
    ));
    session(&cfg, "{\"at_tick\": 80000, \"action\": \"export_csv\"}").csvs[0].bytes.clone()
}

fn expected_dual_csv(a: i32, b: i32) -> Vec<u8> {
    let mut s = String::from("index,ch0,ch1\n");
    for i in 0..SAMPLES_PER_PROBE {
        s.push_str(&format!("{i},{a},{b}\n"));
    }
    s.into_bytes()
}

fn dual_deinterleave() -> Outcome {
    let (q1, q2) = (oracle_counts(1_000_000), oracle_counts(2_000_000));
    let straight = dual_csv(r#"["probe0","probe1","probe0","probe1","probe0","probe1","probe0","probe1"]"#);
    let swapped = dual_csv(r#"["probe1","probe0","probe1","probe0","probe1","probe0","probe1","probe0"]"#);
    let ok_straight = straight == expected_dual_csv(q1, q2);
    let ok_swapped = swapped == expected_dual_csv(q2, q1);
    Outcome::check(
        ok_straight && ok_swapped,
        format!("even/odd jumpers byte-exact at ({q1},{q2}): {ok_straight}; swapped jumpers give ({q2},{q1}): {ok_swapped}"),
    )
}

// 7 ---------------------------------------------------------------------------

const CAL_SCRIPT: &str = r#"{"at_tick": 0, "action": "connect_probe_to_cal", "probe": 0}
{"at_tick": 0, "action": "key_press", "key": "K7"}
{"at_tick": 4096, "action": "key_press", "key": "K3"}
{"at_tick": 600000, "action": "snapshot"}"#;

fn calibrated(cfg_json: &str) -> (CalRange, bool) {
    let run = session(&config(cfg_json), CAL_SCRIPT);
    let sys = run.scope.sys();
    (sys.cal[0], matches!(sys.last_calibration, Some(Ok(_))))
}

/// Pin voltage with the pot on channel 7: probe source behind `series`
/// against the pot to the wiper.
fn divider(v_src: f64, series: f64, pot: f64, wiper: f64) -> f64 {
    v_src * pot / (series + pot) + wiper * series / (series + pot)
}

fn mean_half_up(values: &[i32]) -> i32 {
    let n = values.len() as i64;
    let sum: i64 = values.iter().map(|&v| i64::from(v)).sum();
    ((2 * sum + n) / (2 * n)) as i32
}

fn calibration_procedure() -> Outcome {
    let (ideal, ideal_ok) = calibrated(r#"{"sources": [{"signal": {"kind": "dc"}}, {"signal": {"kind": "dc"}}]}"#);
    let rails_exact = ideal_ok && ideal == CalRange { high: 4095, low: 0 };

    let (series, pot, wiper) = (10_000.0, 10_000.0, 1.0);
    let (loaded, loaded_ok) = calibrated(&format!(
        r#"{{"sources": [{{"signal": {{"kind": "dc"}}}}, {{"signal": {{"kind": "dc"}}}}],
            "front_end": {{"probe_series_impedance": [{series}, 0.0], "ch7_pot": {{"enabled": true, "wiper_voltage": {wiper}, "pot_impedance": {pot}}}}}}}"#
    ));
    // One scan = channels 0..6 straight from the pin, channel 7 through the divider.
    let scan_mean = |rail: f64| {
        let mut counts = vec![oracle_counts(volts_to_uv(rail)); 7];
        counts.push(oracle_counts(volts_to_uv(divider(rail, series, pot, wiper))));
        mean_half_up(&counts.repeat(16))
    };
    let (want_hi, want_lo) = (scan_mean(3.3), scan_mean(0.0));
    let close = (i32::from(loaded.high) - want_hi).abs() <= CAL_DIVIDER_TOL_COUNTS
        && (i32::from(loaded.low) - want_lo).abs() <= CAL_DIVIDER_TOL_COUNTS;
    Outcome::check(
        rails_exact && loaded_ok && close,
        format!(
            "ideal rails -> {{high:{}, low:{}}}; channel-7 divider -> {{high:{}, low:{}}} vs formula {{{want_hi}, {want_lo}}} +/- {CAL_DIVIDER_TOL_COUNTS}",
            ideal.high, ideal.low, loaded.high, loaded.low
        ),
    )
}

// 8 ---------------------------------------------------------------------------

fn ch7_peak_to_peak(ratio: &str, series: f64) -> i32 {
    let cfg = config(&format!(
        r#"{{"sources": [{{"signal": {{"kind": "sine", "frequency": 2000.0, "amplitude": 1.5, "offset": 1.65}}}}, {{"signal": {{"kind": "dc"}}}}],
            "front_end": {{"jumper": ["open","open","open","open","open","open","open","probe0"],
                           "probe_ratio": ["{ratio}", "one_to_one"], "probe_series_impedance": [{series}, 0.0],
                           "ch7_pot": {{"enabled": true}}}}}}"#
    ));
    let cap = capture_csv(&cfg, 40_960);
    let ch7: Vec<i32> = cap.probe(0).unwrap().iter().skip(7).step_by(8).map(|&c| i32::from(c)).collect();
    ch7.iter().max().unwrap() - ch7.iter().min().unwrap()
}

fn probe_attenuation_failure() -> Outcome {
    let direct = ch7_peak_to_peak("one_to_one", 0.0);
    let five = ch7_peak_to_peak("five_to_one", 4.0e6);
    let ratio = f64::from(five) / f64::from(direct.max(1));
    Outcome::check(
        direct > 0 && ratio < ATTENUATION_MAX_RATIO,
        format!("1:1 p-p {direct} counts, 5:1 p-p {five} counts, ratio {ratio:.4} < {ATTENUATION_MAX_RATIO}"),
    )
}

// 9 ---------------------------------------------------------------------------

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cal_square.pbm")
}

const GOLDEN_SCRIPT: &str = r#"{"at_tick": 0, "action": "arm_single"}
{"at_tick": 200000, "action": "snapshot"}"#;

fn golden_run() -> (Vec<u8>, Vec<u8>) {
    let cfg = config(r#"{"sources": ["cal_pin", {"signal": {"kind": "dc"}}], "adc": {"adc_n": 3}, "initial": {"trigger_mode": "single"}}"#);
    let run = session(&cfg, GOLDEN_SCRIPT);
    (run.scope.framebuffer().serialize(), run.snapshots[0].bytes.clone())
}

fn golden_artifacts() -> Outcome {
    let (raw, pbm) = golden_run();
    let (_, pbm_again) = golden_run();
    let path = golden_path();
    if std::env::var_os("MINISCOPE_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &pbm).unwrap();
    }
    let golden = std::fs::read(&path).ok();
    let serialize_ok = raw.len() == LCD_TOTAL_DATA;
    let layout_ok = pbm.starts_with(PBM_HEADER) && pbm.len() == PBM_HEADER.len() + 1024;
    let len_ok = pbm.len() == PBM_EXPECTED_LEN;
    let golden_ok = golden.as_deref() == Some(&pbm[..]) && pbm == pbm_again;
    Outcome::check(
        serialize_ok && len_ok && layout_ok && golden_ok,
        format!(
            "serialize {} bytes; PBM {} bytes vs required {PBM_EXPECTED_LEN} (header {:?} is {} bytes + 1024 data); golden match: {golden_ok}",
            raw.len(),
            pbm.len(),
            std::str::from_utf8(PBM_HEADER).unwrap(),
            PBM_HEADER.len(),
        ),
    )
}

// 10 --------------------------------------------------------------------------

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    let script = dir.path().join("script.jsonl");
    std::fs::write(&cfg, r#"{"sources": ["cal_pin", {"signal": {"kind": "sine", "frequency": 1200.0, "amplitude": 1.2, "offset": 1.65}}],
        "front_end": {"jumper": ["probe0","probe1","probe0","probe1","probe0","probe1","probe0","probe1"]},
        "initial": {"ch_enabled": [true, true], "trigger_mode": "triggered_falling"}}"#)
        .unwrap();
    std::fs::write(&script, "{\"at_tick\": 30000, \"action\": \"key_press\", \"key\": \"K2\"}\n{\"at_tick\": 90000, \"action\": \"key_press\", \"key\": \"K6\"}\n").unwrap();
    let run = |tag: &str| {
        let outputs = Outputs {
            csv: Some(dir.path().join(format!("{tag}.csv"))),
            snapshot: Some(dir.path().join(format!("{tag}.pbm"))),
            ticks: Some(400_000),
        };
        run_headless(Some(&cfg), Some(&script), false, &outputs).unwrap();
        (std::fs::read(outputs.csv.unwrap()).unwrap(), std::fs::read(outputs.snapshot.unwrap()).unwrap())
    };
    let (csv_a, pbm_a) = run("a");
    let (csv_b, pbm_b) = run("b");
    Outcome::check(
        csv_a == csv_b && pbm_a == pbm_b && !csv_a.is_empty(),
        format!("CSV {} bytes identical: {}, PBM {} bytes identical: {}", csv_a.len(), csv_a == csv_b, pbm_a.len(), pbm_a == pbm_b),
    )
}

fn main() {
    let failed = run_all(&[
        (1, "pixel-map bijection", pixel_map_bijection),
        (2, "calibration-signal reproduction", cal_signal_reproduction),
        (3, "corruption boundary", corruption_boundary),
        (4, "edge-trigger stability", edge_trigger_stability),
        (5, "FSM trace property", fsm_trace_property),
        (6, "dual-probe de-interleave", dual_deinterleave),
        (7, "calibration procedure", calibration_procedure),
        (8, "probe-attenuation failure", probe_attenuation_failure),
        (9, "golden artifacts", golden_artifacts),
        (10, "determinism", determinism),
    ]);
    if failed > 0 {
        std::process::exit(1);
    }
}

