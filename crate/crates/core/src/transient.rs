//! Fixed-timestep transient engine for a single device.

use alloc::vec::Vec;

use crate::error::Result;
use crate::math::KahanSum;
use crate::model::{DeviceState, ModelParams};
use crate::stimulus::{discretize, Waveform};

/// Default engine timestep (1 us).
pub const DEFAULT_TIMESTEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub v: f64,
    pub i: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadSample {
    /// Ordinal of the read within the run.
    pub event: usize,
    pub pulse_index: usize,
    pub v: f64,
    pub i: f64,
    /// State recovered from the sampled current through the device IV law.
    pub rs: f64,
    /// Plain `v / i` ratio at the sample.
    pub chord: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub reads: Vec<ReadSample>,
    pub final_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t_s: f64,
    /// Keep every `decimate`-th row; read samples are always kept.
    pub decimate: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            t_s: DEFAULT_TIMESTEP,
            decimate: 1,
        }
    }
}

/// Apply `w` to one device.
///
/// Each step records the current at the step start, then advances the state
/// with the closed-form update for the step's constant voltage.
pub fn run_device(p: &ModelParams, s0: DeviceState, w: &Waveform, opts: RunOptions) -> Result<Trace> {
    p.validate()?;
    w.validate()?;
    let steps = discretize(w, opts.t_s)?;
    let decimate = opts.decimate.max(1);
    let mut state = s0;
    let mut clock = KahanSum::default();
    let mut marks = steps.read_marks.iter().peekable();
    let mut trace = Trace {
        rows: Vec::with_capacity(steps.segments.len() / decimate + 1),
        reads: Vec::new(),
        final_r: s0.r,
    };
    for (k, seg) in steps.segments.iter().enumerate() {
        let i = p.current(state.r, seg.voltage)?;
        if k % decimate == 0 {
            trace.rows.push(TraceRow {
                t: clock.value(),
                v: seg.voltage,
                i,
                r: state.r,
            });
        }
        while let Some(m) = marks.next_if(|m| m.segment == k) {
            trace.reads.push(ReadSample {
                event: trace.reads.len(),
                pulse_index: m.pulse_index,
                v: seg.voltage,
                i,
                rs: p.resistance_from_current(seg.voltage, i)?,
                chord: seg.voltage / i,
            });
        }
        state.apply(p, seg.voltage, seg.duration)?;
        clock.add(seg.duration);
    }
    trace.final_r = state.r;
    Ok(trace)
}

/// `(pulse index, RS)` per read, in order.
pub fn extract_rs_series(tr: &Trace) -> Vec<(usize, f64)> {
    tr.reads.iter().map(|r| (r.pulse_index, r.rs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::{pulse_train, read_event, Segment};

    fn state(r: f64) -> DeviceState {
        DeviceState::new(r, 10e3, 17e3).unwrap()
    }

    #[test]
    fn zero_waveform_holds_state() {
        let p = ModelParams::exp_10k17k();
        let w = pulse_train(5, 0.0, 10e-6, 0.0).unwrap();
        let tr = run_device(&p, state(16_250.0), &w, RunOptions::default()).unwrap();
        assert_eq!(tr.rows.len(), 50);
        assert!(tr.rows.iter().all(|r| r.i == 0.0 && r.r == 16_250.0));
        assert_eq!(tr.final_r, 16_250.0);
    }

    #[test]
    fn times_strictly_increase_and_decimation() {
        let p = ModelParams::exp_10k17k();
        let w = pulse_train(3, 0.8, 10e-6, 5e-6).unwrap();
        let tr = run_device(&p, state(16_250.0), &w, RunOptions::default()).unwrap();
        assert!(tr.rows.windows(2).all(|x| x[0].t < x[1].t));
        let dec = run_device(&p, state(16_250.0), &w, RunOptions { t_s: 1e-6, decimate: 7 }).unwrap();
        assert_eq!(dec.rows.len(), tr.rows.len().div_ceil(7));
        assert_eq!(dec.final_r, tr.final_r);
    }

    #[test]
    fn reads_recover_constant_state() {
        let p = ModelParams::exp_10k17k();
        let mut w = Waveform::new();
        for k in 0..3 {
            w.append(&read_event(0.5, 1e-3, 1e-6).unwrap(), Some(k));
        }
        let tr = run_device(&p, state(12_345.0), &w, RunOptions::default()).unwrap();
        let rs = extract_rs_series(&tr);
        assert_eq!(rs.len(), 3);
        for (k, (idx, r)) in rs.iter().enumerate() {
            assert_eq!(*idx, k);
            assert!((r - 12_345.0).abs() / 12_345.0 < 1e-12);
        }
        let s = tr.reads[0];
        assert!((s.chord - s.v / s.i).abs() < 1e-9);
    }

    #[test]
    fn no_reads_is_empty_series() {
        let p = ModelParams::exp_10k17k();
        let w = pulse_train(1, 0.8, 10e-6, 0.0).unwrap();
        let tr = run_device(&p, state(16_250.0), &w, RunOptions::default()).unwrap();
        assert!(extract_rs_series(&tr).is_empty());
    }

    #[test]
    fn split_pulse_equals_single_step() {
        let p = ModelParams::exp_10k17k();
        let mut w = Waveform::new();
        w.push(Segment::new(0.8, 50e-6).unwrap());
        w.push(Segment::new(0.8, 50e-6).unwrap());
        let tr = run_device(&p, state(16_250.0), &w, RunOptions { t_s: 1.0, decimate: 1 }).unwrap();
        let single = p.analytical_step(16_250.0, 0.8, 100e-6).unwrap();
        assert!((tr.final_r - single).abs() / single < 1e-9);
    }

    #[test]
    fn refinement_is_stable_on_flat_segments() {
        let p = ModelParams::exp_10k17k();
        let w = pulse_train(20, -0.7, 100e-6, 50e-6).unwrap();
        let a = run_device(&p, state(16_250.0), &w, RunOptions { t_s: 2e-6, decimate: 1 }).unwrap();
        let b = run_device(&p, state(16_250.0), &w, RunOptions { t_s: 1e-6, decimate: 1 }).unwrap();
        assert!((a.final_r - b.final_r).abs() / b.final_r < 1e-9);
    }
}
