//! Piecewise-constant programming and read waveforms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, KahanSum};

/// Relative slack when deciding how many whole timesteps fit in a segment.
const STEP_COUNT_SLACK: f64 = 1e-9;

/// Constant voltage held for a duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub voltage: f64,
    pub duration: f64,
}

impl Segment {
    pub fn new(voltage: f64, duration: f64) -> Result<Self> {
        if !voltage.is_finite() {
            return Err(Error::Domain("segment voltage must be finite"));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Domain("segment duration must be positive"));
        }
        Ok(Segment { voltage, duration })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplePolicy {
    /// Sample the current at the peak segment of the read ramp.
    #[default]
    AtPeak,
}

/// Marks the segment whose current is sampled for one read-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadMark {
    pub segment: usize,
    /// Number of programming pulses applied before this read.
    pub pulse_index: usize,
    pub policy: SamplePolicy,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    pub segments: Vec<Segment>,
    pub read_marks: Vec<ReadMark>,
}

impl Waveform {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, seg: Segment) {
        self.segments.push(seg);
    }

    /// Append another waveform, shifting its read marks and overriding their
    /// pulse index with `pulse_index` when given.
    pub fn append(&mut self, other: &Waveform, pulse_index: Option<usize>) {
        let base = self.segments.len();
        self.segments.extend_from_slice(&other.segments);
        self.read_marks.extend(other.read_marks.iter().map(|m| ReadMark {
            segment: m.segment + base,
            pulse_index: pulse_index.unwrap_or(m.pulse_index),
            policy: m.policy,
        }));
    }

    /// Sum of segment durations (compensated).
    pub fn total_duration(&self) -> f64 {
        let mut acc = KahanSum::default();
        for s in &self.segments {
            acc.add(s.duration);
        }
        acc.value()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            Segment::new(s.voltage, s.duration)?;
        }
        let mut last = None;
        for m in &self.read_marks {
            if m.segment >= self.segments.len() {
                return Err(invalid(format!("read mark points at missing segment {}", m.segment)));
            }
            if last.is_some_and(|l| m.segment <= l) {
                return Err(invalid("read marks must be strictly increasing"));
            }
            last = Some(m.segment);
        }
        Ok(())
    }

    /// Largest `|v|` over the segments.
    pub fn peak_magnitude(&self) -> f64 {
        self.segments.iter().fold(0.0, |m, s| m.max(s.voltage.abs()))
    }
}

/// `n` pulses of `amp` volts and `width` seconds separated by `gap` seconds at 0 V.
pub fn pulse_train(n: usize, amp: f64, width: f64, gap: f64) -> Result<Waveform> {
    if n == 0 {
        return Err(Error::Domain("pulse train needs at least one pulse"));
    }
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::Domain("pulse gap must be non-negative"));
    }
    let pulse = Segment::new(amp, width)?;
    let mut w = Waveform::new();
    for k in 0..n {
        if k > 0 && gap > 0.0 {
            w.push(Segment {
                voltage: 0.0,
                duration: gap,
            });
        }
        w.push(pulse);
    }
    Ok(w)
}

/// Triangular 0 -> `v_read` -> 0 ramp lasting `t_read`, rendered as
/// constant segments of width close to `t_s` at the midpoint voltage.
///
/// The first segment of maximum voltage carries the read mark.
pub fn read_event(v_read: f64, t_read: f64, t_s: f64) -> Result<Waveform> {
    if !(v_read > 0.0 && v_read.is_finite()) {
        return Err(Error::Domain("read voltage must be positive"));
    }
    if !(t_read > 0.0 && t_read.is_finite()) || !(t_s > 0.0) {
        return Err(Error::Domain("read duration and timestep must be positive"));
    }
    if t_s > t_read {
        return Err(Error::Domain("read timestep exceeds read duration"));
    }
    let n = (math::round(t_read / t_s) as usize).max(1);
    let width = t_read / n as f64;
    let mut w = Waveform::new();
    let mut peak = (0usize, f64::NEG_INFINITY);
    for k in 0..n {
        let x = (2 * k + 1) as f64 / n as f64;
        let v = v_read * (1.0 - (x - 1.0).abs());
        if v > peak.1 {
            peak = (k, v);
        }
        w.push(Segment {
            voltage: v,
            duration: width,
        });
    }
    w.read_marks.push(ReadMark {
        segment: peak.0,
        pulse_index: 0,
        policy: SamplePolicy::AtPeak,
    });
    Ok(w)
}

/// Split every segment into steps of `t_s` plus one trailing remainder step.
///
/// The remainder is computed with a fused multiply-add so that the exact sum
/// of the pieces equals the original duration. Read marks move to the first
/// piece of their segment.
pub fn discretize(w: &Waveform, t_s: f64) -> Result<Waveform> {
    if !(t_s > 0.0 && t_s.is_finite()) {
        return Err(Error::Domain("timestep must be positive"));
    }
    let mut out = Waveform {
        segments: Vec::with_capacity(w.segments.len()),
        read_marks: Vec::with_capacity(w.read_marks.len()),
    };
    let mut marks = w.read_marks.iter().peekable();
    for (idx, seg) in w.segments.iter().enumerate() {
        let first = out.segments.len();
        split_segment(*seg, t_s, &mut out.segments);
        while let Some(m) = marks.next_if(|m| m.segment == idx) {
            out.read_marks.push(ReadMark {
                segment: first,
                ..*m
            });
        }
    }
    Ok(out)
}

fn split_segment(seg: Segment, t_s: f64, out: &mut Vec<Segment>) {
    let d = seg.duration;
    let ratio = d / t_s;
    if ratio <= 1.0 + STEP_COUNT_SLACK {
        out.push(seg);
        return;
    }
    let pieces = math::ceil(ratio * (1.0 - STEP_COUNT_SLACK)).max(1.0);
    let full = pieces - 1.0;
    // d - full * t_s is a multiple of ulp(t_s) below 2 t_s, hence exact.
    let rest = math::fma(-full, t_s, d);
    for _ in 0..full as usize {
        out.push(Segment {
            voltage: seg.voltage,
            duration: t_s,
        });
    }
    out.push(Segment {
        voltage: seg.voltage,
        duration: rest,
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacterizationMode {
    PulseCount,
    PulseWidth,
    Amplitude,
}

impl CharacterizationMode {
    pub fn name(self) -> &'static str {
        match self {
            CharacterizationMode::PulseCount => "pulse_count",
            CharacterizationMode::PulseWidth => "pulse_width",
            CharacterizationMode::Amplitude => "amplitude",
        }
    }
}

/// Parameters of a write/read characterization routine.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationPlan {
    pub mode: CharacterizationMode,
    pub v_bias: Vec<f64>,
    /// Programming pulse widths.
    pub widths: Vec<f64>,
    pub n_pulses: usize,
    pub v_read: f64,
    pub t_read: f64,
    /// Rendering step of the triangular read.
    pub read_step: f64,
    /// Pulse-to-pulse period; `None` means `t_read + width`.
    pub period: Option<f64>,
    /// Read events after each programming pulse.
    pub reads_per_pulse: usize,
}

impl CharacterizationPlan {
    pub fn new(mode: CharacterizationMode, v_bias: Vec<f64>, widths: Vec<f64>, n_pulses: usize) -> Self {
        CharacterizationPlan {
            mode,
            v_bias,
            widths,
            n_pulses,
            v_read: 0.5,
            t_read: 1e-3,
            read_step: 1e-6,
            period: None,
            reads_per_pulse: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(invalid("n_pulses must be at least 1"));
        }
        if self.v_bias.is_empty() || self.widths.is_empty() {
            return Err(invalid("plan needs at least one bias and one width"));
        }
        if self.reads_per_pulse == 0 {
            return Err(invalid("reads_per_pulse must be at least 1"));
        }
        if self.v_bias.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(invalid("programming biases must be finite and non-zero"));
        }
        if self.widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid("pulse widths must be positive"));
        }
        if !(self.v_read > 0.0) || !(self.t_read > 0.0) || !(self.read_step > 0.0) {
            return Err(invalid("read voltage, duration and step must be positive"));
        }
        Ok(())
    }

    /// Read voltage must sit inside the model's read guard.
    pub fn check_guard(&self, v_guard: f64) -> Result<()> {
        if self.v_read > v_guard {
            return Err(invalid(format!(
                "read voltage {} V exceeds the model read guard {} V",
                self.v_read, v_guard
            )));
        }
        Ok(())
    }

    fn series_points(&self) -> Vec<(f64, f64)> {
        match self.mode {
            CharacterizationMode::PulseWidth => {
                self.widths.iter().map(|&w| (self.v_bias[0], w)).collect()
            }
            CharacterizationMode::PulseCount | CharacterizationMode::Amplitude => {
                self.v_bias.iter().map(|&v| (v, self.widths[0])).collect()
            }
        }
    }
}

/// One labelled series of a characterization run.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationSeries {
    pub label: String,
    pub v_bias: f64,
    pub width: f64,
    pub period: f64,
    pub waveform: Waveform,
}

/// Build one waveform per series: an initial read, then `n_pulses` periods of
/// programming pulse, read(s) and zero-volt padding up to the period.
///
/// Each series is meant to start from the same initial state.
pub fn build_characterization(plan: &CharacterizationPlan) -> Result<Vec<CharacterizationSeries>> {
    plan.validate()?;
    let read = read_event(plan.v_read, plan.t_read, plan.read_step)?;
    let reads_len = plan.t_read * plan.reads_per_pulse as f64;
    plan.series_points()
        .into_iter()
        .map(|(v, width)| {
            let period = plan.period.unwrap_or(reads_len + width);
            let pad = period - (reads_len + width);
            if pad < -1e-12 * period {
                return Err(invalid(format!(
                    "period {period} s is shorter than read time plus pulse width {width} s"
                )));
            }
            let mut w = Waveform::new();
            w.append(&read, Some(0));
            for k in 1..=plan.n_pulses {
                w.push(Segment::new(v, width)?);
                for _ in 0..plan.reads_per_pulse {
                    w.append(&read, Some(k));
                }
                if pad > 1e-12 * period {
                    w.push(Segment {
                        voltage: 0.0,
                        duration: pad,
                    });
                }
            }
            Ok(CharacterizationSeries {
                label: format!("{}:v={}:w={}", plan.mode.name(), v, width),
                v_bias: v,
                width,
                period,
                waveform: w,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pulse_train_examples() {
        let w = pulse_train(1, 0.8, 100e-6, 0.0).unwrap();
        assert_eq!(w.segments, vec![Segment { voltage: 0.8, duration: 100e-6 }]);

        let w = pulse_train(100, 1.8, 100e-6, 1e-3).unwrap();
        assert_eq!(w.segments.len(), 199);
        let expect = 100.0 * 100e-6 + 99.0 * 1e-3;
        assert!((w.total_duration() - expect).abs() < 1e-15);

        let w = pulse_train(3, -0.8, 1e-6, 0.0).unwrap();
        assert_eq!(w.segments.len(), 3);
        assert!((w.total_duration() - 3e-6).abs() < 1e-20);
        assert!(pulse_train(0, 1.0, 1e-6, 0.0).is_err());
        assert!(pulse_train(1, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn read_event_examples() {
        let w = read_event(0.5, 1e-3, 1e-6).unwrap();
        assert_eq!(w.segments.len(), 1000);
        let peak = w.segments[w.read_marks[0].segment].voltage;
        assert!((peak - 0.5).abs() < 1e-3);
        assert!(w.segments.iter().all(|s| s.voltage <= 0.5 && s.voltage > 0.0));

        let coarse = read_event(0.5, 1e-3, 0.5e-3).unwrap();
        assert_eq!(coarse.segments.len(), 2);
        assert_eq!(coarse.segments[0].voltage, 0.25);
        assert_eq!(coarse.segments[1].voltage, 0.25);
        assert_eq!(coarse.read_marks[0].segment, 0);

        assert!(read_event(0.0, 1e-3, 1e-6).is_err());
        assert!(read_event(0.5, 1e-3, 2e-3).is_err());
    }

    #[test]
    fn discretize_examples() {
        let w = pulse_train(1, 0.8, 100e-6, 0.0).unwrap();
        let d = discretize(&w, 1e-6).unwrap();
        assert_eq!(d.segments.len(), 100);
        assert!(d.segments.iter().all(|s| (s.duration - 1e-6).abs() < 1e-18));

        let d = discretize(&w, 33e-6).unwrap();
        let durs: Vec<f64> = d.segments.iter().map(|s| s.duration).collect();
        assert_eq!(durs.len(), 4);
        assert_eq!(&durs[..3], &[33e-6; 3]);
        assert!((durs[3] - 1e-6).abs() < 1e-18);

        let d = discretize(&w, 200e-6).unwrap();
        assert_eq!(d.segments, w.segments);
        assert!(discretize(&w, 0.0).is_err());
    }

    #[test]
    fn discretize_moves_marks_to_first_piece() {
        let mut w = pulse_train(1, 0.8, 10e-6, 0.0).unwrap();
        w.append(&read_event(0.5, 4e-6, 2e-6).unwrap(), Some(1));
        let d = discretize(&w, 1e-6).unwrap();
        assert_eq!(d.segments.len(), 10 + 4);
        let m = d.read_marks[0];
        assert_eq!(m.pulse_index, 1);
        assert_eq!(d.segments[m.segment].voltage, 0.25);
        assert_eq!(m.segment, 10);
    }

    #[test]
    fn width_plan_periods_match_captions() {
        let plan = CharacterizationPlan::new(
            CharacterizationMode::PulseWidth,
            vec![0.8],
            vec![1e-6, 10e-6, 100e-6],
            3,
        );
        let series = build_characterization(&plan).unwrap();
        let periods: Vec<f64> = series.iter().map(|s| s.period).collect();
        for (p, e) in periods.iter().zip([1.001e-3, 1.01e-3, 1.1e-3]) {
            assert!((p - e).abs() < 1e-15, "{p} vs {e}");
        }
        for s in &series {
            assert_eq!(s.waveform.read_marks.len(), 4);
            let idx: Vec<usize> = s.waveform.read_marks.iter().map(|m| m.pulse_index).collect();
            assert_eq!(idx, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn count_and_amplitude_plans() {
        let plan = CharacterizationPlan::new(
            CharacterizationMode::PulseCount,
            vec![1.5, 1.8, 2.0],
            vec![100e-6],
            100,
        );
        let s = build_characterization(&plan).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].v_bias, 1.8);
        assert_eq!(s[0].waveform.read_marks.len(), 101);

        let pos = CharacterizationPlan::new(CharacterizationMode::Amplitude, vec![0.6, 0.7, 0.8], vec![100e-6], 2);
        let neg = CharacterizationPlan { v_bias: vec![-0.6, -0.7, -0.8], ..pos.clone() };
        let a = build_characterization(&pos).unwrap();
        let b = build_characterization(&neg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.waveform.segments.len(), y.waveform.segments.len());
            for (p, q) in x.waveform.segments.iter().zip(&y.waveform.segments) {
                if p.voltage > 0.5 {
                    assert_eq!(p.voltage, -q.voltage);
                } else {
                    assert_eq!(p, q);
                }
            }
        }
    }

    #[test]
    fn inconsistent_period_rejected() {
        let mut plan = CharacterizationPlan::new(CharacterizationMode::PulseCount, vec![0.8], vec![100e-6], 2);
        plan.period = Some(1.05e-3);
        assert!(build_characterization(&plan).is_err());
        plan.period = Some(2e-3);
        let s = build_characterization(&plan).unwrap();
        let segs = &s[0].waveform.segments;
        assert!(segs.iter().any(|x| x.voltage == 0.0 && (x.duration - 0.9e-3).abs() < 1e-12));
    }

    #[test]
    fn guard_check() {
        let plan = CharacterizationPlan::new(CharacterizationMode::PulseCount, vec![0.8], vec![100e-6], 1);
        assert!(plan.check_guard(0.5).is_ok());
        assert!(plan.check_guard(0.4).is_err());
    }
}
