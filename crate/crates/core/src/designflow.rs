//! Verification flow for a reconfigurable NAND gate built from 1T1R cells.
//!
//! Gate network: two pMOS-type 1T1R pull-ups in parallel from VDD to OUT
//! (pMOS source at VDD, gates A and B, memristors R_A and R_B), and a pull-down
//! OUT -> R_C -> nMOS (gate A) -> nMOS (gate B) -> ground.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::primitives::cell::NODE_XTOL;
use crate::primitives::{dc_solve_series, Channel, Load, MosfetParams, OneT1R, Orientation, Ratings};
use crate::roots::decreasing_root;

/// Device order used by every per-device list in this module.
pub const DEVICE_NAMES: [&str; 3] = ["R_A", "R_B", "R_C"];

/// Largest device count accepted by [`corner_enumerate`].
pub const MAX_CORNER_DEVICES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    pub vdd: f64,
    pub pull_up_a: MosfetParams,
    pub pull_up_b: MosfetParams,
    /// Pull-down FET driven by input A, between R_C and the extra FET.
    pub pull_down: MosfetParams,
    /// Pull-down FET driven by input B, to ground.
    pub pull_down_extra: MosfetParams,
    pub r_a: Load,
    pub r_b: Load,
    pub r_c: Load,
}

impl GateConfig {
    /// Illustrative 1.2 V gate with 4.5-6 kOhm devices at mid-range.
    pub fn example() -> Self {
        let p = ModelParams::exp_4k5_6k();
        let mid = Load::Memristor { params: p, r: 5250.0 };
        let r = Ratings::uniform(1.8);
        GateConfig {
            vdd: 1.2,
            pull_up_a: MosfetParams::pmos(0.35, 0.6, 2e-3, 0.02, r),
            pull_up_b: MosfetParams::pmos(0.35, 0.6, 2e-3, 0.02, r),
            pull_down: MosfetParams::nmos(0.35, 0.6, 4e-3, 0.02, r),
            pull_down_extra: MosfetParams::nmos(0.35, 0.6, 4e-3, 0.02, r),
            r_a: mid,
            r_b: mid,
            r_c: mid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vdd > 0.0 && self.vdd.is_finite()) {
            return Err(invalid("gate supply must be positive"));
        }
        for (m, ch) in [
            (&self.pull_up_a, Channel::P),
            (&self.pull_up_b, Channel::P),
            (&self.pull_down, Channel::N),
            (&self.pull_down_extra, Channel::N),
        ] {
            m.validate()?;
            if m.channel != ch {
                return Err(invalid("NAND needs pMOS pull-ups and nMOS pull-downs"));
            }
        }
        for l in self.loads() {
            l.validate()?;
        }
        Ok(())
    }

    pub fn loads(&self) -> [Load; 3] {
        [self.r_a, self.r_b, self.r_c]
    }

    pub fn states(&self) -> [f64; 3] {
        self.loads().map(|l| l.state())
    }

    pub fn with_states(&self, s: &[f64]) -> Self {
        GateConfig {
            r_a: self.r_a.with_state(s[0]),
            r_b: self.r_b.with_state(s[1]),
            r_c: self.r_c.with_state(s[2]),
            ..*self
        }
    }

    fn pull_up(&self, fet: MosfetParams, load: Load, v_in: f64, out: f64) -> Result<f64> {
        let cell = OneT1R {
            fet,
            orientation: Orientation::DrainToRram,
            load,
            v_word: self.vdd,
            v_bit: out,
            v_gate: v_in,
            v_bulk: self.vdd,
        };
        Ok(dc_solve_series(&cell)?.i)
    }

    /// Current from OUT to ground through the pull-down stack.
    fn pull_down_current(&self, va: f64, vb: f64, out: f64) -> Result<f64> {
        if out <= 0.0 {
            return Ok(0.0);
        }
        let mut err = None;
        let upper = |d: f64, err: &mut Option<Error>| -> f64 {
            // R_C from OUT to c, then the A-driven FET from c (drain) to d (source).
            let h = |c: f64| self.r_c.current(out - c) - self.pull_down.current(va, d, c);
            match decreasing_root(h, d, out, NODE_XTOL) {
                Ok(c) => self.r_c.current(out - c),
                Err(e) => {
                    *err = Some(e);
                    0.0
                }
            }
        };
        let g = |d: f64| upper(d, &mut err) - self.pull_down_extra.current(vb, 0.0, d);
        let d = decreasing_root(g, 0.0, out, NODE_XTOL)?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(self.pull_down_extra.current(vb, 0.0, d))
    }

    /// Output voltage for inputs `(va, vb)`.
    pub fn output(&self, va: f64, vb: f64) -> Result<f64> {
        if !(va.is_finite() && vb.is_finite()) {
            return Err(Error::Domain("gate inputs must be finite"));
        }
        let mut err = None;
        let mut h = |out: f64| -> f64 {
            let r = (|| {
                let up = self.pull_up(self.pull_up_a, self.r_a, va, out)? + self.pull_up(self.pull_up_b, self.r_b, vb, out)?;
                Ok::<f64, Error>(up - self.pull_down_current(va, vb, out)?)
            })();
            r.unwrap_or_else(|e| {
                err.get_or_insert(e);
                0.0
            })
        };
        let out = decreasing_root(&mut h, 0.0, self.vdd, NODE_XTOL)?;
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// Output voltage over the input grid; rows follow `va_grid`, columns `vb_grid`.
pub fn nand_surface(g: &GateConfig, va_grid: &[f64], vb_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    g.validate()?;
    let inside = |v: &f64| (0.0..=g.vdd).contains(v);
    if !va_grid.iter().all(inside) || !vb_grid.iter().all(inside) {
        return Err(Error::Domain("gate inputs must lie within [0, VDD]"));
    }
    va_grid
        .iter()
        .map(|&va| vb_grid.iter().map(|&vb| g.output(va, vb)).collect())
        .collect()
}

/// All `2^n` min/max assignments; bit `d` of the index selects the maximum of device `d`.
pub fn corner_enumerate(ranges: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    if ranges.len() > MAX_CORNER_DEVICES {
        return Err(Error::Domain("too many devices for corner enumeration"));
    }
    Ok((0..1usize << ranges.len())
        .map(|k| {
            ranges
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| if k >> d & 1 == 1 { hi } else { lo })
                .collect()
        })
        .collect())
}

/// States of one device admissible in one corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CornerDemand {
    Interval(f64, f64),
    Empty,
}

/// Per-device hull of the corner demands; any empty demand makes the device infeasible.
///
/// `demands[k][d]` is the demand of corner `k` on device `d`.
pub fn required_range_union(demands: &[Vec<CornerDemand>]) -> Result<Vec<CornerDemand>> {
    let Some(first) = demands.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if demands.iter().any(|c| c.len() != n) {
        return Err(Error::Domain("every corner must cover the same devices"));
    }
    Ok((0..n)
        .map(|d| {
            demands.iter().fold(None, |acc: Option<CornerDemand>, c| match (acc, c[d]) {
                (Some(CornerDemand::Empty), _) | (_, CornerDemand::Empty) => Some(CornerDemand::Empty),
                (None, x) => Some(x),
                (Some(CornerDemand::Interval(a, b)), CornerDemand::Interval(lo, hi)) => {
                    Some(CornerDemand::Interval(a.min(lo), b.max(hi)))
                }
            })
        })
        .map(|x| x.unwrap_or(CornerDemand::Empty))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    /// Range the design needs, `[A, B]`.
    pub desired: (f64, f64),
    /// Range the device supports, `[X, Y]`.
    pub nominal: (f64, f64),
    /// Percentile margin applied at `X`, and at `Y` unless `q_high` is set.
    pub q: f64,
    pub q_high: Option<f64>,
    /// Percentile level of `q`.
    pub alpha: f64,
}

impl RangeSpec {
    pub fn new(desired: (f64, f64), nominal: (f64, f64), q: f64, alpha: f64) -> Self {
        RangeSpec {
            desired,
            nominal,
            q,
            q_high: None,
            alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.desired;
        let (x, y) = self.nominal;
        let q_hi = self.q_high.unwrap_or(self.q);
        if !(a <= b && x <= y) {
            return Err(invalid("ranges must be ordered"));
        }
        if !(self.q >= 0.0 && q_hi >= 0.0) {
            return Err(invalid("uncertainty margins must be non-negative"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub pass: bool,
    /// `A - (X + q)`.
    pub margin_low: f64,
    /// `(Y - q) - B`.
    pub margin_high: f64,
    pub yield_bound: f64,
    pub reason: Option<&'static str>,
}

/// Containment of the desired range in the margin-shrunk nominal range.
pub fn uncertainty_check(r: &RangeSpec) -> Result<UncertaintyReport> {
    r.validate()?;
    let (a, b) = r.desired;
    let (x, y) = r.nominal;
    let lo = x + r.q;
    let hi = y - r.q_high.unwrap_or(r.q);
    let margin_low = a - lo;
    let margin_high = hi - b;
    let (pass, reason) = if lo > hi {
        (false, Some("uncertainty margins leave no usable nominal window"))
    } else if margin_low < 0.0 {
        (false, Some("desired minimum below the guaranteed minimum"))
    } else if margin_high < 0.0 {
        (false, Some("desired maximum above the guaranteed maximum"))
    } else {
        (true, None)
    };
    Ok(UncertaintyReport {
        pass,
        margin_low,
        margin_high,
        yield_bound: r.alpha * r.alpha,
        reason,
    })
}

/// Output band required at one input point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoCheck {
    pub va: f64,
    pub vb: f64,
    pub min_out: f64,
    pub max_out: f64,
}

impl IoCheck {
    fn holds(&self, out: f64) -> bool {
        self.min_out <= out && out <= self.max_out
    }
}

/// NAND truth table: high outputs at least `hi * vdd`, the low output at most `lo * vdd`.
pub fn logic_checks(vdd: f64, hi: f64, lo: f64) -> Vec<IoCheck> {
    let high = |va, vb| IoCheck {
        va,
        vb,
        min_out: hi * vdd,
        max_out: vdd,
    };
    vec![
        high(0.0, 0.0),
        high(0.0, vdd),
        high(vdd, 0.0),
        IoCheck {
            va: vdd,
            vb: vdd,
            min_out: 0.0,
            max_out: lo * vdd,
        },
    ]
}

/// Runs independent corner evaluations; results keep index order.
pub trait CornerExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl CornerExecutor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowConfig {
    pub gate: GateConfig,
    /// Per device: `desired` seeds the corner windows, `nominal` bounds the device.
    pub ranges: [RangeSpec; 3],
    pub nominal_checks: Vec<IoCheck>,
    pub corner_checks: Vec<IoCheck>,
    pub sweep_points: usize,
    pub max_iters: usize,
}

impl WorkflowConfig {
    pub fn new(gate: GateConfig, ranges: [RangeSpec; 3]) -> Self {
        let checks = logic_checks(gate.vdd, 0.9, 0.1);
        WorkflowConfig {
            gate,
            ranges,
            nominal_checks: checks.clone(),
            corner_checks: checks,
            sweep_points: 25,
            max_iters: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Nominal,
    Corners,
    Uncertainty,
    Passed,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Nominal => "nominal",
            Stage::Corners => "corners",
            Stage::Uncertainty => "uncertainty",
            Stage::Passed => "passed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowReport {
    /// Stage that decided the outcome.
    pub stage: Stage,
    pub pass: bool,
    /// Corner-stage iterations run.
    pub iterations: usize,
    pub nominal_outputs: Vec<f64>,
    /// Final corner windows per device.
    pub windows: Vec<(f64, f64)>,
    pub demanded: Vec<CornerDemand>,
    /// `(corner, device)` pairs with empty demand in the last iteration.
    pub failing_corners: Vec<(usize, usize)>,
    pub uncertainty: Vec<Option<UncertaintyReport>>,
    pub manual_intervention: bool,
}

fn evaluate(g: &GateConfig, states: &[f64], checks: &[IoCheck]) -> Result<bool> {
    let gate = g.with_states(states);
    for c in checks {
        if !c.holds(gate.output(c.va, c.vb)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sweep_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect()
}

/// Nominal check, corner sweep with window widening, range union, then the
/// uncertainty check per device.
pub fn run_workflow<E: CornerExecutor>(cfg: &WorkflowConfig, exec: &E) -> Result<WorkflowReport> {
    cfg.gate.validate()?;
    for r in &cfg.ranges {
        r.validate()?;
        if !(r.desired.0 > 0.0 && r.nominal.0 > 0.0) {
            return Err(invalid("resistive ranges must be positive"));
        }
    }
    if cfg.max_iters == 0 || cfg.sweep_points == 0 {
        return Err(invalid("workflow needs at least one iteration and one sweep point"));
    }
    let n_dev = cfg.ranges.len();
    let mid: Vec<f64> = cfg.ranges.iter().map(|r| 0.5 * (r.nominal.0 + r.nominal.1)).collect();
    let gate_mid = cfg.gate.with_states(&mid);
    let nominal_outputs = cfg
        .nominal_checks
        .iter()
        .map(|c| gate_mid.output(c.va, c.vb))
        .collect::<Result<Vec<_>>>()?;
    let mut report = WorkflowReport {
        stage: Stage::Nominal,
        pass: false,
        iterations: 0,
        nominal_outputs,
        windows: cfg.ranges.iter().map(|r| r.desired).collect(),
        demanded: Vec::new(),
        failing_corners: Vec::new(),
        uncertainty: vec![None; n_dev],
        manual_intervention: false,
    };
    let nominal_ok = cfg
        .nominal_checks
        .iter()
        .zip(&report.nominal_outputs)
        .all(|(c, &o)| c.holds(o));
    if !nominal_ok {
        return Ok(report);
    }

    report.stage = Stage::Corners;
    loop {
        report.iterations += 1;
        let corners = corner_enumerate(&report.windows)?;
        let windows = report.windows.clone();
        let jobs = corners.len() * n_dev;
        let results = exec.map(jobs, |job| -> Result<CornerDemand> {
            let (k, d) = (job / n_dev, job % n_dev);
            let mut states = corners[k].clone();
            let mut hull: Option<(f64, f64)> = None;
            for x in sweep_grid(windows[d].0, windows[d].1, cfg.sweep_points) {
                states[d] = x;
                if evaluate(&cfg.gate, &states, &cfg.corner_checks)? {
                    hull = Some(hull.map_or((x, x), |(a, b)| (a.min(x), b.max(x))));
                }
            }
            Ok(hull.map_or(CornerDemand::Empty, |(a, b)| CornerDemand::Interval(a, b)))
        });
        let flat = results.into_iter().collect::<Result<Vec<_>>>()?;
        let per_corner: Vec<Vec<CornerDemand>> = flat.chunks(n_dev).map(|c| c.to_vec()).collect();
        report.failing_corners = flat
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == CornerDemand::Empty)
            .map(|(j, _)| (j / n_dev, j % n_dev))
            .collect();
        report.demanded = required_range_union(&per_corner)?;
        let infeasible: Vec<usize> = (0..n_dev).filter(|&d| report.demanded[d] == CornerDemand::Empty).collect();
        if infeasible.is_empty() {
            break;
        }
        if report.iterations == cfg.max_iters {
            report.manual_intervention = true;
            return Ok(report);
        }
        for d in infeasible {
            let (lo, hi) = report.windows[d];
            let (c, half) = (0.5 * (lo + hi), (hi - lo).max(1e-3 * lo));
            report.windows[d] = ((c - half).max(0.5 * lo), c + half);
        }
    }

    report.stage = Stage::Uncertainty;
    let mut all = true;
    for (d, r) in cfg.ranges.iter().enumerate() {
        let CornerDemand::Interval(a, b) = report.demanded[d] else {
            unreachable!("infeasible devices return earlier")
        };
        let u = uncertainty_check(&RangeSpec { desired: (a, b), ..*r })?;
        all &= u.pass;
        report.uncertainty[d] = Some(u);
    }
    if all {
        report.stage = Stage::Passed;
        report.pass = true;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logic_levels() {
        let g = GateConfig::example();
        let vdd = g.vdd;
        assert!(g.output(0.0, 0.0).unwrap() > 0.9 * vdd);
        assert!(g.output(vdd, vdd).unwrap() < 0.1 * vdd);
    }

    #[test]
    fn weaker_pull_up_never_raises_output() {
        let g = GateConfig::example();
        let a = g.with_states(&[4600.0, 5250.0, 5250.0]).output(0.6, 0.9).unwrap();
        let b = g.with_states(&[5900.0, 5250.0, 5250.0]).output(0.6, 0.9).unwrap();
        assert!(b <= a);
    }

    #[test]
    fn corners() {
        assert_eq!(corner_enumerate(&[(1.0, 2.0)]).unwrap(), vec![vec![1.0], vec![2.0]]);
        let c = corner_enumerate(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c[0], vec![1.0, 3.0, 5.0]);
        assert_eq!(c[5], vec![2.0, 3.0, 6.0]);
        assert!(corner_enumerate(&[(0.0, 1.0); 21]).is_err());
    }

    #[test]
    fn union_hull_and_infeasible() {
        use CornerDemand::*;
        let u = required_range_union(&[vec![Interval(2e3, 3e3)], vec![Interval(4e3, 5e3)]]).unwrap();
        assert_eq!(u, vec![Interval(2e3, 5e3)]);
        let u = required_range_union(&[vec![Interval(2e3, 3e3), Empty]]).unwrap();
        assert_eq!(u, vec![Interval(2e3, 3e3), Empty]);
    }

    #[test]
    fn uncertainty_examples() {
        let r = RangeSpec::new((2e3, 8e3), (1e3, 10e3), 500.0, 0.9);
        let u = uncertainty_check(&r).unwrap();
        assert!(u.pass);
        assert_eq!((u.margin_low, u.margin_high), (500.0, 1500.0));
        assert_eq!(u.yield_bound, 0.81);
        let u = uncertainty_check(&RangeSpec { q: 1500.0, ..r }).unwrap();
        assert!(!u.pass);
        let u = uncertainty_check(&RangeSpec { q: 6000.0, ..r }).unwrap();
        assert!(!u.pass && u.reason.unwrap().contains("no usable"));
        let u = uncertainty_check(&RangeSpec {
            q_high: Some(2000.0),
            ..r
        })
        .unwrap();
        assert!(u.pass && u.margin_high == 0.0);
    }
}
