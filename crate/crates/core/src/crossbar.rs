//! Crossbar arrays of 1T1R or passive cells with distributed line resistance.
//!
//! WORD, SEL and bulk lines run along columns; BIT lines run along rows.
//! WORD drivers sit at row 0 and BIT drivers at column 0, so cell
//! `(rows - 1, cols - 1)` is the farthest from both.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{solve_dc, Bias, DcSolution, Element, Netlist, NodeId, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::model::{DeviceState, ModelParams};
use crate::primitives::{soac_check, FetBias, Load, MosfetParams, Orientation, Violation};
use crate::stimulus::{discretize, Waveform};

/// Resistance of a `length x width` strip of sheet resistance `rho_sq`.
pub fn line_resistance(width_um: f64, length_um: f64, rho_sq: f64) -> Result<f64> {
    if !(width_um > 0.0) || !width_um.is_finite() {
        return Err(Error::Domain("line width must be positive"));
    }
    if !(length_um >= 0.0 && rho_sq >= 0.0) {
        return Err(Error::Domain("line length and sheet resistance must be non-negative"));
    }
    Ok(length_um / width_um * rho_sq)
}

/// First-order RC time constant of a line.
pub fn rc_time_constant(r_line: f64, c_line: f64) -> f64 {
    r_line * c_line
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wire {
    pub width_um: f64,
    /// Length of one segment, i.e. the cell pitch along the line.
    pub pitch_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BulkMode {
    Column,
    Row,
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellTemplate {
    Passive,
    OneT1R {
        fet: MosfetParams,
        orientation: Orientation,
        sel_on: f64,
        sel_off: f64,
        v_bulk: f64,
    },
}

/// Bias of unselected lines in a passive array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassiveScheme {
    Floating,
    HalfSelect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossbarSpec {
    pub rows: usize,
    pub cols: usize,
    pub template: CellTemplate,
    pub rho_sq: f64,
    pub word_wire: Wire,
    pub bit_wire: Wire,
    pub bulk_mode: BulkMode,
    /// Include the segment from each driver to the first cell on its line.
    pub driver_segments: bool,
    pub passive_scheme: PassiveScheme,
}

impl CrossbarSpec {
    pub fn passive(rows: usize, cols: usize, rho_sq: f64, wire: Wire) -> Self {
        CrossbarSpec {
            rows,
            cols,
            template: CellTemplate::Passive,
            rho_sq,
            word_wire: wire,
            bit_wire: wire,
            bulk_mode: BulkMode::Common,
            driver_segments: true,
            passive_scheme: PassiveScheme::Floating,
        }
    }

    pub fn one_t1r(rows: usize, cols: usize, rho_sq: f64, wire: Wire, fet: MosfetParams, sel_on: f64) -> Self {
        CrossbarSpec {
            template: CellTemplate::OneT1R {
                fet,
                orientation: Orientation::SourceToRram,
                sel_on,
                sel_off: 0.0,
                v_bulk: 0.0,
            },
            bulk_mode: BulkMode::Column,
            ..Self::passive(rows, cols, rho_sq, wire)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("array needs at least one row and one column"));
        }
        if !(self.rho_sq >= 0.0) || !self.rho_sq.is_finite() {
            return Err(invalid("sheet resistance must be non-negative"));
        }
        for w in [self.word_wire, self.bit_wire] {
            if !(w.width_um > 0.0 && w.pitch_um >= 0.0) {
                return Err(invalid("wire widths must be positive"));
            }
        }
        if let CellTemplate::OneT1R { fet, .. } = &self.template {
            fet.validate()?;
        }
        Ok(())
    }

    pub fn word_segment(&self) -> f64 {
        self.word_wire.pitch_um / self.word_wire.width_um * self.rho_sq
    }

    pub fn bit_segment(&self) -> f64 {
        self.bit_wire.pitch_um / self.bit_wire.width_um * self.rho_sq
    }

    fn segments_on(&self, cells: usize) -> usize {
        if self.driver_segments {
            cells
        } else {
            cells - 1
        }
    }

    /// Driver-to-far-end resistance of one WORD line.
    pub fn word_line_total(&self) -> f64 {
        self.segments_on(self.rows) as f64 * self.word_segment()
    }

    /// Driver-to-far-end resistance of one BIT line.
    pub fn bit_line_total(&self) -> f64 {
        self.segments_on(self.cols) as f64 * self.bit_segment()
    }

    pub fn bulk_lines(&self) -> usize {
        match (self.template, self.bulk_mode) {
            (CellTemplate::Passive, _) => 0,
            (_, BulkMode::Column) => self.cols,
            (_, BulkMode::Row) => self.rows,
            (_, BulkMode::Common) => 1,
        }
    }

    pub fn terminal_count(&self) -> usize {
        let sel = match self.template {
            CellTemplate::Passive => 0,
            CellTemplate::OneT1R { .. } => self.cols,
        };
        self.rows + self.cols + sel + self.bulk_lines()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellDevice {
    Memristor(ModelParams),
    /// Fixed resistance equal to the cell state.
    Linear,
    /// No device in this position.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayCell {
    pub device: CellDevice,
    pub state: DeviceState,
}

impl ArrayCell {
    fn load(&self) -> Option<Load> {
        match self.device {
            CellDevice::Memristor(params) => Some(Load::Memristor {
                params,
                r: self.state.r,
            }),
            CellDevice::Linear => Some(Load::Linear(self.state.r)),
            CellDevice::Open => None,
        }
    }
}

/// Per-cell device states, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayState {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<ArrayCell>,
}

impl ArrayState {
    pub fn uniform(rows: usize, cols: usize, cell: ArrayCell) -> Self {
        ArrayState {
            rows,
            cols,
            cells: vec![cell; rows * cols],
        }
    }

    /// Linear cells with the given row-major resistances.
    pub fn linear(rows: usize, cols: usize, r: &[f64]) -> Result<Self> {
        if r.len() != rows * cols {
            return Err(invalid("resistance matrix has the wrong size"));
        }
        let cells = r
            .iter()
            .map(|&x| {
                Ok(ArrayCell {
                    device: CellDevice::Linear,
                    state: DeviceState::new(x, x, x)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ArrayState { rows, cols, cells })
    }

    pub fn get(&self, r: usize, c: usize) -> &ArrayCell {
        &self.cells[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut ArrayCell {
        &mut self.cells[r * self.cols + c]
    }

    pub fn resistances(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.state.r).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellNodes {
    /// WORD-line node at the cell.
    pub w: NodeId,
    /// BIT-line node at the cell.
    pub b: NodeId,
    /// Node between FET and device, 1T1R only.
    pub x: Option<NodeId>,
    pub device: Option<usize>,
    pub fet: Option<usize>,
}

/// Netlist of an array plus the index maps needed to bias and probe it.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarNetlist {
    pub net: Netlist,
    pub rows: usize,
    pub cols: usize,
    pub word: Vec<usize>,
    pub bit: Vec<usize>,
    pub sel: Vec<usize>,
    pub bulk: Vec<usize>,
    pub cells: Vec<CellNodes>,
}

impl CrossbarNetlist {
    pub fn cell(&self, r: usize, c: usize) -> &CellNodes {
        &self.cells[r * self.cols + c]
    }

    pub fn device_count(&self) -> usize {
        self.cells.iter().filter(|c| c.device.is_some()).count()
    }

    /// Voltage across the device of cell `(r, c)`.
    pub fn device_voltage(&self, r: usize, c: usize, v: &[f64]) -> f64 {
        let n = self.cell(r, c);
        v[n.x.unwrap_or(n.w)] - v[n.b]
    }

    fn set_state(&mut self, k: usize, r_new: f64) {
        if let Some(e) = self.cells[k].device {
            if let Element::Device { load, .. } = self.net.element_mut(e) {
                *load = load.with_state(r_new);
            }
        }
    }
}

fn check_dims(spec: &CrossbarSpec, state: &ArrayState) -> Result<()> {
    spec.validate()?;
    if state.rows != spec.rows || state.cols != spec.cols || state.cells.len() != spec.rows * spec.cols {
        return Err(invalid("array state does not match the array size"));
    }
    Ok(())
}

/// Nodes are numbered row by row and cell by cell to keep the nodal matrix banded.
pub fn build(spec: &CrossbarSpec, state: &ArrayState) -> Result<CrossbarNetlist> {
    check_dims(spec, state)?;
    let (rows, cols) = (spec.rows, spec.cols);
    let (g_word, g_bit) = (spec.word_segment(), spec.bit_segment());
    let mut net = Netlist::new();
    let word: Vec<usize> = (0..cols).map(|c| net.add_terminal(format!("WORD{c}"))).collect();
    let mut bit = Vec::with_capacity(rows);
    let mut prev_w: Vec<NodeId> = word.iter().map(|&t| net.terminal_node(t)).collect();
    let mut slots = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let bt = net.add_terminal(format!("BIT{r}"));
        bit.push(bt);
        let mut prev_b = net.terminal_node(bt);
        for (c, pw) in prev_w.iter_mut().enumerate() {
            let w = line_node(&mut net, *pw, g_word, spec.driver_segments || r > 0);
            *pw = w;
            let x = match (spec.template, state.get(r, c).device) {
                (CellTemplate::OneT1R { .. }, d) if d != CellDevice::Open => Some(net.add_node()),
                _ => None,
            };
            let b = line_node(&mut net, prev_b, g_bit, spec.driver_segments || c > 0);
            prev_b = b;
            slots.push((w, x, b));
        }
    }
    let mut sel = Vec::new();
    let mut bulk = Vec::new();
    if let CellTemplate::OneT1R { .. } = spec.template {
        sel = (0..cols).map(|c| net.add_terminal(format!("SEL{c}"))).collect();
        bulk = (0..spec.bulk_lines()).map(|k| net.add_terminal(format!("BULK{k}"))).collect();
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for (k, &(w, x, b)) in slots.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        let mut nodes = CellNodes {
            w,
            b,
            x,
            device: None,
            fet: None,
        };
        if let Some(load) = state.cells[k].load() {
            match spec.template {
                CellTemplate::Passive => {
                    nodes.device = Some(net.add(Element::Device { a: w, b, load }));
                }
                CellTemplate::OneT1R { fet, orientation, .. } => {
                    let x = x.expect("1T1R cell has an internal node");
                    let (d, s) = match orientation {
                        Orientation::SourceToRram => (w, x),
                        Orientation::DrainToRram => (x, w),
                    };
                    let bulk_t = match spec.bulk_mode {
                        BulkMode::Column => bulk[c],
                        BulkMode::Row => bulk[r],
                        BulkMode::Common => bulk[0],
                    };
                    nodes.fet = Some(net.add(Element::Mosfet {
                        d,
                        g: net.terminal_node(sel[c]),
                        s,
                        b: net.terminal_node(bulk_t),
                        fet,
                    }));
                    nodes.device = Some(net.add(Element::Device { a: x, b, load }));
                }
            }
        }
        cells.push(nodes);
    }
    Ok(CrossbarNetlist {
        net,
        rows,
        cols,
        word,
        bit,
        sel,
        bulk,
        cells,
    })
}

/// Next node along a line; collapses onto `prev` when there is no segment.
fn line_node(net: &mut Netlist, prev: NodeId, r_seg: f64, has_segment: bool) -> NodeId {
    if !has_segment || r_seg == 0.0 {
        return prev;
    }
    let n = net.add_node();
    net.add(Element::Conductance {
        a: prev,
        b: n,
        g: 1.0 / r_seg,
    });
    n
}

/// Terminal biases for driving `v` across cell `(r, c)`.
///
/// 1T1R arrays isolate cells with the select lines: positive `v` puts WORD_c at
/// `v`, BIT_r at 0 and every other BIT at `v`; negative `v` puts BIT_r at `|v|`
/// and everything else at 0. Passive arrays leave unselected lines floating or
/// hold them at `v / 2`.
pub fn op_biases(spec: &CrossbarSpec, xn: &CrossbarNetlist, r: usize, c: usize, v: f64) -> Vec<Bias> {
    let mut b = vec![Bias::Fixed(0.0); xn.net.terminals().len()];
    match spec.template {
        CellTemplate::Passive => {
            let other = match spec.passive_scheme {
                PassiveScheme::Floating => Bias::Floating,
                PassiveScheme::HalfSelect => Bias::Fixed(0.5 * v),
            };
            for (k, &t) in xn.word.iter().enumerate() {
                b[t] = if k == c { Bias::Fixed(v) } else { other };
            }
            for (k, &t) in xn.bit.iter().enumerate() {
                b[t] = if k == r { Bias::Fixed(0.0) } else { other };
            }
        }
        CellTemplate::OneT1R {
            sel_on,
            sel_off,
            v_bulk,
            ..
        } => {
            let (v_sel_word, v_sel_bit, v_other_bit) = if v >= 0.0 { (v, 0.0, v) } else { (0.0, -v, 0.0) };
            for (k, &t) in xn.word.iter().enumerate() {
                b[t] = Bias::Fixed(if k == c { v_sel_word } else { 0.0 });
            }
            for (k, &t) in xn.bit.iter().enumerate() {
                b[t] = Bias::Fixed(if k == r { v_sel_bit } else { v_other_bit });
            }
            for (k, &t) in xn.sel.iter().enumerate() {
                b[t] = Bias::Fixed(if k == c { sel_on } else { sel_off });
            }
            for &t in &xn.bulk {
                b[t] = Bias::Fixed(v_bulk);
            }
        }
    }
    b
}

/// Every FET of the array at the solved point.
pub fn fet_biases(xn: &CrossbarNetlist, v: &[f64]) -> Vec<FetBias> {
    let mut out = Vec::new();
    for (k, cell) in xn.cells.iter().enumerate() {
        let Some(e) = cell.fet else { continue };
        if let Element::Mosfet { d, g, s, b, fet } = &xn.net.elements()[e] {
            out.push(FetBias {
                device: format!("Q({},{})", k / xn.cols, k % xn.cols),
                fet: *fet,
                vg: v[*g],
                vs: v[*s],
                vd: v[*d],
                vb: v[*b],
            });
        }
    }
    out
}

fn check_cell(state: &ArrayState, r: usize, c: usize) -> Result<()> {
    if r >= state.rows || c >= state.cols {
        return Err(Error::Domain("cell index outside the array"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadReport {
    pub rs_estimate: f64,
    pub r_true: f64,
    pub error_pct: f64,
    /// Current arriving at the selected BIT driver.
    pub i_read: f64,
    /// Voltage across the target device after line drops.
    pub v_device: f64,
}

/// Read cell `(r, c)` at bias `v_read` and invert the device law on the driver current.
pub fn read_cell(spec: &CrossbarSpec, state: &ArrayState, r: usize, c: usize, v_read: f64) -> Result<ReadReport> {
    check_dims(spec, state)?;
    check_cell(state, r, c)?;
    let cell = state.get(r, c);
    let Some(load) = cell.load() else {
        return Err(Error::Domain("cannot read an empty cell"));
    };
    if let CellDevice::Memristor(p) = cell.device {
        if v_read.abs() > p.v_guard {
            return Err(Error::Domain("read bias exceeds the read guard"));
        }
    }
    let xn = build(spec, state)?;
    let sol = solve_dc(&xn.net, &op_biases(spec, &xn, r, c, v_read), &SolveOptions::default())?;
    let i_read = -xn.net.terminal_current(xn.bit[r], &sol.v);
    let rs_estimate = load.read_state(v_read, i_read)?;
    let r_true = cell.state.r;
    Ok(ReadReport {
        rs_estimate,
        r_true,
        error_pct: (rs_estimate - r_true) / r_true * 100.0,
        i_read,
        v_device: xn.device_voltage(r, c, &sol.v),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramReport {
    /// Timesteps applied to the states.
    pub steps: usize,
    /// Rating violations at the step that aborted the pulse; empty on success.
    pub violations: Vec<Violation>,
    pub target_before: f64,
    pub target_after: f64,
    /// Largest `|dR|` among unselected cells.
    pub disturb: f64,
    pub disturb_cell: Option<(usize, usize)>,
    /// Largest `|v|` seen across the target device.
    pub peak_device_voltage: f64,
}

impl ProgramReport {
    pub fn aborted(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Apply `pulse` to cell `(r, c)` in steps of `t_s`.
///
/// Each step solves the array, checks FET ratings, then advances every
/// memristor with its own solved branch voltage. A rating violation stops the
/// pulse before that step is applied.
pub fn program_cell(
    spec: &CrossbarSpec,
    state: &mut ArrayState,
    r: usize,
    c: usize,
    pulse: &Waveform,
    t_s: f64,
) -> Result<ProgramReport> {
    check_dims(spec, state)?;
    check_cell(state, r, c)?;
    let steps = discretize(pulse, t_s)?;
    let mut xn = build(spec, state)?;
    let before = state.resistances();
    let target = r * state.cols + c;
    let mut report = ProgramReport {
        steps: 0,
        violations: Vec::new(),
        target_before: before[target],
        target_after: before[target],
        disturb: 0.0,
        disturb_cell: None,
        peak_device_voltage: 0.0,
    };
    let mut last: Option<(f64, DcSolution)> = None;
    for seg in &steps.segments {
        let opts = SolveOptions {
            initial: match &last {
                Some((v, s)) if *v == seg.voltage => Some(s.v.clone()),
                _ => None,
            },
            ..SolveOptions::default()
        };
        let sol = solve_dc(&xn.net, &op_biases(spec, &xn, r, c, seg.voltage), &opts)?;
        let violations = soac_check(&fet_biases(&xn, &sol.v));
        if !violations.is_empty() {
            report.violations = violations;
            break;
        }
        for k in 0..state.cells.len() {
            let cell = &mut state.cells[k];
            if let CellDevice::Memristor(p) = cell.device {
                let v = xn.device_voltage(k / state.cols, k % state.cols, &sol.v);
                if k == target {
                    report.peak_device_voltage = report.peak_device_voltage.max(v.abs());
                }
                let old = cell.state.r;
                cell.state.apply(&p, v, seg.duration)?;
                if cell.state.r != old {
                    xn.set_state(k, cell.state.r);
                }
            }
        }
        report.steps += 1;
        last = Some((seg.voltage, sol));
    }
    report.target_after = state.cells[target].state.r;
    for (k, (a, b)) in before.iter().zip(state.cells.iter()).enumerate() {
        let d = (b.state.r - a).abs();
        if k != target && (report.disturb_cell.is_none() || d > report.disturb) {
            report.disturb = d;
            report.disturb_cell = Some((k / state.cols, k % state.cols));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrDropReport {
    /// Voltage delivered across the worst cell.
    pub delivered: f64,
    pub worst: (usize, usize),
    /// Series-divider value for the same path.
    pub hand_formula: f64,
}

/// Delivered voltage at the far-corner cell when it alone conducts as `r_wc`.
pub fn ir_drop_report(spec: &CrossbarSpec, r_wc: f64, v_drive: f64) -> Result<IrDropReport> {
    spec.validate()?;
    if !(r_wc > 0.0) || !r_wc.is_finite() {
        return Err(Error::Domain("worst-case resistance must be positive"));
    }
    let (rows, cols) = (spec.rows, spec.cols);
    let passive = CrossbarSpec {
        template: CellTemplate::Passive,
        ..*spec
    };
    let open = ArrayCell {
        device: CellDevice::Open,
        state: DeviceState::new(r_wc, r_wc, r_wc)?,
    };
    let mut state = ArrayState::uniform(rows, cols, open);
    state.get_mut(rows - 1, cols - 1).device = CellDevice::Linear;
    let xn = build(&passive, &state)?;
    let mut biases = vec![Bias::Fixed(0.0); xn.net.terminals().len()];
    biases[xn.word[cols - 1]] = Bias::Fixed(v_drive);
    let sol = solve_dc(&xn.net, &biases, &SolveOptions::default())?;
    let series = spec.word_line_total() + spec.bit_line_total();
    Ok(IrDropReport {
        delivered: xn.device_voltage(rows - 1, cols - 1, &sol.v),
        worst: (rows - 1, cols - 1),
        hand_formula: v_drive * r_wc / (r_wc + series),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{dc_solve_series, OneT1R, Ratings};

    const WIRE: Wire = Wire {
        width_um: 0.5,
        pitch_um: 50.0,
    };

    #[test]
    fn squares_counting() {
        assert!((line_resistance(0.5, 50.0, 0.1).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(line_resistance(1.0, 1.0, 0.37).unwrap(), 0.37);
        assert!(line_resistance(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn passive_two_by_two_counts() {
        let mut spec = CrossbarSpec::passive(2, 2, 0.1, WIRE);
        spec.driver_segments = false;
        let st = ArrayState::linear(2, 2, &[1e3; 4]).unwrap();
        let xn = build(&spec, &st).unwrap();
        assert_eq!(xn.device_count(), 4);
        assert_eq!(xn.net.terminals().len(), 4);
        assert_eq!(spec.terminal_count(), 4);
        assert_eq!(xn.net.internal_node_count(), 4);
        spec.driver_segments = true;
        assert_eq!(build(&spec, &st).unwrap().net.internal_node_count(), 8);
    }

    #[test]
    fn terminal_counts_for_bulk_modes() {
        let fet = MosfetParams::example_nmos_5v();
        let mut spec = CrossbarSpec::one_t1r(16, 16, 0.0, WIRE, fet, 5.0);
        assert_eq!(spec.terminal_count(), 64);
        spec.bulk_mode = BulkMode::Common;
        assert_eq!(spec.terminal_count(), 49);
        let one = CrossbarSpec::one_t1r(1, 1, 0.0, WIRE, fet, 5.0);
        assert_eq!(one.terminal_count(), 4);
    }

    #[test]
    fn single_cell_matches_primitive() {
        let fet = MosfetParams::nmos(0.7, 1.2, 1e-3, 0.01, Ratings::uniform(5.0));
        let spec = CrossbarSpec::one_t1r(1, 1, 0.0, WIRE, fet, 5.0);
        let st = ArrayState::linear(1, 1, &[2e3]).unwrap();
        let xn = build(&spec, &st).unwrap();
        assert_eq!(xn.net.terminals().len(), 4);
        let sol = solve_dc(&xn.net, &op_biases(&spec, &xn, 0, 0, 2.0), &SolveOptions::default()).unwrap();
        let cell = OneT1R {
            fet,
            orientation: Orientation::SourceToRram,
            load: Load::Linear(2e3),
            v_word: 2.0,
            v_bit: 0.0,
            v_gate: 5.0,
            v_bulk: 0.0,
        };
        let s = dc_solve_series(&cell).unwrap();
        assert!((xn.device_voltage(0, 0, &sol.v) - s.v_mem).abs() < 1e-9);
    }

    #[test]
    fn ir_drop_zero_sheet_resistance() {
        let spec = CrossbarSpec::passive(4, 4, 0.0, WIRE);
        let rep = ir_drop_report(&spec, 1e3, 1.5).unwrap();
        assert_eq!(rep.delivered, 1.5);
        assert_eq!(rep.worst, (3, 3));
    }

    #[test]
    fn read_rejects_programming_bias() {
        let p = ModelParams::exp_10k17k();
        let cell = ArrayCell {
            device: CellDevice::Memristor(p),
            state: DeviceState::new(12e3, 10e3, 17e3).unwrap(),
        };
        let st = ArrayState::uniform(2, 2, cell);
        let spec = CrossbarSpec::passive(2, 2, 0.0, WIRE);
        assert!(read_cell(&spec, &st, 0, 0, 0.8).is_err());
        assert!(read_cell(&spec, &st, 0, 0, 0.5).is_ok());
        assert!(read_cell(&spec, &st, 2, 0, 0.5).is_err());
    }
}
