//! DC operating points of single-branch CMOS-RRAM cells.
//!
//! Every cell here reduces to one internal node whose KCL residual is monotone,
//! so the operating point comes from a bracketed root search.

use alloc::string::String;
use alloc::vec::Vec;

use super::mosfet::{Channel, MosfetParams};
use super::soac::FetBias;
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::roots::decreasing_root;

/// Node-voltage resolution of the series solvers.
pub const NODE_XTOL: f64 = 1e-15;

/// Two-terminal element in series with the access device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Linear(f64),
    /// Memristor frozen at state `r` for the duration of a DC solve.
    Memristor { params: ModelParams, r: f64 },
}

impl Load {
    pub fn validate(&self) -> Result<()> {
        match self {
            Load::Linear(r) if *r > 0.0 && r.is_finite() => Ok(()),
            Load::Linear(_) => Err(invalid("linear load must be positive and finite")),
            Load::Memristor { params, r } => {
                params.validate()?;
                if *r > 0.0 && r.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain("memristor state must be positive"))
                }
            }
        }
    }

    /// Current for bias `v` across the load; odd-signed and increasing in `v`.
    pub fn current(&self, v: f64) -> f64 {
        match self {
            Load::Linear(r) => v / r,
            Load::Memristor { params, r } => params.current_unchecked(*r, v),
        }
    }

    /// `di/dv` at bias `v`.
    pub fn conductance(&self, v: f64) -> f64 {
        match self {
            Load::Linear(r) => 1.0 / r,
            Load::Memristor { params, r } => params.conductance_unchecked(*r, v),
        }
    }

    /// Resistive state implied by current `i` at bias `v`.
    pub fn read_state(&self, v: f64, i: f64) -> Result<f64> {
        match self {
            Load::Linear(_) => {
                if v == 0.0 || i == 0.0 {
                    Err(Error::Domain("read needs a non-zero bias and current"))
                } else {
                    Ok(v / i)
                }
            }
            Load::Memristor { params, .. } => params.resistance_from_current(v, i),
        }
    }

    /// Stored state (or fixed resistance).
    pub fn state(&self) -> f64 {
        match self {
            Load::Linear(r) => *r,
            Load::Memristor { r, .. } => *r,
        }
    }

    pub fn with_state(self, r_new: f64) -> Self {
        match self {
            Load::Linear(_) => Load::Linear(r_new),
            Load::Memristor { params, .. } => Load::Memristor { params, r: r_new },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// FET source faces the memristor; drain at WORD.
    SourceToRram,
    /// FET drain faces the memristor; source at WORD.
    DrainToRram,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::SourceToRram, Orientation::DrainToRram];

    pub fn name(self) -> &'static str {
        match self {
            Orientation::SourceToRram => "source_to_rram",
            Orientation::DrainToRram => "drain_to_rram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Current flows WORD to BIT.
    Forward,
    Reverse,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Forward => "forward",
            Polarity::Reverse => "reverse",
        }
    }
}

/// WORD -- FET -- node -- load -- BIT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneT1R {
    pub fet: MosfetParams,
    pub orientation: Orientation,
    pub load: Load,
    pub v_word: f64,
    pub v_bit: f64,
    pub v_gate: f64,
    /// Bulk bias; only used by rating checks.
    pub v_bulk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSolution {
    /// WORD-to-BIT current.
    pub i: f64,
    /// Node minus BIT.
    pub v_mem: f64,
    /// WORD minus node.
    pub v_fet: f64,
    pub node: f64,
}

impl OneT1R {
    /// `(v_source, v_drain)` with the internal node at `x`.
    fn fet_terminals(&self, x: f64) -> (f64, f64) {
        match self.orientation {
            Orientation::SourceToRram => (x, self.v_word),
            Orientation::DrainToRram => (self.v_word, x),
        }
    }

    /// FET current from WORD into the node.
    pub fn fet_current(&self, x: f64) -> f64 {
        let (vs, vd) = self.fet_terminals(x);
        let ids = self.fet.current(self.v_gate, vs, vd);
        match self.orientation {
            Orientation::SourceToRram => ids,
            Orientation::DrainToRram => -ids,
        }
    }

    pub fn fet_bias(&self, sol: &SeriesSolution, device: impl Into<String>) -> FetBias {
        let (vs, vd) = self.fet_terminals(sol.node);
        FetBias {
            device: device.into(),
            fet: self.fet,
            vg: self.v_gate,
            vs,
            vd,
            vb: self.v_bulk,
        }
    }
}

/// Operating point of a 1T1R branch.
///
/// A gate that cannot conduct leaves the node at BIT, so `i = 0` and
/// `v_mem = 0`.
pub fn dc_solve_series(cell: &OneT1R) -> Result<SeriesSolution> {
    cell.fet.validate()?;
    cell.load.validate()?;
    let (w, b) = (cell.v_word, cell.v_bit);
    if !(w.is_finite() && b.is_finite() && cell.v_gate.is_finite()) {
        return Err(Error::Domain("cell biases must be finite"));
    }
    let h = |x: f64| cell.fet_current(x) - cell.load.current(x - b);
    let node = decreasing_root(h, w.min(b), w.max(b), NODE_XTOL)?;
    Ok(SeriesSolution {
        i: cell.load.current(node - b),
        v_mem: node - b,
        v_fet: w - node,
        node,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationRow {
    pub orientation: Orientation,
    pub polarity: Polarity,
    /// Current magnitude.
    pub i: f64,
    pub v_mem: f64,
    pub v_fet: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationReport {
    pub rows: [OrientationRow; 4],
    /// Orientation with the larger `min(fwd, rev)`; ties go to source_to_rram.
    pub min_winner: Orientation,
    /// Orientation with the larger `max(fwd, rev)`; ties go to source_to_rram.
    pub max_winner: Orientation,
}

impl OrientationReport {
    pub fn current(&self, o: Orientation, p: Polarity) -> f64 {
        self.rows
            .iter()
            .find(|r| r.orientation == o && r.polarity == p)
            .map(|r| r.i)
            .unwrap_or(0.0)
    }

    pub fn min_current(&self, o: Orientation) -> f64 {
        self.current(o, Polarity::Forward).min(self.current(o, Polarity::Reverse))
    }

    pub fn max_current(&self, o: Orientation) -> f64 {
        self.current(o, Polarity::Forward).max(self.current(o, Polarity::Reverse))
    }

    /// Recommendation for devices with symmetric current demand.
    pub fn recommended(&self) -> Orientation {
        self.min_winner
    }
}

/// The four corner solves: both orientations, both polarities, gate fully on.
pub fn compare_orientations(fet: &MosfetParams, load: Load, vdd: f64) -> Result<OrientationReport> {
    if !(vdd > 0.0 && vdd.is_finite()) {
        return Err(Error::Domain("supply must be positive"));
    }
    let (v_gate, v_bulk) = match fet.channel {
        Channel::N => (vdd, 0.0),
        Channel::P => (0.0, vdd),
    };
    let mut rows = [OrientationRow {
        orientation: Orientation::SourceToRram,
        polarity: Polarity::Forward,
        i: 0.0,
        v_mem: 0.0,
        v_fet: 0.0,
    }; 4];
    let mut k = 0;
    for orientation in Orientation::BOTH {
        for polarity in [Polarity::Forward, Polarity::Reverse] {
            let (v_word, v_bit) = match polarity {
                Polarity::Forward => (vdd, 0.0),
                Polarity::Reverse => (0.0, vdd),
            };
            let cell = OneT1R {
                fet: *fet,
                orientation,
                load,
                v_word,
                v_bit,
                v_gate,
                v_bulk,
            };
            let s = dc_solve_series(&cell)?;
            rows[k] = OrientationRow {
                orientation,
                polarity,
                i: s.i.abs(),
                v_mem: s.v_mem,
                v_fet: s.v_fet,
            };
            k += 1;
        }
    }
    let mut report = OrientationReport {
        rows,
        min_winner: Orientation::SourceToRram,
        max_winner: Orientation::SourceToRram,
    };
    let (s2r, d2r) = (Orientation::SourceToRram, Orientation::DrainToRram);
    if report.min_current(d2r) > report.min_current(s2r) {
        report.min_winner = d2r;
    }
    if report.max_current(d2r) > report.max_current(s2r) {
        report.max_winner = d2r;
    }
    Ok(report)
}

/// Which access transistor of a 2T1R cell drives the memristor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Active {
    /// pMOS to the high bitline: negative memristor bias.
    Q4Pmos,
    /// nMOS to the grounded bitline: positive memristor bias.
    Q5Nmos,
}

/// WORD -- load -- X, with Q5 (nMOS) from X to BIT1 and Q4 (pMOS) from BIT2 to X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoT1R {
    pub q5: MosfetParams,
    pub q4: MosfetParams,
    pub load: Load,
    pub v_bit1: f64,
    pub v_bit2: f64,
    /// Permitted nMOS gate range; the upper end is "on".
    pub nmos_gate_window: (f64, f64),
    /// Permitted pMOS gate range; the lower end is "on".
    pub pmos_gate_window: (f64, f64),
}

impl TwoT1R {
    /// Extended-drain cell with BIT1 = 0 V, BIT2 = 10 V and 3 V gate swings.
    pub fn high_voltage(q5: MosfetParams, q4: MosfetParams, load: Load) -> Self {
        TwoT1R {
            q5,
            q4,
            load,
            v_bit1: 0.0,
            v_bit2: 10.0,
            nmos_gate_window: (0.0, 3.0),
            pmos_gate_window: (7.0, 10.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.q5.validate()?;
        self.q4.validate()?;
        self.load.validate()?;
        if self.q5.channel != Channel::N || self.q4.channel != Channel::P {
            return Err(invalid("2T1R needs an nMOS Q5 and a pMOS Q4"));
        }
        if !(self.v_bit2 > self.v_bit1) {
            return Err(invalid("BIT2 must sit above BIT1"));
        }
        let (a, b) = self.nmos_gate_window;
        let (c, d) = self.pmos_gate_window;
        if !(a <= b && c <= d) {
            return Err(invalid("gate windows must be ordered"));
        }
        Ok(())
    }

    /// `(q5 gate, q4 gate)` for the requested active device.
    pub fn gates_for(&self, active: Active) -> (f64, f64) {
        let (n_off, n_on) = self.nmos_gate_window;
        let (p_on, p_off) = self.pmos_gate_window;
        match active {
            Active::Q5Nmos => (n_on, p_off),
            Active::Q4Pmos => (n_off, p_on),
        }
    }

    fn q5_enabled(&self, vg5: f64) -> bool {
        vg5 - self.v_bit1 > self.q5.v_th
    }

    fn q4_enabled(&self, vg4: f64) -> bool {
        self.v_bit2 - vg4 > self.q4.v_th
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoT1RSolution {
    pub x: f64,
    /// WORD minus X.
    pub v_mem: f64,
    /// WORD-to-X current through the memristor.
    pub i: f64,
    pub vg5: f64,
    pub vg4: f64,
    pub v_word: f64,
    pub gate_window_ok: bool,
}

impl TwoT1RSolution {
    pub fn fet_biases(&self, cell: &TwoT1R) -> [FetBias; 2] {
        [
            FetBias {
                device: "Q5".into(),
                fet: cell.q5,
                vg: self.vg5,
                vs: cell.v_bit1,
                vd: self.x,
                vb: cell.v_bit1,
            },
            FetBias {
                device: "Q4".into(),
                fet: cell.q4,
                vg: self.vg4,
                vs: cell.v_bit2,
                vd: self.x,
                vb: cell.v_bit2,
            },
        ]
    }
}

/// 2T1R operating point with the gates set for `active`.
pub fn dc_solve_2t1r(cell: &TwoT1R, v_word: f64, active: Active) -> Result<TwoT1RSolution> {
    let (vg5, vg4) = cell.gates_for(active);
    dc_solve_2t1r_gates(cell, v_word, vg5, vg4)
}

/// 2T1R operating point for explicit gate voltages.
pub fn dc_solve_2t1r_gates(cell: &TwoT1R, v_word: f64, vg5: f64, vg4: f64) -> Result<TwoT1RSolution> {
    cell.validate()?;
    if !(v_word.is_finite() && vg5.is_finite() && vg4.is_finite()) {
        return Err(Error::Domain("2T1R biases must be finite"));
    }
    if cell.q5_enabled(vg5) && cell.q4_enabled(vg4) {
        return Err(Error::Rejected("both access transistors of a 2T1R cell enabled"));
    }
    let h = |x: f64| {
        let into_x = cell.load.current(v_word - x) - cell.q4.current(vg4, cell.v_bit2, x);
        into_x - cell.q5.current(vg5, cell.v_bit1, x)
    };
    let lo = cell.v_bit1.min(v_word);
    let hi = cell.v_bit2.max(v_word);
    let x = decreasing_root(h, lo, hi, NODE_XTOL)?;
    let in_window = |v: f64, (a, b): (f64, f64)| a <= v && v <= b;
    Ok(TwoT1RSolution {
        x,
        v_mem: v_word - x,
        i: cell.load.current(v_word - x),
        vg5,
        vg4,
        v_word,
        gate_window_ok: in_window(vg5, cell.nmos_gate_window) && in_window(vg4, cell.pmos_gate_window),
    })
}

/// Switch routing of the double transmission-gate cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TgRoute {
    /// S1 and S4 closed: memristor on the EXT terminals.
    External,
    /// S2 and S3 closed: memristor on the USR terminals.
    InCircuit,
}

impl TgRoute {
    /// Closed flags for S1..S4.
    pub fn switches(self) -> [bool; 4] {
        match self {
            TgRoute::External => [true, false, false, true],
            TgRoute::InCircuit => [false, true, true, false],
        }
    }
}

/// Memristor between two complementary switch pairs with on-resistance `r_on`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgCell {
    pub r_on: f64,
    pub load: Load,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgSolution {
    pub v_mem: f64,
    pub i: f64,
    /// Current drawn from the EXT pair.
    pub i_ext: f64,
    /// Current drawn from the USR pair.
    pub i_usr: f64,
}

/// Solve the routed branch; `ext` and `usr` are (top, bottom) terminal voltages.
pub fn solve_tg(cell: &TgCell, route: TgRoute, ext: (f64, f64), usr: (f64, f64)) -> Result<TgSolution> {
    cell.load.validate()?;
    if !(cell.r_on >= 0.0 && cell.r_on.is_finite()) {
        return Err(invalid("switch on-resistance must be non-negative"));
    }
    let (top, bottom) = match route {
        TgRoute::External => ext,
        TgRoute::InCircuit => usr,
    };
    let span = top - bottom;
    let v_mem = if cell.r_on == 0.0 {
        span
    } else {
        let h = |vm: f64| (span - vm) / (2.0 * cell.r_on) - cell.load.current(vm);
        decreasing_root(h, span.min(0.0), span.max(0.0), NODE_XTOL)?
    };
    let i = cell.load.current(v_mem);
    let (i_ext, i_usr) = match route {
        TgRoute::External => (i, 0.0),
        TgRoute::InCircuit => (0.0, i),
    };
    Ok(TgSolution { v_mem, i, i_ext, i_usr })
}

/// WORD-to-BIT current of `cell` for each gate voltage (rows) and BIT voltage (columns).
pub fn loadline_surface(cell: &OneT1R, v_gates: &[f64], v_outs: &[f64]) -> Result<Vec<Vec<f64>>> {
    if v_gates.is_empty() || v_outs.is_empty() {
        return Err(Error::Domain("load-line grids must be non-empty"));
    }
    v_gates
        .iter()
        .map(|&vg| {
            v_outs
                .iter()
                .map(|&vo| {
                    let c = OneT1R {
                        v_gate: vg,
                        v_bit: vo,
                        ..*cell
                    };
                    dc_solve_series(&c).map(|s| s.i)
                })
                .collect()
        })
        .collect()
}
