//! Nonlinear nodal analysis of small netlists.
//!
//! Every terminal is a node. Biased terminals are fixed; floating terminals
//! become unknowns; those with no resistive path to a fixed node get a weak
//! leak to ground so the system stays solvable.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::primitives::{Channel, Load, MosfetParams};

pub type NodeId = usize;

/// Leak conductance to ground for floating terminals with no resistive path to a fixed node (S).
pub const FLOAT_LEAK: f64 = 1e-12;
/// Shunt added to every unknown while solving the linearized starting point.
const GUESS_GMIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Conductance { a: NodeId, b: NodeId, g: f64 },
    /// Two-terminal load carrying current from `a` to `b`.
    Device { a: NodeId, b: NodeId, load: Load },
    /// Gate and bulk draw no current; the bulk is kept for rating checks.
    Mosfet {
        d: NodeId,
        g: NodeId,
        s: NodeId,
        b: NodeId,
        fet: MosfetParams,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Terminal {
    pub name: String,
    pub node: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bias {
    Fixed(f64),
    Floating,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    nodes: usize,
    terminals: Vec<Terminal>,
    elements: Vec<Element>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self) -> NodeId {
        self.nodes += 1;
        self.nodes - 1
    }

    /// New terminal with its own node; returns the terminal index.
    pub fn add_terminal(&mut self, name: impl Into<String>) -> usize {
        let node = self.add_node();
        self.terminals.push(Terminal {
            name: name.into(),
            node,
        });
        self.terminals.len() - 1
    }

    pub fn add(&mut self, e: Element) -> usize {
        self.elements.push(e);
        self.elements.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Nodes that are not terminals.
    pub fn internal_node_count(&self) -> usize {
        self.nodes - self.terminals.len()
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn terminal(&self, name: &str) -> Option<usize> {
        self.terminals.iter().position(|t| t.name == name)
    }

    pub fn terminal_node(&self, t: usize) -> NodeId {
        self.terminals[t].node
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element_mut(&mut self, k: usize) -> &mut Element {
        &mut self.elements[k]
    }

    /// Current through element `k` (`a -> b` or drain to source) at node voltages `v`.
    pub fn element_current(&self, k: usize, v: &[f64]) -> f64 {
        match &self.elements[k] {
            Element::Conductance { a, b, g } => g * (v[*a] - v[*b]),
            Element::Device { a, b, load } => load.current(v[*a] - v[*b]),
            Element::Mosfet { d, g, s, fet, .. } => fet.current(v[*g], v[*s], v[*d]),
        }
    }

    /// Net current flowing out of terminal `t` into the elements.
    pub fn terminal_current(&self, t: usize, v: &[f64]) -> f64 {
        let n = self.terminals[t].node;
        let mut acc = 0.0;
        for (k, e) in self.elements.iter().enumerate() {
            let (from, to) = match e {
                Element::Conductance { a, b, .. } | Element::Device { a, b, .. } => (*a, *b),
                Element::Mosfet { d, s, .. } => (*d, *s),
            };
            if from == to {
                continue;
            }
            if from == n {
                acc += self.element_current(k, v);
            } else if to == n {
                acc -= self.element_current(k, v);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// KCL bound relative to the largest branch current.
    pub rel_tol: f64,
    /// Absolute KCL floor (A).
    pub abs_tol: f64,
    /// Starting node voltages; the linearized network is solved when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 50,
            rel_tol: 1e-9,
            abs_tol: 1e-18,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    /// Voltage of every node, terminals included.
    pub v: Vec<f64>,
    pub iterations: usize,
    /// Largest KCL residual over unknown nodes (A).
    pub residual: f64,
    /// Largest branch current magnitude (A).
    pub max_branch: f64,
}

/// Nodes joined to a fixed node through resistive elements.
///
/// MOSFET channels are ignored since an off device carries no conductance.
fn anchored_nodes(net: &Netlist, fixed: &[bool]) -> Vec<bool> {
    let mut parent: Vec<usize> = (0..net.nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &net.elements {
        let (a, b) = match e {
            Element::Conductance { a, b, g } if *g > 0.0 => (*a, *b),
            Element::Device { a, b, .. } => (*a, *b),
            _ => continue,
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut root_fixed = vec![false; net.nodes];
    for n in 0..net.nodes {
        if fixed[n] {
            let r = find(&mut parent, n);
            root_fixed[r] = true;
        }
    }
    (0..net.nodes).map(|n| root_fixed[find(&mut parent, n)]).collect()
}

struct System<'a> {
    net: &'a Netlist,
    /// Unknown index per node, `None` for fixed nodes.
    slot: Vec<Option<usize>>,
    nodes: Vec<NodeId>,
    leak: Vec<f64>,
    band: usize,
}

impl<'a> System<'a> {
    fn new(net: &'a Netlist, biases: &[Bias]) -> Result<(Self, Vec<f64>)> {
        if biases.len() != net.terminals.len() {
            return Err(Error::Domain("one bias per terminal required"));
        }
        let mut v = vec![0.0; net.nodes];
        let mut fixed = vec![false; net.nodes];
        let mut floating = vec![false; net.nodes];
        for (t, b) in net.terminals.iter().zip(biases) {
            match *b {
                Bias::Fixed(x) if x.is_finite() => {
                    fixed[t.node] = true;
                    v[t.node] = x;
                }
                Bias::Fixed(_) => return Err(Error::Domain("terminal bias must be finite")),
                Bias::Floating => floating[t.node] = true,
            }
        }
        let anchored = anchored_nodes(net, &fixed);
        let mut slot = vec![None; net.nodes];
        let mut nodes = Vec::new();
        let mut leak = Vec::new();
        for n in 0..net.nodes {
            if !fixed[n] {
                slot[n] = Some(nodes.len());
                nodes.push(n);
                leak.push(if floating[n] && !anchored[n] { FLOAT_LEAK } else { 0.0 });
            }
        }
        let mut band = 0usize;
        for e in &net.elements {
            let (rows, cols): (&[NodeId], &[NodeId]) = match e {
                Element::Conductance { a, b, .. } | Element::Device { a, b, .. } => {
                    (&[*a, *b][..], &[*a, *b][..])
                }
                Element::Mosfet { d, g, s, .. } => (&[*d, *s][..], &[*d, *g, *s][..]),
            };
            for r in rows.iter().filter_map(|&n| slot[n]) {
                for c in cols.iter().filter_map(|&n| slot[n]) {
                    band = band.max(r.abs_diff(c));
                }
            }
        }
        Ok((
            System {
                net,
                slot,
                nodes,
                leak,
                band,
            },
            v,
        ))
    }

    fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// KCL residual (current leaving each unknown node) and the largest branch current.
    fn residual(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let mut f: Vec<f64> = self.nodes.iter().zip(&self.leak).map(|(&n, g)| g * v[n]).collect();
        let mut max_branch = 0.0f64;
        for (k, e) in self.net.elements.iter().enumerate() {
            let i = self.net.element_current(k, v);
            let (from, to) = match e {
                Element::Conductance { a, b, .. } | Element::Device { a, b, .. } => (*a, *b),
                Element::Mosfet { d, s, .. } => (*d, *s),
            };
            max_branch = max_branch.max(i.abs());
            if let Some(r) = self.slot[from] {
                f[r] += i;
            }
            if let Some(r) = self.slot[to] {
                f[r] -= i;
            }
        }
        (f, max_branch)
    }

    fn stamp2(&self, m: &mut BandMatrix, a: NodeId, b: NodeId, g: f64) {
        let (sa, sb) = (self.slot[a], self.slot[b]);
        if let Some(i) = sa {
            m.add(i, i, g);
            if let Some(j) = sb {
                m.add(i, j, -g);
            }
        }
        if let Some(j) = sb {
            m.add(j, j, g);
            if let Some(i) = sa {
                m.add(j, i, -g);
            }
        }
    }

    fn jacobian(&self, v: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::new(self.dim(), self.band, self.band);
        for (k, g) in self.leak.iter().enumerate() {
            m.add(k, k, *g);
        }
        for e in &self.net.elements {
            match e {
                Element::Conductance { a, b, g } => self.stamp2(&mut m, *a, *b, *g),
                Element::Device { a, b, load } => self.stamp2(&mut m, *a, *b, load.conductance(v[*a] - v[*b])),
                Element::Mosfet { d, g, s, fet, .. } => {
                    let ev = fet.eval(v[*g], v[*s], v[*d]);
                    let cols = [(*g, ev.di_dvg), (*s, ev.di_dvs), (*d, ev.di_dvd)];
                    for (row, sign) in [(*d, 1.0), (*s, -1.0)] {
                        let Some(r) = self.slot[row] else { continue };
                        for &(col, val) in &cols {
                            if let Some(c) = self.slot[col] {
                                m.add(r, c, sign * val);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Solve the network with every nonlinear branch replaced by its small-signal
    /// conductance at an estimated operating point.
    fn linearized_guess(&self, v: &mut [f64]) -> Result<()> {
        let fixed: Vec<f64> = (0..v.len()).filter(|n| self.slot[*n].is_none()).map(|n| v[n]).collect();
        let lo = fixed.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fixed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if fixed.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        let mut m = BandMatrix::new(self.dim(), self.band, self.band);
        let mut rhs = vec![0.0; self.dim()];
        for (k, g) in self.leak.iter().enumerate() {
            m.add(k, k, g + GUESS_GMIN);
        }
        let mut stamp = |m: &mut BandMatrix, a: NodeId, b: NodeId, g: f64| {
            self.stamp2(m, a, b, g);
            // Fixed neighbours move to the right-hand side.
            if let (Some(i), None) = (self.slot[a], self.slot[b]) {
                rhs[i] += g * v[b];
            }
            if let (None, Some(j)) = (self.slot[a], self.slot[b]) {
                rhs[j] += g * v[a];
            }
        };
        for e in &self.net.elements {
            match e {
                Element::Conductance { a, b, g } => stamp(&mut m, *a, *b, *g),
                Element::Device { a, b, load } => stamp(&mut m, *a, *b, load.conductance(0.0)),
                Element::Mosfet { d, g, s, fet, .. } => {
                    let vg = if self.slot[*g].is_none() { v[*g] } else { 0.5 * (lo + hi) };
                    let vov = match fet.channel {
                        Channel::N => vg - lo - fet.v_th,
                        Channel::P => hi - vg - fet.v_th,
                    };
                    let gds = 2.0 * fet.k * vov.max(0.0);
                    if gds > 0.0 {
                        stamp(&mut m, *d, *s, gds);
                    }
                }
            }
        }
        let x = m.solve(&rhs)?;
        for (k, &n) in self.nodes.iter().enumerate() {
            v[n] = x[k];
        }
        Ok(())
    }
}

fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn norm2(f: &[f64]) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>()
}

/// Newton step halved at most `tries - 1` times; `false` if no trial lowered the residual.
fn newton_step(sys: &System<'_>, v: &mut Vec<f64>, f: &mut Vec<f64>, max_branch: &mut f64, tries: usize) -> Result<bool> {
    let neg: Vec<f64> = f.iter().map(|x| -x).collect();
    let dx = sys.jacobian(v).solve(&neg)?;
    let base = norm2(f);
    let mut lambda = 1.0;
    for _ in 0..tries {
        let mut trial = v.clone();
        for (k, &n) in sys.nodes.iter().enumerate() {
            trial[n] += lambda * dx[k];
        }
        let (ft, mt) = sys.residual(&trial);
        let nt = norm2(&ft);
        if nt.is_finite() && nt < base {
            *v = trial;
            *f = ft;
            *max_branch = mt;
            return Ok(true);
        }
        lambda *= 0.5;
    }
    Ok(false)
}

/// Damped Newton on the KCL equations of all unknown nodes.
///
/// A step is halved until the residual norm decreases. Converged when the
/// largest residual is within `rel_tol` of the largest branch current or below
/// `abs_tol`.
pub fn solve_dc(net: &Netlist, biases: &[Bias], opts: &SolveOptions) -> Result<DcSolution> {
    let (sys, mut v) = System::new(net, biases)?;
    match &opts.initial {
        Some(init) if init.len() == v.len() => {
            for &n in &sys.nodes {
                v[n] = init[n];
            }
        }
        Some(_) => return Err(Error::Domain("initial guess has the wrong length")),
        None => sys.linearized_guess(&mut v)?,
    }
    let converged = |f: &[f64], max_branch: f64| max_abs(f) <= (opts.rel_tol * max_branch).max(opts.abs_tol);
    let (mut f, mut max_branch) = sys.residual(&v);
    let mut iterations = 0;
    while !converged(&f, max_branch) {
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: max_abs(&f),
            });
        }
        iterations += 1;
        if !newton_step(&sys, &mut v, &mut f, &mut max_branch, 60)? {
            return Err(Error::NoConvergence {
                iterations,
                residual: max_abs(&f),
            });
        }
    }
    // One undamped polish step; kept only if it lowers the residual.
    if !sys.nodes.is_empty() && max_abs(&f) > 0.0 {
        let _ = newton_step(&sys, &mut v, &mut f, &mut max_branch, 1);
    }
    Ok(DcSolution {
        v,
        iterations,
        residual: max_abs(&f),
        max_branch,
    })
}
