//! Memristor (RRAM) device modelling and CMOS-RRAM co-design kernels.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; file formats, configuration and the command line
//! live in the `rramkit` companion crate.
//!
//! * [`model`]: IV law, switching sensitivity, window functions, closed-form
//!   and Runge-Kutta state updates.
//! * [`stimulus`]: pulse trains, triangular read-outs, characterization plans
//!   and fixed-timestep discretization.
//! * [`transient`]: fixed-timestep engine applying a waveform to one device.
//! * [`primitives`]: square-law MOSFET, 1T1R / 2T1R / transmission-gate cells,
//!   safe-operating-area checks and worst-case IV linearization.
//! * [`circuit`] and [`crossbar`]: nodal Newton solver and N x M arrays with
//!   line parasitics.
//! * [`designflow`]: reconfigurable NAND verification, corner enumeration and
//!   uncertainty containment.
#![no_std]

extern crate alloc;

pub mod circuit;
pub mod crossbar;
pub mod designflow;
pub mod error;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod primitives;
pub mod roots;
pub mod stimulus;
pub mod transient;

pub use error::{Error, Result};
pub use model::{DeviceState, ModelParams, WindowKind};
pub use stimulus::{Segment, Waveform};
pub use transient::Trace;
