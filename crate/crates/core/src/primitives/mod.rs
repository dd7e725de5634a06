//! CMOS-RRAM primitive cells.

pub mod cell;
pub mod linearize;
pub mod mosfet;
pub mod soac;

pub use cell::{
    compare_orientations, dc_solve_2t1r, dc_solve_2t1r_gates, dc_solve_series, loadline_surface, solve_tg, Active,
    Load, OneT1R, Orientation, OrientationReport, OrientationRow, Polarity, SeriesSolution, TgCell, TgRoute,
    TgSolution, TwoT1R, TwoT1RSolution,
};
pub use linearize::worst_case_linearize;
pub use mosfet::{Channel, FetEval, MosfetParams, Ratings};
pub use soac::{soac_check, FetBias, Pair, Violation};
