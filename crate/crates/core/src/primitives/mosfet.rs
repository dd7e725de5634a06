//! Level-1 square-law MOSFET with an asymmetric reverse threshold.
//!
//! Thresholds are magnitudes for both channel types. A pMOS device is the
//! sign reflection of the matching nMOS: `I_p(g, s, d) = -I_n(-g, -s, -d)`.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    N,
    P,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::N => "nmos",
            Channel::P => "pmos",
        }
    }
}

/// Terminal-pair voltage ratings (magnitudes, V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratings {
    pub v_gs_max: f64,
    pub v_ds_max: f64,
    pub v_gd_max: f64,
    pub v_db_max: f64,
}

impl Ratings {
    pub const fn uniform(v: f64) -> Self {
        Ratings {
            v_gs_max: v,
            v_ds_max: v,
            v_gd_max: v,
            v_db_max: v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosfetParams {
    pub channel: Channel,
    /// Threshold with source and drain in their intended roles.
    pub v_th: f64,
    /// Threshold when the drain acts as the source.
    pub v_th_rev: f64,
    /// Gain `k` in `i = k (v_gs - v_th)^2` (A/V^2).
    pub k: f64,
    pub lambda: f64,
    pub ratings: Ratings,
    /// Ignore `v_th_rev` and treat the device as drain/source interchangeable.
    pub symmetric: bool,
}

/// Drain-to-source current with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FetEval {
    pub i: f64,
    pub di_dvg: f64,
    pub di_dvs: f64,
    pub di_dvd: f64,
}

impl MosfetParams {
    pub fn nmos(v_th: f64, v_th_rev: f64, k: f64, lambda: f64, ratings: Ratings) -> Self {
        MosfetParams {
            channel: Channel::N,
            v_th,
            v_th_rev,
            k,
            lambda,
            ratings,
            symmetric: v_th_rev == v_th,
        }
    }

    pub fn pmos(v_th: f64, v_th_rev: f64, k: f64, lambda: f64, ratings: Ratings) -> Self {
        MosfetParams {
            channel: Channel::P,
            ..Self::nmos(v_th, v_th_rev, k, lambda, ratings)
        }
    }

    /// Illustrative asymmetric 5 V pMOS that passes low-mA currents into 1 kOhm.
    pub fn example_pmos_5v() -> Self {
        Self::pmos(0.7, 1.6, 2.0e-3, 0.02, Ratings::uniform(5.5))
    }

    /// Illustrative asymmetric 5 V nMOS.
    pub fn example_nmos_5v() -> Self {
        Self::nmos(0.7, 1.6, 4.0e-3, 0.02, Ratings::uniform(5.5))
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.ratings;
        let finite = [self.v_th, self.v_th_rev, self.k, self.lambda]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("mosfet parameters must be finite"));
        }
        if !(self.k > 0.0) {
            return Err(invalid("mosfet gain k must be positive"));
        }
        if self.lambda < 0.0 {
            return Err(invalid("mosfet lambda must be non-negative"));
        }
        if self.v_th_rev < self.v_th {
            return Err(invalid("v_th_rev must not be below v_th"));
        }
        if !(r.v_gs_max > 0.0 && r.v_ds_max > 0.0 && r.v_gd_max > 0.0 && r.v_db_max > 0.0) {
            return Err(invalid("mosfet ratings must be positive"));
        }
        Ok(())
    }

    fn reverse_threshold(&self) -> f64 {
        if self.symmetric {
            self.v_th
        } else {
            self.v_th_rev
        }
    }

    /// Gate voltage that turns the device fully on with its source at `v_rail`.
    pub fn full_on_gate(&self, v_rail: f64, drive: f64) -> f64 {
        match self.channel {
            Channel::N => v_rail + drive,
            Channel::P => v_rail - drive,
        }
    }

    /// Drain-to-source current at the given terminal voltages.
    pub fn current(&self, vg: f64, vs: f64, vd: f64) -> f64 {
        self.eval(vg, vs, vd).i
    }

    /// Current and partial derivatives with respect to gate, source and drain.
    pub fn eval(&self, vg: f64, vs: f64, vd: f64) -> FetEval {
        match self.channel {
            Channel::N => self.eval_n(vg, vs, vd),
            Channel::P => {
                // The derivatives of -f(-x) equal f'(-x).
                let e = self.eval_n(-vg, -vs, -vd);
                FetEval {
                    i: -e.i,
                    ..e
                }
            }
        }
    }

    fn eval_n(&self, vg: f64, vs: f64, vd: f64) -> FetEval {
        if vd >= vs {
            let (i, g_gs, g_ds) = square_law(self.k, self.lambda, vg - vs - self.v_th, vd - vs);
            FetEval {
                i,
                di_dvg: g_gs,
                di_dvs: -g_gs - g_ds,
                di_dvd: g_ds,
            }
        } else {
            // Drain and source swap roles.
            let vt = self.reverse_threshold();
            let (i, g_gs, g_ds) = square_law(self.k, self.lambda, vg - vd - vt, vs - vd);
            FetEval {
                i: -i,
                di_dvg: -g_gs,
                di_dvs: -g_ds,
                di_dvd: g_gs + g_ds,
            }
        }
    }
}

/// `(i, di/dvov, di/dvds)` for `vds >= 0`.
fn square_law(k: f64, lambda: f64, vov: f64, vds: f64) -> (f64, f64, f64) {
    if vov <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        let core = vds * (2.0 * vov - vds);
        (
            k * core * clm,
            2.0 * k * vds * clm,
            k * (2.0 * (vov - vds) * clm + lambda * core),
        )
    } else {
        let sq = vov * vov;
        (k * sq * clm, 2.0 * k * vov * clm, k * sq * lambda)
    }
}
