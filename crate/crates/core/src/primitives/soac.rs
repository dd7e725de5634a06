//! Safe-operating-area check of solved FET terminal voltages.

use alloc::string::String;
use alloc::vec::Vec;

use super::mosfet::MosfetParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    Gs,
    Gd,
    Ds,
    Db,
}

impl Pair {
    pub const ALL: [Pair; 4] = [Pair::Gs, Pair::Gd, Pair::Ds, Pair::Db];

    pub fn name(self) -> &'static str {
        match self {
            Pair::Gs => "GS",
            Pair::Gd => "GD",
            Pair::Ds => "DS",
            Pair::Db => "DB",
        }
    }
}

/// One FET at a solved operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct FetBias {
    pub device: String,
    pub fet: MosfetParams,
    pub vg: f64,
    pub vs: f64,
    pub vd: f64,
    pub vb: f64,
}

impl FetBias {
    pub fn magnitude(&self, pair: Pair) -> f64 {
        match pair {
            Pair::Gs => (self.vg - self.vs).abs(),
            Pair::Gd => (self.vg - self.vd).abs(),
            Pair::Ds => (self.vd - self.vs).abs(),
            Pair::Db => (self.vd - self.vb).abs(),
        }
    }

    pub fn rating(&self, pair: Pair) -> f64 {
        let r = &self.fet.ratings;
        match pair {
            Pair::Gs => r.v_gs_max,
            Pair::Gd => r.v_gd_max,
            Pair::Ds => r.v_ds_max,
            Pair::Db => r.v_db_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub device: String,
    pub pair: Pair,
    pub value: f64,
    pub rating: f64,
}

/// Every terminal pair whose magnitude exceeds its rating, in input order.
pub fn soac_check(fets: &[FetBias]) -> Vec<Violation> {
    let mut out = Vec::new();
    for f in fets {
        for pair in Pair::ALL {
            let value = f.magnitude(pair);
            let rating = f.rating(pair);
            if !(value <= rating) {
                out.push(Violation {
                    device: f.device.clone(),
                    pair,
                    value,
                    rating,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::mosfet::Ratings;
    use super::*;

    fn bias(vg: f64, vs: f64, vd: f64, vb: f64) -> FetBias {
        FetBias {
            device: "M1".into(),
            fet: MosfetParams::nmos(0.5, 0.5, 1e-3, 0.0, Ratings::uniform(3.3)),
            vg,
            vs,
            vd,
            vb,
        }
    }

    #[test]
    fn within_ratings_is_clean() {
        assert!(soac_check(&[bias(3.3, 0.0, 3.3, 0.0)]).is_empty());
    }

    #[test]
    fn single_ds_violation() {
        // Gate tracks the drain so only DS and DB are stressed; bulk follows the drain.
        let v = soac_check(&[bias(10.0, 0.0, 10.0, 10.0)]);
        assert_eq!(v.len(), 2);
        let v = soac_check(&[bias(2.0, 0.0, 10.0, 10.0)]);
        assert!(v.iter().any(|x| x.pair == Pair::Ds && x.value == 10.0 && x.rating == 3.3));
        let only_ds = soac_check(&[FetBias {
            fet: MosfetParams::nmos(
                0.5,
                0.5,
                1e-3,
                0.0,
                Ratings {
                    v_gs_max: 3.3,
                    v_ds_max: 3.3,
                    v_gd_max: 10.0,
                    v_db_max: 10.0,
                },
            ),
            ..bias(1.0, 0.0, 10.0, 0.0)
        }]);
        assert_eq!(only_ds.len(), 1);
        assert_eq!(only_ds[0].pair, Pair::Ds);
    }

    #[test]
    fn nan_counts_as_violation() {
        assert_eq!(soac_check(&[bias(f64::NAN, 0.0, 0.0, 0.0)]).len(), 2);
    }
}
