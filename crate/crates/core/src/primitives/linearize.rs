//! Worst-case linear bound of a sampled IV curve.

use crate::error::{Error, Result};

/// Smallest `|v / i|` over samples inside `v_range`.
///
/// The line `i = v / R` through the origin then bounds `|i|` from above at every
/// sample in range. Samples must cover the range and satisfy `i * v >= 0`.
pub fn worst_case_linearize(samples: &[(f64, f64)], v_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = v_range;
    if !(lo <= hi) {
        return Err(Error::Domain("voltage range must be ordered"));
    }
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut best = f64::INFINITY;
    for &(v, i) in samples {
        if !(v.is_finite() && i.is_finite()) {
            return Err(Error::Domain("IV samples must be finite"));
        }
        if i * v < 0.0 {
            return Err(Error::Domain("IV samples must satisfy i * v >= 0"));
        }
        v_min = v_min.min(v);
        v_max = v_max.max(v);
        if v < lo || v > hi || v == 0.0 || i == 0.0 {
            continue;
        }
        best = best.min((v / i).abs());
    }
    if v_min > lo || v_max < hi {
        return Err(Error::Domain("IV samples do not cover the voltage range"));
    }
    if best.is_infinite() {
        return Err(Error::Domain("IV samples carry no current"));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn linear_curve_returns_its_resistance() {
        let s: Vec<(f64, f64)> = (-10..=10).map(|k| (k as f64 * 0.1, k as f64 * 0.1 / 2.5e3)).collect();
        let r = worst_case_linearize(&s, (-1.0, 1.0)).unwrap();
        assert!((r - 2.5e3).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(worst_case_linearize(&[(-1.0, 0.0), (1.0, 0.0)], (-1.0, 1.0)).is_err());
        assert!(worst_case_linearize(&[(0.0, 0.0), (0.5, 1e-3)], (-1.0, 1.0)).is_err());
        assert!(worst_case_linearize(&[(-1.0, 1e-3), (1.0, 1e-3)], (-1.0, 1.0)).is_err());
    }
}
