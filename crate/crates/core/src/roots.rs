//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on `[lo, hi]`; `f(lo)` and `f(hi)` must not share a sign.
///
/// Returns the abscissa with the smallest `|f|` seen once the bracket has
/// shrunk to `xtol` (plus a few ulps) or `f` hits zero exactly.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NotBracketed { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Root of a non-increasing `h` on `[lo, hi]`.
///
/// Endpoint zeros are returned exactly; `h(lo) < 0` or `h(hi) > 0` means the
/// bracket is wrong and is reported as [`Error::NotBracketed`].
pub fn decreasing_root<F: FnMut(f64) -> f64>(mut h: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let h_lo = h(lo);
    let h_hi = h(hi);
    if h_lo < 0.0 || h_hi > 0.0 || h_lo.is_nan() || h_hi.is_nan() {
        return Err(Error::NotBracketed { lo, hi });
    }
    if h_lo == 0.0 && h_hi == 0.0 {
        return Ok(lo);
    }
    if h_hi == 0.0 {
        // h is non-increasing, so the zero set is an interval ending at hi.
        return brent_left_edge(h, lo, hi, xtol);
    }
    if h_lo == 0.0 {
        return Ok(lo);
    }
    brent(h, lo, hi, xtol)
}

/// Left end of the zero plateau of a non-increasing `h` with `h(lo) > 0 = h(hi)`.
fn brent_left_edge<F: FnMut(f64) -> f64>(mut h: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    while b - a > xtol + 4.0 * f64::EPSILON * b.abs().max(a.abs()) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if h(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-14);
        let r = brent(|x| libm::exp(x) - 3.0, -5.0, 5.0, 0.0).unwrap();
        assert!((r - libm::log(3.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NotBracketed { .. })
        ));
        assert!(decreasing_root(|x| x, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn decreasing_root_plateaus() {
        // Zero for x >= 0.5, positive below.
        let h = |x: f64| (0.5 - x).max(0.0);
        let r = decreasing_root(h, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5).abs() < 1e-13);
        assert_eq!(decreasing_root(|_| 0.0, 0.0, 1.0, 1e-14).unwrap(), 0.0);
        assert_eq!(decreasing_root(|x: f64| -x, 0.0, 1.0, 1e-14).unwrap(), 0.0);
    }
}
