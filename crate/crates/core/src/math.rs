//! Thin wrappers over `libm` so the crate stays `no_std` and bit-reproducible
//! across targets.

/// Largest argument handed to `exp`; larger arguments are clamped.
pub const EXP_ARG_MAX: f64 = 700.0;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x.min(EXP_ARG_MAX))
}

/// `exp(x) - 1` with the same clamp as [`exp`].
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x.min(EXP_ARG_MAX))
}

#[inline]
pub fn log(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub fn fma(a: f64, b: f64, c: f64) -> f64 {
    libm::fma(a, b, c)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
