//! Voltage-driven resistive-state model.
//!
//! The state variable is the resistance `R` itself. Its rate of change is the
//! product of a voltage-only switching sensitivity `s(v)` and a window
//! `f(R, v)` that vanishes at a voltage-dependent boundary:
//!
//! ```text
//! i(R, v)  = a/R * sinh(b v)
//! dR/dt    = s(v) * f(R, v)
//! s(v)     = A (exp(t |v|) - 1)            (A_p for v > 0, A_n for v < 0, 0 at v = 0)
//! r(v)     = r0 + r1 v + r2 v^2            (r_p for v > 0, r_n for v <= 0)
//! f(R, v)  = (r_p - R)^2  or  exp(eta k_p (r_p - R)) - 1      (v > 0)
//!            (R - r_n)^2  or  exp(eta k_n (R - r_n)) - 1      (v < 0)
//! ```
//!
//! Under a constant bias the ODE has a closed-form solution which is what the
//! transient engine steps with; [`ModelParams::numeric_step`] integrates the
//! same ODE with RK4 and serves as an independent check.

use crate::error::{invalid, Error, Result};
use crate::math;

/// Sigmoid sharpness used to smooth the sensitivity branches.
pub const SENSITIVITY_SMOOTHING: f64 = 1e-6;
/// Sigmoid sharpness used to smooth the window boundary.
pub const WINDOW_SMOOTHING: f64 = 1e-3;
/// Default read-guard magnitude in volts.
pub const DEFAULT_V_GUARD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    Quadratic,
    Exponential,
}

impl WindowKind {
    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Quadratic => "quadratic",
            WindowKind::Exponential => "exponential",
        }
    }
}

/// How the piecewise model functions are evaluated inside [`ModelParams::numeric_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Exact piecewise branches (what the closed form assumes).
    #[default]
    Exact,
    /// Branch selectors replaced by sigmoids of sharpness
    /// [`SENSITIVITY_SMOOTHING`] and [`WINDOW_SMOOTHING`].
    Smoothed,
}

/// Fitted parameter set of one device variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub window: WindowKind,
    /// Current scale of the positive / negative IV branch (A*Ohm).
    pub a_p: f64,
    pub a_n: f64,
    /// IV sharpness (1/V).
    pub b_p: f64,
    pub b_n: f64,
    /// Switching-sensitivity amplitudes. `sens_n <= 0` by convention.
    pub sens_p: f64,
    pub sens_n: f64,
    /// Switching-sensitivity exponents (1/V).
    pub t_p: f64,
    pub t_n: f64,
    /// Boundary polynomial coefficients `[r0, r1, r2]` (Ohm, Ohm/V, Ohm/V^2).
    pub r_p: [f64; 3],
    pub r_n: [f64; 3],
    /// Exponential-window slopes (1/Ohm); unused by the quadratic window.
    pub k_p: f64,
    pub k_n: f64,
    /// Switching-direction sign, +1 or -1.
    pub eta: f64,
    /// Bias magnitude at or below which the state is held.
    pub v_guard: f64,
}

/// Names of the built-in parameter sets accepted by [`ModelParams::builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["exp-10k17k", "exp-4k5-6k", "quadratic-example"];

impl ModelParams {
    /// Pt/TiOx/Pt device fitted over the 10-17 kOhm range (exponential window).
    pub fn exp_10k17k() -> Self {
        ModelParams {
            window: WindowKind::Exponential,
            a_p: 0.24,
            a_n: 0.24,
            b_p: 2.81,
            b_n: 2.81,
            sens_p: 743.47,
            sens_n: -6.8e4,
            t_p: 6.51,
            t_n: 0.31,
            r_p: [16.71e3, 0.0, 0.0],
            r_n: [29.30e3, 23.69e3, 0.0],
            k_p: 5.11e-4,
            k_n: 1.17e-3,
            eta: 1.0,
            v_guard: DEFAULT_V_GUARD,
        }
    }

    /// Pt/TiOx/Pt device fitted over the 4.5-6.0 kOhm range (exponential window).
    pub fn exp_4k5_6k() -> Self {
        ModelParams {
            window: WindowKind::Exponential,
            a_p: 0.24,
            a_n: 0.24,
            b_p: 2.81,
            b_n: 2.81,
            sens_p: 0.12,
            sens_n: -79.03,
            t_p: 0.59,
            t_n: 1.12,
            r_p: [3085.0, 1862.0, 0.0],
            r_n: [5193.0, 378.0, 0.0],
            k_p: 8.10e-3,
            k_n: 9.43e-3,
            eta: 1.0,
            v_guard: DEFAULT_V_GUARD,
        }
    }

    /// Illustrative quadratic-window set.
    ///
    /// Not a fitted device: the coefficients are chosen so that saturation
    /// plateaus are ordered by voltage and `r_p(2.0 V) = 53 kOhm`.
    pub fn quadratic_example() -> Self {
        ModelParams {
            window: WindowKind::Quadratic,
            a_p: 0.24,
            a_n: 0.24,
            b_p: 2.81,
            b_n: 2.81,
            sens_p: 4.0e-6,
            sens_n: -8.0e-6,
            t_p: 3.0,
            t_n: 3.0,
            r_p: [40.0e3, 6.5e3, 0.0],
            r_n: [45.0e3, 2.0e3, 0.0],
            k_p: 0.0,
            k_n: 0.0,
            eta: 1.0,
            v_guard: DEFAULT_V_GUARD,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "exp-10k17k" => Some(Self::exp_10k17k()),
            "exp-4k5-6k" => Some(Self::exp_4k5_6k()),
            "quadratic-example" => Some(Self::quadratic_example()),
            _ => None,
        }
    }

    /// Default admissible state bounds for a built-in set.
    pub fn builtin_bounds(name: &str) -> Option<(f64, f64)> {
        match name {
            "exp-10k17k" => Some((10.0e3, 17.0e3)),
            "exp-4k5-6k" => Some((4.5e3, 6.0e3)),
            "quadratic-example" => Some((30.0e3, 60.0e3)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a_p, self.a_n, self.b_p, self.b_n, self.sens_p, self.sens_n, self.t_p,
            self.t_n, self.k_p, self.k_n, self.eta, self.v_guard,
        ];
        if all.iter().chain(&self.r_p).chain(&self.r_n).any(|x| !x.is_finite()) {
            return Err(invalid("model parameters must be finite"));
        }
        if !(self.a_p > 0.0 && self.a_n > 0.0) {
            return Err(invalid("a_p and a_n must be positive"));
        }
        if !(self.b_p > 0.0 && self.b_n > 0.0) {
            return Err(invalid("b_p and b_n must be positive"));
        }
        if !(self.t_p > 0.0 && self.t_n > 0.0) {
            return Err(invalid("t_p and t_n must be positive"));
        }
        if self.sens_p < 0.0 || self.sens_n > 0.0 {
            return Err(invalid("sensitivity amplitudes need sens_p >= 0 and sens_n <= 0"));
        }
        if self.window == WindowKind::Exponential && !(self.k_p > 0.0 && self.k_n > 0.0) {
            return Err(invalid("k_p and k_n must be positive for the exponential window"));
        }
        if self.eta != 1.0 && self.eta != -1.0 {
            return Err(invalid("eta must be +1 or -1"));
        }
        if self.v_guard < 0.0 {
            return Err(invalid("v_guard must be non-negative"));
        }
        Ok(())
    }

    /// Device current for resistive state `r` under bias `v`.
    pub fn current(&self, r: f64, v: f64) -> Result<f64> {
        check_state(r)?;
        Ok(self.current_unchecked(r, v))
    }

    #[inline]
    pub(crate) fn current_unchecked(&self, r: f64, v: f64) -> f64 {
        if v >= 0.0 {
            self.a_p / r * math::sinh(self.b_p * v)
        } else {
            self.a_n / r * math::sinh(self.b_n * v)
        }
    }

    /// `di/dv` at fixed state.
    #[inline]
    pub(crate) fn conductance_unchecked(&self, r: f64, v: f64) -> f64 {
        if v >= 0.0 {
            self.a_p * self.b_p / r * math::cosh(self.b_p * v)
        } else {
            self.a_n * self.b_n / r * math::cosh(self.b_n * v)
        }
    }

    /// State that would draw current `i` at bias `v` under this IV law.
    ///
    /// Reads use this to turn a sampled current back into a resistive state.
    pub fn resistance_from_current(&self, v: f64, i: f64) -> Result<f64> {
        if v == 0.0 || i == 0.0 || !v.is_finite() || !i.is_finite() {
            return Err(Error::Domain("read needs a non-zero bias and current"));
        }
        let scale = if v >= 0.0 {
            self.a_p * math::sinh(self.b_p * v)
        } else {
            self.a_n * math::sinh(self.b_n * v)
        };
        let r = scale / i;
        if r > 0.0 && r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Domain("read current has the wrong sign"))
        }
    }

    /// Switching sensitivity `s(v)`. Exactly zero at `v = 0`.
    pub fn sensitivity(&self, v: f64) -> f64 {
        if v > 0.0 {
            self.sens_p * math::expm1(self.t_p * v)
        } else if v < 0.0 {
            self.sens_n * math::expm1(self.t_n * -v)
        } else {
            0.0
        }
    }

    /// State boundary `r_p(v)` for `v > 0`, `r_n(v)` otherwise.
    pub fn boundary(&self, v: f64) -> f64 {
        let c = if v > 0.0 { &self.r_p } else { &self.r_n };
        c[0] + v * (c[1] + v * c[2])
    }

    /// Window `f(R, v)`; zero outside the switching region.
    pub fn window(&self, r: f64, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let bound = self.boundary(v);
        match (self.window, v > 0.0) {
            (WindowKind::Quadratic, true) if r < bound => (bound - r) * (bound - r),
            (WindowKind::Quadratic, false) if r > bound => (r - bound) * (r - bound),
            (WindowKind::Exponential, true) if r < self.eta * bound => {
                math::expm1(self.eta * self.k_p * (bound - r))
            }
            (WindowKind::Exponential, false) if r > self.eta * bound => {
                math::expm1(self.eta * self.k_n * (r - bound))
            }
            _ => 0.0,
        }
    }

    /// True when the bias is inside the read guard and must not move the state.
    #[inline]
    pub fn guarded(&self, v: f64) -> bool {
        v == 0.0 || v.abs() <= self.v_guard
    }

    /// Whether a step starting at `r0` under `vb` can move at all.
    fn switching(&self, r0: f64, vb: f64) -> bool {
        if self.guarded(vb) {
            return false;
        }
        let bound = self.boundary(vb);
        match (self.window, vb > 0.0) {
            (WindowKind::Quadratic, true) => r0 < bound,
            (WindowKind::Quadratic, false) => r0 > bound,
            (WindowKind::Exponential, true) => r0 < self.eta * bound,
            (WindowKind::Exponential, false) => r0 > self.eta * bound,
        }
    }

    /// Closed-form state after holding `vb` for `t` seconds, starting from `r0`.
    pub fn analytical_step(&self, r0: f64, vb: f64, t: f64) -> Result<f64> {
        check_state(r0)?;
        check_step(vb, t)?;
        if t == 0.0 || !self.switching(r0, vb) {
            return Ok(r0);
        }
        let s = self.sensitivity(vb);
        let bound = self.boundary(vb);
        let r = match (self.window, vb > 0.0) {
            // u = r_p - R obeys du/dt = -s u^2.
            (WindowKind::Quadratic, true) => {
                let u0 = bound - r0;
                bound - u0 / (1.0 + s * u0 * t)
            }
            // u = R - r_n obeys du/dt = s u^2 with s <= 0.
            (WindowKind::Quadratic, false) => {
                let u0 = r0 - bound;
                bound + u0 / (1.0 - s * u0 * t)
            }
            (WindowKind::Exponential, true) => {
                bound - exp_window_flow(self.eta * self.k_p, bound - r0, s * t)
            }
            (WindowKind::Exponential, false) => {
                bound + exp_window_flow(self.eta * self.k_n, r0 - bound, -s * t)
            }
        };
        Ok(r)
    }

    /// Right-hand side `dR/dt` of the state ODE.
    pub fn rate(&self, r: f64, v: f64, mode: Evaluation) -> f64 {
        match mode {
            Evaluation::Exact => self.sensitivity(v) * self.window(r, v),
            Evaluation::Smoothed => self.smoothed_rate(r, v),
        }
    }

    fn smoothed_rate(&self, r: f64, v: f64) -> f64 {
        let pos = sigmoid(v / SENSITIVITY_SMOOTHING);
        let neg = sigmoid(-v / SENSITIVITY_SMOOTHING);
        let s_p = self.sens_p * math::expm1(self.t_p * v.abs());
        let s_n = self.sens_n * math::expm1(self.t_n * v.abs());
        let rp = self.r_p[0] + v * (self.r_p[1] + v * self.r_p[2]);
        let rn = self.r_n[0] + v * (self.r_n[1] + v * self.r_n[2]);
        let (f_p, f_n) = match self.window {
            WindowKind::Quadratic => (
                sigmoid((rp - r) / WINDOW_SMOOTHING) * (rp - r) * (rp - r),
                sigmoid((r - rn) / WINDOW_SMOOTHING) * (r - rn) * (r - rn),
            ),
            WindowKind::Exponential => (
                sigmoid((self.eta * rp - r) / WINDOW_SMOOTHING)
                    * math::expm1(self.eta * self.k_p * (rp - r)),
                sigmoid((r - self.eta * rn) / WINDOW_SMOOTHING)
                    * math::expm1(self.eta * self.k_n * (r - rn)),
            ),
        };
        pos * s_p * f_p + neg * s_n * f_n
    }

    /// Fixed-step RK4 integration of the state ODE; same guard and
    /// boundary-hold rules as [`analytical_step`](Self::analytical_step).
    pub fn numeric_step(
        &self,
        r0: f64,
        vb: f64,
        t: f64,
        n_substeps: usize,
        mode: Evaluation,
    ) -> Result<f64> {
        check_state(r0)?;
        check_step(vb, t)?;
        if n_substeps == 0 {
            return Err(Error::Domain("n_substeps must be at least 1"));
        }
        if t == 0.0 || !self.switching(r0, vb) {
            return Ok(r0);
        }
        let h = t / n_substeps as f64;
        let g = |r: f64| self.rate(r, vb, mode);
        let mut r = r0;
        for _ in 0..n_substeps {
            let k1 = g(r);
            let k2 = g(r + 0.5 * h * k1);
            let k3 = g(r + 0.5 * h * k2);
            let k4 = g(r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Ok(r)
    }
}

/// Solution `u(t)` of `du/dt = -sigma (exp(c u) - 1)` with `sigma t = st`.
///
/// With `w = exp(-c u)` the ODE becomes linear, `1 - w(t) = (1 - w0) exp(-c st)`.
/// Far from the boundary `w` is tiny and `1 - w0` rounds to one, so `w` is then
/// formed directly as `w0 exp(-c st) + (1 - exp(-c st))`.
fn exp_window_flow(c: f64, u0: f64, st: f64) -> f64 {
    let decay = math::exp(-c * st);
    let w = math::exp(-c * u0) * decay - math::expm1(-c * st);
    if c > 0.0 && w < 0.5 {
        return -math::log(w) / c;
    }
    let a = -math::expm1(-c * u0);
    -math::log1p(-a * decay) / c
}

fn check_state(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("resistive state must be positive and finite"))
    }
}

fn check_step(vb: f64, t: f64) -> Result<()> {
    if !vb.is_finite() {
        return Err(Error::Domain("bias must be finite"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain("step duration must be non-negative and finite"));
    }
    Ok(())
}

#[inline]
fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + math::exp(-y))
    } else {
        1.0 - 1.0 / (1.0 + math::exp(y))
    }
}

/// Logistic step `1 / (1 + exp(-x / b))`.
///
/// Computed so that `smooth_theta(x, b) + smooth_theta(-x, b) == 1` holds
/// exactly in floating point.
pub fn smooth_theta(x: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain("sigmoid sharpness b must be positive"));
    }
    Ok(sigmoid(x / b))
}

/// Resistive state of one device together with its admissible bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState {
    pub r: f64,
    pub r_floor: f64,
    pub r_ceil: f64,
}

impl DeviceState {
    pub fn new(r: f64, r_floor: f64, r_ceil: f64) -> Result<Self> {
        if !(r_floor > 0.0 && r_floor.is_finite() && r_ceil.is_finite()) {
            return Err(invalid("state bounds must be finite with r_floor > 0"));
        }
        if !(r_floor <= r && r <= r_ceil) {
            return Err(invalid("resistive state outside its admissible bounds"));
        }
        Ok(DeviceState { r, r_floor, r_ceil })
    }

    /// Advance the state by one constant-bias step, clamped to the bounds.
    pub fn apply(&mut self, p: &ModelParams, v: f64, dt: f64) -> Result<()> {
        let next = p.analytical_step(self.r, v, dt)?;
        self.r = next.clamp(self.r_floor, self.r_ceil);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Taylor series of sinh, independent of libm.
    fn sinh_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for k in 1..40 {
            term *= x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn current_examples() {
        let p = ModelParams::exp_10k17k();
        assert_eq!(p.current(12e3, 0.0).unwrap(), 0.0);
        let i = p.current(16_250.0, 0.5).unwrap();
        let expect = 0.24 / 16_250.0 * sinh_series(1.405);
        assert!(rel(i, expect) < 1e-14);
        assert!(rel(i, 2.83e-5) < 2e-3);
        assert_eq!(p.current(16_250.0, -0.5).unwrap(), -i);
        assert!(matches!(p.current(0.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(p.current(-5.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn sensitivity_examples() {
        let p = ModelParams::exp_10k17k();
        assert_eq!(p.sensitivity(0.0), 0.0);
        // 743.47 * (e^5.208 - 1) and -6.8e4 * (e^0.248 - 1), evaluated in
        // extended precision.
        assert!(rel(p.sensitivity(0.8), 135_109.491_634_862_8) < 1e-12);
        assert!(rel(p.sensitivity(-0.8), -19_139.275_389_193_44) < 1e-12);
        assert!(rel(p.sensitivity(0.8), 1.351e5) < 1e-3);
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(ModelParams::exp_10k17k().boundary(0.8), 16_710.0);
        assert!((ModelParams::exp_4k5_6k().boundary(1.2) - 5319.4).abs() < 1e-9);
        assert_eq!(ModelParams::exp_4k5_6k().boundary(1e-300), 3085.0);
        assert_eq!(ModelParams::exp_10k17k().boundary(-0.8), 29_300.0 - 23_690.0 * 0.8);
    }

    fn toy_quadratic() -> ModelParams {
        // r_p(1 V) = 2 Ohm and s_p(1 V) = 1, with the guard disabled.
        ModelParams {
            window: WindowKind::Quadratic,
            sens_p: 1.0 / libm::expm1(1.0),
            t_p: 1.0,
            r_p: [2.0, 0.0, 0.0],
            r_n: [0.5, 0.0, 0.0],
            v_guard: 0.0,
            ..ModelParams::quadratic_example()
        }
    }

    #[test]
    fn window_examples() {
        let q = toy_quadratic();
        assert_eq!(q.window(2.0, 1.0), 0.0);
        assert_eq!(q.window(1.0, 1.0), 1.0);
        let e = ModelParams::exp_10k17k();
        assert_eq!(e.window(16_710.0, 0.8), 0.0);
        assert_eq!(e.window(17_000.0, 0.8), 0.0);
        assert!(rel(e.window(16_250.0, 0.8), 0.264_984_665_535_897) < 1e-12);
        assert_eq!(e.window(16_250.0, 0.0), 0.0);
    }

    #[test]
    fn analytical_step_examples() {
        let q = toy_quadratic();
        assert_eq!(q.analytical_step(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((q.analytical_step(1.0, 1.0, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let e = ModelParams::exp_10k17k();
        let r = e.analytical_step(16_250.0, 0.8, 100e-6).unwrap();
        // RK4 reference (10^4 substeps) computed independently: 16253.5646152595
        assert!(rel(r, 16_253.564_615_259_5) < 1e-12);
        assert_eq!(e.analytical_step(16_250.0, 0.3, 1.0).unwrap(), 16_250.0);
        assert_eq!(e.analytical_step(16_250.0, -0.5, 1.0).unwrap(), 16_250.0);
        assert!(matches!(e.analytical_step(16_250.0, 0.8, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_excludes_switching() {
        let e = ModelParams::exp_10k17k();
        assert_eq!(e.analytical_step(16_800.0, 0.8, 1.0).unwrap(), 16_800.0);
        // r_n(-0.8) = 10348 Ohm
        assert_eq!(e.analytical_step(10_000.0, -0.8, 1.0).unwrap(), 10_000.0);
        let q = ModelParams::quadratic_example();
        let rp = q.boundary(2.0);
        assert_eq!(q.analytical_step(rp, 2.0, 1.0).unwrap(), rp);
    }

    #[test]
    fn numeric_step_examples() {
        let q = toy_quadratic();
        assert_eq!(q.numeric_step(1.0, 1.0, 0.0, 10, Evaluation::Exact).unwrap(), 1.0);
        let r = q.numeric_step(1.0, 1.0, 1.0, 10_000, Evaluation::Exact).unwrap();
        assert!((r - 1.5).abs() < 1e-8);
        let e = ModelParams::exp_10k17k();
        let a = e.analytical_step(16_250.0, 0.8, 100e-6).unwrap();
        let n = e.numeric_step(16_250.0, 0.8, 100e-6, 10_000, Evaluation::Exact).unwrap();
        assert!(rel(a, n) < 1e-6);
        assert!(e.numeric_step(16_250.0, 0.8, 1e-6, 0, Evaluation::Exact).is_err());
    }

    #[test]
    fn smoothed_mode_tracks_exact_away_from_boundary() {
        let e = ModelParams::exp_10k17k();
        let a = e.analytical_step(16_250.0, 0.8, 100e-6).unwrap();
        let s = e.numeric_step(16_250.0, 0.8, 100e-6, 1000, Evaluation::Smoothed).unwrap();
        assert!(rel(a, s) < 1e-6);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(smooth_theta(0.0, 1e-3).unwrap(), 0.5);
        let b = 2.0;
        assert!((smooth_theta(b * libm::log(3.0), b).unwrap() - 0.75).abs() < 1e-15);
        assert!(1.0 - smooth_theta(50.0 * b, b).unwrap() < 1e-20);
        assert!(smooth_theta(1.0, 0.0).is_err());
        assert!(smooth_theta(1.0, -1.0).is_err());
    }

    #[test]
    fn validation() {
        for name in BUILTIN_NAMES {
            ModelParams::builtin(name).unwrap().validate().unwrap();
        }
        let mut p = ModelParams::exp_10k17k();
        p.eta = 0.5;
        assert!(p.validate().is_err());
        let mut p = ModelParams::exp_10k17k();
        p.k_n = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::exp_10k17k();
        p.sens_n = 1.0;
        assert!(p.validate().is_err());
        assert!(ModelParams::builtin("nope").is_none());
    }

    #[test]
    fn quadratic_example_plateaus_are_voltage_ordered() {
        let q = ModelParams::quadratic_example();
        assert!((q.boundary(2.0) - 53e3).abs() < 1.0);
        assert!(q.boundary(1.5) < q.boundary(1.8) && q.boundary(1.8) < q.boundary(2.0));
    }

    #[test]
    fn read_inversion_recovers_state() {
        let p = ModelParams::exp_10k17k();
        let i = p.current(16_250.0, 0.5).unwrap();
        assert!(rel(p.resistance_from_current(0.5, i).unwrap(), 16_250.0) < 1e-14);
        assert!(p.resistance_from_current(0.5, -i).is_err());
    }

    #[test]
    fn device_state_bounds() {
        assert!(DeviceState::new(5.0, 10.0, 20.0).is_err());
        assert!(DeviceState::new(5.0, 0.0, 20.0).is_err());
        let p = ModelParams::exp_10k17k();
        let mut s = DeviceState::new(16_250.0, 10e3, 16_500.0).unwrap();
        s.apply(&p, 0.8, 1.0).unwrap();
        assert_eq!(s.r, 16_500.0);
    }

    #[test]
    fn exponential_step_far_from_boundary() {
        // k (r_p - R) near 35: 1 - exp(-k u0) rounds to one.
        let mut p = ModelParams::exp_4k5_6k();
        p.r_p[0] = 3767.8;
        p.k_p = 9.89e-3;
        let (r0, v, t) = (2514.1, 1.24, 1.3e-13);
        let closed = p.analytical_step(r0, v, t).unwrap();
        let rk4 = p.numeric_step(r0, v, t, 20_000, Evaluation::Exact).unwrap();
        assert!(closed > r0);
        assert!(rel(closed, rk4) < 1e-10, "{closed} vs {rk4}");
    }
}
