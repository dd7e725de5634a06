use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rram_core::model::{DeviceState, ModelParams, WindowKind};
use rram_core::stimulus::{discretize, pulse_train, read_event, Segment, Waveform};
use rram_core::transient::{run_device, RunOptions};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Exact rational value of a finite double.
fn exact(x: f64) -> BigRational {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let m = BigRational::from_integer(BigInt::from(sign) * BigInt::from(mant));
    let two = BigRational::from_integer(BigInt::from(2));
    if e >= 0 {
        m * num_traits::pow(two, e as usize)
    } else {
        m / num_traits::pow(two, (-e) as usize)
    }
}

fn params(window: WindowKind) -> ModelParams {
    match window {
        WindowKind::Exponential => ModelParams::exp_10k17k(),
        WindowKind::Quadratic => ModelParams::quadratic_example(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn discretized_pieces_sum_exactly(d in 1e-7f64..5e-3, t_s in 1e-8f64..1e-5) {
        let mut w = Waveform::new();
        w.push(Segment::new(0.8, d).unwrap());
        let out = discretize(&w, t_s).unwrap();
        let (last, full) = out.segments.split_last().unwrap();
        prop_assert!(full.iter().all(|s| s.duration == t_s && s.voltage == 0.8));
        prop_assert!(last.duration > 0.0);
        prop_assert!(last.duration <= t_s * (1.0 + 1e-9) || full.is_empty());
        let n = BigRational::from_integer(BigInt::from(full.len()));
        let sum = n * exact(t_s) + exact(last.duration);
        prop_assert_eq!(sum, exact(d));
    }

    #[test]
    fn guard_holds_state(v in -0.5f64..=0.5, r0 in 10.5e3f64..16.5e3, t in 0.0f64..1.0) {
        let p = ModelParams::exp_10k17k();
        prop_assert_eq!(p.analytical_step(r0, v, t).unwrap(), r0);
    }

    #[test]
    fn exponential_semigroup(
        v in prop_oneof![0.55f64..1.2, -1.2f64..-0.55],
        frac in 0.01f64..0.99,
        t in 1e-7f64..1e-3,
        r0 in 10.5e3f64..16.6e3,
    ) {
        let p = ModelParams::exp_10k17k();
        let one = p.analytical_step(r0, v, t).unwrap();
        let mid = p.analytical_step(r0, v, frac * t).unwrap();
        let two = p.analytical_step(mid, v, t - frac * t).unwrap();
        prop_assert!(rel(one, two) <= 1e-9, "{} vs {}", one, two);
    }

    #[test]
    fn quadratic_semigroup(
        v in prop_oneof![0.55f64..2.0, -2.0f64..-0.55],
        frac in 0.01f64..0.99,
        t in 1e-4f64..10.0,
        r0 in 30e3f64..60e3,
    ) {
        let p = ModelParams::quadratic_example();
        let one = p.analytical_step(r0, v, t).unwrap();
        let mid = p.analytical_step(r0, v, frac * t).unwrap();
        let two = p.analytical_step(mid, v, t - frac * t).unwrap();
        prop_assert!(rel(one, two) <= 1e-9, "{} vs {}", one, two);
    }

    #[test]
    fn steps_move_toward_boundary_without_crossing(
        quad in any::<bool>(),
        v in prop_oneof![0.55f64..1.5, -1.5f64..-0.55],
        t in 1e-7f64..1e-2,
        r0 in 11e3f64..16e3,
    ) {
        let window = if quad { WindowKind::Quadratic } else { WindowKind::Exponential };
        let p = params(window);
        let r0 = if quad { r0 * 3.0 } else { r0 };
        let b = p.boundary(v);
        let r = p.analytical_step(r0, v, t).unwrap();
        if v > 0.0 && r0 < b {
            prop_assert!(r >= r0 && r <= b);
        } else if v < 0.0 && r0 > b {
            prop_assert!(r <= r0 && r >= b);
        } else {
            prop_assert_eq!(r, r0);
        }
    }

    #[test]
    fn reads_of_frozen_state_are_exact(r in 10e3f64..17e3, v_read in 0.05f64..0.5) {
        let p = ModelParams::exp_10k17k();
        let w = read_event(v_read, 1e-4, 1e-6).unwrap();
        let tr = run_device(&p, DeviceState::new(r, 10e3, 17e3).unwrap(), &w, RunOptions::default()).unwrap();
        prop_assert_eq!(tr.final_r, r);
        prop_assert!(rel(tr.reads[0].rs, r) <= 1e-12);
    }
}

#[test]
fn trace_is_deterministic() {
    let p = ModelParams::exp_10k17k();
    let s = DeviceState::new(12e3, 10e3, 17e3).unwrap();
    let w = pulse_train(50, 0.8, 10e-6, 5e-6).unwrap();
    let a = run_device(&p, s, &w, RunOptions::default()).unwrap();
    let b = run_device(&p, s, &w, RunOptions::default()).unwrap();
    assert_eq!(a, b);
}
