use proptest::prelude::*;
use rram_core::model::ModelParams;
use rram_core::primitives::*;

fn load_strategy() -> impl Strategy<Value = Load> {
    prop_oneof![
        (200.0f64..20e3).prop_map(Load::Linear),
        (4e3f64..17e3).prop_map(|r| Load::Memristor {
            params: ModelParams::exp_10k17k(),
            r
        }),
    ]
}

fn fet_strategy() -> impl Strategy<Value = MosfetParams> {
    (
        any::<bool>(),
        0.3f64..1.2,
        0.3f64..1.5,
        1e-4f64..5e-3,
        0.0f64..0.1,
    )
        .prop_map(|(p, vth, extra, k, lambda)| {
            let r = Ratings::uniform(6.0);
            if p {
                MosfetParams::pmos(vth, vth + extra, k, lambda, r)
            } else {
                MosfetParams::nmos(vth, vth + extra, k, lambda, r)
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn orientation_ordering(fet in fet_strategy(), r in 300.0f64..5e3, vdd in 2.0f64..6.0) {
        let rep = compare_orientations(&fet, Load::Linear(r), vdd).unwrap();
        let (s2r, d2r) = (Orientation::SourceToRram, Orientation::DrainToRram);
        prop_assert!(rep.min_current(s2r) >= rep.min_current(d2r));
        prop_assert!(rep.max_current(d2r) >= rep.max_current(s2r));
        prop_assert_eq!(rep.recommended(), s2r);
    }

    #[test]
    fn series_solution_satisfies_kvl_and_kcl(
        fet in fet_strategy(),
        load in load_strategy(),
        w in -5.0f64..5.0,
        b in -5.0f64..5.0,
        g in -6.0f64..6.0,
        s2r in any::<bool>(),
    ) {
        let cell = OneT1R {
            fet,
            orientation: if s2r { Orientation::SourceToRram } else { Orientation::DrainToRram },
            load,
            v_word: w,
            v_bit: b,
            v_gate: g,
            v_bulk: 0.0,
        };
        let s = dc_solve_series(&cell).unwrap();
        prop_assert!((s.v_mem + s.v_fet - (w - b)).abs() <= 1e-12);
        let mismatch = (cell.fet_current(s.node) - s.i).abs();
        prop_assert!(mismatch <= 1e-12f64.max(1e-9 * s.i.abs()), "mismatch {}", mismatch);
    }

    #[test]
    fn branch_currents_are_monotone_in_node(
        fet in fet_strategy(),
        load in load_strategy(),
        w in -5.0f64..5.0,
        b in -5.0f64..5.0,
        g in -6.0f64..6.0,
        s2r in any::<bool>(),
    ) {
        let cell = OneT1R {
            fet,
            orientation: if s2r { Orientation::SourceToRram } else { Orientation::DrainToRram },
            load,
            v_word: w,
            v_bit: b,
            v_gate: g,
            v_bulk: 0.0,
        };
        let (lo, hi) = (w.min(b), w.max(b));
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            let cur = (cell.fet_current(x), load.current(x - b));
            if let Some((f0, l0)) = prev {
                prop_assert!(cur.0 <= f0 + 1e-15);
                prop_assert!(cur.1 >= l0 - 1e-15);
            }
            prev = Some(cur);
        }
    }

    #[test]
    fn soac_lists_each_violation_once(
        vg in -12.0f64..12.0, vs in -12.0f64..12.0, vd in -12.0f64..12.0, vb in -12.0f64..12.0,
        r in 1.0f64..10.0,
    ) {
        let fet = MosfetParams::nmos(0.5, 0.8, 1e-3, 0.0, Ratings::uniform(r));
        let bias = FetBias { device: "M".into(), fet, vg, vs, vd, vb };
        let got = soac_check(std::slice::from_ref(&bias));
        let expect: Vec<(Pair, f64)> = [
            (Pair::Gs, vg - vs),
            (Pair::Gd, vg - vd),
            (Pair::Ds, vd - vs),
            (Pair::Db, vd - vb),
        ]
        .into_iter()
        .filter(|(_, x)| x.abs() > r)
        .map(|(p, x)| (p, x.abs()))
        .collect();
        prop_assert_eq!(got.len(), expect.len());
        for (v, (p, x)) in got.iter().zip(&expect) {
            prop_assert_eq!(v.pair, *p);
            prop_assert_eq!(v.value, *x);
            prop_assert_eq!(v.rating, r);
        }
    }

    #[test]
    fn linearized_line_bounds_samples(r in 1e3f64..5e4, vmax in 0.5f64..3.0) {
        let p = ModelParams::exp_10k17k();
        let samples: Vec<(f64, f64)> = (-40..=40)
            .map(|k| {
                let v = match k {
                    -40 => -vmax,
                    40 => vmax,
                    _ => vmax * k as f64 / 40.0,
                };
                (v, p.current(r, v).unwrap())
            })
            .collect();
        let r_wc = worst_case_linearize(&samples, (-vmax, vmax)).unwrap();
        for &(v, i) in &samples {
            prop_assert!((v / r_wc).abs() >= i.abs() * (1.0 - 1e-15));
        }
    }
}

#[test]
fn sinh_curve_worst_case_at_range_ends() {
    let p = ModelParams::exp_10k17k();
    let r = 16.25e3;
    let samples: Vec<(f64, f64)> = (-200..=200)
        .map(|k| {
            let v = k as f64 / 100.0;
            (v, p.current(r, v).unwrap())
        })
        .collect();
    let r_wc = worst_case_linearize(&samples, (-2.0, 2.0)).unwrap();
    let at_end = (2.0 / p.current(r, 2.0).unwrap()).abs();
    assert_eq!(r_wc, at_end);
}

#[test]
fn two_t1r_sweep_within_ratings() {
    let ratings = Ratings {
        v_gs_max: 3.0,
        v_ds_max: 10.0,
        v_gd_max: 10.0,
        v_db_max: 10.0,
    };
    let q5 = MosfetParams::nmos(0.7, 1.5, 1e-3, 0.01, ratings);
    let q4 = MosfetParams::pmos(0.7, 1.5, 1e-3, 0.01, ratings);
    let cell = TwoT1R::high_voltage(q5, q4, Load::Linear(10e3));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..=100 {
        let vw = k as f64 * 0.1;
        for active in [Active::Q5Nmos, Active::Q4Pmos] {
            let s = dc_solve_2t1r(&cell, vw, active).unwrap();
            assert!(s.gate_window_ok);
            assert!(soac_check(&s.fet_biases(&cell)).is_empty(), "{vw} {active:?}");
            lo = lo.min(s.v_mem.abs());
            hi = hi.max(s.v_mem.abs());
            match active {
                Active::Q5Nmos => assert!(s.v_mem >= 0.0 && s.v_mem <= vw),
                Active::Q4Pmos => assert!(s.v_mem <= 0.0 && s.v_mem >= vw - 10.0),
            }
        }
    }
    assert!(lo <= 1e-9 && hi >= 9.0, "span [{lo}, {hi}]");
}
