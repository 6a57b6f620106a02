use std::collections::BTreeMap;

use harmonic_core::bessel::bessel_j;
use harmonic_core::dynamics::{solve_ode_at, time_grid, OdeOptions};
use harmonic_core::lattice::{discrete_laplacian, first_difference, InitialCondition, LatticeSlice};
use harmonic_core::spectral::{classify, q_delta_fourier};
use harmonic_core::sweep::deterministic_max;
use proptest::prelude::*;

fn values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn table(half: i64) -> impl Strategy<Value = BTreeMap<i64, f64>> {
    prop::collection::vec(-1.0f64..1.0, (2 * half + 1) as usize).prop_map(move |v| (-half..=half).zip(v).collect())
}

proptest! {
    #[test]
    fn laplacian_is_linear(a in values(3..40), b in values(3..40), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let n = a.len().min(b.len());
        let sa = LatticeSlice::new(-5, a[..n].to_vec()).unwrap();
        let sb = LatticeSlice::new(-5, b[..n].to_vec()).unwrap();
        let lhs = discrete_laplacian(&sa.combine(x, &sb, y)).unwrap();
        let rhs = discrete_laplacian(&sa).unwrap().combine(x, &discrete_laplacian(&sb).unwrap(), y);
        for (k, v) in lhs.iter() {
            prop_assert!((v - rhs.get(k).unwrap()).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn laplacian_is_minus_difference_of_differences(a in values(3..60), off in -30i64..30) {
        let s = LatticeSlice::new(off, a).unwrap();
        let lap = discrete_laplacian(&s).unwrap();
        let d = first_difference(&s).unwrap();
        for (k, v) in lap.iter() {
            let want = -(d.get(k + 1).unwrap() - d.get(k).unwrap());
            prop_assert!((v - want).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn transform_is_hermitian(a in values(3..30), lambda in 0.01f64..3.1) {
        let s = LatticeSlice::new(-(a.len() as i64) / 2, a).unwrap();
        let z = q_delta_fourier(&s, &[lambda, -lambda]).unwrap();
        prop_assert!((z[0] - z[1].conj()).norm() <= 1e-10 * (1.0 + z[0].norm()));
    }

    #[test]
    fn bessel_is_bounded(n in 0u32..300, t in 0.0f64..500.0) {
        prop_assert!(bessel_j(n, t).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn json_round_trip(t in table(4), b in -5.0f64..5.0, w in 8i64..300) {
        for ic in [
            InitialCondition::custom(t.clone()),
            InitialCondition::spike(b),
            InitialCondition::new(harmonic_core::lattice::Rule::Constant { value: b }, w).unwrap(),
        ] {
            let back = InitialCondition::from_json(&ic.to_json()).unwrap();
            prop_assert_eq!(back, ic);
        }
    }

    #[test]
    fn max_ignores_order(mut v in prop::collection::vec(-1e3f64..1e3, 1..50), seed in any::<u64>()) {
        let (_, m) = deterministic_max(&v).unwrap();
        let k = (seed % v.len() as u64) as usize;
        v.rotate_left(k);
        prop_assert_eq!(deterministic_max(&v).unwrap().1, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_is_linear(a in table(5), b in table(5), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let combo: BTreeMap<i64, f64> = a.iter().map(|(k, v)| (*k, x * v + y * b[k])).collect();
        let idx: Vec<i64> = (-8..=8).collect();
        let times = time_grid(5.0, 0.5);
        let run = |t: BTreeMap<i64, f64>| solve_ode_at(&InitialCondition::custom(t), 1.0, &times, 0.01, &idx, OdeOptions::default()).unwrap();
        let (ta, tb, tc) = (run(a), run(b), run(combo));
        for i in 0..times.len() {
            for j in 0..idx.len() {
                prop_assert!((tc.q[i][j] - x * ta.q[i][j] - y * tb.q[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn integrability_trace_is_monotone(t in table(4)) {
        let report = classify(&InitialCondition::custom(t));
        for tr in [&report.integrability_trace, &report.h_integrability_trace] {
            prop_assert!(tr.len() >= 2);
            for w in tr.windows(2) {
                prop_assert!(w[1].0 < w[0].0);
                prop_assert!(w[1].1 >= w[0].1 - 1e-12 * w[0].1.abs());
            }
        }
    }
}
