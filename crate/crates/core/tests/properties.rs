mod common;

use common::{random_case, random_formula, random_trace, rng};
use proptest::prelude::*;
use stlstar::constraint::ConstraintState;
use stlstar::interval;
use stlstar::robustness::{sliding_max, sliding_min};
use stlstar::{
    conservative_range, monitor, monitor_baseline, negation_normal_form, oracle_rho, oracle_sat,
    parse, robustness_baseline, threshold_transform, Atom, Cmp, ConstraintIndex, Expr, Formula,
    FreezeEnv, FreezeVar, GenKind, GenSpec, IncrementalRuns, MonitorOptions, RangeMode, Trace,
    Window,
};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9
}

fn brute_eventually(tr: &Trace, pts: &[bool], w: &Window, k: usize) -> Vec<bool> {
    (0..tr.len())
        .map(|i| i >= k && (i..tr.len()).any(|j| pts[j] && w.contains(tr.time(i), tr.time(j))))
        .collect()
}

fn brute_until(tr: &Trace, a: &[bool], b: &[bool], w: &Window, k: usize) -> Vec<bool> {
    (0..tr.len())
        .map(|i| {
            i >= k
                && (i..tr.len())
                    .any(|j| b[j] && w.contains(tr.time(i), tr.time(j)) && (i..j).all(|m| a[m]))
        })
        .collect()
}

fn as_points(l: &interval::IntervalList, n: usize) -> Vec<bool> {
    (0..n).map(|i| l.contains(i)).collect()
}

fn window_strategy() -> impl Strategy<Value = Window> {
    prop_oneof![
        Just(Window::UNBOUNDED),
        (0u8..6).prop_map(|a| Window::new(f64::from(a) / 2.0, f64::INFINITY)),
        (0u8..6, 0u8..9).prop_map(|(a, d)| {
            let a = f64::from(a) / 2.0;
            Window::new(a, a + f64::from(d) / 2.0)
        }),
    ]
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn monitors_agree_with_oracle(seed in any::<u64>()) {
        let (f, tr) = random_case(&mut rng(seed), 25);
        let want = oracle_sat(&f, &tr, 0, &FreezeEnv::zero(&f, &tr)).unwrap();
        prop_assert_eq!(monitor(&f, &tr, MonitorOptions::default()).unwrap().satisfied, want);
        prop_assert_eq!(monitor(&f, &tr, MonitorOptions { early_stop: true }).unwrap().satisfied, want);
        prop_assert_eq!(monitor_baseline(&f, &tr).unwrap(), want);
    }

    #[test]
    fn normal_form_preserves_semantics(seed in any::<u64>()) {
        let (f, tr) = random_case(&mut rng(seed), 12);
        let g = negation_normal_form(&f);
        let env = FreezeEnv::zero(&f, &tr);
        prop_assert_eq!(oracle_sat(&g, &tr, 0, &env).unwrap(), oracle_sat(&f, &tr, 0, &env).unwrap());
        prop_assert!(close(oracle_rho(&g, &tr, 0, &env).unwrap(), oracle_rho(&f, &tr, 0, &env).unwrap()));
    }

    #[test]
    fn baseline_robustness_matches_oracle(seed in any::<u64>()) {
        let (f, tr) = random_case(&mut rng(seed), 15);
        let want = oracle_rho(&f, &tr, 0, &FreezeEnv::zero(&f, &tr)).unwrap();
        prop_assert!(close(robustness_baseline(&f, &tr).unwrap(), want));
        let neg = robustness_baseline(&Formula::not(f.clone()), &tr).unwrap();
        prop_assert!(close(neg, -want));
    }

    #[test]
    fn sign_consistency(seed in any::<u64>(), i in 0usize..25) {
        let (f, tr) = random_case(&mut rng(seed), 25);
        let i = i % tr.len();
        let env = FreezeEnv::zero(&f, &tr);
        let rho = oracle_rho(&f, &tr, i, &env).unwrap();
        let sat = oracle_sat(&f, &tr, i, &env).unwrap();
        prop_assert!(!(rho > 0.0 && !sat) && !(rho < 0.0 && sat));
    }

    #[test]
    fn threshold_decision_is_monotone(seed in any::<u64>(), r1 in -4.0f64..4.0, d in 0.0f64..3.0) {
        let (f, tr) = random_case(&mut rng(seed), 15);
        let g = negation_normal_form(&f);
        let at = |r: f64| monitor(&threshold_transform(&g, r).unwrap(), &tr, MonitorOptions::default())
            .unwrap()
            .satisfied;
        if at(r1) {
            prop_assert!(at(r1 - d));
        }
    }

    #[test]
    fn range_contains_every_environment(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, tr) = random_case(&mut r, 8);
        let g = negation_normal_form(&f);
        let exact = conservative_range(&g, &tr, RangeMode::Exact).unwrap();
        let loose = conservative_range(&g, &tr, RangeMode::PerVariable).unwrap();
        prop_assert!(loose.lo <= exact.lo + 1e-9 && exact.hi <= loose.hi + 1e-9);
        let vars: Vec<_> = g.freeze_vars().into_iter().collect();
        let n = tr.len();
        for a in 0..n {
            for b in 0..n {
                let mut env = FreezeEnv::zero(&g, &tr);
                for (v, idx) in vars.iter().zip([a, b]) {
                    env.set(*v, tr.value(idx, v.dim));
                }
                for i in 0..n {
                    let rho = oracle_rho(&g, &tr, i, &env).unwrap();
                    prop_assert!(rho.is_infinite() || (rho >= exact.lo - 1e-9 && rho <= exact.hi + 1e-9));
                }
            }
        }
    }

    #[test]
    fn interval_operators_match_pointwise(
        seed in any::<u64>(),
        w in window_strategy(),
        k in 0usize..20,
        uniform in any::<bool>(),
    ) {
        let mut r = rng(seed);
        let n = 1 + (seed % 30) as usize;
        let tr = random_trace(&mut r, n, 2, uniform);
        let a: Vec<bool> = (0..n).map(|i| tr.value(i, 1) >= 0.0).collect();
        let b: Vec<bool> = (0..n).map(|i| tr.value(i, 2) > 0.5).collect();
        let (la, lb) = (interval::transform(&a, 0), interval::transform(&b, 0));
        let k = k.min(n - 1);
        prop_assert_eq!(as_points(&interval::eventually(&la, &w, &tr, k), n), brute_eventually(&tr, &a, &w, k));
        prop_assert_eq!(as_points(&interval::until(&la, &lb, &w, &tr, k), n), brute_until(&tr, &a, &b, &w, k));
        let not_a: Vec<bool> = a.iter().map(|x| !x).collect();
        let g: Vec<bool> = brute_eventually(&tr, &not_a, &w, k).iter().enumerate().map(|(i, x)| i >= k && !x).collect();
        prop_assert_eq!(as_points(&interval::always(&la, &w, &tr, k), n), g);
    }

    #[test]
    fn incremental_runs_track_points(
        init in proptest::collection::vec(any::<bool>(), 1..60),
        steps in proptest::collection::vec((0usize..60, proptest::collection::vec(0usize..60, 0..12)), 0..8),
    ) {
        let n = init.len();
        let mut truth = init.clone();
        let mut runs = IncrementalRuns::new(n);
        runs.rebuild(0, |l| truth[l]);
        let mut base = 0;
        for (adv, flips) in steps {
            base = (base + adv % 3).min(n - 1);
            runs.advance(base);
            for l in flips {
                let l = l % n;
                if l >= base {
                    truth[l] = !truth[l];
                    runs.toggle(l);
                }
            }
            runs.resolve();
            prop_assert_eq!(runs.runs(), interval::transform(&truth, base));
        }
    }

    #[test]
    fn constraint_updates_match_direct_evaluation(
        seed in any::<u64>(),
        kind in 0usize..4,
        c in -2.0f64..2.0,
    ) {
        let mut r = rng(seed);
        let n = 1 + (seed % 25) as usize;
        let tr = random_trace(&mut r, n, 2, true);
        let z = Expr::frozen(1, 1);
        let s = Expr::signal(1);
        let atom = match kind {
            0 => Atom::new(s, Cmp::Le, Expr::add(z, Expr::constant(c))),
            1 => Atom::new(Expr::abs(Expr::sub(z, s)), Cmp::Le, Expr::constant(c.abs())),
            2 => Atom::new(Expr::abs(Expr::sub(s, z)), Cmp::Gt, Expr::constant(c.abs())),
            _ => Atom::new(Expr::mul(s.clone(), Expr::signal(2)), Cmp::Ge, z),
        };
        let idx = ConstraintIndex::build(&atom, &tr);
        let mut st = ConstraintState::new(n);
        for i in 0..n {
            let zv = tr.value(i, 1);
            let env = move |_: FreezeVar| zv;
            let got = if i == 0 { idx.init(&mut st, &tr, &env, i) } else { idx.update(&mut st, &tr, &env, i) };
            let direct: Vec<bool> = (0..n).map(|l| atom.holds(&|d| tr.value(l, d), &env)).collect();
            prop_assert_eq!(got, interval::transform(&direct, i));
        }
    }

    #[test]
    fn display_reparses(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 5, 2, 2);
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(cfg(1000))]

    #[test]
    fn sliding_filters_match_naive(
        values in proptest::collection::vec(-100.0f64..100.0, 0..40),
        steps in proptest::collection::vec((0usize..3, 0usize..4), 0..40),
    ) {
        let n = values.len();
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut windows = Vec::new();
        for (dl, dh) in steps {
            lo = (lo + dl).min(n);
            hi = (hi + dh).max(lo).min(n);
            windows.push((lo, hi));
        }
        let naive_max: Vec<f64> = windows.iter().map(|&(a, b)| values[a..b].iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let naive_min: Vec<f64> = windows.iter().map(|&(a, b)| values[a..b].iter().copied().fold(f64::INFINITY, f64::min)).collect();
        prop_assert_eq!(sliding_max(&values, &windows), naive_max);
        prop_assert_eq!(sliding_min(&values, &windows), naive_min);
    }
}

#[test]
fn generated_traces_are_deterministic_and_round_trip() {
    for kind in [
        GenKind::Pulse,
        GenKind::DriftingPulse,
        GenKind::Stairs,
        GenKind::Stabilize,
        GenKind::Crossing,
    ] {
        let spec = GenSpec {
            noise: 0.05,
            nonuniform: true,
            seed: 9,
            ..GenSpec::new(kind, 50)
        };
        let a = Trace::generate(&spec).unwrap();
        assert_eq!(a, Trace::generate(&spec).unwrap());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(Trace::read_csv(buf.as_slice()).unwrap(), a);
    }
}

#[test]
fn early_stop_cuts_outer_iterations() {
    let f = stlstar::experiments::phi1();
    let tr = Trace::generate(&GenSpec::new(GenKind::Stabilize, 200)).unwrap();
    let full = monitor(&f, &tr, MonitorOptions::default()).unwrap();
    let early = monitor(&f, &tr, MonitorOptions { early_stop: true }).unwrap();
    assert!(full.satisfied && early.satisfied);
    assert!(early.stats.outer_iterations < full.stats.outer_iterations);
    let g = parse("G (freeze(s*1). F s > s*1)").unwrap();
    let flat = Trace::uniform(1.0, vec![vec![1.0; 20]]).unwrap();
    let v = monitor(&g, &flat, MonitorOptions { early_stop: true }).unwrap();
    assert!(!v.satisfied);
    assert_eq!(v.stats.outer_iterations, 1);
}
