use std::sync::Arc;

use chronoscale::cli::{
    parse_args_with_env, Command, Format, FunctionSpec, RunConfig, ScaleArg, TargetId,
};
use chronoscale::harness::{gen_witness, ScaleSpec, WitnessSpec, WitnessStrategy};
use chronoscale::{check_hypothesis, ClassicalId, GridFunction, TheoremCase, TheoremId, TimeScale};
use proptest::prelude::*;

fn scale_strategy() -> impl Strategy<Value = TimeScale> {
    (-50.0..50.0f64, prop::collection::vec(1e-3..10.0f64, 1..60)).prop_map(|(start, gaps)| {
        let mut x = start;
        let mut points = vec![x];
        for g in gaps {
            x += g;
            points.push(x);
        }
        TimeScale::from_points(points).unwrap()
    })
}

fn scale_and_values() -> impl Strategy<Value = (TimeScale, Vec<f64>)> {
    scale_strategy().prop_flat_map(|ts| {
        let n = ts.len();
        (Just(ts), prop::collection::vec(-100.0..100.0f64, n))
    })
}

proptest! {
    #[test]
    fn jump_operators_are_consistent(ts in scale_strategy()) {
        for i in 0..ts.len() {
            let t = ts.point(i);
            let s = ts.sigma(t).unwrap();
            let r = ts.rho(t).unwrap();
            prop_assert!(s >= t && r <= t);
            prop_assert_eq!(ts.mu(t).unwrap(), s - t);
            prop_assert_eq!(ts.nu(t).unwrap(), t - r);
            if i < ts.last_index() {
                prop_assert_eq!(ts.rho(s).unwrap(), t);
            }
            if i > 0 {
                prop_assert_eq!(ts.sigma(r).unwrap(), t);
            }
        }
        prop_assert_eq!(ts.sigma(ts.max()).unwrap(), ts.max());
        prop_assert_eq!(ts.rho(ts.min()).unwrap(), ts.min());
    }

    #[test]
    fn cumulative_integral_differentiates_back((ts, values) in scale_and_values(), pick in 0usize..1000) {
        let ts = Arc::new(ts);
        let f = GridFunction::new(Arc::clone(&ts), values).unwrap();
        let anchor = ts.point(pick % ts.len());
        let g = f.cumulative_delta(anchor).unwrap();
        for i in 0..ts.last_index() {
            let scale = (g.at(i).abs() + g.at(i + 1).abs()) / ts.mu_at(i) + f.at(i).abs();
            prop_assert!((g.delta_at(i) - f.at(i)).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn delta_integral_is_additive((ts, values) in scale_and_values(), i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
        let ts = Arc::new(ts);
        let n = ts.len();
        let mut idx = [i % n, j % n, k % n];
        idx.sort_unstable();
        let [a, b, c] = idx.map(|i| ts.point(i));
        let f = GridFunction::new(Arc::clone(&ts), values).unwrap();
        let whole = f.delta_integral(a, c).unwrap();
        let split = f.delta_integral(a, b).unwrap() + f.delta_integral(b, c).unwrap();
        let bound = f.map(f64::abs).unwrap().delta_integral(a, c).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * bound.max(1.0));
    }

    #[test]
    fn power_rule_sandwich(ts in scale_strategy(), start in 0.0..5.0f64, slopes in prop::collection::vec(0.0..3.0f64, 60), p in prop::sample::select(vec![1.5, 2.0, 3.0, 5.5])) {
        let ts = Arc::new(ts);
        let mut v = start;
        let mut values = vec![v];
        for (i, slope) in slopes.iter().take(ts.last_index()).enumerate() {
            v += ts.mu_at(i) * slope;
            values.push(v);
        }
        let g = GridFunction::new(Arc::clone(&ts), values).unwrap();
        for i in 0..ts.last_index() {
            let b = g.power_bounds_delta(p, ts.point(i)).unwrap();
            let tol = 1e-10 * 1f64.max(b.lower.abs()).max(b.upper.abs()).max(b.magnitude);
            prop_assert!(b.exact - b.lower >= -tol && b.upper - b.exact >= -tol);
        }
    }

    #[test]
    fn witnesses_pass_the_checker(seed in any::<u64>(), ts in scale_strategy(), which in 0usize..7, bump in 0.0..2.0f64, equality in any::<bool>()) {
        let ts = Arc::new(ts);
        let id = TheoremId::ALL[which];
        let case = TheoremCase::new(id, id.exponent_floor() + bump, ts.min(), ts.max()).unwrap();
        let strategy = if equality { WitnessStrategy::EqualityCase } else { WitnessStrategy::SteepFamily };
        if let Ok(f) = gen_witness(&case, &ts, &WitnessSpec::with_strategy(strategy), seed) {
            prop_assert!(check_hypothesis(&case, &f).unwrap().holds);
            prop_assert!(f.values().iter().all(|&v| v >= 0.0));
            prop_assert!(f.is_nondecreasing_on(0, ts.last_index()));
        }
    }

    #[test]
    fn scale_json_round_trips(ts in scale_strategy()) {
        let text = serde_json::to_string(&ts).unwrap();
        prop_assert_eq!(serde_json::from_str::<TimeScale>(&text).unwrap(), ts);
    }

    #[test]
    fn config_round_trips(config in config_strategy()) {
        let args = std::iter::once("chronoscale".to_string()).chain(config.to_args());
        prop_assert_eq!(parse_args_with_env(args, None).unwrap(), config.clone());
        let json = serde_json::to_string(&config).unwrap();
        prop_assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), config);
    }
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    let theorem = (0usize..7, 0.0..4.0f64).prop_map(|(k, bump)| {
        let id = TheoremId::ALL[k];
        (TargetId::Theorem(id), id.exponent_floor() + bump)
    });
    let format = prop::sample::select(vec![Format::Json, Format::Csv, Format::Human]);
    let common = (any::<u64>(), 1usize..100_000, format);
    let verify = (theorem.clone(), 0.01..2.0f64, 1usize..20, -5.0..5.0f64).prop_map(
        |((id, e), h, n, c0)| {
            let mut config = RunConfig::new(Command::Verify);
            config.theorem = Some(id);
            config.exponent = Some(e);
            config.scale = Some(ScaleArg(ScaleSpec::HLattice {
                a: 0.0,
                b: h * n as f64,
                h,
            }));
            config.function = Some(FunctionSpec::Linear { c0, slope: h });
            config
        },
    );
    let sweep = (theorem.clone(), any::<bool>()).prop_map(|((id, e), fixed)| {
        let mut config = RunConfig::new(Command::Sweep);
        config.theorem = Some(id);
        config.exponent = fixed.then_some(e);
        config
    });
    let refine = (
        0usize..3,
        0.0..2.0f64,
        0i32..6,
        0i32..6,
        prop::option::of(-1.0..1.0f64),
    )
        .prop_map(|(k, bump, lo, extra, m)| {
            let id = ClassicalId::ALL[k];
            let mut config = RunConfig::new(Command::Refine);
            config.theorem = Some(TargetId::Classical(id));
            config.exponent = Some(3.0 + bump);
            config.a = Some(0.0);
            config.b = Some(1.0);
            config.function = Some(FunctionSpec::Power { k: 1.0 + bump });
            config.levels = (lo, lo + extra);
            config.continuum_margin = m;
            config
        });
    let selftest = Just(RunConfig::new(Command::Selftest));
    (prop_oneof![verify, sweep, refine, selftest], common).prop_map(
        |(mut config, (seed, trials, format))| {
            config.seed = seed;
            config.trials = trials;
            config.format = format;
            config
        },
    )
}
