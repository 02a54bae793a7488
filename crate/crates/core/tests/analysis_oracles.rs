mod common;

use common::oracle::{ip_normal_equations, pearson_exact, rel_err, zoh_grid};
use common::step_log;
use corae::analysis::{dyad_disagreement, linear_fit};
use corae::model::TimeCode;
use corae::{
    interpersonal_perception, interpersonal_perception_timed, pearson, resample, RatingSeries,
};
use proptest::prelude::*;

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(-7i32..=7, 10..max_len)
}

proptest! {
    #[test]
    fn ip_matches_normal_equations(values in series_strategy(2000)) {
        let (slope, intercept, r2) = ip_normal_equations(&values);
        let fit = interpersonal_perception(&RatingSeries::new(0.1, values).unwrap()).unwrap();
        prop_assert!(rel_err(fit.slope, slope) < 1e-9, "{} vs {}", fit.slope, slope);
        prop_assert!(rel_err(fit.intercept, intercept) < 1e-9, "{} vs {}", fit.intercept, intercept);
        prop_assert!(rel_err(fit.r_squared, r2) < 1e-9, "{} vs {}", fit.r_squared, r2);
    }

    #[test]
    fn constant_series_has_slope_c(c in -7i32..=7, n in 2usize..5000) {
        let fit = interpersonal_perception(&RatingSeries::new(0.1, vec![c; n]).unwrap()).unwrap();
        prop_assert!((fit.slope - f64::from(c)).abs() <= 1e-12);
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pearson_matches_definition(
        pairs in prop::collection::vec((-1000i64..1000, -1000i64..1000), 3..500),
    ) {
        let (x, y): (Vec<i64>, Vec<i64>) = pairs.into_iter().unzip();
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let r = pearson(&xf, &yf).unwrap();
        prop_assert!((r - pearson_exact(&x, &y)).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert_eq!(r, pearson(&yf, &xf).unwrap());
    }

    #[test]
    fn pearson_invariant_under_positive_affine_maps(
        x in prop::collection::vec(-50i64..50, 3..200),
        seed_y in prop::collection::vec(-50i64..50, 200),
        a in 1i64..20,
        b in -100i64..100,
    ) {
        let y = &seed_y[..x.len()];
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let mapped: Vec<f64> = x.iter().map(|&v| (a * v + b) as f64).collect();
        let r = pearson(&xf, &yf).unwrap();
        prop_assert!((pearson(&mapped, &yf).unwrap() - r).abs() <= 1e-12);
        let flipped: Vec<f64> = x.iter().map(|&v| (b - a * v) as f64).collect();
        prop_assert!((pearson(&flipped, &yf).unwrap() + r).abs() <= 1e-12);
    }

    #[test]
    fn self_correlation_is_exact(x in prop::collection::vec(-1e6f64..1e6, 2..300)) {
        prop_assume!(x.iter().any(|&v| v != x[0]));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        prop_assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn timecode_seconds_round_trip(frames in 0u64..(24 * 3600 * 100), fps in 1u32..=100) {
        let tc = TimeCode::from_frames(frames % (24 * 3600 * u64::from(fps)), fps).unwrap();
        prop_assert_eq!(TimeCode::from_seconds(tc.to_seconds(), fps).unwrap(), tc);
        prop_assert_eq!(TimeCode::parse(&tc.to_string(), fps).unwrap(), tc);
    }

    #[test]
    fn timecode_order_matches_frames(a in 0u64..1_000_000, b in 0u64..1_000_000) {
        let (ta, tb) = (TimeCode::from_frames(a, 30).unwrap(), TimeCode::from_frames(b, 30).unwrap());
        prop_assert_eq!(ta.cmp(&tb), a.cmp(&b));
        prop_assert_eq!(ta.to_seconds() < tb.to_seconds(), a < b);
    }

    #[test]
    fn resample_is_zero_order_hold(
        steps in prop::collection::vec((1u64..90, prop::bool::ANY), 1..40),
        tail in 0u64..60,
    ) {
        let mut frame = 0;
        let mut rating = 0;
        let mut changes = Vec::new();
        for (gap, up) in steps {
            frame += gap;
            rating = (rating + if up { 1 } else { -1 }).clamp(-7, 7);
            changes.push((frame, rating));
        }
        let end = frame + tail;
        let duration = end as f64 / 30.0;
        let log = step_log(&changes, 30, duration);
        for (period, rate) in [(0.1, 10u64), (0.05, 20u64)] {
            let count = (end * rate / 30 + 1) as usize;
            let expected = zoh_grid(&changes, 0, 30, rate, count);
            let series = resample(&log, period).unwrap();
            prop_assert_eq!(series.values, expected);
        }
    }

    #[test]
    fn dyad_disagreement_is_symmetric_and_zero_on_self(
        a in prop::collection::vec(-7i32..=7, 1..300),
        b in prop::collection::vec(-7i32..=7, 1..300),
    ) {
        let sa = RatingSeries::new(0.1, a).unwrap();
        let sb = RatingSeries::new(0.1, b).unwrap();
        prop_assert_eq!(dyad_disagreement(&sa, &sb).unwrap(), dyad_disagreement(&sb, &sa).unwrap());
        prop_assert_eq!(dyad_disagreement(&sa, &sa).unwrap(), 0.0);
    }
}

#[test]
fn timed_slope_equals_index_slope() {
    let values: Vec<i32> = (0..500).map(|i| ((i * 7919) % 15) - 7).collect();
    for period in [0.1, 0.05, 0.25] {
        let series = RatingSeries::new(period, values.clone()).unwrap();
        let a = interpersonal_perception(&series).unwrap().slope;
        let b = interpersonal_perception_timed(&series).unwrap().slope;
        assert!(rel_err(b, a) < 1e-12, "{period}: {a} vs {b}");
    }
}

#[test]
fn linear_fit_recovers_exact_line() {
    let x: Vec<f64> = (0..100).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.5).collect();
    let fit = linear_fit(&x, &y).unwrap();
    assert_eq!((fit.slope, fit.intercept, fit.r_squared), (3.0, -2.5, 1.0));
}

#[test]
fn dyad_rejects_mixed_periods() {
    let a = RatingSeries::new(0.1, vec![1, 2]).unwrap();
    let b = RatingSeries::new(0.05, vec![1, 2]).unwrap();
    assert!(dyad_disagreement(&a, &b).is_err());
}
