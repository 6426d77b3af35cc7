use dronepaint_core::metrics::{trace_errors_against, GroundTruthShape, TraceReport};
use dronepaint_core::scenario::{shape_stroke, ShapeInput};
use dronepaint_core::trajectory::{process, resample_uniform, FilterParams, PipelineConfig, StrokePoint};
use proptest::prelude::*;

fn seg_dist_ternary(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let at = |t: f64| {
        let x = a[0] + (b[0] - a[0]) * t - p[0];
        let y = a[1] + (b[1] - a[1]) * t - p[1];
        (x * x + y * y).sqrt()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) < at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.0).min(at(1.0)).min(at((lo + hi) / 2.0))
}

fn oracle_report(drawn: &[StrokePoint], truth: &[[f64; 2]]) -> (f64, f64, f64) {
    let errs: Vec<f64> = drawn
        .iter()
        .map(|p| {
            truth
                .windows(2)
                .map(|w| seg_dist_ternary([p.x, p.y], w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = errs.len() as f64;
    let max = errs.iter().cloned().fold(0.0, f64::max) * 100.0;
    let mean = errs.iter().sum::<f64>() / n * 100.0;
    let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt() * 100.0;
    (max, mean, rmse)
}

/// Arc-length position of each output point, walking the input forward.
fn arc_positions(input: &[[f64; 2]], output: &[[f64; 2]]) -> Option<Vec<f64>> {
    let mut cum = vec![0.0];
    for w in input.windows(2) {
        cum.push(cum.last().unwrap() + ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt());
    }
    let mut seg = 0;
    let mut out = Vec::new();
    for p in output {
        let found = (seg..input.len() - 1).find(|&j| seg_dist_ternary(*p, input[j], input[j + 1]) <= 1e-9)?;
        seg = found;
        let a = input[found];
        out.push(cum[found] + ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)).sqrt());
    }
    Some(out)
}

fn polyline() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0f64..500.0, 0.0f64..500.0).prop_map(|(x, y)| [x, y]), 2..25)
        .prop_filter("distinct endpoints", |v| v.windows(2).all(|w| w[0] != w[1]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn resampler_spacing_and_fidelity(poly in polyline(), spacing in 1.0f64..40.0) {
        let out = resample_uniform(&poly, spacing).unwrap();
        prop_assert_eq!(out[0], poly[0]);
        prop_assert_eq!(*out.last().unwrap(), *poly.last().unwrap());
        let s = arc_positions(&poly, &out).expect("every output point lies on the input");
        for w in s.windows(2).take(s.len().saturating_sub(2)) {
            prop_assert!(((w[1] - w[0]) - spacing).abs() <= 1e-6 * spacing, "{} vs {}", w[1] - w[0], spacing);
        }
        let last_gap = s[s.len() - 1] - s[s.len() - 2];
        prop_assert!(last_gap <= spacing * (1.0 + 1e-6) && last_gap > 0.0);
    }

    #[test]
    fn trace_errors_match_dense_oracle(
        truth in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| [x, y]), 2..12),
        drawn in prop::collection::vec((-2.5f64..2.5, -2.5f64..2.5), 2..60),
    ) {
        let drawn: Vec<StrokePoint> = drawn
            .iter()
            .enumerate()
            .map(|(k, (x, y))| StrokePoint { x: *x, y: *y, t: k as f64 / 30.0 })
            .collect();
        let r: TraceReport = trace_errors_against(&drawn, &truth).unwrap();
        let (max, mean, rmse) = oracle_report(&drawn, &truth);
        prop_assert!((r.max_error - max).abs() <= 1e-6);
        prop_assert!((r.mean_error - mean).abs() <= 1e-6);
        prop_assert!((r.rmse - rmse).abs() <= 1e-6);
        prop_assert_eq!(r.n_samples, drawn.len());
    }
}

fn plane_rmse(filter: FilterParams, seed: u64) -> f64 {
    let cfg = PipelineConfig {
        filter,
        ..PipelineConfig::default()
    };
    let truth = GroundTruthShape::square(1.0);
    let shape = ShapeInput {
        truth,
        sigma_px: 2.0,
        duration: 10.0,
        fps: 30.0,
    };
    let stroke = shape_stroke(&shape, &cfg.zone, seed).unwrap();
    let drawn: Vec<StrokePoint> = process(&stroke, &cfg)
        .unwrap()
        .iter()
        .map(|w| StrokePoint {
            x: w.position.x,
            y: w.position.z,
            t: w.dispatch_offset,
        })
        .collect();
    trace_errors_against(&drawn, &truth.polyline()).unwrap().rmse
}

#[test]
fn filtering_lowers_mean_error_on_noisy_square() {
    let seeds = 0..20u64;
    let n = seeds.clone().count() as f64;
    let filtered: f64 = seeds
        .clone()
        .map(|s| plane_rmse(FilterParams::default(), s))
        .sum::<f64>()
        / n;
    let raw: f64 = seeds.map(|s| plane_rmse(FilterParams::IDENTITY, s)).sum::<f64>() / n;
    assert!(filtered < raw, "{filtered} vs {raw}");
}
