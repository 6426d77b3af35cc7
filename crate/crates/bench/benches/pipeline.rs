use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use dronepaint_bench::{crossing_swarm, drawn_circle, hand, noisy_square};
use dronepaint_core::canvas::ExposureCanvas;
use dronepaint_core::gesture::{
    classify, extract_features, synth_dataset, train_classifier, ClassCount, DatasetSpec, GestureClass, Hyperparams,
};
use dronepaint_core::metrics::{anova_oneway, trace_errors};
use dronepaint_core::trajectory::{process, resample_uniform, FlightZoneConfig, PipelineConfig};
use glam::DVec3;

fn gesture(c: &mut Criterion) {
    let frame = hand(GestureClass::Okay);
    c.bench_function("extract_features", |b| {
        b.iter(|| extract_features(black_box(&frame)).unwrap())
    });

    let spec = DatasetSpec {
        classes: GestureClass::ALL
            .iter()
            .map(|g| ClassCount {
                class: g.name().into(),
                count: 20,
            })
            .collect(),
        ..DatasetSpec::default()
    };
    let data = synth_dataset(&spec, 1).unwrap();
    let hyper = Hyperparams {
        epochs: 3,
        ..Hyperparams::default()
    };
    let model = train_classifier(&data, &hyper, 1).unwrap();
    let features = extract_features(&frame).unwrap();
    c.bench_function("classify", |b| {
        b.iter(|| classify(&model, black_box(&features)).unwrap())
    });
}

fn trajectory(c: &mut Criterion) {
    let stroke = noisy_square();
    let cfg = PipelineConfig::default();
    c.bench_function("process_square_stroke", |b| {
        b.iter(|| process(black_box(&stroke), &cfg).unwrap())
    });
    let xy = stroke.xy();
    c.bench_function("resample_uniform_300pts", |b| {
        b.iter(|| resample_uniform(black_box(&xy), 5.0).unwrap())
    });
}

fn sim(c: &mut Criterion) {
    for n in [1, 5, 20] {
        c.bench_function(&format!("world_step_{n}_drones"), |b| {
            b.iter_batched_ref(
                || crossing_swarm(n),
                |w| {
                    let dt = w.config.dt;
                    w.step(dt)
                },
                BatchSize::SmallInput,
            )
        });
    }
}

fn canvas(c: &mut Criterion) {
    let zone = FlightZoneConfig::default();
    let mut canvas = ExposureCanvas::new(640, 480, &zone).unwrap();
    c.bench_function("canvas_accumulate", |b| {
        b.iter(|| {
            canvas
                .accumulate(black_box(DVec3::new(0.1, 0.0, 1.4)), [1.0, 0.55, 0.1], 0.05, 2.0)
                .unwrap()
        })
    });
    c.bench_function("canvas_render", |b| b.iter(|| canvas.render(1.0).unwrap()));
}

fn metrics(c: &mut Criterion) {
    let (drawn, truth) = drawn_circle(450);
    c.bench_function("trace_errors_circle_450pts", |b| {
        b.iter(|| trace_errors(black_box(&drawn), &truth).unwrap())
    });
    let groups: Vec<Vec<f64>> = (0..3)
        .map(|g| (0..30).map(|k| (g * 7 + k) as f64 % 11.0).collect())
        .collect();
    c.bench_function("anova_3x30", |b| b.iter(|| anova_oneway(black_box(&groups)).unwrap()));
}

criterion_group!(benches, gesture, trajectory, sim, canvas, metrics);
criterion_main!(benches);
