//! Shared inputs for the benchmarks.

use dronepaint_core::field::FieldParams;
use dronepaint_core::gesture::{canonical_pose, GestureClass, HandFrame};
use dronepaint_core::metrics::{synth_trace, GroundTruthShape, NoiseModel, TraceSynth};
use dronepaint_core::scenario::{shape_stroke, ShapeInput};
use dronepaint_core::sim::{line_abreast, SimConfig, World};
use dronepaint_core::trajectory::{FlightZoneConfig, RawStroke, StrokePoint};
use glam::DVec3;

pub fn hand(class: GestureClass) -> HandFrame {
    canonical_pose(class)
}

/// 10 s hand-drawn unit square at 30 fps, 2 px jitter.
pub fn noisy_square() -> RawStroke {
    let shape = ShapeInput {
        truth: GroundTruthShape::square(1.0),
        sigma_px: 2.0,
        duration: 10.0,
        fps: 30.0,
    };
    shape_stroke(&shape, &FlightZoneConfig::default(), 1).expect("valid shape")
}

/// Circle trace in the drawing plane, meters.
pub fn drawn_circle(points: usize) -> (Vec<StrokePoint>, GroundTruthShape) {
    let truth = GroundTruthShape::circle(0.5);
    let fps = 30.0;
    let spec = TraceSynth {
        duration: (points - 1) as f64 / fps,
        fps,
        sigma: 0.03,
        noise: NoiseModel::Perpendicular,
        seed: 2,
    };
    (synth_trace(&truth.polyline(), &spec).expect("valid trace"), truth)
}

/// `n` airborne drones in a row, each targeting the opposite end.
pub fn crossing_swarm(n: usize) -> World {
    let cfg = SimConfig {
        offsets: line_abreast(n, (5.0 / n as f64).min(0.5)),
        ..SimConfig::default()
    };
    let starts: Vec<DVec3> = (0..n)
        .map(|i| DVec3::new(-1.5 + 3.0 * i as f64 / (n.max(2) - 1) as f64, 0.0, 1.5))
        .collect();
    let mut w = World::new(cfg, FieldParams::default(), Vec::new())
        .expect("valid world")
        .with_airborne(&starts)
        .expect("positions match swarm");
    w.targets = starts.iter().rev().copied().collect();
    w
}
