//! Reference trace-error magnitudes for hand (H) and mouse (M) drawing of the
//! three test shapes, and the synthetic traces shipped as fixtures for them.

use super::{synth_trace, GroundTruthShape, NoiseModel, TraceSynth};
use crate::error::Result;
use crate::trajectory::StrokePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceColumn {
    pub shape: &'static str,
    pub method: &'static str,
    pub max_error_cm: f64,
    pub mean_error_cm: f64,
    pub rmse_cm: f64,
    pub time_s: f64,
}

const fn col(shape: &'static str, method: &'static str, v: [f64; 4]) -> ReferenceColumn {
    ReferenceColumn {
        shape,
        method,
        max_error_cm: v[0],
        mean_error_cm: v[1],
        rmse_cm: v[2],
        time_s: v[3],
    }
}

pub const REFERENCE_MAGNITUDES: [ReferenceColumn; 6] = [
    col("Square", "H", [18.61, 6.45, 8.09, 15.50]),
    col("Square", "M", [10.51, 3.69, 4.61, 5.52]),
    col("Circle", "H", [17.36, 6.33, 7.85, 13.47]),
    col("Circle", "M", [8.18, 3.29, 4.03, 4.89]),
    col("Triangle", "H", [12.81, 4.13, 5.15, 12.04]),
    col("Triangle", "M", [6.23, 2.19, 2.70, 4.50]),
];

/// Default evaluation shapes: square side 1 m, circle radius 0.5 m,
/// triangle side 1 m, centered in the default flight zone.
pub fn reference_shape(label: &str) -> Option<GroundTruthShape> {
    match label.to_ascii_lowercase().as_str() {
        "square" => Some(GroundTruthShape::square(1.0)),
        "circle" => Some(GroundTruthShape::circle(0.5)),
        "triangle" => Some(GroundTruthShape::triangle(1.0)),
        _ => None,
    }
}

/// File stem used for a column's fixture, e.g. `square_h`.
pub fn fixture_name(c: &ReferenceColumn) -> String {
    format!("{}_{}", c.shape.to_ascii_lowercase(), c.method.to_ascii_lowercase())
}

/// A 30 Hz trace around the column's shape with perpendicular Gaussian noise
/// whose sigma equals the column's RMSE, lasting the column's time.
pub fn fixture_trace(c: &ReferenceColumn, seed: u64) -> Result<Vec<StrokePoint>> {
    let shape = reference_shape(c.shape).expect("reference shapes are known");
    synth_trace(
        &shape.polyline(),
        &TraceSynth {
            duration: c.time_s,
            fps: 30.0,
            sigma: c.rmse_cm / 100.0,
            noise: NoiseModel::Perpendicular,
            seed,
        },
    )
}
