use serde::{Deserialize, Serialize};

use super::{RawStroke, StrokePoint};
use crate::error::{Error, Result};

/// Gains of a position/velocity alpha-beta tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub alpha: f64,
    pub beta: f64,
    /// Step used when consecutive timestamps do not advance.
    pub fallback_dt: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            beta: 0.41,
            fallback_dt: 1.0 / 30.0,
        }
    }
}

impl FilterParams {
    /// The identity filter: every measurement is taken as-is.
    pub const IDENTITY: FilterParams = FilterParams {
        alpha: 1.0,
        beta: 0.0,
        fallback_dt: 1.0 / 30.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.fallback_dt > 0.0 && self.fallback_dt.is_finite()) {
            return Err(Error::config("fallback_dt must be > 0"));
        }
        Ok(())
    }
}

/// Single-axis tracker state.
#[derive(Debug, Clone, Copy)]
struct AxisState {
    x: f64,
    v: f64,
}

impl AxisState {
    fn update(&mut self, z: f64, dt: f64, p: &FilterParams) -> f64 {
        let predicted = self.x + self.v * dt;
        let residual = z - predicted;
        // blended form so alpha = 1 reproduces the measurement exactly
        self.x = (1.0 - p.alpha) * predicted + p.alpha * z;
        self.v += (p.beta / dt) * residual;
        self.x
    }
}

fn filter_run(points: &[StrokePoint], p: &FilterParams, out: &mut Vec<StrokePoint>) {
    let Some(first) = points.first() else {
        return;
    };
    let mut ax = AxisState { x: first.x, v: 0.0 };
    let mut ay = AxisState { x: first.y, v: 0.0 };
    out.push(*first);
    for w in points.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let dt = cur.t - prev.t;
        let dt = if dt > 0.0 { dt } else { p.fallback_dt };
        out.push(StrokePoint {
            x: ax.update(cur.x, dt, p),
            y: ay.update(cur.y, dt, p),
            t: cur.t,
        });
    }
}

/// Smooths each run of the stroke independently; timestamps and run breaks
/// pass through unchanged.
pub fn alpha_beta_filter(stroke: &RawStroke, p: &FilterParams) -> Result<RawStroke> {
    p.validate()?;
    if stroke.points.is_empty() {
        return Err(Error::EmptyStroke);
    }
    let mut points = Vec::with_capacity(stroke.points.len());
    for range in stroke.run_ranges() {
        filter_run(&stroke.points[range], p, &mut points);
    }
    Ok(RawStroke {
        points,
        breaks: stroke.breaks.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stroke(f: impl Fn(f64) -> (f64, f64), n: usize) -> RawStroke {
        RawStroke::from_points(
            (0..n)
                .map(|i| {
                    let t = i as f64 / 30.0;
                    let (x, y) = f(t);
                    StrokePoint { x, y, t }
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_input_is_fixed_point() {
        let s = stroke(|_| (12.5, -3.0), 60);
        let out = alpha_beta_filter(&s, &FilterParams::default()).unwrap();
        for p in &out.points[50..] {
            assert!((p.x - 12.5).abs() < 1e-6 && (p.y + 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_gains_pass_input_through() {
        let s = stroke(|t| ((t * 7.0).sin() * 40.0, t * t), 100);
        let out = alpha_beta_filter(&s, &FilterParams::IDENTITY).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn ramp_has_no_steady_state_lag() {
        let s = stroke(|t| (t, 0.0), 201);
        let out = alpha_beta_filter(&s, &FilterParams::default()).unwrap();
        let last = out.points.last().unwrap();
        assert!((last.x - last.t).abs() < 1e-3, "lag {}", last.t - last.x);
    }

    #[test]
    fn repeated_timestamps_use_fallback_dt() {
        let pts = vec![
            StrokePoint { x: 0.0, y: 0.0, t: 1.0 },
            StrokePoint { x: 1.0, y: 0.0, t: 1.0 },
            StrokePoint { x: 2.0, y: 0.0, t: 1.0 },
        ];
        let out = alpha_beta_filter(&RawStroke::from_points(pts).unwrap(), &FilterParams::default()).unwrap();
        assert!(out.points.iter().all(|p| p.x.is_finite()));
        assert!((out.points[1].x - 0.7).abs() < 1e-12);
    }

    #[test]
    fn runs_filtered_independently() {
        let pts: Vec<_> = (0..6)
            .map(|i| StrokePoint {
                x: if i < 3 { 0.0 } else { 100.0 },
                y: 0.0,
                t: i as f64,
            })
            .collect();
        let mut s = RawStroke::from_points(pts).unwrap();
        s.breaks = vec![3];
        let out = alpha_beta_filter(&s, &FilterParams::default()).unwrap();
        assert_eq!(out.points[3].x, 100.0);
        assert_eq!(out.breaks, vec![3]);
    }

    #[test]
    fn empty_and_bad_params() {
        assert_eq!(
            alpha_beta_filter(&RawStroke::default(), &FilterParams::default()),
            Err(Error::EmptyStroke)
        );
        let s = stroke(|t| (t, t), 3);
        let bad = FilterParams {
            alpha: 1.5,
            ..FilterParams::default()
        };
        assert!(matches!(alpha_beta_filter(&s, &bad), Err(Error::Config(_))));
    }
}
