//! Drawn-stroke processing: smoothing, uniform resampling, screen-to-world
//! mapping and speed-based waypoint timing.

mod filter;
mod io;
mod resample;
mod zone;

use std::ops::Range;

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{alpha_beta_filter, FilterParams};
pub use io::{read_trajectory, write_trajectory, TrajectoryRow};
pub use resample::resample_uniform;
pub use zone::{screen_to_world, FlightZoneConfig, ScreenRect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokePoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// A drawn stroke in screen pixels.
///
/// Erasing can cut a stroke into several maximal runs; `breaks` holds the
/// point indices at which a new run starts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawStroke {
    pub points: Vec<StrokePoint>,
    #[serde(default)]
    pub breaks: Vec<usize>,
}

impl RawStroke {
    pub fn from_points(points: Vec<StrokePoint>) -> Result<Self> {
        let mut s = RawStroke::default();
        for p in points {
            s.push(p)?;
        }
        Ok(s)
    }

    /// Appends a point to the last run. Timestamps must not go backwards.
    pub fn push(&mut self, p: StrokePoint) -> Result<()> {
        if !(p.x.is_finite() && p.y.is_finite() && p.t.is_finite()) {
            return Err(Error::InvalidFrame("stroke point is not finite".into()));
        }
        if let Some(last) = self.points.last() {
            if p.t < last.t {
                return Err(Error::InvalidFrame(format!(
                    "stroke timestamp {} precedes {}",
                    p.t, last.t
                )));
            }
        }
        self.points.push(p);
        Ok(())
    }

    /// Starts a new run at the next pushed point.
    pub fn pen_up(&mut self) {
        let n = self.points.len();
        if n > 0 && self.breaks.last() != Some(&n) {
            self.breaks.push(n);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn clear(&mut self) {
        self.points.clear();
        self.breaks.clear();
    }

    /// Index ranges of the maximal runs, skipping empty ones.
    pub fn run_ranges(&self) -> Vec<Range<usize>> {
        let mut starts: Vec<usize> = std::iter::once(0)
            .chain(self.breaks.iter().copied().filter(|b| *b < self.points.len()))
            .collect();
        starts.dedup();
        let mut ranges = Vec::with_capacity(starts.len());
        for (i, &s) in starts.iter().enumerate() {
            let e = starts.get(i + 1).copied().unwrap_or(self.points.len());
            if e > s {
                ranges.push(s..e);
            }
        }
        ranges
    }

    pub fn runs(&self) -> Vec<RawStroke> {
        self.run_ranges()
            .into_iter()
            .map(|r| RawStroke {
                points: self.points[r].to_vec(),
                breaks: Vec::new(),
            })
            .collect()
    }

    pub fn xy(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p.x, p.y]).collect()
    }
}

/// Removes every point within `radius` of `center`. Survivors keep their
/// order; a removed stretch between survivors becomes a run break.
pub fn erase_region(stroke: &RawStroke, center: (f64, f64), radius: f64) -> RawStroke {
    let r2 = radius * radius;
    let mut out = RawStroke::default();
    let mut gap = false;
    let mut brk = stroke.breaks.iter().peekable();
    for (i, p) in stroke.points.iter().enumerate() {
        while brk.peek().is_some_and(|b| **b <= i) {
            if brk.next() == Some(&i) {
                gap = true;
            }
        }
        let dx = p.x - center.0;
        let dy = p.y - center.1;
        if dx * dx + dy * dy <= r2 {
            gap = true;
            continue;
        }
        if gap && !out.points.is_empty() {
            out.breaks.push(out.points.len());
        }
        gap = false;
        out.points.push(*p);
    }
    out
}

/// Flight-zone polyline produced from one stroke run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldTrajectory {
    pub waypoints: Vec<DVec3>,
    /// Resampling step in screen pixels.
    pub spacing_px: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedWaypoint {
    pub position: DVec3,
    /// Seconds from the start of the trajectory.
    pub dispatch_offset: f64,
    /// Index of the stroke run this waypoint came from.
    #[serde(default)]
    pub run: usize,
}

pub fn schedule_waypoints(traj: &WorldTrajectory, speed: f64) -> Result<Vec<TimedWaypoint>> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::config(format!("speed must be > 0, got {speed}")));
    }
    let Some(first) = traj.waypoints.first() else {
        return Err(Error::EmptyStroke);
    };
    let mut out = vec![TimedWaypoint {
        position: *first,
        dispatch_offset: 0.0,
        run: 0,
    }];
    for w in &traj.waypoints[1..] {
        let prev = out.last().expect("non-empty");
        let d = prev.position.distance(*w);
        if d == 0.0 {
            continue;
        }
        out.push(TimedWaypoint {
            position: *w,
            dispatch_offset: prev.dispatch_offset + d / speed,
            run: 0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub filter: FilterParams,
    pub spacing_px: f64,
    pub zone: FlightZoneConfig,
    /// Drawing speed of the drones along the trajectory, m/s.
    pub speed: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            filter: FilterParams::default(),
            spacing_px: 10.0,
            zone: FlightZoneConfig::default(),
            speed: 0.1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.zone.validate()?;
        if !(self.spacing_px > 0.0 && self.spacing_px.is_finite()) {
            return Err(Error::config("spacing_px must be > 0"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::config("speed must be > 0"));
        }
        Ok(())
    }
}

/// filter -> resample (pixels) -> world transform, for a single run.
pub fn world_trajectory(run: &RawStroke, cfg: &PipelineConfig) -> Result<WorldTrajectory> {
    cfg.validate()?;
    let filtered = alpha_beta_filter(run, &cfg.filter)?;
    let resampled = resample_uniform(&filtered.xy(), cfg.spacing_px)?;
    let pts: Vec<(f64, f64)> = resampled.iter().map(|p| (p[0], p[1])).collect();
    Ok(WorldTrajectory {
        waypoints: screen_to_world(&pts, &cfg.zone)?,
        spacing_px: cfg.spacing_px,
    })
}

/// Runs every stroke run through the pipeline independently.
pub fn process_runs(stroke: &RawStroke, cfg: &PipelineConfig) -> Vec<Result<Vec<TimedWaypoint>>> {
    stroke
        .runs()
        .iter()
        .map(|run| schedule_waypoints(&world_trajectory(run, cfg)?, cfg.speed))
        .collect()
}

/// Full pipeline. Multiple runs are chained: the clock keeps running across
/// the transit from one run's end to the next run's start.
pub fn process(stroke: &RawStroke, cfg: &PipelineConfig) -> Result<Vec<TimedWaypoint>> {
    cfg.validate()?;
    if stroke.is_empty() {
        return Err(Error::EmptyStroke);
    }
    let mut out: Vec<TimedWaypoint> = Vec::new();
    for (run_idx, run) in process_runs(stroke, cfg).into_iter().enumerate() {
        let run = run?;
        let offset = match out.last() {
            Some(last) => last.dispatch_offset + last.position.distance(run[0].position) / cfg.speed,
            None => 0.0,
        };
        for (i, w) in run.into_iter().enumerate() {
            let dispatch_offset = if i == 0 && !out.is_empty() {
                // guarantee strict increase even when runs touch
                offset.max(out.last().unwrap().dispatch_offset + f64::EPSILON)
            } else {
                offset + w.dispatch_offset
            };
            out.push(TimedWaypoint {
                position: w.position,
                dispatch_offset,
                run: run_idx,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> RawStroke {
        RawStroke::from_points(
            (0..n)
                .map(|i| StrokePoint {
                    x: 100.0 + 3.0 * i as f64,
                    y: 100.0 + 2.0 * i as f64,
                    t: i as f64 / 30.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn schedule_uniform_intervals() {
        let traj = WorldTrajectory {
            waypoints: (0..5).map(|i| DVec3::new(0.1 * i as f64, 0.0, 1.0)).collect(),
            spacing_px: 10.0,
        };
        let s = schedule_waypoints(&traj, 0.5).unwrap();
        for w in s.windows(2) {
            assert!((w[1].dispatch_offset - w[0].dispatch_offset - 0.2).abs() < 1e-12);
        }
        let single = WorldTrajectory {
            waypoints: vec![DVec3::ONE],
            spacing_px: 1.0,
        };
        let s = schedule_waypoints(&single, 1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].dispatch_offset, 0.0);
        assert!(matches!(schedule_waypoints(&traj, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn schedule_short_final_segment() {
        let traj = WorldTrajectory {
            waypoints: vec![
                DVec3::ZERO,
                DVec3::new(0.1, 0.0, 0.0),
                DVec3::new(0.2, 0.0, 0.0),
                DVec3::new(0.23, 0.0, 0.0),
            ],
            spacing_px: 10.0,
        };
        let s = schedule_waypoints(&traj, 0.5).unwrap();
        let last = s[3].dispatch_offset - s[2].dispatch_offset;
        assert!((last - 0.03 / 0.5).abs() < 1e-12);
        let total = s[3].dispatch_offset;
        assert!((total - 0.23 / 0.5).abs() < 1e-9);
    }

    #[test]
    fn erase_far_and_all() {
        let s = line(10);
        assert_eq!(erase_region(&s, (-500.0, -500.0), 5.0), s);
        assert!(erase_region(&s, (115.0, 110.0), 1000.0).is_empty());
    }

    #[test]
    fn erase_middle_splits_runs() {
        let s = RawStroke::from_points(vec![
            StrokePoint { x: 0.0, y: 0.0, t: 0.0 },
            StrokePoint {
                x: 50.0,
                y: 0.0,
                t: 1.0,
            },
            StrokePoint {
                x: 100.0,
                y: 0.0,
                t: 2.0,
            },
        ])
        .unwrap();
        let e = erase_region(&s, (50.0, 0.0), 10.0);
        assert_eq!(e.len(), 2);
        assert_eq!(e.breaks, vec![1]);
        let runs = e.runs();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].points[0].x, 0.0);
        assert_eq!(runs[1].points[0].x, 100.0);
        let results = process_runs(&e, &PipelineConfig::default());
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| matches!(r, Err(Error::DegenerateStroke(_)))));
        assert!(matches!(
            process(&e, &PipelineConfig::default()),
            Err(Error::DegenerateStroke(_))
        ));
    }

    #[test]
    fn erase_keeps_existing_breaks() {
        let mut s = line(10);
        s.breaks = vec![5];
        let e = erase_region(&s, (-100.0, -100.0), 1.0);
        assert_eq!(e.breaks, vec![5]);
        let e = erase_region(&s, (100.0, 100.0), 1.0);
        assert_eq!(e.breaks, vec![4]);
    }

    #[test]
    fn straight_stroke_gives_collinear_waypoints() {
        let wps = process(&line(60), &PipelineConfig::default()).unwrap();
        let a = wps[0].position;
        let b = wps.last().unwrap().position;
        let dir = (b - a).normalize();
        for w in &wps {
            let v = w.position - a;
            let dev = (v - dir * v.dot(dir)).length();
            assert!(dev < 1e-6, "deviation {dev}");
        }
        for w in wps.windows(2) {
            assert!(w[1].dispatch_offset > w[0].dispatch_offset);
        }
    }

    #[test]
    fn multi_run_schedule_is_increasing() {
        let mut s = line(40);
        s.breaks = vec![20];
        let wps = process(&s, &PipelineConfig::default()).unwrap();
        assert!(wps.windows(2).all(|w| w[1].dispatch_offset > w[0].dispatch_offset));
        assert_eq!(wps.first().unwrap().run, 0);
        assert_eq!(wps.last().unwrap().run, 1);
    }

    #[test]
    fn empty_stroke() {
        assert_eq!(
            process(&RawStroke::default(), &PipelineConfig::default()),
            Err(Error::EmptyStroke)
        );
    }

    #[test]
    fn push_rejects_time_travel() {
        let mut s = line(3);
        assert!(s
            .push(StrokePoint {
                x: 0.0,
                y: 0.0,
                t: -1.0
            })
            .is_err());
    }
}
