use serde::{Deserialize, Serialize};

use super::{Mission, Phase, SimConfig, SimEvent, Trace, World};
use crate::canvas::{ExposureCanvas, DEFAULT_INTENSITY, DEFAULT_SIGMA_PX};
use crate::error::{Error, Result};
use crate::field::{FieldParams, Obstacle};
use crate::trajectory::{FlightZoneConfig, StrokePoint, TimedWaypoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CanvasSpec {
    pub width: usize,
    pub height: usize,
    /// Splat intensity per simulation step.
    pub intensity: f64,
    pub sigma_px: f64,
    pub gain: f64,
}

impl Default for CanvasSpec {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            intensity: DEFAULT_INTENSITY,
            sigma_px: DEFAULT_SIGMA_PX,
            gain: crate::canvas::DEFAULT_GAIN,
        }
    }
}

impl CanvasSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("canvas dimensions must be positive"));
        }
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.sigma_px) && pos(self.gain) && self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::config("canvas sigma_px and gain must be > 0, intensity >= 0"));
        }
        Ok(())
    }

    pub fn blank(&self, zone: &FlightZoneConfig) -> Result<ExposureCanvas> {
        self.validate()?;
        ExposureCanvas::new(self.width, self.height, zone)
    }

    /// Re-exposes a recorded trace: one splat per lit row, in row order.
    pub fn expose(&self, zone: &FlightZoneConfig, trace: &Trace) -> Result<ExposureCanvas> {
        let mut canvas = self.blank(zone)?;
        for r in trace.rows.iter().filter(|r| r.lit()) {
            canvas.accumulate(r.position, r.led, self.intensity, self.sigma_px)?;
        }
        Ok(canvas)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub config: SimConfig,
    pub field: FieldParams,
    pub obstacles: Vec<Obstacle>,
    pub schedule: Vec<TimedWaypoint>,
    pub zone: FlightZoneConfig,
    pub canvas: CanvasSpec,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub trace: Trace,
    pub events: Vec<SimEvent>,
    pub canvas: ExposureCanvas,
    /// False when the time limit cut the sequence short.
    pub completed: bool,
}

impl Episode {
    /// Where drone `i` painted, as (world x, world z, t) with its formation
    /// offset removed.
    pub fn painted_path(&self, config: &SimConfig, drone: usize) -> Vec<StrokePoint> {
        let off = config.offsets[drone];
        self.trace
            .rows
            .iter()
            .filter(|r| r.drone_id == drone && r.lit())
            .map(|r| StrokePoint {
                x: r.position.x - off.x,
                y: r.position.z - off.z,
                t: r.t,
            })
            .collect()
    }
}

/// Take-off, paint the schedule (if any), hold, land. Runs headlessly until
/// the swarm is grounded again or `max_time` elapses.
pub fn run_episode(spec: &EpisodeSpec) -> Result<Episode> {
    let world = World::new(spec.config.clone(), spec.field, spec.obstacles.clone())?;
    let canvas = spec.canvas.blank(&spec.zone)?;
    let mut mission = Mission::new(world).with_canvas(canvas, spec.canvas.intensity, spec.canvas.sigma_px);
    let mut trace = Trace::new(spec.config.drone_count());
    trace.record(&mission.world);
    let mut events = Vec::new();
    let limit = spec.config.max_time;

    let mut run = |m: &mut Mission, done: &dyn Fn(&Mission) -> bool| -> bool {
        while !done(m) {
            if m.world.time() >= limit {
                return false;
            }
            events.extend(m.tick());
            trace.record(&m.world);
        }
        true
    };

    mission.take_off();
    let mut completed = run(&mut mission, &|m| m.phase() == Phase::Holding);
    if completed && mission.begin_paint(spec.schedule.clone()) {
        completed = run(&mut mission, &|m| m.phase() == Phase::Holding);
    }
    if completed {
        mission.land();
        completed = run(&mut mission, &|m| m.phase() == Phase::Grounded);
    }
    let canvas = mission.canvas().expect("canvas attached").clone();
    Ok(Episode {
        trace,
        events,
        canvas,
        completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::line_abreast;
    use glam::DVec3;

    fn spec(schedule: Vec<TimedWaypoint>, drones: usize) -> EpisodeSpec {
        EpisodeSpec {
            config: SimConfig {
                offsets: line_abreast(drones, 0.5),
                ..SimConfig::default()
            },
            field: FieldParams::default(),
            obstacles: vec![],
            schedule,
            zone: FlightZoneConfig::default(),
            canvas: CanvasSpec {
                width: 64,
                height: 48,
                ..CanvasSpec::default()
            },
        }
    }

    #[test]
    fn empty_schedule_takes_off_and_lands() {
        let ep = run_episode(&spec(vec![], 2)).unwrap();
        assert!(ep.completed);
        assert!(ep
            .events
            .iter()
            .all(|e| !matches!(e, SimEvent::WaypointDispatched { .. })));
        assert_eq!(
            ep.events
                .iter()
                .filter(|e| matches!(e, SimEvent::Landed { .. }))
                .count(),
            2
        );
        let peak = ep.trace.rows.iter().map(|r| r.position.z).fold(0.0, f64::max);
        assert!(peak > 0.95);
        assert!(ep.canvas.buffer().iter().all(|p| *p == [0.0; 3]));
        let last = &ep.trace.rows[ep.trace.rows.len() - 2..];
        assert!(last.iter().all(|r| r.position.z == 0.0 && r.velocity == DVec3::ZERO));
    }

    #[test]
    fn painting_matches_trace_reexposure() {
        let schedule: Vec<TimedWaypoint> = (0..6)
            .map(|k| TimedWaypoint {
                position: DVec3::new(-0.5 + 0.2 * k as f64, 0.0, 1.5),
                dispatch_offset: 2.0 * k as f64,
                run: 0,
            })
            .collect();
        let s = spec(schedule, 2);
        let ep = run_episode(&s).unwrap();
        assert!(ep.completed);
        assert!(ep.canvas.buffer().iter().any(|p| p[0] > 0.0));
        let again = s.canvas.expose(&s.zone, &ep.trace).unwrap();
        assert_eq!(again, ep.canvas);
        let path = ep.painted_path(&s.config, 1);
        assert!(!path.is_empty());
        assert!(path.iter().all(|p| (p.y - 1.5).abs() < 0.05));
        assert_eq!(ep.trace.checksum(), run_episode(&s).unwrap().trace.checksum());
    }

    #[test]
    fn time_limit_reports_incomplete() {
        let mut s = spec(vec![], 1);
        s.config.max_time = 0.5;
        let ep = run_episode(&s).unwrap();
        assert!(!ep.completed);
    }
}
