use glam::DVec3;
use serde::{Deserialize, Serialize};

use super::{DroneStatus, SimEvent, Streaming, World};
use crate::canvas::ExposureCanvas;
use crate::trajectory::TimedWaypoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Grounded,
    TakingOff,
    /// Airborne and holding the current targets.
    Holding,
    /// Flying dark to the first waypoint.
    Approaching,
    Painting,
    Landing,
}

#[derive(Debug, Clone, Copy)]
struct Splat {
    intensity: f64,
    sigma_px: f64,
}

/// Sequences take-off, waypoint streaming and landing on top of a [`World`],
/// optionally exposing a canvas while the LEDs are on.
#[derive(Debug, Clone)]
pub struct Mission {
    pub world: World,
    phase: Phase,
    schedule: Vec<TimedWaypoint>,
    active: Option<usize>,
    paint_start: f64,
    reached: Vec<bool>,
    canvas: Option<(ExposureCanvas, Splat)>,
}

impl Mission {
    pub fn new(world: World) -> Self {
        let n = world.drones.len();
        let phase = if world.drones.iter().all(|d| d.status == DroneStatus::Grounded) {
            Phase::Grounded
        } else {
            Phase::Holding
        };
        Self {
            world,
            phase,
            schedule: Vec::new(),
            active: None,
            paint_start: 0.0,
            reached: vec![false; n],
            canvas: None,
        }
    }

    pub fn with_canvas(mut self, canvas: ExposureCanvas, intensity: f64, sigma_px: f64) -> Self {
        self.canvas = Some((canvas, Splat { intensity, sigma_px }));
        self
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn schedule(&self) -> &[TimedWaypoint] {
        &self.schedule
    }

    /// Index of the most recently dispatched waypoint.
    pub fn progress(&self) -> Option<usize> {
        self.active
    }

    pub fn canvas(&self) -> Option<&ExposureCanvas> {
        self.canvas.as_ref().map(|(c, _)| c)
    }

    pub fn clear_canvas(&mut self) {
        if let Some((c, _)) = &mut self.canvas {
            *c = ExposureCanvas::new(c.width(), c.height(), c.zone()).expect("existing canvas is valid");
        }
    }

    fn set_leds(&mut self, on: bool) {
        for d in &mut self.world.drones {
            d.led_on = on;
        }
    }

    /// Lifts every drone to its hover point. Ignored unless grounded or landing.
    pub fn take_off(&mut self) -> bool {
        if !matches!(self.phase, Phase::Grounded | Phase::Landing) {
            return false;
        }
        for i in 0..self.world.drones.len() {
            self.world.drones[i].status = DroneStatus::Airborne;
            self.world.targets[i] = self.world.config.hover_point(i);
        }
        self.set_leds(false);
        self.phase = Phase::TakingOff;
        true
    }

    /// Descends vertically from the current positions. Ignored when not flying.
    pub fn land(&mut self) -> bool {
        if matches!(self.phase, Phase::Grounded | Phase::Landing) {
            return false;
        }
        let floor = self.world.config.bounds.min.z;
        for (d, t) in self.world.drones.iter_mut().zip(&mut self.world.targets) {
            d.status = DroneStatus::Landing;
            d.led_on = false;
            *t = DVec3::new(d.position.x, d.position.y, floor);
        }
        self.phase = Phase::Landing;
        true
    }

    /// Starts flying a schedule. Requires airborne drones; an empty schedule
    /// leaves the swarm holding.
    pub fn begin_paint(&mut self, schedule: Vec<TimedWaypoint>) -> bool {
        if !matches!(
            self.phase,
            Phase::TakingOff | Phase::Holding | Phase::Approaching | Phase::Painting
        ) || schedule.is_empty()
        {
            return false;
        }
        let first = schedule[0].position;
        self.schedule = schedule;
        self.active = None;
        self.reached = vec![false; self.world.drones.len()];
        for i in 0..self.world.drones.len() {
            self.world.targets[i] = first + self.world.config.offsets[i];
        }
        self.set_leds(false);
        self.phase = Phase::Approaching;
        true
    }

    fn all_within(&self, tol: f64) -> bool {
        self.world
            .drones
            .iter()
            .zip(&self.world.targets)
            .all(|(d, t)| d.position.distance(*t) <= tol)
    }

    fn dispatch(&mut self, index: usize, t: f64, events: &mut Vec<SimEvent>) {
        let from = self.active.map_or(0, |a| a + 1);
        for k in from..=index {
            for drone in 0..self.world.drones.len() {
                events.push(SimEvent::WaypointDispatched { drone, index: k, t });
            }
        }
        self.active = Some(index);
        let wp = self.schedule[index];
        for i in 0..self.world.drones.len() {
            self.world.targets[i] = wp.position + self.world.config.offsets[i];
        }
    }

    fn segment_lit(&self) -> bool {
        match self.active {
            Some(a) if a >= 1 => self.schedule[a].run == self.schedule[a - 1].run,
            _ => false,
        }
    }

    fn update_phase(&mut self, events: &mut Vec<SimEvent>) {
        let t = self.world.time();
        let tol = self.world.config.arrival_tolerance;
        match self.phase {
            Phase::TakingOff if self.all_within(tol) => self.phase = Phase::Holding,
            Phase::Approaching if self.all_within(tol) => {
                self.phase = Phase::Painting;
                self.paint_start = t;
                self.dispatch(0, t, events);
            }
            Phase::Painting => {
                let last = self.schedule.len() - 1;
                let active = self.active.unwrap_or(0);
                let next = match self.world.config.streaming {
                    Streaming::Time => {
                        let elapsed = t - self.paint_start;
                        self.schedule
                            .partition_point(|w| w.dispatch_offset <= elapsed)
                            .saturating_sub(1)
                    }
                    Streaming::Arrival if active < last && self.all_within(tol) => active + 1,
                    Streaming::Arrival => active,
                };
                if next > active {
                    self.dispatch(next, t, events);
                }
                if self.active == Some(last) {
                    for i in 0..self.world.drones.len() {
                        let close = self.world.drones[i].position.distance(self.world.targets[i]) <= tol;
                        if !self.reached[i] && close {
                            self.reached[i] = true;
                            events.push(SimEvent::GoalReached { drone: i, t });
                        }
                    }
                    if self.reached.iter().all(|r| *r) {
                        self.phase = Phase::Holding;
                    }
                }
                let lit = self.phase == Phase::Painting && self.segment_lit();
                for (d, reached) in self.world.drones.iter_mut().zip(&self.reached) {
                    d.led_on = lit && !reached;
                }
            }
            Phase::Landing if self.world.drones.iter().all(|d| d.status == DroneStatus::Grounded) => {
                self.phase = Phase::Grounded
            }
            _ => {}
        }
        if self.phase != Phase::Painting {
            self.set_leds(false);
        }
    }

    /// One simulation step: phase bookkeeping, physics, exposure.
    pub fn tick(&mut self) -> Vec<SimEvent> {
        let mut events = Vec::new();
        self.update_phase(&mut events);
        let dt = self.world.config.dt;
        events.extend(self.world.step(dt));
        if let Some((canvas, splat)) = &mut self.canvas {
            for d in self.world.drones.iter().filter(|d| d.led_on) {
                canvas
                    .accumulate(d.position, d.led, splat.intensity, splat.sigma_px)
                    .expect("splat parameters validated at construction");
            }
        }
        if self.phase == Phase::Landing && self.world.drones.iter().all(|d| d.status == DroneStatus::Grounded) {
            self.phase = Phase::Grounded;
        }
        events
    }
}
