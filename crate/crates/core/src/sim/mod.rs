//! Fixed-timestep kinematic swarm simulation.
//!
//! Each airborne drone is commanded with the potential-field velocity toward
//! its current target and follows it with a first-order lag.

mod episode;
mod mission;
mod trace;

use std::collections::BTreeSet;

use glam::DVec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{nearest_obstacle_point, total_force, FieldParams, Obstacle};

pub use episode::{run_episode, CanvasSpec, Episode, EpisodeSpec};
pub use mission::{Mission, Phase};
pub use trace::{min_separation, read_trace, write_events, write_trace, Trace, TraceRow};

/// Altitude below which a landing drone is considered down.
pub const TOUCHDOWN_ALTITUDE: f64 = 0.01;
/// Magnitude of the nudge that separates exactly coincident drones.
pub const COINCIDENT_JITTER: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DroneStatus {
    Grounded,
    Airborne,
    Landing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub id: usize,
    pub position: DVec3,
    pub velocity: DVec3,
    pub led: [f64; 3],
    pub led_on: bool,
    pub status: DroneStatus,
}

impl DroneState {
    /// LED color as seen by the camera: black when off.
    pub fn emitted(&self) -> [f64; 3] {
        if self.led_on {
            self.led
        } else {
            [0.0; 3]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: DVec3,
    pub max: DVec3,
}

impl Bounds {
    pub fn contains(&self, p: DVec3) -> bool {
        p.cmpge(self.min).all() && p.cmple(self.max).all()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Streaming {
    /// Waypoint k becomes active at its dispatch offset.
    Time,
    /// The next waypoint becomes active once every drone is within tolerance.
    Arrival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub v_max: f64,
    /// First-order velocity response time, s.
    pub tau: f64,
    pub takeoff_altitude: f64,
    pub bounds: Bounds,
    /// Ground point the formation lifts off from.
    pub home: DVec3,
    /// One entry per drone; added to every target.
    pub offsets: Vec<DVec3>,
    pub seed: u64,
    pub streaming: Streaming,
    pub arrival_tolerance: f64,
    pub led_color: [f64; 3],
    /// Episode time limit, s.
    pub max_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            v_max: 0.5,
            tau: 0.3,
            takeoff_altitude: 1.0,
            bounds: Bounds {
                min: DVec3::new(-3.0, -3.0, 0.0),
                max: DVec3::new(3.0, 3.0, 3.0),
            },
            home: DVec3::ZERO,
            offsets: line_abreast(1, 0.5),
            seed: 0,
            streaming: Streaming::Time,
            arrival_tolerance: 0.05,
            led_color: [1.0, 0.55, 0.1],
            max_time: 600.0,
        }
    }
}

/// Offsets for `n` drones spaced along world y (the camera's depth axis),
/// centered on zero.
pub fn line_abreast(n: usize, spacing: f64) -> Vec<DVec3> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| DVec3::new(0.0, (i as f64 - mid) * spacing, 0.0))
        .collect()
}

impl SimConfig {
    pub fn drone_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn ground_point(&self, i: usize) -> DVec3 {
        let p = self.home + self.offsets[i];
        DVec3::new(p.x, p.y, self.bounds.min.z)
    }

    pub fn hover_point(&self, i: usize) -> DVec3 {
        let p = self.ground_point(i);
        DVec3::new(p.x, p.y, self.takeoff_altitude)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.dt) && pos(self.tau) && pos(self.v_max) && pos(self.max_time)) {
            return Err(Error::config("dt, tau, v_max and max_time must be > 0"));
        }
        if !pos(self.arrival_tolerance) {
            return Err(Error::config("arrival_tolerance must be > 0"));
        }
        if self.offsets.is_empty() {
            return Err(Error::config("swarm needs at least one drone"));
        }
        if !(self.bounds.min.is_finite() && self.bounds.max.is_finite() && self.bounds.min.cmplt(self.bounds.max).all())
        {
            return Err(Error::config("bounds must satisfy min < max"));
        }
        if self.led_color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::config("led_color channels must lie in [0, 1]"));
        }
        for i in 0..self.drone_count() {
            if !self.offsets[i].is_finite()
                || !self.bounds.contains(self.ground_point(i))
                || !self.bounds.contains(self.hover_point(i))
            {
                return Err(Error::config(format!(
                    "take-off point of drone {i} lies outside bounds"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SimEvent {
    WaypointDispatched { drone: usize, index: usize, t: f64 },
    GoalReached { drone: usize, t: f64 },
    SeparationViolation { pair: (usize, usize), d: f64, t: f64 },
    Landed { drone: usize, t: f64 },
    Penetration { drone: usize, obstacle: usize, t: f64 },
}

impl SimEvent {
    pub fn t(&self) -> f64 {
        match *self {
            SimEvent::WaypointDispatched { t, .. }
            | SimEvent::GoalReached { t, .. }
            | SimEvent::SeparationViolation { t, .. }
            | SimEvent::Landed { t, .. }
            | SimEvent::Penetration { t, .. } => t,
        }
    }
}

/// Drones, their targets and the static scene.
#[derive(Debug, Clone)]
pub struct World {
    pub drones: Vec<DroneState>,
    pub targets: Vec<DVec3>,
    pub obstacles: Vec<Obstacle>,
    pub field: FieldParams,
    pub config: SimConfig,
    steps: u64,
    rng: ChaCha8Rng,
    inside: Vec<Vec<bool>>,
    violating: BTreeSet<(usize, usize)>,
}

impl World {
    /// All drones grounded at their take-off points.
    pub fn new(config: SimConfig, field: FieldParams, obstacles: Vec<Obstacle>) -> Result<Self> {
        config.validate()?;
        field.validate()?;
        for o in &obstacles {
            o.validate()?;
        }
        let drones: Vec<DroneState> = (0..config.drone_count())
            .map(|i| DroneState {
                id: i,
                position: config.ground_point(i),
                velocity: DVec3::ZERO,
                led: config.led_color,
                led_on: false,
                status: DroneStatus::Grounded,
            })
            .collect();
        let targets = drones.iter().map(|d| d.position).collect();
        Ok(Self {
            inside: vec![vec![false; obstacles.len()]; drones.len()],
            drones,
            targets,
            obstacles,
            field,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            steps: 0,
            violating: BTreeSet::new(),
        })
    }

    /// Places every drone in the air at the given positions, at rest.
    pub fn with_airborne(mut self, positions: &[DVec3]) -> Result<Self> {
        if positions.len() != self.drones.len() {
            return Err(Error::config("one position per drone required"));
        }
        for (d, p) in self.drones.iter_mut().zip(positions) {
            d.position = *p;
            d.status = DroneStatus::Airborne;
        }
        self.targets = positions.to_vec();
        Ok(self)
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn flying(&self, i: usize) -> bool {
        self.drones[i].status != DroneStatus::Grounded
    }

    /// Repulsion sources seen by drone `i`: nearest obstacle surface points and
    /// the other flying drones.
    pub fn sources_for(&self, i: usize) -> Vec<DVec3> {
        let pos = self.drones[i].position;
        let mut out: Vec<DVec3> = self
            .obstacles
            .iter()
            .map(|o| nearest_obstacle_point(pos, o).point)
            .collect();
        out.extend(
            (0..self.drones.len())
                .filter(|&j| j != i && self.flying(j))
                .map(|j| self.drones[j].position),
        );
        out
    }

    fn random_unit(&mut self) -> DVec3 {
        loop {
            let v = DVec3::new(
                StandardNormal.sample(&mut self.rng),
                StandardNormal.sample(&mut self.rng),
                StandardNormal.sample(&mut self.rng),
            );
            let n = v.length();
            if n > 1e-12 {
                return v / n;
            }
        }
    }

    /// Nudges any flying drone that sits exactly on one of its sources.
    fn separate_coincident(&mut self) {
        for i in 0..self.drones.len() {
            if !self.flying(i) {
                continue;
            }
            while self.sources_for(i).contains(&self.drones[i].position) {
                let nudge = self.random_unit() * COINCIDENT_JITTER;
                self.drones[i].position += nudge;
            }
        }
    }

    /// Advances the world by `dt`: potential-field command, first-order
    /// velocity response, speed cap, integration, bounds clamp.
    pub fn step(&mut self, dt: f64) -> Vec<SimEvent> {
        self.separate_coincident();
        let n = self.drones.len();
        let commands: Vec<DVec3> = (0..n)
            .map(|i| {
                if !self.flying(i) {
                    return DVec3::ZERO;
                }
                total_force(
                    self.drones[i].position,
                    self.targets[i],
                    &self.sources_for(i),
                    &self.field,
                )
                .expect("coincident sources were separated")
            })
            .collect();
        let gain = (dt / self.config.tau).min(1.0);
        let bounds = self.config.bounds;
        for (d, cmd) in self.drones.iter_mut().zip(&commands) {
            if d.status == DroneStatus::Grounded {
                continue;
            }
            d.velocity += (*cmd - d.velocity) * gain;
            let speed = d.velocity.length();
            if speed > self.config.v_max {
                d.velocity *= self.config.v_max / speed;
            }
            d.position = (d.position + d.velocity * dt).clamp(bounds.min, bounds.max);
        }
        self.steps += 1;
        let t = self.time();
        let mut events = Vec::new();

        for (i, d) in self.drones.iter_mut().enumerate() {
            if d.status == DroneStatus::Landing && d.position.z - bounds.min.z <= TOUCHDOWN_ALTITUDE {
                d.position.z = bounds.min.z;
                d.velocity = DVec3::ZERO;
                d.status = DroneStatus::Grounded;
                d.led_on = false;
                events.push(SimEvent::Landed { drone: i, t });
            }
        }
        for i in 0..n {
            for (k, o) in self.obstacles.iter().enumerate() {
                let inside = self.drones[i].status != DroneStatus::Grounded
                    && nearest_obstacle_point(self.drones[i].position, o).penetration;
                if inside && !self.inside[i][k] {
                    events.push(SimEvent::Penetration {
                        drone: i,
                        obstacle: k,
                        t,
                    });
                }
                self.inside[i][k] = inside;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let both = self.flying(i) && self.flying(j);
                let d = self.drones[i].position.distance(self.drones[j].position);
                if both && d < self.field.d_safe {
                    if self.violating.insert((i, j)) {
                        events.push(SimEvent::SeparationViolation { pair: (i, j), d, t });
                    }
                } else {
                    self.violating.remove(&(i, j));
                }
            }
        }
        events
    }
}
