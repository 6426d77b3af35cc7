//! Versioned JSON scenario documents for headless simulation runs.

use std::path::{Path, PathBuf};

use glam::DVec3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldParams, Obstacle};
use crate::metrics::{
    confidence_interval, error_samples, synth_trace, trace_errors_against, GroundTruthShape, NoiseModel, TraceReport,
    TraceSynth,
};
use crate::sim::{line_abreast, min_separation, run_episode, CanvasSpec, Episode, EpisodeSpec, SimConfig};
use crate::trajectory::{
    process, read_trajectory, FilterParams, FlightZoneConfig, PipelineConfig, RawStroke, StrokePoint, TimedWaypoint,
};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub filter: FilterParams,
    pub spacing_px: f64,
    pub speed: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            filter: p.filter,
            spacing_px: p.spacing_px,
            speed: p.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmSpec {
    pub size: usize,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Explicit per-drone offsets; overrides `size`/`spacing` when present.
    #[serde(default)]
    pub offsets: Option<Vec<DVec3>>,
}

fn default_spacing() -> f64 {
    0.5
}

impl SwarmSpec {
    pub fn offsets(&self) -> Result<Vec<DVec3>> {
        match &self.offsets {
            Some(o) if o.len() != self.size => Err(Error::config(format!(
                "swarm size {} but {} offsets given",
                self.size,
                o.len()
            ))),
            Some(o) => Ok(o.clone()),
            None if self.size == 0 => Err(Error::config("swarm size must be > 0")),
            None => Ok(line_abreast(self.size, self.spacing)),
        }
    }
}

/// A ground-truth shape drawn by a simulated hand: the outline is traced once
/// in screen pixels with isotropic Gaussian jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeInput {
    pub truth: GroundTruthShape,
    #[serde(default = "default_sigma_px")]
    pub sigma_px: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_fps")]
    pub fps: f64,
}

fn default_sigma_px() -> f64 {
    2.0
}

fn default_duration() -> f64 {
    10.0
}

fn default_fps() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioInput {
    /// Screen-space stroke, pixels and seconds.
    Stroke {
        points: Vec<StrokePoint>,
        #[serde(default)]
        breaks: Vec<usize>,
    },
    Shape(ShapeInput),
    /// `x,y,t` (screen stroke) or `x,y,z,t` (world waypoints, t = dispatch
    /// time) file, relative to the scenario file.
    TrajectoryFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub zone: FlightZoneConfig,
    #[serde(default)]
    pub pipeline: PipelineSettings,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub field: FieldParams,
    #[serde(default)]
    pub swarm: Option<SwarmSpec>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub canvas: CanvasSpec,
    pub input: ScenarioInput,
}

/// Everything needed to run and score a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenario {
    pub episode: EpisodeSpec,
    /// The stroke fed to the pipeline, if the input was a stroke.
    pub stroke: Option<RawStroke>,
    /// Reference path in the drawing plane (world x, world z).
    pub truth: Vec<[f64; 2]>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        if s.version != SCENARIO_VERSION {
            return Err(Error::Parse(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                s.version
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            filter: self.pipeline.filter,
            spacing_px: self.pipeline.spacing_px,
            zone: self.zone,
            speed: self.pipeline.speed,
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut cfg = self.sim.clone();
        cfg.seed = self.seed;
        if let Some(swarm) = &self.swarm {
            cfg.offsets = swarm.offsets()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates everything and resolves the input into a waypoint schedule.
    /// Relative trajectory paths resolve against `base_dir`.
    pub fn prepare(&self, base_dir: &Path) -> Result<PreparedScenario> {
        let pipeline = self.pipeline_config();
        pipeline.validate()?;
        self.field.validate()?;
        self.canvas.validate()?;
        for o in &self.obstacles {
            o.validate()?;
        }
        let config = self.sim_config()?;

        let stroke_schedule = |stroke: &RawStroke| -> Result<Vec<TimedWaypoint>> {
            if stroke.is_empty() {
                Ok(Vec::new())
            } else {
                process(stroke, &pipeline)
            }
        };
        let (stroke, schedule, truth) = match &self.input {
            ScenarioInput::Stroke { points, breaks } => {
                let mut stroke = RawStroke::from_points(points.clone())?;
                let interior = breaks.iter().all(|b| *b > 0 && *b < points.len());
                if !interior || breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::config("stroke breaks must be increasing interior indices"));
                }
                stroke.breaks = breaks.clone();
                let schedule = stroke_schedule(&stroke)?;
                let truth = plane_path(&schedule);
                (Some(stroke), schedule, truth)
            }
            ScenarioInput::Shape(shape) => {
                shape.truth.validate()?;
                let stroke = shape_stroke(shape, &self.zone, self.seed)?;
                let schedule = stroke_schedule(&stroke)?;
                (Some(stroke), schedule, shape.truth.polyline())
            }
            ScenarioInput::TrajectoryFile(rel) => {
                let path = base_dir.join(rel);
                let file = std::fs::File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let rows = read_trajectory(file)?;
                if rows.iter().all(|r| r.z.is_some()) && !rows.is_empty() {
                    let t0 = rows[0].t;
                    let schedule: Vec<TimedWaypoint> = rows
                        .iter()
                        .map(|r| TimedWaypoint {
                            position: DVec3::new(r.x, r.y, r.z.expect("checked")),
                            dispatch_offset: r.t - t0,
                            run: 0,
                        })
                        .collect();
                    if schedule.windows(2).any(|w| w[1].dispatch_offset < w[0].dispatch_offset) {
                        return Err(Error::Parse("waypoint times must be non-decreasing".into()));
                    }
                    let truth = plane_path(&schedule);
                    (None, schedule, truth)
                } else {
                    let points = rows.iter().map(|r| StrokePoint { x: r.x, y: r.y, t: r.t }).collect();
                    let stroke = RawStroke::from_points(points)?;
                    let schedule = stroke_schedule(&stroke)?;
                    let truth = plane_path(&schedule);
                    (Some(stroke), schedule, truth)
                }
            }
        };
        Ok(PreparedScenario {
            episode: EpisodeSpec {
                config,
                field: self.field,
                obstacles: self.obstacles.clone(),
                schedule,
                zone: self.zone,
                canvas: self.canvas,
            },
            stroke,
            truth,
        })
    }
}

fn plane_path(schedule: &[TimedWaypoint]) -> Vec<[f64; 2]> {
    schedule.iter().map(|w| [w.position.x, w.position.z]).collect()
}

/// Synthetic screen-space stroke tracing `shape.truth` once.
pub fn shape_stroke(shape: &ShapeInput, zone: &FlightZoneConfig, seed: u64) -> Result<RawStroke> {
    let px: Vec<[f64; 2]> = shape
        .truth
        .polyline()
        .iter()
        .map(|p| {
            let (x, y) = zone.to_screen(DVec3::new(p[0], zone.depth, p[1]));
            [x, y]
        })
        .collect();
    let points = synth_trace(
        &px,
        &TraceSynth {
            duration: shape.duration,
            fps: shape.fps,
            sigma: shape.sigma_px,
            noise: NoiseModel::Isotropic,
            seed,
        },
    )?;
    RawStroke::from_points(points)
}

/// Scored result of a simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub completed: bool,
    pub drones: usize,
    pub waypoints: usize,
    /// Flown (lit) path of drone 0 against the scenario's reference path.
    pub report: Option<TraceReport>,
    /// 95% interval on the mean per-sample error, cm.
    pub ci95_cm: Option<(f64, f64)>,
    pub min_separation: Option<f64>,
    pub trace_sha256: String,
    pub painting_sha256: String,
}

pub struct SimulationOutput {
    pub episode: Episode,
    pub painting: Vec<u8>,
    pub summary: SimulationSummary,
}

pub fn simulate(prepared: &PreparedScenario) -> Result<SimulationOutput> {
    let spec = &prepared.episode;
    let episode = run_episode(spec)?;
    let painting = episode.canvas.render(spec.canvas.gain)?;
    let flown = episode.painted_path(&spec.config, 0);
    let (report, ci95_cm) = if flown.len() >= 2 && prepared.truth.len() >= 2 {
        let report = trace_errors_against(&flown, &prepared.truth)?;
        let cm: Vec<f64> = error_samples(&flown, &prepared.truth)?
            .iter()
            .map(|e| e * 100.0)
            .collect();
        (Some(report), Some(confidence_interval(&cm, 0.95)?))
    } else {
        (None, None)
    };
    let summary = SimulationSummary {
        completed: episode.completed,
        drones: spec.config.drone_count(),
        waypoints: spec.schedule.len(),
        report,
        ci95_cm,
        min_separation: min_separation(&episode.trace).ok(),
        trace_sha256: episode.trace.checksum(),
        painting_sha256: hex::encode(Sha256::digest(&painting)),
    };
    Ok(SimulationOutput {
        episode,
        painting,
        summary,
    })
}
