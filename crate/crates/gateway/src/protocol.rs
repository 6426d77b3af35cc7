//! Wire messages: one JSON object per line, discriminated by `type`.

use dronepaint_core::command::Mode;
use dronepaint_core::gesture::{GestureClass, Landmark};
use dronepaint_core::metrics::TraceReport;
use dronepaint_core::sim::{DroneState, DroneStatus, Phase};
use dronepaint_core::trajectory::RawStroke;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    HandFrame {
        landmarks: Vec<Landmark>,
        t: f64,
    },
    StrokePoint {
        x: f64,
        y: f64,
        t: f64,
    },
    Command(CommandRequest),
    Config(Value),
    /// Attach this connection to a session, creating it if needed.
    Session {
        id: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CommandRequest {
    pub name: String,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// Reference shape for `REPORT`.
    #[serde(default)]
    pub shape: Option<String>,
}

#[derive(Deserialize)]
struct HandFrameWire {
    landmarks: Vec<Vec<f64>>,
    t: f64,
}

#[derive(Deserialize)]
struct StrokePointWire {
    x: f64,
    y: f64,
    t: f64,
}

#[derive(Deserialize)]
struct SessionWire {
    #[serde(default)]
    id: Option<String>,
}

fn field<T: serde::de::DeserializeOwned>(v: Value, kind: &str) -> Result<T, String> {
    serde_json::from_value(v).map_err(|e| format!("invalid {kind} message: {e}"))
}

impl ClientMessage {
    /// Parses one line. Unknown fields are ignored; unknown types are errors.
    pub fn parse(text: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
        let Some(obj) = v.as_object() else {
            return Err("malformed message: expected a JSON object".into());
        };
        let kind = match obj.get("type") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err("malformed message: `type` must be a string".into()),
            None => return Err("malformed message: missing `type`".into()),
        };
        match kind.as_str() {
            "hand_frame" => {
                let w: HandFrameWire = field(v, &kind)?;
                let landmarks = w
                    .landmarks
                    .iter()
                    .enumerate()
                    .map(|(i, c)| match c.as_slice() {
                        [x, y] => Ok(Landmark::new(*x, *y, 0.0)),
                        [x, y, z] => Ok(Landmark::new(*x, *y, *z)),
                        _ => Err(format!("landmark {i} must have 2 or 3 coordinates")),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(ClientMessage::HandFrame { landmarks, t: w.t })
            }
            "stroke_point" => {
                let w: StrokePointWire = field(v, &kind)?;
                Ok(ClientMessage::StrokePoint { x: w.x, y: w.y, t: w.t })
            }
            "command" => Ok(ClientMessage::Command(field(v, &kind)?)),
            "config" => {
                let mut v = v;
                v.as_object_mut().expect("checked object").remove("type");
                Ok(ClientMessage::Config(v))
            }
            "session" => {
                let w: SessionWire = field(v, &kind)?;
                Ok(ClientMessage::Session { id: w.id })
            }
            other => Err(format!("unknown message type '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneView {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub led: [f64; 3],
    pub led_on: bool,
    pub status: DroneStatus,
}

impl From<&DroneState> for DroneView {
    fn from(d: &DroneState) -> Self {
        Self {
            id: d.id,
            x: d.position.x,
            y: d.position.y,
            z: d.position.z,
            vx: d.velocity.x,
            vy: d.velocity.y,
            vz: d.velocity.z,
            led: d.led,
            led_on: d.led_on,
            status: d.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleProgress {
    pub waypoints: usize,
    /// Index of the latest dispatched waypoint.
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub session: String,
    /// Simulation time, s.
    pub t: f64,
    pub mode: Mode,
    pub phase: Phase,
    pub drones: Vec<DroneView>,
    pub stroke: RawStroke,
    pub schedule: ScheduleProgress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Session {
        id: String,
    },
    State(StateSnapshot),
    Gesture {
        class: GestureClass,
        confidence: f64,
    },
    Report {
        /// What was measured: `"drawn"` or `"flown"`.
        source: String,
        report: TraceReport,
        ci95_cm: Option<(f64, f64)>,
    },
    Painting {
        width: usize,
        height: usize,
        format: String,
        /// Base64 of the binary PPM.
        data: String,
    },
    Error {
        reason: String,
    },
}

impl ServerMessage {
    pub fn error(reason: impl Into<String>) -> Self {
        ServerMessage::Error { reason: reason.into() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}
