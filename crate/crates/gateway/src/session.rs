use std::sync::Arc;

use base64::Engine;
use dronepaint_core::command::{Command, CommandEvent, CommandState, FsmInput, GestureMapping, Mode};
use dronepaint_core::field::{FieldParams, Obstacle};
use dronepaint_core::gesture::{classify, extract_features, hand_position, GestureModel, HandFrame, Landmark};
use dronepaint_core::metrics::reference::reference_shape;
use dronepaint_core::metrics::{confidence_interval, error_samples, trace_errors_against};
use dronepaint_core::sim::{CanvasSpec, Mission, Phase, SimConfig, World};
use dronepaint_core::trajectory::{erase_region, process, PipelineConfig, RawStroke, StrokePoint};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::protocol::{ClientMessage, CommandRequest, DroneView, ScheduleProgress, ServerMessage, StateSnapshot};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub mapping: GestureMapping,
    pub pipeline: PipelineConfig,
    pub field: FieldParams,
    pub sim: SimConfig,
    pub obstacles: Vec<Obstacle>,
    pub canvas: CanvasSpec,
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), String> {
        let check = || -> dronepaint_core::Result<()> {
            self.mapping.validate()?;
            self.pipeline.validate()?;
            self.field.validate()?;
            self.sim.validate()?;
            self.canvas.validate()?;
            for o in &self.obstacles {
                o.validate()?;
            }
            Ok(())
        };
        check().map_err(|e| e.to_string())
    }

    /// Applies a partial JSON override (objects merge recursively, everything
    /// else replaces) and validates the result.
    pub fn with_overrides(&self, patch: &Value) -> Result<Self, String> {
        if !patch.is_object() {
            return Err("config overrides must be a JSON object".into());
        }
        let mut v = serde_json::to_value(self).expect("config serializes");
        merge(&mut v, patch);
        let cfg: SessionConfig = serde_json::from_value(v).map_err(|e| format!("invalid config: {e}"))?;
        cfg.validate().map_err(|e| format!("invalid config: {e}"))?;
        Ok(cfg)
    }

    fn swarm_part(&self) -> (&FieldParams, &SimConfig, &[Obstacle], &CanvasSpec) {
        (&self.field, &self.sim, &self.obstacles, &self.canvas)
    }
}

fn build_mission(cfg: &SessionConfig) -> Result<Mission, String> {
    let world = World::new(cfg.sim.clone(), cfg.field, cfg.obstacles.clone()).map_err(|e| e.to_string())?;
    let canvas = cfg.canvas.blank(&cfg.pipeline.zone).map_err(|e| e.to_string())?;
    Ok(Mission::new(world).with_canvas(canvas, cfg.canvas.intensity, cfg.canvas.sigma_px))
}

/// One operator's live state: recognizer, command FSM, stroke and swarm.
pub struct Session {
    id: String,
    config: SessionConfig,
    model: Option<Arc<GestureModel>>,
    fsm: CommandState,
    stroke: RawStroke,
    mission: Mission,
    /// Lit path of drone 0 in the drawing plane, offset removed.
    flown: Vec<StrokePoint>,
}

impl Session {
    pub fn open(
        id: impl Into<String>,
        defaults: &SessionConfig,
        overrides: Option<&Value>,
        model: Option<Arc<GestureModel>>,
    ) -> Result<Self, String> {
        let config = match overrides {
            Some(p) => defaults.with_overrides(p)?,
            None => {
                defaults.validate()?;
                defaults.clone()
            }
        };
        Ok(Self {
            id: id.into(),
            mission: build_mission(&config)?,
            config,
            model,
            fsm: CommandState::new(),
            stroke: RawStroke::default(),
            flown: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.fsm.mode
    }

    pub fn stroke(&self) -> &RawStroke {
        &self.stroke
    }

    pub fn mission(&self) -> &Mission {
        &self.mission
    }

    /// Handles one client line. Errors leave the session untouched.
    pub fn handle_message(&mut self, text: &str) -> Vec<ServerMessage> {
        match ClientMessage::parse(text) {
            Ok(msg) => self.handle(msg),
            Err(reason) => vec![ServerMessage::error(reason)],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let result = match msg {
            ClientMessage::HandFrame { landmarks, t } => self.on_hand_frame(landmarks, t),
            ClientMessage::StrokePoint { x, y, t } => self
                .stroke
                .push(StrokePoint { x, y, t })
                .map(|_| Vec::new())
                .map_err(|e| e.to_string()),
            ClientMessage::Command(req) => self.on_command(req),
            ClientMessage::Config(patch) => self.on_config(&patch),
            ClientMessage::Session { .. } => Err("session switching is handled by the connection".into()),
        };
        result.unwrap_or_else(|reason| vec![ServerMessage::error(reason)])
    }

    fn on_hand_frame(&mut self, landmarks: Vec<Landmark>, t: f64) -> Result<Vec<ServerMessage>, String> {
        let frame = HandFrame::new(landmarks, t).map_err(|e| e.to_string())?;
        let model = self.model.clone().ok_or("no gesture model loaded")?;
        let features = extract_features(&frame).map_err(|e| e.to_string())?;
        let c = classify(&model, &features).map_err(|e| e.to_string())?;
        let screen = self.config.pipeline.zone.screen;
        let (px, py) = hand_position(&frame, screen.width, screen.height).map_err(|e| e.to_string())?;
        let input = FsmInput {
            gesture: Some((c.class, c.confidence)),
            cursor: Some((screen.x + px, screen.y + py)),
            t,
        };
        let before = self.fsm.mode;
        let mut next = self.fsm.clone();
        let event = next.step(&input, &self.config.mapping);
        let mut replies = vec![ServerMessage::Gesture {
            class: c.class,
            confidence: c.confidence,
        }];
        match self.apply_event(event) {
            Ok(()) => self.fsm = next,
            Err(e) => replies.push(ServerMessage::error(e)),
        }
        self.after_mode_change(before);
        Ok(replies)
    }

    fn after_mode_change(&mut self, before: Mode) {
        if before == Mode::Drawing && self.fsm.mode != Mode::Drawing {
            self.stroke.pen_up();
        }
    }

    fn on_command(&mut self, req: CommandRequest) -> Result<Vec<ServerMessage>, String> {
        match req.name.to_ascii_uppercase().as_str() {
            "SNAPSHOT" => return Ok(vec![self.painting()?]),
            "REPORT" => return Ok(vec![self.report(req.shape.as_deref())?]),
            "PEN_UP" => {
                self.stroke.pen_up();
                return Ok(Vec::new());
            }
            "ERASE_AT" => {
                let (Some(x), Some(y)) = (req.x, req.y) else {
                    return Err("ERASE_AT needs x and y".into());
                };
                let radius = req.radius.unwrap_or(self.config.mapping.erase_radius);
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err("ERASE_AT radius must be > 0".into());
                }
                self.apply_event(CommandEvent::EraseAt { x, y, radius })?;
                return Ok(Vec::new());
            }
            _ => {}
        }
        let cmd: Command = req.name.parse().map_err(|e: dronepaint_core::Error| e.to_string())?;
        let before = self.fsm.mode;
        let mut next = self.fsm.clone();
        let event = next.apply_command(cmd);
        self.apply_event(event)?;
        self.fsm = next;
        self.after_mode_change(before);
        Ok(Vec::new())
    }

    fn on_config(&mut self, patch: &Value) -> Result<Vec<ServerMessage>, String> {
        let cfg = self.config.with_overrides(patch)?;
        if cfg.swarm_part() != self.config.swarm_part() {
            if self.mission.phase() != Phase::Grounded {
                return Err("swarm settings can only change while grounded".into());
            }
            self.mission = build_mission(&cfg)?;
            self.flown.clear();
        }
        self.config = cfg;
        Ok(Vec::new())
    }

    fn apply_event(&mut self, event: CommandEvent) -> Result<(), String> {
        match event {
            CommandEvent::TakeOff => {
                self.mission.take_off();
            }
            CommandEvent::Land => {
                self.mission.land();
            }
            CommandEvent::DrawPoint { x, y, t } => {
                self.stroke.push(StrokePoint { x, y, t }).map_err(|e| e.to_string())?;
            }
            CommandEvent::EraseAt { x, y, radius } => {
                self.stroke = erase_region(&self.stroke, (x, y), radius);
            }
            CommandEvent::BeginPaint => {
                if self.stroke.is_empty() {
                    return Err("cannot paint: no stroke drawn".into());
                }
                let schedule = process(&self.stroke, &self.config.pipeline).map_err(|e| e.to_string())?;
                if !self.mission.begin_paint(schedule) {
                    return Err("cannot paint: swarm is not airborne".into());
                }
                self.flown.clear();
            }
            CommandEvent::Clear => self.stroke.clear(),
            CommandEvent::None => {}
        }
        Ok(())
    }

    /// Advances the simulation by one step.
    pub fn tick(&mut self) {
        self.mission.tick();
        let d = &self.mission.world.drones[0];
        if d.led_on {
            let off = self.mission.world.config.offsets[0];
            self.flown.push(StrokePoint {
                x: d.position.x - off.x,
                y: d.position.z - off.z,
                t: self.mission.world.time(),
            });
        }
    }

    pub fn state(&self) -> StateSnapshot {
        StateSnapshot {
            session: self.id.clone(),
            t: self.mission.world.time(),
            mode: self.fsm.mode,
            phase: self.mission.phase(),
            drones: self.mission.world.drones.iter().map(DroneView::from).collect(),
            stroke: self.stroke.clone(),
            schedule: ScheduleProgress {
                waypoints: self.mission.schedule().len(),
                index: self.mission.progress(),
            },
        }
    }

    pub fn snapshot(&self) -> ServerMessage {
        ServerMessage::State(self.state())
    }

    fn painting(&self) -> Result<ServerMessage, String> {
        let canvas = self.mission.canvas().ok_or("no canvas")?;
        let bytes = canvas.render(self.config.canvas.gain).map_err(|e| e.to_string())?;
        Ok(ServerMessage::Painting {
            width: canvas.width(),
            height: canvas.height(),
            format: "P6".into(),
            data: base64::engine::general_purpose::STANDARD.encode(bytes),
        })
    }

    /// Drawn stroke against a reference shape, or flown path against the
    /// painted schedule.
    fn report(&self, shape: Option<&str>) -> Result<ServerMessage, String> {
        let (source, drawn, truth) = match shape {
            Some(name) => {
                let shape = reference_shape(name).ok_or_else(|| format!("unknown shape '{name}'"))?;
                let zone = &self.config.pipeline.zone;
                let drawn: Vec<StrokePoint> = self
                    .stroke
                    .points
                    .iter()
                    .map(|p| {
                        let w = zone.to_world(p.x, p.y);
                        StrokePoint { x: w.x, y: w.z, t: p.t }
                    })
                    .collect();
                ("drawn", drawn, shape.polyline())
            }
            None => {
                let truth = self
                    .mission
                    .schedule()
                    .iter()
                    .map(|w| [w.position.x, w.position.z])
                    .collect();
                ("flown", self.flown.clone(), truth)
            }
        };
        if drawn.len() < 2 || truth.len() < 2 {
            return Err(format!("not enough {source} points for a report"));
        }
        let report = trace_errors_against(&drawn, &truth).map_err(|e| e.to_string())?;
        let cm: Vec<f64> = error_samples(&drawn, &truth)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|e| e * 100.0)
            .collect();
        Ok(ServerMessage::Report {
            source: source.into(),
            report,
            ci95_cm: confidence_interval(&cm, 0.95).ok(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dronepaint_core::sim::DroneStatus;
    use serde_json::json;

    fn open() -> Session {
        Session::open("t", &SessionConfig::default(), None, None).unwrap()
    }

    fn errors(r: &[ServerMessage]) -> usize {
        r.iter().filter(|m| matches!(m, ServerMessage::Error { .. })).count()
    }

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(open().config(), &SessionConfig::default());
        let s = Session::open(
            "a",
            &SessionConfig::default(),
            Some(&json!({"pipeline": {"filter": {"alpha": 0.5}}})),
            None,
        )
        .unwrap();
        assert_eq!(s.config().pipeline.filter.alpha, 0.5);
        assert_eq!(s.config().pipeline.filter.beta, 0.41);
        let err = Session::open(
            "b",
            &SessionConfig::default(),
            Some(&json!({"pipeline": {"filter": {"alpha": 1.5}}})),
            None,
        )
        .err()
        .unwrap();
        assert!(err.contains("alpha"), "{err}");
    }

    #[test]
    fn malformed_leaves_state_unchanged() {
        let mut s = open();
        let before = s.state();
        let r = s.handle_message("{");
        assert_eq!(errors(&r), 1);
        assert_eq!(s.state(), before);
    }

    #[test]
    fn twenty_landmarks_rejected() {
        let mut s = open();
        let lm: Vec<[f64; 3]> = vec![[0.5, 0.5, 0.0]; 20];
        let r = s.handle_message(&json!({"type": "hand_frame", "landmarks": lm, "t": 0.0}).to_string());
        let [ServerMessage::Error { reason }] = r.as_slice() else {
            panic!("{r:?}")
        };
        assert!(reason.contains("expected 21"), "{reason}");
    }

    #[test]
    fn take_off_command_lifts_swarm() {
        let mut s = open();
        assert!(s.handle_message(r#"{"type":"command","name":"TAKE_OFF"}"#).is_empty());
        s.tick();
        let st = s.state();
        assert_eq!(st.mode, Mode::FlyingIdle);
        assert!(st.drones.iter().all(|d| d.status == DroneStatus::Airborne));
    }

    #[test]
    fn strokes_keep_arrival_order_and_reject_time_travel() {
        let mut s = open();
        for (i, x) in [10.0, 30.0, 20.0].iter().enumerate() {
            let msg = json!({"type": "stroke_point", "x": x, "y": 5.0, "t": i as f64 * 0.1});
            assert!(s.handle_message(&msg.to_string()).is_empty());
        }
        let xs: Vec<f64> = s.stroke().points.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![10.0, 30.0, 20.0]);
        let r = s.handle_message(r#"{"type":"stroke_point","x":1,"y":1,"t":0.0}"#);
        assert_eq!(errors(&r), 1);
        assert_eq!(s.stroke().len(), 3);
    }

    #[test]
    fn erase_and_clear() {
        let mut s = open();
        for i in 0..10 {
            let msg = json!({"type": "stroke_point", "x": i as f64 * 10.0, "y": 100.0, "t": i as f64});
            s.handle_message(&msg.to_string());
        }
        s.handle_message(r#"{"type":"command","name":"ERASE_AT","x":45,"y":100,"radius":12}"#);
        assert_eq!(s.stroke().len(), 8);
        assert_eq!(s.stroke().run_ranges().len(), 2);
        s.handle_message(r#"{"type":"command","name":"CLEAR"}"#);
        assert!(s.stroke().is_empty());
    }

    #[test]
    fn paint_requires_stroke_and_flight() {
        let mut s = open();
        s.handle_message(r#"{"type":"command","name":"TAKE_OFF"}"#);
        let r = s.handle_message(r#"{"type":"command","name":"BEGIN_PAINT"}"#);
        assert_eq!(errors(&r), 1);
        assert_eq!(s.mode(), Mode::FlyingIdle);
    }

    #[test]
    fn swarm_config_locked_while_airborne() {
        let mut s = open();
        assert!(s
            .handle_message(r#"{"type":"config","sim":{"offsets":[[0,0,0],[0,0.5,0]]}}"#)
            .is_empty());
        assert_eq!(s.state().drones.len(), 2);
        s.handle_message(r#"{"type":"command","name":"TAKE_OFF"}"#);
        s.tick();
        let r = s.handle_message(r#"{"type":"config","field":{"k_att":2}}"#);
        assert_eq!(errors(&r), 1);
        assert!(s
            .handle_message(r#"{"type":"config","pipeline":{"speed":0.2}}"#)
            .is_empty());
        assert_eq!(s.config().pipeline.speed, 0.2);
    }

    #[test]
    fn snapshot_is_base64_ppm() {
        let mut s = open();
        let r = s.handle_message(r#"{"type":"command","name":"SNAPSHOT"}"#);
        let [ServerMessage::Painting {
            width, height, data, ..
        }] = r.as_slice()
        else {
            panic!()
        };
        let bytes = base64::engine::general_purpose::STANDARD.decode(data).unwrap();
        assert!(bytes.starts_with(b"P6\n"));
        assert!(bytes.len() > 3 * width * height);
    }

    #[test]
    fn drawn_report_against_shape() {
        let mut s = open();
        let zone = s.config().pipeline.zone;
        let shape = reference_shape("square").unwrap();
        for (i, p) in shape.polyline().iter().enumerate() {
            let (x, y) = zone.to_screen(glam::DVec3::new(p[0], 0.0, p[1]));
            s.handle_message(&json!({"type": "stroke_point", "x": x, "y": y, "t": i as f64}).to_string());
        }
        let r = s.handle_message(r#"{"type":"command","name":"REPORT","shape":"square"}"#);
        let [ServerMessage::Report { report, source, .. }] = r.as_slice() else {
            panic!("{r:?}")
        };
        assert_eq!(source, "drawn");
        assert!(report.max_error < 1e-9);
        let r = s.handle_message(r#"{"type":"command","name":"REPORT"}"#);
        assert_eq!(errors(&r), 1);
    }
}
