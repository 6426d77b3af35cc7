//! Gesture-to-command state machine.
//!
//! A classified gesture only counts once it has been seen for `N` consecutive
//! frames at or above the confidence threshold; the command then fires once
//! on that frame. Drawing and erasing are modes: while in them, every frame
//! with a visible hand emits a cursor event.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gesture::GestureClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Grounded,
    FlyingIdle,
    Drawing,
    Erasing,
    Painting,
}

impl Mode {
    pub fn is_airborne(self) -> bool {
        !matches!(self, Mode::Grounded)
    }
}

/// What a gesture (or a UI button) asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Command {
    TakeOff,
    Land,
    Draw,
    Erase,
    BeginPaint,
    Idle,
    Clear,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::TakeOff,
        Command::Land,
        Command::Draw,
        Command::Erase,
        Command::BeginPaint,
        Command::Idle,
        Command::Clear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::TakeOff => "TAKE_OFF",
            Command::Land => "LAND",
            Command::Draw => "DRAW",
            Command::Erase => "ERASE",
            Command::BeginPaint => "BEGIN_PAINT",
            Command::Idle => "IDLE",
            Command::Clear => "CLEAR",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|c| c.name() == upper)
            .ok_or_else(|| Error::config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CommandEvent {
    TakeOff,
    Land,
    DrawPoint { x: f64, y: f64, t: f64 },
    EraseAt { x: f64, y: f64, radius: f64 },
    BeginPaint,
    Clear,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureMapping {
    pub map: BTreeMap<GestureClass, Command>,
    /// Minimum confidence for a frame to count toward the debounce run.
    pub threshold: f64,
    /// Consecutive qualifying frames required before a command fires.
    pub debounce_frames: usize,
    /// Eraser radius in screen pixels.
    pub erase_radius: f64,
}

impl Default for GestureMapping {
    fn default() -> Self {
        default_mapping()
    }
}

pub fn default_mapping() -> GestureMapping {
    let map = BTreeMap::from([
        (GestureClass::ThumbsUp, Command::TakeOff),
        (GestureClass::Okay, Command::Land),
        (GestureClass::One, Command::Draw),
        (GestureClass::Two, Command::Erase),
        (GestureClass::Rock, Command::BeginPaint),
        (GestureClass::Five, Command::Idle),
    ]);
    GestureMapping {
        map,
        threshold: 0.8,
        debounce_frames: 5,
        erase_radius: 30.0,
    }
}

impl GestureMapping {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.debounce_frames == 0 {
            return Err(Error::config("debounce_frames must be >= 1"));
        }
        if !(self.erase_radius > 0.0 && self.erase_radius.is_finite()) {
            return Err(Error::config("erase_radius must be > 0"));
        }
        let mut seen = BTreeMap::new();
        for (g, c) in &self.map {
            if let Some(prev) = seen.insert(*c, *g) {
                return Err(Error::config(format!("command {c} mapped from both {prev} and {g}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: GestureMapping = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

/// One frame of recognizer output. `gesture` and `cursor` are `None` when no
/// hand is visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsmInput {
    pub gesture: Option<(GestureClass, f64)>,
    pub cursor: Option<(f64, f64)>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandState {
    pub mode: Mode,
    /// Last `N` classified gestures with their confidences.
    pub buffer: VecDeque<(GestureClass, f64)>,
    streak: usize,
    last_draw_t: Option<f64>,
}

impl Default for CommandState {
    fn default() -> Self {
        Self::new()
    }
}

impl CommandState {
    pub fn new() -> Self {
        Self {
            mode: Mode::Grounded,
            buffer: VecDeque::new(),
            streak: 0,
            last_draw_t: None,
        }
    }

    /// Applies a command directly, as if it had passed debouncing.
    pub fn apply_command(&mut self, cmd: Command) -> CommandEvent {
        let airborne = self.mode.is_airborne();
        match cmd {
            Command::TakeOff if !airborne => {
                self.mode = Mode::FlyingIdle;
                CommandEvent::TakeOff
            }
            Command::Land if airborne => {
                self.mode = Mode::Grounded;
                CommandEvent::Land
            }
            Command::Draw if airborne => {
                self.mode = Mode::Drawing;
                CommandEvent::None
            }
            Command::Erase if airborne => {
                self.mode = Mode::Erasing;
                CommandEvent::None
            }
            Command::BeginPaint if airborne => {
                self.mode = Mode::Painting;
                CommandEvent::BeginPaint
            }
            Command::Idle if airborne => {
                self.mode = Mode::FlyingIdle;
                CommandEvent::None
            }
            Command::Clear => {
                self.last_draw_t = None;
                CommandEvent::Clear
            }
            _ => CommandEvent::None,
        }
    }

    /// Cursor-driven event for the current mode, if any.
    fn mode_event(&mut self, input: &FsmInput, mapping: &GestureMapping) -> CommandEvent {
        let Some((x, y)) = input.cursor else {
            return CommandEvent::None;
        };
        match self.mode {
            Mode::Drawing => {
                if self.last_draw_t.is_some_and(|last| input.t <= last) {
                    return CommandEvent::None;
                }
                self.last_draw_t = Some(input.t);
                CommandEvent::DrawPoint { x, y, t: input.t }
            }
            Mode::Erasing => CommandEvent::EraseAt {
                x,
                y,
                radius: mapping.erase_radius,
            },
            _ => CommandEvent::None,
        }
    }

    fn advance(&mut self, input: &FsmInput, mapping: &GestureMapping) -> CommandEvent {
        let n = mapping.debounce_frames.max(1);
        let fired = match input.gesture {
            Some((g, conf)) => {
                let continues = self.streak > 0 && self.buffer.back().map(|b| b.0) == Some(g);
                if self.buffer.len() == n {
                    self.buffer.pop_front();
                }
                self.buffer.push_back((g, conf));
                if conf >= mapping.threshold {
                    self.streak = if continues { self.streak + 1 } else { 1 };
                } else {
                    self.streak = 0;
                }
                (self.streak == n).then_some(g)
            }
            None => {
                self.streak = 0;
                None
            }
        };

        if let Some(cmd) = fired.and_then(|g| mapping.map.get(&g).copied()) {
            let before = self.mode;
            let ev = self.apply_command(cmd);
            if ev != CommandEvent::None || self.mode != before {
                return ev;
            }
        }
        self.mode_event(input, mapping)
    }
}

/// Advances the state machine by one frame.
pub fn step_fsm(state: &CommandState, input: &FsmInput, mapping: &GestureMapping) -> (CommandState, CommandEvent) {
    let mut next = state.clone();
    let ev = next.advance(input, mapping);
    (next, ev)
}

impl CommandState {
    /// In-place variant of [`step_fsm`].
    pub fn step(&mut self, input: &FsmInput, mapping: &GestureMapping) -> CommandEvent {
        self.advance(input, mapping)
    }
}
