//! Hand-landmark gesture recognition.
//!
//! Frames of 21 normalized hand landmarks are turned into a pose-invariant
//! feature vector (joint angles plus palm-normalized pairwise distances),
//! which a small feed-forward network classifies into one of eight gestures.
//! The same landmarks also give the drawing cursor and a pinhole estimate of
//! the hand's distance from the camera.

mod dataset;
mod features;
mod model;
mod poses;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{read_dataset, synth_dataset, write_dataset, ClassCount, DatasetSpec, GestureDataset, Sample, Split};
pub use features::{extract_features, FeatureVector, ANGLE_COUNT, DISTANCE_COUNT, FEATURE_LEN};
pub use model::{
    classify, evaluate, train_classifier, Classification, DenseLayer, Evaluation, GestureModel, Hyperparams,
    TrainingMetadata, MODEL_FORMAT_VERSION,
};
pub use poses::canonical_pose;

/// Number of landmarks in a hand frame.
pub const LANDMARK_COUNT: usize = 21;

pub const WRIST: usize = 0;
pub const INDEX_TIP: usize = 8;
pub const MIDDLE_MCP: usize = 9;

/// A single hand keypoint in normalized image coordinates (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    /// Wrist-relative depth, unitless.
    #[serde(default)]
    pub z: f64,
}

impl Landmark {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub(crate) fn dist3(&self, other: &Landmark) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// 21 landmarks captured at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandFrame {
    pub landmarks: [Landmark; LANDMARK_COUNT],
    /// Seconds since session start.
    #[serde(default)]
    pub timestamp: f64,
}

impl HandFrame {
    /// Builds a frame from an arbitrary-length landmark list, rejecting
    /// anything other than exactly 21 finite points.
    pub fn new(landmarks: Vec<Landmark>, timestamp: f64) -> Result<Self> {
        let n = landmarks.len();
        let landmarks: [Landmark; LANDMARK_COUNT] = landmarks
            .try_into()
            .map_err(|_| Error::InvalidFrame(format!("expected {LANDMARK_COUNT} landmarks, got {n}")))?;
        let frame = Self { landmarks, timestamp };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.landmarks.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidFrame(format!("landmark {i} is not finite")));
        }
        if !self.timestamp.is_finite() {
            return Err(Error::InvalidFrame("timestamp is not finite".into()));
        }
        Ok(())
    }

    /// Applies `f` to every landmark.
    pub fn map(&self, f: impl Fn(Landmark) -> Landmark) -> Self {
        Self {
            landmarks: self.landmarks.map(f),
            timestamp: self.timestamp,
        }
    }
}

/// The eight recognised gestures, in class-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GestureClass {
    One,
    Two,
    Three,
    Four,
    Five,
    Okay,
    Rock,
    ThumbsUp,
}

impl GestureClass {
    pub const COUNT: usize = 8;

    pub const ALL: [GestureClass; Self::COUNT] = [
        GestureClass::One,
        GestureClass::Two,
        GestureClass::Three,
        GestureClass::Four,
        GestureClass::Five,
        GestureClass::Okay,
        GestureClass::Rock,
        GestureClass::ThumbsUp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GestureClass::One => "ONE",
            GestureClass::Two => "TWO",
            GestureClass::Three => "THREE",
            GestureClass::Four => "FOUR",
            GestureClass::Five => "FIVE",
            GestureClass::Okay => "OKAY",
            GestureClass::Rock => "ROCK",
            GestureClass::ThumbsUp => "THUMBS_UP",
        }
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GestureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|c| c.name() == upper)
            .ok_or_else(|| Error::config(format!("unknown gesture class '{s}'")))
    }
}

/// Pinhole constant relating palm size in pixels to hand distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCalibration {
    /// meters * pixels
    pub k_palm: f64,
}

impl DepthCalibration {
    pub fn new(k_palm: f64) -> Result<Self> {
        if !(k_palm > 0.0 && k_palm.is_finite()) {
            return Err(Error::config(format!("k_palm must be > 0, got {k_palm}")));
        }
        Ok(Self { k_palm })
    }

    /// Calibrates from one observation of a hand at a known distance.
    pub fn from_reference(depth_m: f64, palm_px: f64) -> Result<Self> {
        Self::new(depth_m * palm_px)
    }
}

fn check_image(image_w: f64, image_h: f64) -> Result<()> {
    if !(image_w > 0.0 && image_h > 0.0) {
        return Err(Error::config(format!(
            "image dimensions must be positive, got {image_w}x{image_h}"
        )));
    }
    Ok(())
}

/// Wrist to middle-finger-base distance in pixels.
pub fn palm_size(frame: &HandFrame, image_w: f64, image_h: f64) -> Result<f64> {
    frame.validate()?;
    check_image(image_w, image_h)?;
    let first = frame.landmarks[0];
    if frame.landmarks.iter().all(|l| *l == first) {
        return Err(Error::DegenerateHand("all landmarks coincide".into()));
    }
    let w = frame.landmarks[WRIST];
    let m = frame.landmarks[MIDDLE_MCP];
    let size = ((m.x - w.x) * image_w).hypot((m.y - w.y) * image_h);
    if size == 0.0 {
        return Err(Error::DegenerateHand("zero palm size".into()));
    }
    Ok(size)
}

/// Drawing cursor: the index fingertip in pixels.
pub fn hand_position(frame: &HandFrame, image_w: f64, image_h: f64) -> Result<(f64, f64)> {
    frame.validate()?;
    check_image(image_w, image_h)?;
    let tip = frame.landmarks[INDEX_TIP];
    Ok((tip.x * image_w, tip.y * image_h))
}

/// Hand-to-camera distance in meters under a pinhole model.
pub fn estimate_depth(palm_px: f64, cal: &DepthCalibration) -> Result<f64> {
    if !(palm_px > 0.0) {
        return Err(Error::DegenerateHand(format!(
            "palm size must be positive, got {palm_px}"
        )));
    }
    Ok(cal.k_palm / palm_px)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_with(wrist: (f64, f64), mcp: (f64, f64), tip: (f64, f64)) -> HandFrame {
        let mut lm = vec![Landmark::new(0.3, 0.3, 0.0); LANDMARK_COUNT];
        lm[WRIST] = Landmark::new(wrist.0, wrist.1, 0.0);
        lm[MIDDLE_MCP] = Landmark::new(mcp.0, mcp.1, 0.0);
        lm[INDEX_TIP] = Landmark::new(tip.0, tip.1, 0.0);
        HandFrame::new(lm, 0.0).unwrap()
    }

    #[test]
    fn palm_size_vertical() {
        let f = frame_with((0.5, 0.5), (0.5, 0.25), (0.5, 0.5));
        assert_eq!(palm_size(&f, 640.0, 480.0).unwrap(), 120.0);
    }

    #[test]
    fn palm_size_coincident_is_degenerate() {
        let f = HandFrame::new(vec![Landmark::new(0.4, 0.4, 0.1); 21], 0.0).unwrap();
        assert!(matches!(palm_size(&f, 640.0, 480.0), Err(Error::DegenerateHand(_))));
    }

    #[test]
    fn palm_size_matches_recomputation_on_fixture() {
        let f = canonical_pose(GestureClass::Five);
        let (w, m) = (f.landmarks[0], f.landmarks[9]);
        let dx = (w.x - m.x) * 640.0;
        let dy = (w.y - m.y) * 480.0;
        let expected = (dx * dx + dy * dy).sqrt();
        let got = palm_size(&f, 640.0, 480.0).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn cursor_is_index_tip() {
        let f = frame_with((0.5, 0.9), (0.5, 0.6), (0.5, 0.5));
        assert_eq!(hand_position(&f, 640.0, 480.0).unwrap(), (320.0, 240.0));
        let f = frame_with((0.5, 0.9), (0.5, 0.6), (0.0, 0.0));
        assert_eq!(hand_position(&f, 640.0, 480.0).unwrap(), (0.0, 0.0));
        let f = canonical_pose(GestureClass::One);
        let tip = f.landmarks[8];
        assert_eq!(
            hand_position(&f, 1280.0, 720.0).unwrap(),
            (tip.x * 1280.0, tip.y * 720.0)
        );
    }

    #[test]
    fn depth_pinhole() {
        let cal = DepthCalibration::new(60.0).unwrap();
        assert_eq!(estimate_depth(120.0, &cal).unwrap(), 0.5);
        let d1 = estimate_depth(50.0, &cal).unwrap();
        let d2 = estimate_depth(100.0, &cal).unwrap();
        assert!((d1 - 2.0 * d2).abs() < 1e-12);
        let cal = DepthCalibration::from_reference(1.0, 60.0).unwrap();
        assert_eq!(estimate_depth(60.0, &cal).unwrap(), 1.0);
        assert!(matches!(estimate_depth(0.0, &cal), Err(Error::DegenerateHand(_))));
        assert!(DepthCalibration::new(-1.0).is_err());
    }

    #[test]
    fn frame_length_checked() {
        let err = HandFrame::new(vec![Landmark::default(); 20], 0.0).unwrap_err();
        assert_eq!(err, Error::InvalidFrame("expected 21 landmarks, got 20".into()));
        let mut lm = vec![Landmark::default(); 21];
        lm[3].y = f64::NAN;
        assert!(matches!(HandFrame::new(lm, 0.0), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn class_names_round_trip() {
        for c in GestureClass::ALL {
            assert_eq!(c.name().parse::<GestureClass>().unwrap(), c);
            assert_eq!(GestureClass::from_index(c.index()), Some(c));
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.name()));
        }
        assert!("SIX".parse::<GestureClass>().is_err());
    }
}
