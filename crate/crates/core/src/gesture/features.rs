use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::{HandFrame, Landmark, LANDMARK_COUNT, MIDDLE_MCP, WRIST};
use crate::error::{Error, Result};

/// Interior joint angles: 3 per finger, thumb to pinky.
pub const ANGLE_COUNT: usize = 15;
/// C(21, 2) pairwise landmark distances.
pub const DISTANCE_COUNT: usize = LANDMARK_COUNT * (LANDMARK_COUNT - 1) / 2;
pub const FEATURE_LEN: usize = ANGLE_COUNT + DISTANCE_COUNT;

/// Landmark chains from the wrist out to each fingertip.
const FINGER_CHAINS: [[usize; 5]; 5] = [
    [0, 1, 2, 3, 4],
    [0, 5, 6, 7, 8],
    [0, 9, 10, 11, 12],
    [0, 13, 14, 15, 16],
    [0, 17, 18, 19, 20],
];

/// Pose-invariant classifier input: 15 joint angles (radians) followed by 210
/// palm-normalized pairwise distances in lexicographic index-pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Wraps raw values; used when features come from outside this crate.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.0[..ANGLE_COUNT.min(self.0.len())]
    }

    pub fn distances(&self) -> &[f64] {
        &self.0[ANGLE_COUNT.min(self.0.len())..]
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn sub(a: &Landmark, b: &Landmark) -> [f64; 3] {
    [a.x - b.x, a.y - b.y, a.z - b.z]
}

/// Angle at `joint` between the bones toward `prev` and `next`; pi for a
/// straight finger. A zero-length bone counts as straight.
fn joint_angle(prev: &Landmark, joint: &Landmark, next: &Landmark) -> f64 {
    let u = sub(prev, joint);
    let v = sub(next, joint);
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    if dot == 0.0 && cross_norm == 0.0 {
        return std::f64::consts::PI;
    }
    cross_norm.atan2(dot)
}

pub fn extract_features(frame: &HandFrame) -> Result<FeatureVector> {
    frame.validate()?;
    let lm = &frame.landmarks;
    let palm = lm[WRIST].dist3(&lm[MIDDLE_MCP]);
    if palm == 0.0 {
        return Err(Error::DegenerateHand("zero palm size".into()));
    }

    let mut values = Vec::with_capacity(FEATURE_LEN);
    for chain in &FINGER_CHAINS {
        for w in chain.windows(3) {
            values.push(joint_angle(&lm[w[0]], &lm[w[1]], &lm[w[2]]));
        }
    }
    for i in 0..LANDMARK_COUNT {
        for j in (i + 1)..LANDMARK_COUNT {
            values.push(lm[i].dist3(&lm[j]) / palm);
        }
    }
    debug_assert_eq!(values.len(), FEATURE_LEN);
    Ok(FeatureVector(values))
}
