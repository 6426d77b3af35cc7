//! Canonical hand poses for the synthetic dataset.
//!
//! Poses are built in a hand-local frame (u to the right, v toward the
//! fingertips, w toward the camera, palm length 1) and then placed in
//! normalized image coordinates.

use super::{GestureClass, HandFrame, Landmark, LANDMARK_COUNT};

const CENTER_X: f64 = 0.5;
const WRIST_Y: f64 = 0.75;
const SCALE: f64 = 0.2;

#[derive(Clone, Copy)]
enum Finger {
    Extended,
    Curled,
}

use Finger::{Curled, Extended};

type P = [f64; 3];

/// MCP base positions of index, middle, ring and pinky.
const BASES: [P; 4] = [
    [-0.25, 0.95, 0.0],
    [0.0, 1.0, 0.0],
    [0.22, 0.95, 0.0],
    [0.42, 0.85, 0.0],
];
/// Unit-ish pointing directions when extended (slight fan).
const DIRS: [P; 4] = [[-0.12, 1.0, 0.0], [0.0, 1.0, 0.0], [0.12, 1.0, 0.0], [0.25, 1.0, 0.0]];
const BONES: [[f64; 3]; 4] = [
    [0.40, 0.25, 0.20],
    [0.45, 0.28, 0.22],
    [0.40, 0.26, 0.20],
    [0.32, 0.20, 0.18],
];

fn add(a: P, b: P, s: f64) -> P {
    [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s]
}

fn finger(i: usize, state: Finger) -> [P; 3] {
    let base = BASES[i];
    let d = DIRS[i];
    let b = BONES[i];
    match state {
        Extended => {
            let pip = add(base, d, b[0]);
            let dip = add(pip, d, b[1]);
            let tip = add(dip, d, b[2]);
            [pip, dip, tip]
        }
        Curled => {
            let pip = add(add(base, d, 0.22), [0.0, 0.0, -1.0], 0.18);
            let dip = add(add(base, d, 0.08), [0.0, 0.0, -1.0], 0.30);
            let tip = add(add(base, d, -0.12), [0.0, 0.0, -1.0], 0.22);
            [pip, dip, tip]
        }
    }
}

fn thumb(state: Finger) -> [P; 4] {
    match state {
        Extended => [
            [-0.35, 0.25, -0.05],
            [-0.60, 0.50, -0.08],
            [-0.80, 0.70, -0.10],
            [-0.95, 0.90, -0.12],
        ],
        Curled => [
            [-0.35, 0.25, -0.05],
            [-0.45, 0.45, -0.12],
            [-0.22, 0.58, -0.20],
            [0.00, 0.58, -0.22],
        ],
    }
}

fn thumb_up() -> [P; 4] {
    [
        [-0.30, 0.30, -0.05],
        [-0.42, 0.65, -0.08],
        [-0.48, 0.95, -0.10],
        [-0.52, 1.22, -0.12],
    ]
}

fn build(thumb_pts: [P; 4], fingers: [[P; 3]; 4]) -> HandFrame {
    let mut pts: Vec<P> = Vec::with_capacity(LANDMARK_COUNT);
    pts.push([0.0, 0.0, 0.0]);
    pts.extend_from_slice(&thumb_pts);
    for (i, f) in fingers.iter().enumerate() {
        pts.push(BASES[i]);
        pts.extend_from_slice(f);
    }
    let landmarks = pts
        .into_iter()
        .map(|[u, v, w]| Landmark::new(CENTER_X + u * SCALE, WRIST_Y - v * SCALE, w * SCALE))
        .collect();
    HandFrame::new(landmarks, 0.0).expect("canonical pose is valid")
}

fn simple(thumb_state: Finger, states: [Finger; 4]) -> HandFrame {
    let fingers = [
        finger(0, states[0]),
        finger(1, states[1]),
        finger(2, states[2]),
        finger(3, states[3]),
    ];
    build(thumb(thumb_state), fingers)
}

/// Noise-free reference pose for a gesture.
pub fn canonical_pose(class: GestureClass) -> HandFrame {
    match class {
        GestureClass::One => simple(Curled, [Extended, Curled, Curled, Curled]),
        GestureClass::Two => simple(Curled, [Extended, Extended, Curled, Curled]),
        GestureClass::Three => simple(Curled, [Extended, Extended, Extended, Curled]),
        GestureClass::Four => simple(Curled, [Extended, Extended, Extended, Extended]),
        GestureClass::Five => simple(Extended, [Extended, Extended, Extended, Extended]),
        GestureClass::Rock => simple(Curled, [Extended, Curled, Curled, Extended]),
        GestureClass::ThumbsUp => {
            let fingers = [
                finger(0, Curled),
                finger(1, Curled),
                finger(2, Curled),
                finger(3, Curled),
            ];
            build(thumb_up(), fingers)
        }
        GestureClass::Okay => {
            // index tip meets thumb tip in a ring; other three extended
            let thumb_pts = [
                [-0.35, 0.25, -0.05],
                [-0.55, 0.48, -0.08],
                [-0.62, 0.72, -0.10],
                [-0.52, 0.97, -0.12],
            ];
            let index = [[-0.33, 1.28, -0.05], [-0.50, 1.25, -0.10], [-0.53, 1.02, -0.12]];
            build(
                thumb_pts,
                [index, finger(1, Extended), finger(2, Extended), finger(3, Extended)],
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::extract_features;

    #[test]
    fn poses_are_pairwise_distinct() {
        let feats: Vec<_> = GestureClass::ALL
            .iter()
            .map(|c| extract_features(&canonical_pose(*c)).unwrap())
            .collect();
        for i in 0..feats.len() {
            for j in (i + 1)..feats.len() {
                let d: f64 = feats[i]
                    .distances()
                    .iter()
                    .zip(feats[j].distances())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(d > 0.5, "{:?} vs {:?}: {d}", GestureClass::ALL[i], GestureClass::ALL[j]);
            }
        }
    }

    #[test]
    fn poses_lie_inside_image() {
        for c in GestureClass::ALL {
            for l in canonical_pose(c).landmarks {
                assert!((0.0..=1.0).contains(&l.x) && (0.0..=1.0).contains(&l.y));
            }
        }
    }
}
