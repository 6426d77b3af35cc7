//! Potential-field guidance.
//!
//! Forces are expressed directly as commanded velocities (m/s): a linear
//! attraction toward the goal, capped at `f_max`, plus Khatib-style
//! repulsion from every source closer than the influence radius `d0`.

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// Attractive gain, 1/s.
    pub k_att: f64,
    /// Cap on the attractive term, m/s.
    pub f_max: f64,
    /// Repulsive gain, m^3/s.
    pub k_rep: f64,
    /// Influence radius, m.
    pub d0: f64,
    /// Required separation, m. Used for diagnostics only.
    pub d_safe: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            k_att: 1.0,
            f_max: 0.5,
            k_rep: 0.02,
            d0: 0.6,
            d_safe: 0.2,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k_att, self.f_max, self.k_rep, self.d0, self.d_safe];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::config("field parameters must all be positive"));
        }
        if self.d_safe >= self.d0 {
            return Err(Error::config("d_safe must be smaller than d0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Obstacle {
    Sphere {
        center: DVec3,
        radius: f64,
    },
    /// Axis-aligned box; use large bounds for an unbounded wall.
    Slab {
        min: DVec3,
        max: DVec3,
    },
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        match self {
            Obstacle::Sphere { center, radius } => {
                if !(center.is_finite() && *radius > 0.0 && radius.is_finite()) {
                    return Err(Error::config("sphere needs a finite center and radius > 0"));
                }
            }
            Obstacle::Slab { min, max } => {
                if !(min.is_finite() && max.is_finite() && min.cmplt(*max).all()) {
                    return Err(Error::config("slab bounds must satisfy min < max on every axis"));
                }
            }
        }
        Ok(())
    }
}

/// Closest surface point, and whether the query point was inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub point: DVec3,
    pub penetration: bool,
}

pub fn attractive_force(pos: DVec3, goal: DVec3, p: &FieldParams) -> DVec3 {
    let f = (goal - pos) * p.k_att;
    let mag = f.length();
    if mag > p.f_max {
        f * (p.f_max / mag)
    } else {
        f
    }
}

/// Repulsion magnitude at distance `d` from a source; zero at and beyond `d0`.
pub fn repulsive_magnitude(d: f64, p: &FieldParams) -> f64 {
    if d >= p.d0 {
        0.0
    } else {
        p.k_rep * (1.0 / d - 1.0 / p.d0) / (d * d)
    }
}

pub fn repulsive_force(pos: DVec3, sources: &[DVec3], p: &FieldParams) -> Result<DVec3> {
    let mut total = DVec3::ZERO;
    for s in sources {
        let away = pos - *s;
        let d = away.length();
        if d == 0.0 {
            return Err(Error::CoincidentSource);
        }
        let mag = repulsive_magnitude(d, p);
        if mag > 0.0 {
            total += away * (mag / d);
        }
    }
    Ok(total)
}

pub fn total_force(pos: DVec3, goal: DVec3, sources: &[DVec3], p: &FieldParams) -> Result<DVec3> {
    Ok(attractive_force(pos, goal, p) + repulsive_force(pos, sources, p)?)
}

pub fn nearest_obstacle_point(pos: DVec3, obs: &Obstacle) -> SurfacePoint {
    match *obs {
        Obstacle::Sphere { center, radius } => {
            let off = pos - center;
            let d = off.length();
            let dir = if d > 0.0 { off / d } else { DVec3::X };
            SurfacePoint {
                point: center + dir * radius,
                penetration: d < radius,
            }
        }
        Obstacle::Slab { min, max } => {
            let clamped = pos.clamp(min, max);
            if clamped != pos {
                return SurfacePoint {
                    point: clamped,
                    penetration: false,
                };
            }
            // inside (or on the surface): push out through the nearest face
            let lo = pos - min;
            let hi = max - pos;
            let mut best = (f64::INFINITY, 0usize, 0.0);
            for axis in 0..3 {
                if lo[axis] < best.0 {
                    best = (lo[axis], axis, min[axis]);
                }
                if hi[axis] < best.0 {
                    best = (hi[axis], axis, max[axis]);
                }
            }
            let mut point = pos;
            point[best.1] = best.2;
            SurfacePoint {
                point,
                penetration: best.0 > 0.0,
            }
        }
    }
}
