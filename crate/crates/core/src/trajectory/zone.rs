use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenRect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

/// Maps the drawing screen onto a vertical plane in the flight zone.
///
/// Screen x maps to world x, screen y to world z (top of the screen is the
/// highest z when `flip_y` is set), and every point sits at world y = `depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightZoneConfig {
    pub screen: ScreenRect,
    pub world_x: [f64; 2],
    pub world_z: [f64; 2],
    pub depth: f64,
    pub flip_y: bool,
}

impl Default for FlightZoneConfig {
    fn default() -> Self {
        Self {
            screen: ScreenRect {
                x: 0.0,
                y: 0.0,
                width: 640.0,
                height: 480.0,
            },
            world_x: [-1.5, 1.5],
            world_z: [0.5, 2.5],
            depth: 0.0,
            flip_y: true,
        }
    }
}

impl FlightZoneConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.screen;
        let finite = [s.x, s.y, s.width, s.height, self.depth]
            .iter()
            .chain(&self.world_x)
            .chain(&self.world_z)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("flight zone has non-finite values"));
        }
        if !(s.width > 0.0 && s.height > 0.0) {
            return Err(Error::config("screen rect must have positive size"));
        }
        if !(self.world_x[1] > self.world_x[0] && self.world_z[1] > self.world_z[0]) {
            return Err(Error::config("world ranges must be increasing"));
        }
        Ok(())
    }

    /// Clamps a screen point into the rect and maps it to the world plane.
    pub fn to_world(&self, px: f64, py: f64) -> DVec3 {
        let s = &self.screen;
        let u = ((px - s.x) / s.width).clamp(0.0, 1.0);
        let v = ((py - s.y) / s.height).clamp(0.0, 1.0);
        let x = self.world_x[0] + u * (self.world_x[1] - self.world_x[0]);
        let z = if self.flip_y {
            self.world_z[1] - v * (self.world_z[1] - self.world_z[0])
        } else {
            self.world_z[0] + v * (self.world_z[1] - self.world_z[0])
        };
        DVec3::new(x, self.depth, z)
    }

    /// Projects a world point onto the screen; world y is ignored, no clamping.
    pub fn to_screen(&self, p: DVec3) -> (f64, f64) {
        let s = &self.screen;
        let u = (p.x - self.world_x[0]) / (self.world_x[1] - self.world_x[0]);
        let v = if self.flip_y {
            (self.world_z[1] - p.z) / (self.world_z[1] - self.world_z[0])
        } else {
            (p.z - self.world_z[0]) / (self.world_z[1] - self.world_z[0])
        };
        (s.x + u * s.width, s.y + v * s.height)
    }
}

pub fn screen_to_world(points: &[(f64, f64)], zone: &FlightZoneConfig) -> Result<Vec<DVec3>> {
    zone.validate()?;
    Ok(points.iter().map(|&(x, y)| zone.to_world(x, y)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn corners_and_center() {
        let z = FlightZoneConfig::default();
        let out = screen_to_world(&[(0.0, 0.0), (320.0, 240.0), (640.0, 480.0)], &z).unwrap();
        assert_eq!(out[0], DVec3::new(-1.5, 0.0, 2.5));
        assert_eq!(out[1], DVec3::new(0.0, 0.0, 1.5));
        assert_eq!(out[2], DVec3::new(1.5, 0.0, 0.5));
    }

    #[test]
    fn off_screen_clamps() {
        let z = FlightZoneConfig::default();
        let p = z.to_world(-10.0, 240.0);
        assert_eq!(p, DVec3::new(-1.5, 0.0, 1.5));
        let p = z.to_world(700.0, -5.0);
        assert_eq!(p, DVec3::new(1.5, 0.0, 2.5));
    }

    #[test]
    fn degenerate_zone_rejected() {
        let z = FlightZoneConfig {
            world_x: [1.0, 1.0],
            ..FlightZoneConfig::default()
        };
        assert!(matches!(screen_to_world(&[], &z), Err(Error::Config(_))));
        let mut z = FlightZoneConfig::default();
        z.screen.width = 0.0;
        assert!(z.validate().is_err());
    }

    #[test]
    fn screen_round_trip() {
        let z = FlightZoneConfig::default();
        let (x, y) = z.to_screen(z.to_world(123.0, 456.0));
        assert!((x - 123.0).abs() < 1e-9 && (y - 456.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn collinearity_preserved(t1 in 0.0f64..1.0, t2 in 0.0f64..1.0,
                                  ax in 0.0f64..640.0, ay in 0.0f64..480.0,
                                  bx in 0.0f64..640.0, by in 0.0f64..480.0) {
            let z = FlightZoneConfig::default();
            let lerp = |t: f64| (ax + t * (bx - ax), ay + t * (by - ay));
            let pts = screen_to_world(&[(ax, ay), lerp(t1), lerp(t2), (bx, by)], &z).unwrap();
            for p in &pts[1..3] {
                let cross = (p.x - pts[0].x) * (pts[3].z - pts[0].z)
                    - (p.z - pts[0].z) * (pts[3].x - pts[0].x);
                prop_assert!(cross.abs() < 1e-9);
            }
        }
    }
}
