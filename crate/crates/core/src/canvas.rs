//! Long-exposure light painting: additive Gaussian splats on a float buffer,
//! exported as a gamma-encoded binary PPM.

use glam::DVec3;

use crate::error::{Error, Result};
use crate::trajectory::{FlightZoneConfig, ScreenRect};

pub const DEFAULT_SIGMA_PX: f64 = 2.0;
/// Splat intensity per 100 Hz simulation step.
pub const DEFAULT_INTENSITY: f64 = 0.05;
pub const DEFAULT_GAIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureCanvas {
    width: usize,
    height: usize,
    /// Linear RGB, row-major.
    buf: Vec<[f64; 3]>,
    /// World plane to canvas pixels; pixel (i, j) samples canvas point (i, j).
    plane: FlightZoneConfig,
}

impl ExposureCanvas {
    /// A blank canvas viewing the zone's world plane.
    pub fn new(width: usize, height: usize, zone: &FlightZoneConfig) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("canvas dimensions must be positive"));
        }
        zone.validate()?;
        let plane = FlightZoneConfig {
            screen: ScreenRect {
                x: 0.0,
                y: 0.0,
                width: width as f64,
                height: height as f64,
            },
            ..*zone
        };
        Ok(Self {
            width,
            height,
            buf: vec![[0.0; 3]; width * height],
            plane,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.buf[y * self.width + x]
    }

    pub fn buffer(&self) -> &[[f64; 3]] {
        &self.buf
    }

    /// World-plane mapping with the screen rect set to the canvas size.
    pub fn zone(&self) -> &FlightZoneConfig {
        &self.plane
    }

    pub fn project(&self, world: DVec3) -> (f64, f64) {
        self.plane.to_screen(world)
    }

    /// Adds `intensity * exp(-r^2 / 2 sigma^2) * led` to every pixel within
    /// three sigma of the projected position.
    pub fn accumulate(&mut self, world: DVec3, led: [f64; 3], intensity: f64, sigma_px: f64) -> Result<()> {
        if !(sigma_px > 0.0 && sigma_px.is_finite()) {
            return Err(Error::config("sigma_px must be > 0"));
        }
        let (cx, cy) = self.project(world);
        self.splat(cx, cy, led, intensity, sigma_px);
        Ok(())
    }

    fn splat(&mut self, cx: f64, cy: f64, led: [f64; 3], intensity: f64, sigma: f64) {
        if !(cx.is_finite() && cy.is_finite()) {
            return;
        }
        let reach = 3.0 * sigma;
        let x0 = (cx - reach).ceil().max(0.0);
        let x1 = (cx + reach).floor().min(self.width as f64 - 1.0);
        let y0 = (cy - reach).ceil().max(0.0);
        let y1 = (cy + reach).floor().min(self.height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let inv = 1.0 / (2.0 * sigma * sigma);
        for y in (y0 as usize)..=(y1 as usize) {
            let dy = y as f64 - cy;
            for x in (x0 as usize)..=(x1 as usize) {
                let dx = x as f64 - cx;
                let r2 = dx * dx + dy * dy;
                if r2 > reach * reach {
                    continue;
                }
                let w = intensity * (-r2 * inv).exp();
                let px = &mut self.buf[y * self.width + x];
                for c in 0..3 {
                    px[c] += w * led[c];
                }
            }
        }
    }

    /// Binary PPM (P6, maxval 255): `clamp(gain * v, 0, 1)^(1/2.2)` rounded to 8 bits.
    pub fn render(&self, gain: f64) -> Result<Vec<u8>> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::config("exposure gain must be > 0"));
        }
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.buf.len());
        out.extend_from_slice(header.as_bytes());
        for px in &self.buf {
            for v in px {
                out.push(encode_channel(*v, gain));
            }
        }
        Ok(out)
    }
}

fn encode_channel(v: f64, gain: f64) -> u8 {
    let lin = (gain * v).clamp(0.0, 1.0);
    (lin.powf(1.0 / 2.2) * 255.0).round() as u8
}
