//! Trace-error evaluation: distance of a drawn path to a ground-truth shape,
//! summary statistics, confidence intervals and one-way ANOVA.

pub mod reference;
mod stats;
mod table;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::StrokePoint;

pub use stats::{f_sf, ln_gamma, reg_inc_beta, student_t_cdf, student_t_quantile};
pub use table::{format_table, TableColumn, TABLE_ROW_LABELS};

/// Vertex count used to discretize circles.
pub const CIRCLE_VERTICES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeKind {
    Square {
        side: f64,
    },
    Circle {
        radius: f64,
    },
    /// Equilateral, apex up, centered on its centroid.
    Triangle {
        side: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthShape {
    #[serde(flatten)]
    pub kind: ShapeKind,
    /// Center in the drawing plane (world x, world z), meters.
    #[serde(default = "default_center")]
    pub center: [f64; 2],
}

fn default_center() -> [f64; 2] {
    [0.0, 1.5]
}

impl GroundTruthShape {
    pub fn square(side: f64) -> Self {
        Self {
            kind: ShapeKind::Square { side },
            center: default_center(),
        }
    }

    pub fn circle(radius: f64) -> Self {
        Self {
            kind: ShapeKind::Circle { radius },
            center: default_center(),
        }
    }

    pub fn triangle(side: f64) -> Self {
        Self {
            kind: ShapeKind::Triangle { side },
            center: default_center(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ShapeKind::Square { .. } => "Square",
            ShapeKind::Circle { .. } => "Circle",
            ShapeKind::Triangle { .. } => "Triangle",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let size = match self.kind {
            ShapeKind::Square { side } | ShapeKind::Triangle { side } => side,
            ShapeKind::Circle { radius } => radius,
        };
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::config("shape dimensions must be positive"));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::config("shape center must be finite"));
        }
        Ok(())
    }

    /// Closed polyline (first vertex repeated at the end).
    pub fn polyline(&self) -> Vec<[f64; 2]> {
        let [cx, cy] = self.center;
        let mut pts: Vec<[f64; 2]> = match self.kind {
            ShapeKind::Square { side } => {
                let h = side / 2.0;
                vec![[cx - h, cy + h], [cx + h, cy + h], [cx + h, cy - h], [cx - h, cy - h]]
            }
            ShapeKind::Circle { radius } => (0..CIRCLE_VERTICES)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / CIRCLE_VERTICES as f64;
                    [cx + radius * a.cos(), cy + radius * a.sin()]
                })
                .collect(),
            ShapeKind::Triangle { side } => {
                let r = side / 3f64.sqrt();
                [90.0f64, 210.0, 330.0]
                    .iter()
                    .map(|deg| {
                        let a = deg.to_radians();
                        [cx + r * a.cos(), cy + r * a.sin()]
                    })
                    .collect()
            }
        };
        pts.push(pts[0]);
        pts
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (dx, dy) = (apx - t * abx, apy - t * aby);
    (dx * dx + dy * dy).sqrt()
}

/// Exact minimum distance from `p` to any segment of `poly`.
pub fn point_to_polyline(p: [f64; 2], poly: &[[f64; 2]]) -> Result<f64> {
    if poly.len() < 2 {
        return Err(Error::config("polyline needs at least two points"));
    }
    Ok(poly
        .windows(2)
        .map(|w| segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min))
}

/// Summary of drawn-path deviation; distances in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub max_error: f64,
    pub mean_error: f64,
    pub rmse: f64,
    /// Seconds between the first and last drawn point.
    pub duration: f64,
    pub n_samples: usize,
}

/// Per-point distance (meters) from each drawn point to the truth polyline.
pub fn error_samples(drawn: &[StrokePoint], truth: &[[f64; 2]]) -> Result<Vec<f64>> {
    drawn.iter().map(|p| point_to_polyline([p.x, p.y], truth)).collect()
}

/// Trace error of a drawn path (meters, seconds) against an arbitrary polyline.
pub fn trace_errors_against(drawn: &[StrokePoint], truth: &[[f64; 2]]) -> Result<TraceReport> {
    if drawn.len() < 2 {
        return Err(Error::config("drawn path needs at least two points"));
    }
    let errs = error_samples(drawn, truth)?;
    let n = errs.len() as f64;
    let max = errs.iter().cloned().fold(0.0, f64::max);
    let mean = errs.iter().sum::<f64>() / n;
    let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    Ok(TraceReport {
        max_error: max * 100.0,
        mean_error: mean * 100.0,
        rmse: rmse * 100.0,
        duration: drawn[drawn.len() - 1].t - drawn[0].t,
        n_samples: errs.len(),
    })
}

pub fn trace_errors(drawn: &[StrokePoint], truth: &GroundTruthShape) -> Result<TraceReport> {
    truth.validate()?;
    trace_errors_against(drawn, &truth.polyline())
}

/// Two-sided Student-t interval for the mean.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::config("confidence interval needs at least two samples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config("confidence level must lie in (0, 1)"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let q = student_t_quantile(1.0 - (1.0 - level) / 2.0, n - 1.0)?;
    let half = q * (var / n).sqrt();
    Ok((mean - half, mean + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::config("anova needs at least two groups"));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::config("every anova group needs at least one value"));
    }
    let n_total: usize = groups.iter().map(Vec::len).sum();
    if n_total <= k {
        return Err(Error::config("anova needs more observations than groups"));
    }
    let grand = groups.iter().flatten().sum::<f64>() / n_total as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n_total - k;
    let msb = ssb / df_between as f64;
    let msw = ssw / df_within as f64;
    let f = if msw == 0.0 {
        if msb == 0.0 {
            return Err(Error::DegenerateAnova);
        }
        f64::INFINITY
    } else {
        msb / msw
    };
    Ok(AnovaResult {
        f,
        p: f_sf(f, df_between as f64, df_within as f64),
        df_between,
        df_within,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Offset along the local path normal only.
    Perpendicular,
    /// Independent noise on both axes.
    Isotropic,
}

/// Recipe for a synthetic drawn trace that follows a closed polyline once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSynth {
    pub duration: f64,
    pub fps: f64,
    pub sigma: f64,
    pub noise: NoiseModel,
    pub seed: u64,
}

/// Samples a trace moving at constant speed along `path`, with Gaussian
/// noise, timestamped at `fps` from t = 0.
pub fn synth_trace(path: &[[f64; 2]], spec: &TraceSynth) -> Result<Vec<StrokePoint>> {
    if path.len() < 2 {
        return Err(Error::config("path needs at least two points"));
    }
    if !(spec.duration > 0.0 && spec.fps > 0.0 && spec.sigma >= 0.0) {
        return Err(Error::config("trace synthesis needs duration, fps > 0 and sigma >= 0"));
    }
    let seg: Vec<f64> = path
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .collect();
    let total: f64 = seg.iter().sum();
    if total == 0.0 {
        return Err(Error::config("path has zero length"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.sigma).map_err(|e| Error::config(e.to_string()))?;
    let frames = (spec.duration * spec.fps).round() as usize;
    let mut out = Vec::with_capacity(frames + 1);
    let mut i = 0;
    let mut start = 0.0;
    for k in 0..=frames {
        let s = total * k as f64 / frames.max(1) as f64;
        while i + 1 < seg.len() && (seg[i] == 0.0 || start + seg[i] < s) {
            start += seg[i];
            i += 1;
        }
        let (a, b) = (path[i], path[i + 1]);
        let u = if seg[i] > 0.0 {
            ((s - start) / seg[i]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let mut x = a[0] + u * dx;
        let mut y = a[1] + u * dy;
        match spec.noise {
            NoiseModel::Perpendicular => {
                let n = normal.sample(&mut rng);
                let len = seg[i].max(f64::MIN_POSITIVE);
                x += -dy / len * n;
                y += dx / len * n;
            }
            NoiseModel::Isotropic => {
                x += normal.sample(&mut rng);
                y += normal.sample(&mut rng);
            }
        }
        out.push(StrokePoint {
            x,
            y,
            t: k as f64 / spec.fps,
        });
    }
    Ok(out)
}
