use crate::error::{Error, Result};

fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Re-emits a polyline at equal arc-length steps of `spacing`, starting at
/// the first vertex and always ending exactly on the last one.
pub fn resample_uniform<const D: usize>(points: &[[f64; D]], spacing: f64) -> Result<Vec<[f64; D]>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::config(format!("spacing must be > 0, got {spacing}")));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateStroke("non-finite point".into()));
    }
    // drop zero-length segments
    let mut verts: Vec<[f64; D]> = Vec::with_capacity(points.len());
    for p in points {
        if verts.last() != Some(p) {
            verts.push(*p);
        }
    }
    if verts.len() < 2 {
        return Err(Error::DegenerateStroke("need at least two distinct points".into()));
    }

    let seg_len: Vec<f64> = verts.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let total: f64 = seg_len.iter().sum();
    let tol = 1e-9 * total;

    let mut out = Vec::with_capacity((total / spacing) as usize + 2);
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut k = 0usize;
    loop {
        let target = k as f64 * spacing;
        if target >= total - tol {
            break;
        }
        while seg + 1 < seg_len.len() && seg_start + seg_len[seg] <= target {
            seg_start += seg_len[seg];
            seg += 1;
        }
        let u = ((target - seg_start) / seg_len[seg]).clamp(0.0, 1.0);
        let (a, b) = (&verts[seg], &verts[seg + 1]);
        let mut p = [0.0; D];
        for d in 0..D {
            p[d] = a[d] + (b[d] - a[d]) * u;
        }
        out.push(p);
        k += 1;
    }
    out.push(*verts.last().expect("at least two vertices"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
        let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    #[test]
    fn unit_segment_quarters() {
        let out = resample_uniform(&[[0.0, 0.0], [1.0, 0.0]], 0.25).unwrap();
        let xs: Vec<f64> = out.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn closed_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]];
        let out = resample_uniform(&sq, 0.5).unwrap();
        assert_eq!(out.len(), 9);
        for p in &out {
            let d = sq
                .windows(2)
                .map(|w| on_segment(*p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-9);
        }
    }

    #[test]
    fn short_final_segment_kept() {
        let out = resample_uniform(&[[0.0], [1.1]], 0.5).unwrap();
        assert_eq!(out.len(), 4);
        assert!((out[3][0] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            resample_uniform(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]], 0.5),
            Err(Error::DegenerateStroke(_))
        ));
        assert!(matches!(
            resample_uniform(&[[1.0, 2.0]], 0.5),
            Err(Error::DegenerateStroke(_))
        ));
        assert!(matches!(
            resample_uniform(&[[0.0, 0.0], [1.0, 0.0]], 0.0),
            Err(Error::Config(_))
        ));
    }
}
