//! `x,y[,z],t` trajectory files.
//!
//! Values are written in Rust's shortest round-trip decimal form, so a
//! write/read cycle reproduces every f64 bit-for-bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
    pub t: f64,
}

pub fn write_trajectory<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let with_z = rows.first().is_some_and(|r| r.z.is_some());
    if rows.iter().any(|r| r.z.is_some() != with_z) {
        return Err(Error::config("rows mix 2D and 3D points"));
    }
    let mut w = csv::Writer::from_writer(out);
    if with_z {
        w.write_record(["x", "y", "z", "t"])?;
    } else {
        w.write_record(["x", "y", "t"])?;
    }
    for r in rows {
        let mut rec = vec![r.x.to_string(), r.y.to_string()];
        if let Some(z) = r.z {
            rec.push(z.to_string());
        }
        rec.push(r.t.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let with_z = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x", "y", "t"] => false,
        ["x", "y", "z", "t"] => true,
        _ => {
            return Err(Error::Parse(format!(
                "trajectory header must be x,y,t or x,y,z,t, got {}",
                header.join(",")
            )))
        }
    };
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Parse(format!("row {}: missing field", i + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
        };
        rows.push(if with_z {
            TrajectoryRow {
                x: num(0)?,
                y: num(1)?,
                z: Some(num(2)?),
                t: num(3)?,
            }
        } else {
            TrajectoryRow {
                x: num(0)?,
                y: num(1)?,
                z: None,
                t: num(2)?,
            }
        });
    }
    Ok(rows)
}
