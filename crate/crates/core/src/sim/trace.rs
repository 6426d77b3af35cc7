use std::io::{Read, Write};

use glam::DVec3;
use sha2::{Digest, Sha256};

use super::{SimEvent, World};
use crate::error::{Error, Result};

const HEADER: [&str; 11] = [
    "t", "drone_id", "x", "y", "z", "vx", "vy", "vz", "led_r", "led_g", "led_b",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub drone_id: usize,
    pub position: DVec3,
    pub velocity: DVec3,
    /// Emitted color; zero while the LED is off.
    pub led: [f64; 3],
}

impl TraceRow {
    pub fn lit(&self) -> bool {
        self.led.iter().any(|c| *c > 0.0)
    }
}

/// State of every drone at every simulation step, drone-major within a step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub drone_count: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(drone_count: usize) -> Self {
        Self {
            drone_count,
            rows: Vec::new(),
        }
    }

    pub fn record(&mut self, world: &World) {
        let t = world.time();
        self.rows.extend(world.drones.iter().map(|d| TraceRow {
            t,
            drone_id: d.id,
            position: d.position,
            velocity: d.velocity,
            led: d.emitted(),
        }));
    }

    /// Rows grouped per recorded step.
    pub fn frames(&self) -> impl Iterator<Item = &[TraceRow]> {
        self.rows.chunks(self.drone_count.max(1))
    }

    /// Hex sha256 of the CSV encoding.
    pub fn checksum(&self) -> String {
        let mut buf = Vec::new();
        write_trace(self, &mut buf).expect("writing to memory");
        hex::encode(Sha256::digest(&buf))
    }
}

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &trace.rows {
        let p = r.position;
        let v = r.velocity;
        w.write_record([
            r.t.to_string(),
            r.drone_id.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            v.x.to_string(),
            v.y.to_string(),
            v.z.to_string(),
            r.led[0].to_string(),
            r.led[1].to_string(),
            r.led[2].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Trace> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(Error::Parse(format!("trace header must be {}", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = || Error::Parse(format!("trace row {}: bad number", i + 1));
        let f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad());
        rows.push(TraceRow {
            t: f(0)?,
            drone_id: rec[1].parse().map_err(|_| bad())?,
            position: DVec3::new(f(2)?, f(3)?, f(4)?),
            velocity: DVec3::new(f(5)?, f(6)?, f(7)?),
            led: [f(8)?, f(9)?, f(10)?],
        });
    }
    let drone_count = rows.iter().map(|r| r.drone_id + 1).max().unwrap_or(0);
    if drone_count > 0 && rows.len() % drone_count != 0 {
        return Err(Error::Parse("trace rows do not form whole frames".into()));
    }
    Ok(Trace { drone_count, rows })
}

/// One JSON object per line.
pub fn write_events<W: Write>(events: &[SimEvent], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Smallest pairwise drone distance over the whole trace.
pub fn min_separation(trace: &Trace) -> Result<f64> {
    if trace.drone_count < 2 {
        return Err(Error::config("min_separation needs at least two drones"));
    }
    let mut best = f64::INFINITY;
    for frame in trace.frames() {
        for (i, a) in frame.iter().enumerate() {
            for b in &frame[i + 1..] {
                best = best.min(a.position.distance(b.position));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::sim::{line_abreast, SimConfig};

    fn parallel_world() -> World {
        let cfg = SimConfig {
            offsets: line_abreast(2, 1.0),
            ..SimConfig::default()
        };
        World::new(cfg, FieldParams::default(), vec![])
            .unwrap()
            .with_airborne(&[DVec3::new(-1.0, -0.5, 1.0), DVec3::new(-1.0, 0.5, 1.0)])
            .unwrap()
    }

    #[test]
    fn parallel_drones_keep_distance() {
        let mut w = parallel_world();
        w.targets = vec![DVec3::new(1.0, -0.5, 1.0), DVec3::new(1.0, 0.5, 1.0)];
        let mut tr = Trace::new(2);
        tr.record(&w);
        for _ in 0..300 {
            w.step(0.01);
            tr.record(&w);
        }
        assert!((min_separation(&tr).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_drone_separation_is_error() {
        assert!(matches!(min_separation(&Trace::new(1)), Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut w = parallel_world();
        w.targets = vec![DVec3::new(0.3, -0.1, 1.7), DVec3::new(0.9, 0.2, 0.4)];
        let mut tr = Trace::new(2);
        for _ in 0..50 {
            w.step(0.01);
            tr.record(&w);
        }
        let mut buf = Vec::new();
        write_trace(&tr, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, tr);
        assert_eq!(back.checksum(), tr.checksum());
        assert!(std::str::from_utf8(&buf)
            .unwrap()
            .starts_with("t,drone_id,x,y,z,vx,vy,vz,led_r,led_g,led_b\n"));
    }

    #[test]
    fn events_are_json_lines() {
        let mut buf = Vec::new();
        write_events(
            &[
                SimEvent::GoalReached { drone: 1, t: 2.5 },
                SimEvent::SeparationViolation {
                    pair: (0, 1),
                    d: 0.1,
                    t: 3.0,
                },
            ],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"type":"goal_reached","drone":1,"t":2.5}"#);
        assert_eq!(
            lines[1],
            r#"{"type":"separation_violation","pair":[0,1],"d":0.1,"t":3.0}"#
        );
    }
}
