use std::fs::File;
use std::path::PathBuf;

use dronepaint_core::metrics::reference::{fixture_name, fixture_trace, reference_shape, REFERENCE_MAGNITUDES};
use dronepaint_core::metrics::{format_table, trace_errors, TableColumn, TraceReport};
use dronepaint_core::trajectory::{read_trajectory, write_trajectory, StrokePoint, TrajectoryRow};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table1")
}

fn load(name: &str) -> Vec<StrokePoint> {
    read_trajectory(File::open(dir().join(format!("{name}.csv"))).unwrap())
        .unwrap()
        .iter()
        .map(|r| StrokePoint { x: r.x, y: r.y, t: r.t })
        .collect()
}

fn stored() -> Vec<(String, TraceReport)> {
    let text = std::fs::read_to_string(dir().join("reports.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
#[ignore = "rewrites fixtures/table1"]
fn regenerate() {
    std::fs::create_dir_all(dir()).unwrap();
    let mut reports = Vec::new();
    for (i, c) in REFERENCE_MAGNITUDES.iter().enumerate() {
        let name = fixture_name(c);
        let trace = fixture_trace(c, 100 + i as u64).unwrap();
        let rows: Vec<TrajectoryRow> = trace
            .iter()
            .map(|p| TrajectoryRow {
                x: p.x,
                y: p.y,
                z: None,
                t: p.t,
            })
            .collect();
        write_trajectory(&rows, File::create(dir().join(format!("{name}.csv"))).unwrap()).unwrap();
        let report = trace_errors(&load(&name), &reference_shape(c.shape).unwrap()).unwrap();
        reports.push((name, report));
    }
    std::fs::write(
        dir().join("reports.json"),
        serde_json::to_string_pretty(&reports).unwrap() + "\n",
    )
    .unwrap();
}

#[test]
fn fixtures_reproduce_stored_reports() {
    let reports = stored();
    assert_eq!(reports.len(), REFERENCE_MAGNITUDES.len());
    for (c, (name, want)) in REFERENCE_MAGNITUDES.iter().zip(&reports) {
        assert_eq!(*name, fixture_name(c));
        let got = trace_errors(&load(name), &reference_shape(c.shape).unwrap()).unwrap();
        assert_eq!(got, *want, "{name}");
    }
}

#[test]
fn fixtures_have_reference_magnitudes() {
    for (c, (name, r)) in REFERENCE_MAGNITUDES.iter().zip(stored()) {
        assert!((r.duration - c.time_s).abs() < 0.04, "{name}");
        assert!((r.rmse / c.rmse_cm - 1.0).abs() < 0.2, "{name}: {r:?}");
        assert!((r.mean_error / c.mean_error_cm - 1.0).abs() < 0.25, "{name}: {r:?}");
    }
}

#[test]
fn table_has_grid_shape() {
    let cols: Vec<TableColumn> = REFERENCE_MAGNITUDES
        .iter()
        .zip(stored())
        .map(|(c, (_, report))| TableColumn {
            shape: c.shape.into(),
            method: c.method.into(),
            report,
        })
        .collect();
    let text = format_table(&cols);
    let lines: Vec<&str> = text.lines().collect();
    for s in ["Square", "Circle", "Triangle"] {
        assert_eq!(lines[0].matches(s).count(), 1);
    }
    assert_eq!(lines[1].split_whitespace().filter(|w| *w == "H").count(), 3);
    for (line, label) in lines[2..]
        .iter()
        .zip(["Max error, cm", "Mean error, cm", "RMSE, cm", "Time, sec"])
    {
        assert!(line.starts_with(label));
        assert_eq!(line.split('|').count(), 4);
    }
}
