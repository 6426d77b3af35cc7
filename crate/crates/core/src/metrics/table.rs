use std::fmt::Write;

use super::TraceReport;

pub const TABLE_ROW_LABELS: [&str; 4] = ["Max error, cm", "Mean error, cm", "RMSE, cm", "Time, sec"];

/// One column of the comparison table, e.g. shape "Square", method "H".
#[derive(Debug, Clone, PartialEq)]
pub struct TableColumn {
    pub shape: String,
    pub method: String,
    pub report: TraceReport,
}

const LABEL_W: usize = 16;
const CELL_W: usize = 8;

/// Plain-text table: a shape header row, a method header row, then the four
/// metric rows with two decimals. Adjacent columns sharing a shape are grouped.
pub fn format_table(columns: &[TableColumn]) -> String {
    let mut groups: Vec<(&str, usize)> = Vec::new();
    for c in columns {
        match groups.last_mut() {
            Some((s, n)) if *s == c.shape => *n += 1,
            _ => groups.push((&c.shape, 1)),
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:LABEL_W$}", "");
    for (shape, n) in &groups {
        let _ = write!(out, "| {:w$}", shape, w = n * CELL_W);
    }
    out.push('\n');
    let _ = write!(out, "{:LABEL_W$}", "");
    let mut idx = 0;
    for (_, n) in &groups {
        out.push_str("| ");
        for c in &columns[idx..idx + n] {
            let _ = write!(out, "{:CELL_W$}", c.method);
        }
        idx += n;
    }
    out.push('\n');
    let rows: [fn(&TraceReport) -> f64; 4] = [|r| r.max_error, |r| r.mean_error, |r| r.rmse, |r| r.duration];
    for (label, get) in TABLE_ROW_LABELS.iter().zip(rows) {
        let _ = write!(out, "{label:LABEL_W$}");
        let mut idx = 0;
        for (_, n) in &groups {
            out.push_str("| ");
            for c in &columns[idx..idx + n] {
                let _ = write!(out, "{:<CELL_W$}", format!("{:.2}", get(&c.report)));
            }
            idx += n;
        }
        out.push('\n');
    }
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(shape: &str, method: &str, v: f64) -> TableColumn {
        TableColumn {
            shape: shape.into(),
            method: method.into(),
            report: TraceReport {
                max_error: v,
                mean_error: v / 2.0,
                rmse: v / 3.0,
                duration: 15.5,
                n_samples: 10,
            },
        }
    }

    #[test]
    fn layout() {
        let t = format_table(&[
            col("Square", "H", 18.614),
            col("Square", "M", 10.5),
            col("Circle", "H", 1.0),
        ]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].contains("| Square") && lines[0].contains("| Circle"));
        assert!(lines[1].contains("H       M"));
        assert!(lines[2].starts_with("Max error, cm") && lines[2].contains("18.61"));
        assert!(lines[3].starts_with("Mean error, cm") && lines[3].contains("9.31"));
        assert!(lines[4].starts_with("RMSE, cm"));
        assert!(lines[5].starts_with("Time, sec") && lines[5].contains("15.50"));
    }
}
