//! Deterministic CSV emission and parsing.
//!
//! CSV is the canonical result format: a header row naming every field,
//! stable column order, floats printed with 9 significant digits. Identical
//! configs and seeds produce byte-identical files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::sweep::ResultRow;

/// Significant digits used for every float column.
pub const CSV_FLOAT_DIGITS: usize = 9;

fn fmt_f64(x: f64) -> String {
    format!("{:.*e}", CSV_FLOAT_DIGITS - 1, x)
}

fn header(with_accuracy: bool) -> String {
    let mut cols = vec![
        "pipeline",
        "sigma",
        "naw",
        "r_ratio",
        "bits_per_cell",
        "trial",
        "seed",
        "rmse",
        "max_abs_err",
        "code_error_rate",
    ];
    if with_accuracy {
        cols.push("accuracy");
    }
    cols.extend([
        "cycles",
        "e_xbar",
        "e_adc",
        "e_total",
        "saturation_count",
        "clip_count",
        "area_overhead",
    ]);
    cols.join(",")
}

/// Renders the whole result set; rejects empty input so a failed run never
/// leaves a file behind.
pub fn csv_bytes(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Validation("no result rows to emit".into()));
    }
    let with_accuracy = rows[0].accuracy.is_some();
    if rows.iter().any(|r| r.accuracy.is_some() != with_accuracy) {
        return Err(Error::Validation(
            "mixed workloads: some rows carry accuracy, some do not".into(),
        ));
    }
    let mut out = header(with_accuracy);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            r.point.pipeline,
            fmt_f64(r.point.sigma),
            r.point.naw,
            fmt_f64(r.point.r_ratio),
            r.point.bits_per_cell,
            r.trial,
            r.seed
        ));
        out.push_str(&format!(
            ",{},{},{}",
            fmt_f64(r.rmse),
            fmt_f64(r.max_abs_err),
            fmt_f64(r.code_error_rate)
        ));
        if let Some(acc) = r.accuracy {
            out.push_str(&format!(",{}", fmt_f64(acc)));
        }
        out.push_str(&format!(
            ",{},{},{},{},{},{},{}\n",
            r.cycles,
            fmt_f64(r.e_xbar),
            fmt_f64(r.e_adc),
            fmt_f64(r.e_total),
            r.saturation_count,
            r.clip_count,
            fmt_f64(r.area_overhead)
        ));
    }
    Ok(out)
}

/// Writes the result set in one shot; on error no file is created.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let bytes = csv_bytes(rows)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Parsed CSV: header names plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Validation(format!("csv has no '{name}' column")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    /// Numeric view of one column.
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|_| Error::Validation(format!("non-numeric cell in '{name}'")))
            })
            .collect()
    }
}

pub fn parse_csv(text: &str) -> Result<ResultTable> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Validation("empty csv".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != header.len() {
            return Err(Error::Validation(format!(
                "csv row has {} cells, header has {}",
                cells.len(),
                header.len()
            )));
        }
        rows.push(cells);
    }
    Ok(ResultTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Pipeline;
    use crate::harness::sweep::SweepPoint;

    fn row(trial: usize) -> ResultRow {
        ResultRow {
            point: SweepPoint {
                pipeline: Pipeline::Vecom,
                sigma: 0.04,
                naw: 128,
                r_ratio: 300.0,
                bits_per_cell: 2,
            },
            trial,
            seed: 7,
            rmse: 0.125,
            max_abs_err: 3.0,
            code_error_rate: 1.0 / 128.0,
            accuracy: None,
            cycles: 72,
            e_xbar: 12.5,
            e_adc: 1.0,
            e_total: 13.5,
            saturation_count: 0,
            clip_count: 2,
            area_overhead: 0.25,
        }
    }

    #[test]
    fn empty_result_set_is_an_error() {
        assert!(csv_bytes(&[]).is_err());
    }

    #[test]
    fn emission_is_deterministic_and_counted() {
        let rows: Vec<ResultRow> = (0..6).map(row).collect();
        let a = csv_bytes(&rows).unwrap();
        let b = csv_bytes(&rows).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 7); // header + 6 data rows
    }

    #[test]
    fn floats_carry_nine_significant_digits() {
        let text = csv_bytes(&[row(0)]).unwrap();
        assert!(text.contains("2.50000000e-1"), "{text}");
        assert!(text.contains("4.00000000e-2"), "{text}");
    }

    #[test]
    fn parse_roundtrip() {
        let rows: Vec<ResultRow> = (0..3).map(row).collect();
        let text = csv_bytes(&rows).unwrap();
        let table = parse_csv(&text).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(!table.has_column("accuracy"));
        let rmse = table.values("rmse").unwrap();
        assert!((rmse[0] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn accuracy_column_appears_for_mlp_rows() {
        let mut r = row(0);
        r.accuracy = Some(0.97);
        let text = csv_bytes(&[r]).unwrap();
        let table = parse_csv(&text).unwrap();
        assert!(table.has_column("accuracy"));
    }
}
