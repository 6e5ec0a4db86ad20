//! Per-point summary tables and SVG line charts over sweep results.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::harness::csv::ResultTable;
use crate::metrics::{mean, std_dev};

const AXIS_COLUMNS: [&str; 4] = ["sigma", "naw", "r_ratio", "bits_per_cell"];
const BASE_METRICS: [&str; 4] = ["rmse", "code_error_rate", "cycles", "e_total"];

/// Axis columns that actually vary in this result set.
pub fn swept_axes(table: &ResultTable) -> Vec<String> {
    AXIS_COLUMNS
        .iter()
        .filter(|axis| {
            table
                .column(axis)
                .map(|idx| {
                    table
                        .rows
                        .iter()
                        .map(|r| r[idx].clone())
                        .collect::<BTreeSet<_>>()
                        .len()
                        > 1
                })
                .unwrap_or(false)
        })
        .map(|s| s.to_string())
        .collect()
}

/// Metrics charted per swept axis.
pub fn chart_metrics(table: &ResultTable) -> Vec<String> {
    let mut metrics: Vec<String> = BASE_METRICS.iter().map(|s| s.to_string()).collect();
    if table.has_column("accuracy") {
        metrics.push("accuracy".to_string());
    }
    metrics
}

fn group_key(table: &ResultTable, row: &[String]) -> String {
    let mut parts = vec![row[table.column("pipeline").unwrap()].clone()];
    for axis in AXIS_COLUMNS {
        parts.push(format!("{axis}={}", row[table.column(axis).unwrap()]));
    }
    parts.join(" ")
}

/// Mean/std table per axis point, in first-appearance order.
pub fn summarize(table: &ResultTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Validation("no rows to summarize".into()));
    }
    let metrics = chart_metrics(table);
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<&Vec<String>>> =
        std::collections::HashMap::new();
    for row in &table.rows {
        let key = group_key(table, row);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(row);
    }

    let mut out = String::new();
    out.push_str(&format!(
        "{:<64} {:>6} {}\n",
        "point",
        "trials",
        metrics
            .iter()
            .map(|m| format!("{m:>24}"))
            .collect::<String>()
    ));
    for key in order {
        let rows = &groups[&key];
        out.push_str(&format!("{:<64} {:>6}", key, rows.len()));
        for metric in &metrics {
            let idx = table.column(metric)?;
            let vals: Vec<f64> = rows
                .iter()
                .map(|r| r[idx].parse::<f64>().unwrap_or(f64::NAN))
                .collect();
            out.push_str(&format!(
                " {:>12.5} ± {:<9.5}",
                mean(&vals),
                std_dev(&vals)
            ));
        }
        out.push('\n');
    }
    Ok(out)
}

/// One SVG line chart per (metric, swept axis): x = axis value, one series
/// per pipeline, y = mean metric. Returns the written paths.
pub fn write_charts(table: &ResultTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let axes = swept_axes(table);
    let metrics = chart_metrics(table);
    let pipeline_idx = table.column("pipeline")?;
    let pipelines: Vec<String> = {
        let mut seen = Vec::new();
        for row in &table.rows {
            let p = row[pipeline_idx].clone();
            if !seen.contains(&p) {
                seen.push(p);
            }
        }
        seen
    };

    let mut written = Vec::new();
    for metric in &metrics {
        let metric_idx = table.column(metric)?;
        for axis in &axes {
            let axis_idx = table.column(axis)?;
            let path = out_dir.join(format!("chart_{metric}_vs_{axis}.svg"));

            // Collect series: pipeline -> sorted (x, mean y).
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for pipeline in &pipelines {
                let mut xs: Vec<f64> = Vec::new();
                for row in &table.rows {
                    if &row[pipeline_idx] != pipeline {
                        continue;
                    }
                    let x: f64 = row[axis_idx].parse().unwrap_or(f64::NAN);
                    if !xs.contains(&x) {
                        xs.push(x);
                    }
                }
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let points: Vec<(f64, f64)> = xs
                    .iter()
                    .map(|&x| {
                        let ys: Vec<f64> = table
                            .rows
                            .iter()
                            .filter(|r| {
                                &r[pipeline_idx] == pipeline
                                    && r[axis_idx].parse::<f64>().unwrap_or(f64::NAN) == x
                            })
                            .map(|r| r[metric_idx].parse::<f64>().unwrap_or(f64::NAN))
                            .collect();
                        (x, mean(&ys))
                    })
                    .collect();
                series.push((pipeline.clone(), points));
            }

            draw_chart(&path, metric, axis, &series)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn draw_chart(
    path: &Path,
    metric: &str,
    axis: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> Result<()> {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, pts)| pts.clone()).collect();
    if all.is_empty() {
        return Err(Error::Validation(format!(
            "no data for chart {metric} vs {axis}"
        )));
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_lo == x_hi {
        x_hi += 1.0;
    }
    if y_lo == y_hi {
        y_hi += 1.0;
    }
    let y_pad = (y_hi - y_lo) * 0.05;

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE)
        .map_err(|e| Error::Validation(format!("chart draw: {e}")))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{metric} vs {axis}"), ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x_lo..x_hi, (y_lo - y_pad)..(y_hi + y_pad))
        .map_err(|e| Error::Validation(format!("chart build: {e}")))?;
    chart
        .configure_mesh()
        .x_desc(axis)
        .y_desc(metric)
        .draw()
        .map_err(|e| Error::Validation(format!("chart mesh: {e}")))?;
    for (i, (name, points)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))
            .map_err(|e| Error::Validation(format!("chart series: {e}")))?
            .label(name.clone())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(|e| Error::Validation(format!("chart legend: {e}")))?;
    root.present()
        .map_err(|e| Error::Validation(format!("chart present: {e}")))?;
    Ok(())
}
