//! Static SVG figure output. Everything is a pure function of the CSV data:
//! no timestamps, no randomness, fixed layout, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::csv::{read_csv, CsvTable};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Line plot with log-log axes; expects (x, y) columns with positive x
    /// and y.
    TrajectoryLogLog,
    /// Histogram of the last column, binned by the Freedman-Diaconis rule.
    Histogram,
    /// Bars with error whiskers. Multi-row tables plot column 1 vs the row
    /// label in column 0 with whiskers from column 2; single-row tables plot
    /// each value column as its own bar.
    BarErrors,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 24.0;
const MARGIN_B: f64 = 52.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(
        s,
        r#"<rect width="{}" height="{}" fill="white"/>"#,
        WIDTH, HEIGHT
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" font-family="monospace" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        title
    );
    s
}

fn axis_label(s: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{}</text>"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        x_label
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="monospace" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        y_label
    );
}

fn frame(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
}

fn x_pos(frac: f64) -> f64 {
    MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)
}

fn y_pos(frac: f64) -> f64 {
    HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)
}

fn tick_text(s: &mut String, x: f64, y: f64, anchor: &str, text: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="10" text-anchor="{}">{}</text>"#,
        x, y, anchor, text
    );
}

fn render_loglog(table: &CsvTable, title: &str) -> Result<String, CliError> {
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r[0] > 0.0 && r[1] > 0.0)
        .map(|r| (r[0], r[1]))
        .collect();
    if points.is_empty() {
        return Err(CliError::Validation(
            "trajectory plot needs at least one positive (x, y) row".into(),
        ));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let (lx0, lx1) = (x0.log10(), (x1.log10() + 1e-9).max(x0.log10() + 1e-9));
    let (ly0, ly1) = (y0.log10(), (y1.log10() + 1e-9).max(y0.log10() + 1e-9));
    let mut s = svg_open(title);
    frame(&mut s);
    let mut path = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let fx = (x.log10() - lx0) / (lx1 - lx0);
        let fy = (y.log10() - ly0) / (ly1 - ly0);
        let _ = write!(
            path,
            "{}{:.2},{:.2} ",
            if i == 0 { "M" } else { "L" },
            x_pos(fx),
            y_pos(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.trim_end()
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = 10f64.powf(lx0 + f * (lx1 - lx0));
        let yv = 10f64.powf(ly0 + f * (ly1 - ly0));
        tick_text(
            &mut s,
            x_pos(f),
            HEIGHT - MARGIN_B + 14.0,
            "middle",
            &format!("{:.2e}", xv),
        );
        tick_text(
            &mut s,
            MARGIN_L - 6.0,
            y_pos(f) + 3.0,
            "end",
            &format!("{:.2e}", yv),
        );
    }
    axis_label(
        &mut s,
        &format!("{} (log)", table.header[0]),
        &format!("{} (log)", table.header[1]),
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Freedman-Diaconis bin width `2 IQR n^{-1/3}`.
fn fd_bins(values: &[f64]) -> (f64, f64, usize) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let q = |p: f64| -> f64 {
        let idx = p * (n - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let w = idx - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    };
    let iqr = q(0.75) - q(0.25);
    let lo = sorted[0];
    let hi = sorted[n - 1];
    let width = if iqr > 0.0 {
        2.0 * iqr / (n as f64).cbrt()
    } else {
        (hi - lo).max(1e-12) / 10.0
    };
    let bins = (((hi - lo) / width).ceil() as usize).clamp(1, 400);
    (lo, hi, bins)
}

fn render_histogram(table: &CsvTable, title: &str) -> Result<String, CliError> {
    let col = table.header.len() - 1;
    let values: Vec<f64> = table.rows.iter().map(|r| r[col]).collect();
    if values.len() < 2 {
        return Err(CliError::Validation(
            "histogram needs at least two values".into(),
        ));
    }
    let (lo, hi, bins) = fd_bins(&values);
    let span = (hi - lo).max(1e-300);
    let mut counts = vec![0u64; bins];
    for v in &values {
        let idx = (((v - lo) / span) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let max_count = *counts.iter().max().unwrap() as f64;
    let mut s = svg_open(title);
    frame(&mut s);
    let bar_w = (WIDTH - MARGIN_L - MARGIN_R) / bins as f64;
    for (i, c) in counts.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let h = (*c as f64 / max_count) * (HEIGHT - MARGIN_T - MARGIN_B);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="seagreen" stroke="white" stroke-width="0.5"/>"#,
            MARGIN_L + i as f64 * bar_w,
            HEIGHT - MARGIN_B - h,
            bar_w,
            h
        );
    }
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        tick_text(
            &mut s,
            x_pos(f),
            HEIGHT - MARGIN_B + 14.0,
            "middle",
            &format!("{:.3}", lo + f * span),
        );
        tick_text(
            &mut s,
            MARGIN_L - 6.0,
            y_pos(f) + 3.0,
            "end",
            &format!("{:.0}", f * max_count),
        );
    }
    axis_label(&mut s, &table.header[col], "count");
    s.push_str("</svg>\n");
    Ok(s)
}

fn render_bars(table: &CsvTable, title: &str) -> Result<String, CliError> {
    // (label, value, whisker)
    let bars: Vec<(String, f64, f64)> = if table.rows.len() == 1 && table.header.len() >= 3 {
        let row = &table.rows[0];
        let last = table.header.len() - 1;
        let has_ci = table.header[last].contains("ci");
        let value_cols = if has_ci {
            1..last
        } else {
            1..table.header.len()
        };
        value_cols
            .map(|j| {
                let ci = if has_ci && j + 1 == last {
                    row[last]
                } else {
                    0.0
                };
                (table.header[j].clone(), row[j], ci)
            })
            .collect()
    } else {
        table
            .rows
            .iter()
            .map(|r| {
                let ci = if r.len() >= 3 { r[2] } else { 0.0 };
                (format!("{}", r[0]), r[1], ci)
            })
            .collect()
    };
    if bars.is_empty() {
        return Err(CliError::Validation(
            "bar plot needs at least one row".into(),
        ));
    }
    let max_v = bars
        .iter()
        .map(|(_, v, c)| v + c)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut s = svg_open(title);
    frame(&mut s);
    let n = bars.len() as f64;
    let slot = (WIDTH - MARGIN_L - MARGIN_R) / n;
    for (i, (label, v, ci)) in bars.iter().enumerate() {
        let h = (v / max_v).max(0.0) * (HEIGHT - MARGIN_T - MARGIN_B);
        let cx = MARGIN_L + (i as f64 + 0.5) * slot;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="slateblue"/>"#,
            cx - slot * 0.3,
            HEIGHT - MARGIN_B - h,
            slot * 0.6,
            h
        );
        if *ci > 0.0 {
            let c = (ci / max_v) * (HEIGHT - MARGIN_T - MARGIN_B);
            let top = HEIGHT - MARGIN_B - h;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                cx,
                (top - c).max(MARGIN_T),
                cx,
                (top + c).min(HEIGHT - MARGIN_B)
            );
        }
        tick_text(&mut s, cx, HEIGHT - MARGIN_B + 14.0, "middle", label);
    }
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        tick_text(
            &mut s,
            MARGIN_L - 6.0,
            y_pos(f) + 3.0,
            "end",
            &format!("{:.3e}", f * max_v),
        );
    }
    axis_label(&mut s, &table.header[0], "value");
    s.push_str("</svg>\n");
    Ok(s)
}

/// Renders a CSV artifact as a deterministic SVG next to it (same stem,
/// `.svg` extension). Returns the written path.
pub fn emit_svg(csv_artifact: &Path, plot_kind: PlotKind) -> Result<PathBuf, CliError> {
    let table = read_csv(csv_artifact)?;
    if table.rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no data rows to plot",
            csv_artifact.display()
        )));
    }
    let schema_ok = match plot_kind {
        PlotKind::TrajectoryLogLog => table.header.len() >= 2,
        PlotKind::Histogram => !table.header.is_empty(),
        PlotKind::BarErrors => table.header.len() >= 2,
    };
    if !schema_ok {
        return Err(CliError::Validation(format!(
            "{}: schema {:?} does not match plot kind {:?}",
            csv_artifact.display(),
            table.header,
            plot_kind
        )));
    }
    let title = csv_artifact
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    let body = match plot_kind {
        PlotKind::TrajectoryLogLog => render_loglog(&table, &title)?,
        PlotKind::Histogram => render_histogram(&table, &title)?,
        PlotKind::BarErrors => render_bars(&table, &title)?,
    };
    let out = csv_artifact.with_extension("svg");
    std::fs::write(&out, body)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_bin_count_for_standard_normals() {
        // 2000 standard normals should land between 20 and 60 bins.
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let normal = StandardNormal;
        let xs: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();
        let (_, _, bins) = fd_bins(&xs);
        assert!((20..=60).contains(&bins), "bins = {}", bins);
    }

    #[test]
    fn same_input_same_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("h.csv");
        std::fs::write(&csv, "rep_index,value\n0,1.0\n1,2.0\n2,1.5\n3,1.7\n").unwrap();
        let p1 = emit_svg(&csv, PlotKind::Histogram).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let p2 = emit_svg(&csv, PlotKind::Histogram).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn empty_rows_do_not_write_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("e.csv");
        std::fs::write(&csv, "iteration,sq_err\n").unwrap();
        assert!(emit_svg(&csv, PlotKind::TrajectoryLogLog).is_err());
        assert!(!dir.path().join("e.svg").exists());
    }
}
