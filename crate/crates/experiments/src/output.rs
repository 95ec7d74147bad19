//! CSV tables with a metadata header and minimal SVG line plots.
//!
//! Every CSV starts with `# key = value` lines holding the resolved
//! parameters and the version tag, then one column-header row, then data.
//! Nothing time-dependent goes into the header so that identical inputs
//! give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{LabError, LabResult};

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(meta: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    /// Append a row; panics on a column-count mismatch.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let v = v.replace('\n', " ");
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> LabResult<PathBuf> {
        write_file(path, &self.render())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; non-numeric fields become NaN.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[k].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

/// Float formatting used in every table.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.12e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "NaN".into())
}

/// Parse `text` and check it against the expected column list.
///
/// Columns named in `text_columns` may hold arbitrary text without commas;
/// every other field must parse as a float (NaN allowed).
pub fn check_csv(text: &str, columns: &[&str], text_columns: &[&str]) -> LabResult<Table> {
    let bad = |m: String| Err(LabError::Config(format!("csv schema: {m}")));
    let mut meta = Vec::new();
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            Some(line) if line.starts_with('#') => {
                let Some((k, v)) = line[1..].split_once(" = ") else {
                    return bad(format!("malformed header line `{line}`"));
                };
                meta.push((k.trim().to_string(), v.to_string()));
            }
            Some(line) => break line,
            None => return bad("no column header".into()),
        }
    };
    if !meta.iter().any(|(k, _)| k == "version") {
        return bad("header block lacks a version tag".into());
    }
    let found: Vec<&str> = header.split(',').collect();
    if found != columns {
        return bad(format!("columns {found:?}, expected {columns:?}"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return bad(format!(
                "row {i} has {} fields, expected {}",
                fields.len(),
                columns.len()
            ));
        }
        for (f, c) in fields.iter().zip(columns) {
            if !text_columns.contains(c) && f.parse::<f64>().is_err() {
                return bad(format!("row {i}, column `{c}`: `{f}` is not a number"));
            }
        }
        rows.push(fields.iter().map(|f| f.to_string()).collect());
    }
    if rows.is_empty() {
        return bad("no data rows".into());
    }
    Ok(Table {
        meta,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

pub fn write_file(path: &Path, contents: &str) -> LabResult<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| LabError::Io {
            action: "create directory",
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| LabError::Io {
        action: "write",
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

// SVG

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 55.0); // left, right, top, bottom

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub name: String,
    pub x: Vec<f64>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
    /// Horizontal reference lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
    /// Vertical reference lines `(x, label)`.
    pub vlines: Vec<(f64, String)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = if log { (1.0, 10.0) } else { (0.0, 1.0) };
        }
        if log {
            (lo, hi) = (lo.log10().floor(), hi.log10().ceil());
            if hi <= lo {
                hi = lo + 1.0;
            }
        } else {
            if hi <= lo {
                let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
                (lo, hi) = (lo - pad, hi + pad);
            }
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    /// Position in [0, 1], or None when the value cannot be drawn.
    fn unit(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i32;
            (self.lo as i32..=self.hi as i32)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(raw);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|k| k as f64 * step)
                .map(|v| (v, fmt_tick(v)))
                .collect()
        }
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn line(mut self, name: &str, x: &[f64], y: &[f64]) -> Self {
        self.series.push(Series {
            name: name.into(),
            x: x.to_vec(),
            y: y.to_vec(),
            style: Style::Line,
        });
        self
    }

    pub fn styled(mut self, name: &str, x: &[f64], y: &[f64], style: Style) -> Self {
        self.series.push(Series {
            name: name.into(),
            x: x.to_vec(),
            y: y.to_vec(),
            style,
        });
        self
    }

    pub fn band(mut self, name: &str, x: &[f64], low: &[f64], high: &[f64]) -> Self {
        self.bands.push(Band {
            name: name.into(),
            x: x.to_vec(),
            low: low.to_vec(),
            high: high.to_vec(),
        });
        self
    }

    pub fn render(&self) -> String {
        let (ml, mr, mt, mb) = MARGIN;
        let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.x.iter().copied())
            .chain(self.bands.iter().flat_map(|b| b.x.iter().copied()));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.y.iter().copied())
            .chain(
                self.bands
                    .iter()
                    .flat_map(|b| b.low.iter().chain(&b.high).copied()),
            )
            .chain(self.hlines.iter().map(|h| h.0));
        let ax = Axis::fit(xs.chain(self.vlines.iter().map(|v| v.0)), self.log_x);
        let ay = Axis::fit(ys, self.log_y);
        let px = |v: f64| ax.unit(v).map(|u| ml + u * pw);
        let py = |v: f64| ay.unit(v).map(|u| mt + (1.0 - u) * ph);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (v, label) in ax.ticks() {
            if let Some(x) = px(v) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                    mt + ph,
                    mt + ph + 5.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                    mt + ph + 18.0,
                    esc(&label)
                );
            }
        }
        for (v, label) in ay.ticks() {
            if let Some(y) = py(v) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{}" y1="{y:.2}" x2="{ml}" y2="{y:.2}" stroke="black"/>"#,
                    ml - 5.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                    ml - 8.0,
                    y + 4.0,
                    esc(&label)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            ml + pw / 2.0,
            HEIGHT - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            mt + ph / 2.0,
            esc(&self.y_label)
        );

        let mut legend: Vec<(String, String, Style)> = Vec::new();
        for (i, b) in self.bands.iter().enumerate() {
            let color = PALETTE[(PALETTE.len() - 1 - i) % PALETTE.len()];
            let upper: Vec<(f64, f64)> =
                b.x.iter()
                    .zip(&b.high)
                    .filter_map(|(x, y)| Some((px(*x)?, py(*y)?)))
                    .collect();
            let lower: Vec<(f64, f64)> =
                b.x.iter()
                    .zip(&b.low)
                    .rev()
                    .filter_map(|(x, y)| Some((px(*x)?, py(*y)?)))
                    .collect();
            let pts: Vec<String> = upper
                .iter()
                .chain(&lower)
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
                pts.join(" ")
            );
            legend.push((b.name.clone(), color.into(), Style::Line));
        }
        for (y, label) in &self.hlines {
            if let Some(yy) = py(*y) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{ml}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
                    ml + pw
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{:.2}" text-anchor="end" fill="gray">{}</text>"#,
                    ml + pw - 4.0,
                    yy - 4.0,
                    esc(label)
                );
            }
        }
        for (x, label) in &self.vlines {
            if let Some(xx) = px(*x) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{xx:.2}" y1="{mt}" x2="{xx:.2}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
                    mt + ph
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{}" fill="gray">{}</text>"#,
                    xx + 4.0,
                    mt + 12.0,
                    esc(label)
                );
            }
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .x
                .iter()
                .zip(&series.y)
                .filter_map(|(x, y)| Some((px(*x)?, py(*y)?)))
                .collect();
            match series.style {
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#
                        );
                    }
                }
                Style::Line | Style::Dashed => {
                    let dash = if series.style == Style::Dashed {
                        r#" stroke-dasharray="6 3""#
                    } else {
                        ""
                    };
                    let path: Vec<String> =
                        pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                        path.join(" ")
                    );
                }
            }
            legend.push((series.name.clone(), color.into(), series.style));
        }
        for (i, (name, color, style)) in legend.iter().enumerate() {
            let y = mt + 12.0 + 14.0 * i as f64;
            let x = ml + 10.0;
            match style {
                Style::Markers => {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#,
                        x + 9.0,
                        y - 4.0
                    );
                }
                _ => {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x}" y1="{0}" x2="{1}" y2="{0}" stroke="{color}" stroke-width="2"/>"#,
                        y - 4.0,
                        x + 18.0
                    );
                }
            }
            let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 24.0, esc(name));
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> LabResult<PathBuf> {
        write_file(path, &self.render())
    }
}

/// Structural check of an emitted SVG: root element, closing tag and at
/// least one drawn series.
pub fn check_svg(text: &str) -> LabResult<()> {
    let ok = text.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\"")
        && text.trim_end().ends_with("</svg>")
        && (text.contains("<polyline") || text.contains("<circle"));
    if ok {
        Ok(())
    } else {
        Err(LabError::Config(
            "svg schema: missing root element or drawn data".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec![("version".into(), "x".into())], &["a", "b", "tag"]);
        t.push(vec![num(1.0), num(f64::NAN), "emission".into()]);
        t.push(vec![num(2.5e-7), num(3.0), "excitation".into()]);
        t
    }

    #[test]
    fn table_round_trips_through_checker() {
        let t = sample();
        let back = check_csv(&t.render(), &["a", "b", "tag"], &["tag"]).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column_f64("a").unwrap(), vec![1.0, 2.5e-7]);
        assert_eq!(back.meta_value("version"), Some("x"));
    }

    #[test]
    fn checker_rejects_schema_violations() {
        let text = sample().render();
        assert!(check_csv(&text, &["a", "b"], &["tag"]).is_err());
        assert!(check_csv(&text, &["a", "b", "tag"], &[]).is_err());
        assert!(check_csv(
            &text.replace("# version = x\n", ""),
            &["a", "b", "tag"],
            &["tag"]
        )
        .is_err());
        assert!(check_csv(&format!("{text}1,2\n"), &["a", "b", "tag"], &["tag"]).is_err());
    }

    #[test]
    fn svg_has_log_ticks_and_series() {
        let x = [1e6, 1e7, 1e8, 1e9];
        let svg = Plot {
            log_x: true,
            ..Plot::new("t", "alpha", "p")
        }
        .line("one", &x, &[0.1, 0.2, 0.3, 0.4])
        .band("band", &x, &[0.0; 4], &[0.5; 4])
        .render();
        check_svg(&svg).unwrap();
        assert!(svg.contains(">1e6<") && svg.contains(">1e9<"));
        assert!(svg.contains("<polygon"));
    }

    #[test]
    fn non_positive_values_are_skipped_on_log_axes() {
        let svg = Plot {
            log_y: true,
            ..Plot::new("t", "x", "y")
        }
        .line("s", &[1.0, 2.0, 3.0], &[0.0, 1.0, 10.0])
        .render();
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 2);
    }
}
