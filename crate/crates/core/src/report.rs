//! Impulse-response tables, their CSV and SVG renderings, and indicator
//! comparison tables.
//!
//! Values are raw log-return units (0.05 is 500 basis points). Everything
//! emitted here is a pure function of its input.

use crate::indicator::{csv_field, Granularity, IndicatorKind, IndicatorPoint};
use crate::lp::LPResult;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const IRF_CSV_HEADER: &str = "horizon,coef,ci_low,ci_high,n";
pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 500.0;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("irf csv line {line}: {message}")]
    ParseError { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrfRow {
    pub horizon: usize,
    pub coef: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IRFTable {
    pub kind: IndicatorKind,
    pub granularity: Granularity,
    pub ticker: String,
    pub rows: Vec<IrfRow>,
}

/// Ten significant digits in scientific notation.
pub fn format_sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn round_sig10(x: f64) -> f64 {
    format_sig10(x).parse().expect("formatted float parses")
}

/// Build the table for the indicator coefficient and render it as CSV.
/// Table values are already rounded to what the CSV carries, so parsing
/// the CSV gives back the same table.
pub fn emit_irf(
    results: &[LPResult],
    ticker: &str,
    kind: IndicatorKind,
    granularity: Granularity,
) -> (IRFTable, String) {
    let mut rows: Vec<IrfRow> = results
        .iter()
        .map(|r| {
            let (lo, hi) = r.target_ci();
            IrfRow {
                horizon: r.horizon,
                coef: round_sig10(r.target()),
                ci_low: round_sig10(lo),
                ci_high: round_sig10(hi),
                n: r.n,
            }
        })
        .collect();
    rows.sort_by_key(|r| r.horizon);
    rows.dedup_by_key(|r| r.horizon);
    let table = IRFTable {
        kind,
        granularity,
        ticker: ticker.to_string(),
        rows,
    };
    let csv = irf_csv(&table);
    (table, csv)
}

pub fn irf_csv(table: &IRFTable) -> String {
    let mut out = String::from(IRF_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.horizon,
            format_sig10(r.coef),
            format_sig10(r.ci_low),
            format_sig10(r.ci_high),
            r.n
        );
    }
    out
}

pub fn parse_irf_csv(
    text: &str,
    ticker: &str,
    kind: IndicatorKind,
    granularity: Granularity,
) -> Result<IRFTable, ReportError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.deserialize::<IrfRow>() {
        rows.push(record.map_err(|e| ReportError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?);
    }
    Ok(IRFTable {
        kind,
        granularity,
        ticker: ticker.to_string(),
        rows,
    })
}

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    h_min: f64,
    h_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, h: f64) -> f64 {
        if self.h_max == self.h_min {
            (self.left + self.right) / 2.0
        } else {
            self.left + (h - self.h_min) / (self.h_max - self.h_min) * (self.right - self.left)
        }
    }

    fn y(&self, v: f64) -> f64 {
        self.bottom - (v - self.y_min) / (self.y_max - self.y_min) * (self.bottom - self.top)
    }
}

fn polyline(frame: &Frame, rows: &[IrfRow], value: impl Fn(&IrfRow) -> f64) -> String {
    rows.iter()
        .map(|r| format!("{:.2},{:.2}", frame.x(r.horizon as f64), frame.y(value(r))))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Static line chart: solid coefficient path, dashed interval bounds and a
/// zero line, on a fixed 800x500 view box.
pub fn emit_irf_svg(table: &IRFTable) -> String {
    let rows = &table.rows;
    let h_min = rows.first().map_or(0.0, |r| r.horizon as f64);
    let h_max = rows.last().map_or(0.0, |r| r.horizon as f64);
    let (mut lo, mut hi) = rows
        .iter()
        .flat_map(|r| [r.coef, r.ci_low, r.ci_high])
        .filter(|v| v.is_finite())
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo <= f64::EPSILON {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let frame = Frame {
        left: 80.0,
        right: SVG_WIDTH - 30.0,
        top: 50.0,
        bottom: SVG_HEIGHT - 60.0,
        h_min,
        h_max,
        y_min: lo - pad,
        y_max: hi + pad,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 500" width="800" height="500" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="800" height="500" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="400" y="28" text-anchor="middle" font-size="16">Response of {} to {} ({})</text>"#,
        xml_escape(&table.ticker),
        table.kind,
        table.granularity
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        frame.left,
        frame.top,
        frame.right - frame.left,
        frame.bottom - frame.top
    );
    for r in rows {
        let x = frame.x(r.horizon as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.bottom + 18.0,
            r.horizon
        );
    }
    for i in 0..=4 {
        let v = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.4}</text>"#,
            frame.left - 6.0,
            frame.y(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="400" y="{:.2}" text-anchor="middle">horizon (trading days)</text>"#,
        SVG_HEIGHT - 20.0
    );
    let zero = frame.y(0.0);
    let _ = writeln!(
        svg,
        r##"<line id="zero" x1="{:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#888888"/>"##,
        frame.left, frame.right
    );
    let _ = writeln!(
        svg,
        r##"<polyline id="ci-low" points="{}" fill="none" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
        polyline(&frame, rows, |r| r.ci_low)
    );
    let _ = writeln!(
        svg,
        r##"<polyline id="ci-high" points="{}" fill="none" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
        polyline(&frame, rows, |r| r.ci_high)
    );
    let _ = writeln!(
        svg,
        r##"<polyline id="coef" points="{}" fill="none" stroke="#1f4e79" stroke-width="2"/>"##,
        polyline(&frame, rows, |r| r.coef)
    );
    svg.push_str("</svg>\n");
    svg
}

pub const COMPARISON_CSV_HEADER: &str = "date,event_id,score_a,score_b";

/// Full outer join of two indicator series on `event_id`, sorted by
/// `(date, event_id)`. Absent or missing scores are empty strings.
pub fn emit_indicator_comparison(series_a: &[IndicatorPoint], series_b: &[IndicatorPoint]) -> String {
    let mut joined: BTreeMap<&str, (NaiveDate, Option<f64>, Option<f64>)> = BTreeMap::new();
    for p in series_a {
        joined.insert(&p.event_id, (p.event_date, p.score, None));
    }
    for p in series_b {
        joined
            .entry(&p.event_id)
            .and_modify(|e| e.2 = p.score)
            .or_insert((p.event_date, None, p.score));
    }
    let mut rows: Vec<_> = joined.into_iter().collect();
    rows.sort_by(|(id_a, a), (id_b, b)| (a.0, id_a).cmp(&(b.0, id_b)));
    let fmt = |s: Option<f64>| s.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from(COMPARISON_CSV_HEADER);
    out.push('\n');
    for (id, (date, a, b)) in rows {
        let _ = writeln!(out, "{date},{},{},{}", csv_field(id), fmt(a), fmt(b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Scenario;
    use crate::indicator::LabelCounts;
    use crate::lp::DropCounts;

    fn result(h: usize, coef: f64) -> LPResult {
        LPResult {
            horizon: h,
            columns: vec![],
            coefficients: vec![0.0, coef, 0.0, 0.0, 0.0, 0.0],
            target_index: 1,
            se: vec![0.0; 6],
            ci_low: vec![0.0, coef - 0.01, 0.0, 0.0, 0.0, 0.0],
            ci_high: vec![0.0, coef + 0.01, 0.0, 0.0, 0.0, 0.0],
            n: 47,
            r_squared: 0.5,
            bootstrap_reps: 2000,
            alpha: 0.1,
            seed: 1,
            dropped: DropCounts::default(),
            redraws: 0,
        }
    }

    fn point(id: &str, day: u32, score: Option<f64>) -> IndicatorPoint {
        IndicatorPoint {
            event_id: id.into(),
            event_date: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            scenario: Scenario::PressConference,
            granularity: Granularity::Fine,
            kind: IndicatorKind::Sentiment,
            score,
            counts: LabelCounts::default(),
        }
    }

    #[test]
    fn csv_line_counts() {
        let results: Vec<_> = (0..16).map(|h| result(h, 0.05)).collect();
        let (_, csv) = emit_irf(&results, "SPY", IndicatorKind::Sentiment, Granularity::Fine);
        assert_eq!(csv.lines().count(), 17);
        assert!(!csv.contains('\r'));
        let (_, csv) = emit_irf(&results[..1], "SPY", IndicatorKind::Sentiment, Granularity::Fine);
        assert_eq!(csv, "horizon,coef,ci_low,ci_high,n\n0,5.000000000e-2,4.000000000e-2,6.000000000e-2,47\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let results: Vec<_> = (0..5).map(|h| result(h, 0.0123456789012345 * h as f64 - 1.0 / 3.0)).collect();
        let (table, csv) = emit_irf(&results, "SPY", IndicatorKind::Sentiment, Granularity::Coarse);
        let parsed = parse_irf_csv(&csv, "SPY", IndicatorKind::Sentiment, Granularity::Coarse).unwrap();
        assert_eq!(parsed, table);
        assert_eq!(irf_csv(&parsed), csv);
    }

    #[test]
    fn rows_sorted_and_unique() {
        let results = vec![result(3, 0.1), result(1, 0.2), result(3, 0.3)];
        let (table, _) = emit_irf(&results, "X", IndicatorKind::Sentiment, Granularity::Fine);
        let hs: Vec<_> = table.rows.iter().map(|r| r.horizon).collect();
        assert_eq!(hs, [1, 3]);
    }

    fn attr<'a>(doc: &'a roxmltree::Document, id: &str, name: &str) -> &'a str {
        doc.descendants()
            .find(|n| n.attribute("id") == Some(id))
            .and_then(|n| n.attribute(name))
            .unwrap()
    }

    #[test]
    fn zero_coefficients_sit_on_zero_line() {
        let mut results: Vec<_> = (0..16).map(|h| result(h, 0.0)).collect();
        for r in &mut results {
            r.ci_low[1] = -0.02;
        }
        let (table, _) = emit_irf(&results, "SPY", IndicatorKind::Sentiment, Granularity::Fine);
        let svg = emit_irf_svg(&table);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let zero_y = attr(&doc, "zero", "y1");
        for pt in attr(&doc, "coef", "points").split(' ') {
            assert_eq!(pt.split(',').nth(1).unwrap(), zero_y);
        }
        assert_eq!(attr(&doc, "ci-low", "stroke-dasharray"), "6 4");
        assert_eq!(doc.root_element().attribute("viewBox"), Some("0 0 800 500"));
    }

    #[test]
    fn svg_is_well_formed_and_deterministic() {
        let results: Vec<_> = (0..4).map(|h| result(h, 0.01 * h as f64)).collect();
        let (mut table, _) = emit_irf(&results, "A&B <fx>", IndicatorKind::VoiceTone, Granularity::Coarse);
        let svg = emit_irf_svg(&table);
        roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(svg, emit_irf_svg(&table));
        table.rows.truncate(1);
        roxmltree::Document::parse(&emit_irf_svg(&table)).unwrap();
    }

    #[test]
    fn comparison_join() {
        let a = vec![point("A", 1, Some(0.5)), point("B", 2, None)];
        let same = emit_indicator_comparison(&a, &a);
        assert_eq!(same, "date,event_id,score_a,score_b\n2020-01-01,A,0.5,0.5\n2020-01-02,B,,\n");
        let b = vec![point("C", 3, Some(-1.0))];
        let disjoint = emit_indicator_comparison(&a[..1], &b);
        assert_eq!(disjoint, "date,event_id,score_a,score_b\n2020-01-01,A,0.5,\n2020-01-03,C,,-1\n");
    }
}
