//! Daily price and policy-control series, event anchoring and horizon
//! outcomes.
//!
//! Horizons count series rows (trading days) from the anchor row, the first
//! row dated on or after the event. The outcome at horizon `h` is
//! `ln(close[i + h]) - ln(open[i])`.

use crate::diag::Diagnostics;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Control rows more than this many calendar days after the event are stale.
pub const CONTROL_STALENESS_DAYS: i64 = 7;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: non-positive price on {date}")]
    InvalidPrice { line: usize, date: NaiveDate },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series is empty")]
    EmptySeries,
    #[error("event date {0} is after the last series date")]
    NoAnchor(NaiveDate),
    #[error("anchor date {0} is not a series date")]
    UnknownAnchor(NaiveDate),
    #[error("horizon {horizon} from {anchor} runs past the end of the series")]
    InsufficientHorizon { anchor: NaiveDate, horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub open: f64,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    pub ticker: String,
    pub rows: Vec<PriceRow>,
}

/// The four controls in regression order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub ffr_shock: f64,
    pub fg_shock: f64,
    pub ap_shock: f64,
    pub shadow_rate: f64,
}

impl ControlVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ffr_shock, self.fg_shock, self.ap_shock, self.shadow_rate]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlRow {
    pub date: NaiveDate,
    pub controls: ControlVector,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSeries {
    pub rows: Vec<ControlRow>,
}

/// An event to align: identifier plus calendar date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRef {
    pub event_id: String,
    pub event_date: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub date: NaiveDate,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub event_id: String,
    pub event_date: NaiveDate,
    pub anchor_date: NaiveDate,
    pub horizon: usize,
    pub outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomePanel {
    pub ticker: String,
    pub rows: Vec<OutcomeRow>,
}

impl OutcomePanel {
    pub fn outcome(&self, event_id: &str, horizon: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.event_id == event_id && r.horizon == horizon)
            .map(|r| r.outcome)
    }
}

fn read_file(path: &Path) -> Result<String, MarketError> {
    std::fs::read_to_string(path).map_err(|source| MarketError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Headers are matched after trimming; unknown columns are ignored.
fn column_indices(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<usize>, MarketError> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| MarketError::MissingColumn(name.to_string()))
        })
        .collect()
}

/// Parse dated rows of `columns` numeric fields from CSV text.
fn parse_dated_rows(text: &str, columns: &[&str]) -> Result<Vec<(usize, NaiveDate, Vec<f64>)>, MarketError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| MarketError::ParseError {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut wanted = vec!["date"];
    wanted.extend_from_slice(columns);
    let idx = column_indices(&headers, &wanted)?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| MarketError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |i: usize| record.get(idx[i]).unwrap_or("");
        let date: NaiveDate = field(0).parse().map_err(|_| MarketError::ParseError {
            line,
            message: format!("bad date {:?}", field(0)),
        })?;
        let values = (1..idx.len())
            .map(|i| {
                field(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    MarketError::ParseError {
                        line,
                        message: format!("bad {} value {:?}", wanted[i], field(i)),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, date, values));
    }
    Ok(rows)
}

/// Sort by date, warning when the input was out of order; reject duplicates.
fn sort_checked<T>(rows: &mut [T], date: impl Fn(&T) -> NaiveDate, what: &str, diag: &mut Diagnostics) -> Result<(), MarketError> {
    if rows.windows(2).any(|w| date(&w[0]) > date(&w[1])) {
        diag.warn(format!("{what}: rows were out of date order and have been sorted"));
        rows.sort_by_key(&date);
    }
    if let Some(w) = rows.windows(2).find(|w| date(&w[0]) == date(&w[1])) {
        return Err(MarketError::DuplicateDate(date(&w[0])));
    }
    Ok(())
}

pub fn parse_market_csv(text: &str, ticker: &str, diag: &mut Diagnostics) -> Result<MarketSeries, MarketError> {
    let mut rows = Vec::new();
    for (line, date, v) in parse_dated_rows(text, &["open", "close"])? {
        if v[0] <= 0.0 || v[1] <= 0.0 {
            return Err(MarketError::InvalidPrice { line, date });
        }
        rows.push(PriceRow {
            date,
            open: v[0],
            close: v[1],
        });
    }
    sort_checked(&mut rows, |r| r.date, ticker, diag)?;
    Ok(MarketSeries {
        ticker: ticker.to_string(),
        rows,
    })
}

/// Load a `date,open,close` CSV. The ticker is the file stem.
pub fn load_market_csv(path: &Path, diag: &mut Diagnostics) -> Result<MarketSeries, MarketError> {
    let ticker = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    parse_market_csv(&read_file(path)?, &ticker, diag)
}

pub fn parse_controls_csv(text: &str, diag: &mut Diagnostics) -> Result<ControlSeries, MarketError> {
    let mut rows: Vec<ControlRow> = parse_dated_rows(text, &["ffr_shock", "fg_shock", "ap_shock", "shadow_rate"])?
        .into_iter()
        .map(|(_, date, v)| ControlRow {
            date,
            controls: ControlVector {
                ffr_shock: v[0],
                fg_shock: v[1],
                ap_shock: v[2],
                shadow_rate: v[3],
            },
        })
        .collect();
    sort_checked(&mut rows, |r| r.date, "controls", diag)?;
    Ok(ControlSeries { rows })
}

pub fn load_controls_csv(path: &Path, diag: &mut Diagnostics) -> Result<ControlSeries, MarketError> {
    parse_controls_csv(&read_file(path)?, diag)
}

/// First series row dated on or after `event_date`.
pub fn anchor_event(series: &MarketSeries, event_date: NaiveDate, diag: &mut Diagnostics) -> Result<Anchor, MarketError> {
    if series.rows.is_empty() {
        return Err(MarketError::EmptySeries);
    }
    let row = series.rows.partition_point(|r| r.date < event_date);
    let anchor = series.rows.get(row).ok_or(MarketError::NoAnchor(event_date))?;
    if anchor.date != event_date {
        diag.warn(format!(
            "{}: event on {event_date} is not a trading day; anchored to {}",
            series.ticker, anchor.date
        ));
        diag.count("anchor_shifted", 1);
    }
    Ok(Anchor { date: anchor.date, row })
}

/// `ln(close[i + h]) - ln(open[i])` with `i` the row of `anchor_date`.
pub fn compute_outcome(series: &MarketSeries, anchor_date: NaiveDate, h: usize) -> Result<f64, MarketError> {
    let i = series
        .rows
        .binary_search_by_key(&anchor_date, |r| r.date)
        .map_err(|_| MarketError::UnknownAnchor(anchor_date))?;
    let end = series.rows.get(i + h).ok_or(MarketError::InsufficientHorizon {
        anchor: anchor_date,
        horizon: h,
    })?;
    Ok(end.close.ln() - series.rows[i].open.ln())
}

/// Outcomes for `h = 0..=max_horizon` per event, truncated where data ends.
/// Events that cannot be anchored are dropped and counted.
pub fn build_outcome_panel(
    series: &MarketSeries,
    events: &[EventRef],
    max_horizon: usize,
    diag: &mut Diagnostics,
) -> OutcomePanel {
    let mut rows = Vec::new();
    for event in events {
        let anchor = match anchor_event(series, event.event_date, diag) {
            Ok(a) => a,
            Err(e) => {
                diag.warn(format!("event {}: {e}; dropped from outcome panel", event.event_id));
                diag.count("events_without_anchor", 1);
                continue;
            }
        };
        let available = (series.rows.len() - 1 - anchor.row).min(max_horizon);
        if available < max_horizon {
            diag.warn(format!(
                "event {}: horizons truncated at {available} of {max_horizon} by end of data",
                event.event_id
            ));
            diag.count("events_truncated", 1);
        }
        let open = series.rows[anchor.row].open.ln();
        for h in 0..=available {
            rows.push(OutcomeRow {
                event_id: event.event_id.clone(),
                event_date: event.event_date,
                anchor_date: anchor.date,
                horizon: h,
                outcome: series.rows[anchor.row + h].close.ln() - open,
            });
        }
    }
    OutcomePanel {
        ticker: series.ticker.clone(),
        rows,
    }
}

/// Match each event to the first control row dated on or after it, within
/// [`CONTROL_STALENESS_DAYS`]. Unmatched events are dropped and counted.
pub fn join_controls(
    events: &[EventRef],
    controls: &ControlSeries,
    diag: &mut Diagnostics,
) -> BTreeMap<String, ControlVector> {
    let mut out = BTreeMap::new();
    for event in events {
        let pos = controls.rows.partition_point(|r| r.date < event.event_date);
        match controls.rows.get(pos) {
            Some(row) if (row.date - event.event_date).num_days() <= CONTROL_STALENESS_DAYS => {
                if row.date != event.event_date {
                    diag.warn(format!(
                        "event {}: controls forward-matched from {} to {}",
                        event.event_id, event.event_date, row.date
                    ));
                    diag.count("controls_forward_matched", 1);
                }
                out.insert(event.event_id.clone(), row.controls);
            }
            _ => {
                diag.warn(format!(
                    "event {}: no control row within {CONTROL_STALENESS_DAYS} days of {}; dropped",
                    event.event_id, event.event_date
                ));
                diag.count("events_without_controls", 1);
            }
        }
    }
    out
}

pub const OUTCOME_CSV_HEADER: &str = "event_id,event_date,anchor_date,horizon,outcome";

pub fn write_outcome_csv(panel: &OutcomePanel) -> String {
    let mut out = String::from(OUTCOME_CSV_HEADER);
    out.push('\n');
    for r in &panel.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::indicator::csv_field(&r.event_id),
            r.event_date,
            r.anchor_date,
            r.horizon,
            r.outcome
        ));
    }
    out
}

pub fn read_outcome_csv(text: &str, ticker: &str) -> Result<OutcomePanel, MarketError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.deserialize::<OutcomeRow>() {
        let row = record.map_err(|e| MarketError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(OutcomePanel {
        ticker: ticker.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn series(rows: &[(&str, f64, f64)]) -> MarketSeries {
        MarketSeries {
            ticker: "SPY".into(),
            rows: rows
                .iter()
                .map(|&(date, open, close)| PriceRow {
                    date: d(date),
                    open,
                    close,
                })
                .collect(),
        }
    }

    #[test]
    fn loads_valid_rows_and_ignores_extra_columns() {
        let mut diag = Diagnostics::new();
        let s = parse_market_csv("date,open,high,low,close\n2020-01-02,100,101,99,100.5\n2020-01-03,100.5,102,100,101\n", "SPY", &mut diag).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[1].close, 101.0);
        assert!(diag.is_empty());
    }

    #[test]
    fn rejects_bad_rows() {
        let mut diag = Diagnostics::new();
        assert!(matches!(
            parse_market_csv("date,open,close\n2020-01-02,0,1\n", "SPY", &mut diag),
            Err(MarketError::InvalidPrice { line: 2, .. })
        ));
        assert!(matches!(
            parse_market_csv("date,open,close\n2020-01-02,1,1\n2020-01-02,1,1\n", "SPY", &mut diag),
            Err(MarketError::DuplicateDate(_))
        ));
        assert!(matches!(
            parse_market_csv("date,open,close\n2020-01-02,1,abc\n", "SPY", &mut diag),
            Err(MarketError::ParseError { line: 2, .. })
        ));
        assert!(matches!(
            parse_market_csv("date,close\n2020-01-02,1\n", "SPY", &mut diag),
            Err(MarketError::MissingColumn(_))
        ));
    }

    #[test]
    fn out_of_order_rows_are_sorted_with_warning() {
        let mut diag = Diagnostics::new();
        let s = parse_market_csv("date,open,close\n2020-01-03,1,1\n2020-01-02,2,2\n", "SPY", &mut diag).unwrap();
        assert_eq!(s.rows[0].date, d("2020-01-02"));
        assert_eq!(diag.warnings.len(), 1);
    }

    #[test]
    fn partial_control_rows_are_rejected() {
        let mut diag = Diagnostics::new();
        let text = "date,ffr_shock,fg_shock,ap_shock,shadow_rate\n2020-01-02,0.1,0.2,,1.5\n";
        assert!(matches!(parse_controls_csv(text, &mut diag), Err(MarketError::ParseError { line: 2, .. })));
    }

    #[test]
    fn anchoring() {
        // 2021-01-08 is a Friday, 2021-01-11 a Monday
        let s = series(&[("2021-01-07", 1.0, 1.0), ("2021-01-08", 1.0, 1.0), ("2021-01-11", 1.0, 1.0)]);
        let mut diag = Diagnostics::new();
        assert_eq!(anchor_event(&s, d("2021-01-08"), &mut diag).unwrap().date, d("2021-01-08"));
        assert!(diag.warnings.is_empty());
        let a = anchor_event(&s, d("2021-01-09"), &mut diag).unwrap();
        assert_eq!((a.date, a.row), (d("2021-01-11"), 2));
        assert_eq!(diag.warnings.len(), 1);
        assert!(matches!(anchor_event(&s, d("2021-01-12"), &mut diag), Err(MarketError::NoAnchor(_))));
    }

    #[test]
    fn outcome_examples() {
        let s = series(&[("2021-01-07", 100.0, 102.0), ("2021-01-08", 103.0, 105.0)]);
        let y = compute_outcome(&s, d("2021-01-07"), 1).unwrap();
        assert!((y - 1.05f64.ln()).abs() < 1e-15);
        assert!((y - 0.0487902).abs() < 1e-7);
        let flat = series(&[("2021-01-07", 400.0, 400.0)]);
        assert_eq!(compute_outcome(&flat, d("2021-01-07"), 0).unwrap(), 0.0);
        assert!(matches!(
            compute_outcome(&s, d("2021-01-08"), 1),
            Err(MarketError::InsufficientHorizon { horizon: 1, .. })
        ));
    }

    fn trading_days(n: usize) -> MarketSeries {
        let start = d("2020-01-01");
        MarketSeries {
            ticker: "SPY".into(),
            rows: (0..n)
                .map(|i| PriceRow {
                    date: start + chrono::Days::new(i as u64),
                    open: 100.0 + i as f64,
                    close: 100.5 + i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn panel_full_and_truncated() {
        let s = trading_days(40);
        let events = vec![
            EventRef { event_id: "A".into(), event_date: d("2020-01-01") },
            EventRef { event_id: "B".into(), event_date: s.rows[34].date },
            EventRef { event_id: "C".into(), event_date: d("2021-01-01") },
        ];
        let mut diag = Diagnostics::new();
        let panel = build_outcome_panel(&s, &events, 15, &mut diag);
        assert_eq!(panel.rows.iter().filter(|r| r.event_id == "A").count(), 16);
        let b: Vec<_> = panel.rows.iter().filter(|r| r.event_id == "B").map(|r| r.horizon).collect();
        assert_eq!(b, (0..=5).collect::<Vec<_>>());
        assert_eq!(diag.get("events_truncated"), 1);
        assert_eq!(diag.get("events_without_anchor"), 1);
        assert!(build_outcome_panel(&s, &[], 15, &mut diag).rows.is_empty());
    }

    #[test]
    fn control_join_rules() {
        let cv = |x: f64| ControlVector { ffr_shock: x, fg_shock: 0.0, ap_shock: 0.0, shadow_rate: 0.0 };
        let controls = ControlSeries {
            rows: vec![
                ControlRow { date: d("2020-03-03"), controls: cv(1.0) },
                ControlRow { date: d("2020-03-20"), controls: cv(2.0) },
            ],
        };
        let events = vec![
            EventRef { event_id: "exact".into(), event_date: d("2020-03-03") },
            EventRef { event_id: "forward".into(), event_date: d("2020-03-13") },
            EventRef { event_id: "stale".into(), event_date: d("2020-03-04") },
        ];
        let mut diag = Diagnostics::new();
        let joined = join_controls(&events, &controls, &mut diag);
        assert_eq!(joined["exact"].ffr_shock, 1.0);
        assert_eq!(joined["forward"].ffr_shock, 2.0);
        assert!(!joined.contains_key("stale"));
        assert_eq!(diag.get("controls_forward_matched"), 1);
        assert_eq!(diag.get("events_without_controls"), 1);
    }

    #[test]
    fn outcome_csv_round_trip() {
        let s = trading_days(20);
        let events = vec![EventRef { event_id: "A".into(), event_date: d("2020-01-03") }];
        let panel = build_outcome_panel(&s, &events, 15, &mut Diagnostics::new());
        assert_eq!(read_outcome_csv(&write_outcome_csv(&panel), "SPY").unwrap(), panel);
    }

    proptest! {
        #[test]
        fn scaling_and_telescoping(
            prices in proptest::collection::vec((1.0f64..500.0, 1.0f64..500.0), 2..30),
            scale in 0.01f64..100.0,
        ) {
            let start = d("2020-01-01");
            let make = |c: f64| MarketSeries {
                ticker: "X".into(),
                rows: prices.iter().enumerate().map(|(i, &(o, cl))| PriceRow {
                    date: start + chrono::Days::new(i as u64),
                    open: o * c,
                    close: cl * c,
                }).collect(),
            };
            let base = make(1.0);
            let scaled = make(scale);
            for h in 0..prices.len() {
                let a = compute_outcome(&base, start, h).unwrap();
                let b = compute_outcome(&scaled, start, h).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
                if h > 0 {
                    let prev = compute_outcome(&base, start, h - 1).unwrap();
                    let step = (base.rows[h].close / base.rows[h - 1].close).ln();
                    prop_assert!((a - (prev + step)).abs() < 1e-12);
                }
            }
        }
    }
}
