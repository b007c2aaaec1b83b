//! Synthetic inputs with a planted response, for fixtures and recovery
//! tests.
//!
//! [`generate`] builds a full input set: transcripts, a label file, a daily
//! price series and a control series. Each event's outcome at horizon `h`
//! is planted as
//!
//! ```text
//! ln(close[a + h]) - ln(open[a]) = intercept + response[h] * s + controls . coefs + noise
//! ```
//!
//! where `a` is the event's row and `s` its sentence-level sentiment. Event
//! windows never overlap, so every planted outcome is read back exactly.

use crate::corpus::{Scenario, Section};
use crate::lp::{RegressionDataset, RegressionRow};
use crate::market::ControlVector;
use crate::stance::{LabelRecord, StanceLabel, ToneLabel};
use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

const DOVISH_SENTENCES: &[&str] = &[
    "Policy will remain accommodative for some time.",
    "We see downside risks to the outlook.",
    "The Committee is prepared to cut rates if needed.",
    "Asset purchases will continue at the current pace.",
    "We will be patient as the labor market heals.",
];

const HAWKISH_SENTENCES: &[&str] = &[
    "We are prepared to raise rates at coming meetings.",
    "Inflation pressures have broadened across sectors.",
    "The Committee expects further increases in the target range.",
    "We will begin tapering our purchases soon.",
    "Policy will need to become restrictive.",
];

const NEUTRAL_SENTENCES: &[&str] = &[
    "The Committee met on schedule this week.",
    "Household spending grew 2.5 percent last quarter.",
    "Mr. Jones asked about the participation rate.",
    "Our decisions will depend on incoming data.",
    "The U.S. economy has many moving parts.",
    "Thank you for the question.",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub events: usize,
    pub max_horizon: usize,
    /// Planted indicator coefficient per horizon, `max_horizon + 1` entries.
    pub response: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
    pub turns_per_section: usize,
    pub sentences_per_turn: usize,
    /// Give every sentence of a turn the same label.
    pub unanimous_turns: bool,
    pub intercept: f64,
    pub control_coefs: [f64; 4],
    pub first_event: NaiveDate,
    /// Trading days between consecutive events; must exceed `max_horizon`.
    pub spacing: usize,
    pub scenario: Scenario,
    pub ticker: String,
}

impl FixtureSpec {
    /// 47 press conferences, horizons 0..=15, noise sd 0.01, with the given
    /// response path.
    pub fn new(response: Vec<f64>, seed: u64) -> Self {
        Self {
            events: 47,
            max_horizon: response.len().saturating_sub(1),
            response,
            noise_sd: 0.01,
            seed,
            turns_per_section: 3,
            sentences_per_turn: 4,
            unanimous_turns: true,
            intercept: 0.001,
            control_coefs: [0.05, 0.02, -0.03, 0.001],
            first_event: NaiveDate::from_ymd_opt(2011, 4, 27).expect("valid date"),
            spacing: 20,
            scenario: Scenario::PressConference,
            ticker: "SPY".to_string(),
        }
    }

    /// 0.05 at `horizon`, zero at every other horizon up to `max_horizon`.
    pub fn spike(horizon: usize, max_horizon: usize, size: f64, seed: u64) -> Self {
        let mut response = vec![0.0; max_horizon + 1];
        response[horizon] = size;
        Self::new(response, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    pub file: String,
    pub event_id: String,
    pub date: NaiveDate,
    pub scenario: Scenario,
    pub section: Section,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub documents: Vec<SyntheticDocument>,
    pub labels_jsonl: String,
    pub market_csv: String,
    pub controls_csv: String,
    /// Sentence-level sentiment of each event, from the generated labels.
    pub sentiments: BTreeMap<String, f64>,
    pub ticker: String,
}

fn next_business_day(mut d: NaiveDate) -> NaiveDate {
    loop {
        d = d + Days::new(1);
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            return d;
        }
    }
}

fn draw_label(rng: &mut ChaCha8Rng, p_dovish: f64, force_polar: bool) -> StanceLabel {
    if !force_polar && rng.random_bool(0.35) {
        StanceLabel::Neutral
    } else if rng.random_bool(p_dovish) {
        StanceLabel::Dovish
    } else {
        StanceLabel::Hawkish
    }
}

fn sentence_for(rng: &mut ChaCha8Rng, label: StanceLabel) -> &'static str {
    let pool = match label {
        StanceLabel::Dovish => DOVISH_SENTENCES,
        StanceLabel::Hawkish => HAWKISH_SENTENCES,
        StanceLabel::Neutral => NEUTRAL_SENTENCES,
    };
    pool[rng.random_range(0..pool.len())]
}

pub fn generate(spec: &FixtureSpec) -> Fixture {
    assert!(spec.spacing > spec.max_horizon, "event windows would overlap");
    assert_eq!(spec.response.len(), spec.max_horizon + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).expect("valid noise sd");
    let unit = Normal::new(0.0, 1.0).expect("valid normal");

    // trading calendar: a few lead-in rows, then one window per event
    let lead = 5;
    let total_rows = lead + spec.events * spec.spacing + 5;
    let mut dates = Vec::with_capacity(total_rows);
    let mut d = spec.first_event;
    for _ in 0..lead {
        d = d - Days::new(1);
        while matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            d = d - Days::new(1);
        }
    }
    if matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
        d = next_business_day(d);
    }
    for _ in 0..total_rows {
        dates.push(d);
        d = next_business_day(d);
    }

    let mut documents = Vec::new();
    let mut records = Vec::new();
    let mut sentiments = BTreeMap::new();
    let mut controls = Vec::new();
    let mut planted: Vec<(usize, Vec<f64>)> = Vec::new();

    for e in 0..spec.events {
        let anchor = lead + e * spec.spacing;
        let date = dates[anchor];
        let event_id = format!("pc-{date}");
        let p_dovish: f64 = rng.random_range(0.1..0.9);

        let mut sentence_index = 0u64;
        let (mut dovish, mut hawkish) = (0i64, 0i64);
        for section in [Section::OpeningRemarks, Section::QandA] {
            let mut text = String::new();
            for t in 0..spec.turns_per_section {
                let speaker = match (section, t % 2) {
                    (Section::QandA, 0) => "REPORTER",
                    _ => "CHAIR POWELL",
                };
                let force = sentence_index == 0;
                let turn_label = draw_label(&mut rng, p_dovish, force);
                let _ = write!(text, "{speaker}:");
                for s in 0..spec.sentences_per_turn {
                    let label = if spec.unanimous_turns {
                        turn_label
                    } else {
                        draw_label(&mut rng, p_dovish, force && s == 0)
                    };
                    match label {
                        StanceLabel::Dovish => dovish += 1,
                        StanceLabel::Hawkish => hawkish += 1,
                        StanceLabel::Neutral => {}
                    }
                    let tone = match rng.random_range(0..10) {
                        0..=2 => None,
                        3..=5 => Some(ToneLabel::Positive),
                        6..=7 => Some(ToneLabel::Negative),
                        _ => Some(ToneLabel::Neutral),
                    };
                    // alternate same-line and continuation-line layout
                    let sep = if s % 2 == 0 { " " } else { "\n" };
                    let _ = write!(text, "{sep}{}", sentence_for(&mut rng, label));
                    records.push(LabelRecord {
                        event_id: event_id.clone(),
                        sentence_index,
                        stance: label,
                        tone,
                    });
                    sentence_index += 1;
                }
                text.push_str("\n\n");
            }
            documents.push(SyntheticDocument {
                file: format!("transcripts/{event_id}_{section}.txt"),
                event_id: event_id.clone(),
                date,
                scenario: spec.scenario,
                section,
                text,
            });
        }
        let sentiment = (dovish - hawkish) as f64 / (dovish + hawkish) as f64;
        sentiments.insert(event_id.clone(), sentiment);

        let cv = ControlVector {
            ffr_shock: 0.03 * unit.sample(&mut rng),
            fg_shock: 0.05 * unit.sample(&mut rng),
            ap_shock: 0.03 * unit.sample(&mut rng),
            shadow_rate: 0.5 + 1.5 * unit.sample(&mut rng),
        };
        let control_effect: f64 = cv.as_array().iter().zip(&spec.control_coefs).map(|(x, c)| x * c).sum();
        let outcomes = (0..=spec.max_horizon)
            .map(|h| spec.intercept + spec.response[h] * sentiment + control_effect + noise.sample(&mut rng))
            .collect();
        controls.push((date, cv));
        planted.push((anchor, outcomes));
    }

    // price path: a quiet random walk, overwritten inside event windows
    let mut opens = vec![0.0; total_rows];
    let mut closes = vec![0.0; total_rows];
    let mut level = 130.0;
    let mut windows = planted.iter().peekable();
    let mut row = 0;
    while row < total_rows {
        if let Some((anchor, outcomes)) = windows.next_if(|(a, _)| *a == row) {
            let open = level * (0.002 * unit.sample(&mut rng)).exp();
            opens[*anchor] = open;
            for (h, y) in outcomes.iter().enumerate() {
                if h > 0 {
                    opens[anchor + h] = closes[anchor + h - 1];
                }
                closes[anchor + h] = open * y.exp();
            }
            row = anchor + outcomes.len();
            level = closes[row - 1];
            continue;
        }
        opens[row] = level * (0.002 * unit.sample(&mut rng)).exp();
        closes[row] = opens[row] * (0.005 * unit.sample(&mut rng)).exp();
        level = closes[row];
        row += 1;
    }

    let mut market_csv = String::from("date,open,high,low,close\n");
    for i in 0..total_rows {
        let (o, c) = (opens[i], closes[i]);
        let _ = writeln!(market_csv, "{},{o},{},{},{c}", dates[i], o.max(c) * 1.001, o.min(c) * 0.999);
    }
    let mut controls_csv = String::from("date,ffr_shock,fg_shock,ap_shock,shadow_rate\n");
    for (date, cv) in &controls {
        let _ = writeln!(
            controls_csv,
            "{date},{},{},{},{}",
            cv.ffr_shock, cv.fg_shock, cv.ap_shock, cv.shadow_rate
        );
    }
    records.sort_by(|a, b| (&a.event_id, a.sentence_index).cmp(&(&b.event_id, b.sentence_index)));
    let mut labels_jsonl = String::new();
    for r in &records {
        labels_jsonl.push_str(&serde_json::to_string(r).expect("record serializes"));
        labels_jsonl.push('\n');
    }

    Fixture {
        documents,
        labels_jsonl,
        market_csv,
        controls_csv,
        sentiments,
        ticker: spec.ticker.clone(),
    }
}

/// Write the fixture and a run config (`config.json`) into `dir`.
pub fn write_fixture(dir: &Path, fixture: &Fixture, seed: u64, reps: usize) -> std::io::Result<()> {
    std::fs::create_dir_all(dir.join("transcripts"))?;
    let mut manifest = serde_json::Map::new();
    for doc in &fixture.documents {
        std::fs::write(dir.join(&doc.file), &doc.text)?;
        manifest.insert(
            doc.file.clone(),
            json!({
                "event_id": doc.event_id,
                "date": doc.date.to_string(),
                "scenario": doc.scenario.as_str(),
                "section": doc.section.as_str(),
            }),
        );
    }
    let pretty = |v: &serde_json::Value| format!("{}\n", serde_json::to_string_pretty(v).expect("json"));
    std::fs::write(dir.join("manifest.json"), pretty(&serde_json::Value::Object(manifest)))?;
    std::fs::write(dir.join("labels.jsonl"), &fixture.labels_jsonl)?;
    std::fs::write(dir.join(format!("{}.csv", fixture.ticker)), &fixture.market_csv)?;
    std::fs::write(dir.join("controls.csv"), &fixture.controls_csv)?;
    let config = json!({
        "manifest": "manifest.json",
        "market_csv": format!("{}.csv", fixture.ticker),
        "controls_csv": "controls.csv",
        "labels": "labels.jsonl",
        "out_dir": "out",
        "kind": "sentiment",
        "granularity": "fine",
        "scenario": "all",
        "section": "all",
        "horizons": 15,
        "reps": reps,
        "alpha": 0.10,
        "zero_fill": false,
        "seed": seed,
    });
    std::fs::write(dir.join("config.json"), pretty(&config))
}

/// A single-horizon regression sample with indicator coefficient `b1`.
/// Sentiment is uniform on [-1, 1]; controls are Gaussian.
pub fn regression_dataset(n: usize, b1: f64, noise_sd: f64, seed: u64) -> RegressionDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, noise_sd.max(0.0)).expect("valid noise sd");
    let coefs = [0.05, 0.02, -0.03, 0.001];
    let rows = (0..n)
        .map(|i| {
            let sentiment: f64 = rng.random_range(-1.0..=1.0);
            let controls = ControlVector {
                ffr_shock: 0.03 * unit.sample(&mut rng),
                fg_shock: 0.05 * unit.sample(&mut rng),
                ap_shock: 0.03 * unit.sample(&mut rng),
                shadow_rate: 0.5 + 1.5 * unit.sample(&mut rng),
            };
            let effect: f64 = controls.as_array().iter().zip(&coefs).map(|(x, c)| x * c).sum();
            RegressionRow {
                event_id: format!("e{i:03}"),
                outcome: 0.001 + b1 * sentiment + effect + noise.sample(&mut rng),
                sentiment,
                controls,
            }
        })
        .collect();
    RegressionDataset { horizon: 0, rows }
}
