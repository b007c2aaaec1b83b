//! Per-event stance and voice-tone indicators.
//!
//! The sentiment score is `(dovish - hawkish) / (dovish + hawkish)` and the
//! voice-tone score is `(positive - negative) / (positive + negative)`.
//! Neutral units enter neither numerator nor denominator. Scores are formed
//! as exact rationals and only converted to `f64` on output.

use crate::corpus::{Scenario, Section};
use crate::stance::{LabeledEvent, LabeledSentence, StanceLabel, ToneLabel};
use chrono::NaiveDate;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("event {0} has no sentences to aggregate")]
    EmptyEvent(String),
    #[error("no events left after filtering")]
    EmptySeries,
    #[error("indicator csv line {line}: {message}")]
    ParseError { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Counts over sentences.
    Fine,
    /// Counts over speaker turns, each turn carrying its majority label.
    Coarse,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Fine => "fine",
            Granularity::Coarse => "coarse",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw {
            "fine" => Some(Granularity::Fine),
            "coarse" => Some(Granularity::Coarse),
            _ => None,
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Sentiment,
    VoiceTone,
}

impl IndicatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndicatorKind::Sentiment => "sentiment",
            IndicatorKind::VoiceTone => "voice_tone",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw {
            "sentiment" => Some(IndicatorKind::Sentiment),
            "voice_tone" => Some(IndicatorKind::VoiceTone),
            _ => None,
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What to do when both polar counts are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPolicy {
    #[default]
    Missing,
    ZeroFill,
}

/// Counts of the two poles and the neutral middle of a three-way label
/// scheme. For [`IndicatorKind::Sentiment`] the poles are dovish/hawkish,
/// for [`IndicatorKind::VoiceTone`] they are positive/negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelCounts {
    pub dovish: u64,
    pub hawkish: u64,
    pub neutral: u64,
}

impl LabelCounts {
    pub fn new(dovish: u64, hawkish: u64, neutral: u64) -> Self {
        Self {
            dovish,
            hawkish,
            neutral,
        }
    }

    /// Voice-tone counts share the layout: positive, negative, neutral.
    pub fn tone(positive: u64, negative: u64, neutral: u64) -> Self {
        Self::new(positive, negative, neutral)
    }

    pub fn total(&self) -> u64 {
        self.dovish + self.hawkish + self.neutral
    }

    fn add_stance(&mut self, label: StanceLabel) {
        match label {
            StanceLabel::Dovish => self.dovish += 1,
            StanceLabel::Hawkish => self.hawkish += 1,
            StanceLabel::Neutral => self.neutral += 1,
        }
    }

    /// Exact polarity ratio, `None` when both poles are empty.
    pub fn ratio(&self) -> Option<Ratio<i128>> {
        let up = i128::from(self.dovish);
        let down = i128::from(self.hawkish);
        if up + down == 0 {
            None
        } else {
            Some(Ratio::new(up - down, up + down))
        }
    }
}

fn score(counts: &LabelCounts, policy: ZeroPolicy) -> Option<f64> {
    match (counts.ratio(), policy) {
        (Some(r), _) => Some(r.to_f64().expect("ratio in [-1, 1] converts")),
        (None, ZeroPolicy::ZeroFill) => Some(0.0),
        (None, ZeroPolicy::Missing) => None,
    }
}

/// `(dovish - hawkish) / (dovish + hawkish)`; `None` means Missing.
pub fn sentiment_score(counts: &LabelCounts, policy: ZeroPolicy) -> Option<f64> {
    score(counts, policy)
}

/// `(positive - negative) / (positive + negative)` over tone counts built
/// with [`LabelCounts::tone`].
pub fn voice_tone_score(counts: &LabelCounts, policy: ZeroPolicy) -> Option<f64> {
    score(counts, policy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorPoint {
    pub event_id: String,
    pub event_date: NaiveDate,
    pub scenario: Scenario,
    pub granularity: Granularity,
    pub kind: IndicatorKind,
    pub score: Option<f64>,
    pub counts: LabelCounts,
}

/// Map a sentence onto the stance scale used for counting. Tone labels are
/// projected so that positive counts land in the first slot.
fn unit_label(s: &LabeledSentence, kind: IndicatorKind) -> Option<StanceLabel> {
    match kind {
        IndicatorKind::Sentiment => Some(s.stance),
        IndicatorKind::VoiceTone => s.tone.map(|t| match t {
            ToneLabel::Positive => StanceLabel::Dovish,
            ToneLabel::Negative => StanceLabel::Hawkish,
            ToneLabel::Neutral => StanceLabel::Neutral,
        }),
    }
}

/// Plurality label of a turn; a tie for the top count is Neutral.
pub fn turn_majority<I: IntoIterator<Item = StanceLabel>>(labels: I) -> Option<StanceLabel> {
    let mut counts = LabelCounts::default();
    for l in labels {
        counts.add_stance(l);
    }
    if counts.total() == 0 {
        return None;
    }
    let LabelCounts {
        dovish: d,
        hawkish: h,
        neutral: n,
    } = counts;
    Some(if d > h && d > n {
        StanceLabel::Dovish
    } else if h > d && h > n {
        StanceLabel::Hawkish
    } else {
        StanceLabel::Neutral
    })
}

/// Counts for one event at the given granularity.
pub fn event_counts(event: &LabeledEvent, granularity: Granularity, kind: IndicatorKind) -> LabelCounts {
    let mut counts = LabelCounts::default();
    match granularity {
        Granularity::Fine => {
            for s in &event.sentences {
                if let Some(l) = unit_label(s, kind) {
                    counts.add_stance(l);
                }
            }
        }
        Granularity::Coarse => {
            let mut turns: BTreeMap<usize, Vec<StanceLabel>> = BTreeMap::new();
            for s in &event.sentences {
                if let Some(l) = unit_label(s, kind) {
                    turns.entry(s.sentence.turn_index).or_default().push(l);
                }
            }
            for labels in turns.into_values() {
                if let Some(l) = turn_majority(labels) {
                    counts.add_stance(l);
                }
            }
        }
    }
    counts
}

pub fn aggregate_event(
    event: &LabeledEvent,
    granularity: Granularity,
    kind: IndicatorKind,
    policy: ZeroPolicy,
) -> Result<IndicatorPoint, IndicatorError> {
    if event.sentences.is_empty() {
        return Err(IndicatorError::EmptyEvent(event.event_id.clone()));
    }
    let counts = event_counts(event, granularity, kind);
    Ok(IndicatorPoint {
        event_id: event.event_id.clone(),
        event_date: event.event_date,
        scenario: event.scenario,
        granularity,
        kind,
        score: score(&counts, policy),
        counts,
    })
}

/// One point per event passing the scenario filter, sorted by `(date, event_id)`.
pub fn indicator_series(
    events: &[LabeledEvent],
    granularity: Granularity,
    kind: IndicatorKind,
    scenario: Option<Scenario>,
    policy: ZeroPolicy,
) -> Result<Vec<IndicatorPoint>, IndicatorError> {
    let mut points = events
        .iter()
        .filter(|e| scenario.is_none_or(|s| e.scenario == s))
        .map(|e| aggregate_event(e, granularity, kind, policy))
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        return Err(IndicatorError::EmptySeries);
    }
    points.sort_by(|a, b| (a.event_date, &a.event_id).cmp(&(b.event_date, &b.event_id)));
    Ok(points)
}

/// Which sections feed the indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectionFilter {
    #[default]
    All,
    Only(Section),
}

impl SectionFilter {
    pub fn parse(raw: &str) -> Option<Self> {
        if raw == "all" {
            Some(SectionFilter::All)
        } else {
            Section::parse(raw).map(SectionFilter::Only)
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SectionFilter::All => "all",
            SectionFilter::Only(s) => s.as_str(),
        }
    }
}

/// Keep only sentences from the selected sections whose speaker contains
/// `speaker` (case-insensitive). Events may come back empty.
pub fn filter_event(event: &LabeledEvent, section: SectionFilter, speaker: Option<&str>) -> LabeledEvent {
    let speaker = speaker.map(str::to_lowercase);
    let sentences = event
        .sentences
        .iter()
        .filter(|s| match section {
            SectionFilter::All => true,
            SectionFilter::Only(sec) => s.sentence.section == sec,
        })
        .filter(|s| {
            speaker
                .as_deref()
                .is_none_or(|needle| s.sentence.speaker.to_lowercase().contains(needle))
        })
        .cloned()
        .collect();
    LabeledEvent {
        sentences,
        ..event.clone()
    }
}

pub const INDICATOR_CSV_HEADER: &str = "event_id,date,scenario,granularity,kind,dovish,hawkish,neutral,score";

/// Indicator CSV. For voice tone the three count columns hold positive,
/// negative and neutral counts. Missing scores are empty strings.
pub fn write_indicator_csv(points: &[IndicatorPoint]) -> String {
    let mut out = String::from(INDICATOR_CSV_HEADER);
    out.push('\n');
    for p in points {
        let score = p.score.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&p.event_id),
            p.event_date,
            p.scenario,
            p.granularity,
            p.kind,
            p.counts.dovish,
            p.counts.hawkish,
            p.counts.neutral,
            score
        ));
    }
    out
}

pub(crate) fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

pub fn read_indicator_csv(text: &str) -> Result<Vec<IndicatorPoint>, IndicatorError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IndicatorError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| IndicatorError::ParseError { line, message };
        if record.len() != 9 {
            return Err(bad(format!("expected 9 fields, got {}", record.len())));
        }
        let count = |i: usize| -> Result<u64, IndicatorError> {
            record[i].parse().map_err(|_| bad(format!("bad count {:?}", &record[i])))
        };
        points.push(IndicatorPoint {
            event_id: record[0].to_string(),
            event_date: record[1].parse().map_err(|_| bad(format!("bad date {:?}", &record[1])))?,
            scenario: Scenario::parse(&record[2]).ok_or_else(|| bad(format!("bad scenario {:?}", &record[2])))?,
            granularity: Granularity::parse(&record[3])
                .ok_or_else(|| bad(format!("bad granularity {:?}", &record[3])))?,
            kind: IndicatorKind::parse(&record[4]).ok_or_else(|| bad(format!("bad kind {:?}", &record[4])))?,
            counts: LabelCounts::new(count(5)?, count(6)?, count(7)?),
            score: if record[8].is_empty() {
                None
            } else {
                Some(record[8].parse().map_err(|_| bad(format!("bad score {:?}", &record[8])))?)
            },
        });
    }
    Ok(points)
}
