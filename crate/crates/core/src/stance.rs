//! Per-sentence stance and tone labels.
//!
//! Labels come either from an external classifier's JSON Lines file or from
//! a small built-in phrase lexicon. The lexicon is a deterministic baseline
//! for end-to-end runs without a model, not a validated instrument.

use crate::corpus::{CorpusEvent, Scenario, Sentence};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StanceError {
    #[error("line {line}: label refers to unknown event {event_id} or sentence {sentence_index}")]
    DanglingLabel {
        line: usize,
        event_id: String,
        sentence_index: u64,
    },
    #[error("line {line}: duplicate label for event {event_id} sentence {sentence_index}")]
    DuplicateLabel {
        line: usize,
        event_id: String,
        sentence_index: u64,
    },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Dovish,
    Hawkish,
    Neutral,
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StanceLabel::Dovish => "dovish",
            StanceLabel::Hawkish => "hawkish",
            StanceLabel::Neutral => "neutral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneLabel {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub sentence: Sentence,
    pub stance: StanceLabel,
    pub tone: Option<ToneLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEvent {
    pub event_id: String,
    pub event_date: NaiveDate,
    pub scenario: Scenario,
    pub sentences: Vec<LabeledSentence>,
    /// Sentences that had no record in the label file and were set to Neutral.
    pub defaulted: usize,
}

/// One record of the label file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub event_id: String,
    pub sentence_index: u64,
    pub stance: StanceLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tone: Option<ToneLabel>,
}

/// Join label records in JSON Lines `text` onto the segmented corpus.
pub fn parse_labels(text: &str, events: &[CorpusEvent]) -> Result<Vec<LabeledEvent>, StanceError> {
    let index: HashMap<&str, usize> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.event_id.as_str(), i))
        .collect();
    let mut assigned: BTreeMap<(usize, usize), (StanceLabel, Option<ToneLabel>)> = BTreeMap::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabelRecord = serde_json::from_str(line).map_err(|e| StanceError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        let dangling = || StanceError::DanglingLabel {
            line: line_no,
            event_id: record.event_id.clone(),
            sentence_index: record.sentence_index,
        };
        let event_pos = *index.get(record.event_id.as_str()).ok_or_else(dangling)?;
        let sentence_pos = events[event_pos]
            .sentences
            .iter()
            .position(|s| s.sentence_index as u64 == record.sentence_index)
            .ok_or_else(dangling)?;
        if assigned
            .insert((event_pos, sentence_pos), (record.stance, record.tone))
            .is_some()
        {
            return Err(StanceError::DuplicateLabel {
                line: line_no,
                event_id: record.event_id,
                sentence_index: record.sentence_index,
            });
        }
    }

    Ok(events
        .iter()
        .enumerate()
        .map(|(event_pos, event)| {
            let mut defaulted = 0;
            let sentences = event
                .sentences
                .iter()
                .enumerate()
                .map(|(sentence_pos, s)| {
                    let (stance, tone) = match assigned.get(&(event_pos, sentence_pos)) {
                        Some(&labels) => labels,
                        None => {
                            defaulted += 1;
                            (StanceLabel::Neutral, None)
                        }
                    };
                    LabeledSentence {
                        sentence: s.clone(),
                        stance,
                        tone,
                    }
                })
                .collect();
            LabeledEvent {
                event_id: event.event_id.clone(),
                event_date: event.event_date,
                scenario: event.scenario,
                sentences,
                defaulted,
            }
        })
        .collect())
}

/// Read a label file and join it onto the corpus.
pub fn load_labels(path: &Path, events: &[CorpusEvent]) -> Result<Vec<LabeledEvent>, StanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| StanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_labels(&text, events)
}

/// Canonical label file: one record per sentence, ordered by
/// `(event_id, sentence_index)`, compact JSON, LF endings.
pub fn write_labels(events: &[LabeledEvent]) -> String {
    let mut records: Vec<LabelRecord> = events
        .iter()
        .flat_map(|e| {
            e.sentences.iter().map(|ls| LabelRecord {
                event_id: e.event_id.clone(),
                sentence_index: ls.sentence.sentence_index as u64,
                stance: ls.stance,
                tone: ls.tone,
            })
        })
        .collect();
    records.sort_by(|a, b| (&a.event_id, a.sentence_index).cmp(&(&b.event_id, b.sentence_index)));
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("label record serializes"));
        out.push('\n');
    }
    out
}

/// Hawkish and dovish phrase lists as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconConfig {
    pub hawkish: Vec<String>,
    pub dovish: Vec<String>,
}

const DEFAULT_HAWKISH: &[&str] = &[
    "raise rates",
    "raising rates",
    "rate hike",
    "rate hikes",
    "rate increases",
    "tighten",
    "tightening",
    "inflation pressures",
    "tapering",
    "taper",
    "restrictive",
    "higher rates",
    "shrink the balance sheet",
    "balance sheet runoff",
    "overheating",
    "elevated inflation",
    "removal of accommodation",
    "firming",
    "further increases",
    "upside risks to inflation",
];

const DEFAULT_DOVISH: &[&str] = &[
    "cut rates",
    "cutting rates",
    "rate cut",
    "rate cuts",
    "accommodative",
    "quantitative easing",
    "lower bound",
    "asset purchases",
    "easing",
    "lower rates",
    "patient",
    "downside risks",
    "slack",
    "stimulus",
    "support the economy",
    "keep rates low",
    "below target",
    "subdued inflation",
    "weak demand",
    "highly supportive",
];

impl Default for LexiconConfig {
    fn default() -> Self {
        Self {
            hawkish: DEFAULT_HAWKISH.iter().map(|s| s.to_string()).collect(),
            dovish: DEFAULT_DOVISH.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Lowercase alphanumeric word tokens; apostrophes stay inside words.
fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Validated lexicon with phrases pre-tokenized for word-boundary matching.
#[derive(Debug, Clone)]
pub struct Lexicon {
    hawkish: Vec<Vec<String>>,
    dovish: Vec<Vec<String>>,
}

impl Lexicon {
    pub fn new(config: &LexiconConfig) -> Result<Self, StanceError> {
        let prepare = |side: &str, phrases: &[String]| -> Result<Vec<Vec<String>>, StanceError> {
            phrases
                .iter()
                .map(|p| {
                    let tokens = tokenize(p);
                    if tokens.is_empty() {
                        Err(StanceError::InvalidLexicon(format!("empty {side} phrase {p:?}")))
                    } else {
                        Ok(tokens)
                    }
                })
                .collect()
        };
        let hawkish = prepare("hawkish", &config.hawkish)?;
        let dovish = prepare("dovish", &config.dovish)?;
        let hawkish_set: BTreeSet<&Vec<String>> = hawkish.iter().collect();
        if let Some(overlap) = dovish.iter().find(|p| hawkish_set.contains(p)) {
            return Err(StanceError::InvalidLexicon(format!(
                "phrase {:?} is both hawkish and dovish",
                overlap.join(" ")
            )));
        }
        Ok(Self { hawkish, dovish })
    }

    pub fn load(path: &Path) -> Result<Self, StanceError> {
        let raw = std::fs::read(path).map_err(|source| StanceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: LexiconConfig = serde_json::from_slice(&raw)
            .map_err(|e| StanceError::InvalidLexicon(format!("{}: {e}", path.display())))?;
        Self::new(&config)
    }

    /// Hawkish and dovish phrase occurrences in `text`.
    pub fn hits(&self, text: &str) -> (usize, usize) {
        let tokens = tokenize(text);
        let count = |phrases: &[Vec<String>]| -> usize {
            phrases
                .iter()
                .map(|p| tokens.windows(p.len()).filter(|w| *w == p.as_slice()).count())
                .sum()
        };
        (count(&self.hawkish), count(&self.dovish))
    }

    /// The same lexicon with its hawkish and dovish sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            hawkish: self.dovish.clone(),
            dovish: self.hawkish.clone(),
        }
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::new(&LexiconConfig::default()).expect("default lexicon is valid")
    }
}

/// More hawkish than dovish hits is Hawkish, the reverse Dovish, ties Neutral.
pub fn classify_lexicon(sentence: &Sentence, lexicon: &Lexicon) -> StanceLabel {
    classify_text(&sentence.text, lexicon)
}

pub fn classify_text(text: &str, lexicon: &Lexicon) -> StanceLabel {
    let (hawkish, dovish) = lexicon.hits(text);
    match hawkish.cmp(&dovish) {
        std::cmp::Ordering::Greater => StanceLabel::Hawkish,
        std::cmp::Ordering::Less => StanceLabel::Dovish,
        std::cmp::Ordering::Equal => StanceLabel::Neutral,
    }
}

/// Label every sentence of the corpus with the lexicon. No tone labels.
pub fn label_with_lexicon(events: &[CorpusEvent], lexicon: &Lexicon) -> Vec<LabeledEvent> {
    events
        .iter()
        .map(|e| LabeledEvent {
            event_id: e.event_id.clone(),
            event_date: e.event_date,
            scenario: e.scenario,
            sentences: e
                .sentences
                .iter()
                .map(|s| LabeledSentence {
                    stance: classify_lexicon(s, lexicon),
                    sentence: s.clone(),
                    tone: None,
                })
                .collect(),
            defaulted: 0,
        })
        .collect()
}
