//! Transcript parsing and rule-based sentence segmentation.
//!
//! A transcript is plain UTF-8 text. A line that begins with a run of
//! uppercase letters, spaces and periods followed by a colon
//! (`CHAIR POWELL: Good afternoon.`) opens a new speaker turn; any other line
//! continues the current turn. Text without any marker is one anonymous turn.
//!
//! Sentences end at `.`, `!` or `?` followed by whitespace and an uppercase
//! letter, or by the end of the turn. Closing quotes and brackets may sit
//! between the terminator and the whitespace, opening ones between the
//! whitespace and the capital. Decimal numbers never split (no whitespace
//! follows the point) and tokens from the abbreviation list never terminate.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Tokens that never end a sentence, matched case-sensitively including the
/// trailing period.
pub const DEFAULT_ABBREVIATIONS: &[&str] =
    &["Mr.", "Ms.", "Dr.", "U.S.", "vs.", "etc.", "Inc.", "No."];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '\u{201c}', '\u{2018}', '(', '['];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("transcript is not valid UTF-8 (valid up to byte {valid_up_to})")]
    EncodingError { valid_up_to: usize },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("event {event_id} has more than one {section} document")]
    DuplicateDocument { event_id: String, section: Section },
    #[error("event {event_id} has conflicting date or scenario across documents")]
    ConflictingMetadata { event_id: String },
    #[error("malformed sentence record at line {line}: {message}")]
    SentenceRecord { line: usize, message: String },
    #[error("{path}: {source}")]
    InDocument {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PressConference,
    Hearing,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PressConference => "press_conference",
            Scenario::Hearing => "hearing",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw {
            "press_conference" => Some(Scenario::PressConference),
            "hearing" => Some(Scenario::Hearing),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Part of a communication event. The declaration order is the order in
/// which sections of one event are concatenated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Section {
    #[serde(rename = "opening_remarks")]
    OpeningRemarks,
    #[serde(rename = "q_and_a")]
    QandA,
    #[serde(rename = "readout")]
    Readout,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::OpeningRemarks => "opening_remarks",
            Section::QandA => "q_and_a",
            Section::Readout => "readout",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw {
            "opening_remarks" => Some(Section::OpeningRemarks),
            "q_and_a" => Some(Section::QandA),
            "readout" => Some(Section::Readout),
            _ => None,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metadata attached to one transcript file through the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub event_id: String,
    #[serde(rename = "date")]
    pub event_date: NaiveDate,
    pub scenario: Scenario,
    pub section: Section,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    /// Empty for anonymous text.
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptDocument {
    pub event_id: String,
    pub event_date: NaiveDate,
    pub scenario: Scenario,
    pub section: Section,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub event_id: String,
    pub turn_index: usize,
    pub sentence_index: usize,
    pub speaker: String,
    pub section: Section,
    pub text: String,
}

/// All sentences of one event, across its sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEvent {
    pub event_id: String,
    pub event_date: NaiveDate,
    pub scenario: Scenario,
    pub sentences: Vec<Sentence>,
}

/// Returns `(speaker, rest)` when the line opens a new turn.
fn speaker_marker(line: &str) -> Option<(&str, &str)> {
    let line = line.trim_start();
    let colon = line.find(':')?;
    let name = line[..colon].trim_end();
    let mut chars = name.chars();
    let first = chars.next()?;
    if !first.is_uppercase() {
        return None;
    }
    if !name.chars().all(|c| c.is_uppercase() || c == ' ' || c == '.') {
        return None;
    }
    Some((name, &line[colon + 1..]))
}

/// Parse raw transcript bytes into ordered speaker turns.
pub fn parse_transcript(raw: &[u8], meta: DocumentMeta) -> Result<TranscriptDocument, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| CorpusError::EncodingError {
        valid_up_to: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.trim().is_empty() {
        return Err(CorpusError::EmptyTranscript);
    }

    let mut turns: Vec<(String, Vec<&str>)> = Vec::new();
    for line in text.lines() {
        match speaker_marker(line) {
            Some((speaker, rest)) => turns.push((speaker.to_string(), vec![rest])),
            None => match turns.last_mut() {
                Some((_, lines)) => lines.push(line),
                None => turns.push((String::new(), vec![line])),
            },
        }
    }

    let turns = turns
        .into_iter()
        .map(|(speaker, lines)| Turn {
            speaker,
            text: lines.join("\n").trim().to_string(),
        })
        // preface text before the first marker may be blank
        .filter(|t| !(t.speaker.is_empty() && t.text.is_empty()))
        .collect();

    Ok(TranscriptDocument {
        event_id: meta.event_id,
        event_date: meta.event_date,
        scenario: meta.scenario,
        section: meta.section,
        turns,
    })
}

/// Rule-based sentence splitter with a closed abbreviation list.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: BTreeSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Segmenter {
    /// Default list plus `extra`. Entries are matched with their final period.
    pub fn with_extra_abbreviations<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seg = Self::default();
        seg.abbreviations.extend(extra.into_iter().map(Into::into));
        seg
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(String::as_str)
    }

    /// Split text into sentences. Whitespace runs inside a sentence collapse
    /// to one space, so joining the output with single spaces gives back the
    /// whitespace-normalized input.
    pub fn split(&self, text: &str) -> Vec<String> {
        let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
        let chars: Vec<char> = normalized.chars().collect();
        let mut out = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            if !TERMINATORS.contains(&chars[i]) {
                i += 1;
                continue;
            }
            let mut end = i;
            while end < chars.len() && TERMINATORS.contains(&chars[end]) {
                end += 1;
            }
            let mut k = end;
            while k < chars.len() && CLOSERS.contains(&chars[k]) {
                k += 1;
            }
            let boundary = k < chars.len() && chars[k] == ' ' && {
                let mut m = k + 1;
                while m < chars.len() && OPENERS.contains(&chars[m]) {
                    m += 1;
                }
                m < chars.len() && chars[m].is_uppercase()
            };
            if boundary && !self.is_abbreviation(&chars[start..end]) {
                push_sentence(&mut out, &chars[start..k]);
                start = k + 1;
            }
            i = k.max(i + 1);
        }
        if start < chars.len() {
            push_sentence(&mut out, &chars[start..]);
        }
        out
    }

    /// Whether the token ending at the end of `head` is a listed abbreviation.
    fn is_abbreviation(&self, head: &[char]) -> bool {
        let token_start = head.iter().rposition(|&c| c == ' ').map_or(0, |p| p + 1);
        let token: String = head[token_start..]
            .iter()
            .skip_while(|c| OPENERS.contains(c))
            .collect();
        self.abbreviations.contains(&token)
    }

    /// Segment one document. Turn and sentence indices start at zero.
    pub fn segment(&self, doc: &TranscriptDocument) -> Vec<Sentence> {
        let mut sentences = Vec::new();
        self.segment_into(doc, 0, &mut sentences);
        sentences
    }

    fn segment_into(&self, doc: &TranscriptDocument, turn_offset: usize, out: &mut Vec<Sentence>) {
        for (turn_index, turn) in doc.turns.iter().enumerate() {
            for text in self.split(&turn.text) {
                out.push(Sentence {
                    event_id: doc.event_id.clone(),
                    turn_index: turn_offset + turn_index,
                    sentence_index: out.len(),
                    speaker: turn.speaker.clone(),
                    section: doc.section,
                    text,
                });
            }
        }
    }

    /// Segment all documents of one event. Documents are taken in section
    /// order; turn and sentence indices run globally across them.
    pub fn segment_event(&self, docs: &[TranscriptDocument]) -> Result<CorpusEvent, CorpusError> {
        let first = docs.first().ok_or(CorpusError::EmptyTranscript)?;
        let mut ordered: Vec<&TranscriptDocument> = docs.iter().collect();
        ordered.sort_by_key(|d| d.section);
        for pair in ordered.windows(2) {
            if pair[0].section == pair[1].section {
                return Err(CorpusError::DuplicateDocument {
                    event_id: first.event_id.clone(),
                    section: pair[0].section,
                });
            }
        }
        if docs.iter().any(|d| {
            d.event_id != first.event_id
                || d.event_date != first.event_date
                || d.scenario != first.scenario
        }) {
            return Err(CorpusError::ConflictingMetadata {
                event_id: first.event_id.clone(),
            });
        }
        let mut sentences = Vec::new();
        let mut turn_offset = 0;
        for doc in ordered {
            self.segment_into(doc, turn_offset, &mut sentences);
            turn_offset += doc.turns.len();
        }
        Ok(CorpusEvent {
            event_id: first.event_id.clone(),
            event_date: first.event_date,
            scenario: first.scenario,
            sentences,
        })
    }
}

fn push_sentence(out: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Segment a document with the default abbreviation list.
pub fn segment_sentences(doc: &TranscriptDocument) -> Vec<Sentence> {
    Segmenter::default().segment(doc)
}

/// Manifest mapping transcript paths (relative to the manifest's directory)
/// to their metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest {
    pub entries: BTreeMap<String, DocumentMeta>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let raw = std::fs::read(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: Manifest = serde_json::from_slice(&raw).map_err(|e| CorpusError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some((file, _)) = manifest.entries.iter().find(|(_, m)| m.event_id.trim().is_empty()) {
            return Err(CorpusError::Manifest {
                path: path.to_path_buf(),
                message: format!("empty event_id for {file}"),
            });
        }
        Ok(manifest)
    }
}

/// Load every document listed in the manifest and segment it into events
/// sorted by `(date, event_id)`.
pub fn load_corpus(manifest_path: &Path, segmenter: &Segmenter) -> Result<Vec<CorpusEvent>, CorpusError> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut by_event: BTreeMap<String, Vec<TranscriptDocument>> = BTreeMap::new();
    for (file, meta) in &manifest.entries {
        let path = base.join(file);
        let raw = std::fs::read(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let doc = parse_transcript(&raw, meta.clone()).map_err(|e| CorpusError::InDocument {
            path: path.clone(),
            source: Box::new(e),
        })?;
        by_event.entry(meta.event_id.clone()).or_default().push(doc);
    }
    let mut events = by_event
        .values()
        .map(|docs| segmenter.segment_event(docs))
        .collect::<Result<Vec<_>, _>>()?;
    events.sort_by(|a, b| (a.event_date, &a.event_id).cmp(&(b.event_date, &b.event_id)));
    Ok(events)
}

/// One line of the sentence artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SentenceRow {
    event_id: String,
    event_date: NaiveDate,
    scenario: Scenario,
    section: Section,
    turn_index: usize,
    sentence_index: usize,
    speaker: String,
    text: String,
}

/// Serialize events as JSON Lines, one sentence per line.
pub fn write_sentences(events: &[CorpusEvent]) -> String {
    let mut out = String::new();
    for event in events {
        for s in &event.sentences {
            let row = SentenceRow {
                event_id: s.event_id.clone(),
                event_date: event.event_date,
                scenario: event.scenario,
                section: s.section,
                turn_index: s.turn_index,
                sentence_index: s.sentence_index,
                speaker: s.speaker.clone(),
                text: s.text.clone(),
            };
            out.push_str(&serde_json::to_string(&row).expect("sentence row serializes"));
            out.push('\n');
        }
    }
    out
}

/// Inverse of [`write_sentences`]. Events keep their order of first appearance.
pub fn read_sentences(text: &str) -> Result<Vec<CorpusEvent>, CorpusError> {
    let mut events: Vec<CorpusEvent> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: SentenceRow = serde_json::from_str(line).map_err(|e| CorpusError::SentenceRecord {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if events.last().map(|e| e.event_id != row.event_id).unwrap_or(true) {
            events.push(CorpusEvent {
                event_id: row.event_id.clone(),
                event_date: row.event_date,
                scenario: row.scenario,
                sentences: Vec::new(),
            });
        }
        let event = events.last_mut().expect("event pushed above");
        event.sentences.push(Sentence {
            event_id: row.event_id,
            turn_index: row.turn_index,
            sentence_index: row.sentence_index,
            speaker: row.speaker,
            section: row.section,
            text: row.text,
        });
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> DocumentMeta {
        DocumentMeta {
            event_id: "E1".into(),
            event_date: NaiveDate::from_ymd_opt(2020, 3, 3).unwrap(),
            scenario: Scenario::PressConference,
            section: Section::OpeningRemarks,
        }
    }

    fn split(text: &str) -> Vec<String> {
        Segmenter::default().split(text)
    }

    #[test]
    fn single_marker_line() {
        let doc = parse_transcript(b"CHAIR POWELL: Good afternoon.", meta()).unwrap();
        assert_eq!(doc.turns.len(), 1);
        assert_eq!(doc.turns[0].speaker, "CHAIR POWELL");
        assert_eq!(doc.turns[0].text, "Good afternoon.");
    }

    #[test]
    fn no_markers_is_one_anonymous_turn() {
        let doc = parse_transcript(b"First line.\nSecond line.\n\nThird.", meta()).unwrap();
        assert_eq!(doc.turns.len(), 1);
        assert_eq!(doc.turns[0].speaker, "");
        assert_eq!(doc.turns[0].text, "First line.\nSecond line.\n\nThird.");
    }

    #[test]
    fn two_markers_in_order_with_continuations() {
        let raw = "CHAIR POWELL: Good afternoon.\nWe met today.\r\n\r\nMR. SMITH: Thank you.\r\n";
        let doc = parse_transcript(raw.as_bytes(), meta()).unwrap();
        assert_eq!(doc.turns.len(), 2);
        assert_eq!(doc.turns[0].speaker, "CHAIR POWELL");
        assert_eq!(doc.turns[0].text, "Good afternoon.\nWe met today.");
        assert_eq!(doc.turns[1].speaker, "MR. SMITH");
        assert_eq!(doc.turns[1].text, "Thank you.");
    }

    #[test]
    fn mixed_case_prefix_is_not_a_marker() {
        assert!(speaker_marker("Note: this is text").is_none());
        assert!(speaker_marker("The ratio was 3:1").is_none());
        assert_eq!(speaker_marker("  MS. LEE: hi"), Some(("MS. LEE", " hi")));
    }

    #[test]
    fn preface_before_first_marker_is_anonymous() {
        let doc = parse_transcript(b"Transcript of the hearing\nCHAIR: Hello.", meta()).unwrap();
        assert_eq!(doc.turns.len(), 2);
        assert_eq!(doc.turns[0].speaker, "");
        assert_eq!(doc.turns[1].speaker, "CHAIR");
    }

    #[test]
    fn empty_and_invalid_input() {
        assert!(matches!(parse_transcript(b"  \n\n ", meta()), Err(CorpusError::EmptyTranscript)));
        assert!(matches!(
            parse_transcript(&[b'a', 0xff, 0xfe], meta()),
            Err(CorpusError::EncodingError { valid_up_to: 1 })
        ));
    }

    #[test]
    fn two_terminators() {
        assert_eq!(split("Rates rose. Inflation is high."), vec!["Rates rose.", "Inflation is high."]);
    }

    #[test]
    fn decimal_protection() {
        assert_eq!(split("Growth was 2.5 percent last year."), vec!["Growth was 2.5 percent last year."]);
    }

    #[test]
    fn abbreviation_protection() {
        assert_eq!(
            split("Mr. Powell spoke. Markets reacted."),
            vec!["Mr. Powell spoke.", "Markets reacted."]
        );
        assert_eq!(split("The U.S. Treasury market held up."), vec!["The U.S. Treasury market held up."]);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(split("Policy is data dependent. and so on."), vec!["Policy is data dependent. and so on."]);
    }

    #[test]
    fn quotes_and_parentheses_do_not_block() {
        assert_eq!(
            split("He said \"we are patient.\" (That was new.) Then he left!"),
            vec!["He said \"we are patient.\"", "(That was new.)", "Then he left!"]
        );
    }

    #[test]
    fn question_and_exclamation() {
        assert_eq!(split("Will you cut? No! Maybe later."), vec!["Will you cut?", "No!", "Maybe later."]);
    }

    #[test]
    fn extra_abbreviations_are_honored() {
        let seg = Segmenter::with_extra_abbreviations(["Gov."]);
        assert_eq!(seg.split("Gov. Brainard spoke."), vec!["Gov. Brainard spoke."]);
        assert_eq!(split("Gov. Brainard spoke."), vec!["Gov.", "Brainard spoke."]);
    }

    #[test]
    fn empty_turn_yields_no_sentences() {
        let doc = parse_transcript(b"CHAIR POWELL:\nMR. SMITH: Hello there.", meta()).unwrap();
        let sentences = segment_sentences(&doc);
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].turn_index, 1);
        assert_eq!(sentences[0].sentence_index, 0);
    }

    #[test]
    fn event_indices_run_across_sections() {
        let mut qa = meta();
        qa.section = Section::QandA;
        let opening = parse_transcript(b"CHAIR: One. Two.", meta()).unwrap();
        let qa = parse_transcript(b"Q: Three?\nCHAIR: Four.", qa).unwrap();
        let event = Segmenter::default().segment_event(&[qa, opening]).unwrap();
        let idx: Vec<_> = event.sentences.iter().map(|s| (s.turn_index, s.sentence_index)).collect();
        assert_eq!(idx, vec![(0, 0), (0, 1), (1, 2), (2, 3)]);
        assert_eq!(event.sentences[0].section, Section::OpeningRemarks);
        assert_eq!(event.sentences[3].section, Section::QandA);
    }

    #[test]
    fn duplicate_section_is_rejected() {
        let a = parse_transcript(b"One.", meta()).unwrap();
        let b = parse_transcript(b"Two.", meta()).unwrap();
        assert!(matches!(
            Segmenter::default().segment_event(&[a, b]),
            Err(CorpusError::DuplicateDocument { .. })
        ));
    }

    #[test]
    fn sentence_artifact_round_trip() {
        let doc = parse_transcript(b"CHAIR: One. Two.\nQ: Three?", meta()).unwrap();
        let event = Segmenter::default().segment_event(&[doc]).unwrap();
        let text = write_sentences(std::slice::from_ref(&event));
        assert_eq!(read_sentences(&text).unwrap(), vec![event]);
    }
}
