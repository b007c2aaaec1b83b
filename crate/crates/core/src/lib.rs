//! Policy-stance indicators from central bank communication, and the
//! dynamic response of market outcomes to them.
//!
//! The pipeline runs in stages, each reading the previous stage's artifact
//! from disk:
//!
//! - [`corpus`]: parse speaker-marked transcripts and segment them into sentences
//! - [`stance`]: attach dovish/hawkish/neutral labels, from a label file or a lexicon
//! - [`indicator`]: aggregate labels into per-event scores in `[-1, 1]`
//! - [`market`]: align events to trading days and compute horizon log returns
//! - [`lp`]: per-horizon OLS local projections with bias-corrected bootstrap intervals
//! - [`report`]: impulse-response CSV/SVG output and indicator comparisons
//!
//! [`pipeline`] wires the stages together behind a [`config::RunConfig`].

pub mod config;
pub mod corpus;
pub mod diag;
pub mod indicator;
pub mod lp;
pub mod market;
pub mod pipeline;
pub mod report;
pub mod stance;
pub mod synthetic;

pub use corpus::{Scenario, Section, Sentence, TranscriptDocument};
pub use diag::Diagnostics;
pub use indicator::{Granularity, IndicatorKind, IndicatorPoint, LabelCounts};
pub use lp::{LPResult, RegressionDataset};
pub use stance::{LabeledEvent, StanceLabel, ToneLabel};

/// Library version
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
