//! Stage runners. Each stage reads its inputs from disk (the previous
//! stage's artifact or a configured input file) and writes its own artifact
//! plus a log under `<out_dir>/logs/`. `run` chains the stages and writes
//! `run_summary.json` last.
//!
//! ```text
//! out/corpus/sentences.jsonl        segment
//! out/corpus/labels.jsonl           label
//! out/indicators/<kind>_fine.csv    aggregate (also _coarse and _fine_vs_coarse)
//! out/outcomes/<ticker>.csv         outcomes
//! out/irf/<ticker>_<kind>_<g>.csv   estimate (full results in .json)
//! out/figures/<ticker>_<kind>_<g>.svg  plot
//! ```

use crate::config::{ConfigError, LabelSource, RunConfig, Stage};
use crate::corpus::{self, CorpusError, Segmenter};
use crate::diag::Diagnostics;
use crate::indicator::{self, Granularity, IndicatorError, IndicatorPoint};
use crate::lp::{self, LpError};
use crate::market::{self, EventRef, MarketError};
use crate::report::{self, ReportError};
use crate::stance::{self, Lexicon, StanceError};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Stance(#[from] StanceError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Missing(String),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Io { .. } => "io",
            PipelineError::Input { .. } => "input",
            PipelineError::Corpus(CorpusError::Io { .. }) => "io",
            PipelineError::Corpus(_) => "corpus",
            PipelineError::Stance(StanceError::Io { .. }) => "io",
            PipelineError::Stance(_) => "stance",
            PipelineError::Indicator(_) => "indicator",
            PipelineError::Market(MarketError::Io { .. }) => "io",
            PipelineError::Market(_) => "market",
            PipelineError::Lp(_) => "estimation",
            PipelineError::Report(_) => "report",
            PipelineError::Missing(_) => "config",
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.code(), "message": self.to_string() });
        match self {
            PipelineError::Config(c) => v["violations"] = json!(c.violations),
            PipelineError::Io { path, .. } | PipelineError::Input { path, .. } => {
                v["path"] = json!(path.display().to_string())
            }
            PipelineError::Corpus(CorpusError::Io { path, .. })
            | PipelineError::Stance(StanceError::Io { path, .. })
            | PipelineError::Market(MarketError::Io { path, .. }) => v["path"] = json!(path.display().to_string()),
            _ => {}
        }
        v
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

/// Artifact locations under the output directory.
pub struct Layout<'a> {
    config: &'a RunConfig,
}

impl<'a> Layout<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self { config }
    }

    fn out(&self, rel: &str) -> PathBuf {
        self.config.out_dir.join(rel)
    }

    pub fn sentences(&self) -> PathBuf {
        self.out("corpus/sentences.jsonl")
    }

    pub fn labels(&self) -> PathBuf {
        self.out("corpus/labels.jsonl")
    }

    pub fn indicators(&self, granularity: Granularity) -> PathBuf {
        self.out(&format!("indicators/{}_{}.csv", self.config.kind, granularity))
    }

    pub fn comparison(&self) -> PathBuf {
        self.out(&format!("indicators/{}_fine_vs_coarse.csv", self.config.kind))
    }

    fn ticker(&self) -> Result<String> {
        self.config
            .ticker()
            .ok_or_else(|| PipelineError::Missing("market_csv or ticker is required".into()))
    }

    pub fn outcomes(&self) -> Result<PathBuf> {
        Ok(self.out(&format!("outcomes/{}.csv", self.ticker()?)))
    }

    fn irf_stem(&self) -> Result<String> {
        Ok(format!("{}_{}_{}", self.ticker()?, self.config.kind, self.config.granularity))
    }

    pub fn irf_csv(&self) -> Result<PathBuf> {
        Ok(self.out(&format!("irf/{}.csv", self.irf_stem()?)))
    }

    pub fn irf_json(&self) -> Result<PathBuf> {
        Ok(self.out(&format!("irf/{}.json", self.irf_stem()?)))
    }

    pub fn figure(&self) -> Result<PathBuf> {
        Ok(self.out(&format!("figures/{}.svg", self.irf_stem()?)))
    }

    pub fn log(&self, stage: Stage) -> PathBuf {
        self.out(&format!("logs/{}.json", stage.as_str()))
    }

    pub fn summary(&self) -> PathBuf {
        self.out("run_summary.json")
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

fn to_pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

fn input_error(path: &Path, e: impl std::error::Error + Send + Sync + 'static) -> PipelineError {
    PipelineError::Input {
        path: path.to_path_buf(),
        source: Box::new(e),
    }
}

fn required<'c>(path: &'c Option<PathBuf>, key: &str) -> Result<&'c Path> {
    path.as_deref()
        .ok_or_else(|| PipelineError::Missing(format!("{key} is required")))
}

fn write_log(config: &RunConfig, stage: Stage, diag: &Diagnostics) -> Result<()> {
    write_text(&Layout::new(config).log(stage), &to_pretty(diag))
}

fn read_indicators(config: &RunConfig, granularity: Granularity) -> Result<Vec<IndicatorPoint>> {
    let path = Layout::new(config).indicators(granularity);
    indicator::read_indicator_csv(&read_text(&path)?).map_err(|e| input_error(&path, e))
}

pub fn segment(config: &RunConfig) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new();
    let segmenter = Segmenter::with_extra_abbreviations(config.extra_abbreviations.iter().cloned());
    let events = corpus::load_corpus(required(&config.manifest, "manifest")?, &segmenter)?;
    diag.count("corpus_events", events.len() as u64);
    diag.count("sentences", events.iter().map(|e| e.sentences.len() as u64).sum());
    for e in events.iter().filter(|e| e.sentences.is_empty()) {
        diag.warn(format!("event {}: no sentences", e.event_id));
    }
    write_text(&Layout::new(config).sentences(), &corpus::write_sentences(&events))?;
    write_log(config, Stage::Segment, &diag)?;
    Ok(diag)
}

pub fn label(config: &RunConfig) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new();
    let layout = Layout::new(config);
    let sentences_path = layout.sentences();
    let events = corpus::read_sentences(&read_text(&sentences_path)?).map_err(|e| input_error(&sentences_path, e))?;
    let labeled = match config.label_source() {
        LabelSource::File => {
            let path = required(&config.labels, "labels")?;
            let labeled = stance::load_labels(path, &events)?;
            for e in labeled.iter().filter(|e| e.defaulted > 0) {
                diag.warn(format!("event {}: {} unlabeled sentences set to neutral", e.event_id, e.defaulted));
                diag.count("labels_defaulted", e.defaulted as u64);
            }
            labeled
        }
        LabelSource::Lexicon => {
            stance::label_with_lexicon(&events, &Lexicon::load(required(&config.lexicon, "lexicon")?)?)
        }
        LabelSource::DefaultLexicon => stance::label_with_lexicon(&events, &Lexicon::default()),
    };
    for e in &labeled {
        for s in &e.sentences {
            diag.count(&format!("stance_{}", s.stance), 1);
        }
    }
    write_text(&layout.labels(), &stance::write_labels(&labeled))?;
    write_log(config, Stage::Label, &diag)?;
    Ok(diag)
}

pub fn aggregate(config: &RunConfig) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new();
    let layout = Layout::new(config);
    let sentences_path = layout.sentences();
    let events = corpus::read_sentences(&read_text(&sentences_path)?).map_err(|e| input_error(&sentences_path, e))?;
    let labeled = stance::parse_labels(&read_text(&layout.labels())?, &events)?;

    let filtered: Vec<_> = labeled
        .iter()
        .map(|e| indicator::filter_event(e, config.section, config.speaker.as_deref()))
        .filter(|e| {
            if e.sentences.is_empty() {
                diag.warn(format!("event {}: no sentences after section/speaker filter; dropped", e.event_id));
                diag.count("events_empty_after_filter", 1);
                false
            } else {
                true
            }
        })
        .collect();

    let mut series = Vec::new();
    for granularity in [Granularity::Fine, Granularity::Coarse] {
        let points = indicator::indicator_series(&filtered, granularity, config.kind, config.scenario, config.zero_policy())?;
        let missing = points.iter().filter(|p| p.score.is_none()).count();
        if missing > 0 {
            diag.count(&format!("{granularity}_missing_score"), missing as u64);
        }
        write_text(&layout.indicators(granularity), &indicator::write_indicator_csv(&points))?;
        series.push(points);
    }
    diag.count("indicator_events", series[0].len() as u64);
    write_text(&layout.comparison(), &report::emit_indicator_comparison(&series[0], &series[1]))?;
    write_log(config, Stage::Aggregate, &diag)?;
    Ok(diag)
}

fn event_refs(points: &[IndicatorPoint]) -> Vec<EventRef> {
    points
        .iter()
        .map(|p| EventRef {
            event_id: p.event_id.clone(),
            event_date: p.event_date,
        })
        .collect()
}

pub fn outcomes(config: &RunConfig) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new();
    let layout = Layout::new(config);
    let points = read_indicators(config, config.granularity)?;
    let mut series = market::load_market_csv(required(&config.market_csv, "market_csv")?, &mut diag)?;
    if let Some(t) = &config.ticker {
        series.ticker = t.clone();
    }
    let panel = market::build_outcome_panel(&series, &event_refs(&points), config.horizons, &mut diag);
    diag.count("outcome_rows", panel.rows.len() as u64);
    write_text(&layout.outcomes()?, &market::write_outcome_csv(&panel))?;
    write_log(config, Stage::Outcomes, &diag)?;
    Ok(diag)
}

pub fn estimate(config: &RunConfig) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new();
    let layout = Layout::new(config);
    let points = read_indicators(config, config.granularity)?;
    let outcomes_path = layout.outcomes()?;
    let panel = market::read_outcome_csv(&read_text(&outcomes_path)?, &layout.ticker()?)
        .map_err(|e| input_error(&outcomes_path, e))?;
    let controls = market::load_controls_csv(required(&config.controls_csv, "controls_csv")?, &mut diag)?;
    let joined = market::join_controls(&event_refs(&points), &controls, &mut diag);

    let projection = lp::local_projection(&panel, &points, &joined, &config.lp_config())?;
    for h in &projection.infeasible {
        diag.warn(format!("horizon {} not estimated: {}", h.horizon, h.cause));
        diag.count("horizons_infeasible", 1);
    }
    for r in &projection.results {
        diag.count("rows_dropped_missing_sentiment", r.dropped.missing_sentiment as u64);
        diag.count("rows_dropped_no_outcome", r.dropped.no_outcome as u64);
        diag.count("rows_dropped_no_controls", r.dropped.no_controls as u64);
        diag.count("bootstrap_redraws", r.redraws);
    }
    let (_, csv) = report::emit_irf(&projection.results, &layout.ticker()?, config.kind, config.granularity);
    write_text(&layout.irf_csv()?, &csv)?;
    write_text(&layout.irf_json()?, &to_pretty(&projection))?;
    write_log(config, Stage::Estimate, &diag)?;
    Ok(diag)
}

pub fn plot(config: &RunConfig) -> Result<Diagnostics> {
    let diag = Diagnostics::new();
    let layout = Layout::new(config);
    let irf_path = layout.irf_csv()?;
    let table = report::parse_irf_csv(&read_text(&irf_path)?, &layout.ticker()?, config.kind, config.granularity)
        .map_err(|e| input_error(&irf_path, e))?;
    write_text(&layout.figure()?, &report::emit_irf_svg(&table))?;
    write_log(config, Stage::Plot, &diag)?;
    Ok(diag)
}

pub fn run_stage(config: &RunConfig, stage: Stage) -> Result<Diagnostics> {
    match stage {
        Stage::Segment => segment(config),
        Stage::Label => label(config),
        Stage::Aggregate => aggregate(config),
        Stage::Outcomes => outcomes(config),
        Stage::Estimate => estimate(config),
        Stage::Plot => plot(config),
        Stage::Run => run_pipeline(config),
    }
}

pub const STAGES: [Stage; 6] = [
    Stage::Segment,
    Stage::Label,
    Stage::Aggregate,
    Stage::Outcomes,
    Stage::Estimate,
    Stage::Plot,
];

/// Every stage in order, then `run_summary.json`. The summary's presence
/// marks a completed run.
pub fn run_pipeline(config: &RunConfig) -> Result<Diagnostics> {
    let layout = Layout::new(config);
    let summary_path = layout.summary();
    if summary_path.exists() {
        std::fs::remove_file(&summary_path).map_err(|source| PipelineError::Io {
            path: summary_path.clone(),
            source,
        })?;
    }
    let mut total = Diagnostics::new();
    let mut stages = serde_json::Map::new();
    for stage in STAGES {
        let diag = run_stage(config, stage)?;
        stages.insert(stage.as_str().to_string(), serde_json::to_value(&diag).expect("diagnostics serialize"));
        total.merge(diag);
    }
    let summary = json!({
        "version": crate::VERSION,
        "seed": config.seed,
        "config": config.echo,
        "stages": stages,
        "warning_count": total.warnings.len(),
        "counts": total.counts,
    });
    write_text(&summary_path, &to_pretty(&summary))?;
    Ok(total)
}
