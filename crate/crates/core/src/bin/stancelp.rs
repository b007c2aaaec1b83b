use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};
use stancelp::config::{ConfigError, RunConfig, Stage};
use stancelp::pipeline::{self, PipelineError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Policy-stance indicators and local-projection impulse responses.
#[derive(Parser)]
#[command(name = "stancelp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and segment transcripts listed in the manifest
    Segment(Overrides),
    /// Attach stance labels from a label file or a lexicon
    Label(Overrides),
    /// Aggregate labels into per-event indicators
    Aggregate(Overrides),
    /// Compute horizon outcomes from the market series
    Outcomes(Overrides),
    /// Estimate local projections with bootstrap intervals
    Estimate(Overrides),
    /// Render the impulse response as SVG
    Plot(Overrides),
    /// Run every stage and write the run summary
    Run(Overrides),
}

/// Flags mirror the config file keys and take precedence over it.
#[derive(Args, Default)]
struct Overrides {
    /// JSON run config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    market_csv: Option<PathBuf>,
    #[arg(long)]
    controls_csv: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    ticker: Option<String>,
    /// sentiment | voice_tone
    #[arg(long)]
    kind: Option<String>,
    /// fine | coarse
    #[arg(long)]
    granularity: Option<String>,
    /// all | press_conference | hearing
    #[arg(long)]
    scenario: Option<String>,
    /// all | opening_remarks | q_and_a | readout
    #[arg(long)]
    section: Option<String>,
    /// Keep only speakers whose name contains this (case-insensitive)
    #[arg(long)]
    speaker: Option<String>,
    #[arg(long)]
    horizons: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Score events with no polar labels as 0 instead of dropping them
    #[arg(long)]
    zero_fill: bool,
    /// Additional abbreviation that never ends a sentence (repeatable)
    #[arg(long = "abbreviation")]
    abbreviations: Vec<String>,
}

impl Overrides {
    fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
        let paths = [
            ("manifest", &self.manifest),
            ("market_csv", &self.market_csv),
            ("controls_csv", &self.controls_csv),
            ("labels", &self.labels),
            ("lexicon", &self.lexicon),
            ("out_dir", &self.out_dir),
        ];
        for (key, value) in paths {
            if let Some(p) = value {
                m.insert(key.into(), abs(p).display().to_string().into());
            }
        }
        let strings = [
            ("ticker", &self.ticker),
            ("kind", &self.kind),
            ("granularity", &self.granularity),
            ("scenario", &self.scenario),
            ("section", &self.section),
            ("speaker", &self.speaker),
        ];
        for (key, value) in strings {
            if let Some(s) = value {
                m.insert(key.into(), s.clone().into());
            }
        }
        for (key, value) in [("horizons", self.horizons), ("reps", self.reps), ("seed", self.seed)] {
            if let Some(n) = value {
                m.insert(key.into(), n.into());
            }
        }
        if let Some(a) = self.alpha {
            m.insert("alpha".into(), a.into());
        }
        if self.zero_fill {
            m.insert("zero_fill".into(), true.into());
        }
        if !self.abbreviations.is_empty() {
            m.insert("extra_abbreviations".into(), self.abbreviations.clone().into());
        }
        m
    }

    fn resolve(&self, stage: Stage) -> Result<RunConfig, ConfigError> {
        let overrides = self.to_map();
        match &self.config {
            Some(path) => RunConfig::load(path, &overrides, stage),
            None => RunConfig::from_value(&Value::Object(overrides), Path::new("."), stage),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, overrides) = match &cli.command {
        Command::Segment(o) => (Stage::Segment, o),
        Command::Label(o) => (Stage::Label, o),
        Command::Aggregate(o) => (Stage::Aggregate, o),
        Command::Outcomes(o) => (Stage::Outcomes, o),
        Command::Estimate(o) => (Stage::Estimate, o),
        Command::Plot(o) => (Stage::Plot, o),
        Command::Run(o) => (Stage::Run, o),
    };
    let result = overrides
        .resolve(stage)
        .map_err(PipelineError::from)
        .and_then(|config| pipeline::run_stage(&config, stage));
    match result {
        Ok(diag) => {
            eprintln!("{}: done ({} warnings)", stage.as_str(), diag.warnings.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            match e {
                PipelineError::Config(_) | PipelineError::Missing(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
