//! Run configuration: a JSON object whose keys mirror the CLI flags.
//!
//! Validation reports every violation at once. Relative paths resolve
//! against the directory of the config file.

use crate::corpus::Scenario;
use crate::indicator::{Granularity, IndicatorKind, SectionFilter, ZeroPolicy};
use crate::lp::{LpConfig, DEFAULT_ALPHA, DEFAULT_HORIZONS, DEFAULT_REPS};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {}", violations.join("; "))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

/// Pipeline stage, used to decide which inputs are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Segment,
    Label,
    Aggregate,
    Outcomes,
    Estimate,
    Plot,
    Run,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Segment => "segment",
            Stage::Label => "label",
            Stage::Aggregate => "aggregate",
            Stage::Outcomes => "outcomes",
            Stage::Estimate => "estimate",
            Stage::Plot => "plot",
            Stage::Run => "run",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Stage::Segment => &["manifest"],
            Stage::Label | Stage::Aggregate => &[],
            Stage::Outcomes => &["market_csv"],
            Stage::Estimate => &["market_csv", "controls_csv"],
            Stage::Plot => &["market_csv|ticker"],
            Stage::Run => &["manifest", "market_csv", "controls_csv"],
        }
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "manifest",
    "market_csv",
    "controls_csv",
    "labels",
    "lexicon",
    "out_dir",
    "ticker",
    "kind",
    "granularity",
    "scenario",
    "horizons",
    "reps",
    "alpha",
    "seed",
    "zero_fill",
    "section",
    "speaker",
    "extra_abbreviations",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    File,
    Lexicon,
    DefaultLexicon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub market_csv: Option<PathBuf>,
    pub controls_csv: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub ticker: Option<String>,
    pub kind: IndicatorKind,
    pub granularity: Granularity,
    pub scenario: Option<Scenario>,
    pub horizons: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub zero_fill: bool,
    pub section: SectionFilter,
    pub speaker: Option<String>,
    pub extra_abbreviations: Vec<String>,
    /// Effective settings as given (paths unresolved), defaults filled in.
    pub echo: Map<String, Value>,
}

impl RunConfig {
    /// Validate a JSON object for `stage`, resolving paths against `base`.
    pub fn from_value(value: &Value, base: &Path, stage: Stage) -> Result<Self, ConfigError> {
        let mut v = Violations::default();
        let empty = Map::new();
        let obj = match value.as_object() {
            Some(o) => o,
            None => {
                v.push("config must be a JSON object".to_string());
                &empty
            }
        };
        for key in obj.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                v.push(format!("{key}: unknown field"));
            }
        }

        let path = |v: &mut Violations, key: &str| v.string(obj, key).map(|s| base.join(s));
        let manifest = path(&mut v, "manifest");
        let market_csv = path(&mut v, "market_csv");
        let controls_csv = path(&mut v, "controls_csv");
        let labels = path(&mut v, "labels");
        let lexicon = path(&mut v, "lexicon");
        let out_dir = path(&mut v, "out_dir").unwrap_or_else(|| base.join("out"));
        let ticker = v.string(obj, "ticker");
        let speaker = v.string(obj, "speaker");

        let kind = v
            .parsed(obj, "kind", IndicatorKind::parse, "sentiment|voice_tone")
            .unwrap_or(IndicatorKind::Sentiment);
        let granularity = v
            .parsed(obj, "granularity", Granularity::parse, "fine|coarse")
            .unwrap_or(Granularity::Fine);
        let scenario = v
            .parsed(
                obj,
                "scenario",
                |s| match s {
                    "all" => Some(None),
                    other => Scenario::parse(other).map(Some),
                },
                "all|press_conference|hearing",
            )
            .unwrap_or(None);
        let section = v
            .parsed(obj, "section", SectionFilter::parse, "all|opening_remarks|q_and_a|readout")
            .unwrap_or_default();

        let horizons = v.uint(obj, "horizons").unwrap_or(DEFAULT_HORIZONS as u64) as usize;
        let reps = v.uint(obj, "reps").unwrap_or(DEFAULT_REPS as u64) as usize;
        if reps < crate::lp::bootstrap::MIN_REPS {
            v.push(format!("reps: must be at least {}", crate::lp::bootstrap::MIN_REPS));
        }
        let alpha = match obj.get("alpha") {
            None => DEFAULT_ALPHA,
            Some(a) => match a.as_f64() {
                Some(x) if x > 0.0 && x < 1.0 => x,
                _ => {
                    v.push("alpha: must be a number in (0, 1)".to_string());
                    DEFAULT_ALPHA
                }
            },
        };
        let seed = match obj.get("seed") {
            None => {
                v.push("seed: required".to_string());
                0
            }
            Some(_) => v.uint(obj, "seed").unwrap_or(0),
        };
        let zero_fill = match obj.get("zero_fill") {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                v.push("zero_fill: must be a boolean".to_string());
                false
            }
        };
        let extra_abbreviations = match obj.get("extra_abbreviations") {
            None => Vec::new(),
            Some(Value::Array(items)) if items.iter().all(Value::is_string) => {
                items.iter().filter_map(|s| s.as_str().map(str::to_string)).collect()
            }
            Some(_) => {
                v.push("extra_abbreviations: must be an array of strings".to_string());
                Vec::new()
            }
        };

        if labels.is_some() && lexicon.is_some() {
            v.push("labels, lexicon: give at most one label source".to_string());
        }
        for req in stage.required() {
            let present = req.split('|').any(|k| obj.get(k).is_some_and(|x| !x.is_null()));
            if !present {
                v.push(format!("{}: required for {}", req.replace('|', " or "), stage.as_str()));
            }
        }

        if !v.0.is_empty() {
            return Err(ConfigError { violations: v.0 });
        }

        let mut echo = obj.clone();
        let defaults: [(&str, Value); 9] = [
            ("out_dir", "out".into()),
            ("kind", kind.as_str().into()),
            ("granularity", granularity.as_str().into()),
            ("scenario", scenario.map_or("all", |s| s.as_str()).into()),
            ("horizons", horizons.into()),
            ("reps", reps.into()),
            ("alpha", alpha.into()),
            ("zero_fill", zero_fill.into()),
            ("section", section.as_str().into()),
        ];
        for (k, val) in defaults {
            echo.entry(k.to_string()).or_insert(val);
        }

        Ok(RunConfig {
            manifest,
            market_csv,
            controls_csv,
            labels,
            lexicon,
            out_dir,
            ticker,
            kind,
            granularity,
            scenario,
            horizons,
            reps,
            alpha,
            seed,
            zero_fill,
            section,
            speaker,
            extra_abbreviations,
            echo,
        })
    }

    /// Read a config file, apply `overrides` on top, and validate.
    pub fn load(path: &Path, overrides: &Map<String, Value>, stage: Stage) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|e| ConfigError {
            violations: vec![format!("config: cannot read {}: {e}", path.display())],
        })?;
        let mut value: Value = serde_json::from_str(&raw).map_err(|e| ConfigError {
            violations: vec![format!("config: {}: {e}", path.display())],
        })?;
        if let Some(obj) = value.as_object_mut() {
            obj.extend(overrides.clone());
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_value(&value, base, stage)
    }

    pub fn zero_policy(&self) -> ZeroPolicy {
        if self.zero_fill {
            ZeroPolicy::ZeroFill
        } else {
            ZeroPolicy::Missing
        }
    }

    pub fn label_source(&self) -> LabelSource {
        match (&self.labels, &self.lexicon) {
            (Some(_), _) => LabelSource::File,
            (None, Some(_)) => LabelSource::Lexicon,
            (None, None) => LabelSource::DefaultLexicon,
        }
    }

    /// Explicit ticker, else the market CSV's file stem.
    pub fn ticker(&self) -> Option<String> {
        self.ticker.clone().or_else(|| {
            self.market_csv
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
        })
    }

    pub fn lp_config(&self) -> LpConfig {
        LpConfig {
            max_horizon: self.horizons,
            reps: self.reps,
            alpha: self.alpha,
            seed: self.seed,
        }
    }
}

#[derive(Default)]
struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, msg: String) {
        self.0.push(msg);
    }

    fn string(&mut self, obj: &Map<String, Value>, key: &str) -> Option<String> {
        match obj.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(_) => {
                self.push(format!("{key}: must be a non-empty string"));
                None
            }
        }
    }

    fn uint(&mut self, obj: &Map<String, Value>, key: &str) -> Option<u64> {
        match obj.get(key) {
            None => None,
            Some(x) => match x.as_u64() {
                Some(n) => Some(n),
                None => {
                    self.push(format!("{key}: must be a non-negative integer"));
                    None
                }
            },
        }
    }

    fn parsed<T>(
        &mut self,
        obj: &Map<String, Value>,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        expected: &str,
    ) -> Option<T> {
        let raw = obj.get(key)?;
        match raw.as_str().and_then(&parse) {
            Some(t) => Some(t),
            None => {
                self.push(format!("{key}: expected one of {expected}"));
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_value(&json!({"seed": 7, "manifest": "m.json"}), Path::new("/base"), Stage::Segment).unwrap();
        assert_eq!(c.horizons, 15);
        assert_eq!(c.reps, 2000);
        assert_eq!(c.alpha, 0.10);
        assert_eq!(c.manifest, Some(PathBuf::from("/base/m.json")));
        assert_eq!(c.out_dir, PathBuf::from("/base/out"));
        assert_eq!(c.label_source(), LabelSource::DefaultLexicon);
        assert_eq!(c.echo["scenario"], json!("all"));
    }

    #[test]
    fn missing_seed_is_reported() {
        let err = RunConfig::from_value(&json!({"manifest": "m.json"}), Path::new("."), Stage::Segment).unwrap_err();
        assert_eq!(err.violations, vec!["seed: required"]);
    }

    #[test]
    fn every_violation_is_listed() {
        let err = RunConfig::from_value(
            &json!({"alpha": 1.5, "reps": 10, "kind": "mood", "horizons": -1, "labels": "a", "lexicon": "b", "bogus": 1}),
            Path::new("."),
            Stage::Run,
        )
        .unwrap_err();
        let joined = err.violations.join("\n");
        for needle in ["bogus", "alpha", "reps", "kind", "horizons", "seed", "label source", "manifest", "market_csv", "controls_csv"] {
            assert!(joined.contains(needle), "missing {needle} in {joined}");
        }
    }

    #[test]
    fn ticker_falls_back_to_market_stem() {
        let c = RunConfig::from_value(&json!({"seed": 1, "market_csv": "data/SPY.csv"}), Path::new("."), Stage::Plot).unwrap();
        assert_eq!(c.ticker().as_deref(), Some("SPY"));
        assert!(RunConfig::from_value(&json!({"seed": 1}), Path::new("."), Stage::Plot).is_err());
    }
}
