//! Local projections: one OLS regression per horizon of the outcome on the
//! event indicator and the four policy controls,
//!
//! ```text
//! outcome(t, t+h) = b0 + b1 indicator(t) + b2 ffr(t) + b3 fg(t) + b4 ap(t) + b5 shadow(t) + e
//! ```
//!
//! with bias-corrected pairs-bootstrap intervals on every coefficient.
//! Horizons are estimated independently; an event enters a horizon only if
//! its outcome at that horizon exists.

pub mod bootstrap;
pub mod ols;

use crate::indicator::IndicatorPoint;
use crate::market::{ControlVector, OutcomePanel};
use bootstrap::BootstrapError;
use ols::{Design, OlsError, OlsFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Regression columns in coefficient order.
pub const COLUMN_NAMES: [&str; 6] = ["intercept", "sentiment", "ffr_shock", "fg_shock", "ap_shock", "shadow_rate"];
/// Position of the indicator coefficient.
pub const TARGET_INDEX: usize = 1;
/// Six coefficients plus one degree of freedom.
pub const MIN_ROWS: usize = COLUMN_NAMES.len() + 1;

pub const DEFAULT_REPS: usize = 2000;
pub const DEFAULT_ALPHA: f64 = 0.10;
pub const DEFAULT_HORIZONS: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("horizon {horizon}: {rows} usable rows, need at least {MIN_ROWS}")]
    InsufficientSample { horizon: usize, rows: usize },
    #[error("horizon {horizon}: {source}")]
    Ols {
        horizon: usize,
        #[source]
        source: OlsError,
    },
    #[error("horizon {horizon}: {source}")]
    Bootstrap {
        horizon: usize,
        #[source]
        source: BootstrapError,
    },
    #[error("no horizon could be estimated")]
    NoEstimableHorizon(Vec<InfeasibleHorizon>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub event_id: String,
    pub outcome: f64,
    pub sentiment: f64,
    pub controls: ControlVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    pub horizon: usize,
    pub rows: Vec<RegressionRow>,
}

impl RegressionDataset {
    pub fn design(&self) -> Design {
        let regressors: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                let c = r.controls.as_array();
                vec![r.sentiment, c[0], c[1], c[2], c[3]]
            })
            .collect();
        Design::with_intercept(&COLUMN_NAMES[1..], &regressors)
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.outcome).collect()
    }
}

/// Events excluded from one horizon, by cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DropCounts {
    pub no_outcome: usize,
    pub missing_sentiment: usize,
    pub no_controls: usize,
}

/// Rows for events with an outcome at `horizon`, a non-missing indicator
/// and matched controls, in indicator order.
pub fn assemble_dataset(
    panel: &OutcomePanel,
    indicators: &[IndicatorPoint],
    controls: &BTreeMap<String, ControlVector>,
    horizon: usize,
) -> Result<(RegressionDataset, DropCounts), LpError> {
    let outcomes: HashMap<&str, f64> = panel
        .rows
        .iter()
        .filter(|r| r.horizon == horizon)
        .map(|r| (r.event_id.as_str(), r.outcome))
        .collect();
    let mut drops = DropCounts::default();
    let mut rows = Vec::new();
    for point in indicators {
        let Some(sentiment) = point.score else {
            drops.missing_sentiment += 1;
            continue;
        };
        let Some(&outcome) = outcomes.get(point.event_id.as_str()) else {
            drops.no_outcome += 1;
            continue;
        };
        let Some(&controls) = controls.get(&point.event_id) else {
            drops.no_controls += 1;
            continue;
        };
        rows.push(RegressionRow {
            event_id: point.event_id.clone(),
            outcome,
            sentiment,
            controls,
        });
    }
    if rows.len() < MIN_ROWS {
        return Err(LpError::InsufficientSample {
            horizon,
            rows: rows.len(),
        });
    }
    Ok((RegressionDataset { horizon, rows }, drops))
}

pub fn ols_fit(dataset: &RegressionDataset) -> Result<OlsFit, LpError> {
    ols::least_squares(&dataset.design(), &dataset.outcomes()).map_err(|source| LpError::Ols {
        horizon: dataset.horizon,
        source,
    })
}

/// Bias-corrected bootstrap intervals for every coefficient of the dataset's
/// regression.
pub fn bc_bootstrap_ci(
    dataset: &RegressionDataset,
    reps: usize,
    alpha: f64,
    seed: u64,
) -> Result<bootstrap::BootstrapSummary, LpError> {
    let horizon = dataset.horizon;
    let wrap = |source| LpError::Bootstrap { horizon, source };
    bootstrap::validate(reps, alpha).map_err(wrap)?;
    let fit = ols_fit(dataset)?;
    bootstrap::pairs_bootstrap(
        &dataset.design(),
        &dataset.outcomes(),
        &fit.coefficients,
        reps,
        alpha,
        seed,
        horizon as u64,
    )
    .map_err(wrap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpConfig {
    pub max_horizon: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl LpConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_horizon: DEFAULT_HORIZONS,
            reps: DEFAULT_REPS,
            alpha: DEFAULT_ALPHA,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub struct LPResult {
    pub horizon: usize,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    pub target_index: usize,
    /// Bootstrap standard errors.
    pub se: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub n: usize,
    pub r_squared: f64,
    pub bootstrap_reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub dropped: DropCounts,
    pub redraws: u64,
}

impl LPResult {
    pub fn target(&self) -> f64 {
        self.coefficients[self.target_index]
    }

    pub fn target_se(&self) -> f64 {
        self.se[self.target_index]
    }

    pub fn target_ci(&self) -> (f64, f64) {
        (self.ci_low[self.target_index], self.ci_high[self.target_index])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleHorizon {
    pub horizon: usize,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub results: Vec<LPResult>,
    pub infeasible: Vec<InfeasibleHorizon>,
}

/// Estimate one horizon end to end.
pub fn estimate_horizon(
    panel: &OutcomePanel,
    indicators: &[IndicatorPoint],
    controls: &BTreeMap<String, ControlVector>,
    horizon: usize,
    config: &LpConfig,
) -> Result<LPResult, LpError> {
    let (dataset, dropped) = assemble_dataset(panel, indicators, controls, horizon)?;
    let fit = ols_fit(&dataset)?;
    let boot = bc_bootstrap_ci(&dataset, config.reps, config.alpha, config.seed)?;
    Ok(LPResult {
        horizon,
        columns: COLUMN_NAMES.iter().map(|s| s.to_string()).collect(),
        coefficients: fit.coefficients,
        target_index: TARGET_INDEX,
        se: boot.se,
        ci_low: boot.ci_low,
        ci_high: boot.ci_high,
        n: dataset.rows.len(),
        r_squared: fit.r_squared,
        bootstrap_reps: config.reps,
        alpha: config.alpha,
        seed: config.seed,
        dropped,
        redraws: boot.redraws,
    })
}

/// Estimate horizons `0..=max_horizon`. Infeasible horizons are reported
/// with their cause; an error only if none is feasible.
pub fn local_projection(
    panel: &OutcomePanel,
    indicators: &[IndicatorPoint],
    controls: &BTreeMap<String, ControlVector>,
    config: &LpConfig,
) -> Result<LocalProjection, LpError> {
    let outcomes: Vec<Result<LPResult, LpError>> = (0..=config.max_horizon)
        .into_par_iter()
        .map(|h| estimate_horizon(panel, indicators, controls, h, config))
        .collect();
    let mut results = Vec::new();
    let mut infeasible = Vec::new();
    for (h, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => infeasible.push(InfeasibleHorizon {
                horizon: h,
                cause: e.to_string(),
            }),
        }
    }
    if results.is_empty() {
        return Err(LpError::NoEstimableHorizon(infeasible));
    }
    Ok(LocalProjection { results, infeasible })
}
