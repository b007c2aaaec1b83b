//! Oracles and helpers shared by the integration and acceptance targets.
#![allow(dead_code)]

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use stancelp::corpus::{parse_transcript, DocumentMeta, Scenario, Section, Segmenter};
use stancelp::indicator::{sentiment_score, LabelCounts, ZeroPolicy};
use stancelp::lp::ols::Design;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn bundled_fixture() -> PathBuf {
    crate_dir().join("fixtures").join("synthetic")
}

// ---- segmentation golden files ----

pub struct GoldenDiff {
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

impl GoldenDiff {
    /// Sentences present on one side only, as `(line, text)` pairs.
    pub fn boundary_diffs(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.expected.len().max(self.actual.len());
        for i in 0..n {
            let e = self.expected.get(i).map(String::as_str).unwrap_or("<none>");
            let a = self.actual.get(i).map(String::as_str).unwrap_or("<none>");
            if e != a {
                out.push(format!("{}: expected {e:?}, got {a:?}", i + 1));
            }
        }
        out
    }
}

pub fn golden_segmentation() -> GoldenDiff {
    let dir = crate_dir().join("tests/data/segmentation");
    let expected: Vec<String> = std::fs::read_to_string(dir.join("expected.txt"))
        .expect("expected.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    let raw = std::fs::read(dir.join("transcript.txt")).expect("transcript.txt");
    let meta = DocumentMeta {
        event_id: "golden".into(),
        event_date: NaiveDate::from_ymd_opt(2022, 1, 26).unwrap(),
        scenario: Scenario::PressConference,
        section: Section::OpeningRemarks,
    };
    let doc = parse_transcript(&raw, meta).expect("golden transcript parses");
    let actual = Segmenter::default().segment(&doc).into_iter().map(|s| s.text).collect();
    GoldenDiff { expected, actual }
}

// ---- indicator oracle ----

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced `(numerator, denominator)` of `(d - h) / (d + h)`.
pub fn ratio_oracle(d: u64, h: u64) -> Option<(i128, i128)> {
    let (num, den) = (d as i128 - h as i128, d as i128 + h as i128);
    if den == 0 {
        return None;
    }
    let g = gcd(num, den);
    Some((num / g, den / g))
}

/// Checks every indicator property on one count triple; returns a failure
/// description if any fails.
pub fn check_counts(d: u64, h: u64, n: u64, extra_neutral: u64) -> Result<(), String> {
    let c = LabelCounts::new(d, h, n);
    let s = sentiment_score(&c, ZeroPolicy::Missing);
    let swapped = sentiment_score(&LabelCounts::new(h, d, n), ZeroPolicy::Missing);
    let more_neutral = sentiment_score(&LabelCounts::new(d, h, n + extra_neutral), ZeroPolicy::Missing);
    match (ratio_oracle(d, h), c.ratio(), s) {
        (None, None, None) => {
            if swapped.is_some() || more_neutral.is_some() {
                return Err(format!("({d},{h},{n}): Missing not preserved"));
            }
            if sentiment_score(&c, ZeroPolicy::ZeroFill) != Some(0.0) {
                return Err(format!("({d},{h},{n}): zero fill not 0"));
            }
            Ok(())
        }
        (Some((p, q)), Some(r), Some(v)) => {
            if (*r.numer(), *r.denom()) != (p, q) {
                return Err(format!("({d},{h},{n}): ratio {r} != {p}/{q}"));
            }
            if v != p as f64 / q as f64 {
                return Err(format!("({d},{h},{n}): score {v} != {p}/{q}"));
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(format!("({d},{h},{n}): score {v} out of range"));
            }
            if swapped != Some(-v) {
                return Err(format!("({d},{h},{n}): swap gives {swapped:?}, want {}", -v));
            }
            if more_neutral != Some(v) {
                return Err(format!("({d},{h},{n}): neutral count changed the score"));
            }
            Ok(())
        }
        other => Err(format!("({d},{h},{n}): presence mismatch {other:?}")),
    }
}

pub fn random_counts(rng: &mut ChaCha8Rng) -> (u64, u64, u64, u64) {
    // Small counts exercise ties and the Missing case; large ones exercise
    // reduction of big fractions.
    let bound = if rng.random_bool(0.5) { 6 } else { 1_000_000 };
    (
        rng.random_range(0..bound),
        rng.random_range(0..bound),
        rng.random_range(0..bound),
        rng.random_range(1..1000),
    )
}

// ---- OLS oracle ----

/// Brute-force `(XᵀX)⁻¹Xᵀy`.
pub fn normal_equations(x: &Design, y: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j));
    let v = DVector::from_column_slice(y);
    let xtx = m.transpose() * &m;
    let inv = xtx.try_inverse().expect("oracle design is full rank");
    (inv * m.transpose() * v).iter().copied().collect()
}

/// Random design with an intercept and five Gaussian-ish regressors.
pub fn random_ols_dataset(rng: &mut ChaCha8Rng, n: usize) -> (Design, Vec<f64>) {
    let names = ["x1", "x2", "x3", "x4", "x5"];
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..names.len()).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let beta: Vec<f64> = (0..=names.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let design = Design::with_intercept(&names, &rows);
    let y = design
        .multiply(&beta)
        .into_iter()
        .map(|f| f + rng.random_range(-0.5..0.5))
        .collect();
    (design, y)
}

/// `|Xᵀe|_∞` and the bound it must stay below.
pub fn orthogonality(x: &Design, y: &[f64], residuals: &[f64]) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    for j in 0..x.cols() {
        let dot: f64 = (0..x.rows()).map(|i| x.get(i, j) * residuals[i]).sum();
        worst = worst.max(dot.abs());
    }
    let max_x = (0..x.rows())
        .flat_map(|i| x.row(i).iter().copied())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let max_y = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (worst, 1e-8 * x.rows() as f64 * max_x * max_y)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- file trees ----

pub fn copy_tree(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        if name == "out" {
            continue;
        }
        let target = dst.join(&name);
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// SHA-256 of every file under `root`, keyed by relative path.
pub fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                let digest = Sha256::digest(std::fs::read(&path).unwrap());
                let hex = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(rel, hex);
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
