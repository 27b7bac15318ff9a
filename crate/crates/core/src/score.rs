//! Normalized metrics average and the flaw-penalized quality score.
//!
//! Each feature is compared against the median of the same feature over a
//! language's best-rated articles: at or above the median scores 100 points,
//! below it scores proportionally. The normalized metrics average (NMA) is the
//! mean of the five points; every quality-flaw template then removes 5% of it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::features::ArticleFeatures;
use crate::PageId;

/// Feature order used by [`MedianBenchmarks::medians`] and
/// [`ArticleFeatures::values`].
pub const FEATURE_NAMES: [&str; 5] = ["length", "references", "ref_density", "images", "sections"];

/// Share of the NMA removed per flaw template.
pub const QFT_PENALTY: f64 = 0.05;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScoreError {
    #[error("{what} must be a finite non-negative number, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("cannot compute medians for {language}: no best-rated articles")]
    NoBenchmarkArticles { language: String },
    #[error("invalid benchmarks file: {0}")]
    File(String),
}

fn check_non_negative(what: &'static str, value: f64) -> Result<f64, ScoreError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ScoreError::Negative { what, value })
    }
}

/// Per-language medians of the best-rated articles' features.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianBenchmarks {
    pub language: String,
    /// In [`FEATURE_NAMES`] order.
    pub medians: [f64; 5],
}

impl MedianBenchmarks {
    pub fn new(language: &str, medians: [f64; 5]) -> Result<Self, ScoreError> {
        for m in medians {
            check_non_negative("median", m)?;
        }
        Ok(MedianBenchmarks {
            language: language.to_string(),
            medians,
        })
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median of every feature over `featured`; even counts average the two
/// middle values.
pub fn compute_medians(featured: &[ArticleFeatures], language: &str) -> Result<MedianBenchmarks, ScoreError> {
    if featured.is_empty() {
        return Err(ScoreError::NoBenchmarkArticles {
            language: language.to_string(),
        });
    }
    let mut medians = [0.0; 5];
    let mut column = Vec::with_capacity(featured.len());
    for (i, slot) in medians.iter_mut().enumerate() {
        column.clear();
        column.extend(featured.iter().map(|f| f.values()[i]));
        *slot = median(&mut column);
    }
    MedianBenchmarks::new(language, medians)
}

/// Points in [0, 100] for one feature value against its median. A zero median
/// imposes no requirement and always yields 100.
pub fn normalize_feature(value: f64, median: f64) -> Result<f64, ScoreError> {
    let value = check_non_negative("feature value", value)?;
    let median = check_non_negative("median", median)?;
    Ok(if value >= median || median == 0.0 {
        100.0
    } else {
        100.0 * value / median
    })
}

pub fn compute_nma(features: &ArticleFeatures, bench: &MedianBenchmarks) -> Result<f64, ScoreError> {
    let values = features.values();
    let mut total = 0.0;
    for (value, median) in values.iter().zip(bench.medians) {
        total += normalize_feature(*value, median)?;
    }
    Ok(total / values.len() as f64)
}

/// `nma * (1 - 0.05 * qft)`, clamped to [0, 100].
pub fn penalized_score(nma: f64, qft: u64) -> f64 {
    (nma * (1.0 - QFT_PENALTY * qft as f64)).clamp(0.0, 100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityScore {
    pub page_id: PageId,
    pub nma: f64,
    pub qft: u64,
    pub score: f64,
}

pub fn compute_quality_score(page_id: PageId, nma: f64, qft: u64) -> QualityScore {
    QualityScore {
        page_id,
        nma,
        qft,
        score: penalized_score(nma, qft),
    }
}

/// Full scoring path for one article.
pub fn score_article(features: &ArticleFeatures, bench: &MedianBenchmarks) -> Result<QualityScore, ScoreError> {
    let nma = compute_nma(features, bench)?;
    Ok(compute_quality_score(features.page_id, nma, features.qft))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkEntry {
    length: f64,
    references: f64,
    ref_density: f64,
    images: f64,
    sections: f64,
}

/// Parse a benchmarks file: one table per language with the five medians.
///
/// ```toml
/// [en]
/// length = 41250.0
/// references = 182.0
/// ref_density = 4.4
/// images = 14.0
/// sections = 11.0
/// ```
pub fn parse_benchmarks(text: &str) -> Result<BTreeMap<String, MedianBenchmarks>, ScoreError> {
    let raw: BTreeMap<String, BenchmarkEntry> =
        toml::from_str(text).map_err(|e| ScoreError::File(e.to_string()))?;
    raw.into_iter()
        .map(|(lang, e)| {
            let bench = MedianBenchmarks::new(&lang, [e.length, e.references, e.ref_density, e.images, e.sections])?;
            Ok((lang, bench))
        })
        .collect()
}

pub fn load_benchmarks(path: &Path) -> Result<BTreeMap<String, MedianBenchmarks>, ScoreError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScoreError::File(format!("{}: {e}", path.display())))?;
    parse_benchmarks(&text)
}

/// Render benchmarks in the format [`parse_benchmarks`] reads.
pub fn format_benchmarks<'a>(benches: impl IntoIterator<Item = &'a MedianBenchmarks>) -> String {
    let mut out = String::new();
    for b in benches {
        let _ = writeln!(out, "[{}]", b.language);
        for (name, m) in FEATURE_NAMES.iter().zip(b.medians) {
            let _ = writeln!(out, "{name} = {m:?}");
        }
        out.push('\n');
    }
    out
}
