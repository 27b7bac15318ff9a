//! End-to-end orchestration: per-language ingest, index, features and score
//! stages (languages in parallel), then the cross-language align, rank and
//! report stages.
//!
//! Every stage persists its outputs plus a `diagnostics/<stage>.json` file.
//! A stage is skipped as cached when all its outputs exist and the recorded
//! parameters match the current configuration; when a stage does run, every
//! later stage of the same invocation runs too.
//!
//! Output tree:
//!
//! ```text
//! <output_dir>/
//!   <lang>/pages.tsv  redirects.tsv  citation_index.tsv  features.tsv
//!          benchmarks.toml  scores.tsv  diagnostics/*.json
//!   membership.tsv  rankings.tsv  matrix.tsv  matrix.csv  matrix_wide_k<K>.tsv
//!   diagnostics/*.json
//! ```

mod config;
mod io;
mod matrix;
mod stages;

pub use config::{validate_k_values, BenchmarkSource, ConfigOverrides, LanguageConfig, PipelineConfig, DEFAULT_K_VALUES};
pub use io::{write_atomic, StageDiagnostics};
pub use matrix::{emit_matrix, write_matrix_csv, write_matrix_tsv, write_matrix_wide, CellRanking, MatrixRow};
pub use stages::{read_featured_titles, stage_outputs, LanguageFiles, Tallies};

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Index,
    Features,
    Score,
    Align,
    Rank,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Index,
        Stage::Features,
        Stage::Score,
        Stage::Align,
        Stage::Rank,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Index => "index",
            Stage::Features => "features",
            Stage::Score => "score",
            Stage::Align => "align",
            Stage::Rank => "rank",
            Stage::Report => "report",
        }
    }

    /// Runs once per language rather than once per pipeline.
    pub fn per_language(self) -> bool {
        matches!(self, Stage::Ingest | Stage::Index | Stage::Features | Stage::Score)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing input {}: run the earlier stages first", .0.display())]
    MissingInput(PathBuf),
    #[error("{stage} stage failed for {language}: {message}")]
    Parse {
        stage: Stage,
        language: String,
        message: String,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed intermediate {} at line {line}: {message}", path.display())]
    Intermediate { path: PathBuf, line: usize, message: String },
    #[error("integrity error: {0}")]
    Integrity(String),
}

impl PipelineError {
    /// 1 configuration, 2 parse or input failure, 3 integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput(_) => 1,
            PipelineError::Parse { .. } | PipelineError::Io { .. } | PipelineError::Intermediate { .. } => 2,
            PipelineError::Integrity(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub language: Option<String>,
    pub status: StageStatus,
    pub outputs: Vec<PathBuf>,
    pub tallies: Tallies,
}

/// What a run did; printed by the command-line tool, not written to the
/// output tree (which would break byte-identical reruns).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub stages: Vec<StageOutcome>,
}

impl RunReport {
    pub fn outputs(&self) -> impl Iterator<Item = &Path> {
        self.stages.iter().flat_map(|s| s.outputs.iter().map(PathBuf::as_path))
    }

    /// Sum of one tally across all stages and languages.
    pub fn total(&self, tally: &str) -> u64 {
        self.stages.iter().filter_map(|s| s.tallies.get(tally)).sum()
    }

    pub fn all_cached(&self) -> bool {
        self.stages.iter().all(|s| s.status == StageStatus::Cached)
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stages {
            let status = match s.status {
                StageStatus::Ran => "ran",
                StageStatus::Cached => "cached",
            };
            let scope = s.language.as_deref().unwrap_or("all");
            write!(f, "{:<9}{:<7}{status}", s.stage.name(), scope)?;
            for (k, v) in &s.tallies {
                write!(f, " {k}={v}")?;
            }
            writeln!(f)?;
            for o in &s.outputs {
                writeln!(f, "    {}", o.display())?;
            }
        }
        Ok(())
    }
}

fn diagnostics_path(config: &PipelineConfig, stage: Stage, language: Option<&str>) -> PathBuf {
    let dir = match language {
        Some(l) => config.language_dir(l),
        None => config.output_dir.clone(),
    };
    dir.join("diagnostics").join(format!("{}.json", stage.name()))
}

/// Run one stage for one language (or globally), unless it is cached and
/// `force` is off.
fn run_stage(
    config: &PipelineConfig,
    stage: Stage,
    lang: Option<&LanguageConfig>,
    force: bool,
) -> Result<StageOutcome, PipelineError> {
    let code = lang.map(|l| l.code.as_str());
    let outputs = stages::stage_outputs(config, stage, code);
    let params = stages::stage_params(config, stage, lang);
    let diag_path = diagnostics_path(config, stage, code);
    if !force && outputs.iter().all(|p| p.exists()) {
        if let Some(previous) = StageDiagnostics::read(&diag_path).filter(|d| d.params == params) {
            log::info!("{stage} {}: cached", code.unwrap_or("all"));
            return Ok(StageOutcome {
                stage,
                language: code.map(str::to_string),
                status: StageStatus::Cached,
                outputs,
                tallies: previous.tallies,
            });
        }
    }
    log::info!("{stage} {}: running", code.unwrap_or("all"));
    let run = match (stage, lang) {
        (Stage::Ingest, Some(l)) => stages::ingest(config, l)?,
        (Stage::Index, Some(l)) => stages::index(config, l)?,
        (Stage::Features, Some(l)) => stages::features(config, l)?,
        (Stage::Score, Some(l)) => stages::score(config, l)?,
        (Stage::Align, None) => stages::align(config)?,
        (Stage::Rank, None) => stages::rank(config)?,
        (Stage::Report, None) => stages::report(config)?,
        _ => unreachable!("stage scope mismatch"),
    };
    StageDiagnostics {
        stage: stage.name().to_string(),
        language: code.map(str::to_string),
        params,
        tallies: run.tallies.clone(),
    }
    .write(&diag_path)?;
    Ok(StageOutcome {
        stage,
        language: code.map(str::to_string),
        status: StageStatus::Ran,
        outputs,
        tallies: run.tallies,
    })
}

/// Run `stages` (in pipeline order) over every configured language.
pub fn run_stages(config: &PipelineConfig, stages: &[Stage], force: bool) -> Result<RunReport, PipelineError> {
    let mut wanted: Vec<Stage> = stages.to_vec();
    wanted.sort();
    wanted.dedup();
    let (local, global): (Vec<Stage>, Vec<Stage>) = wanted.into_iter().partition(|s| s.per_language());

    let per_language: Vec<Result<Vec<StageOutcome>, PipelineError>> = config
        .languages
        .par_iter()
        .map(|lang| {
            let mut outcomes = Vec::new();
            let mut cascade = force;
            for &stage in &local {
                let outcome = run_stage(config, stage, Some(lang), cascade)?;
                cascade |= outcome.status == StageStatus::Ran;
                outcomes.push(outcome);
            }
            Ok(outcomes)
        })
        .collect();

    let mut report = RunReport::default();
    let mut cascade = force;
    // errors surface in language order, independent of thread timing
    for result in per_language {
        let outcomes = result?;
        cascade |= outcomes.iter().any(|o| o.status == StageStatus::Ran);
        report.stages.extend(outcomes);
    }
    for stage in global {
        let outcome = run_stage(config, stage, None, cascade)?;
        cascade |= outcome.status == StageStatus::Ran;
        report.stages.push(outcome);
    }
    Ok(report)
}

/// Every stage, end to end.
pub fn run_pipeline(config: &PipelineConfig, force: bool) -> Result<RunReport, PipelineError> {
    run_stages(config, &Stage::ALL, force)
}
