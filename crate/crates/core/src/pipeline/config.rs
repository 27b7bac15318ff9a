use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::PipelineError;
use crate::index::RedirectMode;

pub const DEFAULT_K_VALUES: [usize; 3] = [10, 25, 100];

/// Where a language's median benchmarks come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BenchmarkSource {
    /// A benchmarks file with a table for this language.
    File(PathBuf),
    /// A list of best-rated article titles, one per line; medians are
    /// computed from their features.
    Featured(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageConfig {
    pub code: String,
    pub page: PathBuf,
    pub pagelinks: PathBuf,
    pub linktarget: Option<PathBuf>,
    pub pages_articles: PathBuf,
    pub lexicon: PathBuf,
    pub benchmarks: BenchmarkSource,
}

/// Validated pipeline configuration. Relative paths in the file are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub wikidata: PathBuf,
    pub topics: PathBuf,
    pub k_values: Vec<usize>,
    pub redirect_mode: RedirectMode,
    pub strict: bool,
    pub dump_date: String,
    /// Sorted by language code.
    pub languages: Vec<LanguageConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_dir: PathBuf,
    wikidata: PathBuf,
    topics: PathBuf,
    #[serde(default)]
    k_values: Option<Vec<usize>>,
    #[serde(default)]
    redirect_mode: Option<String>,
    #[serde(default = "default_strict")]
    strict: bool,
    #[serde(default)]
    dump_date: String,
    languages: BTreeMap<String, RawLanguage>,
}

fn default_strict() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLanguage {
    page: PathBuf,
    pagelinks: PathBuf,
    linktarget: Option<PathBuf>,
    pages_articles: PathBuf,
    lexicon: PathBuf,
    benchmarks: Option<PathBuf>,
    featured: Option<PathBuf>,
}

/// Command-line adjustments applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub strict: Option<bool>,
    pub languages: Option<Vec<String>>,
    pub k_values: Option<Vec<usize>>,
}

fn config_error(message: impl Into<String>) -> PipelineError {
    PipelineError::Config(message.into())
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::load_with(path, &ConfigOverrides::default())
    }

    pub fn load_with(path: &Path, overrides: &ConfigOverrides) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base, overrides)
    }

    pub fn from_toml_str(text: &str, base: &Path, overrides: &ConfigOverrides) -> Result<Self, PipelineError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_error(format!("invalid config: {e}")))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        let k_values = overrides
            .k_values
            .clone()
            .or(raw.k_values)
            .unwrap_or_else(|| DEFAULT_K_VALUES.to_vec());
        validate_k_values(&k_values)?;

        let redirect_mode = match raw.redirect_mode.as_deref() {
            None => RedirectMode::default(),
            Some(s) => s.parse().map_err(config_error)?,
        };

        let mut languages = Vec::new();
        for (code, lang) in raw.languages {
            if let Some(wanted) = &overrides.languages {
                if !wanted.contains(&code) {
                    continue;
                }
            }
            let benchmarks = match (lang.benchmarks, lang.featured) {
                (Some(b), None) => BenchmarkSource::File(resolve(&b)),
                (None, Some(f)) => BenchmarkSource::Featured(resolve(&f)),
                _ => {
                    return Err(config_error(format!(
                        "language {code}: set exactly one of `benchmarks` or `featured`"
                    )))
                }
            };
            languages.push(LanguageConfig {
                page: resolve(&lang.page),
                pagelinks: resolve(&lang.pagelinks),
                linktarget: lang.linktarget.as_deref().map(resolve),
                pages_articles: resolve(&lang.pages_articles),
                lexicon: resolve(&lang.lexicon),
                benchmarks,
                code,
            });
        }
        if let Some(wanted) = &overrides.languages {
            for code in wanted {
                if !languages.iter().any(|l| &l.code == code) {
                    return Err(config_error(format!("language {code} is not configured")));
                }
            }
        }
        if languages.is_empty() {
            return Err(config_error("no languages configured"));
        }

        let config = PipelineConfig {
            output_dir: resolve(&raw.output_dir),
            wikidata: resolve(&raw.wikidata),
            topics: resolve(&raw.topics),
            k_values,
            redirect_mode,
            strict: overrides.strict.unwrap_or(raw.strict),
            dump_date: raw.dump_date,
            languages,
        };
        config.check_inputs()?;
        Ok(config)
    }

    /// Every input file must be readable before any work starts.
    pub fn check_inputs(&self) -> Result<(), PipelineError> {
        let mut inputs: Vec<(&str, &Path)> = vec![("wikidata", &self.wikidata), ("topics", &self.topics)];
        for l in &self.languages {
            inputs.push(("page", &l.page));
            inputs.push(("pagelinks", &l.pagelinks));
            if let Some(lt) = &l.linktarget {
                inputs.push(("linktarget", lt));
            }
            inputs.push(("pages_articles", &l.pages_articles));
            inputs.push(("lexicon", &l.lexicon));
            inputs.push(match &l.benchmarks {
                BenchmarkSource::File(p) => ("benchmarks", p.as_path()),
                BenchmarkSource::Featured(p) => ("featured", p.as_path()),
            });
        }
        for (what, path) in inputs {
            File::open(path).map_err(|e| config_error(format!("{what} file {}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn language_dir(&self, code: &str) -> PathBuf {
        self.output_dir.join(code)
    }
}

pub fn validate_k_values(k_values: &[usize]) -> Result<(), PipelineError> {
    if k_values.is_empty() {
        return Err(config_error("k_values must not be empty"));
    }
    if k_values[0] == 0 {
        return Err(config_error("k_values must be positive"));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_error("k_values must be strictly increasing"));
    }
    Ok(())
}
