use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use crate::title::normalize_template_name;

/// Per-language vocabulary the counters need: local names of the File
/// namespace and the quality-flaw template inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageLexicon {
    pub language: String,
    /// Lower-cased, spaces for underscores.
    pub file_namespace_aliases: BTreeSet<String>,
    pub template_namespace_aliases: BTreeSet<String>,
    /// Normalized template names (see [`normalize_template_name`]).
    pub qft_template_names: BTreeSet<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid lexicon {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    language: String,
    file_namespace_aliases: Vec<String>,
    #[serde(default = "default_template_aliases")]
    template_namespace_aliases: Vec<String>,
    #[serde(default)]
    qft_templates: Vec<String>,
}

fn default_template_aliases() -> Vec<String> {
    vec!["Template".into()]
}

fn alias_key(alias: &str) -> String {
    alias.trim().replace('_', " ").to_lowercase()
}

impl LanguageLexicon {
    pub fn new<A, Q>(language: &str, file_aliases: A, qft_templates: Q) -> Self
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        Q: IntoIterator,
        Q::Item: AsRef<str>,
    {
        LanguageLexicon {
            language: language.to_string(),
            file_namespace_aliases: file_aliases.into_iter().map(|a| alias_key(a.as_ref())).collect(),
            template_namespace_aliases: BTreeSet::from(["template".to_string()]),
            qft_template_names: qft_templates
                .into_iter()
                .map(|t| normalize_template_name(t.as_ref()))
                .collect(),
        }
    }

    pub fn with_template_aliases<A>(mut self, aliases: A) -> Self
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        self.template_namespace_aliases = aliases.into_iter().map(|a| alias_key(a.as_ref())).collect();
        self
    }

    /// English defaults: `File`/`Image` and no flaw templates.
    pub fn english() -> Self {
        LanguageLexicon::new("en", ["File", "Image"], Vec::<String>::new())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, LexiconError> {
        let invalid = |message: String| LexiconError::Invalid {
            path: origin.to_string(),
            message,
        };
        let file: LexiconFile = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if file.language.trim().is_empty() {
            return Err(invalid("empty language code".into()));
        }
        if file.file_namespace_aliases.iter().all(|a| a.trim().is_empty()) {
            return Err(invalid("file_namespace_aliases must not be empty".into()));
        }
        Ok(LanguageLexicon::new(&file.language, file.file_namespace_aliases, file.qft_templates)
            .with_template_aliases(file.template_namespace_aliases))
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub(crate) fn is_file_alias(&self, candidate: &str) -> bool {
        self.file_namespace_aliases.contains(&alias_key(candidate))
    }

    /// Strip a `Template:` prefix (any configured alias) from a raw name.
    pub(crate) fn strip_template_prefix<'a>(&self, name: &'a str) -> &'a str {
        if let Some((prefix, rest)) = name.split_once(':') {
            if self.template_namespace_aliases.contains(&alias_key(prefix)) {
                return rest;
            }
        }
        name
    }
}
