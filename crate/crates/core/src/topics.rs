//! Topic membership through Wikidata instance-of (P31) values.
//!
//! A topic is a set of QIDs; an item belongs to the topic when any of its P31
//! values is in the set. There is no subclass expansion: a spec file that
//! wants subclasses must list them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::Deserialize;

use crate::dump::{Qid, WikidataItem};
use crate::index::PageTable;
use crate::title::sitelink_title;
use crate::PageId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSpec {
    pub topic_id: String,
    pub display_name: String,
    pub qids: BTreeSet<Qid>,
}

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("cannot read topic file {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invalid topic file: {0}")]
    Invalid(String),
    #[error("invalid membership file at line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopicFile {
    #[serde(rename = "topic")]
    topics: Vec<TopicEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopicEntry {
    id: String,
    name: String,
    qids: Vec<String>,
}

/// Parse a topic file:
///
/// ```toml
/// [[topic]]
/// id = "city"
/// name = "City"
/// qids = ["Q515", "Q1549591"]
/// ```
pub fn parse_topic_specs(text: &str) -> Result<Vec<TopicSpec>, TopicError> {
    let file: TopicFile = toml::from_str(text).map_err(|e| TopicError::Invalid(e.to_string()))?;
    let mut seen = BTreeSet::new();
    let mut specs = Vec::with_capacity(file.topics.len());
    for entry in file.topics {
        let id = entry.id.trim().to_string();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(TopicError::Invalid(format!("bad topic id {:?}", entry.id)));
        }
        if !seen.insert(id.clone()) {
            return Err(TopicError::Invalid(format!("duplicate topic id {id:?}")));
        }
        let qids = entry
            .qids
            .iter()
            .map(|q| q.parse::<Qid>().map_err(|e| TopicError::Invalid(format!("topic {id}: {e}"))))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if qids.is_empty() {
            return Err(TopicError::Invalid(format!("topic {id} has no QIDs")));
        }
        specs.push(TopicSpec {
            topic_id: id,
            display_name: entry.name,
            qids,
        });
    }
    Ok(specs)
}

pub fn load_topic_specs(path: &Path) -> Result<Vec<TopicSpec>, TopicError> {
    let text = std::fs::read_to_string(path).map_err(|source| TopicError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_topic_specs(&text)
}

/// Topics whose QID set intersects the item's P31 values.
pub fn match_topics<'a>(item: &WikidataItem, specs: &'a [TopicSpec]) -> BTreeSet<&'a str> {
    specs
        .iter()
        .filter(|s| !s.qids.is_disjoint(&item.p31_values))
        .map(|s| s.topic_id.as_str())
        .collect()
}

/// Language code of a Wikipedia sitelink key: `enwiki` -> `en`,
/// `zh_yuewiki` -> `zh-yue`.
pub fn sitelink_language(site: &str) -> Option<String> {
    site.strip_suffix("wiki")
        .filter(|code| !code.is_empty())
        .map(|code| code.replace('_', "-"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AlignTally {
    pub items_read: u64,
    pub items_matched: u64,
    /// Sitelinks in a configured language whose title is not an article.
    pub unresolved_sitelinks: u64,
    /// Sitelinks that land on a redirect page (not scored, so not members).
    pub redirect_sitelinks: u64,
}

impl AlignTally {
    pub fn merge(&mut self, other: &AlignTally) {
        self.items_read += other.items_read;
        self.items_matched += other.items_matched;
        self.unresolved_sitelinks += other.unresolved_sitelinks;
        self.redirect_sitelinks += other.redirect_sitelinks;
    }
}

/// Article set for one (language, topic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicMembership {
    pub language: String,
    pub topic_id: String,
    pub page_ids: BTreeSet<PageId>,
}

/// Accumulates memberships item by item. Two builders merge by set union,
/// so items can be split across workers in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MembershipBuilder {
    sets: BTreeMap<(String, String), BTreeSet<PageId>>,
    pub tally: AlignTally,
}

impl MembershipBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_item(&mut self, item: &WikidataItem, specs: &[TopicSpec], pages: &BTreeMap<String, PageTable>) {
        self.tally.items_read += 1;
        let topics = match_topics(item, specs);
        if topics.is_empty() {
            return;
        }
        self.tally.items_matched += 1;
        for (site, title) in &item.sitelinks {
            let Some(lang) = sitelink_language(site) else { continue };
            let Some(table) = pages.get(&lang) else { continue };
            let Some(page) = table.lookup(&sitelink_title(title)) else {
                self.tally.unresolved_sitelinks += 1;
                continue;
            };
            if table.get(page).is_some_and(|e| e.is_redirect) {
                self.tally.redirect_sitelinks += 1;
                continue;
            }
            for topic in &topics {
                self.sets
                    .entry((lang.clone(), topic.to_string()))
                    .or_default()
                    .insert(page);
            }
        }
    }

    pub fn merge(mut self, other: MembershipBuilder) -> Self {
        for (key, pages) in other.sets {
            self.sets.entry(key).or_default().extend(pages);
        }
        self.tally.merge(&other.tally);
        self
    }

    /// Memberships sorted by (language, topic).
    pub fn finish(self) -> (Vec<TopicMembership>, AlignTally) {
        let memberships = self
            .sets
            .into_iter()
            .map(|((language, topic_id), page_ids)| TopicMembership {
                language,
                topic_id,
                page_ids,
            })
            .collect();
        (memberships, self.tally)
    }
}

/// Join items against topic specs and per-language page tables.
pub fn build_topic_membership<'a>(
    items: impl IntoIterator<Item = &'a WikidataItem>,
    specs: &[TopicSpec],
    pages: &BTreeMap<String, PageTable>,
) -> (Vec<TopicMembership>, AlignTally) {
    let mut builder = MembershipBuilder::new();
    for item in items {
        builder.add_item(item, specs, pages);
    }
    builder.finish()
}

/// TSV with header `language topic_id page_id`, sorted by all three columns.
pub fn write_membership_tsv<W: Write>(memberships: &[TopicMembership], mut out: W) -> io::Result<()> {
    let mut rows: Vec<(&str, &str, PageId)> = memberships
        .iter()
        .flat_map(|m| m.page_ids.iter().map(move |p| (m.language.as_str(), m.topic_id.as_str(), *p)))
        .collect();
    rows.sort_unstable();
    writeln!(out, "language\ttopic_id\tpage_id")?;
    for (lang, topic, page) in rows {
        writeln!(out, "{lang}\t{topic}\t{page}")?;
    }
    Ok(())
}

pub fn read_membership_tsv<R: BufRead>(input: R) -> Result<Vec<TopicMembership>, TopicError> {
    let mut sets: BTreeMap<(String, String), BTreeSet<PageId>> = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let format = |message: String| TopicError::Format { line: i + 1, message };
        let line = line.map_err(|e| format(e.to_string()))?;
        if i == 0 {
            if line != "language\ttopic_id\tpage_id" {
                return Err(format("unexpected header".into()));
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [lang, topic, page] = cols[..] else {
            return Err(format("expected 3 columns".into()));
        };
        let page: PageId = page.parse().map_err(|_| format(format!("bad page_id {page:?}")))?;
        sets.entry((lang.to_string(), topic.to_string())).or_default().insert(page);
    }
    Ok(sets
        .into_iter()
        .map(|((language, topic_id), page_ids)| TopicMembership {
            language,
            topic_id,
            page_ids,
        })
        .collect())
}

/// Index memberships by (language, topic).
pub fn membership_map(memberships: &[TopicMembership]) -> HashMap<(&str, &str), &BTreeSet<PageId>> {
    memberships
        .iter()
        .map(|m| ((m.language.as_str(), m.topic_id.as_str()), &m.page_ids))
        .collect()
}
