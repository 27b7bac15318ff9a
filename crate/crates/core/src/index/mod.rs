//! Per-article citation index: incoming wikilinks from main-namespace pages.
//!
//! Counting is split into a pure resolution step ([`LinkResolver`]) and a
//! commutative, associative accumulation ([`CitationCounts`]), so any
//! partition of the link rows can be counted independently and merged.

mod rank;

pub use rank::{top_k_citations, RankedList};

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::dump::{DumpError, LinkRow, LinkTarget, LinkTargetMap, PageRecord};
use crate::title::normalize_title;
use crate::PageId;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate page id {0} in page table")]
    DuplicatePageId(PageId),
    #[error("duplicate title {title:?} in namespace {namespace}")]
    DuplicateTitle { namespace: i32, title: String },
    #[error("link target id {0} is missing from the linktarget table")]
    MissingLinkTarget(u64),
    #[error("normalized pagelinks rows need a linktarget table")]
    NoLinkTargetTable,
    #[error("k must be positive")]
    ZeroK,
    #[error("page {0} is not in the citation index")]
    NotIndexed(PageId),
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error("invalid citation index file at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// How links to redirect pages are credited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedirectMode {
    /// Credit the redirect page itself.
    None,
    /// Credit the redirect's target; double redirects are not chased.
    #[default]
    SingleHop,
}

impl fmt::Display for RedirectMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedirectMode::None => "none",
            RedirectMode::SingleHop => "single-hop",
        })
    }
}

impl FromStr for RedirectMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(RedirectMode::None),
            "single-hop" => Ok(RedirectMode::SingleHop),
            other => Err(format!("unknown redirect mode {other:?} (expected none or single-hop)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleEntry {
    pub title: String,
    pub is_redirect: bool,
}

/// Main-namespace pages of one language edition, keyed both ways.
#[derive(Debug, Clone, Default)]
pub struct PageTable {
    articles: HashMap<PageId, ArticleEntry>,
    by_title: HashMap<String, PageId>,
    /// Pages outside namespace 0 that were seen.
    other_namespaces: u64,
}

impl PageTable {
    /// Keep the namespace-0 records. Duplicate page ids or titles are errors.
    pub fn from_records(records: impl IntoIterator<Item = PageRecord>) -> Result<Self, IndexError> {
        let mut table = PageTable::default();
        for rec in records {
            if rec.namespace == 0 {
                table.insert(rec.page_id, rec.title, rec.is_redirect)?;
            } else {
                table.other_namespaces += 1;
            }
        }
        Ok(table)
    }

    pub fn insert(&mut self, page_id: PageId, title: String, is_redirect: bool) -> Result<(), IndexError> {
        if self.articles.contains_key(&page_id) {
            return Err(IndexError::DuplicatePageId(page_id));
        }
        if self.by_title.contains_key(&title) {
            return Err(IndexError::DuplicateTitle { namespace: 0, title });
        }
        self.by_title.insert(title.clone(), page_id);
        self.articles.insert(page_id, ArticleEntry { title, is_redirect });
        Ok(())
    }

    pub fn get(&self, page_id: PageId) -> Option<&ArticleEntry> {
        self.articles.get(&page_id)
    }

    /// Look up a namespace-0 title in dump form (underscores).
    pub fn lookup(&self, title: &str) -> Option<PageId> {
        self.by_title.get(title).copied()
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn other_namespaces(&self) -> u64 {
        self.other_namespaces
    }

    /// Articles in ascending page id order.
    pub fn iter_sorted(&self) -> Vec<(PageId, &ArticleEntry)> {
        let mut v: Vec<_> = self.articles.iter().map(|(id, e)| (*id, e)).collect();
        v.sort_unstable_by_key(|(id, _)| *id);
        v
    }
}

/// Redirect page to the article it points at, both in namespace 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedirectMap {
    targets: HashMap<PageId, PageId>,
}

impl RedirectMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, redirect: PageId, target: PageId) {
        self.targets.insert(redirect, target);
    }

    pub fn get(&self, redirect: PageId) -> Option<PageId> {
        self.targets.get(&redirect).copied()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Resolve `(redirect page, target title)` pairs against `pages`.
    /// Returns the map and the number of targets that are not namespace-0
    /// pages.
    pub fn from_titles<'a>(
        pages: &PageTable,
        redirects: impl IntoIterator<Item = (PageId, &'a str)>,
    ) -> (Self, u64) {
        let mut map = RedirectMap::new();
        let mut unresolved = 0;
        for (from, target) in redirects {
            match pages.lookup(&normalize_title(target)) {
                Some(to) => map.insert(from, to),
                None => unresolved += 1,
            }
        }
        (map, unresolved)
    }

    pub fn iter_sorted(&self) -> Vec<(PageId, PageId)> {
        let mut v: Vec<_> = self.targets.iter().map(|(a, b)| (*a, *b)).collect();
        v.sort_unstable();
        v
    }
}

/// What happened to one link row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkOutcome {
    Credit(PageId),
    NonArticleSource,
    NonArticleTarget,
    RedLink,
    MissingLinkTarget(u64),
    /// Target is a redirect whose destination could not be resolved.
    UnresolvedRedirect,
}

/// Diagnostics for links that were not credited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexTally {
    pub links_read: u64,
    pub credited: u64,
    pub non_article_source: u64,
    pub non_article_target: u64,
    pub red_links: u64,
    pub missing_link_targets: u64,
    pub unresolved_redirects: u64,
}

impl IndexTally {
    fn record(&mut self, outcome: LinkOutcome) {
        self.links_read += 1;
        match outcome {
            LinkOutcome::Credit(_) => self.credited += 1,
            LinkOutcome::NonArticleSource => self.non_article_source += 1,
            LinkOutcome::NonArticleTarget => self.non_article_target += 1,
            LinkOutcome::RedLink => self.red_links += 1,
            LinkOutcome::MissingLinkTarget(_) => self.missing_link_targets += 1,
            LinkOutcome::UnresolvedRedirect => self.unresolved_redirects += 1,
        }
    }

    pub fn merge(&mut self, other: &IndexTally) {
        self.links_read += other.links_read;
        self.credited += other.credited;
        self.non_article_source += other.non_article_source;
        self.non_article_target += other.non_article_target;
        self.red_links += other.red_links;
        self.missing_link_targets += other.missing_link_targets;
        self.unresolved_redirects += other.unresolved_redirects;
    }
}

#[derive(Debug, Clone, Copy)]
enum Resolved {
    Page(PageId),
    NonArticle,
    Red,
}

/// Maps link rows to the article they credit.
pub struct LinkResolver<'a> {
    pages: &'a PageTable,
    redirects: &'a RedirectMap,
    mode: RedirectMode,
    /// linktarget ids resolved once up front.
    targets: Option<HashMap<u64, Resolved>>,
}

impl<'a> LinkResolver<'a> {
    pub fn new(
        pages: &'a PageTable,
        linktargets: Option<&LinkTargetMap>,
        redirects: &'a RedirectMap,
        mode: RedirectMode,
    ) -> Self {
        let targets = linktargets.map(|lt| {
            lt.iter()
                .map(|(id, (ns, title))| (*id, resolve_title(pages, *ns, title)))
                .collect()
        });
        LinkResolver {
            pages,
            redirects,
            mode,
            targets,
        }
    }

    pub fn resolve(&self, row: &LinkRow) -> LinkOutcome {
        if row.from_namespace != 0 {
            return LinkOutcome::NonArticleSource;
        }
        let resolved = match &row.target {
            LinkTarget::Title { namespace, title } => resolve_title(self.pages, *namespace, title),
            LinkTarget::Id(id) => match self.targets.as_ref().and_then(|t| t.get(id)) {
                Some(r) => *r,
                None => return LinkOutcome::MissingLinkTarget(*id),
            },
        };
        let page = match resolved {
            Resolved::Page(p) => p,
            Resolved::NonArticle => return LinkOutcome::NonArticleTarget,
            Resolved::Red => return LinkOutcome::RedLink,
        };
        if self.mode == RedirectMode::SingleHop && self.pages.get(page).is_some_and(|e| e.is_redirect) {
            return match self.redirects.get(page) {
                Some(target) => LinkOutcome::Credit(target),
                None => LinkOutcome::UnresolvedRedirect,
            };
        }
        LinkOutcome::Credit(page)
    }
}

fn resolve_title(pages: &PageTable, namespace: i32, title: &str) -> Resolved {
    if namespace != 0 {
        return Resolved::NonArticle;
    }
    match pages.lookup(title) {
        Some(p) => Resolved::Page(p),
        None => Resolved::Red,
    }
}

/// Partial citation counts. Merging is commutative and associative, with
/// [`CitationCounts::default`] as identity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationCounts {
    pub counts: HashMap<PageId, u64>,
    pub tally: IndexTally,
    /// First missing linktarget id seen, for strict-mode reporting.
    pub first_missing: Option<u64>,
}

impl CitationCounts {
    pub fn add(&mut self, outcome: LinkOutcome) {
        self.tally.record(outcome);
        match outcome {
            LinkOutcome::Credit(p) => *self.counts.entry(p).or_default() += 1,
            LinkOutcome::MissingLinkTarget(id) => {
                self.first_missing = Some(self.first_missing.map_or(id, |m| m.min(id)));
            }
            _ => {}
        }
    }

    pub fn count_rows(resolver: &LinkResolver<'_>, rows: &[LinkRow]) -> Self {
        let mut acc = CitationCounts::default();
        for row in rows {
            acc.add(resolver.resolve(row));
        }
        acc
    }

    pub fn merge(mut self, other: CitationCounts) -> Self {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self.counts), other.counts)
        } else {
            (other.counts, std::mem::take(&mut self.counts))
        };
        for (p, c) in small {
            *big.entry(p).or_default() += c;
        }
        self.counts = big;
        self.tally.merge(&other.tally);
        self.first_missing = match (self.first_missing, other.first_missing) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }

    /// Data-parallel count of one batch.
    pub fn count_rows_parallel(resolver: &LinkResolver<'_>, rows: &[LinkRow], chunk: usize) -> Self {
        rows.par_chunks(chunk.max(1))
            .map(|c| CitationCounts::count_rows(resolver, c))
            .reduce(CitationCounts::default, CitationCounts::merge)
    }
}

/// Finished index: every namespace-0 page with its incoming-link count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationIndex {
    pub language: String,
    pub generated_from: String,
    pub counts: HashMap<PageId, u64>,
    pub tally: IndexTally,
}

impl CitationIndex {
    /// Close partial counts over `pages`, giving uncited pages a zero.
    pub fn from_counts(language: &str, generated_from: &str, pages: &PageTable, partial: CitationCounts) -> Self {
        let mut counts = partial.counts;
        counts.reserve(pages.len().saturating_sub(counts.len()));
        for id in pages.articles.keys() {
            counts.entry(*id).or_insert(0);
        }
        CitationIndex {
            language: language.to_string(),
            generated_from: generated_from.to_string(),
            counts,
            tally: partial.tally,
        }
    }

    pub fn count(&self, page_id: PageId) -> Option<u64> {
        self.counts.get(&page_id).copied()
    }

    /// All entries, citation count descending then page id ascending.
    pub fn ranked(&self) -> Vec<(PageId, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    /// TSV with header `page_id title citation_count`, in ranked order.
    pub fn write_tsv<W: Write>(&self, pages: &PageTable, mut out: W) -> io::Result<()> {
        writeln!(out, "page_id\ttitle\tcitation_count")?;
        for (p, c) in self.ranked() {
            let title = pages.get(p).map_or("", |e| e.title.as_str());
            writeln!(out, "{p}\t{title}\t{c}")?;
        }
        Ok(())
    }

    /// Read back a file written by [`CitationIndex::write_tsv`].
    pub fn read_tsv<R: BufRead>(language: &str, generated_from: &str, input: R) -> Result<Self, IndexError> {
        let mut counts = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line != "page_id\ttitle\tcitation_count" {
                    return Err(IndexError::Format {
                        line: 1,
                        message: "unexpected header".into(),
                    });
                }
                continue;
            }
            let format = |message: &str| IndexError::Format {
                line: i + 1,
                message: message.to_string(),
            };
            let mut cols = line.split('\t');
            let (Some(id), Some(_), Some(count), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(format("expected 3 columns"));
            };
            let id: PageId = id.parse().map_err(|_| format("bad page_id"))?;
            let count: u64 = count.parse().map_err(|_| format("bad citation_count"))?;
            if counts.insert(id, count).is_some() {
                return Err(format("duplicate page_id"));
            }
        }
        Ok(CitationIndex {
            language: language.to_string(),
            generated_from: generated_from.to_string(),
            counts,
            tally: IndexTally::default(),
        })
    }
}

/// Options for [`build_citation_index`].
#[derive(Debug, Clone, Copy)]
pub struct IndexOptions {
    pub redirect_mode: RedirectMode,
    /// Abort on a linktarget id that is not in the table.
    pub strict: bool,
    /// Rows handed to the counting threads at a time.
    pub batch_size: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            redirect_mode: RedirectMode::SingleHop,
            strict: true,
            batch_size: 64 * 1024,
        }
    }
}

/// Count incoming main-namespace links for every article in `pages`.
///
/// Rows are parsed on a dedicated thread and counted in parallel batches as
/// they arrive, so parsing and counting overlap. The result does not depend
/// on row order or batch size.
pub fn build_citation_index<I>(
    language: &str,
    generated_from: &str,
    rows: I,
    pages: &PageTable,
    linktargets: Option<&LinkTargetMap>,
    redirects: &RedirectMap,
    options: IndexOptions,
) -> Result<CitationIndex, IndexError>
where
    I: IntoIterator<Item = Result<LinkRow, DumpError>>,
    I::IntoIter: Send,
{
    let resolver = LinkResolver::new(pages, linktargets, redirects, options.redirect_mode);
    let batch_size = options.batch_size.max(1);
    let rows = rows.into_iter();
    let (tx, rx) = mpsc::sync_channel::<Vec<LinkRow>>(4);

    let (parsed, counts) = std::thread::scope(|s| {
        let producer = s.spawn(move || -> Result<(), DumpError> {
            let mut batch = Vec::with_capacity(batch_size);
            for row in rows {
                batch.push(row?);
                if batch.len() == batch_size {
                    let full = std::mem::replace(&mut batch, Vec::with_capacity(batch_size));
                    if tx.send(full).is_err() {
                        return Ok(());
                    }
                }
            }
            if !batch.is_empty() {
                let _ = tx.send(batch);
            }
            Ok(())
        });
        let chunk = (batch_size / rayon::current_num_threads().max(1)).max(1024);
        let mut total = CitationCounts::default();
        for batch in rx {
            total = total.merge(CitationCounts::count_rows_parallel(&resolver, &batch, chunk));
        }
        (producer.join().expect("link parser thread panicked"), total)
    });
    parsed?;
    if linktargets.is_none() && counts.first_missing.is_some() {
        return Err(IndexError::NoLinkTargetTable);
    }
    if options.strict {
        if let Some(id) = counts.first_missing {
            return Err(IndexError::MissingLinkTarget(id));
        }
    }
    Ok(CitationIndex::from_counts(language, generated_from, pages, counts))
}
