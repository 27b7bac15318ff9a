//! The seven stages. Each reads its inputs from the dumps or from earlier
//! stages' files and writes its own files; nothing is passed in memory.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{BenchmarkSource, LanguageConfig, PipelineConfig};
use super::io::{parse_col, read_tsv, write_atomic};
use super::matrix::{emit_matrix, write_matrix_csv, write_matrix_tsv, write_matrix_wide, CellRanking};
use super::{PipelineError, Stage};
use crate::dump::{
    open_dump, parse_linktarget_table, parse_page_table, parse_pagelinks_table, parse_pages_articles_xml,
    parse_wikidata_entities, ArticleText, DumpError, PagelinksSchema, ParseMode,
};
use crate::features::{features_of, ArticleFeatures, LanguageLexicon};
use crate::index::{
    build_citation_index, top_k_citations, CitationIndex, IndexError, IndexOptions, PageTable, RankedList,
    RedirectMap,
};
use crate::score::{compute_medians, format_benchmarks, load_benchmarks, penalized_score, score_article};
use crate::title::normalize_title;
use crate::topics::{load_topic_specs, read_membership_tsv, write_membership_tsv, MembershipBuilder};
use crate::PageId;

pub type Tallies = BTreeMap<String, u64>;

/// Output of one stage run, before it is recorded.
pub struct StageRun {
    pub tallies: Tallies,
}

fn tallies<const N: usize>(pairs: [(&str, u64); N]) -> Tallies {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Paths of one language's intermediates.
pub struct LanguageFiles {
    pub pages: PathBuf,
    pub redirects: PathBuf,
    pub citation_index: PathBuf,
    pub features: PathBuf,
    pub benchmarks: PathBuf,
    pub scores: PathBuf,
}

impl LanguageFiles {
    pub fn new(dir: &Path) -> Self {
        LanguageFiles {
            pages: dir.join("pages.tsv"),
            redirects: dir.join("redirects.tsv"),
            citation_index: dir.join("citation_index.tsv"),
            features: dir.join("features.tsv"),
            benchmarks: dir.join("benchmarks.toml"),
            scores: dir.join("scores.tsv"),
        }
    }
}

/// Files written by each stage, used for cache checks and the run report.
pub fn stage_outputs(config: &PipelineConfig, stage: Stage, language: Option<&str>) -> Vec<PathBuf> {
    let out = &config.output_dir;
    if let Some(lang) = language {
        let f = LanguageFiles::new(&config.language_dir(lang));
        return match stage {
            Stage::Ingest => vec![f.pages, f.redirects],
            Stage::Index => vec![f.citation_index],
            Stage::Features => vec![f.features],
            Stage::Score => vec![f.benchmarks, f.scores],
            _ => Vec::new(),
        };
    }
    match stage {
        Stage::Align => vec![out.join("membership.tsv")],
        Stage::Rank => vec![out.join("rankings.tsv")],
        Stage::Report => {
            let mut v = vec![out.join("matrix.tsv"), out.join("matrix.csv")];
            v.extend(config.k_values.iter().map(|k| out.join(format!("matrix_wide_k{k}.tsv"))));
            v
        }
        _ => Vec::new(),
    }
}

/// Parameters that determine a stage's output; a change invalidates the cache.
pub fn stage_params(config: &PipelineConfig, stage: Stage, lang: Option<&LanguageConfig>) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        p.insert(k.to_string(), v);
    };
    let path = |p: &Path| p.display().to_string();
    let languages = || config.languages.iter().map(|l| l.code.as_str()).collect::<Vec<_>>().join(",");
    let ks = || config.k_values.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
    match (stage, lang) {
        (Stage::Ingest, Some(l)) => {
            put("page", path(&l.page));
            put("pages_articles", path(&l.pages_articles));
            put("strict", config.strict.to_string());
        }
        (Stage::Index, Some(l)) => {
            put("pagelinks", path(&l.pagelinks));
            put("linktarget", l.linktarget.as_deref().map(path).unwrap_or_default());
            put("redirect_mode", config.redirect_mode.to_string());
            put("strict", config.strict.to_string());
            put("dump_date", config.dump_date.clone());
        }
        (Stage::Features, Some(l)) => {
            put("pages_articles", path(&l.pages_articles));
            put("lexicon", path(&l.lexicon));
        }
        (Stage::Score, Some(l)) => match &l.benchmarks {
            BenchmarkSource::File(b) => put("benchmarks", path(b)),
            BenchmarkSource::Featured(f) => put("featured", path(f)),
        },
        (Stage::Align, _) => {
            put("wikidata", path(&config.wikidata));
            put("topics", path(&config.topics));
            put("languages", languages());
        }
        (Stage::Rank, _) => {
            put("k_values", ks());
            put("languages", languages());
        }
        (Stage::Report, _) => {
            put("k_values", ks());
            put("languages", languages());
            put("topics", path(&config.topics));
        }
        _ => {}
    }
    p
}

fn mode(config: &PipelineConfig) -> ParseMode {
    if config.strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn open(path: &Path) -> Result<crate::dump::DumpStream, PipelineError> {
    open_dump(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_error(stage: Stage, language: &str, path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Parse {
        stage,
        language: language.to_string(),
        message: format!("{}: {e}", path.display()),
    }
}

fn index_error(stage: Stage, language: &str, path: &Path, e: IndexError) -> PipelineError {
    match e {
        IndexError::NoLinkTargetTable => PipelineError::Config(format!(
            "{language}: {} uses the normalized schema but no linktarget file is configured",
            path.display()
        )),
        IndexError::NotIndexed(_) => PipelineError::Integrity(format!("{language}: {e}")),
        other => parse_error(stage, language, path, other),
    }
}

const PAGES_HEADER: [&str; 4] = ["page_id", "title", "is_redirect", "length"];
const REDIRECTS_HEADER: [&str; 2] = ["from_page_id", "to_page_id"];
const FEATURES_HEADER: [&str; 7] = ["page_id", "length", "references", "ref_density", "images", "sections", "qft"];
const SCORES_HEADER: [&str; 4] = ["page_id", "nma", "qft", "score"];
const RANKINGS_HEADER: [&str; 6] = ["language", "topic_id", "k", "rank", "page_id", "citation_count"];

/// Main-namespace pages from `pages.tsv`.
fn load_pages(path: &Path) -> Result<PageTable, PipelineError> {
    let rows = read_tsv(path, &PAGES_HEADER, |c| {
        let id: PageId = parse_col(c[0], "page_id")?;
        let redirect = match c[2] {
            "0" => false,
            "1" => true,
            other => return Err(format!("bad is_redirect {other:?}")),
        };
        Ok((id, c[1].to_string(), redirect))
    })?;
    let mut table = PageTable::default();
    for (id, title, redirect) in rows {
        table
            .insert(id, title, redirect)
            .map_err(|e| PipelineError::Integrity(format!("{}: {e}", path.display())))?;
    }
    Ok(table)
}

fn load_redirects(path: &Path) -> Result<RedirectMap, PipelineError> {
    let rows = read_tsv(path, &REDIRECTS_HEADER, |c| {
        Ok((parse_col::<PageId>(c[0], "from_page_id")?, parse_col::<PageId>(c[1], "to_page_id")?))
    })?;
    let mut map = RedirectMap::new();
    for (from, to) in rows {
        map.insert(from, to);
    }
    Ok(map)
}

fn load_features(path: &Path) -> Result<Vec<ArticleFeatures>, PipelineError> {
    read_tsv(path, &FEATURES_HEADER, |c| {
        Ok(ArticleFeatures::from_counts(
            parse_col(c[0], "page_id")?,
            parse_col(c[1], "length")?,
            parse_col(c[2], "references")?,
            parse_col(c[4], "images")?,
            parse_col(c[5], "sections")?,
            parse_col(c[6], "qft")?,
        ))
    })
}

/// Full-precision scores, recomputed from the stored NMA and flaw count so the
/// 2-decimal `score` column never feeds back into averages.
fn load_scores(path: &Path) -> Result<HashMap<PageId, f64>, PipelineError> {
    let rows = read_tsv(path, &SCORES_HEADER, |c| {
        let id: PageId = parse_col(c[0], "page_id")?;
        let nma: f64 = parse_col(c[1], "nma")?;
        let qft: u64 = parse_col(c[2], "qft")?;
        Ok((id, penalized_score(nma, qft)))
    })?;
    Ok(rows.into_iter().collect())
}

pub fn ingest(config: &PipelineConfig, lang: &LanguageConfig) -> Result<StageRun, PipelineError> {
    let code = &lang.code;
    let mut rows = parse_page_table(open(&lang.page)?, mode(config));
    let mut records = Vec::new();
    let mut lengths = HashMap::new();
    let mut pages_read = 0;
    for rec in rows.by_ref() {
        let rec = rec.map_err(|e| parse_error(Stage::Ingest, code, &lang.page, e))?;
        pages_read += 1;
        if rec.namespace == 0 {
            lengths.insert(rec.page_id, rec.wikitext_bytes);
        }
        records.push(rec);
    }
    let malformed_page_rows = rows.malformed();
    let pages = PageTable::from_records(records).map_err(|e| parse_error(Stage::Ingest, code, &lang.page, e))?;

    // redirect targets only appear in the XML export
    let mut xml = parse_pages_articles_xml(open(&lang.pages_articles)?);
    let mut targets: Vec<(PageId, String)> = Vec::new();
    for article in xml.by_ref() {
        let article = article.map_err(|e| parse_error(Stage::Ingest, code, &lang.pages_articles, e))?;
        if article.namespace == 0 {
            if let Some(target) = article.redirect {
                targets.push((article.page_id, target));
            }
        }
    }
    let (redirects, unresolved) = RedirectMap::from_titles(&pages, targets.iter().map(|(p, t)| (*p, t.as_str())));

    let files = LanguageFiles::new(&config.language_dir(code));
    let sorted = pages.iter_sorted();
    write_atomic(&files.pages, |w| {
        writeln!(w, "{}", PAGES_HEADER.join("\t"))?;
        for (id, entry) in &sorted {
            // page_len is kept for reference; features measure the XML text
            let len = lengths.get(id).copied().unwrap_or(0);
            writeln!(w, "{id}\t{}\t{}\t{len}", entry.title, u8::from(entry.is_redirect))?;
        }
        Ok(())
    })?;
    write_atomic(&files.redirects, |w| {
        writeln!(w, "{}", REDIRECTS_HEADER.join("\t"))?;
        for (from, to) in redirects.iter_sorted() {
            writeln!(w, "{from}\t{to}")?;
        }
        Ok(())
    })?;
    let redirect_pages = sorted.iter().filter(|(_, e)| e.is_redirect).count() as u64;
    Ok(StageRun {
        tallies: tallies([
            ("pages_read", pages_read),
            ("articles", pages.len() as u64),
            ("other_namespace_pages", pages.other_namespaces()),
            ("redirect_pages", redirect_pages),
            ("redirects_resolved", redirects.len() as u64),
            ("redirects_unresolved", unresolved),
            ("malformed_rows", malformed_page_rows),
            ("xml_pages_without_text", xml.missing_text()),
        ]),
    })
}

pub fn index(config: &PipelineConfig, lang: &LanguageConfig) -> Result<StageRun, PipelineError> {
    let code = &lang.code;
    let files = LanguageFiles::new(&config.language_dir(code));
    let pages = load_pages(&files.pages)?;
    let redirects = load_redirects(&files.redirects)?;
    let linktargets = match &lang.linktarget {
        Some(path) => Some(
            parse_linktarget_table(open(path)?, mode(config)).map_err(|e| parse_error(Stage::Index, code, path, e))?,
        ),
        None => None,
    };
    let mut rows = parse_pagelinks_table(open(&lang.pagelinks)?, PagelinksSchema::Auto, mode(config));
    let options = IndexOptions {
        redirect_mode: config.redirect_mode,
        strict: config.strict,
        ..IndexOptions::default()
    };
    let index = build_citation_index(
        code,
        &config.dump_date,
        rows.by_ref(),
        &pages,
        linktargets.as_ref(),
        &redirects,
        options,
    )
    .map_err(|e| index_error(Stage::Index, code, &lang.pagelinks, e))?;
    write_atomic(&files.citation_index, |w| index.write_tsv(&pages, w))?;
    let t = index.tally;
    Ok(StageRun {
        tallies: tallies([
            ("links_read", t.links_read),
            ("links_credited", t.credited),
            ("non_article_source", t.non_article_source),
            ("non_article_target", t.non_article_target),
            ("red_links", t.red_links),
            ("missing_link_targets", t.missing_link_targets),
            ("unresolved_redirects", t.unresolved_redirects),
            ("malformed_rows", rows.malformed()),
            ("indexed_articles", index.counts.len() as u64),
        ]),
    })
}

pub fn features(config: &PipelineConfig, lang: &LanguageConfig) -> Result<StageRun, PipelineError> {
    const BATCH: usize = 512;
    let code = &lang.code;
    let files = LanguageFiles::new(&config.language_dir(code));
    let pages = load_pages(&files.pages)?;
    let lexicon = LanguageLexicon::load(&lang.lexicon).map_err(|e| PipelineError::Config(e.to_string()))?;

    let mut measured: Vec<ArticleFeatures> = Vec::new();
    let (mut redirects, mut other_ns, mut unknown) = (0, 0, 0);
    let mut batch: Vec<ArticleText> = Vec::with_capacity(BATCH);
    let flush = |batch: &mut Vec<ArticleText>, out: &mut Vec<ArticleFeatures>| {
        out.par_extend(batch.par_iter().map(|a| features_of(a.page_id, &a.wikitext, &lexicon)));
        batch.clear();
    };
    let mut xml = parse_pages_articles_xml(open(&lang.pages_articles)?);
    for article in xml.by_ref() {
        let article = article.map_err(|e| parse_error(Stage::Features, code, &lang.pages_articles, e))?;
        if article.namespace != 0 {
            other_ns += 1;
            continue;
        }
        match pages.get(article.page_id) {
            None => unknown += 1,
            Some(e) if e.is_redirect || article.redirect.is_some() => redirects += 1,
            Some(_) => {
                batch.push(article);
                if batch.len() == BATCH {
                    flush(&mut batch, &mut measured);
                }
            }
        }
    }
    flush(&mut batch, &mut measured);
    measured.sort_by_key(|f| f.page_id);
    if let Some(w) = measured.windows(2).find(|w| w[0].page_id == w[1].page_id) {
        return Err(parse_error(
            Stage::Features,
            code,
            &lang.pages_articles,
            format!("page {} appears twice", w[0].page_id),
        ));
    }
    write_atomic(&files.features, |w| {
        writeln!(w, "{}", FEATURES_HEADER.join("\t"))?;
        for f in &measured {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                f.page_id, f.length, f.references, f.ref_density, f.images, f.sections, f.qft
            )?;
        }
        Ok(())
    })?;
    Ok(StageRun {
        tallies: tallies([
            ("articles_measured", measured.len() as u64),
            ("redirects_skipped", redirects),
            ("other_namespace_pages", other_ns),
            ("pages_not_in_page_table", unknown),
            ("pages_without_text", xml.missing_text()),
        ]),
    })
}

/// Titles listed in a featured-articles file: one per line, `#` comments.
pub fn read_featured_titles(path: &Path) -> Result<Vec<String>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_title)
        .collect())
}

pub fn score(config: &PipelineConfig, lang: &LanguageConfig) -> Result<StageRun, PipelineError> {
    let code = &lang.code;
    let files = LanguageFiles::new(&config.language_dir(code));
    let features = load_features(&files.features)?;
    let mut t = Tallies::new();
    let bench = match &lang.benchmarks {
        BenchmarkSource::File(path) => load_benchmarks(path)
            .map_err(|e| PipelineError::Config(e.to_string()))?
            .remove(code.as_str())
            .ok_or_else(|| PipelineError::Config(format!("{}: no benchmarks for {code}", path.display())))?,
        BenchmarkSource::Featured(path) => {
            let pages = load_pages(&files.pages)?;
            let by_id: HashMap<PageId, &ArticleFeatures> = features.iter().map(|f| (f.page_id, f)).collect();
            let titles = read_featured_titles(path)?;
            let mut chosen: BTreeMap<PageId, ArticleFeatures> = BTreeMap::new();
            for title in &titles {
                match pages.lookup(title).and_then(|p| by_id.get(&p)) {
                    Some(f) => {
                        chosen.insert(f.page_id, (*f).clone());
                    }
                    None => log::warn!("{code}: featured title {title:?} is not a measured article"),
                }
            }
            t.insert("featured_listed".into(), titles.len() as u64);
            t.insert("featured_used".into(), chosen.len() as u64);
            let chosen: Vec<_> = chosen.into_values().collect();
            compute_medians(&chosen, code).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        }
    };
    let scores = features
        .iter()
        .map(|f| score_article(f, &bench))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::Integrity(format!("{code}: {e}")))?;
    write_atomic(&files.benchmarks, |w| w.write_all(format_benchmarks([&bench]).as_bytes()))?;
    write_atomic(&files.scores, |w| {
        writeln!(w, "{}", SCORES_HEADER.join("\t"))?;
        for s in &scores {
            writeln!(w, "{}\t{}\t{}\t{:.2}", s.page_id, s.nma, s.qft, s.score)?;
        }
        Ok(())
    })?;
    t.insert("articles_scored".into(), scores.len() as u64);
    t.insert("articles_with_flaws".into(), scores.iter().filter(|s| s.qft > 0).count() as u64);
    Ok(StageRun { tallies: t })
}

pub fn align(config: &PipelineConfig) -> Result<StageRun, PipelineError> {
    let specs = load_topic_specs(&config.topics).map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut tables = BTreeMap::new();
    for lang in &config.languages {
        let pages = load_pages(&LanguageFiles::new(&config.language_dir(&lang.code)).pages)?;
        tables.insert(lang.code.clone(), pages);
    }
    let mut reader = parse_wikidata_entities(open(&config.wikidata)?, &[] as &[&str]);
    let mut builder = MembershipBuilder::new();
    for item in reader.by_ref() {
        let item = item.map_err(|e: DumpError| parse_error(Stage::Align, "*", &config.wikidata, e))?;
        builder.add_item(&item, &specs, &tables);
    }
    let (memberships, t) = builder.finish();
    write_atomic(&config.output_dir.join("membership.tsv"), |w| write_membership_tsv(&memberships, w))?;
    let members: usize = memberships.iter().map(|m| m.page_ids.len()).sum();
    Ok(StageRun {
        tallies: tallies([
            ("items_read", t.items_read),
            ("items_matched", t.items_matched),
            ("unresolved_sitelinks", t.unresolved_sitelinks),
            ("redirect_sitelinks", t.redirect_sitelinks),
            ("malformed_lines", reader.malformed()),
            ("non_item_entities", reader.non_items()),
            ("memberships", members as u64),
        ]),
    })
}

pub fn rank(config: &PipelineConfig) -> Result<StageRun, PipelineError> {
    let membership_path = config.output_dir.join("membership.tsv");
    if !membership_path.exists() {
        return Err(PipelineError::MissingInput(membership_path));
    }
    let file = std::fs::File::open(&membership_path).map_err(|e| PipelineError::Io {
        path: membership_path.clone(),
        source: e,
    })?;
    let memberships = read_membership_tsv(std::io::BufReader::new(file)).map_err(|e| PipelineError::Intermediate {
        path: membership_path.clone(),
        line: 0,
        message: e.to_string(),
    })?;

    let per_language: Vec<(String, Vec<(String, RankedList)>)> = config
        .languages
        .par_iter()
        .map(|lang| {
            let path = LanguageFiles::new(&config.language_dir(&lang.code)).citation_index;
            let file = std::fs::File::open(&path).map_err(|_| PipelineError::MissingInput(path.clone()))?;
            let index = CitationIndex::read_tsv(&lang.code, &config.dump_date, std::io::BufReader::new(file)).map_err(
                |e| PipelineError::Intermediate {
                    path: path.clone(),
                    line: 0,
                    message: e.to_string(),
                },
            )?;
            let mut lists = Vec::new();
            for m in memberships.iter().filter(|m| m.language == lang.code) {
                for &k in &config.k_values {
                    let ranked = top_k_citations(&index, k, &m.page_ids)
                        .map_err(|e| index_error(Stage::Rank, &lang.code, &path, e))?;
                    lists.push((m.topic_id.clone(), ranked));
                }
            }
            Ok((lang.code.clone(), lists))
        })
        .collect::<Result<_, PipelineError>>()?;

    let (mut cells, mut shortfall) = (0, 0);
    write_atomic(&config.output_dir.join("rankings.tsv"), |w| {
        writeln!(w, "{}", RANKINGS_HEADER.join("\t"))?;
        for (lang, lists) in &per_language {
            for (topic, ranked) in lists {
                cells += 1;
                shortfall += ranked.shortfall as u64;
                for (i, (page, count)) in ranked.entries.iter().enumerate() {
                    writeln!(w, "{lang}\t{topic}\t{}\t{}\t{page}\t{count}", ranked.k, i + 1)?;
                }
            }
        }
        Ok(())
    })?;
    Ok(StageRun {
        tallies: tallies([("ranked_cells", cells), ("total_shortfall", shortfall)]),
    })
}

type RankingKey = (String, String, usize);

fn load_rankings(path: &Path) -> Result<BTreeMap<RankingKey, RankedList>, PipelineError> {
    let rows = read_tsv(path, &RANKINGS_HEADER, |c| {
        Ok((
            c[0].to_string(),
            c[1].to_string(),
            parse_col::<usize>(c[2], "k")?,
            parse_col::<usize>(c[3], "rank")?,
            parse_col::<PageId>(c[4], "page_id")?,
            parse_col::<u64>(c[5], "citation_count")?,
        ))
    })?;
    let mut lists: BTreeMap<RankingKey, RankedList> = BTreeMap::new();
    for (lang, topic, k, rank, page, count) in rows {
        let list = lists.entry((lang, topic, k)).or_insert_with(|| RankedList {
            k,
            entries: Vec::new(),
            shortfall: 0,
        });
        if rank != list.entries.len() + 1 {
            return Err(PipelineError::Intermediate {
                path: path.to_path_buf(),
                line: 0,
                message: format!("ranks out of order at page {page}"),
            });
        }
        list.entries.push((page, count));
    }
    for list in lists.values_mut() {
        list.shortfall = list.k.saturating_sub(list.entries.len());
    }
    Ok(lists)
}

pub fn report(config: &PipelineConfig) -> Result<StageRun, PipelineError> {
    let out = &config.output_dir;
    let specs = load_topic_specs(&config.topics).map_err(|e| PipelineError::Config(e.to_string()))?;
    let names: BTreeMap<String, String> = specs.into_iter().map(|s| (s.topic_id, s.display_name)).collect();
    let rankings = load_rankings(&out.join("rankings.tsv"))?;
    let languages: BTreeSet<&str> = config.languages.iter().map(|l| l.code.as_str()).collect();
    let ks: BTreeSet<usize> = config.k_values.iter().copied().collect();

    let mut scores = HashMap::new();
    for lang in &languages {
        let path = LanguageFiles::new(&config.language_dir(lang)).scores;
        scores.insert(lang.to_string(), load_scores(&path)?);
    }
    let cells: Vec<CellRanking<'_>> = rankings
        .iter()
        .filter(|((lang, _, k), _)| languages.contains(lang.as_str()) && ks.contains(k))
        .map(|((lang, topic, _), ranked)| CellRanking {
            language: lang,
            topic_id: topic,
            ranked,
        })
        .collect();
    let rows = emit_matrix(&cells, &scores)?;
    write_atomic(&out.join("matrix.tsv"), |w| write_matrix_tsv(&rows, w))?;
    write_atomic(&out.join("matrix.csv"), |w| write_matrix_csv(&rows, &names, w))?;
    let language_list: Vec<String> = languages.iter().map(|l| l.to_string()).collect();
    for &k in &config.k_values {
        write_atomic(&out.join(format!("matrix_wide_k{k}.tsv")), |w| {
            write_matrix_wide(&rows, k, &language_list, w)
        })?;
    }
    Ok(StageRun {
        tallies: tallies([("matrix_rows", rows.len() as u64)]),
    })
}
