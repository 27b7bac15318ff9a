//! Citation index on a generated 10,000-page, 200,000-link wiki, compared
//! against a counter that works from the generator's ground truth.

use std::collections::{BTreeMap, HashMap};
use std::io::Cursor;
use std::time::Instant;

use citequal::dump::{parse_linktarget_table, parse_page_table, parse_pagelinks_table, ParseMode, PagelinksSchema};
use citequal::index::{build_citation_index, IndexOptions, PageTable, RedirectMap, RedirectMode};
use citequal::PageId;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};

use crate::{ensure, Outcome};

const PAGES: usize = 10_000;
const LINKS: usize = 200_000;

struct Page {
    id: u64,
    ns: i32,
    title: String,
    is_redirect: bool,
    /// Index into the page list, or a title that names no page.
    redirect_to: Option<Result<usize, String>>,
}

#[derive(Clone)]
enum Target {
    Page(usize),
    Red(String),
}

struct Link {
    from: u64,
    from_ns: i32,
    target: Target,
}

struct Wiki {
    pages: Vec<Page>,
    links: Vec<Link>,
}

impl Wiki {
    fn target_key(&self, t: &Target) -> (i32, String) {
        match t {
            Target::Page(i) => (self.pages[*i].ns, self.pages[*i].title.clone()),
            Target::Red(title) => (0, title.clone()),
        }
    }
}

fn generate(seed: u64) -> Wiki {
    let mut rng = StdRng::seed_from_u64(seed);
    let other_ns = [1, 2, 4, 10, 14];
    let mut pages = Vec::with_capacity(PAGES);
    let mut article_titles: Vec<String> = Vec::new();
    for i in 0..PAGES {
        let ns = if rng.random_bool(0.85) { 0 } else { other_ns[rng.random_range(0..other_ns.len())] };
        let title = if ns != 0 && !article_titles.is_empty() && rng.random_bool(0.3) {
            // same title as an article, different namespace
            article_titles[rng.random_range(0..article_titles.len())].clone()
        } else {
            match i % 97 {
                0 => format!("O'Brien_{i}"),
                1 => format!("Back\\slash_{i}"),
                2 => format!("Zürich_{i}"),
                3 => format!("Say_\"hi\"_{i}"),
                _ => format!("Page_{i}"),
            }
        };
        if ns == 0 {
            article_titles.push(title.clone());
        }
        pages.push(Page {
            id: 7 + 3 * i as u64,
            ns,
            title,
            is_redirect: rng.random_bool(0.05),
            redirect_to: None,
        });
    }
    let articles: Vec<usize> = (0..PAGES).filter(|&i| pages[i].ns == 0).collect();
    for (i, page) in pages.iter_mut().enumerate() {
        if page.is_redirect && page.ns == 0 {
            page.redirect_to = Some(if rng.random_bool(0.1) {
                Err(format!("Nowhere_{i}"))
            } else {
                // may land on another redirect: a double redirect
                Ok(articles[rng.random_range(0..articles.len())])
            });
        }
    }
    let non_articles: Vec<usize> = (0..PAGES).filter(|&i| pages[i].ns != 0).collect();
    let mut links = Vec::with_capacity(LINKS);
    for j in 0..LINKS {
        let (from, from_ns) = if rng.random_bool(0.01) {
            // source page absent from the page dump
            (1_000_000 + j as u64, 0)
        } else {
            let p = &pages[rng.random_range(0..PAGES)];
            (p.id, p.ns)
        };
        let roll = rng.random_range(0..100);
        let target = if roll < 2 {
            Target::Red(format!("Missing_{}", rng.random_range(0..5000)))
        } else if roll < 12 {
            Target::Page(non_articles[rng.random_range(0..non_articles.len())])
        } else {
            Target::Page(articles[rng.random_range(0..articles.len())])
        };
        links.push(Link { from, from_ns, target });
    }
    Wiki { pages, links }
}

/// Expected counts, one entry per article, from the generator's own
/// page indices rather than from title lookups.
fn oracle(wiki: &Wiki, mode: RedirectMode) -> HashMap<PageId, u64> {
    let mut counts: HashMap<PageId, u64> =
        wiki.pages.iter().filter(|p| p.ns == 0).map(|p| (PageId(p.id), 0)).collect();
    for link in &wiki.links {
        if link.from_ns != 0 {
            continue;
        }
        let Target::Page(t) = link.target else { continue };
        let page = &wiki.pages[t];
        if page.ns != 0 {
            continue;
        }
        let credited = if mode == RedirectMode::SingleHop && page.is_redirect {
            match &page.redirect_to {
                Some(Ok(to)) => wiki.pages[*to].id,
                _ => continue,
            }
        } else {
            page.id
        };
        *counts.get_mut(&PageId(credited)).expect("article") += 1;
    }
    counts
}

fn sql_string(s: &str) -> String {
    let mut out = String::from("'");
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '"' => out.push_str("\\\""),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// `INSERT` statements of up to 500 tuples each, behind a little DDL noise.
fn inserts(table: &str, tuples: impl Iterator<Item = String>) -> Vec<u8> {
    let mut out = format!("-- generated\nDROP TABLE IF EXISTS `{table}`;\nCREATE TABLE `{table}` (x int);\n");
    let tuples: Vec<String> = tuples.collect();
    for chunk in tuples.chunks(500) {
        out.push_str(&format!("INSERT INTO `{table}` VALUES {};\n", chunk.join(",")));
    }
    out.push_str("UNLOCK TABLES;\n");
    out.into_bytes()
}

fn page_sql(wiki: &Wiki, order: &[usize], with_restrictions: bool) -> Vec<u8> {
    inserts(
        "page",
        order.iter().map(|&i| {
            let p = &wiki.pages[i];
            let redirect = p.is_redirect as u8;
            if with_restrictions {
                format!(
                    "({},{},{},'',{redirect},0,0.123,'20240801000000',NULL,{},{},'wikitext',NULL)",
                    p.id,
                    p.ns,
                    sql_string(&p.title),
                    p.id * 10,
                    100 + i
                )
            } else {
                format!(
                    "({},{},{},{redirect},0,0.123,'20240801000000','20240801000000',{},{},'wikitext',NULL)",
                    p.id,
                    p.ns,
                    sql_string(&p.title),
                    p.id * 10,
                    100 + i
                )
            }
        }),
    )
}

fn legacy_pagelinks_sql(wiki: &Wiki) -> Vec<u8> {
    inserts(
        "pagelinks",
        wiki.links.iter().map(|l| {
            let (ns, title) = wiki.target_key(&l.target);
            format!("({},{ns},{},{})", l.from, sql_string(&title), l.from_ns)
        }),
    )
}

/// Linktarget ids are handed out in shuffled order so they carry no hint of
/// page ids.
fn normalized_sql(wiki: &Wiki, rng: &mut StdRng) -> (Vec<u8>, Vec<u8>) {
    let mut keys: Vec<(i32, String)> = wiki.links.iter().map(|l| wiki.target_key(&l.target)).collect();
    keys.sort();
    keys.dedup();
    keys.shuffle(rng);
    let ids: BTreeMap<(i32, String), u64> = keys.iter().cloned().zip((1..).map(|i| i * 5 + 2)).collect();
    let linktarget = inserts(
        "linktarget",
        ids.iter().map(|((ns, title), id)| format!("({id},{ns},{})", sql_string(title))),
    );
    let pagelinks = inserts(
        "pagelinks",
        wiki.links
            .iter()
            .map(|l| format!("({},{},{})", l.from, l.from_ns, ids[&wiki.target_key(&l.target)])),
    );
    (linktarget, pagelinks)
}

fn redirect_titles(wiki: &Wiki) -> Vec<(PageId, String)> {
    wiki.pages
        .iter()
        .filter_map(|p| {
            let to = match p.redirect_to.as_ref()? {
                Ok(i) => wiki.pages[*i].title.clone(),
                Err(missing) => missing.clone(),
            };
            // redirect elements carry display titles
            Some((PageId(p.id), to.replace('_', " ")))
        })
        .collect()
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let wiki = generate(20_240_801);
    let mut rng = StdRng::seed_from_u64(7);
    let mut order: Vec<usize> = (0..PAGES).collect();
    order.shuffle(&mut rng);

    let legacy_pages = page_sql(&wiki, &order, false);
    let normalized_pages = page_sql(&wiki, &order, true);
    let legacy_links = legacy_pagelinks_sql(&wiki);
    let (linktarget, normalized_links) = normalized_sql(&wiki, &mut rng);
    let redirects = redirect_titles(&wiki);
    let red_links = wiki
        .links
        .iter()
        .filter(|l| l.from_ns == 0 && matches!(l.target, Target::Red(_)))
        .count() as u64;

    let mut checked = 0;
    for (schema, page_bytes) in [("legacy", &legacy_pages), ("normalized", &normalized_pages)] {
        let records = parse_page_table(Cursor::new(page_bytes.as_slice()), ParseMode::Strict)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{schema} page table: {e}"))?;
        ensure!(records.len() == PAGES, "{schema}: parsed {} page rows", records.len());
        let pages = PageTable::from_records(records).map_err(|e| e.to_string())?;
        let (redirect_map, _) = RedirectMap::from_titles(&pages, redirects.iter().map(|(p, t)| (*p, t.as_str())));
        let targets = if schema == "normalized" {
            Some(parse_linktarget_table(Cursor::new(linktarget.as_slice()), ParseMode::Strict).map_err(|e| e.to_string())?)
        } else {
            None
        };
        for mode in [RedirectMode::None, RedirectMode::SingleHop] {
            let links = if schema == "normalized" { &normalized_links } else { &legacy_links };
            let rows = parse_pagelinks_table(Cursor::new(links.as_slice()), PagelinksSchema::Auto, ParseMode::Strict);
            let options = IndexOptions {
                redirect_mode: mode,
                strict: true,
                batch_size: 8192,
            };
            let index = build_citation_index("xx", "generated", rows, &pages, targets.as_ref(), &redirect_map, options)
                .map_err(|e| format!("{schema}/{mode}: {e}"))?;
            let want = oracle(&wiki, mode);
            ensure!(index.counts.len() == want.len(), "{schema}/{mode}: {} pages indexed, expected {}", index.counts.len(), want.len());
            let mut diffs: Vec<_> = want
                .iter()
                .filter(|(p, c)| index.count(**p) != Some(**c))
                .map(|(p, c)| (*p, *c, index.count(*p)))
                .collect();
            diffs.sort();
            ensure!(
                diffs.is_empty(),
                "{schema}/{mode}: {} pages differ, first (page, expected, got) {:?}",
                diffs.len(),
                diffs[0]
            );
            ensure!(index.tally.links_read == LINKS as u64, "{schema}/{mode}: read {} links", index.tally.links_read);
            ensure!(index.tally.red_links == red_links, "{schema}/{mode}: {} red links, expected {red_links}", index.tally.red_links);
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 30.0, "took {elapsed:.1}s, limit 30s");
    Ok(format!("{checked} schema/mode combinations exact over {PAGES} pages, {LINKS} links"))
}
