//! Parse and count ten million gzip-compressed pagelinks rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use citequal::dump::{open_dump, parse_pagelinks_table, LinkTargetMap, PagelinksSchema, ParseMode};
use citequal::index::{build_citation_index, IndexOptions, PageTable, RedirectMap};
use citequal::PageId;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::rngs::SmallRng;
use rand::{RngExt, SeedableRng};

use crate::{ensure, Outcome};

const ROWS: u64 = 10_000_000;
const PAGES: u64 = 200_000;
/// Linktargets beyond the articles point at other namespaces.
const TARGETS: u64 = 220_000;
const TUPLES_PER_INSERT: u64 = 10_000;
const TIME_LIMIT: f64 = 60.0;
const MEMORY_LIMIT_KB: u64 = 1024 * 1024;

fn status_kb(field: &str) -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with(field))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Reset the kernel's peak-RSS counter so it covers only what follows.
fn reset_peak_rss() -> bool {
    std::fs::write("/proc/self/clear_refs", "5").is_ok()
}

pub fn run() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = tmp.path().join("pagelinks.sql.gz");

    // generation is not timed
    let mut rng = SmallRng::seed_from_u64(10_000_000);
    let mut expected_credited = 0u64;
    {
        let file = File::create(&path).map_err(|e| e.to_string())?;
        let mut w = GzEncoder::new(BufWriter::with_capacity(1 << 20, file), Compression::fast());
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "-- synthetic pagelinks\nCREATE TABLE `pagelinks` (x int);")?;
            for row in 0..ROWS {
                if row % TUPLES_PER_INSERT == 0 {
                    write!(w, "INSERT INTO `pagelinks` VALUES ")?;
                }
                let from = rng.random_range(1..=PAGES);
                let from_ns = if rng.random_bool(0.9) { 0 } else { 1 };
                let target = rng.random_range(1..=TARGETS);
                if from_ns == 0 && target <= PAGES {
                    expected_credited += 1;
                }
                let sep = if row % TUPLES_PER_INSERT == TUPLES_PER_INSERT - 1 || row == ROWS - 1 { ";\n" } else { "," };
                write!(w, "({from},{from_ns},{target}){sep}")?;
            }
            Ok(())
        };
        emit().map_err(|e| e.to_string())?;
        w.finish().and_then(|mut f| f.flush()).map_err(|e| e.to_string())?;
    }
    let compressed = std::fs::metadata(&path).map_err(|e| e.to_string())?.len();

    let mut pages = PageTable::default();
    let mut targets = LinkTargetMap::with_capacity(TARGETS as usize);
    for id in 1..=TARGETS {
        let title = format!("T{id}");
        if id <= PAGES {
            pages.insert(PageId(id), title.clone(), false).map_err(|e| e.to_string())?;
            targets.insert(id, (0, title));
        } else {
            targets.insert(id, (4, title));
        }
    }
    let redirects = RedirectMap::new();

    let peak_reset = reset_peak_rss();
    let start = Instant::now();
    let stream = open_dump(&path).map_err(|e| e.to_string())?;
    let rows = parse_pagelinks_table(stream, PagelinksSchema::Normalized, ParseMode::Strict);
    let index = build_citation_index("xx", "synthetic", rows, &pages, Some(&targets), &redirects, IndexOptions::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let peak_kb = status_kb("VmHWM:").ok_or("cannot read VmHWM from /proc/self/status")?;

    ensure!(index.tally.links_read == ROWS, "read {} rows, expected {ROWS}", index.tally.links_read);
    let credited: u64 = index.counts.values().sum();
    ensure!(credited == expected_credited, "credited {credited} links, expected {expected_credited}");
    ensure!(elapsed < TIME_LIMIT, "parse and count took {elapsed:.1}s, limit {TIME_LIMIT}s");
    ensure!(
        peak_kb < MEMORY_LIMIT_KB,
        "peak RSS {} MiB, limit 1024 MiB",
        peak_kb / 1024
    );
    Ok(format!(
        "{ROWS} rows ({} MiB gzip) in {elapsed:.1}s = {:.2}M rows/s on {} threads; peak RSS {} MiB{}",
        compressed >> 20,
        ROWS as f64 / elapsed / 1e6,
        rayon::current_num_threads(),
        peak_kb / 1024,
        if peak_reset { "" } else { " (whole process)" }
    ))
}
