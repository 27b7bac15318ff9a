//! End-to-end runs over the two-language mini-wiki fixture.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use citequal::pipeline::{run_pipeline, ConfigOverrides, PipelineConfig};

use crate::{ensure, fixture_dir, Outcome};

fn config(out: &Path, k_values: Option<Vec<usize>>) -> Result<PipelineConfig, String> {
    let dir = fixture_dir("miniwiki");
    let text = std::fs::read_to_string(dir.join("config.toml")).map_err(|e| e.to_string())?;
    let overrides = ConfigOverrides {
        k_values,
        ..ConfigOverrides::default()
    };
    let mut config = PipelineConfig::from_toml_str(&text, &dir, &overrides).map_err(|e| e.to_string())?;
    config.output_dir = out.to_path_buf();
    Ok(config)
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path)?);
            }
        }
        Ok(())
    }
    let mut files = BTreeMap::new();
    walk(root, root, &mut files).map_err(|e| e.to_string())?;
    Ok(files)
}

fn compare_trees(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>, what: &str) -> Result<(), String> {
    let names_a: BTreeSet<_> = a.keys().collect();
    let names_b: BTreeSet<_> = b.keys().collect();
    ensure!(names_a == names_b, "{what}: file sets differ: {:?}", names_a.symmetric_difference(&names_b).collect::<Vec<_>>());
    for (name, bytes) in a {
        ensure!(&b[name] == bytes, "{what}: {name} differs");
    }
    Ok(())
}

type Cell = (String, String);

/// `(language, topic) -> k -> ranked page ids` from rankings.tsv.
fn read_rankings(path: &Path) -> Result<BTreeMap<Cell, BTreeMap<usize, BTreeSet<u64>>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    ensure!(header == "language\ttopic_id\tk\trank\tpage_id\tcitation_count", "unexpected rankings header {header:?}");
    let mut cells: BTreeMap<Cell, BTreeMap<usize, BTreeSet<u64>>> = BTreeMap::new();
    for line in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        ensure!(cols.len() == 6, "bad rankings row {line:?}");
        let k: usize = cols[2].parse().map_err(|_| format!("bad k in {line:?}"))?;
        let page: u64 = cols[4].parse().map_err(|_| format!("bad page_id in {line:?}"))?;
        cells
            .entry((cols[0].to_string(), cols[1].to_string()))
            .or_default()
            .entry(k)
            .or_default()
            .insert(page);
    }
    Ok(cells)
}

pub fn run_monotone_and_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("out");
    let ks = vec![10, 25, 100];
    let cfg = config(&out, Some(ks.clone()))?;

    run_pipeline(&cfg, false).map_err(|e| format!("first run: {e}"))?;
    let first = snapshot(&out)?;

    let cells = read_rankings(&out.join("rankings.tsv"))?;
    ensure!(!cells.is_empty(), "no rankings produced");
    for ((lang, topic), by_k) in &cells {
        for pair in ks.windows(2) {
            let small = by_k.get(&pair[0]).cloned().unwrap_or_default();
            let large = by_k.get(&pair[1]).cloned().unwrap_or_default();
            ensure!(
                small.is_subset(&large),
                "{lang}/{topic}: top-{} not contained in top-{}",
                pair[0],
                pair[1]
            );
            ensure!(small.len() <= pair[0], "{lang}/{topic}: top-{} has {} pages", pair[0], small.len());
        }
    }

    // a second invocation over the same tree is a no-op
    let report = run_pipeline(&cfg, false).map_err(|e| format!("second run: {e}"))?;
    ensure!(report.all_cached(), "second run recomputed stages");
    compare_trees(&first, &snapshot(&out)?, "cached rerun")?;

    // and a forced one recomputes everything to the same bytes
    run_pipeline(&cfg, true).map_err(|e| format!("forced run: {e}"))?;
    compare_trees(&first, &snapshot(&out)?, "forced rerun")?;

    // so does a fresh tree
    let other = tmp.path().join("fresh");
    run_pipeline(&config(&other, Some(ks))?, false).map_err(|e| format!("fresh run: {e}"))?;
    compare_trees(&first, &snapshot(&other)?, "fresh tree")?;

    Ok(format!(
        "{} (language, topic) cells nested across K 10/25/100; {} files identical over cached, forced and fresh runs",
        cells.len(),
        first.len()
    ))
}

pub fn run_end_to_end() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("out");
    let cfg = config(&out, None)?;
    run_pipeline(&cfg, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let got = std::fs::read_to_string(out.join("matrix.tsv")).map_err(|e| e.to_string())?;
    let want = std::fs::read_to_string(fixture_dir("miniwiki").join("expected_matrix.tsv")).map_err(|e| e.to_string())?;
    let got_rows: Vec<&str> = got.lines().collect();
    let want_rows: Vec<&str> = want.lines().collect();
    ensure!(got_rows.len() == want_rows.len(), "{} matrix rows, expected {}", got_rows.len(), want_rows.len());
    let wrong: Vec<String> = got_rows
        .iter()
        .zip(&want_rows)
        .filter(|(g, w)| g != w)
        .map(|(g, w)| format!("got {g:?} expected {w:?}"))
        .collect();
    ensure!(wrong.is_empty(), "{} cells differ: {}", wrong.len(), wrong.join("; "));
    ensure!(elapsed < 10.0, "took {elapsed:.2}s, limit 10s");
    Ok(format!("{} cells equal the hand computation", want_rows.len() - 1))
}
