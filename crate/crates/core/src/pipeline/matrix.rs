//! The average-quality matrix: one cell per (language, topic, K).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use super::PipelineError;
use crate::index::RankedList;
use crate::PageId;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub language: String,
    pub topic_id: String,
    pub k: usize,
    /// Articles actually averaged; below `k` when the topic is small.
    pub n_articles: usize,
    pub avg_quality: f64,
}

/// Rankings for one (language, topic) at one K.
#[derive(Debug, Clone)]
pub struct CellRanking<'a> {
    pub language: &'a str,
    pub topic_id: &'a str,
    pub ranked: &'a RankedList,
}

/// Average each ranking's scores. `scores` maps language to page scores.
/// Rows come back sorted by (topic, language, k).
pub fn emit_matrix(
    rankings: &[CellRanking<'_>],
    scores: &HashMap<String, HashMap<PageId, f64>>,
) -> Result<Vec<MatrixRow>, PipelineError> {
    let mut rows = Vec::with_capacity(rankings.len());
    for cell in rankings {
        let lang_scores = scores.get(cell.language);
        let mut total = 0.0;
        for page in cell.ranked.page_ids() {
            let score = lang_scores.and_then(|s| s.get(&page)).ok_or_else(|| {
                PipelineError::Integrity(format!(
                    "page {page} ranked for {}/{} has no quality score",
                    cell.language, cell.topic_id
                ))
            })?;
            total += score;
        }
        let n = cell.ranked.entries.len();
        if n == 0 {
            continue;
        }
        rows.push(MatrixRow {
            language: cell.language.to_string(),
            topic_id: cell.topic_id.to_string(),
            k: cell.ranked.k,
            n_articles: n,
            avg_quality: total / n as f64,
        });
    }
    rows.sort_by(|a, b| {
        (&a.topic_id, &a.language, a.k).cmp(&(&b.topic_id, &b.language, b.k))
    });
    Ok(rows)
}

/// Canonical long form.
pub fn write_matrix_tsv<W: Write>(rows: &[MatrixRow], mut out: W) -> io::Result<()> {
    writeln!(out, "language\ttopic_id\tk\tn_articles\tavg_quality")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}\t{:.2}", r.language, r.topic_id, r.k, r.n_articles, r.avg_quality)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long form for plotting tools, with topic display names.
pub fn write_matrix_csv<W: Write>(rows: &[MatrixRow], names: &BTreeMap<String, String>, mut out: W) -> io::Result<()> {
    writeln!(out, "topic_id,topic,language,k,n_articles,avg_quality")?;
    for r in rows {
        let name = names.get(&r.topic_id).map_or(r.topic_id.as_str(), String::as_str);
        writeln!(
            out,
            "{},{},{},{},{},{:.2}",
            csv_field(&r.topic_id),
            csv_field(name),
            csv_field(&r.language),
            r.k,
            r.n_articles,
            r.avg_quality
        )?;
    }
    Ok(())
}

/// Topics by languages for one K; empty cells where a topic has no articles.
pub fn write_matrix_wide<W: Write>(rows: &[MatrixRow], k: usize, languages: &[String], mut out: W) -> io::Result<()> {
    let cells: HashMap<(&str, &str), f64> = rows
        .iter()
        .filter(|r| r.k == k)
        .map(|r| ((r.topic_id.as_str(), r.language.as_str()), r.avg_quality))
        .collect();
    let topics: BTreeSet<&str> = rows.iter().filter(|r| r.k == k).map(|r| r.topic_id.as_str()).collect();
    write!(out, "topic_id")?;
    for lang in languages {
        write!(out, "\t{lang}")?;
    }
    writeln!(out)?;
    for topic in topics {
        write!(out, "{topic}")?;
        for lang in languages {
            match cells.get(&(topic, lang.as_str())) {
                Some(v) => write!(out, "\t{v:.2}")?,
                None => write!(out, "\t")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
