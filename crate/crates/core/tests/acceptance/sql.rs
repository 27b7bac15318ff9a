//! SQL dump parser on a fixture corpus with escapes, NULLs, multi-tuple
//! statements and DDL noise, plus truncation in strict mode.

use std::io::{Cursor, Write};

use citequal::dump::{maybe_gunzip, parse_sql_insert_stream, DumpError, ParseMode, SqlValue};
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::{ensure, fixture_dir, Outcome};

fn int(v: i64) -> SqlValue {
    SqlValue::Int(v)
}

fn float(v: f64) -> SqlValue {
    SqlValue::Float(v)
}

fn text(s: &str) -> SqlValue {
    SqlValue::Text(s.as_bytes().to_vec())
}

/// Tuples of `conformance.sql`, unescaped by hand.
fn expected() -> Vec<Vec<SqlValue>> {
    vec![
        vec![int(1), int(0), text("Earth"), SqlValue::Null, float(0.5)],
        vec![int(2), int(0), text("O'Brien"), text("it's"), int(1)],
        vec![int(3), int(4), text("a\\b"), text("back\\\\slash"), float(-2.25)],
        vec![int(4), int(0), text("Semi;colon"), text("paren (x),(y)"), float(1000.0)],
        vec![int(5), int(-1), text("Say \"hi\""), text("line\nbreak\ttab"), float(0.0)],
        vec![int(6), int(0), text(""), text(""), int(0)],
        vec![int(7), int(2), text("Zażółć_gęślą"), text("NULL"), float(6.02214)],
        vec![int(8), int(0), text("x"), text("nul\0byte"), SqlValue::Null],
        vec![int(9), int(0), text("Other_table"), text("multi\nline literal"), int(12)],
    ]
}

fn parse_all(bytes: &[u8]) -> Result<Vec<Vec<SqlValue>>, DumpError> {
    let stream = maybe_gunzip(Cursor::new(bytes.to_vec()))?;
    parse_sql_insert_stream(stream, None, ParseMode::Strict)
        .map(|r| r.map(|row| row.values))
        .collect()
}

pub fn run() -> Outcome {
    let path = fixture_dir("sql").join("conformance.sql");
    let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let want = expected();

    let got = parse_all(&bytes).map_err(|e| format!("plain corpus: {e}"))?;
    ensure!(got == want, "plain corpus parsed to {got:?}");

    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(&bytes).map_err(|e| e.to_string())?;
    let gz = enc.finish().map_err(|e| e.to_string())?;
    let got = parse_all(&gz).map_err(|e| format!("gzip corpus: {e}"))?;
    ensure!(got == want, "gzip corpus differs from plain");

    ensure!(parse_all(b"").map_err(|e| e.to_string())?.is_empty(), "empty stream should yield no tuples");

    // cut inside a tuple, a string, an escape and between tuples
    let text = std::str::from_utf8(&bytes).map_err(|e| e.to_string())?;
    let cuts = [
        text.find("(3,4,").expect("tuple 3") + 3,
        text.find("'Semi").expect("tuple 4") + 3,
        text.find("O\\'").expect("escape") + 2,
        text.find("1e3),").expect("tuple 4 end") + 5,
        text.find("multi\nline").expect("multiline") + 6,
    ];
    for cut in cuts {
        match parse_all(&bytes[..cut]) {
            Err(DumpError::Truncated { .. }) => {}
            other => return Err(format!("cut at byte {cut}: expected a truncation error, got {other:?}")),
        }
    }
    // a truncated gzip member is also a truncation, never a silent short read
    match parse_all(&gz[..gz.len() / 2]) {
        Err(DumpError::Truncated { .. } | DumpError::Io(_)) => {}
        other => return Err(format!("half a gzip stream: expected an error, got {other:?}")),
    }
    Ok(format!("{} tuples exact (plain and gzip); {} truncation points rejected", want.len(), cuts.len() + 1))
}
