//! Streaming readers for MediaWiki SQL table dumps, pages-articles XML
//! exports and the Wikidata JSON entity dump.
//!
//! Every reader is a single sequential pass over a [`BufRead`]; none of them
//! buffers more than one statement, page or entity line at a time. Inputs may
//! be gzip-compressed: [`open_dump`] and [`maybe_gunzip`] sniff the magic bytes
//! and layer a decoder transparently.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use thiserror::Error;

pub mod sql;
pub mod tables;
pub mod wikidata;
pub mod xml;

pub use sql::{parse_sql_insert_stream, Column, ColumnKind, SqlRow, SqlRows, SqlValue};
pub use tables::{
    parse_linktarget_table, parse_page_table, parse_pagelinks_table, LinkRow, LinkTarget,
    LinkTargetMap, LinkTargetRecord, PageId, PageRecord, PagelinksSchema, TableRows,
};
pub use wikidata::{parse_wikidata_entities, Qid, WikidataItem, WikidataReader};
pub use xml::{parse_pages_articles_xml, ArticleText, PagesArticlesReader};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
const READ_BUFFER: usize = 256 * 1024;

/// Errors raised by the dump readers.
///
/// Byte offsets refer to the decompressed stream.
#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("schema error at byte {offset}: {message}")]
    Schema { offset: u64, message: String },
    #[error("stream truncated at byte {offset}: {context}")]
    Truncated { offset: u64, context: &'static str },
    #[error("duplicate key {key} at byte {offset}")]
    DuplicateKey { key: u64, offset: u64 },
    #[error("malformed XML at line {line}: {message}")]
    Xml { line: u64, message: String },
}

impl DumpError {
    /// Byte offset (or line number, for XML errors) the error refers to.
    pub fn position(&self) -> Option<u64> {
        match self {
            DumpError::Io(_) => None,
            DumpError::Parse { offset, .. }
            | DumpError::Schema { offset, .. }
            | DumpError::Truncated { offset, .. }
            | DumpError::DuplicateKey { offset, .. } => Some(*offset),
            DumpError::Xml { line, .. } => Some(*line),
        }
    }
}

/// Strictness of a parse. Strict aborts on the first malformed tuple;
/// lenient skips to the next statement and counts the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Boxed byte stream handed out by [`open_dump`].
pub type DumpStream = Box<dyn BufRead + Send>;

/// Open a dump file, decompressing it on the fly when it starts with the
/// gzip magic bytes.
pub fn open_dump(path: impl AsRef<Path>) -> io::Result<DumpStream> {
    let file = File::open(path.as_ref())?;
    maybe_gunzip(BufReader::with_capacity(READ_BUFFER, file))
}

/// Wrap `reader` in a gzip decoder if its first two bytes are the gzip magic.
pub fn maybe_gunzip<R>(mut reader: R) -> io::Result<DumpStream>
where
    R: BufRead + Send + 'static,
{
    let head = reader.fill_buf()?;
    if head.len() >= 2 && head[..2] == GZIP_MAGIC {
        let decoder = MultiGzDecoder::new(reader);
        Ok(Box::new(BufReader::with_capacity(READ_BUFFER, decoder)))
    } else {
        Ok(Box::new(reader))
    }
}

/// Read an entire (possibly compressed) byte slice; used by tests and small
/// in-memory fixtures.
pub fn gunzip_slice(bytes: &[u8]) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    maybe_gunzip(io::Cursor::new(bytes.to_vec()))?.read_to_end(&mut out)?;
    Ok(out)
}
