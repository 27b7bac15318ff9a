//! Typed views over the `page`, `linktarget` and `pagelinks` table dumps.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use super::sql::{validate_row, Column, ColumnKind, SqlRow, SqlRows, SqlValue};
use super::{DumpError, ParseMode};

/// MediaWiki page identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PageId(pub u64);

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for PageId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(PageId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub page_id: PageId,
    pub namespace: i32,
    /// Title without namespace prefix, underscores for spaces.
    pub title: String,
    pub is_redirect: bool,
    /// `page_len`: size of the latest revision's wikitext in bytes.
    pub wikitext_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkTargetRecord {
    pub target_id: u64,
    pub namespace: i32,
    pub title: String,
}

/// `lt_id -> (namespace, title)`.
pub type LinkTargetMap = HashMap<u64, (i32, String)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LinkTarget {
    /// Pre-2024 schema: the target is embedded.
    Title { namespace: i32, title: String },
    /// Normalized schema: a `linktarget.lt_id`.
    Id(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkRow {
    pub from: PageId,
    pub from_namespace: i32,
    pub target: LinkTarget,
}

/// Column layout of a pagelinks dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PagelinksSchema {
    /// `(pl_from, pl_namespace, pl_title, pl_from_namespace)`
    Legacy,
    /// `(pl_from, pl_from_namespace, pl_target_id)`
    Normalized,
    /// Decide from the arity of the first tuple.
    #[default]
    Auto,
}

const INT: Column = Column::new(ColumnKind::Int);
const FLOAT: Column = Column::new(ColumnKind::Float);
const TEXT: Column = Column::new(ColumnKind::Text);
const OPT_TEXT: Column = Column::nullable(ColumnKind::Text);

/// Current `page` layout (MediaWiki 1.42+).
const PAGE_COLUMNS: [Column; 12] = [
    INT,      // page_id
    INT,      // page_namespace
    TEXT,     // page_title
    INT,      // page_is_redirect
    INT,      // page_is_new
    FLOAT,    // page_random
    TEXT,     // page_touched
    OPT_TEXT, // page_links_updated
    INT,      // page_latest
    INT,      // page_len
    OPT_TEXT, // page_content_model
    OPT_TEXT, // page_lang
];

/// Older `page` layout with `page_restrictions` after the title.
const PAGE_COLUMNS_WITH_RESTRICTIONS: [Column; 13] = [
    INT, INT, TEXT, TEXT, INT, INT, FLOAT, TEXT, OPT_TEXT, INT, INT, OPT_TEXT, OPT_TEXT,
];

const LINKTARGET_COLUMNS: [Column; 3] = [INT, INT, TEXT];
const PAGELINKS_LEGACY: [Column; 4] = [INT, INT, TEXT, INT];
const PAGELINKS_NORMALIZED: [Column; 3] = [INT, INT, INT];

fn positive_id(row: &SqlRow, idx: usize, what: &str) -> Result<u64, DumpError> {
    match row.values[idx] {
        SqlValue::Int(v) if v > 0 => Ok(v as u64),
        ref other => Err(DumpError::Schema {
            offset: row.offset,
            message: format!("{what} must be a positive integer, found {other:?}"),
        }),
    }
}

fn int(row: &SqlRow, idx: usize) -> i64 {
    row.values[idx].as_int().expect("validated column")
}

fn namespace(row: &SqlRow, idx: usize) -> Result<i32, DumpError> {
    i32::try_from(int(row, idx)).map_err(|_| DumpError::Schema {
        offset: row.offset,
        message: format!("namespace out of range in column {idx}"),
    })
}

fn title(row: &SqlRow, idx: usize) -> String {
    let bytes = row.values[idx].as_bytes().expect("validated column");
    String::from_utf8_lossy(bytes).into_owned()
}

type RowConverter<T> = Box<dyn FnMut(&SqlRow) -> Result<T, DumpError> + Send>;

/// Shared driver: pull SQL tuples, convert them, and in lenient mode drop
/// rows that fail conversion.
pub struct TableRows<R, T> {
    rows: SqlRows<R>,
    convert: RowConverter<T>,
    skipped: u64,
}

impl<R: Read, T> TableRows<R, T> {
    fn new(
        reader: R,
        mode: ParseMode,
        convert: impl FnMut(&SqlRow) -> Result<T, DumpError> + Send + 'static,
    ) -> Self {
        TableRows {
            rows: SqlRows::new(reader).with_mode(mode),
            convert: Box::new(convert),
            skipped: 0,
        }
    }

    /// Statements and rows dropped in lenient mode.
    pub fn malformed(&self) -> u64 {
        self.rows.malformed() + self.skipped
    }

    pub fn rows_read(&self) -> u64 {
        self.rows.rows_read()
    }
}

impl<R: Read, T> Iterator for TableRows<R, T> {
    type Item = Result<T, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let row = match self.rows.next()? {
                Ok(row) => row,
                Err(e) => return Some(Err(e)),
            };
            match (self.convert)(&row) {
                Ok(v) => return Some(Ok(v)),
                Err(e) if self.rows.mode() == ParseMode::Lenient => {
                    log::warn!("skipping row: {e}");
                    self.skipped += 1;
                }
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Stream [`PageRecord`]s from a `page` table dump. Both the current and the
/// `page_restrictions` layouts are accepted. No namespace filtering happens
/// here.
pub fn parse_page_table<R: Read>(reader: R, mode: ParseMode) -> TableRows<R, PageRecord> {
    TableRows::new(reader, mode, |row| {
        let (redirect_col, len_col) = match row.values.len() {
            12 => {
                validate_row(row, &PAGE_COLUMNS)?;
                (3, 9)
            }
            13 => {
                validate_row(row, &PAGE_COLUMNS_WITH_RESTRICTIONS)?;
                (4, 10)
            }
            n => {
                return Err(DumpError::Schema {
                    offset: row.offset,
                    message: format!("page table row has {n} columns, expected 12 or 13"),
                })
            }
        };
        let len = int(row, len_col);
        if len < 0 {
            return Err(DumpError::Schema {
                offset: row.offset,
                message: "negative page_len".into(),
            });
        }
        Ok(PageRecord {
            page_id: PageId(positive_id(row, 0, "page_id")?),
            namespace: namespace(row, 1)?,
            title: title(row, 2),
            is_redirect: int(row, redirect_col) != 0,
            wikitext_bytes: len as u64,
        })
    })
}

/// Load a `linktarget` dump into memory. Duplicate `lt_id`s are an error.
pub fn parse_linktarget_table<R: Read>(reader: R, mode: ParseMode) -> Result<LinkTargetMap, DumpError> {
    let mut rows = TableRows::new(reader, mode, |row| {
        validate_row(row, &LINKTARGET_COLUMNS)?;
        Ok((
            row.offset,
            LinkTargetRecord {
                target_id: positive_id(row, 0, "lt_id")?,
                namespace: namespace(row, 1)?,
                title: title(row, 2),
            },
        ))
    });
    let mut map = LinkTargetMap::new();
    for item in rows.by_ref() {
        let (offset, rec) = item?;
        if map.insert(rec.target_id, (rec.namespace, rec.title)).is_some() {
            return Err(DumpError::DuplicateKey {
                key: rec.target_id,
                offset,
            });
        }
    }
    Ok(map)
}

/// Stream [`LinkRow`]s from a `pagelinks` dump in either schema.
pub fn parse_pagelinks_table<R: Read>(
    reader: R,
    schema: PagelinksSchema,
    mode: ParseMode,
) -> TableRows<R, LinkRow> {
    let mut detected = match schema {
        PagelinksSchema::Auto => None,
        fixed => Some(fixed),
    };
    TableRows::new(reader, mode, move |row| {
        let schema = match detected {
            Some(s) => s,
            None => {
                let s = match row.values.len() {
                    4 => PagelinksSchema::Legacy,
                    3 => PagelinksSchema::Normalized,
                    n => {
                        return Err(DumpError::Schema {
                            offset: row.offset,
                            message: format!("pagelinks row has {n} columns, expected 3 or 4"),
                        })
                    }
                };
                detected = Some(s);
                s
            }
        };
        match schema {
            PagelinksSchema::Legacy => {
                validate_row(row, &PAGELINKS_LEGACY)?;
                Ok(LinkRow {
                    from: PageId(positive_id(row, 0, "pl_from")?),
                    from_namespace: namespace(row, 3)?,
                    target: LinkTarget::Title {
                        namespace: namespace(row, 1)?,
                        title: title(row, 2),
                    },
                })
            }
            PagelinksSchema::Normalized => {
                validate_row(row, &PAGELINKS_NORMALIZED)?;
                Ok(LinkRow {
                    from: PageId(positive_id(row, 0, "pl_from")?),
                    from_namespace: namespace(row, 1)?,
                    target: LinkTarget::Id(positive_id(row, 2, "pl_target_id")?),
                })
            }
            PagelinksSchema::Auto => unreachable!("schema resolved above"),
        }
    })
}
