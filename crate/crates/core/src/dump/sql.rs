//! Reader for mysqldump-style SQL files.
//!
//! Only the subset MediaWiki table dumps actually use is understood:
//! `INSERT INTO \`table\` VALUES (...),(...);` statements with integer, float,
//! `NULL` and quoted string literals. Everything else (`CREATE TABLE`, `LOCK`,
//! `SET`, comments) is skipped statement by statement.

use std::fmt;
use std::io::{self, Read};

use super::{DumpError, ParseMode};

const CHUNK: usize = 256 * 1024;

/// One literal from a VALUES tuple.
#[derive(Clone, PartialEq)]
pub enum SqlValue {
    Int(i64),
    Float(f64),
    /// Unescaped bytes of a quoted string.
    Text(Vec<u8>),
    Null,
}

impl SqlValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            SqlValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            SqlValue::Int(v) => Some(*v as f64),
            SqlValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            SqlValue::Text(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, SqlValue::Null)
    }

    /// Render the value back into dump syntax.
    pub fn to_sql_literal(&self) -> Vec<u8> {
        match self {
            SqlValue::Int(v) => v.to_string().into_bytes(),
            SqlValue::Float(v) => format!("{v:?}").into_bytes(),
            SqlValue::Null => b"NULL".to_vec(),
            SqlValue::Text(bytes) => escape_string(bytes),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            SqlValue::Int(_) => "integer",
            SqlValue::Float(_) => "float",
            SqlValue::Text(_) => "text",
            SqlValue::Null => "NULL",
        }
    }
}

impl fmt::Debug for SqlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SqlValue::Int(v) => write!(f, "{v}"),
            SqlValue::Float(v) => write!(f, "{v:?}"),
            SqlValue::Text(b) => write!(f, "{:?}", String::from_utf8_lossy(b)),
            SqlValue::Null => f.write_str("NULL"),
        }
    }
}

impl From<i64> for SqlValue {
    fn from(v: i64) -> Self {
        SqlValue::Int(v)
    }
}

impl From<&str> for SqlValue {
    fn from(v: &str) -> Self {
        SqlValue::Text(v.as_bytes().to_vec())
    }
}

/// Quote and escape `bytes` the way mysqldump does.
pub fn escape_string(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len() + 2);
    out.push(b'\'');
    for &b in bytes {
        match b {
            0 => out.extend_from_slice(b"\\0"),
            b'\n' => out.extend_from_slice(b"\\n"),
            b'\r' => out.extend_from_slice(b"\\r"),
            b'\\' => out.extend_from_slice(b"\\\\"),
            b'\'' => out.extend_from_slice(b"\\'"),
            b'"' => out.extend_from_slice(b"\\\""),
            0x1a => out.extend_from_slice(b"\\Z"),
            _ => out.push(b),
        }
    }
    out.push(b'\'');
    out
}

/// Expected type of one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Int,
    /// Accepts float and integer literals.
    Float,
    Text,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub kind: ColumnKind,
    pub nullable: bool,
}

impl Column {
    pub const fn new(kind: ColumnKind) -> Self {
        Column {
            kind,
            nullable: false,
        }
    }

    pub const fn nullable(kind: ColumnKind) -> Self {
        Column {
            kind,
            nullable: true,
        }
    }

    fn accepts(&self, value: &SqlValue) -> bool {
        match (self.kind, value) {
            (_, SqlValue::Null) => self.nullable || self.kind == ColumnKind::Any,
            (ColumnKind::Any, _) => true,
            (ColumnKind::Int, SqlValue::Int(_)) => true,
            (ColumnKind::Float, SqlValue::Int(_) | SqlValue::Float(_)) => true,
            (ColumnKind::Text, SqlValue::Text(_)) => true,
            _ => false,
        }
    }
}

/// Check arity and column types of `row` against `schema`.
pub fn validate_row(row: &SqlRow, schema: &[Column]) -> Result<(), DumpError> {
    if row.values.len() != schema.len() {
        return Err(DumpError::Schema {
            offset: row.offset,
            message: format!("expected {} columns, found {}", schema.len(), row.values.len()),
        });
    }
    for (i, (col, v)) in schema.iter().zip(&row.values).enumerate() {
        if !col.accepts(v) {
            return Err(DumpError::Schema {
                offset: row.offset,
                message: format!("column {i}: expected {:?}, found {}", col.kind, v.kind_name()),
            });
        }
    }
    Ok(())
}

/// A parsed tuple plus the byte offset of its opening parenthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SqlRow {
    pub offset: u64,
    pub values: Vec<SqlValue>,
}

/// Chunked byte cursor with absolute offset tracking.
struct ByteCursor<R> {
    inner: R,
    buf: Box<[u8]>,
    pos: usize,
    len: usize,
    base: u64,
    eof: bool,
}

impl<R: Read> ByteCursor<R> {
    fn new(inner: R) -> Self {
        ByteCursor {
            inner,
            buf: vec![0; CHUNK].into_boxed_slice(),
            pos: 0,
            len: 0,
            base: 0,
            eof: false,
        }
    }

    fn offset(&self) -> u64 {
        self.base + self.pos as u64
    }

    #[inline]
    fn peek(&mut self) -> io::Result<Option<u8>> {
        if self.pos < self.len {
            return Ok(Some(self.buf[self.pos]));
        }
        self.refill()?;
        Ok(if self.pos < self.len {
            Some(self.buf[self.pos])
        } else {
            None
        })
    }

    #[inline]
    fn bump(&mut self) {
        debug_assert!(self.pos < self.len);
        self.pos += 1;
    }

    #[inline]
    fn next_byte(&mut self) -> io::Result<Option<u8>> {
        let b = self.peek()?;
        if b.is_some() {
            self.pos += 1;
        }
        Ok(b)
    }

    fn refill(&mut self) -> io::Result<()> {
        if self.eof {
            return Ok(());
        }
        self.base += self.len as u64;
        self.pos = 0;
        self.len = 0;
        loop {
            match self.inner.read(&mut self.buf) {
                Ok(0) => {
                    self.eof = true;
                    return Ok(());
                }
                Ok(n) => {
                    self.len = n;
                    return Ok(());
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            }
        }
    }

    /// Remaining bytes of the current chunk.
    fn window(&self) -> &[u8] {
        &self.buf[self.pos..self.len]
    }

    fn skip_ws(&mut self) -> io::Result<()> {
        while let Some(b) = self.peek()? {
            if b.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
        Ok(())
    }

    fn skip_line(&mut self) -> io::Result<()> {
        loop {
            if self.pos >= self.len {
                self.refill()?;
                if self.pos >= self.len {
                    return Ok(());
                }
            }
            match self.window().iter().position(|&b| b == b'\n') {
                Some(i) => {
                    self.pos += i + 1;
                    return Ok(());
                }
                None => self.pos = self.len,
            }
        }
    }

    fn read_word(&mut self) -> io::Result<Vec<u8>> {
        let mut word = Vec::new();
        while let Some(b) = self.peek()? {
            if b.is_ascii_alphanumeric() || b == b'_' {
                word.push(b);
                self.bump();
            } else {
                break;
            }
        }
        Ok(word)
    }
}

/// Iterator over the tuples of every `INSERT` statement in a SQL dump.
pub struct SqlRows<R> {
    cur: ByteCursor<R>,
    schema: Option<Vec<Column>>,
    mode: ParseMode,
    in_insert: bool,
    finished: bool,
    table: String,
    rows: u64,
    malformed: u64,
}

/// Stream the tuples of `reader`, optionally validating each against
/// `schema`.
pub fn parse_sql_insert_stream<R: Read>(
    reader: R,
    schema: Option<&[Column]>,
    mode: ParseMode,
) -> SqlRows<R> {
    let rows = SqlRows::new(reader).with_mode(mode);
    match schema {
        Some(s) => rows.with_schema(s.to_vec()),
        None => rows,
    }
}

impl<R: Read> SqlRows<R> {
    pub fn new(reader: R) -> Self {
        SqlRows {
            cur: ByteCursor::new(reader),
            schema: None,
            mode: ParseMode::Strict,
            in_insert: false,
            finished: false,
            table: String::new(),
            rows: 0,
            malformed: 0,
        }
    }

    pub fn with_schema(mut self, schema: Vec<Column>) -> Self {
        self.schema = Some(schema);
        self
    }

    pub fn with_mode(mut self, mode: ParseMode) -> Self {
        self.mode = mode;
        self
    }

    /// Table named by the most recent `INSERT INTO`.
    pub fn table(&self) -> &str {
        &self.table
    }

    pub fn rows_read(&self) -> u64 {
        self.rows
    }

    /// Tuples or statements dropped in lenient mode.
    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    pub fn offset(&self) -> u64 {
        self.cur.offset()
    }

    pub fn mode(&self) -> ParseMode {
        self.mode
    }

    fn parse_err(&self, message: impl Into<String>) -> DumpError {
        DumpError::Parse {
            offset: self.cur.offset(),
            message: message.into(),
        }
    }

    fn truncated(&self, context: &'static str) -> DumpError {
        DumpError::Truncated {
            offset: self.cur.offset(),
            context,
        }
    }

    fn expect_byte(&mut self, want: u8, context: &'static str) -> Result<(), DumpError> {
        match self.cur.peek()? {
            Some(b) if b == want => {
                self.cur.bump();
                Ok(())
            }
            Some(b) => Err(self.parse_err(format!(
                "expected '{}' {context}, found '{}'",
                want as char,
                (b as char).escape_default()
            ))),
            None => Err(self.truncated(context)),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), DumpError> {
        self.cur.skip_ws()?;
        let at = self.cur.offset();
        let word = self.cur.read_word()?;
        if word.eq_ignore_ascii_case(keyword.as_bytes()) {
            Ok(())
        } else if self.cur.peek()?.is_none() {
            Err(self.truncated("inside INSERT header"))
        } else {
            Err(DumpError::Parse {
                offset: at,
                message: format!(
                    "expected {keyword}, found '{}'",
                    String::from_utf8_lossy(&word)
                ),
            })
        }
    }

    /// Advance to the first tuple of the next INSERT statement. Returns false
    /// at a clean end of stream.
    fn seek_insert(&mut self) -> Result<bool, DumpError> {
        loop {
            self.cur.skip_ws()?;
            let Some(b) = self.cur.peek()? else {
                return Ok(false);
            };
            match b {
                b';' => self.cur.bump(),
                b'-' | b'#' => {
                    // `-- comment` or `# comment`
                    self.cur.skip_line()?;
                }
                b'/' => self.skip_block_comment()?,
                _ if b.is_ascii_alphabetic() => {
                    let word = self.cur.read_word()?;
                    if word.eq_ignore_ascii_case(b"INSERT") {
                        self.read_insert_header()?;
                        return Ok(true);
                    }
                    self.skip_statement()?;
                }
                _ => {
                    return Err(self.parse_err(format!(
                        "unexpected byte '{}' between statements",
                        (b as char).escape_default()
                    )))
                }
            }
        }
    }

    fn skip_block_comment(&mut self) -> Result<(), DumpError> {
        self.cur.bump();
        if self.cur.peek()? != Some(b'*') {
            return Err(self.parse_err("stray '/' between statements"));
        }
        self.cur.bump();
        let mut prev = 0u8;
        loop {
            match self.cur.next_byte()? {
                Some(b'/') if prev == b'*' => return Ok(()),
                Some(b) => prev = b,
                None => return Err(self.truncated("inside /* comment */")),
            }
        }
    }

    /// Skip to just past the `;` ending the current statement, honouring
    /// quoted strings and identifiers.
    fn skip_statement(&mut self) -> Result<(), DumpError> {
        let mut quote: Option<u8> = None;
        loop {
            let Some(b) = self.cur.next_byte()? else {
                return match quote {
                    Some(_) => Err(self.truncated("inside quoted literal")),
                    // a trailing statement without ';' at EOF is tolerated
                    None => Ok(()),
                };
            };
            match quote {
                Some(q) => {
                    if b == b'\\' && q != b'`' {
                        self.cur.next_byte()?;
                    } else if b == q {
                        quote = None;
                    }
                }
                None => match b {
                    b'\'' | b'"' | b'`' => quote = Some(b),
                    b';' => return Ok(()),
                    _ => {}
                },
            }
        }
    }

    fn read_insert_header(&mut self) -> Result<(), DumpError> {
        self.cur.skip_ws()?;
        let mut word = self.cur.read_word()?;
        if word.eq_ignore_ascii_case(b"IGNORE") {
            self.cur.skip_ws()?;
            word = self.cur.read_word()?;
        }
        if !word.eq_ignore_ascii_case(b"INTO") {
            if word.is_empty() && self.cur.peek()?.is_none() {
                return Err(self.truncated("inside INSERT header"));
            }
            return Err(self.parse_err("expected INTO after INSERT"));
        }
        self.cur.skip_ws()?;
        self.table = self.read_identifier()?;
        self.cur.skip_ws()?;
        if self.cur.peek()? == Some(b'(') {
            // explicit column list
            self.cur.bump();
            loop {
                match self.cur.next_byte()? {
                    Some(b')') => break,
                    Some(_) => {}
                    None => return Err(self.truncated("inside INSERT column list")),
                }
            }
        }
        self.expect_keyword("VALUES")?;
        Ok(())
    }

    fn read_identifier(&mut self) -> Result<String, DumpError> {
        match self.cur.peek()? {
            Some(b'`') => {
                self.cur.bump();
                let mut name = Vec::new();
                loop {
                    match self.cur.next_byte()? {
                        Some(b'`') => break,
                        Some(b) => name.push(b),
                        None => return Err(self.truncated("inside table identifier")),
                    }
                }
                Ok(String::from_utf8_lossy(&name).into_owned())
            }
            Some(_) => {
                let word = self.cur.read_word()?;
                if word.is_empty() {
                    return Err(self.parse_err("expected table name"));
                }
                Ok(String::from_utf8_lossy(&word).into_owned())
            }
            None => Err(self.truncated("inside INSERT header")),
        }
    }

    fn read_tuple(&mut self) -> Result<SqlRow, DumpError> {
        self.cur.skip_ws()?;
        let offset = self.cur.offset();
        self.expect_byte(b'(', "at tuple start")?;
        let mut values = Vec::with_capacity(self.schema.as_ref().map_or(4, Vec::len));
        loop {
            self.cur.skip_ws()?;
            values.push(self.read_value()?);
            self.cur.skip_ws()?;
            match self.cur.next_byte()? {
                Some(b',') => continue,
                Some(b')') => break,
                Some(b) => {
                    return Err(self.parse_err(format!(
                        "expected ',' or ')' in tuple, found '{}'",
                        (b as char).escape_default()
                    )))
                }
                None => return Err(self.truncated("inside tuple")),
            }
        }
        Ok(SqlRow { offset, values })
    }

    fn read_value(&mut self) -> Result<SqlValue, DumpError> {
        match self.cur.peek()? {
            Some(q @ (b'\'' | b'"')) => {
                self.cur.bump();
                self.read_string(q).map(SqlValue::Text)
            }
            Some(b'N' | b'n') => {
                let at = self.cur.offset();
                let word = self.cur.read_word()?;
                if word.eq_ignore_ascii_case(b"NULL") {
                    Ok(SqlValue::Null)
                } else if self.cur.peek()?.is_none() {
                    Err(self.truncated("inside literal"))
                } else {
                    Err(DumpError::Parse {
                        offset: at,
                        message: format!("bad literal '{}'", String::from_utf8_lossy(&word)),
                    })
                }
            }
            Some(b) if b == b'-' || b == b'+' || b == b'.' || b.is_ascii_digit() => {
                self.read_number()
            }
            Some(b) => Err(self.parse_err(format!(
                "unexpected byte '{}' at start of literal",
                (b as char).escape_default()
            ))),
            None => Err(self.truncated("inside tuple")),
        }
    }

    fn read_number(&mut self) -> Result<SqlValue, DumpError> {
        let at = self.cur.offset();
        let mut text = [0u8; 64];
        let mut n = 0;
        let mut is_float = false;
        while let Some(b) = self.cur.peek()? {
            let ok = match b {
                b'0'..=b'9' | b'-' | b'+' => true,
                b'.' | b'e' | b'E' => {
                    is_float = true;
                    true
                }
                _ => false,
            };
            if !ok {
                break;
            }
            if n == text.len() {
                return Err(self.parse_err("numeric literal too long"));
            }
            text[n] = b;
            n += 1;
            self.cur.bump();
        }
        if self.cur.peek()?.is_none() {
            return Err(self.truncated("inside numeric literal"));
        }
        let s = std::str::from_utf8(&text[..n]).expect("ascii digits");
        let bad = || DumpError::Parse {
            offset: at,
            message: format!("malformed numeric literal '{s}'"),
        };
        if is_float {
            s.parse::<f64>().map(SqlValue::Float).map_err(|_| bad())
        } else {
            s.parse::<i64>().map(SqlValue::Int).map_err(|_| bad())
        }
    }

    fn read_string(&mut self, quote: u8) -> Result<Vec<u8>, DumpError> {
        let mut out = Vec::new();
        loop {
            if self.cur.pos >= self.cur.len {
                self.cur.refill()?;
                if self.cur.pos >= self.cur.len {
                    return Err(self.truncated("inside quoted string"));
                }
            }
            let window = self.cur.window();
            match window.iter().position(|&b| b == quote || b == b'\\') {
                None => {
                    out.extend_from_slice(window);
                    self.cur.pos = self.cur.len;
                }
                Some(i) => {
                    out.extend_from_slice(&window[..i]);
                    let special = window[i];
                    self.cur.pos += i + 1;
                    if special == quote {
                        return Ok(out);
                    }
                    let Some(esc) = self.cur.next_byte()? else {
                        return Err(self.truncated("inside escape sequence"));
                    };
                    match esc {
                        b'0' => out.push(0),
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(0x08),
                        b'Z' => out.push(0x1a),
                        // MySQL keeps the backslash before LIKE wildcards
                        b'%' | b'_' => out.extend_from_slice(&[b'\\', esc]),
                        other => out.push(other),
                    }
                }
            }
        }
    }

    /// After a tuple: consume `,` (more tuples follow) or `;` (statement end).
    fn read_separator(&mut self) -> Result<(), DumpError> {
        self.cur.skip_ws()?;
        match self.cur.next_byte()? {
            Some(b',') => Ok(()),
            Some(b';') => {
                self.in_insert = false;
                Ok(())
            }
            Some(b) => Err(self.parse_err(format!(
                "expected ',' or ';' after tuple, found '{}'",
                (b as char).escape_default()
            ))),
            None => Err(self.truncated("INSERT statement not terminated")),
        }
    }

    fn check_schema(&self, row: &SqlRow) -> Result<(), DumpError> {
        match &self.schema {
            Some(schema) => validate_row(row, schema),
            None => Ok(()),
        }
    }

    fn step(&mut self) -> Result<Option<SqlRow>, DumpError> {
        if !self.in_insert {
            if !self.seek_insert()? {
                return Ok(None);
            }
            self.in_insert = true;
        }
        let row = self.read_tuple()?;
        self.check_schema(&row)?;
        self.read_separator()?;
        Ok(Some(row))
    }

    /// Lenient recovery: drop the rest of the statement.
    fn recover(&mut self) -> Result<(), DumpError> {
        self.in_insert = false;
        self.skip_statement()
    }
}

impl<R: Read> Iterator for SqlRows<R> {
    type Item = Result<SqlRow, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.finished {
            match self.step() {
                Ok(Some(row)) => {
                    self.rows += 1;
                    return Some(Ok(row));
                }
                Ok(None) => self.finished = true,
                Err(e) => {
                    let recoverable = matches!(
                        e,
                        DumpError::Parse { .. } | DumpError::Schema { .. } | DumpError::Truncated { .. }
                    );
                    if self.mode == ParseMode::Lenient && recoverable {
                        log::warn!("skipping malformed statement: {e}");
                        self.malformed += 1;
                        if matches!(e, DumpError::Truncated { .. }) || self.recover().is_err() {
                            self.finished = true;
                        }
                        continue;
                    }
                    self.finished = true;
                    return Some(Err(e));
                }
            }
        }
        None
    }
}
