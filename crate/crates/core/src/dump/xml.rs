//! Streaming reader for MediaWiki pages-articles XML exports.

use std::io::{self, BufRead, Read};

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::Event;
use quick_xml::{Reader, XmlVersion};

use super::tables::PageId;
use super::DumpError;

/// Latest-revision wikitext of one page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleText {
    pub page_id: PageId,
    pub namespace: i32,
    /// Title without namespace prefix, underscores for spaces.
    pub title: String,
    pub wikitext: String,
    /// `<redirect title="..."/>`, as written in the export (display form).
    pub redirect: Option<String>,
}

/// Counts newlines in the bytes quick-xml has consumed so errors can name a
/// line.
struct LineCounter<R> {
    inner: R,
    newlines: u64,
}

impl<R: Read> Read for LineCounter<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.newlines += buf[..n].iter().filter(|&&b| b == b'\n').count() as u64;
        Ok(n)
    }
}

impl<R: BufRead> BufRead for LineCounter<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        if let Ok(buf) = self.inner.fill_buf() {
            let amt = amt.min(buf.len());
            self.newlines += buf[..amt].iter().filter(|&&b| b == b'\n').count() as u64;
        }
        self.inner.consume(amt);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Namespace,
    Id,
    Text,
}

#[derive(Default)]
struct PageDraft {
    title: Option<String>,
    namespace: Option<String>,
    id: Option<String>,
    text: Option<String>,
    redirect: Option<String>,
}

fn xml_error<R>(reader: &Reader<LineCounter<R>>, message: impl Into<String>) -> DumpError {
    DumpError::Xml {
        line: reader.get_ref().newlines + 1,
        message: message.into(),
    }
}

/// Iterator over the pages of an XML export, in document order.
pub struct PagesArticlesReader<R> {
    reader: Reader<LineCounter<R>>,
    buf: Vec<u8>,
    /// Element names from the root to the current element.
    stack: Vec<Vec<u8>>,
    draft: Option<PageDraft>,
    capture: Option<(Field, String)>,
    missing_text: u64,
    finished: bool,
}

impl<R: BufRead> PagesArticlesReader<R> {
    pub fn new(reader: R) -> Self {
        let mut reader = Reader::from_reader(LineCounter {
            inner: reader,
            newlines: 0,
        });
        reader.config_mut().trim_text(false);
        PagesArticlesReader {
            reader,
            buf: Vec::with_capacity(64 * 1024),
            stack: Vec::new(),
            draft: None,
            capture: None,
            missing_text: 0,
            finished: false,
        }
    }

    /// Pages skipped because they had no `<text>` element.
    pub fn missing_text(&self) -> u64 {
        self.missing_text
    }

    fn error(&self, message: impl Into<String>) -> DumpError {
        xml_error(&self.reader, message)
    }

    fn parent_is(&self, name: &[u8]) -> bool {
        self.stack.len() >= 2 && self.stack[self.stack.len() - 2] == name
    }

    fn open(&mut self, name: &[u8]) {
        self.stack.push(name.to_vec());
        if name == b"page" {
            self.draft = Some(PageDraft::default());
            return;
        }
        if self.draft.is_none() {
            return;
        }
        let field = match name {
            b"title" if self.parent_is(b"page") => Field::Title,
            b"ns" if self.parent_is(b"page") => Field::Namespace,
            b"id" if self.parent_is(b"page") => Field::Id,
            b"text" if self.parent_is(b"revision") => Field::Text,
            _ => return,
        };
        self.capture = Some((field, String::new()));
    }

    fn store(&mut self, field: Field, value: String) {
        if let Some(draft) = self.draft.as_mut() {
            let slot = match field {
                Field::Title => &mut draft.title,
                Field::Namespace => &mut draft.namespace,
                Field::Id => &mut draft.id,
                Field::Text => &mut draft.text,
            };
            *slot = Some(value);
        }
    }

    /// Close the current element; returns a finished page when `</page>` ends.
    fn close(&mut self) -> Result<Option<ArticleText>, DumpError> {
        let name = self.stack.pop().unwrap_or_default();
        if let Some((field, value)) = self.capture.take() {
            self.store(field, value);
        }
        if name != b"page" {
            return Ok(None);
        }
        let Some(draft) = self.draft.take() else {
            return Ok(None);
        };
        self.finish_page(draft)
    }

    fn finish_page(&mut self, draft: PageDraft) -> Result<Option<ArticleText>, DumpError> {
        let id = draft.id.ok_or_else(|| self.error("<page> without <id>"))?;
        let page_id = id
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| self.error(format!("bad page id '{id}'")))?;
        let namespace = match draft.namespace {
            Some(ns) => ns
                .trim()
                .parse::<i32>()
                .map_err(|_| self.error(format!("bad namespace '{ns}'")))?,
            None => 0,
        };
        let title = draft.title.ok_or_else(|| self.error("<page> without <title>"))?;
        let Some(wikitext) = draft.text else {
            log::warn!("page {page_id} has no <text>; skipped");
            self.missing_text += 1;
            return Ok(None);
        };
        Ok(Some(ArticleText {
            page_id: PageId(page_id),
            namespace,
            title: dump_title(&title, namespace),
            wikitext,
            redirect: draft.redirect,
        }))
    }

    fn step(&mut self) -> Result<Option<ArticleText>, DumpError> {
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e,
                Err(e) => return Err(self.error(e.to_string())),
            };
            match event {
                Event::Start(start) => {
                    let name = start.name().as_ref().as_bytes().to_vec();
                    self.open(&name);
                }
                Event::Empty(start) => {
                    let name = start.name().as_ref().as_bytes().to_vec();
                    if name == b"redirect" && self.stack.last().is_some_and(|n| n == b"page") {
                        let title = match start.try_get_attribute("title") {
                            Ok(Some(attr)) => Some(
                                attr.normalized_value(XmlVersion::Implicit1_0)
                                    .map_err(|e| xml_error(&self.reader, e.to_string()))?
                                    .into_owned(),
                            ),
                            Ok(None) => None,
                            Err(e) => return Err(xml_error(&self.reader, e.to_string())),
                        };
                        if let Some(draft) = self.draft.as_mut() {
                            draft.redirect = title;
                        }
                        continue;
                    }
                    self.open(&name);
                    if let Some(page) = self.close()? {
                        return Ok(Some(page));
                    }
                }
                Event::End(_) => {
                    if let Some(page) = self.close()? {
                        return Ok(Some(page));
                    }
                }
                Event::Text(text) => {
                    if let Some((_, value)) = self.capture.as_mut() {
                        value.push_str(&text.xml10_content());
                    }
                }
                Event::CData(data) => {
                    if let Some((_, value)) = self.capture.as_mut() {
                        value.push_str(&data.xml10_content());
                    }
                }
                Event::GeneralRef(entity) => {
                    if self.capture.is_none() {
                        continue;
                    }
                    let resolved = if entity.is_char_ref() {
                        match entity.resolve_char_ref() {
                            Ok(Some(c)) => c.to_string(),
                            _ => return Err(xml_error(&self.reader, "invalid character reference")),
                        }
                    } else {
                        let name = entity.xml10_content();
                        match resolve_predefined_entity(&name) {
                            Some(s) => s.to_string(),
                            None => {
                                return Err(xml_error(&self.reader, format!("unknown entity &{name};")))
                            }
                        }
                    };
                    if let Some((_, value)) = self.capture.as_mut() {
                        value.push_str(&resolved);
                    }
                }
                Event::Eof => {
                    if !self.stack.is_empty() {
                        return Err(self.error("unexpected end of document"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}

impl<R: BufRead> Iterator for PagesArticlesReader<R> {
    type Item = Result<ArticleText, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.step() {
            Ok(Some(page)) => Some(Ok(page)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

/// Convert an export title ("Talk:Some page") into the table convention
/// ("Some_page" in namespace 1).
pub fn dump_title(display: &str, namespace: i32) -> String {
    let local = if namespace != 0 {
        display.split_once(':').map_or(display, |(_, rest)| rest)
    } else {
        display
    };
    local.replace(' ', "_")
}

/// Stream the pages of a pages-articles export.
pub fn parse_pages_articles_xml<R: BufRead>(reader: R) -> PagesArticlesReader<R> {
    PagesArticlesReader::new(reader)
}
