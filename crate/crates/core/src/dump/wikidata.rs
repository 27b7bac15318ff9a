//! Line-oriented reader for the Wikidata JSON entity dump.
//!
//! The dump is one large JSON array with one entity per line:
//!
//! ```text
//! [
//! {"type":"item","id":"Q2",...},
//! {"type":"item","id":"Q3",...}
//! ]
//! ```
//!
//! Each line is decoded on its own, so memory stays bounded by the largest
//! entity. Only the wanted claims (always `P31`) and the sitelinks are kept.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::value::RawValue;

use super::DumpError;

pub const INSTANCE_OF: &str = "P31";

/// Wikidata item identifier (`Q` followed by digits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Qid(pub u64);

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a QID: {0:?}")]
pub struct InvalidQid(pub String);

impl FromStr for Qid {
    type Err = InvalidQid;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('Q').ok_or_else(|| InvalidQid(s.to_string()))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(InvalidQid(s.to_string()));
        }
        digits.parse().map(Qid).map_err(|_| InvalidQid(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WikidataItem {
    pub qid: Qid,
    pub p31_values: BTreeSet<Qid>,
    /// Site key (`enwiki`) to article title.
    pub sitelinks: BTreeMap<String, String>,
    /// Item-valued claims for any additionally requested properties.
    pub extra_claims: BTreeMap<String, BTreeSet<Qid>>,
}

#[derive(Deserialize)]
struct RawEntity<'a> {
    id: Cow<'a, str>,
    #[serde(borrow, default)]
    claims: Option<&'a RawValue>,
    #[serde(borrow, default)]
    sitelinks: Option<&'a RawValue>,
}

#[derive(Deserialize)]
struct RawClaim {
    mainsnak: RawSnak,
    #[serde(default)]
    rank: Option<String>,
}

#[derive(Deserialize)]
struct RawSnak {
    #[serde(default)]
    datavalue: Option<RawDataValue>,
}

#[derive(Deserialize)]
struct RawDataValue {
    value: serde_json::Value,
}

#[derive(Deserialize)]
struct RawSitelink {
    title: String,
}

/// Empty maps are serialized as `[]` by the dump generator.
fn is_empty_array(raw: &RawValue) -> bool {
    raw.get().trim_start().starts_with('[')
}

fn claim_target(claim: &RawClaim) -> Option<Qid> {
    if claim.rank.as_deref() == Some("deprecated") {
        return None;
    }
    let value = &claim.mainsnak.datavalue.as_ref()?.value;
    if let Some(id) = value.get("id").and_then(|v| v.as_str()) {
        return id.parse().ok();
    }
    // older dumps carry only the numeric id
    match value.get("entity-type").and_then(|v| v.as_str()) {
        Some("item") => value.get("numeric-id").and_then(|v| v.as_u64()).map(Qid),
        _ => None,
    }
}

fn decode_entity(line: &str, wanted: &[String]) -> Result<Option<WikidataItem>, serde_json::Error> {
    let raw: RawEntity = serde_json::from_str(line)?;
    let Ok(qid) = raw.id.parse::<Qid>() else {
        // properties, lexemes
        return Ok(None);
    };
    let mut item = WikidataItem {
        qid,
        ..Default::default()
    };
    if let Some(claims) = raw.claims.filter(|c| !is_empty_array(c)) {
        let claims: HashMap<Cow<str>, &RawValue> = serde_json::from_str(claims.get())?;
        for property in wanted {
            let Some(list) = claims.get(property.as_str()) else {
                continue;
            };
            let list: Vec<RawClaim> = serde_json::from_str(list.get())?;
            let values: BTreeSet<Qid> = list.iter().filter_map(claim_target).collect();
            if property == INSTANCE_OF {
                item.p31_values = values;
            } else {
                item.extra_claims.insert(property.clone(), values);
            }
        }
    }
    if let Some(sitelinks) = raw.sitelinks.filter(|s| !is_empty_array(s)) {
        let sitelinks: HashMap<String, RawSitelink> = serde_json::from_str(sitelinks.get())?;
        item.sitelinks = sitelinks
            .into_iter()
            .filter(|(site, _)| site.ends_with("wiki"))
            .map(|(site, link)| (site, link.title))
            .collect();
    }
    Ok(Some(item))
}

/// Iterator over the items of a Wikidata dump. Lines that fail to decode are
/// skipped and counted in [`WikidataReader::malformed`].
pub struct WikidataReader<R> {
    reader: R,
    line: Vec<u8>,
    line_no: u64,
    wanted: Vec<String>,
    malformed: u64,
    non_items: u64,
}

impl<R: BufRead> WikidataReader<R> {
    pub fn new(reader: R) -> Self {
        WikidataReader {
            reader,
            line: Vec::new(),
            line_no: 0,
            wanted: vec![INSTANCE_OF.to_string()],
            malformed: 0,
            non_items: 0,
        }
    }

    /// Keep claims for `properties` in addition to P31.
    pub fn with_properties<S: AsRef<str>>(mut self, properties: &[S]) -> Self {
        for p in properties {
            let p = p.as_ref().to_string();
            if !self.wanted.contains(&p) {
                self.wanted.push(p);
            }
        }
        self
    }

    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    /// Property and lexeme entities passed over.
    pub fn non_items(&self) -> u64 {
        self.non_items
    }
}

impl<R: BufRead> Iterator for WikidataReader<R> {
    type Item = Result<WikidataItem, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_until(b'\n', &mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let Ok(text) = std::str::from_utf8(&self.line) else {
                log::warn!("wikidata line {}: invalid UTF-8", self.line_no);
                self.malformed += 1;
                continue;
            };
            let text = text.trim();
            let text = text.strip_suffix(',').unwrap_or(text);
            if text.is_empty() || text == "[" || text == "]" {
                continue;
            }
            match decode_entity(text, &self.wanted) {
                Ok(Some(item)) => return Some(Ok(item)),
                Ok(None) => self.non_items += 1,
                Err(e) => {
                    log::warn!("wikidata line {}: {e}", self.line_no);
                    self.malformed += 1;
                }
            }
        }
    }
}

/// Stream the items of a Wikidata dump, keeping P31 plus `wanted_properties`.
pub fn parse_wikidata_entities<R: BufRead, S: AsRef<str>>(
    reader: R,
    wanted_properties: &[S],
) -> WikidataReader<R> {
    WikidataReader::new(reader).with_properties(wanted_properties)
}
