//! Markup counters over raw wikitext.
//!
//! All counters ignore text inside HTML comments. They are scanners, not a
//! parser: no template expansion happens, so anything produced by a template
//! (infobox images, generated reference lists) is invisible here.

use std::borrow::Cow;

use super::lexicon::LanguageLexicon;
use crate::title::normalize_template_name;

/// Remove `<!-- ... -->`; an unclosed comment runs to the end of the text.
pub fn strip_comments(text: &str) -> Cow<'_, str> {
    let Some(first) = text.find("<!--") else {
        return Cow::Borrowed(text);
    };
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut next = Some(first);
    while let Some(start) = next {
        out.push_str(&rest[..start]);
        match rest[start + 4..].find("-->") {
            Some(end) => rest = &rest[start + 4 + end + 3..],
            None => {
                rest = "";
                break;
            }
        }
        next = rest.find("<!--");
    }
    out.push_str(rest);
    Cow::Owned(out)
}

fn starts_with_ci(hay: &[u8], at: usize, needle: &[u8]) -> bool {
    hay.len() >= at + needle.len() && hay[at..at + needle.len()].eq_ignore_ascii_case(needle)
}

fn find_ci(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || from >= hay.len() {
        return None;
    }
    let first = needle[0].to_ascii_lowercase();
    (from..=hay.len().saturating_sub(needle.len()))
        .find(|&i| hay[i].to_ascii_lowercase() == first && starts_with_ci(hay, i, needle))
}

/// Number of `<ref>` tags: paired, self-closing (`<ref name=a/>`) and unclosed
/// tags each count once. Tag names match case-insensitively; `<references>`
/// does not count.
pub fn count_references(wikitext: &str) -> u64 {
    references_in(&strip_comments(wikitext))
}

pub(crate) fn references_in(text: &str) -> u64 {
    let bytes = text.as_bytes();
    let mut count = 0;
    let mut i = 0;
    while let Some(p) = find_ci(bytes, i, b"<ref") {
        // an opening tag is `<ref` followed by a delimiter; a closing tag
        // starts with `</` and never matches
        if matches!(bytes.get(p + 4), Some(b'>' | b'/') | Some(b' ' | b'\t' | b'\n' | b'\r')) {
            count += 1;
        }
        i = p + 4;
    }
    count
}

/// File-namespace embeds `[[File:...]]` for every alias in `lexicon`, plus
/// one per non-empty line of each `<gallery>` block.
pub fn count_images(wikitext: &str, lexicon: &LanguageLexicon) -> u64 {
    images_in(&strip_comments(wikitext), lexicon)
}

pub(crate) fn images_in(text: &str, lexicon: &LanguageLexicon) -> u64 {
    let mut count = 0;
    let mut rest = text;
    while let Some((before, gallery, after)) = split_gallery(rest) {
        count += file_links_in(before, lexicon);
        count += gallery.lines().filter(|l| !l.trim().is_empty()).count() as u64;
        rest = after;
    }
    count + file_links_in(rest, lexicon)
}

/// Split at the first gallery block: (text before, block content, text after).
/// An unclosed block runs to the end.
fn split_gallery(text: &str) -> Option<(&str, &str, &str)> {
    let bytes = text.as_bytes();
    let mut from = 0;
    loop {
        let open = find_ci(bytes, from, b"<gallery")?;
        from = open + 8;
        if !matches!(bytes.get(open + 8), Some(b'>' | b' ' | b'\t')) {
            continue;
        }
        // attributes stay on one line and contain no markup
        let Some(gt) = bytes[open + 8..]
            .iter()
            .position(|&b| matches!(b, b'>' | b'\n' | b'<' | b'['))
            .map(|k| open + 8 + k)
            .filter(|&k| bytes[k] == b'>')
        else {
            continue;
        };
        let body = gt + 1;
        return Some(match find_ci(bytes, body, b"</gallery") {
            Some(close) => {
                let end = bytes[close..]
                    .iter()
                    .position(|&b| b == b'>')
                    .map_or(bytes.len(), |k| close + k + 1);
                (&text[..open], &text[body..close], &text[end..])
            }
            None => (&text[..open], &text[body..], ""),
        });
    }
}

fn file_links_in(text: &str, lexicon: &LanguageLexicon) -> u64 {
    let mut count = 0;
    let mut rest = text;
    while let Some(p) = rest.find("[[") {
        rest = &rest[p + 2..];
        let target = rest.trim_start();
        // `[[:File:x]]` links to the description page instead of embedding
        if target.starts_with(':') {
            continue;
        }
        let Some(stop) = target.find([':', '|', ']', '[', '\n', '{', '}']) else {
            continue;
        };
        if target.as_bytes()[stop] == b':' && lexicon.is_file_alias(&target[..stop]) {
            count += 1;
        }
    }
    count
}

/// Heading lines `== Title ==` with 2 to 6 equal signs on both sides.
pub fn count_sections(wikitext: &str) -> u64 {
    sections_in(&strip_comments(wikitext))
}

pub(crate) fn sections_in(text: &str) -> u64 {
    text.lines().filter(|l| is_heading(l)).count() as u64
}

fn is_heading(line: &str) -> bool {
    let line = line.trim_end();
    let lead = line.bytes().take_while(|&b| b == b'=').count();
    let trail = line.bytes().rev().take_while(|&b| b == b'=').count();
    if !(2..=6).contains(&lead) || lead != trail || line.len() <= 2 * lead {
        return false;
    }
    !line[lead..line.len() - trail].trim().is_empty()
}

/// Template invocations whose normalized name is one of the lexicon's
/// quality-flaw templates. Every instance counts.
pub fn count_qft(wikitext: &str, lexicon: &LanguageLexicon) -> u64 {
    qft_in(&strip_comments(wikitext), lexicon)
}

pub(crate) fn qft_in(text: &str, lexicon: &LanguageLexicon) -> u64 {
    if lexicon.qft_template_names.is_empty() {
        return 0;
    }
    let bytes = text.as_bytes();
    let mut count = 0;
    let mut i = 0;
    while let Some(p) = text[i..].find("{{").map(|k| i + k) {
        i = p + 2;
        // `{{{param}}}` is a parameter, not a template
        if bytes.get(p + 2) == Some(&b'{') {
            i = p + 3;
            continue;
        }
        let name_end = text[p + 2..]
            .find(['|', '}', '{'])
            .map_or(text.len(), |k| p + 2 + k);
        let raw = text[p + 2..name_end].trim();
        if raw.is_empty() || raw.contains('\n') {
            continue;
        }
        let name = normalize_template_name(lexicon.strip_template_prefix(raw));
        if lexicon.qft_template_names.contains(&name) {
            count += 1;
        }
    }
    count
}
