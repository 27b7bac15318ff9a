//! MediaWiki title normalization.

/// Canonical database form of a page title: trimmed, runs of spaces and
/// underscores collapsed to a single underscore, first letter upper-cased.
pub fn normalize_title(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for c in raw.trim_matches(|c: char| c == '_' || c.is_whitespace()).chars() {
        if c == '_' || c == ' ' {
            pending_sep = true;
            continue;
        }
        if pending_sep {
            out.push('_');
            pending_sep = false;
        }
        out.push(c);
    }
    upper_first(&out)
}

/// Template names compare with spaces, first letter case-insensitive.
pub fn normalize_template_name(raw: &str) -> String {
    normalize_title(raw).replace('_', " ")
}

pub fn upper_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Title of a sitelink or redirect target, percent-decoded and normalized.
pub fn sitelink_title(raw: &str) -> String {
    let decoded = percent_encoding::percent_decode_str(raw).decode_utf8_lossy();
    let without_fragment = decoded.split('#').next().unwrap_or("");
    normalize_title(without_fragment)
}
