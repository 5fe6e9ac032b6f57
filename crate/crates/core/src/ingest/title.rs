//! Article title normalization.
//!
//! Clickstream and page-view dumps write titles with underscores while
//! portal wikitext uses spaces, and MediaWiki treats the first character
//! case-insensitively. Every title entering the system goes through
//! [`normalize_title`].

/// Normalize a raw title: underscores become spaces, runs of whitespace
/// collapse to one space, surrounding whitespace is trimmed and the first
/// character is upper-cased.
pub fn normalize_title(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        let ch = if ch == '_' { ' ' } else { ch };
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if out.is_empty() {
            out.extend(ch.to_uppercase());
        } else {
            out.push(ch);
        }
    }
    out
}

/// Title as written in dump files (spaces back to underscores).
pub fn dump_title(title: &str) -> String {
    title.replace(' ', "_")
}

const NON_ARTICLE_NAMESPACES: &[&str] = &[
    "Talk",
    "User",
    "User talk",
    "Wikipedia",
    "Wikipedia talk",
    "WP",
    "File",
    "File talk",
    "Image",
    "MediaWiki",
    "Template",
    "Template talk",
    "Help",
    "Category",
    "Category talk",
    "Portal",
    "Portal talk",
    "Draft",
    "Module",
    "Special",
    "Media",
];

/// True when a normalized title lives in the article (main) namespace.
pub fn is_article_title(title: &str) -> bool {
    if title.is_empty() {
        return false;
    }
    match title.split_once(':') {
        Some((prefix, _)) => !NON_ARTICLE_NAMESPACES
            .iter()
            .any(|ns| ns.eq_ignore_ascii_case(prefix.trim())),
        None => true,
    }
}
