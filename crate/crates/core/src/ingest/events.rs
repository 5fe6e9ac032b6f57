//! Daily current-events portal pages in wikitext.
//!
//! A day file looks like
//!
//! ```text
//! ;Disasters and accidents
//! * [[2018 Anchorage earthquake]]: A [[magnitude]] 7.0 earthquake hits Alaska...
//! ;Armed conflicts and attacks
//! * [[Syrian civil war]]
//! ** Turkish forces shell [[Afrin, Syria|Afrin]].
//! ```
//!
//! Headers may be written `;Name`, `'''Name'''` or `== Name ==`. Every leaf
//! bullet is one event; a bullet with deeper children is a story heading
//! and only groups its children.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::redirect::RedirectMap;
use super::title::{is_article_title, normalize_title};
use super::{Diagnostic, IngestError};

/// The ten portal categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "Armed conflicts and attacks")]
    ArmedConflicts,
    #[serde(rename = "Arts and culture")]
    ArtsCulture,
    #[serde(rename = "Business and economy")]
    BusinessEconomy,
    #[serde(rename = "Disasters and accidents")]
    DisastersAccidents,
    #[serde(rename = "Health and medicine")]
    HealthMedicine,
    #[serde(rename = "International relations")]
    InternationalRelations,
    #[serde(rename = "Law and crime")]
    LawCrime,
    #[serde(rename = "Politics and elections")]
    PoliticsElections,
    #[serde(rename = "Science and technology")]
    ScienceTechnology,
    #[serde(rename = "Sports")]
    Sports,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::ArmedConflicts,
        Category::ArtsCulture,
        Category::BusinessEconomy,
        Category::DisastersAccidents,
        Category::HealthMedicine,
        Category::InternationalRelations,
        Category::LawCrime,
        Category::PoliticsElections,
        Category::ScienceTechnology,
        Category::Sports,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ArmedConflicts => "Armed conflicts and attacks",
            Category::ArtsCulture => "Arts and culture",
            Category::BusinessEconomy => "Business and economy",
            Category::DisastersAccidents => "Disasters and accidents",
            Category::HealthMedicine => "Health and medicine",
            Category::InternationalRelations => "International relations",
            Category::LawCrime => "Law and crime",
            Category::PoliticsElections => "Politics and elections",
            Category::ScienceTechnology => "Science and technology",
            Category::Sports => "Sports",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// One dated, categorized portal entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: String,
    pub date: NaiveDate,
    pub category: Category,
    pub description: String,
    /// Canonical titles of the articles linked from the description.
    pub core_articles: BTreeSet<String>,
}

/// Records parsed from one day file plus everything that was skipped.
#[derive(Debug, Default, Clone)]
pub struct EventParse {
    pub records: Vec<EventRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Date encoded in a portal day file name (`YYYY-MM-DD.wiki`).
pub fn event_file_date(file_name: &str) -> Result<NaiveDate, IngestError> {
    let stem = file_name
        .strip_suffix(".wiki")
        .ok_or_else(|| IngestError::BadFileName(file_name.to_string()))?;
    NaiveDate::parse_from_str(stem, "%Y-%m-%d")
        .map_err(|_| IngestError::BadFileName(file_name.to_string()))
}

struct Item {
    line: usize,
    depth: usize,
    text: String,
    category: Option<Category>,
}

/// Parse one day of portal wikitext. Malformed items are skipped with a
/// diagnostic; the rest of the document is still read.
pub fn parse_event_records(document: &str, date: NaiveDate, redirects: &RedirectMap) -> EventParse {
    let mut out = EventParse::default();
    let mut items: Vec<Item> = Vec::new();
    let mut category: Option<Category> = None;
    let mut saw_header = false;

    for (idx, raw) in document.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if let Some(header) = header_text(line) {
            saw_header = true;
            category = match header.parse::<Category>() {
                Ok(c) => Some(c),
                Err(e) => {
                    out.diagnostics.push(Diagnostic::new(lineno, e));
                    None
                }
            };
            continue;
        }
        let depth = line.chars().take_while(|&c| c == '*').count();
        if depth == 0 {
            continue;
        }
        items.push(Item {
            line: lineno,
            depth,
            text: line[depth..].trim().to_string(),
            category,
        });
    }
    if !saw_header && !items.is_empty() {
        out.diagnostics
            .push(Diagnostic::new(0, "no category headers in document"));
    }

    let mut seq = 0usize;
    for (i, item) in items.iter().enumerate() {
        let is_heading = items
            .get(i + 1)
            .is_some_and(|next| next.depth > item.depth);
        if is_heading {
            continue;
        }
        let Some(category) = item.category else {
            out.diagnostics.push(Diagnostic::new(
                item.line,
                "item outside a recognised category; skipped",
            ));
            continue;
        };
        let parsed = match parse_item(&item.text) {
            Ok(p) => p,
            Err(reason) => {
                out.diagnostics
                    .push(Diagnostic::new(item.line, format!("{reason}; item skipped")));
                continue;
            }
        };
        let core: BTreeSet<String> = parsed
            .links
            .iter()
            .map(|t| redirects.resolve(t).to_string())
            .collect();
        if core.is_empty() {
            out.diagnostics
                .push(Diagnostic::new(item.line, "item has no article links; dropped"));
            continue;
        }
        out.records.push(EventRecord {
            event_id: format!("{date}-{seq:03}"),
            date,
            category,
            description: parsed.description,
            core_articles: core,
        });
        seq += 1;
    }
    out
}

fn header_text(line: &str) -> Option<String> {
    let t = line.trim();
    if let Some(rest) = t.strip_prefix(';') {
        return Some(strip_quotes(rest));
    }
    if t.len() > 4 && t.starts_with("==") && t.ends_with("==") {
        return Some(t.trim_matches('=').trim().to_string());
    }
    if t.len() > 6 && t.starts_with("'''") && t.ends_with("'''") && !t.starts_with('*') {
        return Some(strip_quotes(t));
    }
    None
}

fn strip_quotes(s: &str) -> String {
    s.replace("'''", "").replace("''", "").trim().to_string()
}

#[derive(Debug, PartialEq)]
pub(crate) struct ParsedItem {
    pub links: Vec<String>,
    pub description: String,
}

/// Extract normalized link targets and the plain-text rendering of one
/// bullet. Fails on unbalanced link or template brackets.
pub(crate) fn parse_item(text: &str) -> Result<ParsedItem, String> {
    let mut links = Vec::new();
    let mut plain = String::with_capacity(text.len());
    let mut rest = text;

    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix("[[") {
            let end = after.find("]]").ok_or("unclosed [[ link")?;
            let inner = &after[..end];
            if inner.contains("[[") {
                return Err("nested [[ link".into());
            }
            let (target, display) = match inner.split_once('|') {
                Some((t, d)) => (t, d.rsplit('|').next().unwrap_or(d)),
                None => (inner, inner),
            };
            let target = target.split('#').next().unwrap_or("");
            let target = target.strip_prefix(':').unwrap_or(target);
            let title = normalize_title(target);
            if is_article_title(&title) {
                links.push(title);
                plain.push_str(display.trim());
            }
            rest = &after[end + 2..];
        } else if let Some(after) = rest.strip_prefix("{{") {
            let end = after.find("}}").ok_or("unclosed {{ template")?;
            rest = &after[end + 2..];
        } else if rest.starts_with("]]") || rest.starts_with("}}") {
            return Err("unbalanced closing brackets".into());
        } else if let Some(after) = rest.strip_prefix('[') {
            // external link: [url label]
            let end = after.find(']').ok_or("unclosed external link")?;
            let inner = &after[..end];
            if let Some((_, label)) = inner.split_once(' ') {
                plain.push_str(label.trim());
            }
            rest = &after[end + 1..];
        } else if let Some(after) = rest.strip_prefix("<ref") {
            rest = match (after.find("/>"), after.find("</ref>")) {
                (Some(a), Some(b)) if a < b && !after[..a].contains('>') => &after[a + 2..],
                (_, Some(b)) => &after[b + 6..],
                (Some(a), None) => &after[a + 2..],
                (None, None) => return Err("unclosed <ref>".into()),
            };
        } else {
            let ch = rest.chars().next().unwrap();
            plain.push(ch);
            rest = &rest[ch.len_utf8()..];
        }
    }

    let plain = plain.replace("'''", "").replace("''", "");
    let description = plain.split_whitespace().collect::<Vec<_>>().join(" ");
    Ok(ParsedItem { links, description })
}
