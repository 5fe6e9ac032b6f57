//! Monthly clickstream edge lists: `prev<TAB>curr<TAB>type<TAB>n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::redirect::RedirectMap;
use super::title::{dump_title, is_article_title};
use super::{Diagnostic, IngestError};

/// Upstream only publishes pairs clicked more than this many times.
pub const MIN_PUBLISHED_CLICKS: u64 = 10;

const MAIN_PAGE: &str = "Main Page";

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    pub year: i32,
    pub month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Month encoded in a dump file name such as
    /// `clickstream-enwiki-2018-01.tsv`.
    pub fn from_file_name(name: &str) -> Result<Self, IngestError> {
        let stem = name.split('.').next().unwrap_or(name);
        if let Some(Ok(m)) = stem.get(stem.len().saturating_sub(7)..).map(str::parse) {
            return Ok(m);
        }
        Err(IngestError::BadFileName(name.to_string()))
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad month {s:?}");
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Month::new(year, month).ok_or_else(bad)
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClickRecord {
    pub source: String,
    pub target: String,
    pub month: Month,
    pub count: u64,
}

/// Parse one clickstream row.
///
/// `Ok(None)` means the row is well formed but not an article-to-article
/// link (external referrer, `other-*` pseudo-title, main page). `Err` means
/// the row is malformed and was rejected.
pub fn parse_clickstream_line(
    line: &str,
    month: Month,
    redirects: &RedirectMap,
) -> Result<Option<ClickRecord>, String> {
    let line = line.trim_end_matches(['\r', '\n']);
    let mut cols = line.split('\t');
    let (Some(prev), Some(curr), Some(kind), Some(n)) =
        (cols.next(), cols.next(), cols.next(), cols.next())
    else {
        return Err("truncated row".into());
    };
    if cols.next().is_some() {
        return Err("too many columns".into());
    }
    let count: u64 = n
        .trim()
        .parse()
        .map_err(|_| format!("non-integer count {n:?}"))?;
    if kind != "link" || prev.starts_with("other-") {
        return Ok(None);
    }
    let source = redirects.canonical(prev);
    let target = redirects.canonical(curr);
    if source == MAIN_PAGE || !is_article_title(&source) || !is_article_title(&target) {
        return Ok(None);
    }
    if count <= MIN_PUBLISHED_CLICKS {
        return Err(format!("count {count} not above the published threshold"));
    }
    Ok(Some(ClickRecord {
        source,
        target,
        month,
        count,
    }))
}

/// Streaming reader over a clickstream file. Yields kept records; rejected
/// rows are collected in [`ClickstreamReader::diagnostics`].
pub struct ClickstreamReader<'a, R> {
    lines: io::Lines<R>,
    month: Month,
    redirects: &'a RedirectMap,
    lineno: usize,
    pub diagnostics: Vec<Diagnostic>,
    pub filtered: usize,
}

pub fn parse_clickstream<R: BufRead>(
    reader: R,
    month: Month,
    redirects: &RedirectMap,
) -> ClickstreamReader<'_, R> {
    ClickstreamReader {
        lines: reader.lines(),
        month,
        redirects,
        lineno: 0,
        diagnostics: Vec::new(),
        filtered: 0,
    }
}

impl<R: BufRead> Iterator for ClickstreamReader<'_, R> {
    type Item = io::Result<ClickRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e)),
            };
            self.lineno += 1;
            if line.is_empty() {
                continue;
            }
            match parse_clickstream_line(&line, self.month, self.redirects) {
                Ok(Some(rec)) => return Some(Ok(rec)),
                Ok(None) => self.filtered += 1,
                Err(reason) => self
                    .diagnostics
                    .push(Diagnostic::new(self.lineno, format!("clickstream row rejected: {reason}"))),
            }
        }
    }
}

/// All article-to-article click counts, indexed for neighborhood queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClickTable {
    out: BTreeMap<String, BTreeMap<String, BTreeMap<Month, u64>>>,
    inn: BTreeMap<String, BTreeSet<String>>,
}

impl ClickTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a record. Counts for the same (source, target, month) are summed,
    /// which happens when two aliases canonicalize to one title.
    pub fn insert(&mut self, rec: ClickRecord) {
        *self
            .out
            .entry(rec.source.clone())
            .or_default()
            .entry(rec.target.clone())
            .or_default()
            .entry(rec.month)
            .or_insert(0) += rec.count;
        self.inn.entry(rec.target).or_default().insert(rec.source);
    }

    pub fn extend<I: IntoIterator<Item = ClickRecord>>(&mut self, recs: I) {
        for r in recs {
            self.insert(r);
        }
    }

    pub fn count(&self, source: &str, target: &str, month: Month) -> u64 {
        self.out
            .get(source)
            .and_then(|m| m.get(target))
            .and_then(|m| m.get(&month))
            .copied()
            .unwrap_or(0)
    }

    /// Targets linked from `source`, with their per-month counts.
    pub fn out_links(&self, source: &str) -> impl Iterator<Item = (&str, &BTreeMap<Month, u64>)> {
        self.out
            .get(source)
            .into_iter()
            .flat_map(|m| m.iter().map(|(t, c)| (t.as_str(), c)))
    }

    /// Sources linking to `target` in any month.
    pub fn in_links(&self, target: &str) -> impl Iterator<Item = &str> {
        self.inn
            .get(target)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    /// True when the pair has a positive count in any of `months`.
    pub fn linked_in(&self, source: &str, target: &str, months: &[Month]) -> bool {
        months.iter().any(|&m| self.count(source, target, m) > 0)
    }

    pub fn records(&self) -> impl Iterator<Item = ClickRecord> + '_ {
        self.out.iter().flat_map(|(s, targets)| {
            targets.iter().flat_map(move |(t, months)| {
                months.iter().map(move |(m, c)| ClickRecord {
                    source: s.clone(),
                    target: t.clone(),
                    month: *m,
                    count: *c,
                })
            })
        })
    }

    pub fn len(&self) -> usize {
        self.out
            .values()
            .flat_map(|t| t.values())
            .map(BTreeMap::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    /// Canonical interchange: `month<TAB>source<TAB>target<TAB>count`, sorted.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in self.records() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                r.month,
                dump_title(&r.source),
                dump_title(&r.target),
                r.count
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self, IngestError> {
        let mut table = Self::new();
        let identity = RedirectMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| IngestError::Malformed {
                what: "click table",
                line: i + 1,
                reason: reason.to_string(),
            };
            let (month, rest) = line.split_once('\t').ok_or_else(|| malformed("missing month"))?;
            let month: Month = month.parse().map_err(|e: String| malformed(&e))?;
            let mut cols = rest.split('\t');
            let (Some(s), Some(t), Some(n), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(malformed("expected 4 columns"));
            };
            let count: u64 = n.parse().map_err(|_| malformed("bad count"))?;
            table.insert(ClickRecord {
                source: identity.canonical(s),
                target: identity.canonical(t),
                month,
                count,
            });
        }
        Ok(table)
    }
}
