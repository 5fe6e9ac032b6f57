//! Hourly page-view dumps (`project title count bytes`) summed to UTC days.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use chrono::NaiveDate;

use super::redirect::RedirectMap;
use super::store::DailySeriesStore;
use super::title::{is_article_title, normalize_title};
use super::IngestError;

/// Desktop, mobile and Zero project codes of the English edition.
pub const DEFAULT_PREFIXES: [&str; 3] = ["en.z", "en.m", "en.zero"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageviewLine<'a> {
    pub project: &'a str,
    pub title: &'a str,
    pub count: u64,
    pub bytes: u64,
}

pub fn parse_pageview_line(line: &str) -> Result<PageviewLine<'_>, String> {
    let mut cols = line.trim_end_matches(['\r', '\n']).split(' ');
    let (Some(project), Some(title), Some(count), Some(bytes)) =
        (cols.next(), cols.next(), cols.next(), cols.next())
    else {
        return Err("expected 4 space-separated fields".into());
    };
    if cols.next().is_some() {
        return Err("too many fields".into());
    }
    if project.is_empty() || title.is_empty() {
        return Err("empty project or title".into());
    }
    let count = count.parse().map_err(|_| format!("bad count {count:?}"))?;
    let bytes = bytes.parse().map_err(|_| format!("bad byte count {bytes:?}"))?;
    Ok(PageviewLine {
        project,
        title,
        count,
        bytes,
    })
}

/// Date and hour of an hourly dump named `pageviews-YYYYMMDD-HH0000`.
pub fn hour_file_stamp(name: &str) -> Result<(NaiveDate, u32), IngestError> {
    let bad = || IngestError::BadFileName(name.to_string());
    let stem = name.split('.').next().unwrap_or(name);
    let rest = stem.strip_prefix("pageviews-").ok_or_else(bad)?;
    let (day, time) = rest.split_once('-').ok_or_else(bad)?;
    let date = NaiveDate::parse_from_str(day, "%Y%m%d").map_err(|_| bad())?;
    if time.len() != 6 || !time.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let hour: u32 = time[..2].parse().map_err(|_| bad())?;
    if hour > 23 {
        return Err(bad());
    }
    Ok((date, hour))
}

/// Accumulates hourly lines into daily per-canonical-title totals.
#[derive(Debug)]
pub struct DailyAggregator<'a> {
    prefixes: BTreeSet<String>,
    redirects: &'a RedirectMap,
    counts: BTreeMap<String, BTreeMap<NaiveDate, u64>>,
    /// Lines that could not be parsed.
    pub skipped: usize,
    /// Well-formed lines for other projects or namespaces.
    pub filtered: usize,
}

impl<'a> DailyAggregator<'a> {
    pub fn new<I, S>(prefixes: I, redirects: &'a RedirectMap) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            prefixes: prefixes.into_iter().map(Into::into).collect(),
            redirects,
            counts: BTreeMap::new(),
            skipped: 0,
            filtered: 0,
        }
    }

    pub fn with_default_prefixes(redirects: &'a RedirectMap) -> Self {
        Self::new(DEFAULT_PREFIXES, redirects)
    }

    pub fn add_line(&mut self, day: NaiveDate, line: &str) {
        if line.is_empty() {
            return;
        }
        let parsed = match parse_pageview_line(line) {
            Ok(p) => p,
            Err(_) => {
                self.skipped += 1;
                return;
            }
        };
        if !self.prefixes.contains(parsed.project) {
            self.filtered += 1;
            return;
        }
        let title = normalize_title(parsed.title);
        if !is_article_title(&title) {
            self.filtered += 1;
            return;
        }
        let canonical = self.redirects.resolve(&title).to_string();
        *self
            .counts
            .entry(canonical)
            .or_default()
            .entry(day)
            .or_insert(0) += parsed.count;
    }

    /// Read one hourly file. `day` is the UTC date of the hour.
    pub fn add_hour<R: BufRead>(&mut self, day: NaiveDate, reader: R) -> std::io::Result<()> {
        for line in reader.lines() {
            self.add_line(day, &line?);
        }
        Ok(())
    }

    pub fn finish(self) -> DailySeriesStore {
        if self.skipped > 0 {
            log::warn!("{} unparseable page-view lines skipped", self.skipped);
        }
        DailySeriesStore::from_counts(self.counts)
    }
}

/// Sum hourly lines (each tagged with its UTC day) into a daily store.
/// Returns the store and the number of unparseable lines.
pub fn aggregate_daily<I, S>(
    hourly_lines: I,
    domain_prefixes: &[&str],
    redirects: &RedirectMap,
) -> (DailySeriesStore, usize)
where
    I: IntoIterator<Item = (NaiveDate, S)>,
    S: AsRef<str>,
{
    let mut agg = DailyAggregator::new(domain_prefixes.iter().copied(), redirects);
    for (day, line) in hourly_lines {
        agg.add_line(day, line.as_ref());
    }
    let skipped = agg.skipped;
    (agg.finish(), skipped)
}
