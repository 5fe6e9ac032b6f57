//! Readers for the raw corpus: portal wikitext, clickstream edge lists,
//! hourly page-view dumps and redirect maps.
//!
//! Parsers are pure per file. Bad rows are skipped and reported through
//! [`Diagnostic`] values (and `log::warn!`); only I/O failures abort.

pub mod clickstream;
pub mod events;
pub mod pageviews;
pub mod redirect;
pub mod store;
pub mod title;

use std::fmt;

pub use clickstream::{parse_clickstream, parse_clickstream_line, ClickRecord, ClickTable, Month};
pub use events::{parse_event_records, Category, EventRecord};
pub use pageviews::{aggregate_daily, parse_pageview_line, DailyAggregator, PageviewLine};
pub use redirect::RedirectMap;
pub use store::DailySeriesStore;
pub use title::normalize_title;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("redirect cycle through {0:?}")]
    RedirectCycle(String),
    #[error("alias {alias:?} redirects to both {first:?} and {second:?}")]
    ConflictingRedirect {
        alias: String,
        first: String,
        second: String,
    },
    #[error("malformed {what} at line {line}: {reason}")]
    Malformed {
        what: &'static str,
        line: usize,
        reason: String,
    },
    #[error("bad file name {0:?}")]
    BadFileName(String),
    #[error("store: {0}")]
    Store(String),
}

/// A skipped input item, kept so callers can report what was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        let d = Self {
            line,
            message: message.into(),
        };
        log::warn!("{d}");
        d
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}
