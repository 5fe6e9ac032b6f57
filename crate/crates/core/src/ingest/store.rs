//! Daily page-view store.
//!
//! On disk a store is a directory:
//!
//! * `index.tsv` starts with the line `#daily-series-store v1`, followed by
//!   one line per article: `title<TAB>chunk<TAB>offset<TAB>first_day<TAB>n_days`
//!   (title with underscores, `first_day` as `YYYY-MM-DD`).
//! * `chunk-NNNNN.bin` files start with the magic `DSS1` and a little-endian
//!   `u32` record count. Each record is `n_days` little-endian `u64` daily
//!   counts for consecutive days starting at `first_day`; `offset` is the
//!   record's byte position inside its chunk.
//!
//! Days outside a record, and articles absent from the index, read as 0.
//! A TSV export (`title<TAB>date<TAB>views`, non-zero days only) exists
//! for debugging.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};

use super::title::{dump_title, normalize_title};
use super::IngestError;

const INDEX_HEADER: &str = "#daily-series-store v1";
const CHUNK_MAGIC: &[u8; 4] = b"DSS1";
const TITLES_PER_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Record {
    first_day: NaiveDate,
    views: Vec<u64>,
}

impl Record {
    fn get(&self, day: NaiveDate) -> u64 {
        let off = (day - self.first_day).num_days();
        if off < 0 {
            return 0;
        }
        self.views.get(off as usize).copied().unwrap_or(0)
    }
}

/// Canonical title × day → views. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DailySeriesStore {
    records: BTreeMap<String, Record>,
}

/// One parsed `index.tsv` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub title: String,
    pub chunk: usize,
    pub offset: usize,
    pub first_day: NaiveDate,
    pub n_days: usize,
}

impl DailySeriesStore {
    pub fn from_counts(counts: BTreeMap<String, BTreeMap<NaiveDate, u64>>) -> Self {
        let mut records = BTreeMap::new();
        for (title, days) in counts {
            let (Some((&first, _)), Some((&last, _))) = (days.first_key_value(), days.last_key_value())
            else {
                continue;
            };
            let len = (last - first).num_days() as usize + 1;
            let mut views = vec![0u64; len];
            for (day, v) in days {
                views[(day - first).num_days() as usize] += v;
            }
            records.insert(title, Record { first_day: first, views });
        }
        Self { records }
    }

    /// Build from dense per-title series starting at `first_day`.
    pub fn from_series<I>(first_day: NaiveDate, series: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<u64>)>,
    {
        let records = series
            .into_iter()
            .map(|(t, views)| (t, Record { first_day, views }))
            .collect();
        Self { records }
    }

    pub fn get(&self, title: &str, day: NaiveDate) -> u64 {
        self.records.get(title).map_or(0, |r| r.get(day))
    }

    pub fn contains(&self, title: &str) -> bool {
        self.records.contains_key(title)
    }

    /// `len` consecutive daily values starting at `start`.
    pub fn series(&self, title: &str, start: NaiveDate, len: usize) -> Vec<f64> {
        match self.records.get(title) {
            Some(r) => (0..len)
                .map(|i| r.get(start + Duration::days(i as i64)) as f64)
                .collect(),
            None => vec![0.0; len],
        }
    }

    pub fn titles(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total(&self, title: &str) -> u64 {
        self.records.get(title).map_or(0, |r| r.views.iter().sum())
    }

    /// Write the chunked binary layout into `dir` (created if needed).
    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        fs::create_dir_all(dir)?;
        let mut index = String::from(INDEX_HEADER);
        index.push('\n');
        let entries: Vec<(&String, &Record)> = self.records.iter().collect();
        for (chunk_id, chunk) in entries.chunks(TITLES_PER_CHUNK).enumerate() {
            let mut buf = Vec::new();
            buf.extend_from_slice(CHUNK_MAGIC);
            buf.extend_from_slice(&(chunk.len() as u32).to_le_bytes());
            for (title, rec) in chunk {
                index.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    dump_title(title),
                    chunk_id,
                    buf.len(),
                    rec.first_day,
                    rec.views.len()
                ));
                for v in &rec.views {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            fs::write(dir.join(chunk_name(chunk_id)), buf)?;
        }
        fs::write(dir.join("index.tsv"), index)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, IngestError> {
        let index = fs::read_to_string(dir.join("index.tsv"))?;
        let entries = Self::parse_index(&index)?;
        let mut chunks: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
        let mut records = BTreeMap::new();
        for e in entries {
            let bytes = match chunks.entry(e.chunk) {
                std::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::btree_map::Entry::Vacant(v) => {
                    let bytes = fs::read(dir.join(chunk_name(e.chunk)))?;
                    check_chunk_header(&bytes)?;
                    v.insert(bytes)
                }
            };
            let views = decode_record(bytes, e.offset, e.n_days)?;
            records.insert(
                e.title,
                Record {
                    first_day: e.first_day,
                    views,
                },
            );
        }
        Ok(Self { records })
    }

    /// Parse the plain-text index.
    pub fn parse_index(text: &str) -> Result<Vec<IndexEntry>, IngestError> {
        let mut lines = text.lines();
        if lines.next() != Some(INDEX_HEADER) {
            return Err(IngestError::Store("missing or unknown index header".into()));
        }
        let mut out = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| IngestError::Malformed {
                what: "store index",
                line: i + 2,
                reason: reason.to_string(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [title, chunk, offset, first_day, n_days] = cols[..] else {
                return Err(malformed("expected 5 columns"));
            };
            let title = normalize_title(title);
            if title.is_empty() {
                return Err(malformed("empty title"));
            }
            out.push(IndexEntry {
                title,
                chunk: chunk.parse().map_err(|_| malformed("bad chunk id"))?,
                offset: offset.parse().map_err(|_| malformed("bad offset"))?,
                first_day: NaiveDate::parse_from_str(first_day, "%Y-%m-%d")
                    .map_err(|_| malformed("bad first day"))?,
                n_days: n_days.parse().map_err(|_| malformed("bad day count"))?,
            });
        }
        Ok(out)
    }

    /// Debug export, one line per non-zero (title, day).
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (title, rec) in &self.records {
            for (i, v) in rec.views.iter().enumerate() {
                if *v > 0 {
                    writeln!(
                        w,
                        "{}\t{}\t{}",
                        dump_title(title),
                        rec.first_day + Duration::days(i as i64),
                        v
                    )?;
                }
            }
        }
        Ok(())
    }
}

fn chunk_name(id: usize) -> String {
    format!("chunk-{id:05}.bin")
}

fn check_chunk_header(bytes: &[u8]) -> Result<u32, IngestError> {
    if bytes.len() < 8 || &bytes[..4] != CHUNK_MAGIC {
        return Err(IngestError::Store("bad chunk header".into()));
    }
    Ok(u32::from_le_bytes(bytes[4..8].try_into().unwrap()))
}

fn decode_record(bytes: &[u8], offset: usize, n_days: usize) -> Result<Vec<u64>, IngestError> {
    let end = n_days
        .checked_mul(8)
        .and_then(|n| n.checked_add(offset))
        .ok_or_else(|| IngestError::Store("record length overflow".into()))?;
    if offset < 8 || end > bytes.len() {
        return Err(IngestError::Store(format!(
            "record at {offset} with {n_days} days exceeds chunk of {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes[offset..end]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Decode every record of a chunk given as `(offset, n_days)` pairs.
/// Exposed for fuzzing the binary layout.
pub fn decode_chunk(bytes: &[u8], layout: &[(usize, usize)]) -> Result<Vec<Vec<u64>>, IngestError> {
    let count = check_chunk_header(bytes)? as usize;
    if count < layout.len() {
        return Err(IngestError::Store("more records than chunk header declares".into()));
    }
    layout
        .iter()
        .map(|&(off, n)| decode_record(bytes, off, n))
        .collect()
}
