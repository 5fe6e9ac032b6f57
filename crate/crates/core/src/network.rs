//! Per-event article networks with attached daily page-view windows.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::graph::{GraphBuilder, WeightedGraph};
use crate::ingest::{ClickTable, DailySeriesStore, EventRecord, Month};

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("series file line {line}: {reason}")]
    Series { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Window length in days; the event date sits at index `window_days / 2`.
    pub window_days: usize,
    /// Edges whose window-averaged click weight is not strictly above this
    /// are removed.
    pub edge_threshold: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            window_days: 61,
            edge_threshold: 100.0,
        }
    }
}

impl NetworkConfig {
    pub fn event_index(&self) -> usize {
        self.window_days / 2
    }

    pub fn window_start(&self, date: NaiveDate) -> NaiveDate {
        date - Duration::days(self.event_index() as i64)
    }
}

/// Months overlapped by the window around `date`, each with the number of
/// window days falling in it.
pub fn window_month_days(date: NaiveDate, window_days: usize) -> Vec<(Month, usize)> {
    let start = date - Duration::days((window_days / 2) as i64);
    let mut out: Vec<(Month, usize)> = Vec::new();
    for i in 0..window_days {
        let m = Month::of(start + Duration::days(i as i64));
        match out.last_mut() {
            Some((last, n)) if *last == m => *n += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

/// Fraction of the 61-day window around `date` falling in each month.
pub fn window_month_weights(date: NaiveDate) -> Vec<(Month, f64)> {
    let total = NetworkConfig::default().window_days;
    window_month_days(date, total)
        .into_iter()
        .map(|(m, n)| (m, n as f64 / total as f64))
        .collect()
}

/// One event's article graph and its page-view window.
#[derive(Debug, Clone, PartialEq)]
pub struct EventNetwork {
    pub event: EventRecord,
    /// Directed, click-weighted graph. Node order is sorted by title.
    pub graph: WeightedGraph,
    pub window_start: NaiveDate,
    pub window_days: usize,
    /// Daily views per graph node (same index); empty until attached.
    pub series: Vec<Vec<f64>>,
    /// Core articles that did not survive thresholding.
    pub dropped_core: Vec<String>,
    /// Nodes with no page-view record at all.
    pub missing_series: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkManifest {
    event: EventRecord,
    window_start: NaiveDate,
    window_days: usize,
    degenerate: bool,
    dropped_core: Vec<String>,
    missing_series: Vec<String>,
}

impl EventNetwork {
    /// No nodes survived the edge threshold.
    pub fn is_degenerate(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn event_index(&self) -> usize {
        self.window_days / 2
    }

    /// Graph indices of core articles present in the network.
    pub fn core_nodes(&self) -> Vec<usize> {
        self.event
            .core_articles
            .iter()
            .filter_map(|t| self.graph.index_of(t))
            .collect()
    }

    pub fn series_of(&self, title: &str) -> Option<&[f64]> {
        self.graph
            .index_of(title)
            .and_then(|i| self.series.get(i))
            .map(Vec::as_slice)
    }

    /// Write `edges.tsv`, `series.tsv` and `manifest.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), NetworkError> {
        fs::create_dir_all(dir)?;
        let mut edges = Vec::new();
        self.graph.write_edgelist(&mut edges)?;
        fs::write(dir.join("edges.tsv"), edges)?;

        let mut series = Vec::new();
        for (i, label) in self.graph.labels().iter().enumerate() {
            write!(series, "{label}")?;
            if let Some(row) = self.series.get(i) {
                for v in row {
                    write!(series, "\t{v}")?;
                }
            }
            writeln!(series)?;
        }
        fs::write(dir.join("series.tsv"), series)?;

        let manifest = NetworkManifest {
            event: self.event.clone(),
            window_start: self.window_start,
            window_days: self.window_days,
            degenerate: self.is_degenerate(),
            dropped_core: self.dropped_core.clone(),
            missing_series: self.missing_series.clone(),
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, NetworkError> {
        let manifest: NetworkManifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let edges = fs::File::open(dir.join("edges.tsv"))?;
        let edge_graph = WeightedGraph::read_edgelist(BufReader::new(edges), true)?;

        // Node order comes from the series file, which lists every node.
        let mut labels = Vec::new();
        let mut series = Vec::new();
        let file = fs::File::open(dir.join("series.tsv"))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let (label, values) = parse_series_line(&line, manifest.window_days).map_err(|reason| {
                NetworkError::Series { line: i + 1, reason }
            })?;
            labels.push(label.to_string());
            series.push(values);
        }
        let mut b = GraphBuilder::with_nodes(true, labels.iter().cloned());
        for e in edge_graph.edges() {
            b.labeled_edge(
                edge_graph.label(e.source).to_string(),
                edge_graph.label(e.target).to_string(),
                e.weight,
            )?;
        }
        let graph = b.build();
        if series.iter().all(Vec::is_empty) {
            series.clear();
        }
        Ok(Self {
            event: manifest.event,
            graph,
            window_start: manifest.window_start,
            window_days: manifest.window_days,
            series,
            dropped_core: manifest.dropped_core,
            missing_series: manifest.missing_series,
        })
    }
}

/// Parse `title<TAB>v0<TAB>...` with either no values or exactly
/// `window_days` of them.
pub fn parse_series_line(line: &str, window_days: usize) -> Result<(&str, Vec<f64>), String> {
    let mut cols = line.split('\t');
    let label = cols.next().filter(|l| !l.is_empty()).ok_or("empty title")?;
    let values = cols
        .map(|c| {
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| format!("bad value {c:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if !values.is_empty() && values.len() != window_days {
        return Err(format!("expected {window_days} values, got {}", values.len()));
    }
    Ok((label, values))
}

/// Core articles plus every article linking to or linked from them within
/// the window, with all links among that node set weighted by the
/// day-fraction average of monthly clicks. Edges at or below the threshold
/// are removed, then isolates.
pub fn build_event_network(event: &EventRecord, clicks: &ClickTable, cfg: &NetworkConfig) -> EventNetwork {
    let month_days = window_month_days(event.date, cfg.window_days);
    let months: Vec<Month> = month_days.iter().map(|(m, _)| *m).collect();

    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    for core in &event.core_articles {
        nodes.insert(core.as_str());
        for (target, counts) in clicks.out_links(core) {
            if months.iter().any(|m| counts.get(m).is_some_and(|&c| c > 0)) {
                nodes.insert(target);
            }
        }
        for source in clicks.in_links(core) {
            if clicks.linked_in(source, core, &months) {
                nodes.insert(source);
            }
        }
    }

    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut b = GraphBuilder::with_nodes(true, nodes.iter().map(|s| s.to_string()));
    let limit = cfg.edge_threshold * cfg.window_days as f64;
    for (u, &source) in nodes.iter().enumerate() {
        for (target, counts) in clicks.out_links(source) {
            let Some(&v) = index.get(target) else { continue };
            if v == u {
                continue;
            }
            // Sum of days-in-month x monthly count; dividing by the window
            // length gives the average. Comparing before the division keeps
            // the threshold test exact.
            let weighted_days: u64 = month_days
                .iter()
                .map(|(m, days)| counts.get(m).copied().unwrap_or(0) * *days as u64)
                .sum();
            if (weighted_days as f64) > limit {
                b.edge(u, v, weighted_days as f64 / cfg.window_days as f64)
                    .expect("finite weight");
            }
        }
    }
    let graph = b.build().filter_edges(|_| true);
    let dropped_core: Vec<String> = event
        .core_articles
        .iter()
        .filter(|t| graph.index_of(t).is_none())
        .cloned()
        .collect();
    if graph.is_empty() {
        log::warn!("event {} has a degenerate network", event.event_id);
    } else if !dropped_core.is_empty() {
        log::info!(
            "event {}: core articles removed by thresholding: {:?}",
            event.event_id,
            dropped_core
        );
    }
    EventNetwork {
        event: event.clone(),
        graph,
        window_start: cfg.window_start(event.date),
        window_days: cfg.window_days,
        series: Vec::new(),
        dropped_core,
        missing_series: Vec::new(),
    }
}

/// Fill the page-view window for every node. Articles absent from the
/// store get all-zero series and are listed in `missing_series`.
pub fn attach_series(mut network: EventNetwork, store: &DailySeriesStore) -> EventNetwork {
    network.missing_series.clear();
    network.series = network
        .graph
        .labels()
        .iter()
        .map(|title| {
            if !store.contains(title) {
                log::warn!(
                    "event {}: no page views for {title:?}",
                    network.event.event_id
                );
                network.missing_series.push(title.clone());
            }
            store.series(title, network.window_start, network.window_days)
        })
        .collect();
    network
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Category, ClickRecord};

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn event(date: &str, core: &[&str]) -> EventRecord {
        EventRecord {
            event_id: format!("{date}-000"),
            date: d(date),
            category: Category::Sports,
            description: String::new(),
            core_articles: core.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn rec(s: &str, t: &str, m: Month, c: u64) -> ClickRecord {
        ClickRecord {
            source: s.into(),
            target: t.into(),
            month: m,
            count: c,
        }
    }

    #[test]
    fn month_weights_for_mid_january() {
        let w = window_month_weights(d("2018-01-16"));
        assert_eq!(
            w,
            vec![
                (Month::new(2017, 12).unwrap(), 15.0 / 61.0),
                (Month::new(2018, 1).unwrap(), 31.0 / 61.0),
                (Month::new(2018, 2).unwrap(), 15.0 / 61.0),
            ]
        );
    }

    #[test]
    fn month_weights_single_month() {
        // A 61-day window never fits in one month; a 21-day one does.
        let w = window_month_days(d("2018-01-16"), 21);
        assert_eq!(w, vec![(Month::new(2018, 1).unwrap(), 21)]);
    }

    #[test]
    fn month_weights_sum_to_one() {
        let mut day = d("2017-01-01");
        while day < d("2019-01-01") {
            let w = window_month_weights(day);
            // February can put four months into one window.
            assert!(w.len() <= 4);
            let s: f64 = w.iter().map(|(_, f)| f).sum();
            assert!((s - 1.0).abs() < 1e-12);
            day += Duration::days(1);
        }
    }

    #[test]
    fn hand_computed_weight_91_is_dropped() {
        // Window with exactly 30 days in one month and 31 in the next:
        // event 2018-07-31 -> 2018-07-01..2018-08-30 (Jul 31, Aug 30).
        let date = d("2018-07-31");
        let days = window_month_days(date, 61);
        assert_eq!(
            days,
            vec![(Month::new(2018, 7).unwrap(), 31), (Month::new(2018, 8).unwrap(), 30)]
        );
        let mut table = ClickTable::new();
        table.insert(rec("Core", "Nb", Month::new(2018, 8).unwrap(), 122));
        table.insert(rec("Core", "Nb", Month::new(2018, 7).unwrap(), 61));
        let net = build_event_network(&event("2018-07-31", &["Core"]), &table, &NetworkConfig::default());
        assert!(net.is_degenerate());
        assert_eq!(net.dropped_core, vec!["Core".to_string()]);

        table.insert(rec("Core", "Nb", Month::new(2018, 8).unwrap(), 300));
        let net = build_event_network(&event("2018-07-31", &["Core"]), &table, &NetworkConfig::default());
        assert_eq!(net.graph.edge_count(), 1);
        let w = net.graph.edges()[0].weight;
        assert!((w - (422.0 * 30.0 + 61.0 * 31.0) / 61.0).abs() < 1e-12);
    }

    #[test]
    fn single_neighbor_kept_and_weak_neighbor_removed() {
        let m = Month::new(2018, 7).unwrap();
        let prev = Month::new(2018, 6).unwrap();
        let next = Month::new(2018, 8).unwrap();
        let mut table = ClickTable::new();
        for month in [prev, m, next] {
            table.insert(rec("Core", "Strong", month, 500));
            table.insert(rec("Weak", "Core", month, 90));
        }
        let net = build_event_network(&event("2018-07-16", &["Core"]), &table, &NetworkConfig::default());
        assert_eq!(net.graph.labels(), &["Core".to_string(), "Strong".to_string()]);
        assert_eq!(net.graph.edge_count(), 1);
        assert!((net.graph.edges()[0].weight - 500.0).abs() < 1e-9);
        for e in net.graph.edges() {
            assert!(e.weight > 100.0);
        }
    }

    #[test]
    fn links_between_neighbors_included() {
        let m = Month::new(2018, 7).unwrap();
        let mut table = ClickTable::new();
        for month in [Month::new(2018, 6).unwrap(), m, Month::new(2018, 8).unwrap()] {
            table.insert(rec("Core", "A", month, 300));
            table.insert(rec("B", "Core", month, 300));
            table.insert(rec("A", "B", month, 300));
            table.insert(rec("B", "A", month, 300));
            table.insert(rec("A", "Far", month, 300));
        }
        let net = build_event_network(&event("2018-07-16", &["Core"]), &table, &NetworkConfig::default());
        assert_eq!(net.graph.node_count(), 3);
        assert_eq!(net.graph.edge_count(), 4);
        assert!(net.graph.index_of("Far").is_none());
    }

    #[test]
    fn series_attached_with_missing_zeroes() {
        let m = Month::new(2018, 7).unwrap();
        let mut table = ClickTable::new();
        for month in [Month::new(2018, 6).unwrap(), m, Month::new(2018, 8).unwrap()] {
            table.insert(rec("Core", "Other", month, 300));
        }
        let ev = event("2018-07-16", &["Core"]);
        let net = build_event_network(&ev, &table, &NetworkConfig::default());
        let start = net.window_start;
        assert_eq!(start, d("2018-06-16"));
        let store = DailySeriesStore::from_series(start - Duration::days(5), [("Core".to_string(), vec![100; 80])]);
        let net = attach_series(net, &store);
        assert_eq!(net.series_of("Core").unwrap(), &[100.0; 61][..]);
        assert_eq!(net.series_of("Other").unwrap(), &[0.0; 61][..]);
        assert_eq!(net.missing_series, vec!["Other".to_string()]);

        let dir = tempfile::tempdir().unwrap();
        net.write_dir(dir.path()).unwrap();
        let back = EventNetwork::read_dir(dir.path()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn series_line_parse() {
        assert!(parse_series_line("A\t1\t2", 2).is_ok());
        assert!(parse_series_line("A\t1", 2).is_err());
        assert!(parse_series_line("A\t-1\t2", 2).is_err());
        assert_eq!(parse_series_line("A", 2).unwrap().1, Vec::<f64>::new());
        assert!(parse_series_line("", 2).is_err());
    }
}
