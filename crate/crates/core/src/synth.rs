//! Synthetic corpora with planted article communities and planted attention
//! spikes, plus recovery scores against the planted truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::community::{ami, element_centric, CommunityError, Partition, DEFAULT_ALPHA};
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::ingest::title::dump_title;
use crate::ingest::{parse_event_records, Category, ClickRecord, ClickTable, DailySeriesStore, EventRecord, Month, RedirectMap};
use crate::network::{window_month_days, NetworkConfig};
use crate::reactions::{passes_gate, ComparisonResult, EventReaction, ReactionError};
use crate::stats::{geometric_mean, median, quantile};
use crate::topics::TopicOfAttention;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which articles share the daily modulation and receive the spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikePattern {
    /// Attention groups coincide with the link communities; group 0 spikes.
    #[default]
    Community,
    /// Every article of an event follows one shape and spikes.
    Uniform,
    /// Attention groups cut across link communities: the first half of
    /// each community forms the spiking group.
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub events: usize,
    /// Articles per event besides the event's own hub article.
    pub articles_per_event: usize,
    pub communities_per_event: usize,
    /// Probability of a link for each ordered pair inside a community.
    pub intra_probability: f64,
    /// Probability of a link for each ordered pair across communities.
    pub inter_probability: f64,
    /// Monthly click range for links inside a community and from the hub.
    pub intra_clicks: (u64, u64),
    pub inter_clicks: (u64, u64),
    /// Range of per-article base daily views.
    pub base_views: (u64, u64),
    /// Spiking articles are multiplied by `1 + spike_amplitude`.
    pub spike_amplitude: f64,
    /// Spike length in days from the event day.
    pub spike_days: usize,
    /// Log-normal spread of independent per-article daily noise.
    pub noise: f64,
    /// Strength of the daily modulation shared within an attention group.
    pub coherence: f64,
    pub pattern: SpikePattern,
    /// When non-zero, events are dealt round-robin into this many topics
    /// whose spiking articles are shared by every event of the topic.
    pub topics: usize,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            events: 20,
            articles_per_event: 100,
            communities_per_event: 4,
            intra_probability: 0.8,
            inter_probability: 0.01,
            intra_clicks: (150, 1500),
            inter_clicks: (150, 600),
            base_views: (500, 3000),
            spike_amplitude: 4.0,
            spike_days: 4,
            noise: 0.05,
            coherence: 0.3,
            pattern: SpikePattern::Community,
            topics: 0,
            start_date: NaiveDate::from_ymd_opt(2018, 3, 1).expect("valid date"),
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        for p in [self.intra_probability, self.inter_probability] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        if !(self.spike_amplitude >= 0.0 && self.noise >= 0.0 && self.coherence >= 0.0) {
            return bad("amplitude, noise and coherence must be non-negative");
        }
        if self.communities_per_event == 0 || self.articles_per_event < self.communities_per_event {
            return bad("need at least one article per community");
        }
        if self.articles_per_event < 2 {
            return bad("need at least two articles per event");
        }
        for (lo, hi) in [self.intra_clicks, self.inter_clicks, self.base_views] {
            if lo > hi {
                return bad("ranges must have lo <= hi");
            }
        }
        if self.intra_clicks.0 <= 10 || self.inter_clicks.0 <= 10 {
            return bad("click counts must exceed 10");
        }
        if self.spike_days == 0 || self.spike_days > NetworkConfig::default().event_index() {
            return bad("spike must last between one day and half the window");
        }
        Ok(())
    }
}

/// One generated event with its planted structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedEvent {
    pub record: EventRecord,
    pub topic: Option<usize>,
    /// Link communities; the hub article sits in community 0.
    pub communities: Vec<Vec<String>>,
    /// Attention groups; group 0 receives the spike.
    pub groups: Vec<Vec<String>>,
    pub wikitext: String,
}

impl PlantedEvent {
    pub fn spiking(&self) -> BTreeSet<String> {
        self.groups[0].iter().cloned().collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub events: Vec<PlantedEvent>,
    pub redirects: RedirectMap,
    /// Monthly clicks keyed by canonical titles.
    pub clicks: BTreeMap<Month, BTreeMap<(String, String), u64>>,
    /// Daily views per canonical title.
    pub views: BTreeMap<String, BTreeMap<NaiveDate, u64>>,
}

fn hub_title(event: usize) -> String {
    format!("Synth e{event:02} hub")
}

fn hub_alias(event: usize) -> String {
    format!("Synth e{event:02} event")
}

fn split_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

fn event_date(cfg: &SynthConfig, i: usize) -> NaiveDate {
    let spacing = NetworkConfig::default().window_days + 10;
    let offset = i
        .checked_div(cfg.topics)
        .map_or(i, |cycle| cycle * spacing + i % cfg.topics);
    cfg.start_date + Duration::days(offset as i64)
}

fn window_days(date: NaiveDate) -> impl Iterator<Item = NaiveDate> {
    let cfg = NetworkConfig::default();
    let start = cfg.window_start(date);
    (0..cfg.window_days).map(move |d| start + Duration::days(d as i64))
}

fn window_months(date: NaiveDate) -> Vec<Month> {
    window_month_days(date, NetworkConfig::default().window_days)
        .into_iter()
        .map(|(m, _)| m)
        .collect()
}

/// Directed links among `members` with probability `p` per ordered pair.
fn sample_links(
    rng: &mut ChaCha8Rng,
    from: &[String],
    to: &[String],
    p: f64,
    out: &mut BTreeMap<(String, String), (u64, u64)>,
    range: (u64, u64),
) {
    for a in from {
        for b in to {
            if a != b && rng.random::<f64>() < p {
                out.entry((a.clone(), b.clone())).or_insert(range);
            }
        }
    }
}

/// Generate a corpus. Identical configs give identical corpora.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = split_sizes(cfg.articles_per_event, cfg.communities_per_event);

    // Shared spiking communities per topic.
    let topic_members: Vec<Vec<String>> = (0..cfg.topics)
        .map(|t| (0..sizes[0]).map(|j| format!("Synth topic {t} a{j:02}")).collect())
        .collect();
    let mut shared_links: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for members in &topic_members {
        sample_links(&mut rng, members, members, cfg.intra_probability, &mut shared_links, cfg.intra_clicks);
    }

    let mut events = Vec::with_capacity(cfg.events);
    let mut event_links: Vec<BTreeMap<(String, String), (u64, u64)>> = Vec::with_capacity(cfg.events);
    let mut redirect_pairs = Vec::new();
    for i in 0..cfg.events {
        let date = event_date(cfg, i);
        let topic = (cfg.topics > 0).then(|| i % cfg.topics);
        let hub = hub_title(i);
        let mut communities: Vec<Vec<String>> = sizes
            .iter()
            .enumerate()
            .map(|(c, &n)| match (c, topic) {
                (0, Some(t)) => topic_members[t].clone(),
                _ => (0..n).map(|j| format!("Synth e{i:02} c{c} a{j:02}")).collect(),
            })
            .collect();
        communities[0].insert(0, hub.clone());

        let groups: Vec<Vec<String>> = match cfg.pattern {
            SpikePattern::Community => communities.clone(),
            SpikePattern::Uniform => vec![communities.concat()],
            SpikePattern::Orthogonal => {
                let (mut first, mut second) = (Vec::new(), Vec::new());
                for c in &communities {
                    let half = c.len().div_ceil(2);
                    first.extend_from_slice(&c[..half]);
                    second.extend_from_slice(&c[half..]);
                }
                vec![first, second]
            }
        };

        let mut links = BTreeMap::new();
        for (c, members) in communities.iter().enumerate() {
            if c == 0 && topic.is_some() {
                // the shared part is generated once per topic
                sample_links(&mut rng, &members[..1], &members[1..], cfg.intra_probability, &mut links, cfg.intra_clicks);
                sample_links(&mut rng, &members[1..], &members[..1], cfg.intra_probability, &mut links, cfg.intra_clicks);
            } else {
                sample_links(&mut rng, members, members, cfg.intra_probability, &mut links, cfg.intra_clicks);
            }
        }
        for (a, ca) in communities.iter().enumerate() {
            for (b, cb) in communities.iter().enumerate() {
                if a != b {
                    sample_links(&mut rng, ca, cb, cfg.inter_probability, &mut links, cfg.inter_clicks);
                }
            }
        }
        for members in &communities {
            for m in members {
                if *m != hub {
                    links.entry((hub.clone(), m.clone())).or_insert(cfg.intra_clicks);
                }
            }
        }
        event_links.push(links);

        let category = Category::ALL[i % Category::ALL.len()];
        let second = &groups[0].iter().find(|a| **a != hub).expect("spiking group has a member").clone();
        let wikitext = format!(
            ";{category}\n* [[{}|Synthetic event {i}]] draws attention to [[{second}]].\n",
            hub_alias(i)
        );
        redirect_pairs.push((hub_alias(i), hub.clone()));
        events.push((date, topic, communities, groups, wikitext));
    }
    let redirects = RedirectMap::from_pairs(redirect_pairs).map_err(|e| SynthError::Config(e.to_string()))?;

    let events: Vec<PlantedEvent> = events
        .into_iter()
        .map(|(date, topic, communities, groups, wikitext)| {
            let mut parsed = parse_event_records(&wikitext, date, &redirects);
            assert!(parsed.diagnostics.is_empty(), "generated wikitext parses cleanly");
            PlantedEvent {
                record: parsed.records.remove(0),
                topic,
                communities,
                groups,
                wikitext,
            }
        })
        .collect();

    // Monthly clicks: event links in the event's window months, shared
    // links in every month of the corpus.
    let all_months: BTreeSet<Month> = events.iter().flat_map(|e| window_months(e.record.date)).collect();
    let mut clicks: BTreeMap<Month, BTreeMap<(String, String), u64>> = BTreeMap::new();
    let mut emit = |rng: &mut ChaCha8Rng, month: Month, links: &BTreeMap<(String, String), (u64, u64)>| {
        let table = clicks.entry(month).or_default();
        for (pair, &(lo, hi)) in links {
            table.insert(pair.clone(), rng.random_range(lo..=hi));
        }
    };
    for &m in &all_months {
        emit(&mut rng, m, &shared_links);
    }
    for (e, links) in events.iter().zip(&event_links) {
        for m in window_months(e.record.date) {
            emit(&mut rng, m, links);
        }
    }

    let views = generate_views(cfg, &events, &mut rng);
    Ok(SynthCorpus {
        config: cfg.clone(),
        events,
        redirects,
        clicks,
        views,
    })
}

fn generate_views(
    cfg: &SynthConfig,
    events: &[PlantedEvent],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, BTreeMap<NaiveDate, u64>> {
    // Attention group key per article, days each article is needed, and
    // the days on which it spikes.
    let mut group_of: BTreeMap<&str, String> = BTreeMap::new();
    let mut needed: BTreeMap<&str, BTreeSet<NaiveDate>> = BTreeMap::new();
    let mut spikes: BTreeMap<&str, BTreeSet<NaiveDate>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        for (g, members) in e.groups.iter().enumerate() {
            let key = match e.topic {
                Some(t) if g == 0 => format!("t{t}"),
                _ => format!("e{i}g{g}"),
            };
            for a in members {
                group_of.entry(a.as_str()).or_insert_with(|| key.clone());
                needed.entry(a.as_str()).or_default().extend(window_days(e.record.date));
                if g == 0 {
                    let days = (0..cfg.spike_days).map(|d| e.record.date + Duration::days(d as i64));
                    spikes.entry(a.as_str()).or_default().extend(days);
                }
            }
        }
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut group_days: BTreeMap<&str, BTreeSet<NaiveDate>> = BTreeMap::new();
    for (a, days) in &needed {
        group_days.entry(group_of[a].as_str()).or_default().extend(days);
    }
    let mut factor: BTreeMap<(&str, NaiveDate), f64> = BTreeMap::new();
    for (g, days) in &group_days {
        for &d in days {
            let z: f64 = normal.sample(rng);
            factor.insert((g, d), (1.0 + cfg.coherence * z).max(0.05));
        }
    }

    let mut views = BTreeMap::new();
    for (a, days) in needed {
        let base = rng.random_range(cfg.base_views.0..=cfg.base_views.1) as f64;
        let g = group_of[a].as_str();
        let spiking = spikes.get(a);
        let mut series = BTreeMap::new();
        for d in days {
            let eps: f64 = normal.sample(rng);
            let mut rate = base * factor[&(g, d)] * (cfg.noise * eps - cfg.noise * cfg.noise / 2.0).exp();
            if spiking.is_some_and(|s| s.contains(&d)) {
                rate *= 1.0 + cfg.spike_amplitude;
            }
            let count = if rate > 0.0 {
                Poisson::new(rate).expect("positive rate").sample(rng) as u64
            } else {
                0
            };
            series.insert(d, count);
        }
        views.insert(a.to_string(), series);
    }
    views
}

impl SynthCorpus {
    pub fn click_table(&self) -> ClickTable {
        let mut table = ClickTable::new();
        for (&month, links) in &self.clicks {
            table.extend(links.iter().map(|((s, t), &count)| ClickRecord {
                source: s.clone(),
                target: t.clone(),
                month,
                count,
            }));
        }
        table
    }

    pub fn store(&self) -> DailySeriesStore {
        DailySeriesStore::from_counts(self.views.clone())
    }

    pub fn records(&self) -> Vec<EventRecord> {
        self.events.iter().map(|e| e.record.clone()).collect()
    }

    /// Spiking articles per event id.
    pub fn spiking(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.events
            .iter()
            .map(|e| (e.record.event_id.clone(), e.spiking()))
            .collect()
    }

    /// Planted topic per event id (empty without topics).
    pub fn event_topics(&self) -> BTreeMap<String, usize> {
        self.events
            .iter()
            .filter_map(|e| e.topic.map(|t| (e.record.event_id.clone(), t)))
            .collect()
    }

    /// Write the corpus in the raw input layout:
    ///
    /// ```text
    /// events/YYYY-MM-DD.wiki
    /// clickstream/clickstream-enwiki-YYYY-MM.tsv
    /// pageviews/pageviews-YYYYMMDD-000000
    /// redirects.tsv
    /// truth.tsv        event_id, article, attention group (0 spikes)
    /// topics.tsv       event_id, topic (only with topics)
    /// ```
    ///
    /// Views are split between the desktop and mobile projects; the hub
    /// article's mobile views are recorded under its alias.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        let events_dir = dir.join("events");
        let clicks_dir = dir.join("clickstream");
        let views_dir = dir.join("pageviews");
        for d in [&events_dir, &clicks_dir, &views_dir] {
            fs::create_dir_all(d)?;
        }

        let mut by_date: BTreeMap<NaiveDate, String> = BTreeMap::new();
        for e in &self.events {
            by_date.entry(e.record.date).or_default().push_str(&e.wikitext);
        }
        for (date, text) in &by_date {
            fs::write(events_dir.join(format!("{date}.wiki")), text)?;
        }

        for (month, links) in &self.clicks {
            let mut w = io::BufWriter::new(fs::File::create(clicks_dir.join(format!("clickstream-enwiki-{month}.tsv")))?);
            for ((s, t), count) in links {
                writeln!(w, "{}\t{}\tlink\t{count}", dump_title(s), dump_title(t))?;
            }
            for e in &self.events {
                writeln!(w, "other-search\t{}\texternal\t{}", dump_title(&hub_title_of(e)), 5000)?;
            }
            w.flush()?;
        }

        let alias_of: BTreeMap<&str, &str> = self.redirects.iter().map(|(a, c)| (c, a)).collect();
        let mut days: BTreeMap<NaiveDate, Vec<(&str, u64)>> = BTreeMap::new();
        for (title, series) in &self.views {
            for (&d, &v) in series {
                days.entry(d).or_default().push((title, v));
            }
        }
        for (day, rows) in &days {
            let name = format!("pageviews-{}-000000", day.format("%Y%m%d"));
            let mut w = io::BufWriter::new(fs::File::create(views_dir.join(name))?);
            for &(title, v) in rows {
                let desktop = v * 3 / 5;
                let mobile_title = alias_of.get(title).copied().unwrap_or(title);
                writeln!(w, "en.z {} {desktop} 0", dump_title(title))?;
                writeln!(w, "en.m {} {} 0", dump_title(mobile_title), v - desktop)?;
            }
            w.flush()?;
        }

        fs::write(dir.join("redirects.tsv"), self.redirects.to_tsv())?;

        let mut truth = String::new();
        for e in &self.events {
            for (g, members) in e.groups.iter().enumerate() {
                for a in members {
                    truth.push_str(&format!("{}\t{a}\t{g}\n", e.record.event_id));
                }
            }
        }
        fs::write(dir.join("truth.tsv"), truth)?;
        if self.config.topics > 0 {
            let topics: String = self
                .events
                .iter()
                .map(|e| format!("{}\t{}\n", e.record.event_id, e.topic.expect("topic set")))
                .collect();
            fs::write(dir.join("topics.tsv"), topics)?;
        }
        Ok(())
    }
}

fn hub_title_of(e: &PlantedEvent) -> String {
    e.communities[0][0].clone()
}

/// Weighted planted-partition graph: `sizes` blocks, an undirected edge
/// with probability `p_in` inside blocks and `p_out` across, weights drawn
/// uniformly from `weights`. Returns the graph and the planted block of
/// every node.
pub fn planted_partition_graph(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    weights: (f64, f64),
    seed: u64,
) -> (WeightedGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &n)| std::iter::repeat_n(b, n)).collect();
    let n = blocks.len();
    let mut b = GraphBuilder::with_nodes(false, (0..n).map(|i| format!("n{i}")));
    for u in 0..n {
        for v in u + 1..n {
            let p = if blocks[u] == blocks[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                let w = rng.random_range(weights.0..=weights.1);
                b.edge(u, v, w).expect("finite weight");
            }
        }
    }
    (b.build(), blocks)
}

/// Recovery of one event's planted spiking group: gated reactions are
/// merged and compared, as a two-way split of the event's articles, with
/// the planted split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecovery {
    pub event_id: String,
    pub detected: usize,
    pub planted: usize,
    pub element_centric: f64,
    pub ami: f64,
    pub exact: bool,
}

pub fn reaction_recovery(
    network: &crate::network::EventNetwork,
    reactions: &[EventReaction],
    spiking: &BTreeSet<String>,
    gate: f64,
) -> Result<EventRecovery, ReactionError> {
    let mut detected: BTreeSet<String> = BTreeSet::new();
    for r in reactions {
        if passes_gate(network, &r.article_indices(network), gate)? {
            detected.extend(r.articles.iter().cloned());
        }
    }
    let labels = network.graph.labels();
    let found = Partition::from_membership(&labels.iter().map(|a| detected.contains(a)).collect::<Vec<_>>());
    let truth = Partition::from_membership(&labels.iter().map(|a| spiking.contains(a)).collect::<Vec<_>>());
    let planted = labels.iter().filter(|a| spiking.contains(*a)).count();
    Ok(EventRecovery {
        event_id: network.event.event_id.clone(),
        detected: detected.len(),
        planted,
        element_centric: element_centric(&found, &truth, DEFAULT_ALPHA).expect("same node set"),
        ami: ami(&found, &truth).expect("same node set"),
        exact: detected.iter().eq(labels.iter().filter(|a| spiking.contains(*a))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub events: usize,
    pub mean_element_centric: f64,
    pub mean_ami: f64,
    pub exact_fraction: f64,
}

pub fn summarize_recovery(per_event: &[EventRecovery]) -> RecoverySummary {
    let n = per_event.len().max(1) as f64;
    RecoverySummary {
        events: per_event.len(),
        mean_element_centric: per_event.iter().map(|r| r.element_centric).sum::<f64>() / n,
        mean_ami: per_event.iter().map(|r| r.ami).sum::<f64>() / n,
        exact_fraction: per_event.iter().filter(|r| r.exact).count() as f64 / n,
    }
}

/// Element-centric similarity and AMI between detected topics and planted
/// topics, both as partitions of the reactions that appear in `topics`.
pub fn topic_recovery(
    topics: &[TopicOfAttention],
    reactions: &[EventReaction],
    planted: &BTreeMap<String, usize>,
) -> Result<(f64, f64), CommunityError> {
    let event_of: BTreeMap<&str, &str> = reactions
        .iter()
        .map(|r| (r.reaction_id.as_str(), r.event_id.as_str()))
        .collect();
    let mut found = Vec::new();
    let mut truth = Vec::new();
    for t in topics {
        for id in &t.reaction_ids {
            let Some(topic) = event_of.get(id.as_str()).and_then(|e| planted.get(*e)) else {
                continue;
            };
            found.push(t.topic_id);
            truth.push(*topic);
        }
    }
    let found = Partition::from_membership(&found);
    let truth = Partition::from_membership(&truth);
    Ok((element_centric(&found, &truth, DEFAULT_ALPHA)?, ami(&found, &truth)?))
}

/// Win rates and ratio summaries of temporal against static excess views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub events: usize,
    pub temporal_ge_structural: f64,
    pub temporal_ge_navigational: f64,
    pub geometric_mean_structural: Option<f64>,
    pub geometric_mean_navigational: Option<f64>,
    pub median_structural: Option<f64>,
    pub median_navigational: Option<f64>,
}

pub fn summarize_comparisons(results: &[ComparisonResult]) -> ComparisonSummary {
    let n = results.len().max(1) as f64;
    let wins = |f: fn(&ComparisonResult) -> f64| {
        results.iter().filter(|r| r.excess_temporal >= f(r)).count() as f64 / n
    };
    let ratios = |f: fn(&ComparisonResult) -> f64| -> Vec<f64> {
        results
            .iter()
            .filter(|r| r.excess_temporal > 0.0 && f(r) > 0.0)
            .map(|r| r.excess_temporal / f(r))
            .collect()
    };
    let rs = ratios(|r| r.excess_structural);
    let rn = ratios(|r| r.excess_navigational);
    let med = |v: &[f64]| (!v.is_empty()).then(|| median(v));
    ComparisonSummary {
        events: results.len(),
        temporal_ge_structural: wins(|r| r.excess_structural),
        temporal_ge_navigational: wins(|r| r.excess_navigational),
        geometric_mean_structural: geometric_mean(&rs),
        geometric_mean_navigational: geometric_mean(&rn),
        median_structural: med(&rs),
        median_navigational: med(&rn),
    }
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumbers {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn distribution(values: &[f64]) -> Option<FiveNumbers> {
    if values.is_empty() {
        return None;
    }
    Some(FiveNumbers {
        count: values.len(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        q1: quantile(values, 0.25),
        median: median(values),
        q3: quantile(values, 0.75),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
