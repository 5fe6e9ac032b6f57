//! Stage runner over an on-disk work directory.
//!
//! ```text
//! ingest -> build-networks -> correlate -> detect -> reactions -> topics -> export-ui
//! ```
//!
//! Each stage writes its artifacts under `<work>/<stage dir>/` together
//! with a `manifest.json` recording the configuration, the seed, hashes of
//! its inputs and hashes of its outputs. A stage whose manifest matches the
//! current inputs and configuration, and whose outputs are intact, is not
//! run again.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::community::{leiden_cpm, resolution_sweep, CommunityError, GridSpec, Partition, SweepResult};
use crate::correlation::{flatten_multilayer, rolling_correlations, CorrelationError, FlatMultilayerGraph, TemporalEdgeWeights};
use crate::graph::WeightedGraph;
use crate::ingest::clickstream::Month;
use crate::ingest::events::event_file_date;
use crate::ingest::pageviews::{hour_file_stamp, DEFAULT_PREFIXES};
use crate::ingest::{parse_clickstream, parse_event_records, ClickTable, DailyAggregator, DailySeriesStore, EventRecord, IngestError, RedirectMap};
use crate::network::{attach_series, build_event_network, EventNetwork, NetworkConfig, NetworkError};
use crate::reactions::{
    compare_event, extract_reactions, read_reactions_jsonl, write_reactions_jsonl, BaselineSettings, ComparisonResult,
    EventOverlap, EventReaction, PageRankSettings, ReactionError, StaticMode, StructuralCommunities,
};
use crate::synth::{
    distribution, reaction_recovery, summarize_comparisons, summarize_recovery, topic_recovery, ComparisonSummary,
    EventRecovery, FiveNumbers, RecoverySummary, SynthCorpus, SynthError,
};
use crate::topics::{
    annotate_topics, build_higher_network, detect_topics, export_topics, rank_topics, reaction_series, BaselineDays,
    TopicError, TopicFeature, TopicOfAttention,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("stage `{stage}` needs the output of `{upstream}`; run `wikitopics {upstream}` first")]
    MissingUpstream { stage: &'static str, upstream: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl PipelineError {
    /// Whether the error comes from how the tool was invoked rather than
    /// from the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::MissingUpstream { .. } | PipelineError::Config(_))
    }
}

type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolutions {
    pub temporal: f64,
    pub structural: f64,
    pub navigational: f64,
    pub higher: f64,
}

impl Default for Resolutions {
    fn default() -> Self {
        Self {
            temporal: 0.25,
            structural: 0.030,
            navigational: 54.6,
            higher: 0.067,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Raw inputs: `events/`, `clickstream/`, `pageviews/`, `redirects.tsv`.
    pub corpus_dir: PathBuf,
    pub work_dir: PathBuf,
    pub domain_prefixes: Vec<String>,
    pub window_days: usize,
    pub edge_threshold: f64,
    pub correlation_window: usize,
    pub tau: f64,
    pub resolutions: Resolutions,
    pub gate: f64,
    pub overlap: EventOverlap,
    pub baseline_days: BaselineDays,
    pub pagerank: PageRankSettings,
    pub grid: GridSpec,
    /// Number of event graphs the resolution sweep samples.
    pub sweep_sample: usize,
    /// Articles listed per topic in the labelling export.
    pub export_top: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let net = NetworkConfig::default();
        Self {
            corpus_dir: PathBuf::from("corpus"),
            work_dir: PathBuf::from("work"),
            domain_prefixes: DEFAULT_PREFIXES.iter().map(|s| s.to_string()).collect(),
            window_days: net.window_days,
            edge_threshold: net.edge_threshold,
            correlation_window: 7,
            tau: 1.0,
            resolutions: Resolutions::default(),
            gate: 3.0,
            overlap: EventOverlap::default(),
            baseline_days: BaselineDays::default(),
            pagerank: PageRankSettings::default(),
            grid: GridSpec::default(),
            sweep_sample: 100,
            export_top: 10,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.window_days < 3 || self.window_days.is_multiple_of(2) {
            return bad(format!("window_days must be odd and at least 3, got {}", self.window_days));
        }
        if self.correlation_window < 2 || self.correlation_window > self.window_days {
            return bad(format!(
                "correlation_window must lie in 2..={}, got {}",
                self.window_days, self.correlation_window
            ));
        }
        let r = &self.resolutions;
        for (name, v) in [
            ("temporal", r.temporal),
            ("structural", r.structural),
            ("navigational", r.navigational),
            ("higher", r.higher),
            ("tau", self.tau),
            ("edge_threshold", self.edge_threshold),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.grid.lower > 0.0 && self.grid.lower < self.grid.upper && self.grid.points >= 2) {
            return bad("grid needs 0 < lower < upper and at least two points".into());
        }
        Ok(())
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            window_days: self.window_days,
            edge_threshold: self.edge_threshold,
        }
    }

    pub fn layers(&self) -> usize {
        self.window_days + 1 - self.correlation_window
    }

    fn baseline(&self) -> BaselineSettings {
        BaselineSettings {
            structural_resolution: self.resolutions.structural,
            navigational_resolution: self.resolutions.navigational,
            gate: self.gate,
            seed: self.seed,
        }
    }

    /// Configuration without paths, hashed into manifests.
    fn fingerprint(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("corpus_dir");
            obj.remove("work_dir");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Networks,
    Correlate,
    Detect,
    Reactions,
    Topics,
    Export,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Networks,
        Stage::Correlate,
        Stage::Detect,
        Stage::Reactions,
        Stage::Topics,
        Stage::Export,
    ];

    /// Command name.
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Networks => "build-networks",
            Stage::Correlate => "correlate",
            Stage::Detect => "detect",
            Stage::Reactions => "reactions",
            Stage::Topics => "topics",
            Stage::Export => "export-ui",
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Networks => "networks",
            Stage::Correlate => "correlate",
            Stage::Detect => "detect",
            Stage::Reactions => "reactions",
            Stage::Topics => "topics",
            Stage::Export => "export",
        }
    }

    pub fn upstream(self) -> Option<Stage> {
        let i = Self::ALL.iter().position(|&s| s == self).expect("listed");
        i.checked_sub(1).map(|j| Self::ALL[j])
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Ran,
    UpToDate,
}

pub const MANIFEST: &str = "manifest.json";

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| PipelineError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes of every file below `dir`, keyed by `prefix/relative path`.
fn hash_tree(dir: &Path, prefix: &str, skip_manifest: bool) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(io::Error::from)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).expect("inside dir");
        let rel = rel.to_string_lossy().replace('\\', "/");
        if skip_manifest && rel == MANIFEST {
            continue;
        }
        out.insert(format!("{prefix}{rel}"), sha256_file(entry.path())?);
    }
    Ok(out)
}

pub fn stage_dir(cfg: &PipelineConfig, stage: Stage) -> PathBuf {
    cfg.work_dir.join(stage.dir_name())
}

pub fn read_manifest(dir: &Path) -> Option<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST)).ok()?;
    serde_json::from_str(&text).ok()
}

fn stage_inputs(cfg: &PipelineConfig, stage: Stage) -> Result<BTreeMap<String, String>> {
    match stage.upstream() {
        None => hash_tree(&cfg.corpus_dir, "corpus/", false),
        Some(up) => {
            let dir = stage_dir(cfg, up);
            let path = dir.join(MANIFEST);
            if !path.exists() {
                return Err(PipelineError::MissingUpstream {
                    stage: stage.name(),
                    upstream: up.name(),
                });
            }
            let mut m = BTreeMap::new();
            m.insert(format!("{}/{MANIFEST}", up.dir_name()), sha256_file(&path)?);
            Ok(m)
        }
    }
}

/// Run one stage unless its manifest shows it is up to date.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<StageOutcome> {
    cfg.validate()?;
    let inputs = stage_inputs(cfg, stage)?;
    let dir = stage_dir(cfg, stage);
    let config = cfg.fingerprint();
    if let Some(old) = read_manifest(&dir) {
        if old.inputs == inputs && old.config == config && old.seed == cfg.seed && hash_tree(&dir, "", true)? == old.outputs {
            log::info!("{}: up to date", stage.name());
            return Ok(StageOutcome::UpToDate);
        }
    }
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    log::info!("{}: running", stage.name());
    match stage {
        Stage::Ingest => ingest_stage(cfg, &dir)?,
        Stage::Networks => networks_stage(cfg, &dir)?,
        Stage::Correlate => correlate_stage(cfg, &dir)?,
        Stage::Detect => detect_stage(cfg, &dir)?,
        Stage::Reactions => reactions_stage(cfg, &dir)?,
        Stage::Topics => topics_stage(cfg, &dir)?,
        Stage::Export => export_stage(cfg, &dir)?,
    }
    let manifest = Manifest {
        stage: stage.name().to_string(),
        seed: cfg.seed,
        config,
        inputs,
        outputs: hash_tree(&dir, "", true)?,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(StageOutcome::Ran)
}

/// Run `stage` and everything upstream of it, in order.
pub fn run_through(stage: Stage, cfg: &PipelineConfig) -> Result<Vec<(Stage, StageOutcome)>> {
    let mut out = Vec::new();
    for s in Stage::ALL {
        out.push((s, run_stage(s, cfg)?));
        if s == stage {
            break;
        }
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|source| PipelineError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

// ---- ingest ---------------------------------------------------------------

/// Parsed raw inputs.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub events: Vec<EventRecord>,
    pub clicks: ClickTable,
    pub store: DailySeriesStore,
    /// `file<TAB>line<TAB>message` for every skipped item.
    pub diagnostics: Vec<String>,
}

pub fn ingest_corpus(cfg: &PipelineConfig) -> Result<Ingested> {
    let corpus = &cfg.corpus_dir;
    if !corpus.is_dir() {
        return Err(PipelineError::Config(format!("corpus directory {} not found", corpus.display())));
    }
    let redirect_path = corpus.join("redirects.tsv");
    let redirects = if redirect_path.exists() {
        RedirectMap::parse_tsv(open(&redirect_path)?)?
    } else {
        RedirectMap::new()
    };
    let mut diagnostics = Vec::new();

    let mut events = Vec::new();
    for path in sorted_files(&corpus.join("events"))? {
        let name = file_name(&path);
        let date = event_file_date(&name)?;
        let text = fs::read_to_string(&path)?;
        let parsed = parse_event_records(&text, date, &redirects);
        diagnostics.extend(parsed.diagnostics.iter().map(|d| format!("events/{name}\t{}\t{}", d.line, d.message)));
        events.extend(parsed.records);
    }

    let mut clicks = ClickTable::new();
    for path in sorted_files(&corpus.join("clickstream"))? {
        let name = file_name(&path);
        let month = Month::from_file_name(&name)?;
        let mut reader = parse_clickstream(open(&path)?, month, &redirects);
        for rec in reader.by_ref() {
            clicks.insert(rec?);
        }
        diagnostics.extend(reader.diagnostics.iter().map(|d| format!("clickstream/{name}\t{}\t{}", d.line, d.message)));
    }

    let mut agg = DailyAggregator::new(cfg.domain_prefixes.iter().map(String::as_str), &redirects);
    for path in sorted_files(&corpus.join("pageviews"))? {
        let (day, _hour) = hour_file_stamp(&file_name(&path))?;
        agg.add_hour(day, open(&path)?)?;
    }
    if agg.skipped > 0 {
        diagnostics.push(format!("pageviews\t0\t{} unparseable lines skipped", agg.skipped));
    }
    Ok(Ingested {
        events,
        clicks,
        store: agg.finish(),
        diagnostics,
    })
}

fn ingest_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let data = ingest_corpus(cfg)?;
    let mut w = BufWriter::new(fs::File::create(out.join("events.jsonl"))?);
    for e in &data.events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let mut w = BufWriter::new(fs::File::create(out.join("clicks.tsv"))?);
    data.clicks.write_tsv(&mut w)?;
    w.flush()?;
    data.store.write_dir(&out.join("store"))?;
    let mut diag = data.diagnostics.join("\n");
    if !diag.is_empty() {
        diag.push('\n');
    }
    fs::write(out.join("diagnostics.tsv"), diag)?;
    log::info!(
        "ingest: {} events, {} click records, {} titles with views, {} diagnostics",
        data.events.len(),
        data.clicks.len(),
        data.store.len(),
        data.diagnostics.len()
    );
    Ok(())
}

pub fn read_events(cfg: &PipelineConfig) -> Result<Vec<EventRecord>> {
    let path = stage_dir(cfg, Stage::Ingest).join("events.jsonl");
    let mut out = Vec::new();
    for line in open(&path)?.lines() {
        let line = line?;
        if !line.is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

// ---- networks -------------------------------------------------------------

/// Build and attach series for every event, in event order.
pub fn build_networks(events: &[EventRecord], clicks: &ClickTable, store: &DailySeriesStore, cfg: &PipelineConfig) -> Vec<EventNetwork> {
    let net_cfg = cfg.network();
    events
        .par_iter()
        .map(|e| attach_series(build_event_network(e, clicks, &net_cfg), store))
        .collect()
}

fn networks_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let ingest = stage_dir(cfg, Stage::Ingest);
    let events = read_events(cfg)?;
    let clicks = ClickTable::read_tsv(open(&ingest.join("clicks.tsv"))?)?;
    let store = DailySeriesStore::read_dir(&ingest.join("store"))?;
    let networks = build_networks(&events, &clicks, &store, cfg);
    networks
        .par_iter()
        .map(|n| n.write_dir(&out.join(&n.event.event_id)))
        .collect::<Result<Vec<()>, _>>()?;
    let mut index = String::from("event_id\tnodes\tedges\tdegenerate\n");
    for n in &networks {
        index.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            n.event.event_id,
            n.graph.node_count(),
            n.graph.edge_count(),
            n.is_degenerate()
        ));
    }
    fs::write(out.join("index.tsv"), index)?;
    Ok(())
}

/// Event ids with a non-degenerate network, in index order.
pub fn network_ids(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let path = stage_dir(cfg, Stage::Networks).join("index.tsv");
    let mut ids = Vec::new();
    for line in open(&path)?.lines().skip(1) {
        let line = line?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() == 4 && cols[3] == "false" {
            ids.push(cols[0].to_string());
        }
    }
    Ok(ids)
}

pub fn read_network(cfg: &PipelineConfig, event_id: &str) -> Result<EventNetwork> {
    Ok(EventNetwork::read_dir(&stage_dir(cfg, Stage::Networks).join(event_id))?)
}

// ---- correlate / detect ---------------------------------------------------

fn correlate_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    network_ids(cfg)?
        .par_iter()
        .map(|id| -> Result<()> {
            let net = read_network(cfg, id)?;
            let weights = rolling_correlations(&net, cfg.correlation_window)?;
            let mut w = BufWriter::new(fs::File::create(out.join(format!("{id}.tsv")))?);
            weights.write_tsv(&mut w)?;
            w.flush()?;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(())
}

fn read_weights(cfg: &PipelineConfig, net: &EventNetwork) -> Result<TemporalEdgeWeights> {
    let path = stage_dir(cfg, Stage::Correlate).join(format!("{}.tsv", net.event.event_id));
    Ok(TemporalEdgeWeights::read_tsv(
        open(&path)?,
        net.graph.labels(),
        cfg.correlation_window,
        cfg.layers(),
    )?)
}

/// Temporal partition of one event: rolling correlations, flattening and
/// community detection at the temporal resolution.
pub fn temporal_partition(net: &EventNetwork, cfg: &PipelineConfig) -> Result<(FlatMultilayerGraph, Partition)> {
    let weights = rolling_correlations(net, cfg.correlation_window)?;
    let flat = flatten_multilayer(&weights, cfg.tau);
    let partition = leiden_cpm(&flat.graph, cfg.resolutions.temporal, cfg.seed);
    Ok((flat, partition))
}

fn detect_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    network_ids(cfg)?
        .par_iter()
        .map(|id| -> Result<()> {
            let net = read_network(cfg, id)?;
            let flat = flatten_multilayer(&read_weights(cfg, &net)?, cfg.tau);
            let p = leiden_cpm(&flat.graph, cfg.resolutions.temporal, cfg.seed);
            let mut w = BufWriter::new(fs::File::create(out.join(format!("{id}.tsv")))?);
            p.write_tsv(&flat.graph, &mut w)?;
            w.flush()?;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(())
}

// ---- reactions --------------------------------------------------------------

/// Reactions of one event with their structural similarity, plus the
/// excess-view comparison against the static baselines.
pub fn event_reactions(
    net: &EventNetwork,
    flat: &FlatMultilayerGraph,
    partition: &Partition,
    cfg: &PipelineConfig,
) -> Result<(Vec<EventReaction>, ComparisonResult)> {
    let mut reactions = extract_reactions(partition, flat, net, cfg.overlap, &cfg.pagerank)?;
    if !reactions.is_empty() {
        let index = StructuralCommunities::build(net, &cfg.grid.values(), cfg.seed, &cfg.pagerank)?;
        for r in &mut reactions {
            r.structural_similarity = index.max_similarity(&r.weights).map_err(ReactionError::from)?;
        }
    }
    let comparison = compare_event(net, &reactions, &cfg.baseline())?;
    Ok((reactions, comparison))
}

/// Summary written next to the reactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionSummary {
    pub events: usize,
    pub events_with_reactions: usize,
    pub reactions: usize,
    pub comparison: ComparisonSummary,
    pub structural_similarity: Option<FiveNumbers>,
}

fn reactions_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let ids = network_ids(cfg)?;
    let per_event: Vec<(Vec<EventReaction>, ComparisonResult)> = ids
        .par_iter()
        .map(|id| -> Result<_> {
            let net = read_network(cfg, id)?;
            let flat = flatten_multilayer(&read_weights(cfg, &net)?, cfg.tau);
            let path = stage_dir(cfg, Stage::Detect).join(format!("{id}.tsv"));
            let partition = Partition::read_tsv(open(&path)?, &flat.graph)?;
            event_reactions(&net, &flat, &partition, cfg)
        })
        .collect::<Result<_>>()?;

    let reactions: Vec<EventReaction> = per_event.iter().flat_map(|(r, _)| r.iter().cloned()).collect();
    let comparisons: Vec<ComparisonResult> = per_event.iter().map(|(_, c)| c.clone()).collect();
    let mut w = BufWriter::new(fs::File::create(out.join("reactions.jsonl"))?);
    write_reactions_jsonl(&reactions, &mut w)?;
    w.flush()?;
    let mut table = format!("{}\n", ComparisonResult::TSV_HEADER);
    for c in &comparisons {
        table.push_str(&c.tsv_row());
        table.push('\n');
    }
    fs::write(out.join("comparison.tsv"), table)?;
    let s: Vec<f64> = reactions.iter().map(|r| r.structural_similarity).collect();
    write_json(
        &out.join("summary.json"),
        &ReactionSummary {
            events: ids.len(),
            events_with_reactions: per_event.iter().filter(|(r, _)| !r.is_empty()).count(),
            reactions: reactions.len(),
            comparison: summarize_comparisons(&comparisons),
            structural_similarity: distribution(&s),
        },
    )
}

pub fn read_reactions(cfg: &PipelineConfig) -> Result<Vec<EventReaction>> {
    let path = stage_dir(cfg, Stage::Reactions).join("reactions.jsonl");
    Ok(read_reactions_jsonl(open(&path)?)?)
}

// ---- topics / export --------------------------------------------------------

/// Topics over all reactions with their features filled in.
pub fn topics_from_reactions(
    reactions: &[EventReaction],
    networks: &HashMap<String, EventNetwork>,
    cfg: &PipelineConfig,
) -> Result<(WeightedGraph, Vec<TopicOfAttention>)> {
    let h = build_higher_network(reactions)?;
    let mut topics = detect_topics(&h, cfg.resolutions.higher, cfg.seed);
    let series = reactions
        .iter()
        .filter_map(|r| networks.get(&r.event_id).map(|n| (r.reaction_id.clone(), reaction_series(r, n))))
        .collect();
    annotate_topics(&mut topics, &series, cfg.window_days / 2, cfg.baseline_days)?;
    Ok((h.graph, topics))
}

fn topics_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let reactions = read_reactions(cfg)?;
    let mut ids: Vec<&str> = reactions.iter().map(|r| r.event_id.as_str()).collect();
    ids.dedup();
    let networks: HashMap<String, EventNetwork> = ids
        .par_iter()
        .map(|id| read_network(cfg, id).map(|n| (id.to_string(), n)))
        .collect::<Result<_>>()?;
    let (h, topics) = topics_from_reactions(&reactions, &networks, cfg)?;
    let mut w = BufWriter::new(fs::File::create(out.join("higher_network.tsv"))?);
    h.write_edgelist(&mut w)?;
    w.flush()?;
    write_json(&out.join("topics.json"), &topics)?;
    let mut series = String::from("reaction_id\tshift\tvalues\n");
    for r in &reactions {
        if let Some(n) = networks.get(&r.event_id) {
            let s = reaction_series(r, n);
            let values: Vec<String> = s.values.iter().map(|v| v.to_string()).collect();
            series.push_str(&format!("{}\t{}\t{}\n", s.reaction_id, s.shift, values.join(",")));
        }
    }
    fs::write(out.join("reaction_series.tsv"), series)?;
    log::info!("topics: {} topics from {} reactions", topics.len(), reactions.len());
    Ok(())
}

pub fn read_topics(cfg: &PipelineConfig) -> Result<Vec<TopicOfAttention>> {
    read_json(&stage_dir(cfg, Stage::Topics).join("topics.json"))
}

fn export_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let topics = read_topics(cfg)?;
    let reactions = read_reactions(cfg)?;
    let events: BTreeMap<String, EventRecord> = read_events(cfg)?.into_iter().map(|e| (e.event_id.clone(), e)).collect();
    write_json(&out.join("topics_export.json"), &export_topics(&topics, &reactions, &events, cfg.export_top))?;
    let mut ranks = String::from("feature\trank\ttopic_id\tvalue\n");
    for f in TopicFeature::ALL {
        for (i, t) in rank_topics(&topics, f, topics.len()).into_iter().enumerate() {
            ranks.push_str(&format!("{f}\t{}\t{}\t{}\n", i + 1, t.topic_id, f.value(&t.features)));
        }
    }
    fs::write(out.join("rankings.tsv"), ranks)?;
    Ok(())
}

// ---- sweep ------------------------------------------------------------------

/// Graphs a resolution sweep can run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// Flattened temporal networks.
    #[default]
    Temporal,
    Structural,
    Navigational,
    /// The network of reactions.
    Higher,
}

/// Sweep the resolution grid over up to `sweep_sample` event graphs chosen
/// with the configured seed. Needs the correlate stage (or reactions for
/// the higher-level network).
pub fn run_sweep(cfg: &PipelineConfig, target: SweepTarget) -> Result<SweepResult> {
    let graphs: Vec<WeightedGraph> = if target == SweepTarget::Higher {
        if read_manifest(&stage_dir(cfg, Stage::Reactions)).is_none() {
            return Err(PipelineError::MissingUpstream {
                stage: "sweep",
                upstream: Stage::Reactions.name(),
            });
        }
        vec![build_higher_network(&read_reactions(cfg)?)?.graph]
    } else {
        let needed = if target == SweepTarget::Temporal { Stage::Correlate } else { Stage::Networks };
        if read_manifest(&stage_dir(cfg, needed)).is_none() {
            return Err(PipelineError::MissingUpstream {
                stage: "sweep",
                upstream: needed.name(),
            });
        }
        let ids = network_ids(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut picked = rand::seq::index::sample(&mut rng, ids.len(), cfg.sweep_sample.min(ids.len())).into_vec();
        picked.sort_unstable();
        picked
            .par_iter()
            .map(|&i| -> Result<WeightedGraph> {
                let net = read_network(cfg, &ids[i])?;
                Ok(match target {
                    SweepTarget::Temporal => flatten_multilayer(&read_weights(cfg, &net)?, cfg.tau).graph,
                    SweepTarget::Structural => net.graph.to_undirected(StaticMode::Structural.projection()),
                    _ => net.graph.to_undirected(StaticMode::Navigational.projection()),
                })
            })
            .collect::<Result<_>>()?
    };
    Ok(resolution_sweep(&graphs, &cfg.grid.values(), cfg.seed)?)
}

// ---- bench ------------------------------------------------------------------

/// Everything measured by one synthetic benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub recovery: RecoverySummary,
    pub per_event: Vec<EventRecovery>,
    pub comparison: ComparisonSummary,
    pub comparisons: Vec<ComparisonResult>,
    pub structural_similarity: Option<FiveNumbers>,
    pub reactions: usize,
    pub topics: usize,
    /// Element-centric similarity and AMI of detected against planted
    /// topics, when the corpus plants topics.
    pub topic_recovery: Option<(f64, f64)>,
}

/// Run the in-memory pipeline on a synthetic corpus and score it.
pub fn run_bench(corpus: &SynthCorpus, cfg: &PipelineConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let networks = build_networks(&corpus.records(), &corpus.click_table(), &corpus.store(), cfg);
    let spiking = corpus.spiking();
    let per_event: Vec<(Vec<EventReaction>, ComparisonResult, EventRecovery)> = networks
        .par_iter()
        .filter(|n| !n.is_degenerate())
        .map(|net| -> Result<_> {
            let (flat, partition) = temporal_partition(net, cfg)?;
            let (reactions, comparison) = event_reactions(net, &flat, &partition, cfg)?;
            let recovery = reaction_recovery(net, &reactions, &spiking[&net.event.event_id], cfg.gate)?;
            Ok((reactions, comparison, recovery))
        })
        .collect::<Result<_>>()?;
    let reactions: Vec<EventReaction> = per_event.iter().flat_map(|(r, _, _)| r.iter().cloned()).collect();
    let comparisons: Vec<ComparisonResult> = per_event.iter().map(|(_, c, _)| c.clone()).collect();
    let recoveries: Vec<EventRecovery> = per_event.iter().map(|(_, _, r)| r.clone()).collect();
    let by_id: HashMap<String, EventNetwork> = networks.into_iter().map(|n| (n.event.event_id.clone(), n)).collect();
    let (_, topics) = topics_from_reactions(&reactions, &by_id, cfg)?;
    let planted = corpus.event_topics();
    let topic_score = if planted.is_empty() {
        None
    } else {
        Some(topic_recovery(&topics, &reactions, &planted)?)
    };
    let s: Vec<f64> = reactions.iter().map(|r| r.structural_similarity).collect();
    Ok(BenchReport {
        recovery: summarize_recovery(&recoveries),
        per_event: recoveries,
        comparison: summarize_comparisons(&comparisons),
        comparisons,
        structural_similarity: distribution(&s),
        reactions: reactions.len(),
        topics: topics.len(),
        topic_recovery: topic_score,
    })
}
