//! Topics of attention: communities of similar reactions across events and
//! their attention features.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::leiden_cpm;
use crate::graph::{weighted_jaccard, GraphBuilder, GraphError, WeightedGraph};
use crate::ingest::EventRecord;
use crate::network::EventNetwork;
use crate::reactions::EventReaction;
use crate::stats::{mean, median};

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("unknown feature {0:?} (expected event_count, prominence, magnitude or deviance)")]
    UnknownFeature(String),
    #[error("reaction {0} has no series")]
    MissingSeries(String),
    #[error("duplicate reaction id {0}")]
    DuplicateReaction(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Weighted view series of one reaction, shifted so that its peak within
/// one day of the event sits on the event day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionSeries {
    pub reaction_id: String,
    pub values: Vec<f64>,
    /// Offset applied: positive moves values later in time.
    pub shift: i32,
}

/// `W(t) = Σ_k w_k p_k(t)` over the reaction's articles, centred on the
/// largest value among the event day and its two neighbours. Ties prefer
/// the event day, then the day before. Values shifted in from beyond the
/// window repeat the boundary value.
pub fn reaction_series(reaction: &EventReaction, network: &EventNetwork) -> ReactionSeries {
    let len = network.window_days;
    let mut w = vec![0.0; len];
    for (article, weight) in reaction.weights.iter() {
        if let Some(s) = network.series_of(article) {
            for (acc, v) in w.iter_mut().zip(s) {
                *acc += weight * v;
            }
        }
    }
    let e = network.event_index();
    let mut peak = e;
    for t in [e.wrapping_sub(1), e + 1] {
        if t < len && w[t] > w[peak] {
            peak = t;
        }
    }
    let shift = e as i32 - peak as i32;
    ReactionSeries {
        reaction_id: reaction.reaction_id.clone(),
        values: shift_series(&w, shift),
        shift,
    }
}

fn shift_series(w: &[f64], shift: i32) -> Vec<f64> {
    let n = w.len() as i64;
    (0..n)
        .map(|t| w[(t - shift as i64).clamp(0, n - 1) as usize])
        .collect()
}

/// Reactions joined by the weighted Jaccard similarity of their article
/// weights; pairs sharing no article are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherLevelNetwork {
    pub graph: WeightedGraph,
}

impl HigherLevelNetwork {
    pub fn reaction_ids(&self) -> &[String] {
        self.graph.labels()
    }
}

pub fn build_higher_network(reactions: &[EventReaction]) -> Result<HigherLevelNetwork, TopicError> {
    let mut seen = BTreeSet::new();
    for r in reactions {
        if !seen.insert(r.reaction_id.as_str()) {
            return Err(TopicError::DuplicateReaction(r.reaction_id.clone()));
        }
    }
    let mut index: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in reactions.iter().enumerate() {
        for (a, _) in r.weights.iter() {
            index.entry(a).or_default().push(i);
        }
    }
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for members in index.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                candidates.insert((i, j));
            }
        }
    }
    let candidates: Vec<(usize, usize)> = candidates.into_iter().collect();
    let weights: Vec<f64> = candidates
        .par_iter()
        .map(|&(i, j)| weighted_jaccard(&reactions[i].weights, &reactions[j].weights))
        .collect::<Result<_, _>>()?;
    let mut b = GraphBuilder::with_nodes(false, reactions.iter().map(|r| r.reaction_id.clone()));
    for (&(i, j), &w) in candidates.iter().zip(&weights) {
        if w > 0.0 {
            b.edge(i, j, w)?;
        }
    }
    Ok(HigherLevelNetwork { graph: b.build() })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TopicFeatures {
    pub event_count: usize,
    pub prominence: f64,
    pub magnitude: f64,
    pub deviance: f64,
    /// Members left out of the deviance mean because their pre-event median
    /// is zero.
    pub zero_median_members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOfAttention {
    pub topic_id: usize,
    pub reaction_ids: Vec<String>,
    pub features: TopicFeatures,
}

/// One topic per community of the higher-level network. Features are left
/// at their defaults apart from the member count.
pub fn detect_topics(h: &HigherLevelNetwork, resolution: f64, seed: u64) -> Vec<TopicOfAttention> {
    if h.graph.is_empty() {
        return Vec::new();
    }
    let p = leiden_cpm(&h.graph, resolution, seed);
    p.communities()
        .into_iter()
        .enumerate()
        .map(|(topic_id, members)| TopicOfAttention {
            topic_id,
            reaction_ids: members.iter().map(|&v| h.graph.label(v).to_string()).collect(),
            features: TopicFeatures {
                event_count: members.len(),
                ..Default::default()
            },
        })
        .collect()
}

/// Whether the pre-event median includes the event day itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineDays {
    /// Days −30 through 0.
    #[default]
    ThroughEventDay,
    /// Days −30 through −1.
    BeforeEventDay,
}

/// Prominence, magnitude and deviance of a topic from its members' centred
/// series, with the event day at `event_index`.
pub fn topic_features(series: &[&ReactionSeries], event_index: usize, baseline: BaselineDays) -> TopicFeatures {
    let end = match baseline {
        BaselineDays::ThroughEventDay => event_index + 1,
        BaselineDays::BeforeEventDay => event_index,
    };
    let mut medians = Vec::with_capacity(series.len());
    let mut jumps = Vec::with_capacity(series.len());
    let mut relative = Vec::new();
    let mut zero = 0;
    for s in series {
        let start = event_index.saturating_sub(30);
        let med = median(&s.values[start..end.max(start + 1).min(s.values.len())]);
        let jump = s.values[event_index] - med;
        medians.push(med);
        jumps.push(jump);
        if med > 0.0 {
            relative.push(jump / med);
        } else {
            zero += 1;
        }
    }
    TopicFeatures {
        event_count: series.len(),
        prominence: mean(&medians),
        magnitude: mean(&jumps),
        deviance: mean(&relative),
        zero_median_members: zero,
    }
}

/// Fill every topic's features from the reaction series.
pub fn annotate_topics(
    topics: &mut [TopicOfAttention],
    series: &HashMap<String, ReactionSeries>,
    event_index: usize,
    baseline: BaselineDays,
) -> Result<(), TopicError> {
    for t in topics {
        let members = t
            .reaction_ids
            .iter()
            .map(|id| series.get(id).ok_or_else(|| TopicError::MissingSeries(id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        t.features = topic_features(&members, event_index, baseline);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicFeature {
    EventCount,
    Prominence,
    Magnitude,
    Deviance,
}

impl TopicFeature {
    pub const ALL: [TopicFeature; 4] = [
        TopicFeature::EventCount,
        TopicFeature::Prominence,
        TopicFeature::Magnitude,
        TopicFeature::Deviance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopicFeature::EventCount => "event_count",
            TopicFeature::Prominence => "prominence",
            TopicFeature::Magnitude => "magnitude",
            TopicFeature::Deviance => "deviance",
        }
    }

    pub fn value(self, f: &TopicFeatures) -> f64 {
        match self {
            TopicFeature::EventCount => f.event_count as f64,
            TopicFeature::Prominence => f.prominence,
            TopicFeature::Magnitude => f.magnitude,
            TopicFeature::Deviance => f.deviance,
        }
    }
}

impl fmt::Display for TopicFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopicFeature {
    type Err = TopicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| TopicError::UnknownFeature(s.to_string()))
    }
}

/// The `k` topics with the largest `feature`, ties broken by topic id.
pub fn rank_topics(topics: &[TopicOfAttention], feature: TopicFeature, k: usize) -> Vec<&TopicOfAttention> {
    let mut ranked: Vec<&TopicOfAttention> = topics.iter().collect();
    ranked.sort_by(|a, b| {
        feature
            .value(&b.features)
            .total_cmp(&feature.value(&a.features))
            .then(a.topic_id.cmp(&b.topic_id))
    });
    ranked.truncate(k);
    ranked
}

/// Union of the top `k` topic ids across all features.
pub fn labeling_subset(topics: &[TopicOfAttention], k: usize) -> BTreeSet<usize> {
    TopicFeature::ALL
        .iter()
        .flat_map(|&f| rank_topics(topics, f, k))
        .map(|t| t.topic_id)
        .collect()
}

pub const EXPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicExport {
    pub schema_version: u32,
    pub topics: Vec<TopicCard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCard {
    pub topic_id: usize,
    pub features: TopicFeatures,
    pub core_articles: Vec<ArticleCount>,
    pub articles: Vec<ArticleWeight>,
    /// Member events ordered by date.
    pub events: Vec<EventSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleCount {
    pub article: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleWeight {
    pub article: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSample {
    pub event_id: String,
    pub date: chrono::NaiveDate,
    pub description: String,
}

/// Payload for the labelling interface: for each topic its most frequent
/// core articles, its articles by summed weight (at most `top` of each)
/// and its member events.
pub fn export_topics(
    topics: &[TopicOfAttention],
    reactions: &[EventReaction],
    events: &BTreeMap<String, EventRecord>,
    top: usize,
) -> TopicExport {
    let by_id: HashMap<&str, &EventReaction> = reactions.iter().map(|r| (r.reaction_id.as_str(), r)).collect();
    let cards = topics
        .iter()
        .map(|t| {
            let mut core: BTreeMap<&str, usize> = BTreeMap::new();
            let mut weight: BTreeMap<&str, f64> = BTreeMap::new();
            let mut member_events: BTreeSet<(chrono::NaiveDate, &str)> = BTreeSet::new();
            for id in &t.reaction_ids {
                let Some(r) = by_id.get(id.as_str()) else { continue };
                for (a, w) in r.weights.iter() {
                    *weight.entry(a).or_insert(0.0) += w;
                }
                if let Some(ev) = events.get(&r.event_id) {
                    member_events.insert((ev.date, ev.event_id.as_str()));
                    for a in ev.core_articles.iter().filter(|a| r.articles.contains(*a)) {
                        *core.entry(a).or_insert(0) += 1;
                    }
                }
            }
            let mut core: Vec<ArticleCount> = core
                .into_iter()
                .map(|(a, count)| ArticleCount {
                    article: a.to_string(),
                    count,
                })
                .collect();
            core.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.article.cmp(&b.article)));
            core.truncate(top);
            let mut articles: Vec<ArticleWeight> = weight
                .into_iter()
                .map(|(a, weight)| ArticleWeight {
                    article: a.to_string(),
                    weight,
                })
                .collect();
            articles.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.article.cmp(&b.article)));
            articles.truncate(top);
            TopicCard {
                topic_id: t.topic_id,
                features: t.features,
                core_articles: core,
                articles,
                events: member_events
                    .into_iter()
                    .map(|(date, id)| EventSample {
                        event_id: id.to_string(),
                        date,
                        description: events[id].description.clone(),
                    })
                    .collect(),
            }
        })
        .collect();
    TopicExport {
        schema_version: EXPORT_SCHEMA_VERSION,
        topics: cards,
    }
}
