//! Coder labels for topics and the agreement breakdown between two coders.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const LABEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("label file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("label file schema version {0} is not supported")]
    Version(u32),
    #[error("coder {coder} labelled topic {topic} more than once")]
    Duplicate { coder: String, topic: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementCategory {
    Strong,
    Partial,
    #[serde(rename = "weak_none")]
    WeakNone,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub topic_id: usize,
    pub coder_id: String,
    pub label: String,
    /// Filled in during the second pass, once both labels are visible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementCategory>,
}

/// One coder's file as written by the labelling interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFile {
    pub schema_version: u32,
    pub coder_id: String,
    pub labels: Vec<LabelRecord>,
}

impl LabelFile {
    pub fn from_json(text: &str) -> Result<Self, LabelError> {
        let file: LabelFile = serde_json::from_str(text)?;
        if file.schema_version != LABEL_SCHEMA_VERSION {
            return Err(LabelError::Version(file.schema_version));
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &file.labels {
            if !seen.insert((r.coder_id.as_str(), r.topic_id)) {
                return Err(LabelError::Duplicate {
                    coder: r.coder_id.clone(),
                    topic: r.topic_id,
                });
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("label records serialise")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedTopic {
    pub topic_id: usize,
    pub reason: String,
}

/// Percentages over the topics with exactly two categorised records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub topics: usize,
    pub unanimous_strong: f64,
    pub strong_partial: f64,
    pub unanimous_partial: f64,
    pub weak_none: f64,
    pub excluded: Vec<ExcludedTopic>,
}

/// Any weak/none judgement puts the pair in the weak/none bucket.
fn bucket(a: AgreementCategory, b: AgreementCategory) -> usize {
    use AgreementCategory::*;
    match (a.min(b), a.max(b)) {
        (Strong, Strong) => 0,
        (Strong, Partial) => 1,
        (Partial, Partial) => 2,
        _ => 3,
    }
}

pub fn agreement_summary(records: &[LabelRecord]) -> AgreementSummary {
    let mut by_topic: BTreeMap<usize, Vec<&LabelRecord>> = BTreeMap::new();
    for r in records {
        by_topic.entry(r.topic_id).or_default().push(r);
    }
    let mut counts = [0usize; 4];
    let mut excluded = Vec::new();
    for (topic_id, rs) in by_topic {
        let reason = if rs.len() != 2 {
            Some(format!("{} coder records", rs.len()))
        } else if rs[0].coder_id == rs[1].coder_id {
            Some(format!("both records from coder {}", rs[0].coder_id))
        } else {
            None
        };
        if let Some(reason) = reason {
            excluded.push(ExcludedTopic { topic_id, reason });
            continue;
        }
        match (rs[0].agreement, rs[1].agreement) {
            (Some(a), Some(b)) => counts[bucket(a, b)] += 1,
            _ => excluded.push(ExcludedTopic {
                topic_id,
                reason: "agreement category missing".into(),
            }),
        }
    }
    let total: usize = counts.iter().sum();
    let pct = |c: usize| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 };
    AgreementSummary {
        topics: total,
        unanimous_strong: pct(counts[0]),
        strong_partial: pct(counts[1]),
        unanimous_partial: pct(counts[2]),
        weak_none: pct(counts[3]),
        excluded,
    }
}
