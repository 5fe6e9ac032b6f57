mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use wikitopics::graph::NodeWeightVector;
use wikitopics::reactions::EventReaction;
use wikitopics::topics::{
    labeling_subset, rank_topics, reaction_series, topic_features, BaselineDays, ReactionSeries, TopicFeature,
    TopicFeatures, TopicOfAttention,
};

fn reaction(weights: &[(&str, f64)]) -> EventReaction {
    let w = NodeWeightVector(weights.iter().map(|(a, x)| (a.to_string(), *x)).collect::<BTreeMap<_, _>>());
    EventReaction {
        reaction_id: "fixture-r0".into(),
        event_id: "fixture".into(),
        articles: weights.iter().map(|(a, _)| a.to_string()).collect(),
        span: (24, 30),
        weights: w,
        contains_core: true,
        structural_similarity: 0.0,
    }
}

#[test]
fn weighted_series_is_a_dot_product() {
    let a: Vec<f64> = (0..61).map(|t| 10.0 + t as f64).collect();
    let mut b: Vec<f64> = (0..61).map(|t| 100.0 - t as f64).collect();
    b[30] = 400.0;
    let net = common::fixture_network(&["a", "b"], &[(0, 1, 200.0)], vec![a.clone(), b.clone()], &["a"]);
    let s = reaction_series(&reaction(&[("a", 0.75), ("b", 0.25)]), &net);
    assert_eq!(s.shift, 0);
    for t in 0..61 {
        assert_eq!(s.values[t], 0.75 * a[t] + 0.25 * b[t]);
    }
}

#[test]
fn peak_after_the_event_is_moved_onto_it() {
    let mut a = vec![5.0; 61];
    a[31] = 50.0;
    a[60] = 7.0;
    let net = common::fixture_network(&["a", "b"], &[(0, 1, 200.0)], vec![a, vec![0.0; 61]], &["a"]);
    let s = reaction_series(&reaction(&[("a", 1.0)]), &net);
    assert_eq!(s.shift, -1);
    assert_eq!(s.values[30], 50.0);
    // the last day repeats the boundary value
    assert_eq!(s.values[59], 7.0);
    assert_eq!(s.values[60], 7.0);
}

fn series(values: Vec<f64>) -> ReactionSeries {
    ReactionSeries {
        reaction_id: "r".into(),
        values,
        shift: 0,
    }
}

#[test]
fn feature_hand_values() {
    let mut v = vec![50.0; 61];
    v[30] = 150.0;
    let s = series(v);
    let f = topic_features(&[&s], 30, BaselineDays::ThroughEventDay);
    assert_eq!(f.event_count, 1);
    assert_eq!(f.prominence, 50.0);
    assert_eq!(f.magnitude, 100.0);
    assert_eq!(f.deviance, 2.0);

    let flat = series(vec![80.0; 61]);
    let f = topic_features(&[&flat, &flat], 30, BaselineDays::BeforeEventDay);
    assert_eq!((f.event_count, f.prominence, f.magnitude, f.deviance), (2, 80.0, 0.0, 0.0));
}

proptest! {
    #[test]
    fn features_match_direct_formulas(
        members in prop::collection::vec(prop::collection::vec(0.0f64..500.0, 61), 1..6),
    ) {
        let owned: Vec<ReactionSeries> = members.iter().cloned().map(series).collect();
        let refs: Vec<&ReactionSeries> = owned.iter().collect();
        let f = topic_features(&refs, 30, BaselineDays::ThroughEventDay);
        let meds: Vec<f64> = members.iter().map(|m| common::median_iqr(&m[0..=30]).0).collect();
        let n = members.len() as f64;
        let prominence = meds.iter().sum::<f64>() / n;
        let magnitude = members.iter().zip(&meds).map(|(m, med)| m[30] - med).sum::<f64>() / n;
        let rel: Vec<f64> = members.iter().zip(&meds).filter(|(_, &med)| med > 0.0).map(|(m, med)| (m[30] - med) / med).collect();
        let deviance = if rel.is_empty() { 0.0 } else { rel.iter().sum::<f64>() / rel.len() as f64 };
        prop_assert!((f.prominence - prominence).abs() <= 1e-9);
        prop_assert!((f.magnitude - magnitude).abs() <= 1e-9);
        prop_assert!((f.deviance - deviance).abs() <= 1e-9);
    }
}

fn topic(id: usize, event_count: usize, prominence: f64, magnitude: f64, deviance: f64) -> TopicOfAttention {
    TopicOfAttention {
        topic_id: id,
        reaction_ids: (0..event_count).map(|i| format!("t{id}-r{i}")).collect(),
        features: TopicFeatures {
            event_count,
            prominence,
            magnitude,
            deviance,
            zero_median_members: 0,
        },
    }
}

#[test]
fn two_topic_ranking_by_hand() {
    let topics = vec![topic(0, 3, 10.0, 500.0, 0.5), topic(1, 7, 900.0, 20.0, 4.0)];
    let order = |f| rank_topics(&topics, f, 2).iter().map(|t| t.topic_id).collect::<Vec<_>>();
    assert_eq!(order(TopicFeature::EventCount), [1, 0]);
    assert_eq!(order(TopicFeature::Prominence), [1, 0]);
    assert_eq!(order(TopicFeature::Magnitude), [0, 1]);
    assert_eq!(order(TopicFeature::Deviance), [1, 0]);
}

#[test]
fn labelling_union_counts_duplicates_once() {
    // topic 0 leads every feature, so the union of four top-2 lists has
    // fewer than 8 entries
    let topics = vec![
        topic(0, 9, 900.0, 900.0, 9.0),
        topic(1, 8, 1.0, 1.0, 0.1),
        topic(2, 1, 800.0, 2.0, 0.2),
        topic(3, 2, 2.0, 800.0, 0.3),
        topic(4, 3, 3.0, 3.0, 8.0),
    ];
    let subset = labeling_subset(&topics, 2);
    assert_eq!(subset.into_iter().collect::<Vec<_>>(), [0, 1, 2, 3, 4]);
}
