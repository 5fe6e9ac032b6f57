//! Acceptance checks, one PASS or FAIL line each. Exits non-zero if any
//! check fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use wikitopics::community::{ami, element_centric, leiden_cpm, resolution_sweep, GridSpec, Partition, SweepStatus, DEFAULT_ALPHA};
use wikitopics::correlation::rolling_pearson;
use wikitopics::graph::{weighted_jaccard, NodeWeightVector};
use wikitopics::pipeline::{build_networks, event_reactions, run_bench, run_through, temporal_partition, PipelineConfig, Stage};
use wikitopics::synth::{generate_corpus, planted_partition_graph, SpikePattern, SynthConfig};
use wikitopics::topics::{topic_features, BaselineDays, ReactionSeries};

type Check = Result<String, String>;

/// Event id, articles, structural similarity and the planted spiking set.
type ScoredReaction = (String, BTreeSet<String>, f64, BTreeSet<String>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cpm_oracle() -> Check {
    let start = Instant::now();
    let mut r = common::rng(2024);
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = r.random_range(2..=8);
        let g = common::random_graph(&mut r, n, 0.5, case % 4 == 0);
        let gamma = r.random_range(0.05..1.5);
        let best = (0..10)
            .map(|s| leiden_cpm(&g, gamma, s).quality)
            .fold(f64::NEG_INFINITY, f64::max);
        let delta = (best - common::exhaustive_cpm_optimum(&g, gamma)).abs();
        worst = worst.max(delta);
        if delta <= 1e-9 {
            matched += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(
        matched == 50 && elapsed < Duration::from_secs(60),
        format!("{matched}/50 graphs at the optimum, max |Δ| {worst:.1e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn metric_oracles() -> Check {
    let mut r = common::rng(77);
    let tol = 1e-12;
    let mut worst = [0.0f64; 4];

    for _ in 0..200 {
        let n = r.random_range(1..12);
        let a: Vec<f64> = (0..n).map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..1.0) }).collect();
        let b: Vec<f64> = (0..n).map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..1.0) }).collect();
        let vec_of = |v: &[f64]| {
            let mut out = NodeWeightVector::new();
            for (i, &w) in v.iter().enumerate() {
                if w > 0.0 {
                    out.insert(format!("k{i}"), w);
                }
            }
            out
        };
        let got = weighted_jaccard(&vec_of(&a), &vec_of(&b)).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max((got - common::jaccard_dense(&a, &b)).abs());
    }

    let mut compared = 0;
    while compared < 200 {
        let n = r.random_range(2..=7);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let (pa, pb) = (Partition::from_membership(&a), Partition::from_membership(&b));
        let oracle = common::ami_brute_force(&a, &b);
        if pa == pb || !oracle.is_finite() {
            continue;
        }
        let got = ami(&pa, &pb).map_err(|e| e.to_string())?;
        worst[1] = worst[1].max((got - oracle).abs());
        compared += 1;
    }

    for _ in 0..200 {
        let n = r.random_range(1..=9);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let got = element_centric(&Partition::from_membership(&a), &Partition::from_membership(&b), DEFAULT_ALPHA)
            .map_err(|e| e.to_string())?;
        worst[2] = worst[2].max((got - common::element_centric_dense(&a, &b, DEFAULT_ALPHA)).abs());
    }

    for _ in 0..200 {
        let len = r.random_range(7..30);
        let x: Vec<f64> = (0..len).map(|_| r.random_range(0.0..1000.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| r.random_range(0.0..1000.0)).collect();
        for (l, v) in rolling_pearson(&x, &y, 7).iter().enumerate() {
            worst[3] = worst[3].max((v - common::pearson_pairwise(&x[l..l + 7], &y[l..l + 7])).abs());
        }
    }
    ensure(
        worst.iter().all(|&w| w <= tol),
        format!(
            "max error: jaccard {:.1e}, ami {:.1e}, element-centric {:.1e}, pearson {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

struct BenchOutcome {
    recovery: f64,
    topics: f64,
    ge_structural: f64,
    elapsed: Duration,
}

fn default_bench() -> Result<BenchOutcome, String> {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let corpus = generate_corpus(&SynthConfig::default()).map_err(|e| e.to_string())?;
    let report = run_bench(&corpus, &cfg).map_err(|e| e.to_string())?;
    let topic_corpus = generate_corpus(&SynthConfig {
        events: 12,
        topics: 4,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let topic_report = run_bench(&topic_corpus, &cfg).map_err(|e| e.to_string())?;
    let (topics, _) = topic_report.topic_recovery.ok_or("no planted topics")?;
    Ok(BenchOutcome {
        recovery: report.recovery.mean_element_centric,
        topics,
        ge_structural: report.comparison.temporal_ge_structural,
        elapsed: start.elapsed(),
    })
}

fn planted_recovery(b: &BenchOutcome) -> Check {
    ensure(
        b.recovery >= 0.9 && b.topics >= 0.9 && b.elapsed < Duration::from_secs(300),
        format!(
            "reactions element-centric {:.3}, topics element-centric {:.3}, {:.1}s",
            b.recovery,
            b.topics,
            b.elapsed.as_secs_f64()
        ),
    )
}

fn comparison(b: &BenchOutcome) -> Check {
    ensure(
        b.ge_structural >= 0.7,
        format!("temporal >= structural excess on {:.1}% of events", 100.0 * b.ge_structural),
    )
}

fn similarities(cfg: &SynthConfig) -> Result<Vec<ScoredReaction>, String> {
    let corpus = generate_corpus(cfg).map_err(|e| e.to_string())?;
    let spiking = corpus.spiking();
    let pcfg = PipelineConfig::default();
    let mut out = Vec::new();
    for net in build_networks(&corpus.records(), &corpus.click_table(), &corpus.store(), &pcfg) {
        let (flat, p) = temporal_partition(&net, &pcfg).map_err(|e| e.to_string())?;
        let (rs, _) = event_reactions(&net, &flat, &p, &pcfg).map_err(|e| e.to_string())?;
        for r in rs {
            out.push((r.event_id.clone(), r.articles, r.structural_similarity, spiking[&r.event_id].clone()));
        }
    }
    Ok(out)
}

fn similarity_extremes() -> Check {
    let uniform = similarities(&SynthConfig {
        events: 5,
        communities_per_event: 1,
        pattern: SpikePattern::Uniform,
        ..Default::default()
    })?;
    let min_uniform = uniform.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let orthogonal = similarities(&SynthConfig {
        events: 5,
        pattern: SpikePattern::Orthogonal,
        ..Default::default()
    })?;
    let pure: Vec<_> = orthogonal.iter().filter(|(_, a, _, spiking)| a.is_subset(spiking)).collect();
    let max_pure = pure.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let events: BTreeSet<&str> = orthogonal.iter().map(|r| r.0.as_str()).collect();
    let covered: BTreeSet<&str> = pure.iter().map(|r| r.0.as_str()).collect();
    ensure(
        !uniform.is_empty() && min_uniform >= 0.99 && !pure.is_empty() && max_pure <= 0.5 && covered == events,
        format!(
            "uniform: {} reactions, min s {min_uniform:.3}; orthogonal: {} spiking reactions over {}/{} events, max s {max_pure:.3}",
            uniform.len(),
            pure.len(),
            covered.len(),
            events.len()
        ),
    )
}

fn sweep_shape() -> Check {
    let planted: Vec<_> = (0..8)
        .map(|s| planted_partition_graph(&[15, 20, 25, 30], 0.6, 0.03, (1.0, 1.0), 100 + s))
        .collect();
    let graphs: Vec<_> = planted.iter().map(|(g, _)| g.clone()).collect();
    let result = resolution_sweep(&graphs, &GridSpec::default().values(), 0).map_err(|e| e.to_string())?;
    let Some(r) = result.chosen else {
        return Err(format!("no interior maximum ({:?})", result.status));
    };
    let mut worst = f64::INFINITY;
    for (g, truth) in &planted {
        let p = leiden_cpm(g, r, 0);
        let s = element_centric(&p, &Partition::from_membership(truth), DEFAULT_ALPHA).map_err(|e| e.to_string())?;
        worst = worst.min(s);
    }
    ensure(
        result.status == SweepStatus::Interior && worst >= 0.9,
        format!("interior maximum, chosen r = {r:.4}, min element-centric vs planted {worst:.3}"),
    )
}

fn tree(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in fs::read_dir(dir).expect("readable") {
        let p = e.expect("entry").path();
        if p.is_dir() {
            tree(&p, root, out);
        } else {
            out.insert(p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap());
        }
    }
}

fn determinism() -> Check {
    let synth = SynthConfig {
        events: 5,
        topics: 2,
        ..Default::default()
    };
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        generate_corpus(&synth)
            .and_then(|c| c.write(&dir.path().join("corpus")))
            .map_err(|e| e.to_string())?;
        let cfg = PipelineConfig {
            corpus_dir: dir.path().join("corpus"),
            work_dir: dir.path().join("work"),
            ..Default::default()
        };
        run_through(Stage::Export, &cfg).map_err(|e| e.to_string())?;
        let mut files = BTreeMap::new();
        tree(&cfg.work_dir, &cfg.work_dir, &mut files);
        trees.push(files);
    }
    let export = trees[0].get("export/topics_export.json").cloned().unwrap_or_default();
    let topics = serde_json::from_slice::<serde_json::Value>(&export)
        .ok()
        .and_then(|v| v["topics"].as_array().map(Vec::len))
        .unwrap_or(0);
    ensure(
        trees[0] == trees[1] && topics >= 1,
        format!("{} artifacts byte-identical across runs: {}, {topics} topics", trees[0].len(), trees[0] == trees[1]),
    )
}

fn feature_fixtures() -> Check {
    let series = |values: Vec<f64>| ReactionSeries {
        reaction_id: "r".into(),
        values,
        shift: 0,
    };
    let constant = series(vec![40.0; 61]);
    let c = topic_features(&[&constant], 30, BaselineDays::ThroughEventDay);
    let mut jump = vec![50.0; 61];
    jump[30] = 150.0;
    let jump = series(jump);
    let j = topic_features(&[&jump], 30, BaselineDays::ThroughEventDay);
    let both = topic_features(&[&constant, &jump], 30, BaselineDays::ThroughEventDay);
    ensure(
        (c.magnitude, c.deviance, c.prominence) == (0.0, 0.0, 40.0)
            && (j.magnitude, j.deviance, j.prominence) == (100.0, 2.0, 50.0)
            && (both.event_count, both.magnitude, both.deviance, both.prominence) == (2, 50.0, 1.0, 45.0),
        format!(
            "constant: magnitude {} deviance {}; jump: magnitude {} deviance {}; pair: magnitude {} deviance {}",
            c.magnitude, c.deviance, j.magnitude, j.deviance, both.magnitude, both.deviance
        ),
    )
}

fn main() {
    let bench = default_bench();
    type Named<'a> = (&'a str, Box<dyn Fn() -> Check + 'a>);
    let checks: Vec<Named> = vec![
        ("CPM optimum matches exhaustive enumeration", Box::new(cpm_oracle)),
        ("metrics match direct-formula oracles", Box::new(metric_oracles)),
        (
            "planted reactions and topics are recovered",
            Box::new(|| bench.as_ref().map_err(Clone::clone).and_then(planted_recovery)),
        ),
        (
            "temporal excess beats structural excess",
            Box::new(|| bench.as_ref().map_err(Clone::clone).and_then(comparison)),
        ),
        ("structural similarity reaches both extremes", Box::new(similarity_extremes)),
        ("resolution sweep finds an interior maximum", Box::new(sweep_shape)),
        ("full runs are byte-identical", Box::new(determinism)),
        ("feature formulas match hand values", Box::new(feature_fixtures)),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
