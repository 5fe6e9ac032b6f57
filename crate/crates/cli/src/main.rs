use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use wikitopics::labels::{agreement_summary, LabelFile};
use wikitopics::pipeline::{run_bench, run_stage, run_sweep, PipelineConfig, PipelineError, Stage, StageOutcome, SweepTarget};
use wikitopics::reactions::EventOverlap;
use wikitopics::synth::{generate_corpus, SpikePattern, SynthConfig};
use wikitopics::topics::BaselineDays;

#[derive(Parser)]
#[command(name = "wikitopics", version, about = "Topics of collective attention from Wikipedia clicks and page views")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse event pages, clickstream, page views and redirects.
    Ingest,
    /// Build one click network per event.
    BuildNetworks,
    /// Rolling correlations of daily views along every edge.
    Correlate,
    /// Temporal communities on the flattened multilayer networks.
    Detect,
    /// Reactions, structural similarity and baseline comparison.
    Reactions,
    /// Higher-level network of reactions and topics with features.
    Topics,
    /// Topic cards and feature rankings for the labelling interface.
    ExportUi,
    /// Resolution sweep over sampled graphs.
    Sweep {
        #[arg(long, value_parser = parse_enum::<SweepTarget>, default_value = "temporal")]
        target: SweepTarget,
    },
    /// Generate a synthetic corpus, run the pipeline on it and score recovery.
    Bench(BenchArgs),
    /// Agreement breakdown over two coders' label files.
    Agreement {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Generator settings as TOML.
    #[arg(long)]
    synth: Option<PathBuf>,
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long, value_parser = parse_enum::<SpikePattern>)]
    pattern: Option<SpikePattern>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    spike_amplitude: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Also write the generated corpus here.
    #[arg(long)]
    write_corpus: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Pipeline configuration as TOML; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "WIKITOPICS_CORPUS")]
    corpus_dir: Option<PathBuf>,
    #[arg(long, global = true, env = "WIKITOPICS_WORK")]
    work_dir: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    domain_prefixes: Option<Vec<String>>,
    #[arg(long, global = true)]
    window_days: Option<usize>,
    #[arg(long, global = true)]
    edge_threshold: Option<f64>,
    #[arg(long, global = true)]
    correlation_window: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    temporal_resolution: Option<f64>,
    #[arg(long, global = true)]
    structural_resolution: Option<f64>,
    #[arg(long, global = true)]
    navigational_resolution: Option<f64>,
    #[arg(long, global = true)]
    higher_resolution: Option<f64>,
    #[arg(long, global = true)]
    gate: Option<f64>,
    #[arg(long, global = true, value_parser = parse_enum::<EventOverlap>)]
    overlap: Option<EventOverlap>,
    #[arg(long, global = true, value_parser = parse_enum::<BaselineDays>)]
    baseline_days: Option<BaselineDays>,
    #[arg(long, global = true)]
    damping: Option<f64>,
    #[arg(long, global = true)]
    pagerank_tolerance: Option<f64>,
    #[arg(long, global = true)]
    pagerank_max_iterations: Option<usize>,
    #[arg(long, global = true)]
    pagerank_click_weighted: Option<bool>,
    #[arg(long, global = true)]
    grid_lower: Option<f64>,
    #[arg(long, global = true)]
    grid_upper: Option<f64>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    sweep_sample: Option<usize>,
    #[arg(long, global = true)]
    export_top: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

macro_rules! set {
    ($($field:expr => $value:expr),* $(,)?) => {
        $(if let Some(v) = $value.clone() { $field = v; })*
    };
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
                PipelineConfig::from_toml(&text)?
            }
            None => PipelineConfig::default(),
        };
        set! {
            c.corpus_dir => self.corpus_dir,
            c.work_dir => self.work_dir,
            c.domain_prefixes => self.domain_prefixes,
            c.window_days => self.window_days,
            c.edge_threshold => self.edge_threshold,
            c.correlation_window => self.correlation_window,
            c.tau => self.tau,
            c.resolutions.temporal => self.temporal_resolution,
            c.resolutions.structural => self.structural_resolution,
            c.resolutions.navigational => self.navigational_resolution,
            c.resolutions.higher => self.higher_resolution,
            c.gate => self.gate,
            c.overlap => self.overlap,
            c.baseline_days => self.baseline_days,
            c.pagerank.damping => self.damping,
            c.pagerank.tolerance => self.pagerank_tolerance,
            c.pagerank.max_iterations => self.pagerank_max_iterations,
            c.pagerank.click_weighted => self.pagerank_click_weighted,
            c.grid.lower => self.grid_lower,
            c.grid.upper => self.grid_upper,
            c.grid.points => self.grid_points,
            c.sweep_sample => self.sweep_sample,
            c.export_top => self.export_top,
            c.seed => self.seed,
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn stage_of(cmd: &Command) -> Option<Stage> {
    Some(match cmd {
        Command::Ingest => Stage::Ingest,
        Command::BuildNetworks => Stage::Networks,
        Command::Correlate => Stage::Correlate,
        Command::Detect => Stage::Detect,
        Command::Reactions => Stage::Reactions,
        Command::Topics => Stage::Topics,
        Command::ExportUi => Stage::Export,
        _ => return None,
    })
}

fn bench(args: &BenchArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut synth = match &args.synth {
        Some(p) => toml::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?,
        None => SynthConfig::default(),
    };
    set! {
        synth.events => args.events,
        synth.topics => args.topics,
        synth.pattern => args.pattern,
        synth.noise => args.noise,
        synth.spike_amplitude => args.spike_amplitude,
        synth.seed => args.synth_seed,
    }
    let corpus = generate_corpus(&synth)?;
    if let Some(dir) = &args.write_corpus {
        corpus.write(dir)?;
        log::info!("corpus written to {}", dir.display());
    }
    let report = run_bench(&corpus, cfg)?;
    log::info!(
        "recovery: mean element-centric {:.3}, exact {:.3}",
        report.recovery.mean_element_centric,
        report.recovery.exact_fraction
    );
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)
}

fn agreement(files: &[PathBuf], out: Option<&PathBuf>) -> Result<()> {
    let mut records = Vec::new();
    for path in files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = LabelFile::from_json(&text).with_context(|| path.display().to_string())?;
        records.extend(file.labels);
    }
    let summary = agreement_summary(&records);
    for e in &summary.excluded {
        log::warn!("topic {} excluded: {}", e.topic_id, e.reason);
    }
    emit(out, &serde_json::to_string_pretty(&summary)?)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.config.resolve()?;
    if let Some(stage) = stage_of(&cli.command) {
        match run_stage(stage, &cfg)? {
            StageOutcome::Ran => log::info!("{} finished", stage.name()),
            StageOutcome::UpToDate => log::info!("{} already up to date", stage.name()),
        }
        return Ok(());
    }
    match &cli.command {
        Command::Sweep { target } => {
            let result = run_sweep(&cfg, *target)?;
            let dir = cfg.work_dir.join("sweep");
            fs::create_dir_all(&dir)?;
            let text = serde_json::to_string_pretty(&result)?;
            fs::write(dir.join("sweep.json"), format!("{text}\n"))?;
            println!("{:?} {:?}", result.status, result.chosen);
            Ok(())
        }
        Command::Bench(args) => bench(args, &cfg),
        Command::Agreement { files, out } => agreement(files, out.as_ref()),
        _ => unreachable!("stages handled above"),
    }
}

/// The error chain, skipping causes already quoted by the message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{}", describe(&e));
            let usage = e.downcast_ref::<PipelineError>().is_some_and(PipelineError::is_usage);
            ExitCode::from(if usage { 1 } else { 2 })
        }
    }
}
