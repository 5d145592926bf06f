//! Command-line pipeline: ingest, fit, km, evaluate, simulate, transitions.
//!
//! Each command is also callable as a library function taking a resolved
//! [`RunConfig`], which is how the integration tests drive the pipeline.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    expand_keywords, fit_topics, load_post_embeddings, load_seed_keywords, risk_class, top_forums, top_terms,
    EmbeddingTable, FeatureSpec, KeywordLexicon, PostEmbeddings, SpecFeaturizer, DEFAULT_RISK_THRESHOLD,
    DEFAULT_TOP_FORUMS,
};
use crate::ingest::{
    apply_study_filters, build_survival_dataset, build_trajectories, clean_text, load_events, same_forum,
    summary_stats, transition_stats, write_events_jsonl, BuildReport, EventRecord, LoadReport, LogFormat,
    SummaryReport, SurvivalDataset, Trajectories,
};
use crate::metrics::{concordance_index, interval_auc, ConcordanceReport, IntervalAucReport, IntervalTruthRow};
use crate::output::{
    read_truth_csv, write_coefficients_csv, write_dataset_csv, write_json, write_km_csv, write_transitions_csv,
    write_truth_csv,
};
use crate::survival::{cox_fit, km_by_group, km_fit, CoxModel, FitOptions, DEFAULT_PENALIZER};
use crate::synth::{sample_trajectories, TrajectoryConfig, GENERATOR};
use crate::SECONDS_PER_DAY;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INGEST: i32 = 2;
pub const EXIT_FIT: i32 = 3;
pub const EXIT_EVALUATE: i32 = 4;

/// An error tagged with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("{source}")]
pub struct CommandError {
    pub code: i32,
    #[source]
    pub source: Error,
}

type CmdResult<T> = std::result::Result<T, CommandError>;

trait Stage<T> {
    fn stage(self, code: i32) -> CmdResult<T>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, code: i32) -> CmdResult<T> {
        self.map_err(|source| CommandError { code, source })
    }
}

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError {
        code: EXIT_USAGE,
        source: Error::InvalidInput(msg.into()),
    }
}

/// Settings shared by all commands. Read from a JSON file with these field
/// names; command-line flags take precedence over the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub events: Option<PathBuf>,
    /// Word-embedding table for keyword expansion.
    pub embeddings: Option<PathBuf>,
    /// Per-post embedding JSONL for topic features.
    pub post_embeddings: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub target_forum: String,
    pub cutoff: i64,
    pub top_n_forums: usize,
    pub neighbor_k: usize,
    pub risk_threshold: f64,
    pub penalizer: f64,
    pub interval_days: f64,
    pub seed: u64,
    pub topics_k_min: usize,
    pub topics_k_max: usize,
    pub include_score: bool,
    pub alpha: f64,
    /// Simulation settings; `seed`, `cutoff` and `target_forum` above win.
    pub simulation: Option<TrajectoryConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            events: None,
            embeddings: None,
            post_embeddings: None,
            seeds: None,
            output_dir: PathBuf::from("out"),
            target_forum: "SuicideWatch".into(),
            cutoff: 1_609_459_199,
            top_n_forums: DEFAULT_TOP_FORUMS,
            neighbor_k: 10,
            risk_threshold: DEFAULT_RISK_THRESHOLD,
            penalizer: DEFAULT_PENALIZER,
            interval_days: 30.0,
            seed: 0,
            topics_k_min: 2,
            topics_k_max: 10,
            include_score: true,
            alpha: 0.05,
            simulation: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn events_path(&self) -> CmdResult<&Path> {
        self.events
            .as_deref()
            .ok_or_else(|| usage("an event log is required (--events or \"events\" in the config file)"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "survtrans", version, about = "Time-to-event analysis of forum transitions")]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Event log, JSON lines or CSV
    #[arg(long, global = true)]
    pub events: Option<PathBuf>,
    /// Word vector table used to expand the seed keywords
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// Per-post vectors as JSON lines keyed by user_id and timestamp
    #[arg(long, global = true)]
    pub post_embeddings: Option<PathBuf>,
    /// Seed keyword list, one per line
    #[arg(long, global = true)]
    pub seeds: Option<PathBuf>,
    /// Directory for every output file [default: out]
    #[arg(long, short = 'o', global = true)]
    pub output_dir: Option<PathBuf>,
    /// Forum whose first post ends a trajectory
    #[arg(long, global = true)]
    pub target_forum: Option<String>,
    /// Unix seconds separating training events from held-out outcomes
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub cutoff: Option<i64>,
    /// Number of most active forums kept as indicator features
    #[arg(long, global = true)]
    pub top_n_forums: Option<usize>,
    /// Nearest neighbours added per seed keyword
    #[arg(long, global = true)]
    pub neighbor_k: Option<usize>,
    /// Score at or above which an event counts as high risk
    #[arg(long, global = true)]
    pub risk_threshold: Option<f64>,
    /// Ridge penalty on the Cox coefficients
    #[arg(long, global = true)]
    pub penalizer: Option<f64>,
    /// Width of each evaluation interval in days
    #[arg(long, global = true)]
    pub interval_days: Option<f64>,
    /// Seed for clustering and simulation
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f { cfg.$f = v; }
            )*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$(
                if self.$f.is_some() { cfg.$f = self.$f; }
            )*};
        }
        set_opt!(events, embeddings, post_embeddings, seeds);
        set!(output_dir, target_forum, cutoff, top_n_forums, neighbor_k, risk_threshold, penalizer, interval_days, seed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    None,
    #[value(name = "risk_class")]
    RiskClass,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, clean and filter the event log; write trajectories and a summary.
    Ingest,
    /// Build features and fit the ridge Cox model.
    Fit,
    /// Kaplan-Meier curves, overall or by the origin event's risk class.
    Km {
        #[arg(long, value_enum, default_value = "none")]
        group_by: GroupBy,
    },
    /// Concordance on the training rows and interval AUC on censored rows.
    Evaluate {
        /// Defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Defaults to feature_spec.json in the output directory.
        #[arg(long)]
        feature_spec: Option<PathBuf>,
        /// CSV `user_id,target_timestamp` with post-cutoff outcomes.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write a synthetic event log, its ground truth and a manifest.
    Simulate {
        #[arg(long)]
        n_users: Option<usize>,
        /// Hazard multiplier for a source forum, as FORUM=VALUE; repeatable.
        #[arg(long = "multiplier", value_parser = parse_multiplier)]
        multipliers: Vec<(String, f64)>,
    },
    /// Mean days from the last source-forum event to the target forum.
    Transitions,
}

fn parse_multiplier(s: &str) -> std::result::Result<(String, f64), String> {
    let (forum, value) = s.split_once('=').ok_or("expected FORUM=VALUE")?;
    let v: f64 = value.parse().map_err(|e| format!("bad multiplier {value:?}: {e}"))?;
    Ok((forum.to_owned(), v))
}

pub fn resolve_config(config: Option<&Path>, overrides: Overrides) -> CmdResult<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p).stage(EXIT_USAGE)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    Ok(cfg)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(cli: Cli) -> CmdResult<()> {
    let cfg = resolve_config(cli.config.as_deref(), cli.overrides)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::io(&cfg.output_dir, e))
        .stage(EXIT_USAGE)?;
    match cli.command {
        Command::Ingest => cmd_ingest(&cfg).map(drop),
        Command::Fit => cmd_fit(&cfg).map(drop),
        Command::Km { group_by } => cmd_km(&cfg, group_by).map(drop),
        Command::Evaluate {
            model,
            feature_spec,
            truth,
        } => {
            let model = model.unwrap_or_else(|| cfg.out("model.json"));
            let spec = feature_spec.unwrap_or_else(|| cfg.out("feature_spec.json"));
            cmd_evaluate(&cfg, &model, &spec, &truth).map(drop)
        }
        Command::Simulate { n_users, multipliers } => cmd_simulate(&cfg, n_users, &multipliers).map(drop),
        Command::Transitions => cmd_transitions(&cfg).map(drop),
    }
}

/// Filtered trajectories plus what loading saw.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub trajectories: Trajectories,
    pub load: LoadReport,
    pub users_loaded: usize,
}

/// Load, clean and filter. Every failure here is ingest-fatal.
pub fn prepare(cfg: &RunConfig) -> CmdResult<Prepared> {
    let path = cfg.events_path()?;
    let (mut events, load) = load_events(path, LogFormat::from_path(path)).stage(EXIT_INGEST)?;
    if events.is_empty() {
        return Err(Error::EmptyDataset(format!("no events in {}", path.display()))).stage(EXIT_INGEST);
    }
    for e in &mut events {
        e.title = clean_text(&e.title);
        e.text = clean_text(&e.text);
    }
    let all = build_trajectories(events);
    let users_loaded = all.len();
    let trajectories = apply_study_filters(all, &cfg.target_forum).stage(EXIT_INGEST)?;
    if trajectories.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no user has two or more events including one on {}",
            cfg.target_forum
        )))
        .stage(EXIT_INGEST);
    }
    Ok(Prepared {
        trajectories,
        load,
        users_loaded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub load: LoadReport,
    pub users_loaded: usize,
    pub users_retained: usize,
    pub summary: SummaryReport,
}

pub fn cmd_ingest(cfg: &RunConfig) -> CmdResult<IngestReport> {
    let prepared = prepare(cfg)?;
    let report = IngestReport {
        users_retained: prepared.trajectories.len(),
        summary: summary_stats(&prepared.trajectories, cfg.risk_threshold),
        load: prepared.load,
        users_loaded: prepared.users_loaded,
    };
    let path = cfg.out("trajectories.jsonl");
    let mut text = String::new();
    for t in prepared.trajectories.values() {
        text.push_str(&serde_json::to_string(t).map_err(Error::from).stage(EXIT_INGEST)?);
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e)).stage(EXIT_INGEST)?;
    write_json(&cfg.out("ingest_report.json"), &report).stage(EXIT_INGEST)?;
    Ok(report)
}

/// Source-forum events that can serve as origins: before the cutoff and not
/// on the target forum.
fn training_events<'a>(traj: &'a Trajectories, cfg: &'a RunConfig) -> impl Iterator<Item = &'a EventRecord> + 'a {
    traj.values()
        .flat_map(|t| &t.events)
        .filter(move |e| e.timestamp <= cfg.cutoff && !same_forum(&e.forum, &cfg.target_forum))
}

/// Forum vocabulary, keyword lexicon and optional topic model from the
/// training window.
pub fn build_feature_spec(
    cfg: &RunConfig,
    traj: &Trajectories,
    post_embeddings: Option<&PostEmbeddings>,
) -> Result<FeatureSpec> {
    let forums = top_forums(training_events(traj, cfg), cfg.top_n_forums, &cfg.target_forum);
    let lexicon = match (&cfg.seeds, &cfg.embeddings) {
        (Some(seeds), Some(table)) => {
            expand_keywords(&load_seed_keywords(seeds)?, &EmbeddingTable::load(table)?, cfg.neighbor_k)?
        }
        (Some(seeds), None) => KeywordLexicon::from_seeds(load_seed_keywords(seeds)?),
        (None, _) => KeywordLexicon::from_seeds(Vec::new()),
    };
    let topic_model = match post_embeddings {
        Some(map) => {
            let mut vectors = Vec::new();
            let mut texts = Vec::new();
            for e in training_events(traj, cfg) {
                if let Some(v) = map.get(&(e.user_id.clone(), e.timestamp)) {
                    vectors.push(v.clone());
                    texts.push(e.full_text());
                }
            }
            let k_max = cfg.topics_k_max.min(vectors.len());
            let (mut model, assignment) = fit_topics(&vectors, cfg.topics_k_min, k_max, cfg.seed)?;
            let mut clusters = vec![Vec::new(); model.k];
            for (text, c) in texts.into_iter().zip(assignment) {
                clusters[c].push(text);
            }
            model.top_terms = top_terms(&clusters, 10);
            Some(model)
        }
        None => None,
    };
    let spec = FeatureSpec {
        top_forums: forums,
        lexicon,
        topic_model,
        risk_threshold: cfg.risk_threshold,
        include_score: cfg.include_score,
    };
    spec.validate(Some(&cfg.target_forum))?;
    Ok(spec)
}

fn load_post_embeddings_opt(cfg: &RunConfig) -> Result<Option<PostEmbeddings>> {
    cfg.post_embeddings.as_deref().map(load_post_embeddings).transpose()
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub build: BuildReport,
    pub n_features: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: CoxModel,
    pub spec: FeatureSpec,
    pub dataset: SurvivalDataset,
    pub report: FitReport,
}

/// Featurize, fit, and write model.json, coefficients.csv,
/// feature_spec.json, dataset.csv and fit_report.json.
pub fn cmd_fit(cfg: &RunConfig) -> CmdResult<FitOutcome> {
    let prepared = prepare(cfg)?;
    let post = load_post_embeddings_opt(cfg).stage(EXIT_FIT)?;
    let spec = build_feature_spec(cfg, &prepared.trajectories, post.as_ref()).stage(EXIT_FIT)?;
    let featurizer = SpecFeaturizer {
        spec: &spec,
        embeddings: post.as_ref(),
    };
    let (dataset, build) =
        build_survival_dataset(&prepared.trajectories, &cfg.target_forum, cfg.cutoff, &featurizer).stage(EXIT_FIT)?;
    let model = cox_fit(&dataset, cfg.penalizer, &FitOptions::default()).stage(EXIT_FIT)?;
    let report = FitReport {
        build,
        n_features: model.n_features(),
        converged: model.converged,
        iterations: model.iterations,
        final_loss: model.final_loss,
    };
    model.save(&cfg.out("model.json")).stage(EXIT_FIT)?;
    write_coefficients_csv(&cfg.out("coefficients.csv"), &model.coefficients(), cfg.alpha).stage(EXIT_FIT)?;
    write_json(&cfg.out("feature_spec.json"), &spec).stage(EXIT_FIT)?;
    write_dataset_csv(&cfg.out("dataset.csv"), &dataset).stage(EXIT_FIT)?;
    write_json(&cfg.out("fit_report.json"), &report).stage(EXIT_FIT)?;
    Ok(FitOutcome {
        model,
        spec,
        dataset,
        report,
    })
}

/// Writes `km_all.csv`, or one `km_<class>.csv` per risk class present.
/// Returns the written paths.
pub fn cmd_km(cfg: &RunConfig, group_by: GroupBy) -> CmdResult<Vec<PathBuf>> {
    let prepared = prepare(cfg)?;
    let traj = &prepared.trajectories;
    let no_features = (Vec::new(), |_: &EventRecord| Ok(Vec::new()));
    let (dataset, _) = build_survival_dataset(traj, &cfg.target_forum, cfg.cutoff, &no_features).stage(EXIT_FIT)?;
    let mut written = Vec::new();
    match group_by {
        GroupBy::None => {
            let curve = km_fit(&dataset.durations(), &dataset.events()).stage(EXIT_FIT)?;
            let path = cfg.out("km_all.csv");
            write_km_csv(&path, &curve).stage(EXIT_FIT)?;
            written.push(path);
        }
        GroupBy::RiskClass => {
            let curves = km_by_group(&dataset, |row| {
                let ev = &traj[&row.user_id].events[row.origin_event_index];
                risk_class(ev.risk_score, cfg.risk_threshold).as_str().to_owned()
            })
            .stage(EXIT_FIT)?;
            for (label, curve) in curves {
                let path = cfg.out(&format!("km_{label}.csv"));
                write_km_csv(&path, &curve).stage(EXIT_FIT)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub concordance: ConcordanceReport,
    /// Absent when the censored rows have no observed outcome or no misses.
    pub interval_auc: Option<IntervalAucReport>,
    pub rows: usize,
    pub censored_rows: usize,
}

/// Censored origins with the truth file's outcome, in days from origin.
pub fn interval_rows(
    dataset: &SurvivalDataset,
    traj: &Trajectories,
    truth: &BTreeMap<String, Option<i64>>,
) -> Result<Vec<IntervalTruthRow>> {
    let mut rows = Vec::new();
    for row in dataset.rows.iter().filter(|r| !r.event) {
        let origin = traj[&row.user_id].events[row.origin_event_index].timestamp;
        let outcome_days = truth
            .get(&row.user_id)
            .copied()
            .flatten()
            .map(|t| (t - origin) as f64 / SECONDS_PER_DAY);
        if let Some(o) = outcome_days {
            if o < row.duration_days {
                return Err(Error::InvalidInput(format!(
                    "truth for {} lies before the cutoff",
                    row.user_id
                )));
            }
        }
        rows.push(IntervalTruthRow {
            covariates: row.covariates.clone(),
            censor_days: row.duration_days,
            outcome_days,
        });
    }
    Ok(rows)
}

pub fn cmd_evaluate(cfg: &RunConfig, model: &Path, spec: &Path, truth: &Path) -> CmdResult<EvaluationReport> {
    let truth = read_truth_csv(truth).stage(EXIT_EVALUATE)?;
    let model = CoxModel::load(model).stage(EXIT_EVALUATE)?;
    let spec = FeatureSpec::load(spec).stage(EXIT_EVALUATE)?;
    if spec.feature_names() != model.feature_names {
        return Err(Error::InvalidInput("feature spec does not match the model".into())).stage(EXIT_EVALUATE);
    }
    let prepared = prepare(cfg)?;
    let post = load_post_embeddings_opt(cfg).stage(EXIT_EVALUATE)?;
    let featurizer = SpecFeaturizer {
        spec: &spec,
        embeddings: post.as_ref(),
    };
    let (dataset, _) = build_survival_dataset(&prepared.trajectories, &cfg.target_forum, cfg.cutoff, &featurizer)
        .stage(EXIT_EVALUATE)?;
    let risks = dataset
        .rows
        .iter()
        .map(|r| model.linear_predictor(&r.covariates))
        .collect::<Result<Vec<_>>>()
        .stage(EXIT_EVALUATE)?;
    let concordance =
        concordance_index(&dataset.durations(), &dataset.events(), &risks).stage(EXIT_EVALUATE)?;
    let rows = interval_rows(&dataset, &prepared.trajectories, &truth).stage(EXIT_EVALUATE)?;
    let interval = match interval_auc(&model, &rows, cfg.interval_days) {
        Ok(r) => Some(r),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e).stage(EXIT_EVALUATE),
    };
    let report = EvaluationReport {
        concordance,
        interval_auc: interval,
        rows: dataset.len(),
        censored_rows: rows.len(),
    };
    write_json(&cfg.out("metrics.json"), &report).stage(EXIT_EVALUATE)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationManifest {
    pub generator: String,
    pub seed: u64,
    pub multipliers: BTreeMap<String, f64>,
    pub config: TrajectoryConfig,
    pub n_events: usize,
}

/// Writes events.jsonl, truth.csv and manifest.json.
pub fn cmd_simulate(cfg: &RunConfig, n_users: Option<usize>, multipliers: &[(String, f64)]) -> CmdResult<SimulationManifest> {
    let mut sim = cfg.simulation.clone().unwrap_or_default();
    sim.seed = cfg.seed;
    sim.cutoff = cfg.cutoff;
    sim.target_forum = cfg.target_forum.clone();
    if let Some(n) = n_users {
        sim.n_users = n;
    }
    for (forum, m) in multipliers {
        sim.set_multiplier(forum, *m).stage(EXIT_USAGE)?;
    }
    let log = sample_trajectories(&sim).stage(EXIT_USAGE)?;
    let write = |r: Result<()>| r.stage(EXIT_USAGE);
    write(write_events_jsonl(&cfg.out("events.jsonl"), &log.events))?;
    let truth: BTreeMap<String, Option<i64>> = log.truth.iter().map(|(u, t)| (u.clone(), Some(*t))).collect();
    write(write_truth_csv(&cfg.out("truth.csv"), &truth))?;
    let manifest = SimulationManifest {
        generator: GENERATOR.into(),
        seed: sim.seed,
        multipliers: sim.forums.iter().map(|f| (f.name.clone(), f.multiplier)).collect(),
        n_events: log.events.len(),
        config: sim,
    };
    write(write_json(&cfg.out("manifest.json"), &manifest))?;
    Ok(manifest)
}

pub fn cmd_transitions(cfg: &RunConfig) -> CmdResult<PathBuf> {
    let prepared = prepare(cfg)?;
    let stats = transition_stats(&prepared.trajectories, &cfg.target_forum, cfg.risk_threshold);
    let path = cfg.out("transitions.csv");
    write_transitions_csv(&path, &stats).stage(EXIT_INGEST)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.top_n_forums, 50);
        assert_eq!(c.neighbor_k, 10);
        assert_eq!(c.risk_threshold, 0.95);
        assert_eq!(c.penalizer, 5.0);
        assert_eq!(c.interval_days, 30.0);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"penalizer": 1.5, "neighbor_k": 3}"#).unwrap();
        let overrides = Overrides {
            penalizer: Some(2.5),
            ..Default::default()
        };
        let cfg = resolve_config(Some(&path), overrides).unwrap();
        assert_eq!(cfg.penalizer, 2.5);
        assert_eq!(cfg.neighbor_k, 3);
        assert_eq!(cfg.top_n_forums, 50);
    }

    #[test]
    fn unknown_config_field_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"penaliser": 1.5}"#).unwrap();
        let err = resolve_config(Some(&path), Overrides::default()).unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
    }

    #[test]
    fn multiplier_flag_parses() {
        assert_eq!(parse_multiplier("memes=4").unwrap(), ("memes".to_string(), 4.0));
        assert!(parse_multiplier("memes").is_err());
        assert!(parse_multiplier("memes=x").is_err());
    }

    #[test]
    fn bad_usage_exits_one() {
        assert_eq!(run_from(["survtrans", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run_from(["survtrans", "km", "--group-by", "forum"]), EXIT_USAGE);
    }
}
