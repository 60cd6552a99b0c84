use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prosody_core::events::{DurationTier, EndpointPolicy};
use prosody_core::pipeline::{Aggregation, ErrorDomain, PipelineConfig};
use prosody_core::{Feature, StdKind};

#[derive(Debug, Parser)]
#[command(name = "prosody-eval", version, about = "Word-level prosody evaluation of synthetic speech")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract word-level features for every utterance in a manifest.
    Extract(ExtractArgs),
    /// Detect prosodic events and write one bit-table per utterance.
    Events(EventsArgs),
    /// Score synthetic speakers against the human references.
    Evaluate(EvaluateArgs),
    /// Leave-one-out scoring of each human against the others.
    SelfValidate(SelfValidateArgs),
    /// Listening-test tables from ratings.csv and pairs.csv.
    Perception(PerceptionArgs),
    /// Re-emit CSV/table views of a report.json, optionally with t-tests
    /// against a second report.
    Report(ReportArgs),
    /// Write a deterministic synthetic corpus.
    MakeFixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus manifest (manifest.json).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write z-normalized matrices as `<sentence>.norm.csv`.
    #[arg(long)]
    pub normalized: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TierArg {
    OrCombined,
    DurationOnly,
    PauseOnly,
}

impl From<TierArg> for DurationTier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::OrCombined => DurationTier::OrCombined,
            TierArg::DurationOnly => DurationTier::DurationOnly,
            TierArg::PauseOnly => DurationTier::PauseOnly,
        }
    }
}

/// Options shared by every command that scores speakers.
#[derive(Debug, Args)]
pub struct ScoringArgs {
    /// Corpus manifest (manifest.json).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory of feature CSVs written by `extract`; without it features
    /// are extracted from the audio.
    #[arg(long, value_name = "DIR", conflicts_with = "from_audio")]
    pub features: Option<PathBuf>,
    /// Extract features from the audio (the default when --features is absent).
    #[arg(long)]
    pub from_audio: bool,
    /// Agreement needed for a word to count as correct.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Moving-median window in words (odd).
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    /// Threshold offset as a multiple of the signal's standard deviation.
    #[arg(long, default_value_t = 0.5)]
    pub rho_mult: f64,
    /// Do not let the first and last word count as peaks.
    #[arg(long)]
    pub interior_peaks_only: bool,
    /// Score all sentences as one pooled sequence.
    #[arg(long, conflicts_with = "weight_by_words")]
    pub pooled: bool,
    /// Weight per-sentence metrics by word count.
    #[arg(long)]
    pub weight_by_words: bool,
    /// Silence length that counts as a pause event.
    #[arg(long, default_value_t = 50.0)]
    pub min_pause_ms: f64,
    #[arg(long, value_enum, default_value_t = TierArg::OrCombined)]
    pub duration_tier: TierArg,
    /// Restrict scoring to these features (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<Feature>,
    /// Use the n-1 standard deviation instead of the population one.
    #[arg(long)]
    pub sample_std: bool,
    /// Compare raw rather than z-normalized signals in the error tier.
    #[arg(long)]
    pub raw_error: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl ScoringArgs {
    pub fn pipeline_config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig {
            threshold: self.threshold,
            jobs: self.jobs,
            ..Default::default()
        };
        cfg.events.peak.window_words = self.window;
        cfg.events.peak.rho_multiplier = self.rho_mult;
        if self.interior_peaks_only {
            cfg.events.peak.endpoint_policy = EndpointPolicy::InteriorOnly;
        }
        cfg.events.min_pause_ms = self.min_pause_ms;
        cfg.events.duration_tier = self.duration_tier.into();
        cfg.aggregation = if self.pooled {
            Aggregation::Pooled
        } else if self.weight_by_words {
            Aggregation::WeightByWords
        } else {
            Aggregation::PerSentence
        };
        if !self.only.is_empty() {
            cfg.features = Feature::ALL.into_iter().filter(|f| self.only.contains(f)).collect();
        }
        if self.sample_std {
            cfg.normalize.std = StdKind::Sample;
        }
        if self.raw_error {
            cfg.error_domain = ErrorDomain::Raw;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct EventsArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Speaker to score; all synthetic speakers when omitted.
    #[arg(long)]
    pub candidate: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelfValidateArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct PerceptionArgs {
    /// Listener ratings with columns listener,speaker,sentence,mos,judged_human.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Pairwise preferences with columns listener,sentence,speaker_a,speaker_b,winner.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest used to tell human from synthetic speakers.
    #[arg(long, conflicts_with = "humans")]
    pub manifest: Option<PathBuf>,
    /// Human speaker ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub humans: Vec<String>,
    /// Convergence tolerance of the Bradley-Terry fit.
    #[arg(long, default_value_t = prosody_core::perception::DEFAULT_TOL)]
    pub tol: f64,
    /// Iteration cap of the Bradley-Terry fit.
    #[arg(long, default_value_t = prosody_core::perception::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report.json written by `evaluate` or `self-validate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Second report; writes ttest.json with statistics of input minus this.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Group name for --input in comparison output.
    #[arg(long)]
    pub label: Option<String>,
    /// Group name for --against in comparison output.
    #[arg(long)]
    pub against_label: Option<String>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Directory to write the corpus into.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub humans: usize,
    #[arg(long, default_value_t = 3)]
    pub sentences: usize,
    /// Also write ratings.csv and pairs.csv.
    #[arg(long)]
    pub perception: bool,
}
