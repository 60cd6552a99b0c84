//! End-to-end scoring: word features, normalization, events, both metric
//! tiers and aggregation into one [`TierReport`] per (speaker, feature).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::{binary_score, BinaryScore};
use crate::continuous::{build_reference, normalized_error, ContinuousScore};
use crate::corpus::{Corpus, LoadIssue, SpeakerKind};
use crate::dsp::{extract_features, AnalysisConfig, Signal, WordFeatureMatrix};
use crate::error::{Error, Result};
use crate::events::{detect_events, EventConfig, EventSeries};
use crate::feature::Feature;
use crate::normalize::{znorm, NormalizeConfig, NormalizedMatrix};
use crate::perception::{welch_t_test, WelchResult};

/// How per-sentence metrics are combined into one number per speaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Unweighted mean over sentences.
    #[default]
    PerSentence,
    /// Mean over sentences weighted by word count.
    WeightByWords,
    /// All words of all sentences scored as one sequence.
    Pooled,
}

/// Which signals the continuous tier compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDomain {
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub analysis: AnalysisConfig,
    pub normalize: NormalizeConfig,
    pub events: EventConfig,
    /// Agreement needed for a word to count as correct.
    pub threshold: f64,
    pub aggregation: Aggregation,
    pub error_domain: ErrorDomain,
    pub features: Vec<Feature>,
    /// Worker threads; `None` uses the rayon default.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            analysis: AnalysisConfig::default(),
            normalize: NormalizeConfig::default(),
            events: EventConfig::default(),
            threshold: 0.5,
            aggregation: Aggregation::PerSentence,
            error_domain: ErrorDomain::Normalized,
            features: Feature::ALL.to_vec(),
            jobs: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Precondition(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.features.is_empty() {
            return Err(Error::Precondition("no features selected".into()));
        }
        if self.events.min_pause_ms < 0.0 || !self.events.min_pause_ms.is_finite() {
            return Err(Error::Precondition("min_pause_ms must be a non-negative number".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Precondition("jobs must be at least 1".into()));
        }
        self.analysis.validate()?;
        self.events.peak.validate()
    }
}

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Precondition(format!("cannot start {n} worker threads: {e}"))),
    }
}

/// One utterance ready for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedUtterance {
    pub raw: WordFeatureMatrix,
    pub normalized: NormalizedMatrix,
    pub events: Vec<EventSeries>,
}

impl PreparedUtterance {
    pub fn new(raw: WordFeatureMatrix, cfg: &PipelineConfig) -> Self {
        let normalized = znorm(&raw, &cfg.normalize);
        let events = detect_events(&raw, &normalized, &cfg.events);
        Self { raw, normalized, events }
    }

    pub fn events_for(&self, feature: Feature) -> &EventSeries {
        self.events
            .iter()
            .find(|e| e.feature == feature)
            .expect("detect_events yields every feature")
    }

    fn signal(&self, feature: Feature, domain: ErrorDomain) -> &Signal {
        match domain {
            ErrorDomain::Normalized => self.normalized.column(feature.column()),
            ErrorDomain::Raw => self.raw.column(feature.column()),
        }
    }
}

/// Prepared utterances keyed by (speaker, sentence), plus anything that
/// could not be loaded.
#[derive(Debug, Clone, Default)]
pub struct FeatureStore {
    entries: BTreeMap<(String, String), PreparedUtterance>,
    pub issues: Vec<LoadIssue>,
}

/// Relative path of the feature CSV for one utterance.
pub fn feature_file_name(speaker_id: &str, sentence_id: &str) -> PathBuf {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect()
    };
    Path::new(&clean(speaker_id)).join(format!("{}.csv", clean(sentence_id)))
}

impl FeatureStore {
    pub fn from_matrices(matrices: impl IntoIterator<Item = WordFeatureMatrix>, cfg: &PipelineConfig) -> Self {
        let mut store = Self::default();
        for m in matrices {
            store.insert(PreparedUtterance::new(m, cfg));
        }
        store
    }

    pub fn insert(&mut self, utt: PreparedUtterance) {
        self.entries
            .insert((utt.raw.speaker_id.clone(), utt.raw.sentence_id.clone()), utt);
    }

    pub fn get(&self, speaker_id: &str, sentence_id: &str) -> Option<&PreparedUtterance> {
        self.entries.get(&(speaker_id.to_string(), sentence_id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PreparedUtterance> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Extracts features from every loaded utterance's audio. Failing
    /// utterances are recorded in `issues` and left out.
    pub fn from_corpus_audio(corpus: &Corpus, cfg: &PipelineConfig) -> Result<Self> {
        cfg.analysis.validate()?;
        let utts: Vec<_> = corpus.utterances().collect();
        let results: Vec<_> = with_jobs(cfg.jobs, || {
            utts.par_iter()
                .map(|utt| {
                    corpus
                        .load_audio(utt)
                        .and_then(|audio| extract_features(utt, &audio, &cfg.analysis))
                })
                .collect()
        })?;
        let mut store = Self {
            issues: corpus.issues().to_vec(),
            ..Self::default()
        };
        for (utt, res) in utts.into_iter().zip(results) {
            match res {
                Ok(m) => store.insert(PreparedUtterance::new(m, cfg)),
                Err(e) => {
                    log::warn!("skipping ({}, {}): {e}", utt.speaker_id, utt.sentence_id);
                    store.issues.push(LoadIssue {
                        speaker_id: utt.speaker_id.clone(),
                        sentence_id: utt.sentence_id.clone(),
                        path: utt.audio_path.clone().unwrap_or_default(),
                        message: e.to_string(),
                    });
                }
            }
        }
        Ok(store)
    }

    /// Reads feature CSVs written by `extract` for every utterance listed
    /// in the manifest. Missing or malformed files become issues.
    pub fn from_feature_dir(corpus: &Corpus, dir: &Path, cfg: &PipelineConfig) -> Result<Self> {
        let mut store = Self {
            issues: corpus.issues().to_vec(),
            ..Self::default()
        };
        for speaker in &corpus.manifest().speakers {
            for u in &speaker.utterances {
                let path = dir.join(feature_file_name(&speaker.speaker_id, &u.sentence_id));
                let loaded = std::fs::File::open(&path)
                    .map_err(|e| Error::io(&path, e))
                    .and_then(|f| WordFeatureMatrix::read_csv(&speaker.speaker_id, &u.sentence_id, f))
                    .and_then(|m| match corpus.utterance(&speaker.speaker_id, &u.sentence_id) {
                        Some(utt) if utt.word_count() != m.n_words() => Err(Error::LengthMismatch {
                            expected: utt.word_count(),
                            found: m.n_words(),
                        }),
                        _ => Ok(m),
                    });
                match loaded {
                    Ok(m) => store.insert(PreparedUtterance::new(m, cfg)),
                    Err(e) => {
                        log::warn!("skipping {}: {e}", path.display());
                        store.issues.push(LoadIssue {
                            speaker_id: speaker.speaker_id.clone(),
                            sentence_id: u.sentence_id.clone(),
                            path,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        Ok(store)
    }
}

/// Scores for one sentence of one (speaker, feature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub sentence_id: String,
    pub n_words: usize,
    pub n_references: usize,
    pub binary: BinaryScore,
    pub continuous: ContinuousScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSentence {
    pub sentence_id: String,
    pub reason: String,
}

/// Aggregated metrics for one speaker on one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    pub speaker_id: String,
    pub feature: Feature,
    pub zero_one_loss: Option<f64>,
    pub smoothed_loss: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub normalized_error: Option<f64>,
    pub n_sentences: usize,
    pub n_words_scored: usize,
    pub skipped: Vec<SkippedSentence>,
    pub sentences: Vec<SentenceScore>,
}

fn weighted_mean(values: impl Iterator<Item = (Option<f64>, f64)>) -> Option<f64> {
    let (mut sum, mut w) = (0.0, 0.0);
    for (v, weight) in values {
        if let Some(v) = v {
            sum += v * weight;
            w += weight;
        }
    }
    (w > 0.0).then(|| sum / w)
}

fn aggregate(sentences: &[SentenceScore], by_words: bool) -> [Option<f64>; 6] {
    let w = |s: &SentenceScore| if by_words { s.n_words as f64 } else { 1.0 };
    let we = |s: &SentenceScore| if by_words { s.continuous.n_scored as f64 } else { 1.0 };
    let field = |f: fn(&BinaryScore) -> Option<f64>| weighted_mean(sentences.iter().map(|s| (f(&s.binary), w(s))));
    [
        field(|b| Some(b.zero_one_loss)),
        field(|b| Some(b.smoothed_loss)),
        field(|b| b.precision),
        field(|b| b.recall),
        field(|b| b.f1),
        weighted_mean(sentences.iter().map(|s| (s.continuous.error, we(s)))),
    ]
}

/// Candidate and reference data for one sentence, or why it is skipped.
struct SentenceInputs<'a> {
    sentence_id: &'a str,
    candidate: &'a PreparedUtterance,
    references: Vec<&'a PreparedUtterance>,
}

fn gather<'a>(
    store: &'a FeatureStore,
    candidate: &str,
    references: &[String],
    sentences: &'a [String],
) -> (Vec<SentenceInputs<'a>>, Vec<SkippedSentence>) {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for sentence_id in sentences {
        let skip = |reason: String| SkippedSentence {
            sentence_id: sentence_id.clone(),
            reason,
        };
        let Some(cand) = store.get(candidate, sentence_id) else {
            log::warn!("{candidate}: no usable data for sentence {sentence_id}; skipped");
            skipped.push(skip("candidate data unavailable".into()));
            continue;
        };
        let refs: Vec<&PreparedUtterance> = references
            .iter()
            .filter_map(|r| store.get(r, sentence_id))
            .filter(|r| r.raw.n_words() == cand.raw.n_words())
            .collect();
        if refs.len() < 2 {
            log::warn!("{candidate}: sentence {sentence_id} has {} usable references; skipped", refs.len());
            skipped.push(skip(format!("only {} usable reference(s)", refs.len())));
            continue;
        }
        ok.push(SentenceInputs {
            sentence_id,
            candidate: cand,
            references: refs,
        });
    }
    (ok, skipped)
}

fn score_sentence(input: &SentenceInputs<'_>, feature: Feature, cfg: &PipelineConfig) -> Result<SentenceScore> {
    let p = &input.candidate.events_for(feature).bits;
    let refs: Vec<&[bool]> = input
        .references
        .iter()
        .map(|r| r.events_for(feature).bits.as_slice())
        .collect();
    let binary = binary_score(p, &refs, cfg.threshold)?;
    let ref_signals: Vec<&Signal> = input
        .references
        .iter()
        .map(|r| r.signal(feature, cfg.error_domain))
        .collect();
    let dist = build_reference(&ref_signals, cfg.normalize.std)?;
    let continuous = normalized_error(input.candidate.signal(feature, cfg.error_domain), &dist)?;
    Ok(SentenceScore {
        sentence_id: input.sentence_id.to_string(),
        n_words: p.len(),
        n_references: refs.len(),
        binary,
        continuous,
    })
}

fn pooled(inputs: &[SentenceInputs<'_>], feature: Feature, cfg: &PipelineConfig, scores: &[SentenceScore]) -> Result<[Option<f64>; 6]> {
    // Pooling needs one reference set for all sentences: the speakers
    // present in every evaluated sentence.
    let mut common: Vec<&str> = inputs
        .first()
        .map(|i| i.references.iter().map(|r| r.raw.speaker_id.as_str()).collect())
        .unwrap_or_default();
    for i in inputs {
        common.retain(|s| i.references.iter().any(|r| r.raw.speaker_id == *s));
    }
    let mut p = Vec::new();
    let mut refs = vec![Vec::new(); common.len()];
    for i in inputs {
        p.extend_from_slice(&i.candidate.events_for(feature).bits);
        for (k, s) in common.iter().enumerate() {
            let r = i.references.iter().find(|r| r.raw.speaker_id == *s).expect("common speaker");
            refs[k].extend_from_slice(&r.events_for(feature).bits);
        }
    }
    let (sq, n) = scores.iter().fold((0.0, 0usize), |(sq, n), s| {
        (sq + s.continuous.error.unwrap_or(0.0) * s.continuous.n_scored as f64, n + s.continuous.n_scored)
    });
    let error = (n > 0).then(|| sq / n as f64);
    if p.is_empty() || common.is_empty() {
        return Ok([None, None, None, None, None, error]);
    }
    let b = binary_score(&p, &refs, cfg.threshold)?;
    Ok([Some(b.zero_one_loss), Some(b.smoothed_loss), b.precision, b.recall, b.f1, error])
}

/// Scores `candidate` against `references` on `sentences`.
///
/// Sentences without candidate data or with fewer than two usable
/// references are skipped and listed in each report.
pub fn evaluate(
    store: &FeatureStore,
    candidate: &str,
    references: &[String],
    sentences: &[String],
    cfg: &PipelineConfig,
) -> Result<Vec<TierReport>> {
    cfg.validate()?;
    if references.iter().any(|r| r == candidate) {
        return Err(Error::Precondition(format!(
            "speaker {candidate} cannot be part of its own reference set"
        )));
    }
    if references.len() < 2 {
        return Err(Error::Precondition(format!(
            "at least 2 reference speakers are required, got {}",
            references.len()
        )));
    }
    let (inputs, skipped) = gather(store, candidate, references, sentences);
    let per_feature: Vec<Result<TierReport>> = with_jobs(cfg.jobs, || {
        cfg.features
            .par_iter()
            .map(|&feature| {
                let scores = inputs
                    .par_iter()
                    .map(|i| score_sentence(i, feature, cfg))
                    .collect::<Result<Vec<_>>>()?;
                let [zero_one_loss, smoothed_loss, precision, recall, f1, normalized_error] = match cfg.aggregation {
                    Aggregation::PerSentence => aggregate(&scores, false),
                    Aggregation::WeightByWords => aggregate(&scores, true),
                    Aggregation::Pooled => pooled(&inputs, feature, cfg, &scores)?,
                };
                Ok(TierReport {
                    speaker_id: candidate.to_string(),
                    feature,
                    zero_one_loss,
                    smoothed_loss,
                    precision,
                    recall,
                    f1,
                    normalized_error,
                    n_sentences: scores.len(),
                    n_words_scored: scores.iter().map(|s| s.continuous.n_scored).sum(),
                    skipped: skipped.clone(),
                    sentences: scores,
                })
            })
            .collect()
    })?;
    per_feature.into_iter().collect()
}

/// Scores a speaker from the manifest against every human except itself.
pub fn evaluate_candidate(
    corpus: &Corpus,
    store: &FeatureStore,
    candidate: &str,
    cfg: &PipelineConfig,
) -> Result<Vec<TierReport>> {
    if corpus.manifest().speaker(candidate).is_none() {
        return Err(Error::Precondition(format!("speaker {candidate} is not in the manifest")));
    }
    let references: Vec<String> = corpus.human_ids().into_iter().filter(|h| h != candidate).collect();
    let sentences = corpus.sentences_of(candidate);
    let lacking: Vec<&String> = sentences
        .iter()
        .filter(|s| {
            references
                .iter()
                .filter(|r| corpus.sentences_of(r).contains(s))
                .count()
                < 2
        })
        .collect();
    if !lacking.is_empty() {
        return Err(Error::Validation(format!(
            "sentences without at least 2 reference speakers for {candidate}: {}",
            lacking.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    evaluate(store, candidate, &references, &sentences, cfg)
}

/// Scores every listed speaker of `kind` against the humans.
pub fn evaluate_all(
    corpus: &Corpus,
    store: &FeatureStore,
    kind: SpeakerKind,
    cfg: &PipelineConfig,
) -> Result<Vec<TierReport>> {
    let mut out = Vec::new();
    for s in corpus.manifest().speakers.iter().filter(|s| s.kind == kind) {
        out.extend(evaluate_candidate(corpus, store, &s.speaker_id, cfg)?);
    }
    Ok(out)
}

/// Leave-one-out evaluation of each human against the other humans.
pub fn self_validate(store: &FeatureStore, humans: &[String], sentences: &[String], cfg: &PipelineConfig) -> Result<Vec<TierReport>> {
    if humans.len() < 3 {
        return Err(Error::Precondition(format!(
            "self-validation needs at least 3 human speakers, got {}",
            humans.len()
        )));
    }
    let mut out = Vec::new();
    for h in humans {
        let others: Vec<String> = humans.iter().filter(|o| *o != h).cloned().collect();
        out.extend(evaluate(store, h, &others, sentences, cfg)?);
    }
    Ok(out)
}

/// [`self_validate`] over all humans and sentences listed in the manifest.
pub fn self_validate_corpus(corpus: &Corpus, store: &FeatureStore, cfg: &PipelineConfig) -> Result<Vec<TierReport>> {
    let humans = corpus.human_ids();
    let mut sentences: Vec<String> = humans.iter().flat_map(|h| corpus.sentences_of(h)).collect();
    sentences.sort();
    sentences.dedup();
    self_validate(store, &humans, &sentences, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ZeroOneLoss,
    SmoothedLoss,
    Recall,
    Precision,
    F1,
    Error,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::ZeroOneLoss,
        Metric::SmoothedLoss,
        Metric::Recall,
        Metric::Precision,
        Metric::F1,
        Metric::Error,
    ];

    pub fn lower_is_better(self) -> bool {
        matches!(self, Metric::ZeroOneLoss | Metric::SmoothedLoss | Metric::Error)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Metric::ZeroOneLoss => "l0/1",
            Metric::SmoothedLoss => "l*",
            Metric::Recall => "recall",
            Metric::Precision => "precision",
            Metric::F1 => "F1",
            Metric::Error => "error",
        }
    }

    pub fn of_sentence(self, s: &SentenceScore) -> Option<f64> {
        match self {
            Metric::ZeroOneLoss => Some(s.binary.zero_one_loss),
            Metric::SmoothedLoss => Some(s.binary.smoothed_loss),
            Metric::Recall => s.binary.recall,
            Metric::Precision => s.binary.precision,
            Metric::F1 => s.binary.f1,
            Metric::Error => s.continuous.error,
        }
    }

    pub fn of_report(self, r: &TierReport) -> Option<f64> {
        match self {
            Metric::ZeroOneLoss => r.zero_one_loss,
            Metric::SmoothedLoss => r.smoothed_loss,
            Metric::Recall => r.recall,
            Metric::Precision => r.precision,
            Metric::F1 => r.f1,
            Metric::Error => r.normalized_error,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "zero_one_loss" | "l0/1" | "loss" => Metric::ZeroOneLoss,
            "smoothed_loss" | "l*" | "smoothed" => Metric::SmoothedLoss,
            "recall" => Metric::Recall,
            "precision" => Metric::Precision,
            "f1" => Metric::F1,
            "error" | "normalized_error" => Metric::Error,
            _ => return Err(Error::Precondition(format!("unknown metric `{s}`"))),
        })
    }
}

/// One row of a group comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub feature: Feature,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: Option<f64>,
    pub mean_b: Option<f64>,
    /// Statistic of group a minus group b; absent when the test is undefined.
    pub test: Option<WelchResult>,
    pub note: Option<String>,
    /// Label of the group with the better mean, or "tie".
    pub winner: String,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Welch t-tests of per-sentence metric values between two groups of
/// reports, one row per (feature, metric).
pub fn compare_groups(
    a: &[TierReport],
    b: &[TierReport],
    label_a: &str,
    label_b: &str,
    metrics: &[Metric],
) -> Result<Vec<ComparisonRow>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("both comparison groups need at least one report".into()));
    }
    let samples = |group: &[TierReport], f: Feature, m: Metric| -> Vec<f64> {
        group
            .iter()
            .filter(|r| r.feature == f)
            .flat_map(|r| r.sentences.iter().filter_map(move |s| m.of_sentence(s)))
            .collect()
    };
    let features: Vec<Feature> = Feature::ALL
        .into_iter()
        .filter(|f| a.iter().any(|r| r.feature == *f) && b.iter().any(|r| r.feature == *f))
        .collect();
    let mut rows = Vec::new();
    for f in features {
        for &m in metrics {
            let (xa, xb) = (samples(a, f, m), samples(b, f, m));
            let (mean_a, mean_b) = (mean(&xa), mean(&xb));
            let winner = match (mean_a, mean_b) {
                (Some(x), Some(y)) if x == y => "tie".to_string(),
                (Some(x), Some(y)) => {
                    if (x < y) == m.lower_is_better() {
                        label_a.to_string()
                    } else {
                        label_b.to_string()
                    }
                }
                _ => "tie".to_string(),
            };
            let (test, note) = match welch_t_test(&xa, &xb) {
                Ok(t) => (Some(t), None),
                Err(_) if mean_a.is_some() && mean_a == mean_b && xa.len() >= 2 && xb.len() >= 2 => (
                    Some(WelchResult {
                        t: 0.0,
                        df: (xa.len() + xb.len() - 2) as f64,
                        p: 1.0,
                    }),
                    Some("both groups constant and equal".to_string()),
                ),
                Err(e) => (None, Some(e.to_string())),
            };
            rows.push(ComparisonRow {
                feature: f,
                metric: m,
                n_a: xa.len(),
                n_b: xb.len(),
                mean_a,
                mean_b,
                test,
                note,
                winner,
            });
        }
    }
    Ok(rows)
}
