use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::Serialize;

use prosody_core::corpus::{Corpus, SpeakerKind};
use prosody_core::fixture::{self, FixtureConfig};
use prosody_core::perception::{self, welch_t_test, RatingRecord};
use prosody_core::pipeline::{self, compare_groups, feature_file_name, FeatureStore, Metric, PipelineConfig, TierReport};
use prosody_core::report::{self, comparison_lines, EvaluationReport, ReportKind};
use prosody_core::EventSeries;

use crate::args::{EvaluateArgs, EventsArgs, ExtractArgs, FixtureArgs, PerceptionArgs, ReportArgs, ScoringArgs, SelfValidateArgs};

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// How a successful command ended.
pub enum Outcome {
    Complete,
    /// Output was written but some inputs were skipped.
    Partial,
}

impl Outcome {
    fn from_skips(n: usize) -> Self {
        if n == 0 {
            Outcome::Complete
        } else {
            Outcome::Partial
        }
    }
}

/// Files produced by a command, written together once everything is computed.
#[derive(Default)]
struct Outputs(Vec<(PathBuf, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, rel: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.0.push((rel.into(), bytes.into()));
    }

    fn add_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.add(rel, s);
        Ok(())
    }

    fn write_to(self, dir: &Path) -> Result<()> {
        for (rel, bytes) in self.0 {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn open_corpus(path: &Path) -> Result<Corpus> {
    Corpus::open(path).with_context(|| format!("loading manifest {}", path.display()))
}

fn load_store(corpus: &Corpus, args: &ScoringArgs, cfg: &PipelineConfig) -> Result<FeatureStore> {
    let store = match &args.features {
        Some(dir) => FeatureStore::from_feature_dir(corpus, dir, cfg)?,
        None => FeatureStore::from_corpus_audio(corpus, cfg)?,
    };
    for issue in &store.issues {
        warn!(
            "skipped {} / {} ({}): {}",
            issue.speaker_id,
            issue.sentence_id,
            issue.path.display(),
            issue.message
        );
    }
    Ok(store)
}

fn matrix_csv(m: &prosody_core::WordFeatureMatrix) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    m.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn extract(args: ExtractArgs) -> Result<Outcome> {
    let corpus = open_corpus(&args.manifest)?;
    let cfg = PipelineConfig {
        jobs: args.jobs,
        ..Default::default()
    };
    cfg.validate()?;
    let store = FeatureStore::from_corpus_audio(&corpus, &cfg)?;
    for issue in &store.issues {
        warn!("skipped {}: {}", issue.path.display(), issue.message);
    }
    let mut out = Outputs::default();
    for utt in store.iter() {
        let rel = feature_file_name(&utt.raw.speaker_id, &utt.raw.sentence_id);
        out.add(&rel, matrix_csv(&utt.raw)?);
        if args.normalized {
            out.add(rel.with_extension("norm.csv"), matrix_csv(&utt.normalized.0)?);
        }
    }
    let n = store.len();
    out.write_to(&args.out)?;
    say(&format!("extracted {n} utterances, skipped {}\n", store.issues.len()));
    Ok(Outcome::from_skips(store.issues.len()))
}

fn events_csv(tokens: &[String], series: &[EventSeries]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["word".to_string(), "token".to_string()];
    header.extend(series.iter().map(|s| s.feature.name().to_string()));
    w.write_record(&header)?;
    for (i, tok) in tokens.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), tok.clone()];
        row.extend(series.iter().map(|s| u8::from(s.bits[i]).to_string()));
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}

pub fn events(args: EventsArgs) -> Result<Outcome> {
    let a = &args.scoring;
    let cfg = a.pipeline_config();
    cfg.validate()?;
    let corpus = open_corpus(&a.manifest)?;
    let store = load_store(&corpus, a, &cfg)?;
    let mut out = Outputs::default();
    for utt in store.iter() {
        let rel = feature_file_name(&utt.raw.speaker_id, &utt.raw.sentence_id).with_extension("events.csv");
        let series: Vec<EventSeries> = utt
            .events
            .iter()
            .filter(|s| cfg.features.contains(&s.feature))
            .cloned()
            .collect();
        out.add(rel, events_csv(&utt.raw.tokens, &series)?);
    }
    out.write_to(&a.out)?;
    Ok(Outcome::from_skips(store.issues.len()))
}

fn emit_report(doc: &EvaluationReport, dir: &Path, extra: Outputs) -> Result<()> {
    let mut out = extra;
    out.add("report.json", doc.to_json()?);
    let mut csv = Vec::new();
    doc.write_csv(&mut csv)?;
    out.add("report.csv", csv);
    let mut radar = Vec::new();
    doc.write_radar_csv(&mut radar)?;
    out.add("radar.csv", radar);
    out.write_to(dir)?;
    say(&doc.to_table());
    Ok(())
}

fn skipped_count(reports: &[TierReport]) -> usize {
    reports.iter().map(|r| r.skipped.len()).sum()
}

pub fn evaluate(args: EvaluateArgs) -> Result<Outcome> {
    let a = &args.scoring;
    let cfg = a.pipeline_config();
    cfg.validate()?;
    let corpus = open_corpus(&a.manifest)?;
    if let Some(c) = &args.candidate {
        if corpus.manifest().speaker(c).is_none() {
            bail!("candidate `{c}` is not listed in {}", a.manifest.display());
        }
    } else if corpus.manifest().synthetic().next().is_none() {
        bail!("the manifest lists no synthetic speakers; pass --candidate");
    }
    let store = load_store(&corpus, a, &cfg)?;
    let reports = match &args.candidate {
        Some(c) => pipeline::evaluate_candidate(&corpus, &store, c, &cfg)?,
        None => pipeline::evaluate_all(&corpus, &store, SpeakerKind::Synthetic, &cfg)?,
    };
    let skipped = skipped_count(&reports) + store.issues.len();
    emit_report(&EvaluationReport::new(ReportKind::Evaluation, &cfg, reports), &a.out, Outputs::default())?;
    Ok(Outcome::from_skips(skipped))
}

pub fn self_validate(args: SelfValidateArgs) -> Result<Outcome> {
    let a = &args.scoring;
    let cfg = a.pipeline_config();
    cfg.validate()?;
    let corpus = open_corpus(&a.manifest)?;
    let store = load_store(&corpus, a, &cfg)?;
    let reports = pipeline::self_validate_corpus(&corpus, &store, &cfg)?;
    let skipped = skipped_count(&reports) + store.issues.len();
    emit_report(&EvaluationReport::new(ReportKind::SelfValidation, &cfg, reports), &a.out, Outputs::default())?;
    Ok(Outcome::from_skips(skipped))
}

fn default_label(kind: ReportKind) -> &'static str {
    match kind {
        ReportKind::Evaluation => "Model",
        ReportKind::SelfValidation => "Human",
    }
}

fn read_report(path: &Path) -> Result<EvaluationReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EvaluationReport::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn report(args: ReportArgs) -> Result<Outcome> {
    let doc = read_report(&args.input)?;
    let mut extra = Outputs::default();
    if let Some(other) = &args.against {
        let against = read_report(other)?;
        let la = args.label.clone().unwrap_or_else(|| default_label(doc.kind).to_string());
        let mut lb = args.against_label.clone().unwrap_or_else(|| default_label(against.kind).to_string());
        if lb == la {
            lb.push_str(" (b)");
        }
        let rows = compare_groups(&doc.reports, &against.reports, &la, &lb, &Metric::ALL)?;
        say(&comparison_lines(&rows));
        extra.add_json("ttest.json", &rows)?;
    }
    extra.add("table.txt", doc.to_table());
    emit_report(&doc, &args.out, extra)?;
    Ok(Outcome::Complete)
}

#[derive(Serialize)]
struct MosTest {
    speaker: String,
    reference: String,
    mean: f64,
    reference_mean: f64,
    t: Option<f64>,
    df: Option<f64>,
    p: Option<f64>,
    winner: String,
    note: Option<String>,
}

fn mos_tests(ratings: &[RatingRecord], humans: &[String]) -> Vec<MosTest> {
    let human_scores: Vec<f64> = ratings
        .iter()
        .filter(|r| humans.contains(&r.speaker_id))
        .map(|r| r.mos as f64)
        .collect();
    let mut groups: Vec<(String, Vec<f64>)> = perception::rated_speakers(ratings)
        .into_iter()
        .filter(|s| !humans.iter().any(|h| h == s))
        .map(|s| {
            let v = ratings.iter().filter(|r| r.speaker_id == s).map(|r| r.mos as f64).collect();
            (s.to_string(), v)
        })
        .collect();
    if groups.len() > 1 {
        let all: Vec<f64> = groups.iter().flat_map(|g| g.1.clone()).collect();
        groups.push(("all synthetic".to_string(), all));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    groups
        .into_iter()
        .map(|(speaker, scores)| {
            let (m, hm) = (mean(&scores), mean(&human_scores));
            let winner = if m == hm {
                "tie"
            } else if m > hm {
                speaker.as_str()
            } else {
                "Human"
            }
            .to_string();
            let test = welch_t_test(&scores, &human_scores);
            MosTest {
                t: test.as_ref().ok().map(|t| t.t),
                df: test.as_ref().ok().map(|t| t.df),
                p: test.as_ref().ok().map(|t| t.p),
                note: test.err().map(|e| e.to_string()),
                speaker,
                reference: "humans".into(),
                mean: m,
                reference_mean: hm,
                winner,
            }
        })
        .collect()
}

fn read_file(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("opening {}", path.display()))
}

pub fn perception(args: PerceptionArgs) -> Result<Outcome> {
    if args.ratings.is_none() && args.pairs.is_none() {
        bail!("pass --ratings and/or --pairs");
    }
    let humans: Vec<String> = match &args.manifest {
        Some(m) => {
            let bytes = fs::read(m).with_context(|| format!("reading {}", m.display()))?;
            prosody_core::corpus::parse_manifest(&bytes)?
                .humans()
                .map(|s| s.speaker_id.clone())
                .collect()
        }
        None => args.humans.clone(),
    };
    let mut out = Outputs::default();
    if let Some(path) = &args.ratings {
        let ratings = perception::parse_ratings(read_file(path)?).with_context(|| format!("in {}", path.display()))?;
        let humanness = report::humanness_table(&perception::humanness_proportion(&ratings));
        let mos = report::mos_table(&perception::mos_summary(&ratings)?);
        say(&format!("Humanness\n{}\n", report::humanness_lines(&humanness)));
        say(&format!("MOS\n{}\n", report::mos_lines(&mos)));
        out.add_json("table1_humanness.json", &humanness)?;
        out.add_json("table2_mos.json", &mos)?;
        if humans.is_empty() {
            warn!("no human speakers given (--manifest or --humans); ttest.json lists no tests");
        }
        out.add_json("ttest.json", &mos_tests(&ratings, &humans))?;
    }
    if let Some(path) = &args.pairs {
        let pairs = perception::parse_pairs(read_file(path)?).with_context(|| format!("in {}", path.display()))?;
        let fit = perception::fit_btm(&pairs, args.tol, args.max_iter)?;
        if !fit.converged {
            warn!("Bradley-Terry fit did not converge after {} iterations", fit.iterations);
        }
        let table = report::btm_table(&fit);
        say(&format!("BTM\n{}\n", report::btm_lines(&table)));
        out.add_json("win_matrix.json", &report::win_matrix_json(&perception::win_matrix(&pairs)))?;
        out.add_json("table4_btm.json", &table)?;
    }
    out.write_to(&args.out)?;
    Ok(Outcome::Complete)
}

pub fn make_fixture(args: FixtureArgs) -> Result<Outcome> {
    let cfg = FixtureConfig {
        n_humans: args.humans,
        n_sentences: args.sentences,
        seed: args.seed,
        ..Default::default()
    };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let manifest = fixture::write_fixture(&args.out, &cfg)?;
    if args.perception {
        let humans: Vec<String> = (0..cfg.n_humans).map(fixture::human_id).collect();
        let synth: Vec<String> = cfg.synthetic.iter().map(|s| fixture::synthetic_id(*s)).collect();
        fixture::write_perception_fixture(&args.out, &humans, &synth, cfg.seed)?;
    }
    say(&format!("{}\n", manifest.display()));
    Ok(Outcome::Complete)
}
