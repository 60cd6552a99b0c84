//! Deterministic synthetic corpora for tests, benchmarks and demos.
//!
//! Every sentence has a base prosodic contour (per-word duration, F0,
//! level, spectral tilt and following pause) with a few accented words.
//! Human speakers render that contour with small per-word jitter.
//! Synthetic speakers either flatten it or shuffle it across words, so
//! their event placement disagrees with the humans.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{AlignedUtterance, AudioBuffer, CorpusManifest, Interval, SpeakerEntry, SpeakerKind, UtteranceEntry, WordInterval};
use crate::error::{Error, Result};

const SENTENCES: [&[&str]; 3] = [
    &["the", "quick", "brown", "fox", "jumps", "over", "the", "lazy", "dog"],
    &["she", "sells", "sea", "shells", "by", "the", "shore"],
    &["a", "stitch", "in", "time", "saves", "nine"],
];

const EDGE_SILENCE_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticStyle {
    /// Monotone: average duration, pitch and level on every word.
    Flat,
    /// The base contour permuted across word positions.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    pub n_humans: usize,
    pub synthetic: Vec<SyntheticStyle>,
    pub n_sentences: usize,
    pub sample_rate_hz: u32,
    /// Relative per-word jitter applied to each human rendering.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            n_humans: 5,
            synthetic: vec![SyntheticStyle::Flat, SyntheticStyle::Shuffled],
            n_sentences: 3,
            sample_rate_hz: 16_000,
            jitter: 0.05,
            seed: 7,
        }
    }
}

/// Per-word targets for one rendering of a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTarget {
    pub token: String,
    pub duration_s: f64,
    pub f0_hz: f64,
    pub amplitude: f64,
    /// Harmonic amplitude falls off as `h^-tilt`.
    pub tilt: f64,
    pub pause_after_s: f64,
}

fn sentence_words(k: usize) -> Vec<String> {
    let base = SENTENCES[k % SENTENCES.len()];
    let rot = (k / SENTENCES.len()) % base.len();
    base.iter().cycle().skip(rot).take(base.len()).map(|s| s.to_string()).collect()
}

/// Base contour for sentence `k`.
pub fn base_contour(k: usize, seed: u64) -> Vec<WordTarget> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x5EED_0000 + k as u64));
    let words = sentence_words(k);
    let n = words.len();
    let mut accents: Vec<usize> = (0..n).collect();
    accents.shuffle(&mut rng);
    accents.truncate(2.max(n / 3));
    let pause_at = rng.random_range(1..n - 1);
    words
        .into_iter()
        .enumerate()
        .map(|(i, token)| {
            let accented = accents.contains(&i);
            let declination = 1.0 - 0.15 * i as f64 / n as f64;
            WordTarget {
                token,
                duration_s: rng.random_range(0.16..0.24) * if accented { 1.6 } else { 1.0 },
                f0_hz: 120.0 * declination * if accented { 1.45 } else { 1.0 },
                amplitude: if accented { 0.5 } else { 0.25 },
                tilt: if accented { 0.8 } else { 1.6 },
                pause_after_s: if i == pause_at { rng.random_range(0.18..0.3) } else { 0.0 },
            }
        })
        .collect()
}

fn jittered(base: &[WordTarget], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<WordTarget> {
    let mut z = || -> f64 { StandardNormal.sample(&mut *rng) };
    base.iter()
        .map(|w| WordTarget {
            token: w.token.clone(),
            duration_s: w.duration_s * (sigma * z()).exp(),
            f0_hz: w.f0_hz * (0.5 * sigma * z()).exp(),
            amplitude: w.amplitude * (sigma * z()).exp(),
            tilt: w.tilt * (sigma * z()).exp(),
            pause_after_s: if w.pause_after_s > 0.0 { w.pause_after_s * (sigma * z()).exp() } else { 0.0 },
        })
        .collect()
}

fn styled(base: &[WordTarget], style: SyntheticStyle, rng: &mut ChaCha8Rng) -> Vec<WordTarget> {
    match style {
        SyntheticStyle::Flat => {
            let n = base.len() as f64;
            let mean = |f: fn(&WordTarget) -> f64| base.iter().map(f).sum::<f64>() / n;
            let (d, f0, a, t) = (mean(|w| w.duration_s), mean(|w| w.f0_hz), mean(|w| w.amplitude), mean(|w| w.tilt));
            base.iter()
                .enumerate()
                .map(|(i, w)| WordTarget {
                    token: w.token.clone(),
                    duration_s: d * (1.0 + 0.03 * (i % 2) as f64),
                    f0_hz: f0 * (1.0 + 0.02 * (i % 3) as f64),
                    amplitude: a,
                    tilt: t,
                    pause_after_s: 0.0,
                })
                .collect()
        }
        SyntheticStyle::Shuffled => {
            let mut order: Vec<usize> = (0..base.len()).collect();
            order.shuffle(rng);
            base.iter()
                .zip(&order)
                .map(|(w, &j)| WordTarget {
                    token: w.token.clone(),
                    ..base[j].clone()
                })
                .collect()
        }
    }
}

/// Renders word targets to audio and the matching alignment.
pub fn render(
    speaker_id: &str,
    sentence_id: &str,
    words: &[WordTarget],
    sample_rate_hz: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(AudioBuffer, AlignedUtterance)> {
    let sr = sample_rate_hz as f64;
    let mut samples = vec![0.0; (EDGE_SILENCE_S * sr).round() as usize];
    let mut intervals = Vec::new();
    let mut silences = vec![Interval {
        start_s: 0.0,
        end_s: samples.len() as f64 / sr,
    }];
    let ramp = (0.01 * sr) as usize;
    let mut phase = 0.0f64;
    for w in words {
        let start = samples.len();
        let n = (w.duration_s * sr).round() as usize;
        let harmonics = ((0.45 * sr / w.f0_hz).floor() as usize).max(1);
        let norm: f64 = (1..=harmonics).map(|h| (h as f64).powf(-w.tilt)).sum();
        for i in 0..n {
            let env = (i.min(n - 1 - i) as f64 / ramp as f64).min(1.0);
            phase += 2.0 * std::f64::consts::PI * w.f0_hz / sr;
            let mut v = 0.0;
            for h in 1..=harmonics {
                v += (h as f64).powf(-w.tilt) * (h as f64 * phase).sin();
            }
            let breath: f64 = StandardNormal.sample(&mut *rng);
            samples.push(w.amplitude * env * (v / norm + 0.01 * breath));
        }
        intervals.push(WordInterval {
            token: w.token.clone(),
            start_s: start as f64 / sr,
            end_s: samples.len() as f64 / sr,
        });
        let pause = if std::ptr::eq(w, words.last().expect("non-empty")) {
            EDGE_SILENCE_S
        } else {
            w.pause_after_s
        };
        if pause > 0.0 {
            let s0 = samples.len();
            samples.resize(s0 + (pause * sr).round() as usize, 0.0);
            silences.push(Interval {
                start_s: s0 as f64 / sr,
                end_s: samples.len() as f64 / sr,
            });
        }
    }
    let utt = AlignedUtterance {
        speaker_id: speaker_id.to_string(),
        sentence_id: sentence_id.to_string(),
        words: intervals,
        silences,
        audio_path: None,
    };
    Ok((AudioBuffer::new(samples, sample_rate_hz)?, utt))
}

pub fn human_id(i: usize) -> String {
    format!("H{}", i + 1)
}

pub fn synthetic_id(style: SyntheticStyle) -> String {
    match style {
        SyntheticStyle::Flat => "TTS-flat".into(),
        SyntheticStyle::Shuffled => "TTS-shuffled".into(),
    }
}

pub fn sentence_id(k: usize) -> String {
    format!("s{:02}", k + 1)
}

/// Writes WAV files, TextGrids and `manifest.json` under `dir`; returns the
/// manifest path.
pub fn write_fixture(dir: &Path, cfg: &FixtureConfig) -> Result<PathBuf> {
    if cfg.n_sentences == 0 {
        return Err(Error::Precondition("fixture needs at least one sentence".into()));
    }
    let mut speakers: Vec<(String, SpeakerKind, Option<SyntheticStyle>)> = (0..cfg.n_humans)
        .map(|i| (human_id(i), SpeakerKind::Human, None))
        .collect();
    speakers.extend(cfg.synthetic.iter().map(|&s| (synthetic_id(s), SpeakerKind::Synthetic, Some(s))));

    let mut manifest = CorpusManifest {
        silence_tokens: crate::corpus::DEFAULT_SILENCE_TOKENS.iter().map(|s| s.to_string()).collect(),
        min_silence_ms: 0.0,
        speakers: Vec::new(),
    };
    for (si, (id, kind, style)) in speakers.iter().enumerate() {
        let spk_dir = dir.join(id);
        fs::create_dir_all(&spk_dir).map_err(|e| Error::io(&spk_dir, e))?;
        let mut entry = SpeakerEntry {
            speaker_id: id.clone(),
            kind: *kind,
            utterances: Vec::new(),
        };
        for k in 0..cfg.n_sentences {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003) + (si * 10_007 + k) as u64);
            let base = base_contour(k, cfg.seed);
            let targets = match style {
                None => jittered(&base, cfg.jitter, &mut rng),
                Some(s) => styled(&base, *s, &mut rng),
            };
            let sid = sentence_id(k);
            let (audio, utt) = render(id, &sid, &targets, cfg.sample_rate_hz, &mut rng)?;
            let wav = format!("{id}/{sid}.wav");
            let tg = format!("{id}/{sid}.TextGrid");
            fs::write(dir.join(&wav), audio.to_wav_pcm16()).map_err(|e| Error::io(dir.join(&wav), e))?;
            fs::write(dir.join(&tg), utt.to_textgrid()).map_err(|e| Error::io(dir.join(&tg), e))?;
            entry.utterances.push(UtteranceEntry {
                sentence_id: sid,
                audio_path: wav,
                alignment_path: tg,
            });
        }
        manifest.speakers.push(entry);
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `ratings.csv` and `pairs.csv` for the given speakers. Humans are
/// rated higher and win most comparisons against synthetic speakers.
pub fn write_perception_fixture(dir: &Path, humans: &[String], synthetic: &[String], seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<(&String, f64)> = humans
        .iter()
        .map(|h| (h, 1.0))
        .chain(synthetic.iter().enumerate().map(|(i, s)| (s, -0.3 - 0.4 * i as f64)))
        .collect();
    let mut ratings = String::from("listener,speaker,sentence,mos,judged_human\n");
    let mut pairs = String::from("listener,sentence,speaker_a,speaker_b,winner\n");
    for l in 0..24 {
        for k in 0..3 {
            let sid = sentence_id(k);
            for (s, quality) in &all {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mos = (3.3 + quality + 0.8 * z).round().clamp(1.0, 5.0) as u8;
                let human = rng.random_bool(1.0 / (1.0 + (-2.0 * quality).exp()));
                ratings.push_str(&format!("L{l:02},{s},{sid},{mos},{human}\n"));
            }
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    let p = 1.0 / (1.0 + (all[j].1 - all[i].1).exp());
                    let winner = if rng.random_bool(p) { all[i].0 } else { all[j].0 };
                    pairs.push_str(&format!("L{l:02},{sid},{},{},{winner}\n", all[i].0, all[j].0));
                }
            }
        }
    }
    for (name, body) in [("ratings.csv", ratings), ("pairs.csv", pairs)] {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    #[test]
    fn fixture_loads_and_is_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = FixtureConfig {
            n_humans: 3,
            synthetic: vec![SyntheticStyle::Flat],
            n_sentences: 2,
            ..Default::default()
        };
        let ma = write_fixture(a.path(), &cfg).unwrap();
        write_fixture(b.path(), &cfg).unwrap();
        for rel in ["manifest.json", "H2/s02.wav", "TTS-flat/s01.TextGrid"] {
            assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap(), "{rel}");
        }
        let corpus = Corpus::open(&ma).unwrap();
        assert!(corpus.issues().is_empty());
        assert_eq!(corpus.utterances().count(), 8);
        for utt in corpus.utterances() {
            corpus.load_audio(utt).unwrap();
        }
    }

    #[test]
    fn shuffled_style_keeps_tokens() {
        let base = base_contour(0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = styled(&base, SyntheticStyle::Shuffled, &mut rng);
        assert_eq!(
            s.iter().map(|w| &w.token).collect::<Vec<_>>(),
            base.iter().map(|w| &w.token).collect::<Vec<_>>()
        );
        let mut d: Vec<f64> = s.iter().map(|w| w.duration_s).collect();
        let mut e: Vec<f64> = base.iter().map(|w| w.duration_s).collect();
        d.sort_by(f64::total_cmp);
        e.sort_by(f64::total_cmp);
        assert_eq!(d, e);
    }
}
