//! Corpus input: manifests, word alignments and PCM audio.

mod alignment;
mod audio;
mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub use alignment::{
    parse_alignment, token_key, AlignedUtterance, AlignmentFormat, Interval, SilenceTokens,
    WordInterval,
};
pub use audio::{read_audio, AudioBuffer, MIN_SAMPLE_RATE_HZ};
pub use manifest::{
    parse_manifest, CorpusManifest, SpeakerEntry, SpeakerKind, UtteranceEntry,
    DEFAULT_SILENCE_TOKENS,
};

use crate::error::{Error, Result};

/// An utterance that could not be loaded; the rest of the corpus stays usable.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadIssue {
    pub speaker_id: String,
    pub sentence_id: String,
    pub path: PathBuf,
    pub message: String,
}

/// A manifest with all alignments parsed. Audio stays on disk until
/// [`Corpus::load_audio`] is called for a given utterance.
#[derive(Debug, Clone)]
pub struct Corpus {
    manifest: CorpusManifest,
    base_dir: PathBuf,
    utterances: BTreeMap<(String, String), AlignedUtterance>,
    issues: Vec<LoadIssue>,
}

impl Corpus {
    /// Reads the manifest at `path` and every alignment it lists.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let manifest = parse_manifest(&bytes)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_manifest(manifest, base)
    }

    /// Loads alignments relative to `base_dir`. Unreadable or malformed
    /// alignment files become [`LoadIssue`]s; inconsistent word sequences
    /// between speakers are a hard error.
    pub fn from_manifest(manifest: CorpusManifest, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let base_dir = base_dir.into();
        let silence = SilenceTokens::new(&manifest.silence_tokens);
        let mut utterances = BTreeMap::new();
        let mut issues = Vec::new();

        for speaker in &manifest.speakers {
            for entry in &speaker.utterances {
                let align_path = base_dir.join(&entry.alignment_path);
                let loaded = AlignmentFormat::from_path(&align_path).and_then(|format| {
                    let bytes = fs::read(&align_path).map_err(|e| Error::io(&align_path, e))?;
                    parse_alignment(&bytes, format, &silence)
                });
                match loaded {
                    Ok(mut utt) => {
                        utt.speaker_id = speaker.speaker_id.clone();
                        utt.sentence_id = entry.sentence_id.clone();
                        utt.audio_path = Some(base_dir.join(&entry.audio_path));
                        utt.drop_short_silences(manifest.min_silence_ms);
                        utterances.insert(
                            (speaker.speaker_id.clone(), entry.sentence_id.clone()),
                            utt,
                        );
                    }
                    Err(e) => {
                        log::warn!(
                            "skipping ({}, {}): {e}",
                            speaker.speaker_id,
                            entry.sentence_id
                        );
                        issues.push(LoadIssue {
                            speaker_id: speaker.speaker_id.clone(),
                            sentence_id: entry.sentence_id.clone(),
                            path: align_path,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }

        let corpus = Self {
            manifest,
            base_dir,
            utterances,
            issues,
        };
        corpus.check_token_sequences()?;
        Ok(corpus)
    }

    /// Builds a corpus from utterances already in memory (no audio on disk).
    pub fn from_utterances(
        manifest: CorpusManifest,
        utterances: impl IntoIterator<Item = AlignedUtterance>,
    ) -> Result<Self> {
        let corpus = Self {
            manifest,
            base_dir: PathBuf::from("."),
            utterances: utterances
                .into_iter()
                .map(|u| ((u.speaker_id.clone(), u.sentence_id.clone()), u))
                .collect(),
            issues: Vec::new(),
        };
        corpus.check_token_sequences()?;
        Ok(corpus)
    }

    fn check_token_sequences(&self) -> Result<()> {
        let mut first: BTreeMap<&str, (&str, Vec<String>)> = BTreeMap::new();
        for ((speaker, sentence), utt) in &self.utterances {
            let keys: Vec<String> = utt.tokens().map(token_key).collect();
            match first.get(sentence.as_str()) {
                None => {
                    first.insert(sentence, (speaker, keys));
                }
                Some((ref_speaker, ref_keys)) if *ref_keys != keys => {
                    return Err(Error::Validation(format!(
                        "sentence {sentence}: word sequences differ\n  {ref_speaker}: {}\n  {speaker}: {}\n  {}",
                        ref_keys.join(" "),
                        keys.join(" "),
                        describe_first_difference(ref_keys, &keys),
                    )));
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn manifest(&self) -> &CorpusManifest {
        &self.manifest
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn issues(&self) -> &[LoadIssue] {
        &self.issues
    }

    pub fn utterance(&self, speaker_id: &str, sentence_id: &str) -> Option<&AlignedUtterance> {
        self.utterances
            .get(&(speaker_id.to_string(), sentence_id.to_string()))
    }

    pub fn utterances(&self) -> impl Iterator<Item = &AlignedUtterance> {
        self.utterances.values()
    }

    /// Sentence ids listed for `speaker_id` in the manifest, sorted.
    pub fn sentences_of(&self, speaker_id: &str) -> Vec<String> {
        let mut ids: Vec<String> = self
            .manifest
            .speaker(speaker_id)
            .map(|s| s.utterances.iter().map(|u| u.sentence_id.clone()).collect())
            .unwrap_or_default();
        ids.sort();
        ids
    }

    pub fn human_ids(&self) -> Vec<String> {
        self.manifest.humans().map(|s| s.speaker_id.clone()).collect()
    }

    /// Reads and decodes the audio behind one utterance and checks that its
    /// alignment fits inside it.
    pub fn load_audio(&self, utt: &AlignedUtterance) -> Result<AudioBuffer> {
        let path = utt
            .audio_path
            .as_ref()
            .ok_or_else(|| Error::Audio("utterance has no audio path".into()))?;
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let audio = read_audio(&bytes)
            .map_err(|e| Error::Audio(format!("{}: {e}", path.display())))?;
        utt.check_fits(audio.duration_s())?;
        Ok(audio)
    }
}

fn describe_first_difference(a: &[String], b: &[String]) -> String {
    let idx = a
        .iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .unwrap_or(a.len().min(b.len()));
    format!(
        "first difference at word {}: `{}` vs `{}`",
        idx + 1,
        a.get(idx).map_or("<end>", String::as_str),
        b.get(idx).map_or("<end>", String::as_str)
    )
}
