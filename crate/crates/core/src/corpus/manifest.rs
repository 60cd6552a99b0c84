//! Corpus manifest: which speakers exist and where their files live.
//!
//! ```json
//! {
//!   "silence_tokens": ["[SIL]", "sil", "sp", ""],
//!   "min_silence_ms": 0,
//!   "speakers": [
//!     {"id": "S1", "kind": "human",
//!      "utterances": [{"sentence": "s001", "audio": "S1/s001.wav", "alignment": "S1/s001.TextGrid"}]}
//!   ]
//! }
//! ```
//!
//! Paths are relative to the manifest's directory. `silence_tokens` and
//! `min_silence_ms` are optional.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SILENCE_TOKENS: [&str; 4] = ["[SIL]", "sil", "sp", ""];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeakerKind {
    Human,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceEntry {
    #[serde(rename = "sentence")]
    pub sentence_id: String,
    #[serde(rename = "audio")]
    pub audio_path: String,
    #[serde(rename = "alignment")]
    pub alignment_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerEntry {
    #[serde(rename = "id")]
    pub speaker_id: String,
    pub kind: SpeakerKind,
    #[serde(default)]
    pub utterances: Vec<UtteranceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default = "default_silence_tokens")]
    pub silence_tokens: Vec<String>,
    /// Silences shorter than this are dropped when alignments are loaded.
    #[serde(default)]
    pub min_silence_ms: f64,
    pub speakers: Vec<SpeakerEntry>,
}

fn default_silence_tokens() -> Vec<String> {
    DEFAULT_SILENCE_TOKENS.iter().map(|s| s.to_string()).collect()
}

impl CorpusManifest {
    pub fn speaker(&self, id: &str) -> Option<&SpeakerEntry> {
        self.speakers.iter().find(|s| s.speaker_id == id)
    }

    pub fn humans(&self) -> impl Iterator<Item = &SpeakerEntry> {
        self.speakers
            .iter()
            .filter(|s| s.kind == SpeakerKind::Human)
    }

    pub fn synthetic(&self) -> impl Iterator<Item = &SpeakerEntry> {
        self.speakers
            .iter()
            .filter(|s| s.kind == SpeakerKind::Synthetic)
    }

    fn validate(&self) -> Result<()> {
        if !self.min_silence_ms.is_finite() || self.min_silence_ms < 0.0 {
            return Err(Error::Validation(format!(
                "min_silence_ms must be a non-negative number, got {}",
                self.min_silence_ms
            )));
        }

        let mut ids = HashSet::new();
        for speaker in &self.speakers {
            if speaker.speaker_id.is_empty() {
                return Err(Error::Validation("empty speaker id".into()));
            }
            if !ids.insert(speaker.speaker_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate speaker id `{}`",
                    speaker.speaker_id
                )));
            }
            let mut sentences = HashSet::new();
            for utt in &speaker.utterances {
                if !sentences.insert(utt.sentence_id.as_str()) {
                    return Err(Error::Validation(format!(
                        "duplicate utterance ({}, {})",
                        speaker.speaker_id, utt.sentence_id
                    )));
                }
            }
        }

        // Every sentence a synthetic voice claims needs a reference spread.
        let mut human_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for speaker in self.humans() {
            for utt in &speaker.utterances {
                *human_counts.entry(utt.sentence_id.as_str()).or_default() += 1;
            }
        }
        let mut short: BTreeSet<&str> = BTreeSet::new();
        for speaker in self.synthetic() {
            for utt in &speaker.utterances {
                if human_counts.get(utt.sentence_id.as_str()).copied().unwrap_or(0) < 2 {
                    short.insert(utt.sentence_id.as_str());
                }
            }
        }
        if !short.is_empty() {
            return Err(Error::Validation(format!(
                "sentences with fewer than 2 reference speakers: {}",
                short.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(())
    }
}

/// Parses and validates a JSON manifest.
pub fn parse_manifest(bytes: &[u8]) -> Result<CorpusManifest> {
    let manifest: CorpusManifest = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        what: "manifest",
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    manifest.validate()?;
    Ok(manifest)
}
