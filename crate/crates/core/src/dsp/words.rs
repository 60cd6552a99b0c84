use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{AlignedUtterance, AudioBuffer};
use crate::error::{Error, Result};
use crate::feature::Column;

use super::{compute_cpps, estimate_f0, frame_intensity, spectral_band_measures, AnalysisConfig, FrameTrack};

/// A word-level signal with a validity mask. Masked entries hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Signal {
    pub fn new(values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if values.len() != valid.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                found: valid.len(),
            });
        }
        Ok(Self { values, valid })
    }

    pub fn all_valid(values: Vec<f64>) -> Self {
        let valid = vec![true; values.len()];
        Self { values, valid }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, v)| **v)
            .map(|(x, _)| *x)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

impl AsRef<Signal> for Signal {
    fn as_ref(&self) -> &Signal {
        self
    }
}

/// Word-level measurements for one utterance, one [`Signal`] per [`Column`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordFeatureMatrix {
    pub speaker_id: String,
    pub sentence_id: String,
    pub tokens: Vec<String>,
    columns: Vec<Signal>,
}

pub const CSV_HEADER: [&str; 10] = [
    "word",
    "token",
    "duration_ms",
    "pause_ms",
    "f0_hz",
    "intensity_db",
    "alpha_ratio_db",
    "l1_l0_db",
    "cpps_db",
    "valid_flags",
];

impl WordFeatureMatrix {
    /// Builds a matrix from columns given in [`Column::ALL`] order.
    pub fn new(
        speaker_id: impl Into<String>,
        sentence_id: impl Into<String>,
        tokens: Vec<String>,
        columns: Vec<Signal>,
    ) -> Result<Self> {
        if columns.len() != Column::ALL.len() {
            return Err(Error::LengthMismatch {
                expected: Column::ALL.len(),
                found: columns.len(),
            });
        }
        for c in &columns {
            if c.len() != tokens.len() {
                return Err(Error::LengthMismatch {
                    expected: tokens.len(),
                    found: c.len(),
                });
            }
        }
        Ok(Self {
            speaker_id: speaker_id.into(),
            sentence_id: sentence_id.into(),
            tokens,
            columns,
        })
    }

    pub fn n_words(&self) -> usize {
        self.tokens.len()
    }

    pub fn column(&self, c: Column) -> &Signal {
        &self.columns[c.index()]
    }

    pub fn column_mut(&mut self, c: Column) -> &mut Signal {
        &mut self.columns[c.index()]
    }

    pub fn columns(&self) -> &[Signal] {
        &self.columns
    }

    /// Writes the per-word CSV (header in [`CSV_HEADER`]); `valid_flags` is a
    /// 7-character bitstring in column order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for i in 0..self.n_words() {
            let mut rec = vec![(i + 1).to_string(), self.tokens[i].clone()];
            rec.extend(self.columns.iter().map(|c| c.values[i].to_string()));
            rec.push(
                self.columns
                    .iter()
                    .map(|c| if c.valid[i] { '1' } else { '0' })
                    .collect(),
            );
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        speaker_id: impl Into<String>,
        sentence_id: impl Into<String>,
        input: R,
    ) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Validation(format!(
                "feature CSV header mismatch: {}",
                header.join(",")
            )));
        }
        let mut tokens = Vec::new();
        let mut values = vec![Vec::new(); Column::ALL.len()];
        let mut valid = vec![Vec::new(); Column::ALL.len()];
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |msg: &str| Error::Validation(format!("feature CSV row {}: {msg}", row + 1));
            tokens.push(rec[1].to_string());
            let flags: Vec<char> = rec[9].chars().collect();
            if flags.len() != Column::ALL.len() || flags.iter().any(|c| *c != '0' && *c != '1') {
                return Err(bad("valid_flags must be 7 characters of 0/1"));
            }
            for c in 0..Column::ALL.len() {
                let v: f64 = rec[c + 2].parse().map_err(|_| bad("non-numeric value"))?;
                if !v.is_finite() {
                    return Err(bad("non-finite value"));
                }
                values[c].push(v);
                valid[c].push(flags[c] == '1');
            }
        }
        let columns = values
            .into_iter()
            .zip(valid)
            .map(|(v, m)| Signal { values: v, valid: m })
            .collect();
        Self::new(speaker_id, sentence_id, tokens, columns)
    }
}

/// Word durations and the silence following each word, in milliseconds.
pub fn extract_durations(utt: &AlignedUtterance) -> (Vec<f64>, Vec<f64>) {
    const EPS: f64 = 1e-9;
    let durations = utt.words.iter().map(|w| w.duration_s() * 1000.0).collect();
    let pauses = utt
        .words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let next_start = utt.words.get(i + 1).map_or(f64::INFINITY, |n| n.start_s);
            utt.silences
                .iter()
                .filter(|s| s.start_s >= w.end_s - EPS && s.end_s <= next_start + EPS)
                .map(|s| s.duration_s() * 1000.0)
                .sum()
        })
        .collect();
    (durations, pauses)
}

/// Frame-level inputs to [`aggregate_to_words`].
#[derive(Debug, Clone)]
pub struct FrameTracks {
    pub f0: FrameTrack,
    pub intensity: FrameTrack,
    pub alpha_ratio: FrameTrack,
    pub l1_l0: FrameTrack,
    pub cpps: FrameTrack,
}

impl FrameTracks {
    pub fn compute(audio: &AudioBuffer, cfg: &AnalysisConfig) -> Self {
        let (alpha_ratio, l1_l0) = spectral_band_measures(audio, cfg);
        Self {
            f0: estimate_f0(audio, cfg),
            intensity: frame_intensity(audio, cfg),
            alpha_ratio,
            l1_l0,
            cpps: compute_cpps(audio, cfg),
        }
    }
}

/// Averages frame tracks over each word's interval.
///
/// A frame belongs to a word when its center lies in `[start, end)`. Only
/// frames whose mask is set contribute (voiced frames for F0). dB values are
/// averaged directly. Words shorter than one frame step, or without
/// contributing frames, are masked for the acoustic columns.
pub fn aggregate_to_words(
    utt: &AlignedUtterance,
    tracks: &FrameTracks,
    cfg: &AnalysisConfig,
) -> WordFeatureMatrix {
    let (durations, pauses) = extract_durations(utt);
    let per_word = |track: &FrameTrack| -> Signal {
        let mut values = Vec::with_capacity(utt.words.len());
        let mut valid = Vec::with_capacity(utt.words.len());
        for w in &utt.words {
            let mean = if w.duration_s() < cfg.frame_step_s {
                None
            } else {
                let lo = track.frame_times_s.partition_point(|t| *t < w.start_s);
                let hi = track.frame_times_s.partition_point(|t| *t < w.end_s);
                let (sum, n) = (lo..hi)
                    .filter(|&k| track.voiced_mask[k])
                    .fold((0.0, 0usize), |(s, n), k| (s + track.values[k], n + 1));
                (n > 0).then(|| sum / n as f64)
            };
            values.push(mean.unwrap_or(0.0));
            valid.push(mean.is_some());
        }
        Signal { values, valid }
    };

    let columns = vec![
        Signal::all_valid(durations),
        Signal::all_valid(pauses),
        per_word(&tracks.f0),
        per_word(&tracks.intensity),
        per_word(&tracks.alpha_ratio),
        per_word(&tracks.l1_l0),
        per_word(&tracks.cpps),
    ];
    WordFeatureMatrix {
        speaker_id: utt.speaker_id.clone(),
        sentence_id: utt.sentence_id.clone(),
        tokens: utt.words.iter().map(|w| w.token.clone()).collect(),
        columns,
    }
}

/// Runs every frame analysis on `audio` and aggregates to `utt`'s words.
pub fn extract_features(
    utt: &AlignedUtterance,
    audio: &AudioBuffer,
    cfg: &AnalysisConfig,
) -> Result<WordFeatureMatrix> {
    cfg.validate()?;
    Ok(aggregate_to_words(utt, &FrameTracks::compute(audio, cfg), cfg))
}
