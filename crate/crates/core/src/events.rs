//! Binary prosodic events from word-level signals.
//!
//! Peaks are words whose value exceeds a moving-median threshold
//! `t_i = rho + median(x[i - h/2 ..= i + h/2])` (window clamped to the
//! signal) and which are strict local maxima. `rho` is a fixed multiple of
//! the population standard deviation of the whole signal. Pause events come
//! straight from the aligner's silences.

use serde::{Deserialize, Serialize};

use crate::corpus::AlignedUtterance;
use crate::dsp::{extract_durations, Signal, WordFeatureMatrix};
use crate::error::{Error, Result};
use crate::feature::{Column, Feature};
use crate::normalize::{NormalizedMatrix, StdKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointPolicy {
    InteriorOnly,
    #[default]
    AllowEndpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeakConfig {
    /// Odd window length in words.
    pub window_words: usize,
    pub rho_multiplier: f64,
    pub endpoint_policy: EndpointPolicy,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            window_words: 7,
            rho_multiplier: 0.5,
            endpoint_policy: EndpointPolicy::AllowEndpoints,
        }
    }
}

impl PeakConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_words < 3 || self.window_words % 2 == 0 {
            return Err(Error::Precondition(format!(
                "peak window must be odd and >= 3, got {}",
                self.window_words
            )));
        }
        if !self.rho_multiplier.is_finite() {
            return Err(Error::Precondition("rho multiplier must be finite".into()));
        }
        Ok(())
    }
}

/// How the duration feature's binary tier is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationTier {
    /// Duration peaks OR pause events.
    #[default]
    OrCombined,
    DurationOnly,
    PauseOnly,
}

impl std::str::FromStr for DurationTier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "or_combined" => Ok(Self::OrCombined),
            "duration_only" => Ok(Self::DurationOnly),
            "pause_only" => Ok(Self::PauseOnly),
            other => Err(format!(
                "unknown duration tier `{other}` (or_combined | duration_only | pause_only)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventConfig {
    pub peak: PeakConfig,
    pub min_pause_ms: f64,
    pub duration_tier: DurationTier,
}

impl Default for EventConfig {
    fn default() -> Self {
        Self {
            peak: PeakConfig::default(),
            min_pause_ms: 50.0,
            duration_tier: DurationTier::OrCombined,
        }
    }
}

/// Binary event decisions over the words of one utterance for one feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSeries {
    pub speaker_id: String,
    pub sentence_id: String,
    pub feature: Feature,
    pub bits: Vec<bool>,
}

impl EventSeries {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Moving-median threshold for a fully observed signal.
pub fn median_threshold(x: &[f64], cfg: &PeakConfig) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let rho = cfg.rho_multiplier * StdKind::Population.mean_std(x).map_or(0.0, |(_, s)| s);
    let half = cfg.window_words / 2;
    let mut buf = Vec::with_capacity(cfg.window_words);
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            buf.clear();
            buf.extend_from_slice(&x[lo..hi]);
            rho + median(&mut buf)
        })
        .collect()
}

/// Strict local maxima of `x` lying above `threshold`.
pub fn peaks_above(x: &[f64], threshold: &[f64], policy: EndpointPolicy) -> Vec<bool> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if x[i] <= threshold[i] {
                return false;
            }
            let left = i.checked_sub(1).map(|j| x[i] > x[j]);
            let right = (i + 1 < n).then(|| x[i] > x[i + 1]);
            match (left, right) {
                (Some(l), Some(r)) => l && r,
                (Some(one), None) | (None, Some(one)) => {
                    policy == EndpointPolicy::AllowEndpoints && one
                }
                (None, None) => false,
            }
        })
        .collect()
}

/// Peak events over the valid words of `signal`. Masked words are never
/// events and are skipped when looking for neighbors and computing the
/// threshold.
pub fn detect_peaks(signal: &Signal, cfg: &PeakConfig) -> Vec<bool> {
    let idx: Vec<usize> = (0..signal.len()).filter(|&i| signal.valid[i]).collect();
    let compact: Vec<f64> = idx.iter().map(|&i| signal.values[i]).collect();
    let t = median_threshold(&compact, cfg);
    let peaks = peaks_above(&compact, &t, cfg.endpoint_policy);
    let mut bits = vec![false; signal.len()];
    for (k, &i) in idx.iter().enumerate() {
        bits[i] = peaks[k];
    }
    bits
}

/// Pause events from per-word following-silence durations.
pub fn pause_events_from_ms(pause_ms: &[f64], min_pause_ms: f64) -> Vec<bool> {
    pause_ms.iter().map(|p| *p >= min_pause_ms).collect()
}

pub fn pause_events(utt: &AlignedUtterance, min_pause_ms: f64) -> Vec<bool> {
    pause_events_from_ms(&extract_durations(utt).1, min_pause_ms)
}

/// Event tiers for all six features of one utterance.
///
/// Peaks are picked on the normalized matrix; pause events use the raw
/// matrix's `pause_ms` so that `min_pause_ms` stays in milliseconds.
pub fn detect_events(
    raw: &WordFeatureMatrix,
    normalized: &NormalizedMatrix,
    cfg: &EventConfig,
) -> Vec<EventSeries> {
    let pauses = pause_events_from_ms(&raw.column(Column::PauseMs).values, cfg.min_pause_ms);
    Feature::ALL
        .iter()
        .map(|&feature| {
            let peaks = || detect_peaks(normalized.column(feature.column()), &cfg.peak);
            let bits = match (feature, cfg.duration_tier) {
                (Feature::Duration, DurationTier::PauseOnly) => pauses.clone(),
                (Feature::Duration, DurationTier::OrCombined) => peaks()
                    .into_iter()
                    .zip(&pauses)
                    .map(|(a, b)| a || *b)
                    .collect(),
                _ => peaks(),
            };
            EventSeries {
                speaker_id: raw.speaker_id.clone(),
                sentence_id: raw.sentence_id.clone(),
                feature,
                bits,
            }
        })
        .collect()
}
