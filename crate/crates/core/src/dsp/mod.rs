//! Frame-level acoustic analysis and word-level aggregation.
//!
//! Every analysis shares one framing: frames of `frame_length_s` seconds
//! taken every `frame_step_s` seconds, with the frame time being the frame
//! center. Audio shorter than one frame yields a single zero-padded frame.

mod cpps;
mod intensity;
mod pitch;
mod spectral;
mod words;

use std::borrow::Cow;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

pub use cpps::compute_cpps;
pub use intensity::frame_intensity;
pub use pitch::estimate_f0;
pub use spectral::spectral_band_measures;
pub use words::{aggregate_to_words, extract_durations, extract_features, FrameTracks, Signal, WordFeatureMatrix};

use crate::corpus::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub frame_length_s: f64,
    pub frame_step_s: f64,
    pub pitch_floor_hz: f64,
    pub pitch_ceiling_hz: f64,
    pub intensity_floor_db: f64,
    pub spectral_floor_db: f64,
    /// Minimum normalized autocorrelation for a frame to count as voiced.
    pub voicing_threshold: f64,
    /// Per-octave penalty favouring shorter lags when choosing among
    /// autocorrelation peaks.
    pub octave_cost: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            frame_length_s: 0.040,
            frame_step_s: 0.010,
            pitch_floor_hz: 75.0,
            pitch_ceiling_hz: 500.0,
            intensity_floor_db: -120.0,
            spectral_floor_db: -120.0,
            voicing_threshold: 0.45,
            octave_cost: 0.01,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.frame_step_s > 0.0
            && self.frame_step_s <= self.frame_length_s
            && self.pitch_floor_hz > 0.0
            && self.pitch_floor_hz < self.pitch_ceiling_hz
            && self.frame_length_s.is_finite()
            && self.pitch_ceiling_hz.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "invalid analysis config: need 0 < step <= length and 0 < floor < ceiling ({self:?})"
            )))
        }
    }
}

/// Per-frame measurements with frame-center times and a per-frame mask.
///
/// For F0 the mask is voicing; for the other measures it marks frames where
/// the measurement is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrack {
    pub values: Vec<f64>,
    pub frame_times_s: Vec<f64>,
    pub voiced_mask: Vec<bool>,
}

impl FrameTrack {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Framing {
    pub len: usize,
    pub step: usize,
    pub count: usize,
    pub sample_rate: f64,
}

impl Framing {
    pub fn new(audio: &AudioBuffer, cfg: &AnalysisConfig) -> Self {
        let sr = audio.sample_rate_hz as f64;
        let len = ((cfg.frame_length_s * sr).round() as usize).max(2);
        let step = ((cfg.frame_step_s * sr).round() as usize).clamp(1, len);
        let n = audio.samples.len();
        let count = if n >= len { (n - len) / step + 1 } else { 1 };
        Self {
            len,
            step,
            count,
            sample_rate: sr,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| (k * self.step) as f64 / self.sample_rate + self.len as f64 / (2.0 * self.sample_rate))
            .collect()
    }

    pub fn frame<'a>(&self, samples: &'a [f64], k: usize) -> Cow<'a, [f64]> {
        let start = k * self.step;
        let end = start + self.len;
        if end <= samples.len() {
            Cow::Borrowed(&samples[start..end])
        } else {
            let mut v = vec![0.0; self.len];
            let avail = samples.len().saturating_sub(start);
            v[..avail].copy_from_slice(&samples[start..start + avail]);
            Cow::Owned(v)
        }
    }
}

pub(crate) fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Hann-windowed power spectra on a zero-padded FFT grid.
pub(crate) struct Spectrum {
    pub nfft: usize,
    window: Vec<f64>,
    window_energy: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl Spectrum {
    /// FFT size is the next power of two at or above four frame lengths.
    pub fn new(frame_len: usize) -> Self {
        let nfft = (4 * frame_len).next_power_of_two();
        let window = hann(frame_len);
        let window_energy = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Self {
            nfft,
            window,
            window_energy,
            fft,
            buf: vec![Complex::default(); nfft],
        }
    }

    /// Two-sided power spectrum |X_k|^2 for k in 0..nfft.
    pub fn power(&mut self, frame: &[f64]) -> Vec<f64> {
        for c in self.buf.iter_mut() {
            *c = Complex::default();
        }
        for (i, (&x, &w)) in frame.iter().zip(&self.window).enumerate() {
            self.buf[i] = Complex::new(x * w, 0.0);
        }
        self.fft.process(&mut self.buf);
        self.buf.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Scale turning a one-sided bin sum of |X_k|^2 into mean-square power of
    /// the windowed frame.
    pub fn one_sided_scale(&self) -> f64 {
        2.0 / (self.nfft as f64 * self.window_energy)
    }
}
