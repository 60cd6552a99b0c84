use crate::corpus::AudioBuffer;

use super::{AnalysisConfig, FrameTrack, Framing, Spectrum};

/// Lowest sample rate at which the 1-5 kHz band is fully representable.
pub const ALPHA_RATIO_MIN_RATE_HZ: u32 = 10_000;

#[derive(Debug, Clone, Copy)]
struct Band {
    lo_hz: f64,
    hi_hz: f64,
}

const ALPHA_HIGH: Band = Band { lo_hz: 1000.0, hi_hz: 5000.0 };
const ALPHA_LOW: Band = Band { lo_hz: 50.0, hi_hz: 1000.0 };
const L1: Band = Band { lo_hz: 300.0, hi_hz: 800.0 };
const L0: Band = Band { lo_hz: 0.0, hi_hz: 300.0 };

/// Alpha ratio and L1-L0 per frame, both as level differences in dB.
///
/// Band energies are summed over FFT bins whose frequency lies in the
/// half-open band `[lo, hi)`. Each band level is floored at
/// `spectral_floor_db`, so a silent frame yields 0 dB. Below
/// [`ALPHA_RATIO_MIN_RATE_HZ`] the alpha-ratio track is entirely masked.
pub fn spectral_band_measures(audio: &AudioBuffer, cfg: &AnalysisConfig) -> (FrameTrack, FrameTrack) {
    let framing = Framing::new(audio, cfg);
    let mut spectrum = Spectrum::new(framing.len);
    let scale = spectrum.one_sided_scale();
    let bin_hz = framing.sample_rate / spectrum.nfft as f64;
    let half = spectrum.nfft / 2;

    let level = |power: &[f64], band: Band| -> f64 {
        let first = (band.lo_hz / bin_hz).ceil() as usize;
        let mut energy = 0.0;
        let mut k = first;
        while k <= half && (k as f64) * bin_hz < band.hi_hz {
            energy += power[k];
            k += 1;
        }
        let e = energy * scale;
        if e > 0.0 {
            (10.0 * e.log10()).max(cfg.spectral_floor_db)
        } else {
            cfg.spectral_floor_db
        }
    };

    let alpha_ok = audio.sample_rate_hz >= ALPHA_RATIO_MIN_RATE_HZ;
    let mut alpha = Vec::with_capacity(framing.count);
    let mut l1l0 = Vec::with_capacity(framing.count);
    for k in 0..framing.count {
        let power = spectrum.power(&framing.frame(&audio.samples, k));
        alpha.push(if alpha_ok {
            level(&power, ALPHA_HIGH) - level(&power, ALPHA_LOW)
        } else {
            0.0
        });
        l1l0.push(level(&power, L1) - level(&power, L0));
    }

    let times = framing.times();
    (
        FrameTrack {
            voiced_mask: vec![alpha_ok; alpha.len()],
            values: alpha,
            frame_times_s: times.clone(),
        },
        FrameTrack {
            voiced_mask: vec![true; l1l0.len()],
            values: l1l0,
            frame_times_s: times,
        },
    )
}
