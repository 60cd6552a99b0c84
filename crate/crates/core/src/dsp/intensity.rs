use crate::corpus::AudioBuffer;

use super::{hann, AnalysisConfig, FrameTrack, Framing};

/// Hann-weighted mean-square level per frame in dB re full scale, clamped
/// from below at `intensity_floor_db`.
pub fn frame_intensity(audio: &AudioBuffer, cfg: &AnalysisConfig) -> FrameTrack {
    let framing = Framing::new(audio, cfg);
    let window = hann(framing.len);
    let weight: f64 = window.iter().sum();
    let values = (0..framing.count)
        .map(|k| {
            let frame = framing.frame(&audio.samples, k);
            let ms = frame
                .iter()
                .zip(&window)
                .map(|(x, w)| w * x * x)
                .sum::<f64>()
                / weight;
            if ms > 0.0 {
                (10.0 * ms.log10()).max(cfg.intensity_floor_db)
            } else {
                cfg.intensity_floor_db
            }
        })
        .collect::<Vec<_>>();
    FrameTrack {
        voiced_mask: vec![true; values.len()],
        values,
        frame_times_s: framing.times(),
    }
}
