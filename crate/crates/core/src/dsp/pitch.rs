use crate::corpus::AudioBuffer;

use super::{AnalysisConfig, FrameTrack, Framing};

/// Per-frame F0 from the normalized autocorrelation.
///
/// Candidate lags are local maxima of the normalized cross-correlation
/// between the frame's head and its lagged tail, refined by parabolic
/// interpolation. Among candidates the one with the best
/// `r - octave_cost * log2(floor * lag)` wins; it is voiced when its refined
/// correlation reaches `voicing_threshold` and its frequency lies inside
/// [floor, ceiling]. Unvoiced frames carry 0.
pub fn estimate_f0(audio: &AudioBuffer, cfg: &AnalysisConfig) -> FrameTrack {
    let framing = Framing::new(audio, cfg);
    let sr = framing.sample_rate;
    let min_lag = ((sr / cfg.pitch_ceiling_hz).floor() as usize).max(2);
    let max_lag = ((sr / cfg.pitch_floor_hz).ceil() as usize).min(framing.len.saturating_sub(2));

    let mut values = Vec::with_capacity(framing.count);
    let mut voiced = Vec::with_capacity(framing.count);
    let mut scratch = Vec::with_capacity(framing.len);
    for k in 0..framing.count {
        let frame = framing.frame(&audio.samples, k);
        let f0 = if min_lag + 1 < max_lag {
            frame_f0(&frame, min_lag, max_lag, sr, cfg, &mut scratch)
        } else {
            None
        };
        values.push(f0.unwrap_or(0.0));
        voiced.push(f0.is_some());
    }
    FrameTrack {
        values,
        frame_times_s: framing.times(),
        voiced_mask: voiced,
    }
}

fn frame_f0(
    frame: &[f64],
    min_lag: usize,
    max_lag: usize,
    sr: f64,
    cfg: &AnalysisConfig,
    x: &mut Vec<f64>,
) -> Option<f64> {
    let n = frame.len();
    let mean = frame.iter().sum::<f64>() / n as f64;
    x.clear();
    x.extend(frame.iter().map(|v| v - mean));

    // prefix[i] = sum of x[..i]^2
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x.iter() {
        prefix.push(prefix.last().unwrap() + v * v);
    }
    if prefix[n] <= 0.0 {
        return None;
    }

    // r[j] holds the correlation at lag min_lag - 1 + j.
    let lo = min_lag - 1;
    let hi = max_lag + 1;
    let r: Vec<f64> = (lo..=hi)
        .map(|lag| {
            let m = n - lag;
            let num: f64 = x[..m].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            let e_head = prefix[m];
            let e_tail = prefix[n] - prefix[lag];
            let denom = (e_head * e_tail).sqrt();
            if denom > 0.0 {
                num / denom
            } else {
                0.0
            }
        })
        .collect();

    let mut best: Option<(f64, f64, f64)> = None; // (score, lag, strength)
    for j in 1..r.len() - 1 {
        let (prev, cur, next) = (r[j - 1], r[j], r[j + 1]);
        if cur <= 0.0 || cur < prev || cur <= next {
            continue;
        }
        let curvature = prev - 2.0 * cur + next;
        let (delta, strength) = if curvature < 0.0 {
            let d = 0.5 * (prev - next) / curvature;
            (d, cur - 0.25 * (prev - next) * d)
        } else {
            (0.0, cur)
        };
        let lag = (lo + j) as f64 + delta;
        let score = strength - cfg.octave_cost * (cfg.pitch_floor_hz * lag / sr).log2();
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, lag, strength));
        }
    }

    let (_, lag, strength) = best?;
    let f0 = sr / lag;
    (strength >= cfg.voicing_threshold && f0 >= cfg.pitch_floor_hz && f0 <= cfg.pitch_ceiling_hz)
        .then_some(f0)
}
