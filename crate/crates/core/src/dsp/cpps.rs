use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::corpus::AudioBuffer;

use super::{AnalysisConfig, FrameTrack, Framing, Spectrum};

const TIME_SMOOTHING_FRAMES: usize = 7;
const QUEFRENCY_SMOOTHING_BINS: usize = 11;
/// Log spectra are limited to this range below the frame's strongest bin.
const DYNAMIC_RANGE_DB: f64 = 120.0;
/// The regression trend starts at 1 ms quefrency.
const TREND_START_S: f64 = 0.001;

/// Smoothed cepstral peak prominence per frame, in dB.
///
/// Each frame's power cepstrum (in dB) is the inverse FFT of its dB power
/// spectrum, squared and converted back to dB. Cepstra are averaged over
/// 7 frames in time and then 11 bins in quefrency. The peak is taken in
/// `[1/ceiling, 1/floor]` and its height is measured above a least-squares
/// line fitted from 1 ms up to half the FFT length. Frames without energy
/// are masked and report 0.
pub fn compute_cpps(audio: &AudioBuffer, cfg: &AnalysisConfig) -> FrameTrack {
    let framing = Framing::new(audio, cfg);
    let mut spectrum = Spectrum::new(framing.len);
    let nfft = spectrum.nfft;
    let half = nfft / 2;
    let ifft = FftPlanner::new().plan_fft_inverse(nfft);
    let mut buf = vec![Complex::<f64>::default(); nfft];

    let mut cepstra: Vec<Option<Vec<f64>>> = Vec::with_capacity(framing.count);
    for k in 0..framing.count {
        let power = spectrum.power(&framing.frame(&audio.samples, k));
        let peak = power.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            cepstra.push(None);
            continue;
        }
        let floor = peak * 10f64.powf(-DYNAMIC_RANGE_DB / 10.0);
        for (b, p) in buf.iter_mut().zip(&power) {
            *b = Complex::new(10.0 * p.max(floor).log10(), 0.0);
        }
        ifft.process(&mut buf);
        let ceps: Vec<f64> = buf[..=half]
            .iter()
            .map(|c| {
                let v = c.re / nfft as f64;
                10.0 * (v * v).max(1e-30).log10()
            })
            .collect();
        cepstra.push(Some(ceps));
    }

    let time_smoothed = smooth_in_time(&cepstra, half + 1);

    let sr = framing.sample_rate;
    let q_lo = ((sr / cfg.pitch_ceiling_hz).ceil() as usize).clamp(1, half);
    let q_hi = ((sr / cfg.pitch_floor_hz).floor() as usize).clamp(q_lo, half);
    let trend_lo = ((TREND_START_S * sr).round() as usize).clamp(1, half - 1);

    let mut values = Vec::with_capacity(framing.count);
    let mut valid = Vec::with_capacity(framing.count);
    for ceps in &time_smoothed {
        match ceps {
            Some(c) => {
                let smooth = moving_average(c, QUEFRENCY_SMOOTHING_BINS);
                values.push(prominence(&smooth, q_lo, q_hi, trend_lo, half));
                valid.push(true);
            }
            None => {
                values.push(0.0);
                valid.push(false);
            }
        }
    }

    FrameTrack {
        values,
        frame_times_s: framing.times(),
        voiced_mask: valid,
    }
}

/// Centered average over up to 7 frames, skipping frames without a cepstrum.
fn smooth_in_time(cepstra: &[Option<Vec<f64>>], width: usize) -> Vec<Option<Vec<f64>>> {
    let radius = TIME_SMOOTHING_FRAMES / 2;
    (0..cepstra.len())
        .map(|i| {
            cepstra[i].as_ref()?;
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(cepstra.len() - 1);
            let mut acc = vec![0.0; width];
            let mut n = 0usize;
            for c in cepstra[lo..=hi].iter().flatten() {
                for (a, v) in acc.iter_mut().zip(c) {
                    *a += v;
                }
                n += 1;
            }
            acc.iter_mut().for_each(|a| *a /= n as f64);
            Some(acc)
        })
        .collect()
}

/// Centered moving average with the window shrunk at the edges.
fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let radius = width / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn prominence(c: &[f64], q_lo: usize, q_hi: usize, trend_lo: usize, trend_hi: usize) -> f64 {
    let (q_peak, peak) = (q_lo..=q_hi)
        .map(|q| (q, c[q]))
        .fold((q_lo, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });

    let n = (trend_hi - trend_lo + 1) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (q, &y) in c.iter().enumerate().take(trend_hi + 1).skip(trend_lo) {
        let x = q as f64;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    peak - (intercept + slope * q_peak as f64)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::super::testsig;
    use super::*;

    fn mean_valid(t: &FrameTrack) -> f64 {
        let v: Vec<f64> = t
            .values
            .iter()
            .zip(&t.voiced_mask)
            .filter(|(_, m)| **m)
            .map(|(x, _)| *x)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn pulse_train_beats_noise_by_five_db() {
        let cfg = AnalysisConfig::default();
        let pulses = compute_cpps(&testsig::pulse_train(150.0, 0.9, 16000, 1.0), &cfg);
        let noise = compute_cpps(&testsig::noise(0.3, 16000, 1.0, 3), &cfg);
        let (p, n) = (mean_valid(&pulses), mean_valid(&noise));
        assert!(p - n >= 5.0, "pulses {p} noise {n}");
    }

    #[test]
    fn sine_beats_modulated_noise_at_equal_rms() {
        let cfg = AnalysisConfig::default();
        let sine = testsig::sine(220.0, 0.5, 16000, 1.0);
        let rms = |s: &[f64]| (s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut am: Vec<f64> = (0..16000)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * (1.0 + 0.8 * (2.0 * std::f64::consts::PI * 4.0 * i as f64 / 16000.0).sin())
            })
            .collect();
        let g = rms(&sine.samples) / rms(&am);
        am.iter_mut().for_each(|x| *x *= g);
        let am = AudioBuffer::new(am, 16000).unwrap();
        assert!(mean_valid(&compute_cpps(&sine, &cfg)) > mean_valid(&compute_cpps(&am, &cfg)));
    }

    #[test]
    fn silence_is_masked_zero() {
        let t = compute_cpps(&testsig::silence(16000, 0.3), &AnalysisConfig::default());
        assert!(t.voiced_mask.iter().all(|v| !v));
        assert!(t.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gain_leaves_cpps_unchanged() {
        let cfg = AnalysisConfig::default();
        let a = testsig::harmonic(140.0, 0.5, 16000, 0.4);
        let mut b = a.clone();
        b.samples.iter_mut().for_each(|s| *s *= 0.2);
        let (ta, tb) = (compute_cpps(&a, &cfg), compute_cpps(&b, &cfg));
        for (x, y) in ta.values.iter().zip(&tb.values) {
            assert!((x - y).abs() < 0.1, "{x} {y}");
        }
    }

    #[test]
    fn moving_average_shrinks_at_edges() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 3), vec![1.5, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn prominence_of_spike_on_a_line() {
        let mut c: Vec<f64> = (0..100).map(|q| 10.0 - 0.05 * q as f64).collect();
        c[40] += 7.0;
        let p = prominence(&c, 30, 60, 5, 99);
        // The spike slightly lifts the fitted line, so the prominence is a bit under 7.
        assert!(p > 6.8 && p <= 7.0, "{p}");
    }
}
