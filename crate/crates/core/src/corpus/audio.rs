use std::io::Cursor;

use crate::error::{Error, Result};

pub const MIN_SAMPLE_RATE_HZ: u32 = 8000;

/// Mono audio with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Audio("audio has no samples".into()));
        }
        if sample_rate_hz == 0 {
            return Err(Error::Audio("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Encodes as 16-bit PCM mono WAV, clipping to full scale.
    pub fn to_wav_pcm16(&self) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate_hz,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        {
            let mut writer = hound::WavWriter::new(&mut cursor, spec).expect("in-memory writer");
            for &s in &self.samples {
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q).expect("in-memory write");
            }
            writer.finalize().expect("in-memory finalize");
        }
        cursor.into_inner()
    }
}

/// Decodes a mono WAV file holding 16-bit PCM or 32-bit float samples.
pub fn read_audio(bytes: &[u8]) -> Result<AudioBuffer> {
    let reader = hound::WavReader::new(Cursor::new(bytes))
        .map_err(|e| Error::Audio(format!("invalid WAV: {e}")))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Audio(format!(
            "mono required, file has {} channels",
            spec.channels
        )));
    }
    if spec.sample_rate < MIN_SAMPLE_RATE_HZ {
        return Err(Error::Audio(format!(
            "sample rate {} Hz is below the {MIN_SAMPLE_RATE_HZ} Hz minimum",
            spec.sample_rate
        )));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(Error::Audio(format!(
                "unsupported sample format {format:?} with {bits} bits (PCM16 or float32 required)"
            )))
        }
    }
    .map_err(|e| Error::Audio(format!("truncated or corrupt sample data: {e}")))?;
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Audio("non-finite sample values".into()));
    }
    AudioBuffer::new(samples, spec.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav(channels: u16, rate: u32, bits: u16, format: hound::SampleFormat, n: usize) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: bits,
            sample_format: format,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        for i in 0..n * channels as usize {
            match format {
                hound::SampleFormat::Int => w.write_sample((i % 100) as i32).unwrap(),
                hound::SampleFormat::Float => w.write_sample(0.25f32).unwrap(),
            }
        }
        w.finalize().unwrap();
        cursor.into_inner()
    }

    #[test]
    fn pcm16_scaling() {
        let buf = AudioBuffer {
            samples: vec![0.0, 0.5, -1.0],
            sample_rate_hz: 16000,
        };
        let decoded = read_audio(&buf.to_wav_pcm16()).unwrap();
        assert_eq!(decoded.samples, vec![0.0, 0.5, -1.0]);
        assert_eq!(decoded.sample_rate_hz, 16000);
    }

    #[test]
    fn stereo_is_rejected() {
        let err = read_audio(&wav(2, 16000, 16, hound::SampleFormat::Int, 10)).unwrap_err();
        assert!(err.to_string().contains("mono required"), "{err}");
    }

    #[test]
    fn one_second_at_16k() {
        let a = read_audio(&wav(1, 16000, 16, hound::SampleFormat::Int, 16000)).unwrap();
        assert_eq!(a.samples.len(), 16000);
        assert!((a.duration_s() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn float32_is_accepted() {
        let a = read_audio(&wav(1, 22050, 32, hound::SampleFormat::Float, 5)).unwrap();
        assert_eq!(a.samples, vec![0.25; 5]);
    }

    #[test]
    fn other_bit_depths_are_rejected() {
        assert!(read_audio(&wav(1, 16000, 24, hound::SampleFormat::Int, 5)).is_err());
        assert!(read_audio(&wav(1, 16000, 8, hound::SampleFormat::Int, 5)).is_err());
    }

    #[test]
    fn low_sample_rate_is_rejected() {
        assert!(read_audio(&wav(1, 4000, 16, hound::SampleFormat::Int, 5)).is_err());
    }

    #[test]
    fn compressed_codec_is_rejected() {
        // Same header with the format tag switched to 0x0055 (MPEG layer 3).
        let mut bytes = wav(1, 16000, 16, hound::SampleFormat::Int, 5);
        bytes[20] = 0x55;
        bytes[21] = 0x00;
        assert!(read_audio(&bytes).is_err());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(read_audio(b"not a wav file at all").is_err());
        assert!(read_audio(&[]).is_err());
    }

    #[test]
    fn empty_data_is_rejected() {
        assert!(read_audio(&wav(1, 16000, 16, hound::SampleFormat::Int, 0)).is_err());
    }
}
