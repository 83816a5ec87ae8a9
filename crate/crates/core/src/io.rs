//! WAV and CSV output.
//!
//! Files are encoded in memory and written through a temporary sibling that
//! is renamed into place, so a failed write never leaves a partial file.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::analysis::MeasuredSpectrum;
use crate::error::{Error, Result};
use crate::predict::LineSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    /// 16-bit signed PCM, format tag 1.
    #[default]
    Pcm16,
    /// 32-bit IEEE float, format tag 3.
    Float32,
}

impl SampleFormat {
    fn tag(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 1,
            SampleFormat::Float32 => 3,
        }
    }

    fn bytes_per_sample(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 2,
            SampleFormat::Float32 => 4,
        }
    }
}

/// Mono WAV stream description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavSpec {
    pub sample_rate: u32,
    pub format: SampleFormat,
}

impl WavSpec {
    pub fn new(sample_rate: u32, format: SampleFormat) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("WAV sample rate must be positive"));
        }
        Ok(Self { sample_rate, format })
    }
}

/// Encoded file plus the number of samples clipped to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedWav {
    pub bytes: Vec<u8>,
    pub clipped: usize,
}

/// Encodes a canonical 44-byte-header mono WAV file.
///
/// PCM samples are clipped to `[-1, 1]` and rounded to the nearest step of
/// `1/32767`. Float samples are stored as `f32` without clipping.
pub fn encode_wav(samples: &[f64], spec: WavSpec) -> Result<EncodedWav> {
    if spec.sample_rate == 0 {
        return Err(Error::invalid("WAV sample rate must be positive"));
    }
    let bps = spec.format.bytes_per_sample();
    let data_len = samples
        .len()
        .checked_mul(bps as usize)
        .and_then(|n| u32::try_from(n).ok())
        .filter(|n| *n <= u32::MAX - 36)
        .ok_or_else(|| Error::invalid("too many samples for a WAV file"))?;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&spec.format.tag().to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&spec.sample_rate.to_le_bytes());
    out.extend_from_slice(&(spec.sample_rate * bps as u32).to_le_bytes());
    out.extend_from_slice(&bps.to_le_bytes());
    out.extend_from_slice(&(8 * bps).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());

    let mut clipped = 0;
    match spec.format {
        SampleFormat::Pcm16 => {
            for &s in samples {
                if !(-1.0..=1.0).contains(&s) {
                    clipped += 1;
                }
                let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        SampleFormat::Float32 => {
            for &s in samples {
                out.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
    }
    Ok(EncodedWav { bytes: out, clipped })
}

/// Writes a mono WAV file and returns the number of clipped samples.
pub fn write_wav(path: &Path, samples: &[f64], spec: WavSpec) -> Result<usize> {
    let wav = encode_wav(samples, spec)?;
    write_atomic(path, &wav.bytes)?;
    Ok(wav.clipped)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::Io(e));
    }
    Ok(())
}

/// Anything that can be listed as `(freq_hz, amplitude)` rows.
pub trait SpectrumRows {
    fn rows(&self) -> Vec<(f64, f64)>;
}

/// Magnitudes per bin.
impl SpectrumRows for MeasuredSpectrum {
    fn rows(&self) -> Vec<(f64, f64)> {
        self.bins.iter().map(|b| (b.freq_hz, b.magnitude)).collect()
    }
}

/// Signed line amplitudes.
impl SpectrumRows for LineSpectrum {
    fn rows(&self) -> Vec<(f64, f64)> {
        self.lines.iter().map(|l| (l.freq_hz, l.amplitude)).collect()
    }
}

/// Formats `v` with 9 significant digits, `%.9g` style.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let body = if (-5..9).contains(&exp) {
        let s = if exp >= 0 {
            let (int, frac) = digits.split_at(exp as usize + 1);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        };
        trim_fraction(&s)
    } else {
        let (lead, rest) = digits.split_at(1);
        format!("{}e{exp:+03}", trim_fraction(&format!("{lead}.{rest}")))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// CSV text with header `freq_hz,amplitude`.
pub fn spectrum_csv(spec: &impl SpectrumRows) -> String {
    let mut out = String::from("freq_hz,amplitude\n");
    for (f, a) in spec.rows() {
        out.push_str(&format_sig9(f));
        out.push(',');
        out.push_str(&format_sig9(a));
        out.push('\n');
    }
    out
}

pub fn write_spectrum_csv(path: &Path, spec: &impl SpectrumRows) -> Result<()> {
    write_atomic(path, spectrum_csv(spec).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::Line;

    #[test]
    fn pcm16_sizes_and_full_scale() {
        let spec = WavSpec::new(48000, SampleFormat::Pcm16).unwrap();
        let wav = encode_wav(&vec![0.0; 48000], spec).unwrap();
        assert_eq!(wav.bytes.len(), 44 + 96000);
        assert_eq!(&wav.bytes[20..22], &1u16.to_le_bytes());
        let wav = encode_wav(&[1.0, -1.0, 0.5, 1.5, -2.0], spec).unwrap();
        let vals: Vec<i16> = wav.bytes[44..].chunks(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
        assert_eq!(vals, vec![32767, -32767, 16384, 32767, -32767]);
        assert_eq!(wav.clipped, 2);
    }

    #[test]
    fn float_header() {
        let spec = WavSpec::new(96000, SampleFormat::Float32).unwrap();
        let wav = encode_wav(&[0.25, -3.0], spec).unwrap();
        assert_eq!(wav.bytes.len(), 44 + 8);
        assert_eq!(&wav.bytes[20..22], &3u16.to_le_bytes());
        assert_eq!(&wav.bytes[34..36], &32u16.to_le_bytes());
        assert_eq!(f32::from_le_bytes(wav.bytes[48..52].try_into().unwrap()), -3.0);
        assert_eq!(wav.clipped, 0);
        assert!(WavSpec::new(0, SampleFormat::Float32).is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(500.0), "500");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-0.1), "-0.1");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(0.223_890_779_141_235_7), "0.223890779");
        assert_eq!(format_sig9(31.25), "31.25");
        assert_eq!(format_sig9(123_456_789.0), "123456789");
        assert_eq!(format_sig9(1_234_567_891.0), "1.23456789e+09");
        assert_eq!(format_sig9(1.5e-7), "1.5e-07");
        assert_eq!(format_sig9(0.000_012_345_678_91), "0.0000123456789");
        assert_eq!(format_sig9(0.999_999_999_9), "1");
    }

    #[test]
    fn csv_layout() {
        let one = LineSpectrum { lines: vec![Line { freq_hz: 500.0, amplitude: 1.0 }] };
        assert_eq!(spectrum_csv(&one), "freq_hz,amplitude\n500,1\n");
        assert_eq!(spectrum_csv(&LineSpectrum::default()), "freq_hz,amplitude\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_spectrum_csv(Path::new("/nonexistent-dir/x.csv"), &LineSpectrum::default()).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
