//! Spectral measurement of rendered signals.
//!
//! Frames are preferably *bin-centred*: an integer number of periods of a
//! known fundamental, so every harmonic falls exactly on a DFT bin and a
//! rectangular window measures it without leakage. Signals whose partials
//! are off the grid by construction (naive FM) are measured with a Hann
//! window instead.
//!
//! Magnitudes are calibrated so that a full-scale cosine on a bin reads 1.0;
//! levels in dB are therefore dBFS.

use std::ops::RangeInclusive;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Minimum number of fundamental periods in a bin-centred frame.
pub const MIN_PERIODS: usize = 16;

/// Peaks more than this far below the strongest one are ignored by drift detection.
pub const PEAK_THRESHOLD_DB: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

/// Samples to analyse, optionally tied to a fundamental grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisFrame {
    samples: Vec<f64>,
    sample_rate: f64,
    fundamental_hz: Option<f64>,
}

/// Samples per period if `sample_rate / fundamental_hz` is an integer.
pub fn period_samples(sample_rate: f64, fundamental_hz: f64) -> Option<usize> {
    if !(fundamental_hz > 0.0) || !(sample_rate > 0.0) {
        return None;
    }
    let ratio = sample_rate / fundamental_hz;
    let p = ratio.round();
    ((ratio - p).abs() <= 1e-9 * ratio && p >= 2.0).then_some(p as usize)
}

impl AnalysisFrame {
    /// A frame of whole periods of `fundamental_hz`, at least [`MIN_PERIODS`] long.
    pub fn bin_centered(samples: Vec<f64>, sample_rate: f64, fundamental_hz: f64) -> Result<Self> {
        let p = period_samples(sample_rate, fundamental_hz).ok_or_else(|| {
            Error::invalid(format!(
                "{fundamental_hz} Hz does not divide the sample rate {sample_rate} Hz into whole samples"
            ))
        })?;
        if !samples.len().is_multiple_of(p) || samples.len() / p < MIN_PERIODS {
            return Err(Error::invalid(format!(
                "frame of {} samples is not a whole number (>= {MIN_PERIODS}) of {p}-sample periods",
                samples.len()
            )));
        }
        Ok(Self { samples, sample_rate, fundamental_hz: Some(fundamental_hz) })
    }

    /// The last whole periods of `signal`: all of them, or at most `max_periods`.
    pub fn tail(signal: &[f64], sample_rate: f64, fundamental_hz: f64, max_periods: Option<usize>) -> Result<Self> {
        let p = period_samples(sample_rate, fundamental_hz).ok_or_else(|| {
            Error::invalid(format!(
                "{fundamental_hz} Hz does not divide the sample rate {sample_rate} Hz into whole samples"
            ))
        })?;
        let mut periods = signal.len() / p;
        if let Some(max) = max_periods {
            periods = periods.min(max);
        }
        let start = signal.len() - periods * p;
        Self::bin_centered(signal[start..].to_vec(), sample_rate, fundamental_hz)
    }

    /// The first `periods` whole periods of `signal`.
    pub fn head(signal: &[f64], sample_rate: f64, fundamental_hz: f64, periods: usize) -> Result<Self> {
        let p = period_samples(sample_rate, fundamental_hz).ok_or_else(|| {
            Error::invalid(format!(
                "{fundamental_hz} Hz does not divide the sample rate {sample_rate} Hz into whole samples"
            ))
        })?;
        let len = (periods * p).min(signal.len() / p * p);
        Self::bin_centered(signal[..len].to_vec(), sample_rate, fundamental_hz)
    }

    /// A frame with no grid; only the Hann window applies.
    pub fn unaligned(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::invalid("frame needs at least 4 samples"));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        Ok(Self { samples, sample_rate, fundamental_hz: None })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn fundamental_hz(&self) -> Option<f64> {
        self.fundamental_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBin {
    pub freq_hz: f64,
    pub magnitude: f64,
    pub phase: f64,
}

/// One-sided magnitude spectrum, bins `0 ..= N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpectrum {
    pub bins: Vec<SpectrumBin>,
    pub bin_hz: f64,
    pub window: Window,
}

impl MeasuredSpectrum {
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.bins.iter().map(|b| b.magnitude)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes().fold(0.0, f64::max)
    }

    fn nearest_bin(&self, freq_hz: f64) -> Option<usize> {
        let i = (freq_hz / self.bin_hz).round();
        (i >= 0.0 && (i as usize) < self.bins.len()).then_some(i as usize)
    }

    /// Magnitude of the bin nearest to `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        self.nearest_bin(freq_hz).map_or(0.0, |i| self.bins[i].magnitude)
    }

    /// Largest magnitude within one bin of `freq_hz`; tolerates small pitch offsets.
    pub fn peak_near(&self, freq_hz: f64) -> f64 {
        let Some(i) = self.nearest_bin(freq_hz) else { return 0.0 };
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.bins.len() - 1);
        self.bins[lo..=hi].iter().map(|b| b.magnitude).fold(0.0, f64::max)
    }

    /// `(frequency, magnitude)` at every multiple of `fundamental_hz` up to Nyquist, DC included.
    pub fn harmonic_magnitudes(&self, fundamental_hz: f64) -> Vec<(f64, f64)> {
        let nyquist = self.bin_hz * (self.bins.len() - 1) as f64;
        (0..)
            .map(|k| k as f64 * fundamental_hz)
            .take_while(|&f| f <= nyquist + 1e-9)
            .map(|f| (f, self.magnitude_at(f)))
            .collect()
    }
}

fn window_coefficients(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::Rectangular => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
            .collect(),
    }
}

/// DFT magnitude spectrum of `frame`.
///
/// A rectangular window needs a bin-centred frame; Hann accepts any frame.
pub fn measure_spectrum(frame: &AnalysisFrame, window: Window) -> Result<MeasuredSpectrum> {
    if window == Window::Rectangular && frame.fundamental_hz.is_none() {
        return Err(Error::invalid("rectangular analysis needs a bin-centred frame"));
    }
    let n = frame.samples.len();
    let w = window_coefficients(window, n);
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex<f64>> = frame.samples.iter().zip(&w).map(|(&s, &c)| Complex::new(s * c, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let bin_hz = frame.sample_rate / n as f64;
    let bins = buf[..=half]
        .iter()
        .enumerate()
        .map(|(k, x)| {
            // DC and (for even N) Nyquist have no mirror image.
            let scale = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            SpectrumBin { freq_hz: k as f64 * bin_hz, magnitude: scale * x.norm() / gain, phase: x.arg() }
        })
        .collect();
    Ok(MeasuredSpectrum { bins, bin_hz, window })
}

/// Mean of the frame; bin-centred frames always hold whole periods.
pub fn measure_dc(frame: &AnalysisFrame) -> f64 {
    if frame.samples.is_empty() {
        return 0.0;
    }
    frame.samples.iter().sum::<f64>() / frame.samples.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub freq_hz: f64,
    pub magnitude: f64,
    /// Distance to the nearest grid multiple.
    pub offset_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub max_offset_hz: f64,
    pub peaks: Vec<Peak>,
    pub offending: Vec<Peak>,
}

impl DriftReport {
    pub fn within(&self, tolerance_hz: f64) -> bool {
        self.max_offset_hz <= tolerance_hz
    }
}

/// Bin index plus parabolic offset of the peak at bin `i`, in bins.
fn refine_peak(mags: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= mags.len() {
        return i as f64;
    }
    let ln = |m: f64| (m + 1e-300).ln();
    let (a, b, c) = (ln(mags[i - 1]), ln(mags[i]), ln(mags[i + 1]));
    let denom = a - 2.0 * b + c;
    let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    i as f64 + delta
}

/// Finds spectral peaks within 40 dB of the strongest and measures how far
/// each lies from the nearest multiple of `grid_hz`.
///
/// Peak frequencies are refined by a parabola through the log magnitudes of
/// the peak bin and its neighbours.
pub fn detect_carrier_drift(spec: &MeasuredSpectrum, grid_hz: f64, tolerance_hz: f64) -> Result<DriftReport> {
    if !(grid_hz > 0.0) {
        return Err(Error::invalid(format!("grid spacing must be positive, got {grid_hz}")));
    }
    let mags: Vec<f64> = spec.magnitudes().collect();
    let threshold = spec.max_magnitude() * 10f64.powf(PEAK_THRESHOLD_DB / 20.0);
    let mut peaks = Vec::new();
    if threshold > 0.0 {
        for i in 0..mags.len().saturating_sub(1) {
            let m = mags[i];
            let left = if i == 0 { 0.0 } else { mags[i - 1] };
            if m < threshold || m <= left || m < mags[i + 1] {
                continue;
            }
            let freq_hz = refine_peak(&mags, i) * spec.bin_hz;
            let offset_hz = (freq_hz - (freq_hz / grid_hz).round() * grid_hz).abs();
            peaks.push(Peak { freq_hz, magnitude: m, offset_hz });
        }
    }
    let max_offset_hz = peaks.iter().map(|p| p.offset_hz).fold(0.0, f64::max);
    let offending = peaks.iter().copied().filter(|p| p.offset_hz > tolerance_hz).collect();
    Ok(DriftReport { max_offset_hz, peaks, offending })
}

/// Strongest bin within `search_hz` of each harmonic of `fundamental_hz`.
///
/// For signals whose pitch is not known exactly; `offset_hz` is measured
/// from the nominal harmonic.
pub fn harmonic_peaks(
    spec: &MeasuredSpectrum,
    fundamental_hz: f64,
    harmonics: RangeInclusive<usize>,
    search_hz: f64,
) -> Result<Vec<Peak>> {
    if !(fundamental_hz > 0.0) || !(search_hz >= 0.0) {
        return Err(Error::invalid(format!(
            "need a positive fundamental and non-negative search width, got {fundamental_hz} and {search_hz}"
        )));
    }
    let mags: Vec<f64> = spec.magnitudes().collect();
    let last = mags.len() - 1;
    let mut out = Vec::new();
    for k in harmonics {
        let target = k as f64 * fundamental_hz;
        let lo = ((target - search_hz) / spec.bin_hz).ceil().max(0.0) as usize;
        let hi = (((target + search_hz) / spec.bin_hz).floor() as usize).min(last);
        if lo > hi {
            break;
        }
        let i = (lo..=hi).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).expect("non-empty range");
        let freq_hz = refine_peak(&mags, i) * spec.bin_hz;
        out.push(Peak { freq_hz, magnitude: mags[i], offset_hz: (freq_hz - target).abs() });
    }
    Ok(out)
}

/// Least-squares slope of harmonic level against log frequency, in dB per octave.
///
/// A `1/f` envelope gives about -6.02 dB/octave.
pub fn fit_spectral_slope(spec: &MeasuredSpectrum, fundamental_hz: f64, harmonics: RangeInclusive<usize>) -> Result<f64> {
    let points: Vec<(f64, f64)> = harmonics
        .filter(|&k| k > 0)
        .map(|k| k as f64 * fundamental_hz)
        .map(|f| (f, spec.peak_near(f)))
        .filter(|&(_, m)| m > 1e-9)
        .map(|(f, m)| (f.log2(), 20.0 * m.log10()))
        .collect();
    if points.len() < 4 {
        return Err(Error::invalid(format!("slope fit needs >= 4 harmonics above 1e-9, found {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Level in dBFS of a calibrated magnitude.
pub fn level_db(magnitude: f64) -> f64 {
    20.0 * magnitude.max(1e-300).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineComparison {
    pub freq_hz: f64,
    pub level_a_db: f64,
    pub level_b_db: f64,
    /// `|a - b|` after clamping both levels to the floor.
    pub diff_db: f64,
}

/// Compares paired line magnitudes `(freq, a, b)` in dBFS.
///
/// Lines where both sides are below `floor_db` are skipped; otherwise each
/// level is clamped to the floor before differencing, so a partial that sits
/// just under the floor on one side counts only by how far the other side
/// rises above it.
pub fn compare_lines(pairs: &[(f64, f64, f64)], floor_db: f64) -> Vec<LineComparison> {
    pairs
        .iter()
        .filter_map(|&(freq_hz, a, b)| {
            let (la, lb) = (level_db(a), level_db(b));
            if la < floor_db && lb < floor_db {
                return None;
            }
            let diff_db = (la.max(floor_db) - lb.max(floor_db)).abs();
            Some(LineComparison { freq_hz, level_a_db: la, level_b_db: lb, diff_db })
        })
        .collect()
}

pub fn max_difference_db(lines: &[LineComparison]) -> f64 {
    lines.iter().map(|l| l.diff_db).fold(0.0, f64::max)
}

/// Compares two measured spectra at every multiple of `grid_hz`.
pub fn compare_spectra(a: &MeasuredSpectrum, b: &MeasuredSpectrum, grid_hz: f64, floor_db: f64) -> Result<Vec<LineComparison>> {
    if (a.bin_hz - b.bin_hz).abs() > 1e-9 * a.bin_hz || a.bins.len() != b.bins.len() {
        return Err(Error::invalid("spectra were measured on different bin grids"));
    }
    let pairs: Vec<(f64, f64, f64)> = a
        .harmonic_magnitudes(grid_hz)
        .into_iter()
        .map(|(f, ma)| (f, ma, b.magnitude_at(f)))
        .collect();
    Ok(compare_lines(&pairs, floor_db))
}
