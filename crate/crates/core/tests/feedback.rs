mod common;

use common::tail_spectrum;
use hofm_core::analysis::{self, AnalysisFrame};
use hofm_core::operator::{self, RenderConfig};
use hofm_core::pm;
use hofm_core::Error;

const FS: f64 = 96000.0;
const PERIOD: usize = 192;

fn feedback_fm(gain: f64, periods: usize) -> Vec<f64> {
    operator::render_feedback_fm(&RenderConfig::new(FS).unwrap(), 1.0, 500.0, gain, PERIOD * periods).unwrap().audio
}

fn dc(x: &[f64]) -> f64 {
    analysis::measure_dc(&AnalysisFrame::tail(x, FS, 500.0, Some(16)).unwrap())
}

fn harmonics(x: &[f64], range: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    let spec = tail_spectrum(x, FS, 500.0, 16);
    range.map(|k| spec.magnitude_at(500.0 * k as f64)).collect()
}

#[test]
fn feedback_fm_has_strong_dc() {
    let x = feedback_fm(1.0, 48);
    let d = dc(&x);
    assert!(d.abs() > 0.05, "{d}");
    let spec = tail_spectrum(&x, FS, 500.0, 16);
    assert!((spec.bins[0].magnitude - d.abs()).abs() < 1e-12);
}

/// Fundamental and harmonic peaks of a long Hann frame past the transient.
fn measured_envelope(x: &[f64], fs: f64, count: usize) -> (f64, Vec<f64>) {
    let frame = AnalysisFrame::unaligned(x[x.len() / 4..].to_vec(), fs).unwrap();
    let spec = analysis::measure_spectrum(&frame, analysis::Window::Hann).unwrap();
    let f0 = analysis::harmonic_peaks(&spec, 500.0, 1..=1, 50.0).unwrap()[0].freq_hz;
    let peaks = analysis::harmonic_peaks(&spec, f0, 1..=count, 0.02 * f0).unwrap();
    (f0, peaks.iter().map(|p| p.magnitude).collect())
}

#[test]
fn feedback_fm_envelope_decays() {
    let (_, h) = measured_envelope(&feedback_fm(1.0, 500), FS, 10);
    assert_eq!(h.len(), 10);
    for (k, w) in h.windows(2).enumerate() {
        assert!(w[1] < w[0], "harmonic {} ({}) >= harmonic {} ({})", k + 2, w[1], k + 1, w[0]);
    }
}

#[test]
fn feedback_fm_pitch_offset_shrinks_with_sample_rate() {
    let f0 = |fs: f64| {
        let x = operator::render_feedback_fm(&RenderConfig::new(fs).unwrap(), 1.0, 500.0, 1.0, fs as usize).unwrap().audio;
        measured_envelope(&x, fs, 1).0
    };
    let (a, b, c) = (f0(48000.0), f0(96000.0), f0(192000.0));
    assert!(a > b && b > c && c > 500.0, "{a} {b} {c}");
}

#[test]
fn feedback_pm_dc_is_smaller() {
    let fm = dc(&feedback_fm(1.0, 48));
    let pmx = pm::render_feedback_pm(1.0, 500.0, 1.0, FS, PERIOD * 48);
    assert!(dc(&pmx).abs() < fm.abs());
}

#[test]
fn feedback_pm_slope_near_inverse_frequency() {
    let x = pm::render_feedback_pm(1.0, 500.0, 1.0, FS, PERIOD * 48);
    let spec = tail_spectrum(&x, FS, 500.0, 16);
    let slope = analysis::fit_spectral_slope(&spec, 500.0, 1..=10).unwrap();
    assert!((-9.0..=-3.0).contains(&slope), "{slope} dB/oct");
    let h = harmonics(&x, 2..=10);
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
}

#[test]
fn gain_widens_the_spectrum() {
    let weak = harmonics(&feedback_fm(0.3, 48), 2..=6);
    let strong = harmonics(&feedback_fm(1.0, 48), 2..=6);
    for (w, s) in weak.iter().zip(&strong) {
        assert!(s > w);
    }
}

#[test]
fn runaway_feedback_reports_instability() {
    let err = operator::render_feedback_fm(&RenderConfig::new(FS).unwrap(), 1.0, 500.0, 80.0, 4800).unwrap_err();
    assert!(matches!(err, Error::Instability { .. }), "{err}");
}

#[test]
fn output_is_deterministic() {
    assert_eq!(feedback_fm(1.0, 20), feedback_fm(1.0, 20));
}
