//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use hofm_core::analysis::{self, AnalysisFrame, MeasuredSpectrum, Window};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fixed-point scale of the exact series, in bits.
const SCALE_BITS: u32 = 256;

/// `J_n(z)` for dyadic `z = num / 2^den_log2`, summed exactly in 256-bit fixed point.
///
/// Each term is an exact rational over a power of two, so the only
/// error is one truncation per term; cancellation costs nothing.
pub fn bessel_series(n: i64, num: i64, den_log2: u32) -> f64 {
    let order = n.unsigned_abs();
    let sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if num == 0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    // (z/2)^m = num^m / 2^((den_log2 + 1) m)
    let p = BigInt::from(num);
    let shift = den_log2 + 1;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut k_fact = BigInt::one();
    let mut kn_fact: BigInt = (1..=order).map(BigInt::from).product();
    loop {
        let m = (2 * k + order) as u32;
        let numer = p.pow(m) << SCALE_BITS;
        let denom = (&k_fact * &kn_fact) << (shift as u64 * m as u64);
        let term = numer / denom;
        if term.is_zero() && k as f64 > (num.unsigned_abs() as f64) / 2f64.powi(den_log2 as i32) {
            break;
        }
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        k += 1;
        k_fact *= BigInt::from(k);
        kn_fact *= BigInt::from(k + order);
    }
    sign * fixed_to_f64(&sum)
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    let neg = v.is_negative();
    let mag = v.abs();
    let bits = mag.bits();
    let drop = bits.saturating_sub(64);
    let top = (mag >> drop).to_f64().expect("fits");
    let r = top * 2f64.powi(drop as i32 - SCALE_BITS as i32);
    if neg {
        -r
    } else {
        r
    }
}

/// Naive O(N^2) DFT magnitudes with the same one-sided scaling as the
/// library: `2|X_k| / sum(w)`, halved at DC and Nyquist.
pub fn naive_dft_magnitudes(x: &[f64], window: Window) -> Vec<f64> {
    let n = x.len();
    let w: Vec<f64> = (0..n)
        .map(|i| match window {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos(),
        })
        .collect();
    let gain: f64 = w.iter().sum();
    let cos: Vec<f64> = (0..n).map(|i| (TAU * i as f64 / n as f64).cos()).collect();
    let sin: Vec<f64> = (0..n).map(|i| (TAU * i as f64 / n as f64).sin()).collect();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..n {
                let j = (k * i) % n;
                let v = x[i] * w[i];
                re += v * cos[j];
                im -= v * sin[j];
            }
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            let scale = if edge { 1.0 } else { 2.0 };
            scale * re.hypot(im) / gain
        })
        .collect()
}

/// Whole-period frame measured with a rectangular window.
pub fn bin_centred(x: &[f64], sr: f64, fundamental: f64, periods: usize) -> MeasuredSpectrum {
    let p = analysis::period_samples(sr, fundamental).expect("fundamental divides sample rate");
    let frame = AnalysisFrame::bin_centered(x[..p * periods].to_vec(), sr, fundamental).unwrap();
    analysis::measure_spectrum(&frame, Window::Rectangular).unwrap()
}

/// Last whole periods of `x` (past transients), rectangular window.
pub fn tail_spectrum(x: &[f64], sr: f64, fundamental: f64, periods: usize) -> MeasuredSpectrum {
    let frame = AnalysisFrame::tail(x, sr, fundamental, Some(periods)).unwrap();
    analysis::measure_spectrum(&frame, Window::Rectangular).unwrap()
}

/// Hann spectrum of all whole periods of `x`.
pub fn hann_spectrum(x: &[f64], sr: f64, fundamental: f64) -> MeasuredSpectrum {
    let frame = AnalysisFrame::tail(x, sr, fundamental, None).unwrap();
    analysis::measure_spectrum(&frame, Window::Hann).unwrap()
}

/// `cos(2π f n / fs)` with time computed per sample.
pub fn ideal_cosine(f: f64, fs: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (TAU * f * (i as f64 / fs)).cos()).collect()
}

