//! Table-lookup oscillator with a 32-bit fixed-point phase accumulator.
//!
//! The phase is an unsigned 32-bit integer whose high bits index the table
//! and whose low bits give the linear interpolation fraction. Overflow of the
//! accumulator is the period wrap. Increments are signed, so a negative
//! instantaneous frequency runs the phase backwards.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Number of distinct phase values, `2^32`.
pub const PHASE_RANGE: f64 = 4_294_967_296.0;

/// Table length used by default: 1024 points plus the guard point.
pub const DEFAULT_TABLE_SIZE: usize = 1025;

/// One period of a waveform followed by a guard point equal to the first sample.
///
/// The guard point lets the interpolator read `table[idx + 1]` for the last
/// index without wrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavetable {
    samples: Vec<f64>,
}

impl Wavetable {
    /// Cosine table of `size = 2^k + 1` points, `k >= 4`.
    pub fn cosine(size: usize) -> Result<Self> {
        let period = period_len(size)?;
        let step = TAU / period as f64;
        let mut samples: Vec<f64> = (0..period).map(|i| (step * i as f64).cos()).collect();
        samples.push(samples[0]);
        Ok(Self { samples })
    }

    /// Builds a table from one period of `2^k` samples, appending the guard point.
    pub fn from_period(period: &[f64]) -> Result<Self> {
        period_len(period.len() + 1)?;
        let mut samples = period.to_vec();
        samples.push(period[0]);
        Ok(Self { samples })
    }

    /// Wraps a full table (guard point included) after checking its invariants.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        period_len(samples.len())?;
        if samples[samples.len() - 1] != samples[0] {
            return Err(Error::invalid("wavetable guard point must equal the first sample"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Total length including the guard point.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length of one period (table length minus the guard point).
    pub fn period(&self) -> usize {
        self.samples.len() - 1
    }
}

impl Default for Wavetable {
    fn default() -> Self {
        Self::cosine(DEFAULT_TABLE_SIZE).expect("default table size is 2^10 + 1")
    }
}

impl std::ops::Index<usize> for Wavetable {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.samples[i]
    }
}

// Returns the period length for a table of `size` points, or an error unless
// size = 2^k + 1 with 4 <= k <= 30.
fn period_len(size: usize) -> Result<usize> {
    let period = size.wrapping_sub(1);
    if size < 2 || !period.is_power_of_two() {
        return Err(Error::invalid(format!("table size {size} is not of the form 2^k + 1")));
    }
    let k = period.trailing_zeros();
    if !(4..=30).contains(&k) {
        return Err(Error::invalid(format!("table size {size} outside 2^4+1 ..= 2^30+1")));
    }
    Ok(period)
}

/// Converts a frequency to a signed 32-bit phase increment.
///
/// The product `freq_hz * 2^32 / sample_rate` is truncated toward zero and
/// reinterpreted in wrapping 32-bit arithmetic, so `-fs/4` becomes `-2^30`.
pub fn freq_to_increment(freq_hz: f64, sample_rate: f64) -> Result<i32> {
    if !(sample_rate > 0.0) {
        return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
    }
    increment_with_factor(freq_hz, sample_rate, PHASE_RANGE / sample_rate)
}

#[inline]
fn increment_with_factor(freq_hz: f64, sample_rate: f64, factor: f64) -> Result<i32> {
    if !(freq_hz.abs() < sample_rate) {
        return Err(Error::OutOfRange { freq_hz, sample_rate });
    }
    Ok((freq_hz * factor).trunc() as i64 as i32)
}

/// Fixed-point phase state of one oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAccumulator {
    phase: u32,
    frac_bits: u32,
    frac_mask: u32,
    frac_scale: f64,
    freq_to_inc: f64,
    sample_rate: f64,
}

impl PhaseAccumulator {
    /// Accumulator for a table of `table_len` points (guard included) at `sample_rate`.
    pub fn new(table_len: usize, sample_rate: f64) -> Result<Self> {
        let period = period_len(table_len)?;
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        let frac_bits = 32 - period.trailing_zeros();
        let frac_mask = (1u32 << frac_bits) - 1;
        Ok(Self {
            phase: 0,
            frac_bits,
            frac_mask,
            frac_scale: 1.0 / (1u64 << frac_bits) as f64,
            freq_to_inc: PHASE_RANGE / sample_rate,
            sample_rate,
        })
    }

    pub fn for_table(table: &Wavetable, sample_rate: f64) -> Result<Self> {
        Self::new(table.len(), sample_rate)
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u32) {
        self.phase = phase;
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn frac_mask(&self) -> u32 {
        self.frac_mask
    }

    pub fn frac_scale(&self) -> f64 {
        self.frac_scale
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Phase increments per Hz, `2^32 / sample_rate`.
    pub fn freq_to_inc(&self) -> f64 {
        self.freq_to_inc
    }

    /// Table index of the current phase.
    pub fn index(&self) -> usize {
        (self.phase >> self.frac_bits) as usize
    }

    /// Interpolation fraction of the current phase, in `[0, 1)`.
    pub fn fraction(&self) -> f64 {
        (self.phase & self.frac_mask) as f64 * self.frac_scale
    }

    pub fn increment(&self, freq_hz: f64) -> Result<i32> {
        increment_with_factor(freq_hz, self.sample_rate, self.freq_to_inc)
    }

    /// Reads the interpolated table value at the current phase, scales it by
    /// `amp` and advances the phase by `increment`.
    #[inline]
    pub fn tick(&mut self, table: &Wavetable, amp: f64, increment: i32) -> f64 {
        let frac = (self.phase & self.frac_mask) as f64 * self.frac_scale;
        let idx = (self.phase >> self.frac_bits) as usize;
        let t = &table.samples;
        let s = amp * (t[idx] + frac * (t[idx + 1] - t[idx]));
        self.phase = self.phase.wrapping_add(increment as u32);
        s
    }
}
