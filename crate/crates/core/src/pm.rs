//! Closed-form phase modulation, evaluated directly per sample.
//!
//! These renderers use the library cosine and compute time as `n / fs` for
//! every sample, so they carry no accumulated phase error. They are the
//! reference the FM engine is measured against.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Parameters of an n-th order PM signal.
///
/// `fm[0]`/`z[0]` are the innermost (first-order) modulator, the last
/// entries modulate the carrier directly.
#[derive(Debug, Clone, PartialEq)]
pub struct PmParams {
    pub fc: f64,
    pub fm: Vec<f64>,
    pub z: Vec<f64>,
    pub sample_rate: f64,
}

impl PmParams {
    pub fn first_order(fc: f64, fm: f64, z: f64, sample_rate: f64) -> Self {
        Self { fc, fm: vec![fm], z: vec![z], sample_rate }
    }

    pub fn second_order(fc: f64, fm0: f64, fm1: f64, z0: f64, z1: f64, sample_rate: f64) -> Self {
        Self { fc, fm: vec![fm0, fm1], z: vec![z0, z1], sample_rate }
    }

    pub fn order(&self) -> usize {
        self.fm.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.fm.len() != self.z.len() {
            return Err(Error::invalid(format!(
                "{} modulation frequencies but {} indices",
                self.fm.len(),
                self.z.len()
            )));
        }
        if let Some(z) = self.z.iter().find(|z| !(**z >= 0.0)) {
            return Err(Error::invalid(format!("modulation index must be >= 0, got {z}")));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::invalid(format!("sample rate must be positive, got {}", self.sample_rate)));
        }
        Ok(())
    }

    fn expect_order(&self, order: usize) -> Result<()> {
        self.validate()?;
        if self.order() != order {
            return Err(Error::invalid(format!("expected {order} modulation order(s), got {}", self.order())));
        }
        Ok(())
    }

    /// Phase at time `t` of the nested modulator chain plus the carrier.
    fn phase(&self, t: f64) -> f64 {
        let inner = self
            .fm
            .iter()
            .zip(&self.z)
            .fold(0.0, |acc, (&f, &z)| z * (TAU * f * t + acc).sin());
        TAU * self.fc * t + inner
    }
}

/// Nested PM of any order: `cos(2π fc t + z_k sin(2π fm_k t + ... z_0 sin(2π fm_0 t)))`.
pub fn render_pm(params: &PmParams, n_samples: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let fs = params.sample_rate;
    Ok((0..n_samples).map(|n| params.phase(n as f64 / fs).cos()).collect())
}

/// `cos(2π fc t + z sin(2π fm t))`.
pub fn render_pm1(params: &PmParams, n_samples: usize) -> Result<Vec<f64>> {
    params.expect_order(1)?;
    render_pm(params, n_samples)
}

/// `cos(2π fc t + z1 sin(2π fm1 t + z0 sin(2π fm0 t)))`.
pub fn render_pm2(params: &PmParams, n_samples: usize) -> Result<Vec<f64>> {
    params.expect_order(2)?;
    render_pm(params, n_samples)
}

/// Feedback PM with a unit delay: `y[n] = amp cos(2π f n / fs + gain y[n-1])`, `y[-1] = 0`.
pub fn render_feedback_pm(amp: f64, freq_hz: f64, feedback_gain: f64, sample_rate: f64, n_samples: usize) -> Vec<f64> {
    let mut prev = 0.0;
    (0..n_samples)
        .map(|n| {
            let t = n as f64 / sample_rate;
            let y = amp * (TAU * freq_hz * t + feedback_gain * prev).cos();
            prev = y;
            y
        })
        .collect()
}
