//! FM operators and the topologies built from them.
//!
//! An [`Operator`] takes an amplitude (or modulation index), a base
//! frequency and a modulation input in Hz. It produces two signals: the audio
//! output `s[n]` and the modulation output `s[n] * f[n]`, where
//! `f[n] = freq + mod_in[n]` is the instantaneous frequency. Because the
//! modulation output carries the instantaneous frequency rather than the
//! static one, the deviation applied to the next stage follows the modulated
//! frequency of the stage above and no DC term reaches the carrier.
//!
//! Stacks are processed one operator per block. Feedback operators run
//! sample by sample with a unit delay in the loop.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::wavetable::{PhaseAccumulator, Wavetable};

/// Default block length for stack rendering.
pub const DEFAULT_BLOCK_SIZE: usize = 64;

/// Feedback rendering aborts once the modulation output exceeds this many
/// multiples of the sample rate.
pub const DIVERGENCE_LIMIT: f64 = 10.0;

/// Shared rendering settings.
#[derive(Debug, Clone)]
pub struct RenderConfig {
    pub sample_rate: f64,
    pub block_size: usize,
    pub table: Arc<Wavetable>,
}

impl RenderConfig {
    pub fn new(sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        Ok(Self { sample_rate, block_size: DEFAULT_BLOCK_SIZE, table: Arc::new(Wavetable::default()) })
    }

    pub fn with_block_size(mut self, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::invalid("block size must be at least 1"));
        }
        self.block_size = block_size;
        Ok(self)
    }

    pub fn with_table(mut self, table: Arc<Wavetable>) -> Self {
        self.table = table;
        self
    }
}

/// Scalar inputs of one operator: amplitude (bottom of a stack) or
/// modulation index (everywhere else), and frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpParams {
    pub amp: f64,
    pub freq_hz: f64,
}

impl OpParams {
    pub const fn new(amp: f64, freq_hz: f64) -> Self {
        Self { amp, freq_hz }
    }
}

/// How an operator scales its modulation output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModulationLaw {
    /// `audio * (freq + mod_in)`, the drift-free form.
    #[default]
    Instantaneous,
    /// `audio * freq`, index times static frequency. Kept to reproduce the
    /// carrier drift of naive stacked FM; not for musical use.
    Static,
}

/// Paired audio and modulation streams.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub audio: Vec<f64>,
    pub modulation: Vec<f64>,
    pub sample_rate: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.audio.len()
    }

    pub fn is_empty(&self) -> bool {
        self.audio.is_empty()
    }
}

/// A modulatable table oscillator with audio and modulation outputs.
#[derive(Debug, Clone)]
pub struct Operator {
    acc: PhaseAccumulator,
    table: Arc<Wavetable>,
    law: ModulationLaw,
    last_mod: f64,
    audio: Vec<f64>,
    modulation: Vec<f64>,
}

impl Operator {
    pub fn new(config: &RenderConfig) -> Result<Self> {
        Self::with_law(config, ModulationLaw::Instantaneous)
    }

    pub fn with_law(config: &RenderConfig, law: ModulationLaw) -> Result<Self> {
        Ok(Self {
            acc: PhaseAccumulator::for_table(&config.table, config.sample_rate)?,
            table: Arc::clone(&config.table),
            law,
            last_mod: 0.0,
            audio: Vec::with_capacity(config.block_size),
            modulation: Vec::with_capacity(config.block_size),
        })
    }

    pub fn accumulator(&self) -> &PhaseAccumulator {
        &self.acc
    }

    pub fn accumulator_mut(&mut self) -> &mut PhaseAccumulator {
        &mut self.acc
    }

    pub fn law(&self) -> ModulationLaw {
        self.law
    }

    /// Modulation output of the most recent sample.
    pub fn last_modulation(&self) -> f64 {
        self.last_mod
    }

    /// Audio output of the last processed block.
    pub fn audio(&self) -> &[f64] {
        &self.audio
    }

    /// Modulation output of the last processed block.
    pub fn modulation(&self) -> &[f64] {
        &self.modulation
    }

    /// Produces one sample, returning `(audio, modulation)`.
    #[inline]
    pub fn tick(&mut self, amp: f64, freq_hz: f64, mod_in: f64) -> Result<(f64, f64)> {
        let f = freq_hz + mod_in;
        let inc = self.acc.increment(f)?;
        let s = self.acc.tick(&self.table, amp, inc);
        let m = match self.law {
            ModulationLaw::Instantaneous => s * f,
            ModulationLaw::Static => s * freq_hz,
        };
        self.last_mod = m;
        Ok((s, m))
    }

    /// Processes `len` samples into the internal buffers. Without a
    /// modulation input the operator runs at its base frequency.
    pub fn process(&mut self, amp: f64, freq_hz: f64, mod_in: Option<&[f64]>, len: usize) -> Result<()> {
        if let Some(m) = mod_in {
            if m.len() < len {
                return Err(Error::invalid(format!("modulation input has {} samples, need {len}", m.len())));
            }
        }
        self.audio.clear();
        self.modulation.clear();
        for n in 0..len {
            let mi = mod_in.map_or(0.0, |m| m[n]);
            let (s, m) = self.tick(amp, freq_hz, mi)?;
            self.audio.push(s);
            self.modulation.push(m);
        }
        Ok(())
    }
}

/// A chain of operators, top (first-order modulator) to bottom (carrier).
#[derive(Debug, Clone)]
pub struct Stack {
    ops: Vec<Operator>,
}

impl Stack {
    pub fn new(config: &RenderConfig, order: usize, law: ModulationLaw) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("operator stack must contain at least one operator"));
        }
        let ops = (0..order).map(|_| Operator::with_law(config, law)).collect::<Result<_>>()?;
        Ok(Self { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn operators(&self) -> &[Operator] {
        &self.ops
    }

    /// Runs one block through the stack and returns the carrier operator.
    ///
    /// `params` are per-block scalars, so envelopes are applied by passing
    /// new values each block.
    pub fn process(&mut self, params: &[OpParams], len: usize) -> Result<&Operator> {
        if params.len() != self.ops.len() {
            return Err(Error::invalid(format!(
                "stack has {} operators but {} parameter sets were given",
                self.ops.len(),
                params.len()
            )));
        }
        let p = params[0];
        self.ops[0].process(p.amp, p.freq_hz, None, len)?;
        for i in 1..self.ops.len() {
            let (above, rest) = self.ops.split_at_mut(i);
            let p = params[i];
            rest[0].process(p.amp, p.freq_hz, Some(above[i - 1].modulation()), len)?;
        }
        Ok(&self.ops[self.ops.len() - 1])
    }
}

fn render_with_law(config: &RenderConfig, params: &[OpParams], n_samples: usize, law: ModulationLaw) -> Result<Block> {
    let mut stack = Stack::new(config, params.len(), law)?;
    let mut audio = Vec::with_capacity(n_samples);
    let mut modulation = Vec::with_capacity(n_samples);
    let mut done = 0;
    while done < n_samples {
        let len = config.block_size.min(n_samples - done);
        let carrier = stack.process(params, len)?;
        audio.extend_from_slice(carrier.audio());
        modulation.extend_from_slice(carrier.modulation());
        done += len;
    }
    Ok(Block { audio, modulation, sample_rate: config.sample_rate })
}

/// Renders a stack with constant parameters, listed top to bottom.
///
/// The first entries are modulation indices, the last is the output
/// amplitude. Three operators give drift-free second-order FM.
pub fn render_stack(config: &RenderConfig, params: &[OpParams], n_samples: usize) -> Result<Block> {
    render_with_law(config, params, n_samples, ModulationLaw::Instantaneous)
}

/// Renders the naive stack whose deviations use static frequencies.
///
/// With a DC component in an inner modulator (e.g. equal frequencies) the
/// carrier partials drift off the harmonic grid.
pub fn render_naive_stack(config: &RenderConfig, params: &[OpParams], n_samples: usize) -> Result<Block> {
    render_with_law(config, params, n_samples, ModulationLaw::Static)
}

/// An operator modulated by its own unit-delayed modulation output.
#[derive(Debug, Clone)]
pub struct FeedbackOperator {
    op: Operator,
    gain: f64,
    samples_done: usize,
}

impl FeedbackOperator {
    pub fn new(config: &RenderConfig, feedback_gain: f64) -> Result<Self> {
        if !(feedback_gain >= 0.0) || !feedback_gain.is_finite() {
            return Err(Error::invalid(format!("feedback gain must be >= 0, got {feedback_gain}")));
        }
        Ok(Self { op: Operator::new(config)?, gain: feedback_gain, samples_done: 0 })
    }

    pub fn feedback_gain(&self) -> f64 {
        self.gain
    }

    /// Feedback amount can change between samples without touching the output level.
    pub fn set_feedback_gain(&mut self, gain: f64) {
        self.gain = gain;
    }

    pub fn tick(&mut self, amp: f64, freq_hz: f64) -> Result<(f64, f64)> {
        let sample = self.samples_done;
        let sr = self.op.acc.sample_rate();
        let mod_in = self.gain * self.op.last_mod;
        let out = self.op.tick(amp, freq_hz, mod_in).map_err(|e| match e {
            Error::OutOfRange { freq_hz, .. } => Error::Instability {
                sample,
                detail: format!("instantaneous frequency {freq_hz:.1} Hz reached the sample rate"),
            },
            other => other,
        })?;
        if !(out.1.abs() <= DIVERGENCE_LIMIT * sr) {
            return Err(Error::Instability {
                sample,
                detail: format!("modulation output {:.1} exceeds {DIVERGENCE_LIMIT} x sample rate", out.1),
            });
        }
        self.samples_done += 1;
        Ok(out)
    }
}

/// Renders feedback FM: `mod_in[n] = gain * mod_out[n-1]`, `mod_out[-1] = 0`.
pub fn render_feedback_fm(
    config: &RenderConfig,
    amp: f64,
    freq_hz: f64,
    feedback_gain: f64,
    n_samples: usize,
) -> Result<Block> {
    let mut op = FeedbackOperator::new(config, feedback_gain)?;
    let mut audio = Vec::with_capacity(n_samples);
    let mut modulation = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (s, m) = op.tick(amp, freq_hz)?;
        audio.push(s);
        modulation.push(m);
    }
    Ok(Block { audio, modulation, sample_rate: config.sample_rate })
}
