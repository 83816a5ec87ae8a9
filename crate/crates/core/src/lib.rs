//! Higher-order frequency modulation synthesis.
//!
//! The crate is organised around an FM *operator*: a table-lookup oscillator
//! with two outputs, the audio signal and a modulation signal equal to the
//! audio scaled by the operator's instantaneous frequency. Feeding the
//! modulation output of one operator into the frequency input of the next
//! gives stacks of arbitrary order that are free of carrier drift, and
//! feeding an operator back into itself gives feedback FM.
//!
//! Alongside the synthesis engine live the tools used to check it:
//!
//! * [`pm`] renders closed-form phase-modulation signals, the ground truth
//!   every FM topology is compared against.
//! * [`bessel`] and [`predict`] give analytic line spectra for first- and
//!   second-order modulation.
//! * [`analysis`] measures spectra, DC, carrier drift and spectral slope.
//! * [`io`] writes WAV and CSV files and [`cli`] drives everything from the
//!   command line.

pub mod analysis;
pub mod bessel;
pub mod cli;
pub mod error;
pub mod io;
pub mod operator;
pub mod pm;
pub mod predict;
pub mod wavetable;

pub use error::{Error, Result};
pub use operator::{Block, OpParams, Operator, RenderConfig};
pub use wavetable::{PhaseAccumulator, Wavetable};
