//! Python bindings for `hofm_core`.
//!
//! Signals cross the boundary as lists of floats and spectra as lists of
//! `(freq_hz, amplitude)` tuples.

use std::path::PathBuf;
use std::sync::Arc;

use hofm_core::analysis::{self, AnalysisFrame, Window};
use hofm_core::cli::PatchSpec;
use hofm_core::io::{SampleFormat, WavSpec};
use hofm_core::operator::{self, ModulationLaw};
use hofm_core::pm::{self, PmParams};
use hofm_core::predict::{self, LineSpectrum, TruncationPolicy};
use hofm_core::{bessel, Error, OpParams, RenderConfig};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::OutOfRange { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Instability { .. } | Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn lines(s: LineSpectrum) -> Vec<(f64, f64)> {
    s.lines.into_iter().map(|l| (l.freq_hz, l.amplitude)).collect()
}

fn config(sample_rate: f64, block_size: usize) -> PyResult<RenderConfig> {
    RenderConfig::new(sample_rate).and_then(|c| c.with_block_size(block_size)).map_err(to_py)
}

fn params(ops: &[(f64, f64)]) -> Vec<OpParams> {
    ops.iter().map(|&(a, f)| OpParams::new(a, f)).collect()
}

/// Cosine lookup table with a guard point.
#[pyclass(name = "Wavetable", module = "hofm", frozen)]
struct PyWavetable {
    inner: Arc<hofm_core::Wavetable>,
}

#[pymethods]
impl PyWavetable {
    #[new]
    #[pyo3(signature = (size = hofm_core::wavetable::DEFAULT_TABLE_SIZE))]
    fn new(size: usize) -> PyResult<Self> {
        let t = hofm_core::Wavetable::cosine(size).map_err(to_py)?;
        Ok(Self { inner: Arc::new(t) })
    }

    #[getter]
    fn period(&self) -> usize {
        self.inner.period()
    }

    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Wavetable({})", self.inner.len())
    }
}

/// 32-bit fixed-point phase accumulator.
#[pyclass(name = "PhaseAccumulator", module = "hofm")]
struct PyPhaseAccumulator {
    inner: hofm_core::PhaseAccumulator,
}

#[pymethods]
impl PyPhaseAccumulator {
    #[new]
    #[pyo3(signature = (sample_rate, table_len = hofm_core::wavetable::DEFAULT_TABLE_SIZE))]
    fn new(sample_rate: f64, table_len: usize) -> PyResult<Self> {
        let inner = hofm_core::PhaseAccumulator::new(table_len, sample_rate).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn phase(&self) -> u32 {
        self.inner.phase()
    }

    #[setter]
    fn set_phase(&mut self, phase: u32) {
        self.inner.set_phase(phase);
    }

    #[getter]
    fn frac_bits(&self) -> u32 {
        self.inner.frac_bits()
    }

    fn increment(&self, freq_hz: f64) -> PyResult<i32> {
        self.inner.increment(freq_hz).map_err(to_py)
    }

    /// Reads the table at the current phase, then advances by `increment`.
    fn tick(&mut self, table: &PyWavetable, amp: f64, increment: i32) -> f64 {
        self.inner.tick(&table.inner, amp, increment)
    }
}

/// FM operator with audio and modulation outputs.
#[pyclass(name = "Operator", module = "hofm")]
struct PyOperator {
    inner: hofm_core::Operator,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (sample_rate, naive = false, block_size = operator::DEFAULT_BLOCK_SIZE))]
    fn new(sample_rate: f64, naive: bool, block_size: usize) -> PyResult<Self> {
        let law = if naive { ModulationLaw::Static } else { ModulationLaw::Instantaneous };
        let inner = hofm_core::Operator::with_law(&config(sample_rate, block_size)?, law).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// One sample; returns `(audio, modulation)`.
    #[pyo3(signature = (amp, freq_hz, mod_in = 0.0))]
    fn tick(&mut self, amp: f64, freq_hz: f64, mod_in: f64) -> PyResult<(f64, f64)> {
        self.inner.tick(amp, freq_hz, mod_in).map_err(to_py)
    }

    /// `n` samples; returns `(audio, modulation)` lists.
    #[pyo3(signature = (amp, freq_hz, n, mod_in = None))]
    fn process(&mut self, amp: f64, freq_hz: f64, n: usize, mod_in: Option<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.inner.process(amp, freq_hz, mod_in.as_deref(), n).map_err(to_py)?;
        Ok((self.inner.audio().to_vec(), self.inner.modulation().to_vec()))
    }

    #[getter]
    fn last_modulation(&self) -> f64 {
        self.inner.last_modulation()
    }
}

/// Renders an operator stack; `ops` are `(amp, freq_hz)` from top to carrier.
#[pyfunction]
#[pyo3(signature = (ops, sample_rate, n, naive = false, block_size = operator::DEFAULT_BLOCK_SIZE))]
fn render_stack(ops: Vec<(f64, f64)>, sample_rate: f64, n: usize, naive: bool, block_size: usize) -> PyResult<Vec<f64>> {
    let cfg = config(sample_rate, block_size)?;
    let p = params(&ops);
    let block = if naive { operator::render_naive_stack(&cfg, &p, n) } else { operator::render_stack(&cfg, &p, n) };
    Ok(block.map_err(to_py)?.audio)
}

#[pyfunction]
fn render_feedback_fm(amp: f64, freq_hz: f64, feedback_gain: f64, sample_rate: f64, n: usize) -> PyResult<Vec<f64>> {
    let cfg = config(sample_rate, operator::DEFAULT_BLOCK_SIZE)?;
    Ok(operator::render_feedback_fm(&cfg, amp, freq_hz, feedback_gain, n).map_err(to_py)?.audio)
}

/// Nested PM; `fm[0]`, `z[0]` are the innermost modulator.
#[pyfunction]
fn render_pm(fc: f64, fm: Vec<f64>, z: Vec<f64>, sample_rate: f64, n: usize) -> PyResult<Vec<f64>> {
    pm::render_pm(&PmParams { fc, fm, z, sample_rate }, n).map_err(to_py)
}

#[pyfunction]
fn render_feedback_pm(amp: f64, freq_hz: f64, feedback_gain: f64, sample_rate: f64, n: usize) -> Vec<f64> {
    pm::render_feedback_pm(amp, freq_hz, feedback_gain, sample_rate, n)
}

/// Renders a JSON patch as accepted by the `hofm` tool.
#[pyfunction]
fn render_patch(json: &str) -> PyResult<Vec<f64>> {
    let patch = PatchSpec::from_json(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    hofm_core::cli::render_patch(&patch).map_err(to_py)
}

#[pyfunction]
fn bessel_j(n: i64, z: f64) -> f64 {
    bessel::bessel_j(n, z)
}

/// `[J_0(z), ..., J_max_order(z)]`.
#[pyfunction]
fn bessel_row(max_order: usize, z: f64) -> Vec<f64> {
    bessel::bessel_row(max_order, z)
}

#[pyfunction]
fn predict_first_order(fc: f64, fm: f64, z: f64, max_sideband: usize) -> PyResult<Vec<(f64, f64)>> {
    predict::predict_first_order(fc, fm, z, max_sideband).map(lines).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (fc, fm0, fm1, z0, z1, inner_sidebands = None, amplitude_floor = None))]
fn predict_second_order(
    fc: f64,
    fm0: f64,
    fm1: f64,
    z0: f64,
    z1: f64,
    inner_sidebands: Option<usize>,
    amplitude_floor: Option<f64>,
) -> PyResult<Vec<(f64, f64)>> {
    let mut policy = TruncationPolicy::auto(z0);
    if let Some(k) = inner_sidebands {
        policy.inner_sidebands = k;
    }
    if let Some(f) = amplitude_floor {
        policy.amplitude_floor = f;
    }
    predict::predict_second_order(fc, fm0, fm1, z0, z1, &policy).map(lines).map_err(to_py)
}

fn frame(samples: Vec<f64>, sample_rate: f64, fundamental_hz: Option<f64>) -> PyResult<AnalysisFrame> {
    match fundamental_hz {
        Some(f) => AnalysisFrame::bin_centered(samples, sample_rate, f),
        None => AnalysisFrame::unaligned(samples, sample_rate),
    }
    .map_err(to_py)
}

fn window(name: &str) -> PyResult<Window> {
    match name {
        "rect" | "rectangular" => Ok(Window::Rectangular),
        "hann" => Ok(Window::Hann),
        _ => Err(PyValueError::new_err(format!("unknown window '{name}', expected 'rect' or 'hann'"))),
    }
}

/// One-sided magnitude spectrum. With `fundamental_hz` the frame must hold
/// whole periods; without it only the Hann window is allowed.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate, fundamental_hz = None, window_name = "rect"))]
fn measure_spectrum(
    samples: Vec<f64>,
    sample_rate: f64,
    fundamental_hz: Option<f64>,
    window_name: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let spec = analysis::measure_spectrum(&frame(samples, sample_rate, fundamental_hz)?, window(window_name)?).map_err(to_py)?;
    Ok(spec.bins.iter().map(|b| (b.freq_hz, b.magnitude)).collect())
}

/// Hann-windowed peak offsets from a grid; returns `(max_offset_hz, [(freq, offset)])`
/// listing the peaks beyond `tolerance_hz`.
#[pyfunction]
fn detect_carrier_drift(samples: Vec<f64>, sample_rate: f64, grid_hz: f64, tolerance_hz: f64) -> PyResult<(f64, Vec<(f64, f64)>)> {
    let spec = analysis::measure_spectrum(&frame(samples, sample_rate, None)?, Window::Hann).map_err(to_py)?;
    let r = analysis::detect_carrier_drift(&spec, grid_hz, tolerance_hz).map_err(to_py)?;
    Ok((r.max_offset_hz, r.offending.iter().map(|p| (p.freq_hz, p.offset_hz)).collect()))
}

/// Slope in dB/octave over harmonics `first..=last` of a bin-centred frame.
#[pyfunction]
fn fit_spectral_slope(samples: Vec<f64>, sample_rate: f64, fundamental_hz: f64, first: usize, last: usize) -> PyResult<f64> {
    let spec = analysis::measure_spectrum(&frame(samples, sample_rate, Some(fundamental_hz))?, Window::Rectangular)
        .map_err(to_py)?;
    analysis::fit_spectral_slope(&spec, fundamental_hz, first..=last).map_err(to_py)
}

/// Writes a mono WAV (`"pcm16"` or `"float32"`) and returns the clipped sample count.
#[pyfunction]
#[pyo3(signature = (path, samples, sample_rate, format = "pcm16"))]
fn write_wav(path: PathBuf, samples: Vec<f64>, sample_rate: u32, format: &str) -> PyResult<usize> {
    let format = match format {
        "pcm16" => SampleFormat::Pcm16,
        "float32" => SampleFormat::Float32,
        _ => return Err(PyValueError::new_err(format!("unknown format '{format}', expected 'pcm16' or 'float32'"))),
    };
    let spec = WavSpec::new(sample_rate, format).map_err(to_py)?;
    hofm_core::io::write_wav(&path, &samples, spec).map_err(to_py)
}

#[pymodule]
fn hofm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWavetable>()?;
    m.add_class::<PyPhaseAccumulator>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(render_stack, m)?)?;
    m.add_function(wrap_pyfunction!(render_feedback_fm, m)?)?;
    m.add_function(wrap_pyfunction!(render_pm, m)?)?;
    m.add_function(wrap_pyfunction!(render_feedback_pm, m)?)?;
    m.add_function(wrap_pyfunction!(render_patch, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_row, m)?)?;
    m.add_function(wrap_pyfunction!(predict_first_order, m)?)?;
    m.add_function(wrap_pyfunction!(predict_second_order, m)?)?;
    m.add_function(wrap_pyfunction!(measure_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(detect_carrier_drift, m)?)?;
    m.add_function(wrap_pyfunction!(fit_spectral_slope, m)?)?;
    m.add_function(wrap_pyfunction!(write_wav, m)?)?;
    Ok(())
}
