//! The `hofm` command-line tool.
//!
//! Exit codes: 0 success or within tolerance, 1 tolerance exceeded,
//! 2 usage error, 3 runtime failure (including feedback instability).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, AnalysisFrame, MeasuredSpectrum, Window};
use crate::error::Error;
use crate::io::{self, SampleFormat, WavSpec};
use crate::operator::{self, OpParams, RenderConfig};
use crate::pm::{self, PmParams};
use crate::predict::{self, LineSpectrum, TruncationPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

const USAGE: &str = "usage: hofm <render|spectrum|compare|drift-demo> [OPTIONS] (see hofm --help)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Drift-free operator stack, any order.
    FmStack,
    /// Stack with static-frequency deviations (shows carrier drift).
    FmStackNaive,
    /// First-order PM: modulator then carrier.
    Pm1,
    /// Second-order PM: two modulators then carrier.
    Pm2,
    /// Single operator fed back through a unit delay.
    FmFeedback,
    /// Feedback PM reference.
    PmFeedback,
}

impl Topology {
    fn arity_ok(self, n: usize) -> bool {
        match self {
            Topology::FmStack | Topology::FmStackNaive => n >= 1,
            Topology::Pm1 => n == 2,
            Topology::Pm2 => n == 3,
            Topology::FmFeedback | Topology::PmFeedback => n == 1,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            Topology::FmStack | Topology::FmStackNaive => "at least 1 operator",
            Topology::Pm1 => "2 operators (modulator, carrier)",
            Topology::Pm2 => "3 operators (modulator 0, modulator 1, carrier)",
            Topology::FmFeedback | Topology::PmFeedback => "exactly 1 operator",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// One operator's scalars in a patch file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OperatorSpec {
    pub amp: f64,
    pub freq_hz: f64,
}

impl From<OperatorSpec> for OpParams {
    fn from(o: OperatorSpec) -> Self {
        OpParams::new(o.amp, o.freq_hz)
    }
}

fn default_sample_rate() -> f64 {
    48000.0
}

fn default_duration() -> f64 {
    1.0
}

fn default_feedback_gain() -> f64 {
    1.0
}

/// A complete patch: topology, operators top to bottom, and render settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PatchSpec {
    pub topology: Topology,
    pub operators: Vec<OperatorSpec>,
    #[serde(default = "default_feedback_gain")]
    pub feedback_gain: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    /// Seconds.
    #[serde(default = "default_duration")]
    pub duration: f64,
}

impl PatchSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let p: PatchSpec = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad patch JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read patch {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !self.topology.arity_ok(self.operators.len()) {
            return usage(format!(
                "{} takes {}, got {}",
                self.topology,
                self.topology.arity_text(),
                self.operators.len()
            ));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return usage(format!("sample rate must be positive, got {}", self.sample_rate));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return usage(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.feedback_gain >= 0.0) || !self.feedback_gain.is_finite() {
            return usage(format!("feedback gain must be >= 0, got {}", self.feedback_gain));
        }
        if self.operators.iter().any(|o| !o.amp.is_finite() || !o.freq_hz.is_finite()) {
            return usage("operator values must be finite".into());
        }
        if matches!(self.topology, Topology::Pm1 | Topology::Pm2) {
            let (mods, _) = self.operators.split_at(self.operators.len() - 1);
            if mods.iter().any(|o| o.amp < 0.0) {
                return usage("PM modulation indices must be >= 0".into());
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    fn params(&self) -> Vec<OpParams> {
        self.operators.iter().copied().map(OpParams::from).collect()
    }

    fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.operators.iter().map(|o| o.freq_hz)
    }
}

/// Renders a patch to mono samples.
pub fn render_patch(patch: &PatchSpec) -> crate::Result<Vec<f64>> {
    let n = patch.n_samples();
    let sr = patch.sample_rate;
    let ops = patch.params();
    let carrier = *ops.last().ok_or_else(|| Error::invalid("patch has no operators"))?;
    let scale = |v: Vec<f64>| v.into_iter().map(|s| carrier.amp * s).collect::<Vec<f64>>();
    Ok(match patch.topology {
        Topology::FmStack => operator::render_stack(&RenderConfig::new(sr)?, &ops, n)?.audio,
        Topology::FmStackNaive => operator::render_naive_stack(&RenderConfig::new(sr)?, &ops, n)?.audio,
        Topology::Pm1 => scale(pm::render_pm1(&PmParams::first_order(carrier.freq_hz, ops[0].freq_hz, ops[0].amp, sr), n)?),
        Topology::Pm2 => scale(pm::render_pm2(
            &PmParams::second_order(carrier.freq_hz, ops[0].freq_hz, ops[1].freq_hz, ops[0].amp, ops[1].amp, sr),
            n,
        )?),
        Topology::FmFeedback => {
            operator::render_feedback_fm(&RenderConfig::new(sr)?, carrier.amp, carrier.freq_hz, patch.feedback_gain, n)?.audio
        }
        Topology::PmFeedback => pm::render_feedback_pm(carrier.amp, carrier.freq_hz, patch.feedback_gain, sr, n),
    })
}

/// Greatest common divisor of frequencies rounded to 1e-6 Hz, ignoring zeros.
pub fn frequency_gcd(freqs: impl IntoIterator<Item = f64>) -> Option<f64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = freqs
        .into_iter()
        .map(|f| (f.abs() * 1e6).round() as u64)
        .filter(|&u| u > 0)
        .fold(0, gcd);
    (g > 0).then_some(g as f64 * 1e-6)
}

/// Where a measured frame sits in the render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    /// First [`analysis::MIN_PERIODS`] periods; renders start in phase here.
    Head,
    /// Last [`analysis::MIN_PERIODS`] periods, past any feedback transient.
    Tail,
    /// Every whole period, for frequency resolution.
    Whole,
}

/// Analysis frame for a rendered patch. Falls back to the whole signal with
/// no grid when `fundamental` does not divide the sample rate.
fn frame_for(
    samples: Vec<f64>,
    sr: f64,
    fundamental: Option<f64>,
    placement: Placement,
) -> Result<(AnalysisFrame, bool), CliError> {
    if let Some(f) = fundamental {
        if let Some(p) = analysis::period_samples(sr, f) {
            if samples.len() / p < analysis::MIN_PERIODS {
                return Err(CliError::Usage(format!(
                    "duration too short: need {} periods of {f} Hz, have {}",
                    analysis::MIN_PERIODS,
                    samples.len() / p
                )));
            }
            let frame = match placement {
                Placement::Head => AnalysisFrame::head(&samples, sr, f, analysis::MIN_PERIODS)?,
                Placement::Tail => AnalysisFrame::tail(&samples, sr, f, Some(analysis::MIN_PERIODS))?,
                Placement::Whole => AnalysisFrame::tail(&samples, sr, f, None)?,
            };
            return Ok((frame, true));
        }
    }
    Ok((AnalysisFrame::unaligned(samples, sr)?, false))
}

fn measure_patch(patch: &PatchSpec, placement: Placement) -> Result<MeasuredSpectrum, CliError> {
    let samples = render_patch(patch)?;
    let (frame, aligned) = frame_for(samples, patch.sample_rate, frequency_gcd(patch.frequencies()), placement)?;
    let window = if aligned { Window::Rectangular } else { Window::Hann };
    Ok(analysis::measure_spectrum(&frame, window)?)
}

/// Analytic spectrum of a patch, for the topologies that have one.
pub fn predict_patch(patch: &PatchSpec) -> Result<LineSpectrum, CliError> {
    let ops = patch.params();
    let floor = TruncationPolicy::DEFAULT_FLOOR;
    let first = |fc: f64, fm: f64, z: f64| {
        let extent = predict::sideband_extent(z, floor).max(z.abs().ceil() as usize + 10);
        predict::predict_first_order(fc, fm, z, extent)
    };
    let carrier = ops[ops.len() - 1];
    let spectrum = match (patch.topology, ops.len()) {
        (Topology::FmStack, 1) => predict::merge_and_fold(&[(carrier.freq_hz, 1.0)]),
        (Topology::FmStack, 2) | (Topology::Pm1, 2) => first(carrier.freq_hz, ops[0].freq_hz, ops[0].amp)?,
        (Topology::FmStack, 3) | (Topology::Pm2, 3) => predict::predict_second_order(
            carrier.freq_hz,
            ops[0].freq_hz,
            ops[1].freq_hz,
            ops[0].amp,
            ops[1].amp,
            &TruncationPolicy::auto(ops[0].amp),
        )?,
        (t, n) => {
            return Err(CliError::Usage(format!(
                "no analytic spectrum for {t} with {n} operator(s); supported: pm1, pm2, fm-stack of 1-3 operators"
            )))
        }
    };
    Ok(spectrum.scaled(carrier.amp))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn parse_op(s: &str) -> Result<OperatorSpec, String> {
    let (a, f) = s.split_once(':').ok_or_else(|| format!("expected AMP:FREQ, got '{s}'"))?;
    let amp = a.trim().parse::<f64>().map_err(|e| format!("bad amplitude '{a}': {e}"))?;
    let freq_hz = f.trim().parse::<f64>().map_err(|e| format!("bad frequency '{f}': {e}"))?;
    Ok(OperatorSpec { amp, freq_hz })
}

#[derive(Debug, Parser)]
#[command(name = "hofm", version, about = "Higher-order FM synthesis, spectra and FM/PM comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a patch to a WAV file.
    Render(RenderArgs),
    /// Write the measured or predicted spectrum of a patch as CSV.
    Spectrum(SpectrumArgs),
    /// Compare the line spectra of two patches.
    Compare(CompareArgs),
    /// Measure how far spectral peaks sit from a harmonic grid.
    DriftDemo(DriftArgs),
}

#[derive(Debug, Args)]
struct PatchArgs {
    /// Topology; `compare` takes it twice.
    #[arg(long, value_enum)]
    topology: Vec<Topology>,
    /// Operator AMP:FREQ, repeatable, top to bottom.
    #[arg(long = "op", value_name = "AMP:FREQ", value_parser = parse_op, allow_hyphen_values = true)]
    ops: Vec<OperatorSpec>,
    #[arg(long, default_value_t = 1.0)]
    feedback_gain: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 48000.0)]
    sr: f64,
    /// Duration in seconds.
    #[arg(long, default_value_t = 1.0)]
    dur: f64,
    /// JSON patch file; `compare` takes it up to twice.
    #[arg(long, value_name = "JSON")]
    patch: Vec<PathBuf>,
}

impl PatchArgs {
    fn patches(&self) -> Result<Vec<PatchSpec>, CliError> {
        let mut out = self.patch.iter().map(|p| PatchSpec::load(p)).collect::<Result<Vec<_>, _>>()?;
        for &topology in &self.topology {
            let p = PatchSpec {
                topology,
                operators: self.ops.clone(),
                feedback_gain: self.feedback_gain,
                sample_rate: self.sr,
                duration: self.dur,
            };
            p.validate()?;
            out.push(p);
        }
        if out.is_empty() {
            return Err(CliError::Usage("give a patch with --patch or --topology/--op".into()));
        }
        Ok(out)
    }

    fn single(&self) -> Result<PatchSpec, CliError> {
        let mut p = self.patches()?;
        if p.len() != 1 {
            return Err(CliError::Usage(format!("expected one patch, got {}", p.len())));
        }
        Ok(p.remove(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WavFormat {
    Pcm16,
    Float32,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[command(flatten)]
    patch: PatchArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = WavFormat::Pcm16)]
    format: WavFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpectrumMode {
    Measured,
    Predicted,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    patch: PatchArgs,
    #[arg(long, value_enum, default_value_t = SpectrumMode::Measured)]
    mode: SpectrumMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    patch: PatchArgs,
    #[arg(long, default_value_t = 1.0)]
    tolerance_db: f64,
    #[arg(long, default_value_t = -60.0, allow_hyphen_values = true)]
    floor_db: f64,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[command(flatten)]
    patch: PatchArgs,
    /// Grid spacing; defaults to the common divisor of the operator frequencies.
    #[arg(long)]
    grid_hz: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tolerance_hz: f64,
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "error: {first}; {USAGE}");
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Render(a) => cmd_render(&a, out),
        Command::Spectrum(a) => cmd_spectrum(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::DriftDemo(a) => cmd_drift(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Usage(m) => writeln!(err, "error: {m}; {USAGE}"),
                CliError::Runtime(m) => writeln!(err, "error: {m}"),
            }
            .ok();
            e.exit_code()
        }
    }
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let patch = args.patch.single()?;
    let sr = patch.sample_rate;
    if sr.fract() != 0.0 || sr > u32::MAX as f64 {
        return Err(CliError::Usage(format!("WAV output needs an integer sample rate, got {sr}")));
    }
    let format = match args.format {
        WavFormat::Pcm16 => SampleFormat::Pcm16,
        WavFormat::Float32 => SampleFormat::Float32,
    };
    let samples = render_patch(&patch)?;
    let clipped = io::write_wav(&args.out, &samples, WavSpec::new(sr as u32, format)?)?;
    if clipped > 0 {
        writeln!(out, "warning: {clipped} samples clipped to [-1, 1]").ok();
    }
    writeln!(out, "wrote {} samples at {sr} Hz to {}", samples.len(), args.out.display()).ok();
    Ok(EXIT_OK)
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let patch = args.patch.single()?;
    let rows = match args.mode {
        SpectrumMode::Predicted => {
            let s = predict_patch(&patch)?;
            io::write_spectrum_csv(&args.out, &s)?;
            s.len()
        }
        SpectrumMode::Measured => {
            let s = measure_patch(&patch, Placement::Tail)?;
            io::write_spectrum_csv(&args.out, &s)?;
            s.bins.len()
        }
    };
    writeln!(out, "wrote {rows} rows to {}", args.out.display()).ok();
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let patches = args.patch.patches()?;
    let [a, b] = patches.as_slice() else {
        return Err(CliError::Usage(format!("compare needs exactly two patches, got {}", patches.len())));
    };
    if a.sample_rate != b.sample_rate || a.n_samples() != b.n_samples() {
        return Err(CliError::Usage("compared patches must share sample rate and duration".into()));
    }
    let grid = frequency_gcd(a.frequencies().chain(b.frequencies()))
        .filter(|&g| analysis::period_samples(a.sample_rate, g).is_some())
        .ok_or_else(|| CliError::Usage("patches have no common frequency grid on this sample rate".into()))?;
    let sa = measure_patch(a, Placement::Head)?;
    let sb = measure_patch(b, Placement::Head)?;
    if sa.window != Window::Rectangular || sb.window != Window::Rectangular {
        return Err(CliError::Usage("patches have no common frequency grid on this sample rate".into()));
    }
    let lines = analysis::compare_spectra(&sa, &sb, grid, args.floor_db)?;
    let worst = analysis::max_difference_db(&lines);
    for l in &lines {
        writeln!(
            out,
            "{:>10.3} Hz  {:>8.2} dB  {:>8.2} dB  diff {:.3} dB",
            l.freq_hz, l.level_a_db, l.level_b_db, l.diff_db
        )
        .ok();
    }
    let pass = worst <= args.tolerance_db;
    writeln!(
        out,
        "{} vs {}: max difference {worst:.3} dB over {} lines above {} dB (tolerance {} dB): {}",
        a.topology,
        b.topology,
        lines.len(),
        args.floor_db,
        args.tolerance_db,
        if pass { "PASS" } else { "FAIL" }
    )
    .ok();
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_drift(args: &DriftArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let patch = args.patch.single()?;
    if !matches!(patch.topology, Topology::FmStack | Topology::FmStackNaive) {
        return Err(CliError::Usage(format!("drift-demo takes fm-stack or fm-stack-naive, got {}", patch.topology)));
    }
    let grid = match args.grid_hz {
        Some(g) => g,
        None => frequency_gcd(patch.frequencies())
            .ok_or_else(|| CliError::Usage("cannot derive a grid from zero frequencies; pass --grid-hz".into()))?,
    };
    if !(grid > 0.0) {
        return Err(CliError::Usage(format!("grid spacing must be positive, got {grid}")));
    }
    let samples = render_patch(&patch)?;
    let (frame, _) = frame_for(samples, patch.sample_rate, Some(grid), Placement::Whole)?;
    let spectrum = analysis::measure_spectrum(&frame, Window::Hann)?;
    let report = analysis::detect_carrier_drift(&spectrum, grid, args.tolerance_hz)?;
    for p in &report.offending {
        writeln!(out, "off-grid peak {:.3} Hz ({:.2} dB), offset {:.3} Hz", p.freq_hz, analysis::level_db(p.magnitude), p.offset_hz)
            .ok();
    }
    let pass = report.within(args.tolerance_hz);
    writeln!(
        out,
        "{}: max peak offset {:.3} Hz from {grid} Hz grid over {} peaks (tolerance {} Hz): {}",
        patch.topology,
        report.max_offset_hz,
        report.peaks.len(),
        args.tolerance_hz,
        if pass { "PASS" } else { "FAIL" }
    )
    .ok();
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("hofm").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn op_parsing() {
        assert_eq!(parse_op("3:500").unwrap(), OperatorSpec { amp: 3.0, freq_hz: 500.0 });
        assert_eq!(parse_op("0.5:-20").unwrap(), OperatorSpec { amp: 0.5, freq_hz: -20.0 });
        assert!(parse_op("3").is_err());
        assert!(parse_op("x:1").is_err());
    }

    #[test]
    fn gcd_of_frequencies() {
        assert_eq!(frequency_gcd([500.0, 500.0, 500.0]), Some(500.0));
        assert_eq!(frequency_gcd([2000.0, 500.0]), Some(500.0));
        assert_eq!(frequency_gcd([300.0, 0.0, 700.0]), Some(100.0));
        assert_eq!(frequency_gcd([0.0]), None);
        let g = frequency_gcd([440.0, 441.5]).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn patch_json() {
        let p = PatchSpec::from_json(
            r#"{"topology":"fm-stack","operators":[{"amp":3,"freqHz":500},{"amp":2,"freqHz":500},{"amp":1,"freqHz":500}],"sampleRate":96000}"#,
        )
        .unwrap();
        assert_eq!(p.topology, Topology::FmStack);
        assert_eq!(p.sample_rate, 96000.0);
        assert_eq!(p.duration, 1.0);
        assert_eq!(p.n_samples(), 96000);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"freqHz\":500.0"));
        assert_eq!(PatchSpec::from_json(&text).unwrap(), p);
        assert!(PatchSpec::from_json(r#"{"topology":"pm2","operators":[{"amp":1,"freqHz":500}]}"#).is_err());
        assert!(PatchSpec::from_json(r#"{"topology":"fm-stack","operators":[],"bogus":1}"#).is_err());
        assert!(PatchSpec::from_json(r#"{"topology":"warp","operators":[]}"#).is_err());
    }

    #[test]
    fn arity_rules() {
        let mk = |t, n| PatchSpec {
            topology: t,
            operators: vec![OperatorSpec { amp: 1.0, freq_hz: 100.0 }; n],
            feedback_gain: 1.0,
            sample_rate: 48000.0,
            duration: 0.1,
        };
        assert!(mk(Topology::FmStack, 4).validate().is_ok());
        assert!(mk(Topology::FmStack, 0).validate().is_err());
        assert!(mk(Topology::Pm1, 2).validate().is_ok());
        assert!(mk(Topology::Pm1, 1).validate().is_err());
        assert!(mk(Topology::Pm2, 3).validate().is_ok());
        assert!(mk(Topology::FmFeedback, 2).validate().is_err());
        assert!(mk(Topology::PmFeedback, 1).validate().is_ok());
    }

    #[test]
    fn prediction_topologies() {
        let mk = |t, ops: Vec<(f64, f64)>| PatchSpec {
            topology: t,
            operators: ops.into_iter().map(|(amp, freq_hz)| OperatorSpec { amp, freq_hz }).collect(),
            feedback_gain: 1.0,
            sample_rate: 48000.0,
            duration: 1.0,
        };
        let s = predict_patch(&mk(Topology::Pm1, vec![(0.0, 500.0), (0.5, 2000.0)])).unwrap();
        assert_eq!(s.lines, vec![predict::Line { freq_hz: 2000.0, amplitude: 0.5 }]);
        let s = predict_patch(&mk(Topology::FmStack, vec![(0.8, 440.0)])).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(predict_patch(&mk(Topology::FmFeedback, vec![(1.0, 500.0)])), Err(CliError::Usage(_))));
        assert!(matches!(predict_patch(&mk(Topology::FmStackNaive, vec![(1.0, 500.0)])), Err(CliError::Usage(_))));
        assert!(matches!(predict_patch(&mk(Topology::FmStack, vec![(1.0, 500.0); 4])), Err(CliError::Usage(_))));
    }

    #[test]
    fn usage_errors_are_one_line() {
        for args in [
            &["render"][..],
            &["render", "--topology", "fm-stack", "--op", "1:500"],
            &["bogus"],
            &["spectrum", "--topology", "pm1", "--op", "nope", "--out", "/tmp/x.csv"],
            &["render", "--topology", "pm2", "--op", "1:500", "--out", "/tmp/never.wav"],
        ] {
            let (code, _, err) = run_args(args);
            assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
            assert_eq!(err.lines().count(), 1, "{err}");
            assert!(err.contains("usage: hofm"));
        }
        assert!(!Path::new("/tmp/never.wav").exists());
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("drift-demo"));
    }

    #[test]
    fn drift_demo_rejects_pm() {
        let (code, _, _) = run_args(&["drift-demo", "--topology", "pm2", "--op", "3:500", "--op", "2:500", "--op", "1:500"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
