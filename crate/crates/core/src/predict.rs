//! Analytic line spectra of first- and second-order modulation.
//!
//! Every predicted line is a cosine at zero phase, so lines that land on the
//! same frequency add with their signs, and a line at negative frequency
//! folds onto `|f|` unchanged (`cos(-x) = cos(x)`).
//!
//! Second order treats the modulator `z1 sin(θ1(t))` as a sum of sines: each
//! inner sideband `k` is a sine at `fm1 + k fm0` with index `z1 J_k(z0)`.
//! The carrier spectrum is the convolution of one Jacobi-Anger series per
//! inner sideband, so a multi-index `(n_k)` contributes
//! `Π J_{n_k}(z1 J_k(z0))` at `fc + Σ n_k (fm1 + k fm0)`.

use std::collections::BTreeMap;

use crate::bessel::bessel_row;
use crate::error::{Error, Result};

/// Frequencies closer than this are the same line.
pub const COINCIDENT_HZ: f64 = 1e-9;

/// Merged amplitudes smaller than this are treated as cancelled.
pub const ZERO_AMPLITUDE: f64 = 1e-15;

/// Upper bound on multiply-accumulate steps in a second-order expansion.
pub const TERM_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub freq_hz: f64,
    pub amplitude: f64,
}

/// Cosine-phase partials at non-negative, strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineSpectrum {
    pub lines: Vec<Line>,
}

impl LineSpectrum {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Signed amplitude of the line at `freq_hz`, or 0 if there is none.
    pub fn amplitude_at(&self, freq_hz: f64) -> f64 {
        self.lines
            .iter()
            .find(|l| (l.freq_hz - freq_hz).abs() <= 1e-6)
            .map_or(0.0, |l| l.amplitude)
    }

    /// Mean-square power: `a^2` for DC, `a^2 / 2` otherwise.
    pub fn power(&self) -> f64 {
        self.lines
            .iter()
            .map(|l| if l.freq_hz == 0.0 { l.amplitude * l.amplitude } else { 0.5 * l.amplitude * l.amplitude })
            .sum()
    }

    pub fn scaled(mut self, gain: f64) -> Self {
        self.lines.iter_mut().for_each(|l| l.amplitude *= gain);
        self.lines.retain(|l| l.amplitude != 0.0);
        self
    }

    /// Drops lines with `|amplitude| < floor`.
    pub fn pruned(mut self, floor: f64) -> Self {
        self.lines.retain(|l| l.amplitude.abs() >= floor);
        self
    }
}

/// How much of the second-order expansion to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Inner sidebands `k` in `[-K, K]`.
    pub inner_sidebands: usize,
    /// Lines below this absolute amplitude are discarded.
    pub amplitude_floor: f64,
}

impl TruncationPolicy {
    pub const DEFAULT_FLOOR: f64 = 1e-6;

    /// `K = ceil(z0) + 8` with a `1e-6` floor.
    pub fn auto(z0: f64) -> Self {
        Self { inner_sidebands: z0.abs().ceil() as usize + 8, amplitude_floor: Self::DEFAULT_FLOOR }
    }
}

/// Folds negative frequencies, merges coincident lines and drops cancelled ones.
pub fn merge_and_fold(raw: &[(f64, f64)]) -> LineSpectrum {
    let mut folded: Vec<(f64, f64)> = raw.iter().map(|&(f, a)| (f.abs(), a)).collect();
    // Ties broken by amplitude so the summation order depends only on the set of lines.
    folded.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let mut lines: Vec<Line> = Vec::new();
    let mut group_start = f64::NEG_INFINITY;
    for (f, a) in folded {
        match lines.last_mut() {
            Some(last) if f - group_start <= COINCIDENT_HZ => last.amplitude += a,
            _ => {
                group_start = f;
                lines.push(Line { freq_hz: f, amplitude: a });
            }
        }
    }
    lines.retain(|l| l.amplitude.abs() >= ZERO_AMPLITUDE);
    LineSpectrum { lines }
}

/// Sideband orders worth expanding for index `z`: the largest `n` with
/// `|J_n(z)| >= floor * 1e-3`.
pub fn sideband_extent(z: f64, floor: f64) -> usize {
    let z = z.abs();
    if z == 0.0 {
        return 0;
    }
    let row = bessel_row(z.ceil() as usize + 60, z);
    let threshold = floor * 1e-3;
    row.iter().rposition(|j| j.abs() >= threshold).unwrap_or(0)
}

fn signed_row(max_order: usize, z: f64) -> impl Fn(i64) -> f64 {
    let row = bessel_row(max_order, z);
    move |n: i64| {
        let v = row[n.unsigned_abs() as usize];
        if n < 0 && n % 2 != 0 {
            -v
        } else {
            v
        }
    }
}

/// First-order spectrum: `J_n(z)` at `fc + n fm` for `|n| <= max_sideband`.
pub fn predict_first_order(fc: f64, fm: f64, z: f64, max_sideband: usize) -> Result<LineSpectrum> {
    if !(fm > 0.0) {
        return Err(Error::invalid(format!("modulation frequency must be positive, got {fm}")));
    }
    let j = signed_row(max_sideband, z);
    let m = max_sideband as i64;
    let raw: Vec<(f64, f64)> = (-m..=m).map(|n| (fc + n as f64 * fm, j(n))).collect();
    Ok(merge_and_fold(&raw))
}

fn freq_key(f: f64) -> i64 {
    (f * 1e9).round() as i64
}

/// Truncated second-order spectrum of `cos(2π fc t + z1 sin(2π fm1 t + z0 sin(2π fm0 t)))`.
pub fn predict_second_order(
    fc: f64,
    fm0: f64,
    fm1: f64,
    z0: f64,
    z1: f64,
    policy: &TruncationPolicy,
) -> Result<LineSpectrum> {
    if !(fm0 > 0.0) || !(fm1 > 0.0) {
        return Err(Error::invalid(format!("modulation frequencies must be positive, got {fm0}, {fm1}")));
    }
    let floor = policy.amplitude_floor;
    let k_max = policy.inner_sidebands as i64;
    let inner = signed_row(policy.inner_sidebands, z0);

    // Inner sidebands as (frequency, index); zero-frequency sines and zero
    // indices contribute only J_0(.) = 1 and are skipped.
    let components: Vec<(f64, f64)> = (-k_max..=k_max)
        .map(|k| (fm1 + k as f64 * fm0, z1 * inner(k)))
        .filter(|&(psi, a)| psi.abs() > COINCIDENT_HZ && a != 0.0)
        .collect();

    let mut lines: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    lines.insert(freq_key(fc), (fc, 1.0));
    let mut terms = 0usize;
    for (i, &(psi, a)) in components.iter().enumerate() {
        let extent = sideband_extent(a, floor);
        let j = signed_row(extent, a.abs());
        let sign = if a < 0.0 { -1.0 } else { 1.0 };
        let e = extent as i64;
        terms = terms.saturating_add(lines.len().saturating_mul(2 * extent + 1));
        if terms > TERM_BUDGET {
            return Err(Error::BudgetExceeded { limit: TERM_BUDGET });
        }
        let mut next: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for &(f, amp) in lines.values() {
            for n in -e..=e {
                let w = if n % 2 != 0 { sign * j(n) } else { j(n) };
                let nf = f + n as f64 * psi;
                let entry = next.entry(freq_key(nf)).or_insert((nf, 0.0));
                entry.1 += amp * w;
            }
        }
        // Intermediate pruning only; the last stage is pruned after folding.
        if i + 1 < components.len() {
            next.retain(|_, (_, amp)| amp.abs() >= floor);
        }
        lines = next;
    }

    let raw: Vec<(f64, f64)> = lines.into_values().collect();
    Ok(merge_and_fold(&raw).pruned(floor))
}
