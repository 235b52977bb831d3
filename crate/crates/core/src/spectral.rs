//! One-sided discrete spectra, mirror peak weights and engine comparison.
//!
//! Transforms use `X_k = Δt · Σ_n x_n e^{-2πikn/N}` and fold negative
//! frequencies onto positive ones, so `Σ_k S_k Δf = Σ_n |x_n|² Δt` exactly.
//! No window function is applied: grids are built so that every mirror
//! frequency falls on a bin.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::field::TimeSeries;
use crate::weights::WeightTable;

/// Tolerance (in bins) before a frequency counts as off-bin.
pub const OFF_BIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("cannot transform an empty series")]
    Empty,
    #[error("sample interval {0} is not positive")]
    BadInterval(f64),
    #[error(
        "mirror '{label}' frequency {freq} Hz is at or above the Nyquist frequency {nyquist} Hz"
    )]
    AboveNyquist {
        label: String,
        freq: f64,
        nyquist: f64,
    },
    #[error("mirror '{label}' frequency {freq} Hz is not positive")]
    NonPositiveFrequency { label: String, freq: f64 },
    #[error("weight tables have different mirror sets: {0:?} vs {1:?}")]
    LabelMismatch(Vec<String>, Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Bin centres from 0 Hz to Nyquist.
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    /// Bin width Δf in Hz.
    pub resolution: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ S_k Δf`.
    pub fn energy(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.resolution
    }

    pub fn nyquist(&self) -> f64 {
        self.frequencies.last().copied().unwrap_or(0.0)
    }

    /// Value of the bin nearest to `freq`.
    pub fn at(&self, freq: f64) -> f64 {
        let k = (freq / self.resolution).round();
        if k < 0.0 {
            return 0.0;
        }
        self.values.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Largest value excluding the 0 Hz bin.
    pub fn max_non_dc(&self) -> f64 {
        self.values.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

/// Plans a forward transform of length `n`; plans are shareable across threads.
pub(crate) fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

/// Transforms `buf` in place and returns the folded one-sided power
/// `|X_k|² + |X_{N-k}|²` for `k = 0..=N/2`.
pub(crate) fn one_sided_power(fft: &dyn Fft<f64>, buf: &mut [Complex64], dt: f64) -> Vec<f64> {
    let n = buf.len();
    fft.process(buf);
    let scale = dt * dt;
    let half = n / 2;
    let mut out = Vec::with_capacity(half + 1);
    out.push(buf[0].norm_sqr() * scale);
    for k in 1..=half {
        let mirror = n - k;
        let p = if mirror == k {
            buf[k].norm_sqr()
        } else {
            buf[k].norm_sqr() + buf[mirror].norm_sqr()
        };
        out.push(p * scale);
    }
    out
}

pub(crate) fn bins(n: usize, dt: f64) -> (Vec<f64>, f64) {
    let df = 1.0 / (n as f64 * dt);
    ((0..=n / 2).map(|k| k as f64 * df).collect(), df)
}

/// Parseval-normalised one-sided power spectrum of a real series.
pub fn power_spectrum(series: &TimeSeries) -> Result<Spectrum, SpectralError> {
    let n = series.samples.len();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    if series.dt.is_nan() || series.dt <= 0.0 {
        return Err(SpectralError::BadInterval(series.dt));
    }
    let mut buf: Vec<Complex64> = series
        .samples
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let values = one_sided_power(plan(n).as_ref(), &mut buf, series.dt);
    let (frequencies, resolution) = bins(n, series.dt);
    Ok(Spectrum {
        frequencies,
        values,
        resolution,
    })
}

/// Result of [`extract_peak_weights`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakWeights {
    pub weights: WeightTable,
    pub warnings: Vec<String>,
}

/// Integrates `±window` bins around each mirror frequency (`w = Σ S_k Δf`).
/// The 0 Hz bin is never included.
pub fn extract_peak_weights(
    spectrum: &Spectrum,
    mirror_freqs: &[(String, f64)],
    window: usize,
) -> Result<PeakWeights, SpectralError> {
    let nyquist = spectrum.nyquist();
    let last = spectrum.len().saturating_sub(1);
    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(mirror_freqs.len());
    let mut centres = Vec::with_capacity(mirror_freqs.len());
    for (label, freq) in mirror_freqs {
        if freq.is_nan() || *freq <= 0.0 {
            return Err(SpectralError::NonPositiveFrequency {
                label: label.clone(),
                freq: *freq,
            });
        }
        if *freq >= nyquist {
            return Err(SpectralError::AboveNyquist {
                label: label.clone(),
                freq: *freq,
                nyquist,
            });
        }
        let pos = freq / spectrum.resolution;
        let centre = pos.round() as usize;
        if (pos - centre as f64).abs() > OFF_BIN_TOLERANCE {
            warnings.push(format!(
                "mirror '{label}' frequency {freq} Hz is off-bin by {:.3e} bins",
                pos - centre as f64
            ));
        }
        let lo = centre.saturating_sub(window).max(1);
        let hi = (centre + window).min(last);
        let w: f64 = if lo <= hi {
            spectrum.values[lo..=hi].iter().sum::<f64>() * spectrum.resolution
        } else {
            0.0
        };
        entries.push((label.clone(), w));
        centres.push(centre);
    }
    let mut non_separable = false;
    for i in 0..centres.len() {
        for j in 0..i {
            if centres[i].abs_diff(centres[j]) <= 2 * window {
                non_separable = true;
                warnings.push(format!(
                    "mirrors '{}' and '{}' have overlapping peak windows",
                    mirror_freqs[j].0, mirror_freqs[i].0
                ));
            }
        }
    }
    Ok(PeakWeights {
        weights: WeightTable {
            entries,
            lost_norm: 0.0,
            non_separable,
        },
        warnings,
    })
}

/// A mirror's peak counts as present when its weight is at least this
/// fraction of the largest mirror weight...
pub const PEAK_RELATIVE_THRESHOLD: f64 = 1e-6;
/// ...and at least this fraction of the reference energy of the signal.
pub const PEAK_FLOOR: f64 = 1e-12;

/// Mirrors whose peaks stand out of the numerical floor. `reference_energy`
/// sets the absolute scale (e.g. the total field energy).
pub fn present_peaks(weights: &WeightTable, reference_energy: f64) -> Vec<String> {
    let max = weights.entries.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    let floor = PEAK_FLOOR * reference_energy.abs();
    weights
        .entries
        .iter()
        .filter(|(_, w)| *w >= PEAK_RELATIVE_THRESHOLD * max && *w > floor)
        .map(|(l, _)| l.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub mirror: String,
    pub quantum: f64,
    pub classical: f64,
    pub quantum_normalized: f64,
    pub classical_normalized: f64,
    /// `|q̂ - ĉ|` of the unit-sum normalised weights.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub max_deviation: f64,
}

/// Compares two weight tables after normalising each to unit sum.
pub fn compare_weights(
    q: &WeightTable,
    c: &WeightTable,
) -> Result<ComparisonReport, SpectralError> {
    let mut ql: Vec<String> = q.labels().map(String::from).collect();
    let mut cl: Vec<String> = c.labels().map(String::from).collect();
    ql.sort();
    cl.sort();
    if ql != cl || ql.windows(2).any(|w| w[0] == w[1]) {
        return Err(SpectralError::LabelMismatch(ql, cl));
    }
    let (qn, cn) = (q.normalized(), c.normalized());
    let rows: Vec<ComparisonRow> = q
        .entries
        .iter()
        .map(|(label, qw)| {
            let qv = qn.get(label).unwrap_or(0.0);
            let cv = cn.get(label).unwrap_or(0.0);
            ComparisonRow {
                mirror: label.clone(),
                quantum: *qw,
                classical: c.get(label).unwrap_or(0.0),
                quantum_normalized: qv,
                classical_normalized: cv,
                deviation: (qv - cv).abs(),
            }
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(ComparisonReport {
        rows,
        max_deviation,
    })
}
