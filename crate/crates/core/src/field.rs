//! Classical transverse-field model of the detector output.
//!
//! Each source-to-detector path contributes a Gaussian beam displaced by the
//! sum of the deflections of the mirrors it visits:
//!
//! ```text
//! exact:     Ψ(y,t) = Σ_p a_p · exp(-(y - s_p(t))²)
//! paraxial:  Ψ(y,t) = exp(-y²) · Σ_p a_p · (1 + 2y·s_p(t))
//! s_p(t) = Σ_{X∈p} ε_X sin(2π f_X t + θ_X)
//! ```
//!
//! `y` is measured in beam-waist units. Two detector signals are derived:
//! the quad-cell difference `ΔI(t)` (upper minus lower half) and the
//! spectrum of the field itself, `I_T(f) = ∫|Ψ(y,f)|² dy`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Element, Mirror, ModeId};
use crate::circuit::{Circuit, CircuitError};
use crate::quantum::checked;
use crate::spectral::{
    self, extract_peak_weights, power_spectrum, PeakWeights, SpectralError, Spectrum,
};

/// Largest deflection accepted, in waist units.
pub const MAX_DEFLECTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("grid configuration: {0}")]
    Grid(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalPath {
    /// Product of splitter, phase and block factors along the path.
    pub amplitude: Complex64,
    /// Tag indices of the mirrors visited, increasing.
    pub mirrors: Vec<usize>,
}

impl ClassicalPath {
    pub fn mirror_labels<'a>(&self, circuit: &'a Circuit) -> Vec<&'a str> {
        let all: Vec<&Mirror> = circuit.mirrors().collect();
        self.mirrors
            .iter()
            .filter_map(|&i| all.get(i).map(|m| m.name.as_str()))
            .collect()
    }
}

/// Enumerates every source-to-detector path with its amplitude.
/// Blocked and discarded paths are dropped.
pub fn expand_paths(
    circuit: &Circuit,
    phi: Option<f64>,
) -> Result<Vec<ClassicalPath>, CircuitError> {
    let circuit = checked(circuit, phi)?;
    struct Walker {
        mode: ModeId,
        path: ClassicalPath,
    }
    let mut walkers = vec![Walker {
        mode: circuit.source,
        path: ClassicalPath {
            amplitude: Complex64::new(1.0, 0.0),
            mirrors: Vec::new(),
        },
    }];
    for el in &circuit.elements {
        walkers = match el {
            Element::BeamSplitter(bs) => {
                let t = Complex64::new(bs.transmission, 0.0);
                let r = Complex64::new(0.0, bs.reflection());
                let mut next = Vec::with_capacity(walkers.len() * 2);
                for w in walkers {
                    match bs.inputs.iter().position(|p| *p == Some(w.mode)) {
                        Some(side) => {
                            next.push(Walker {
                                mode: bs.outputs[side],
                                path: ClassicalPath {
                                    amplitude: w.path.amplitude * t,
                                    mirrors: w.path.mirrors.clone(),
                                },
                            });
                            next.push(Walker {
                                mode: bs.outputs[1 - side],
                                path: ClassicalPath {
                                    amplitude: w.path.amplitude * r,
                                    mirrors: w.path.mirrors,
                                },
                            });
                        }
                        None => next.push(w),
                    }
                }
                next
            }
            Element::Mirror(m) => walkers
                .into_iter()
                .map(|mut w| {
                    if w.mode == m.path && !w.path.mirrors.contains(&m.index) {
                        w.path.mirrors.push(m.index);
                        w.path.mirrors.sort_unstable();
                    }
                    w
                })
                .collect(),
            Element::PhaseShift { path, phi } => {
                let f = Complex64::from_polar(1.0, *phi);
                walkers
                    .into_iter()
                    .map(|mut w| {
                        if w.mode == *path {
                            w.path.amplitude *= f;
                        }
                        w
                    })
                    .collect()
            }
            Element::Block { path } | Element::Discard { path } => {
                walkers.into_iter().filter(|w| w.mode != *path).collect()
            }
        };
    }
    Ok(walkers
        .into_iter()
        .filter(|w| w.mode == circuit.detector)
        .map(|w| w.path)
        .collect())
}

/// Uniform sampling of the transverse coordinate and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimGrid {
    /// Number of `y` samples on `[-L, L]`; odd so that `y = 0` is a sample.
    pub n_y: usize,
    /// Half-width `L` in waist units.
    pub half_width: f64,
    /// Record length `T` in seconds.
    pub duration: f64,
    /// Samples per second.
    pub sample_rate: f64,
}

impl Default for SimGrid {
    fn default() -> Self {
        SimGrid {
            n_y: 513,
            half_width: 6.0,
            duration: 1.0,
            sample_rate: 4096.0,
        }
    }
}

impl SimGrid {
    pub fn n_t(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / (self.n_y - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn df(&self) -> f64 {
        1.0 / (self.n_t() as f64 * self.dt())
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dy()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Trapezoid weights over the `y` samples.
    pub fn y_weights(&self) -> Vec<f64> {
        let dy = self.dy();
        (0..self.n_y)
            .map(|j| {
                if j == 0 || j + 1 == self.n_y {
                    0.5 * dy
                } else {
                    dy
                }
            })
            .collect()
    }

    /// Checks the grid against the mirrors it has to resolve.
    pub fn check<'a>(
        &self,
        mirrors: impl IntoIterator<Item = &'a Mirror>,
    ) -> Result<(), FieldError> {
        let bad = |m: String| Err(FieldError::Grid(m));
        if self.n_y < 3 || self.n_y.is_multiple_of(2) {
            return bad(format!("n_y = {} must be odd and at least 3", self.n_y));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return bad(format!("y half-width {} must be positive", self.half_width));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration {} must be positive", self.duration));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample rate {} must be positive", self.sample_rate));
        }
        let samples = self.duration * self.sample_rate;
        if (samples - samples.round()).abs() > 1e-9 * samples.max(1.0) || samples.round() < 2.0 {
            return bad(format!(
                "duration × rate = {samples} must be an integer ≥ 2"
            ));
        }
        for m in mirrors {
            if self.sample_rate < 4.0 * m.frequency_hz {
                return bad(format!(
                    "sample rate {} Hz is below 4 × {} Hz (mirror '{}')",
                    self.sample_rate, m.frequency_hz, m.name
                ));
            }
            let cycles = m.frequency_hz * self.duration;
            if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) {
                return bad(format!(
                    "mirror '{}' frequency {} Hz is not a multiple of 1/T = {} Hz",
                    m.name,
                    m.frequency_hz,
                    1.0 / self.duration
                ));
            }
            if !(m.amplitude.is_finite() && m.amplitude.abs() <= MAX_DEFLECTION) {
                return bad(format!(
                    "mirror '{}' deflection {} exceeds {MAX_DEFLECTION} waist units",
                    m.name, m.amplitude
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exact,
    Paraxial,
}

/// Complex field samples stored row-major, `[t][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFrames {
    pub values: Vec<Complex64>,
    pub grid: SimGrid,
    pub variant: Variant,
}

impl FieldFrames {
    pub fn at(&self, n: usize, j: usize) -> Complex64 {
        self.values[n * self.grid.n_y + j]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.values[n * self.grid.n_y..(n + 1) * self.grid.n_y]
    }

    /// `(Σ_t Σ_y w_y |Ψ|² Δt)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|_, v| v.norm_sqr()).sqrt()
    }

    /// L² distance to `other` on the same grid.
    pub fn l2_distance(&self, other: &FieldFrames) -> f64 {
        self.weighted_sum(|i, v| (v - other.values[i]).norm_sqr())
            .sqrt()
    }

    fn weighted_sum(&self, f: impl Fn(usize, Complex64) -> f64) -> f64 {
        let w = self.grid.y_weights();
        let ny = self.grid.n_y;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| w[i % ny] * f(i, *v))
            .sum::<f64>()
            * self.grid.dt()
    }
}

fn mirror_table<'a>(
    mirrors: &'a [Mirror],
    paths: &[ClassicalPath],
) -> Result<Vec<&'a Mirror>, FieldError> {
    let count = mirrors.iter().map(|m| m.index + 1).max().unwrap_or(0);
    let mut table: Vec<Option<&Mirror>> = vec![None; count];
    for m in mirrors {
        table[m.index] = Some(m);
    }
    for p in paths {
        for &i in &p.mirrors {
            if table.get(i).copied().flatten().is_none() {
                return Err(FieldError::Grid(format!(
                    "path visits undeclared mirror index {i}"
                )));
            }
        }
    }
    Ok(table.into_iter().map(|m| m.unwrap_or(&IDLE)).collect())
}

static IDLE: Mirror = Mirror {
    name: String::new(),
    path: ModeId(0),
    index: 0,
    frequency_hz: 1.0,
    amplitude: 0.0,
    phase: 0.0,
};

/// Samples `Ψ(y,t)` for the given paths.
pub fn synthesize_field(
    paths: &[ClassicalPath],
    grid: &SimGrid,
    mirrors: &[Mirror],
    variant: Variant,
) -> Result<FieldFrames, FieldError> {
    grid.check(mirrors)?;
    let table = mirror_table(mirrors, paths)?;
    let (n_t, n_y) = (grid.n_t(), grid.n_y);
    let ys: Vec<f64> = (0..n_y).map(|j| grid.y(j)).collect();
    let envelope: Vec<f64> = ys.iter().map(|y| (-y * y).exp()).collect();
    let mut values = vec![Complex64::default(); n_t * n_y];
    values.par_chunks_mut(n_y).enumerate().for_each(|(n, row)| {
        let t = grid.t(n);
        let shifts: Vec<f64> = paths
            .iter()
            .map(|p| p.mirrors.iter().map(|&i| table[i].deflection(t)).sum())
            .collect();
        match variant {
            Variant::Exact => {
                for (j, out) in row.iter_mut().enumerate() {
                    let y = ys[j];
                    *out = paths
                        .iter()
                        .zip(&shifts)
                        .map(|(p, s)| p.amplitude * (-(y - s) * (y - s)).exp())
                        .sum();
                }
            }
            Variant::Paraxial => {
                for (j, out) in row.iter_mut().enumerate() {
                    let y = ys[j];
                    let bracket: Complex64 = paths
                        .iter()
                        .zip(&shifts)
                        .map(|(p, s)| p.amplitude * (1.0 + 2.0 * y * s))
                        .sum();
                    *out = bracket * envelope[j];
                }
            }
        }
    });
    Ok(FieldFrames {
        values,
        grid: *grid,
        variant,
    })
}

/// The time-independent part of the field, `exp(-y²) Σ_p a_p`.
pub fn carrier_profile(paths: &[ClassicalPath], grid: &SimGrid) -> Vec<Complex64> {
    let total: Complex64 = paths.iter().map(|p| p.amplitude).sum();
    (0..grid.n_y)
        .map(|j| total * (-grid.y(j) * grid.y(j)).exp())
        .collect()
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    /// Sample interval in seconds.
    pub dt: f64,
}

impl TimeSeries {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quad-cell signal `ΔI(t) = ∫_{y>0}|Ψ|² - ∫_{y<0}|Ψ|²` (trapezoid rule, the
/// `y = 0` sample split evenly between halves so it cancels).
pub fn quad_cell_signal(frames: &FieldFrames) -> TimeSeries {
    let g = &frames.grid;
    let w = g.y_weights();
    let centre = (g.n_y - 1) / 2;
    let samples = (0..g.n_t())
        .into_par_iter()
        .map(|n| {
            let row = frames.row(n);
            (1..=centre)
                .map(|k| w[centre + k] * (row[centre + k].norm_sqr() - row[centre - k].norm_sqr()))
                .sum()
        })
        .collect();
    TimeSeries {
        samples,
        dt: g.dt(),
    }
}

/// Total detected intensity `I(t) = ∫|Ψ|² dy`.
pub fn total_intensity(frames: &FieldFrames) -> TimeSeries {
    let w = frames.grid.y_weights();
    let samples = (0..frames.grid.n_t())
        .into_par_iter()
        .map(|n| {
            frames
                .row(n)
                .iter()
                .zip(&w)
                .map(|(v, w)| w * v.norm_sqr())
                .sum()
        })
        .collect();
    TimeSeries {
        samples,
        dt: frames.grid.dt(),
    }
}

/// `I_T(f) = ∫|Ψ(y,f)|² dy` with the complex field transformed over time at
/// every `y` and negative frequencies folded onto positive ones.
pub fn total_intensity_spectrum(frames: &FieldFrames) -> Spectrum {
    let g = &frames.grid;
    let (n_t, n_y) = (g.n_t(), g.n_y);
    let dt = g.dt();
    let fft = spectral::plan(n_t);
    let columns: Vec<Vec<f64>> = (0..n_y)
        .into_par_iter()
        .map(|j| {
            let mut buf: Vec<Complex64> = (0..n_t).map(|n| frames.values[n * n_y + j]).collect();
            spectral::one_sided_power(fft.as_ref(), &mut buf, dt)
        })
        .collect();
    let w = g.y_weights();
    let (frequencies, resolution) = spectral::bins(n_t, dt);
    let mut values = vec![0.0; frequencies.len()];
    for (col, wj) in columns.iter().zip(&w) {
        for (acc, p) in values.iter_mut().zip(col) {
            *acc += wj * p;
        }
    }
    Spectrum {
        frequencies,
        values,
        resolution,
    }
}

/// L² difference between exact and paraxial fields relative to the L² norm
/// of the paraxial field's time-dependent part.
///
/// The first-order expansion leaves an `O(ε²)` residual against an `O(ε)`
/// modulation, so the ratio falls linearly with ε.
pub fn paraxial_error(
    paths: &[ClassicalPath],
    grid: &SimGrid,
    mirrors: &[Mirror],
) -> Result<f64, FieldError> {
    let exact = synthesize_field(paths, grid, mirrors, Variant::Exact)?;
    let parax = synthesize_field(paths, grid, mirrors, Variant::Paraxial)?;
    let carrier = carrier_profile(paths, grid);
    let mut modulation = parax.clone();
    for (i, v) in modulation.values.iter_mut().enumerate() {
        *v -= carrier[i % grid.n_y];
    }
    Ok(exact.l2_distance(&parax) / modulation.l2_norm())
}

/// Everything the classical engine reports for one circuit.
#[derive(Debug, Clone)]
pub struct ClassicalRun {
    pub paths: Vec<ClassicalPath>,
    pub delta_i: TimeSeries,
    pub intensity: TimeSeries,
    pub delta_i_spectrum: Spectrum,
    pub i_total_spectrum: Spectrum,
    /// Peak weights of `|ΔI(f)|²`.
    pub delta_i_weights: PeakWeights,
    /// Peak weights `w(f_X)` of `I_T(f)`.
    pub i_total_weights: PeakWeights,
}

/// Runs the classical engine end to end.
pub fn run_classical(
    circuit: &Circuit,
    phi: Option<f64>,
    grid: &SimGrid,
    variant: Variant,
    window: usize,
) -> Result<ClassicalRun, FieldError> {
    let paths = expand_paths(circuit, phi)?;
    let mirrors: Vec<Mirror> = circuit.mirrors().cloned().collect();
    let frames = synthesize_field(&paths, grid, &mirrors, variant)?;
    let delta_i = quad_cell_signal(&frames);
    let intensity = total_intensity(&frames);
    let i_total_spectrum = total_intensity_spectrum(&frames);
    drop(frames);
    let delta_i_spectrum = power_spectrum(&delta_i)?;
    let freqs: Vec<(String, f64)> = mirrors
        .iter()
        .map(|m| (m.name.clone(), m.frequency_hz))
        .collect();
    let mut delta_i_weights = extract_peak_weights(&delta_i_spectrum, &freqs, window)?;
    let mut i_total_weights = extract_peak_weights(&i_total_spectrum, &freqs, window)?;
    if !circuit.degenerate_frequencies().is_empty() {
        delta_i_weights.weights.non_separable = true;
        i_total_weights.weights.non_separable = true;
    }
    Ok(ClassicalRun {
        paths,
        delta_i,
        intensity,
        delta_i_spectrum,
        i_total_spectrum,
        delta_i_weights,
        i_total_weights,
    })
}
