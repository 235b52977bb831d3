use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mzsim::algebra::{state_norm, PhotonState};
use mzsim::circuit::{
    builtin_scenario, parse_bytes, parse_real, serialize, validate, Circuit, Scenario,
};
use mzsim::field::{run_classical, SimGrid, Variant, MAX_DEFLECTION};
use mzsim::quantum::{mirror_weights, propagate};
use mzsim::spectral::{compare_weights, present_peaks, ComparisonReport, Spectrum};
use mzsim::WeightTable;
use serde::Serialize;

use crate::output::write_outputs;
use crate::{Engine, Format, RunArgs, VariantArg, Witness};

pub enum Failure {
    /// Positioned circuit diagnostics, already formatted.
    Diagnostics(Vec<String>),
    Config(String),
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub source: String,
    pub phi: Option<f64>,
    pub engine: Engine,
    pub witness: Witness,
    pub variant: VariantArg,
    pub duration: f64,
    pub rate: f64,
    pub ny: usize,
    pub ylim: f64,
    pub eps: Option<f64>,
    pub window: usize,
}

#[derive(Debug, Default, Serialize)]
pub struct WeightsSection {
    pub quantum: Option<Vec<(String, f64)>>,
    pub delta_i: Option<Vec<(String, f64)>>,
    pub i_total: Option<Vec<(String, f64)>>,
}

#[derive(Debug, Default, Serialize)]
pub struct PeaksSection {
    pub delta_i: Option<Vec<String>>,
    pub i_total: Option<Vec<String>>,
}

#[derive(Debug, Default, Serialize)]
pub struct SpectraSection {
    pub delta_i: Option<Vec<[f64; 2]>>,
    pub i_total: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize)]
pub struct QuantumSection {
    /// Detector amplitudes as `(tag, re, im)`.
    pub amplitudes: Vec<(String, f64, f64)>,
    pub norm: f64,
    pub lost_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    /// Which classical witness the quantum weights were compared with.
    pub witness: Witness,
    #[serde(flatten)]
    pub report: ComparisonReport,
}

/// Everything written to `report.json`.
#[derive(Debug, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub circuit_text: String,
    pub mirrors: Vec<(String, f64)>,
    pub quantum: Option<QuantumSection>,
    pub weights: WeightsSection,
    pub peaks: PeaksSection,
    pub spectra: SpectraSection,
    pub comparison: Option<Comparison>,
    pub warnings: Vec<String>,
}

fn load_circuit(args: &RunArgs) -> Result<(Circuit, String), Failure> {
    match &args.circuit {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
            let circuit = parse_bytes(&bytes).map_err(|diags| {
                Failure::Diagnostics(
                    diags
                        .iter()
                        .map(|d| format!("{}:{d}", path.display()))
                        .collect(),
                )
            })?;
            Ok((circuit, path.display().to_string()))
        }
        None => {
            let which = args.scenario.unwrap_or(Scenario::A);
            Ok((builtin_scenario(which), format!("scenario {which}")))
        }
    }
}

fn grid_of(args: &RunArgs) -> SimGrid {
    SimGrid {
        n_y: args.ny,
        half_width: args.ylim,
        duration: args.duration,
        sample_rate: args.rate,
    }
}

fn series_energy(samples: &[f64], dt: f64) -> f64 {
    samples.iter().map(|v| v * v).sum::<f64>() * dt
}

fn pairs(s: &Spectrum) -> Vec<[f64; 2]> {
    s.frequencies
        .iter()
        .zip(&s.values)
        .map(|(f, v)| [*f, *v])
        .collect()
}

fn amplitudes(state: &PhotonState) -> Vec<(String, f64, f64)> {
    state
        .terms()
        .map(|(ket, a)| (ket.tag.to_string(), a.re, a.im))
        .collect()
}

/// Runs the simulation described by `args` and produces the report. No files
/// are touched.
pub fn simulate(args: &RunArgs) -> Result<Report, Failure> {
    let (mut circuit, source) = load_circuit(args)?;
    let phi = match &args.phi {
        Some(text) => Some(
            parse_real(text)
                .map_err(|d| config(format!("invalid --phi '{text}': {}", d.message)))?,
        ),
        None => None,
    };
    if let Some(phi) = phi {
        circuit = circuit.with_phase(phi).map_err(|e| config(e.to_string()))?;
    }
    if let Some(eps) = args.eps {
        if !(eps.is_finite() && eps > 0.0 && eps <= MAX_DEFLECTION) {
            return Err(config(format!(
                "--eps must lie in (0, {MAX_DEFLECTION}], got {eps}"
            )));
        }
        circuit = circuit.with_mirror_amplitude(eps);
    }
    if args.window == 0 {
        return Err(config("--window must be at least 1"));
    }
    let mut warnings: Vec<String> = Vec::new();
    let diags = validate(&circuit);
    let errors: Vec<String> = diags
        .iter()
        .filter(|d| d.is_error())
        .map(|d| format!("{source}:{d}"))
        .collect();
    if !errors.is_empty() {
        return Err(Failure::Diagnostics(errors));
    }
    warnings.extend(diags.iter().map(|d| format!("{source}:{d}")));

    let mirrors: Vec<(String, f64)> = circuit
        .mirrors()
        .map(|m| (m.name.clone(), m.frequency_hz))
        .collect();
    let mut weights = WeightsSection::default();
    let mut quantum = None;
    let mut q_table: Option<WeightTable> = None;
    if args.engine != Engine::Classical {
        let state = propagate(&circuit, None).map_err(|e| config(e.to_string()))?;
        let table = mirror_weights(&state, &circuit).map_err(|e| config(e.to_string()))?;
        quantum = Some(QuantumSection {
            amplitudes: amplitudes(&state),
            norm: state_norm(&state),
            lost_norm: state.lost_norm,
        });
        weights.quantum = Some(table.entries.clone());
        q_table = Some(table);
    }

    let mut peaks = PeaksSection::default();
    let mut spectra = SpectraSection::default();
    let mut comparison = None;
    if args.engine != Engine::Quantum {
        let variant = match args.variant {
            VariantArg::Exact => Variant::Exact,
            VariantArg::Paraxial => Variant::Paraxial,
        };
        let run = run_classical(&circuit, None, &grid_of(args), variant, args.window)
            .map_err(|e| config(e.to_string()))?;
        let want_delta = args.witness != Witness::ITotal;
        let want_total = args.witness != Witness::DeltaI;
        if want_delta {
            let reference = series_energy(&run.intensity.samples, run.intensity.dt);
            peaks.delta_i = Some(present_peaks(&run.delta_i_weights.weights, reference));
            weights.delta_i = Some(run.delta_i_weights.weights.entries.clone());
            spectra.delta_i = Some(pairs(&run.delta_i_spectrum));
            warnings.extend(
                run.delta_i_weights
                    .warnings
                    .iter()
                    .map(|w| format!("delta-i: {w}")),
            );
        }
        if want_total {
            peaks.i_total = Some(present_peaks(
                &run.i_total_weights.weights,
                run.i_total_spectrum.energy(),
            ));
            weights.i_total = Some(run.i_total_weights.weights.entries.clone());
            spectra.i_total = Some(pairs(&run.i_total_spectrum));
            warnings.extend(
                run.i_total_weights
                    .warnings
                    .iter()
                    .map(|w| format!("i-total: {w}")),
            );
        }
        if let Some(q) = &q_table {
            let (witness, table) = if want_total {
                (Witness::ITotal, &run.i_total_weights.weights)
            } else {
                (Witness::DeltaI, &run.delta_i_weights.weights)
            };
            let report = compare_weights(q, table).map_err(|e| config(e.to_string()))?;
            comparison = Some(Comparison { witness, report });
        }
    }

    let report = Report {
        config: ConfigEcho {
            source,
            phi: circuit.phase_parameter(),
            engine: args.engine,
            witness: args.witness,
            variant: args.variant,
            duration: args.duration,
            rate: args.rate,
            ny: args.ny,
            ylim: args.ylim,
            eps: args.eps,
            window: args.window,
        },
        circuit_text: serialize(&circuit),
        mirrors,
        quantum,
        weights,
        peaks,
        spectra,
        comparison,
        warnings,
    };
    Ok(report)
}

fn summary(report: &Report, written: &[PathBuf]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "source: {}", report.config.source);
    if let Some(phi) = report.config.phi {
        let _ = writeln!(s, "phi: {phi}");
    }
    if let Some(q) = &report.quantum {
        let _ = writeln!(
            s,
            "detector state (norm {:.6}, lost {:.6}):",
            q.norm, q.lost_norm
        );
        for (tag, re, im) in &q.amplitudes {
            let _ = writeln!(s, "  |{tag}>  {re:+.6} {im:+.6}i");
        }
    }
    let header = ["mirror", "quantum", "delta-i", "i-total"];
    let _ = writeln!(
        s,
        "{:<8} {:>14} {:>14} {:>14}",
        header[0], header[1], header[2], header[3]
    );
    let cell = |t: &Option<Vec<(String, f64)>>, i: usize| match t {
        Some(v) => format!("{:>14.6e}", v[i].1),
        None => format!("{:>14}", "-"),
    };
    for (i, (name, _)) in report.mirrors.iter().enumerate() {
        let w = &report.weights;
        let _ = writeln!(
            s,
            "{name:<8} {} {} {}",
            cell(&w.quantum, i),
            cell(&w.delta_i, i),
            cell(&w.i_total, i)
        );
    }
    if let Some(p) = &report.peaks.delta_i {
        let _ = writeln!(s, "delta-i peaks: [{}]", p.join(", "));
    }
    if let Some(p) = &report.peaks.i_total {
        let _ = writeln!(s, "i-total peaks: [{}]", p.join(", "));
    }
    if let Some(c) = &report.comparison {
        let w = match c.witness {
            Witness::DeltaI => "delta-i",
            _ => "i-total",
        };
        let _ = writeln!(
            s,
            "max deviation (quantum vs {w}): {:.6e}",
            c.report.max_deviation
        );
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for p in written {
        let _ = writeln!(s, "wrote {}", p.display());
    }
    s
}

fn formats(args: &RunArgs) -> Vec<Format> {
    let mut f = args.format.clone();
    if f.is_empty() && args.out.is_some() {
        f = vec![Format::Csv, Format::Json];
    }
    f.sort();
    f.dedup();
    f
}

pub fn execute(args: &RunArgs) -> Result<String, Failure> {
    let report = simulate(args)?;
    let formats = formats(args);
    let written = if formats.is_empty() {
        Vec::new()
    } else {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        write_outputs(Path::new(&dir), &report, &formats, args.log)
            .map_err(|e| config(format!("writing outputs to {}: {e}", dir.display())))?
    };
    Ok(summary(&report, &written))
}
