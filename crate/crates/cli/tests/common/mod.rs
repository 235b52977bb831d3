#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use mzsim::algebra::Element;
use mzsim::circuit::Circuit;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn mzsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzsim"))
        .args(args)
        .output()
        .expect("spawn mzsim")
}

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

/// Text of a random circuit that is valid by construction: every element
/// acts on a populated path, splitter outputs never collide, and the
/// detector is live at the end. `lossless` leaves out blocks and discards.
pub fn random_circuit_text(rng: &mut StdRng, lossless: bool) -> String {
    let mut fresh = 0usize;
    let mut new_label = || {
        fresh += 1;
        format!("p{fresh}")
    };
    let mut live = vec![new_label()];
    let mut dark: Vec<String> = Vec::new();
    let mut text = format!("source {}\n", live[0]);
    let mut mirrors = 0usize;
    let mut splitters = 0usize;
    let mut freqs: Vec<u32> = (10..2000).collect();
    freqs.shuffle(rng);
    for _ in 0..rng.gen_range(1..=14) {
        let pick = |rng: &mut StdRng, v: &[String]| v[rng.gen_range(0..v.len())].clone();
        match rng.gen_range(0..6) {
            0 | 1 => {
                let a = pick(rng, &live);
                live.retain(|l| *l != a);
                let mut others: Vec<String> = live.iter().chain(&dark).cloned().collect();
                others.sort();
                let b = if !others.is_empty() && rng.gen_bool(0.6) {
                    Some(pick(rng, &others))
                } else {
                    None
                };
                if let Some(b) = &b {
                    live.retain(|l| l != b);
                    dark.retain(|l| l != b);
                }
                let mut outs = vec![a.clone(), b.clone().unwrap_or_else(&mut new_label)];
                outs.shuffle(rng);
                let ins = match (&b, rng.gen_bool(0.5)) {
                    (Some(b), true) => format!("({b},{a})"),
                    (Some(b), false) => format!("({a},{b})"),
                    (None, _) => format!("({a},)"),
                };
                let t = if rng.gen_bool(0.3) {
                    "1/sqrt(2)".to_string()
                } else {
                    format!("{}", rng.gen_range(0.01..=1.0f64))
                };
                splitters += 1;
                text += &format!(
                    "bs S{splitters} in={ins} out=({},{}) t={t}\n",
                    outs[0], outs[1]
                );
                live.extend(outs);
            }
            2 if mirrors < 10 => {
                let p = pick(rng, &live);
                let f = freqs[mirrors];
                mirrors += 1;
                let amp: f64 = rng.gen_range(1e-4..0.1);
                text += &format!("mirror M{mirrors} path={p} freq={f} amp={amp:e}");
                if rng.gen_bool(0.5) {
                    text += &format!(" phase={}", rng.gen_range(-3.0..3.0f64));
                }
                text.push('\n');
            }
            3 => {
                let p = pick(rng, &live);
                let phi = match rng.gen_range(0..3) {
                    0 => "pi".to_string(),
                    1 => "-pi/2".to_string(),
                    _ => format!("{}", rng.gen_range(-10.0..10.0f64)),
                };
                text += &format!("phase path={p} phi={phi}\n");
            }
            4 if !lossless && live.len() > 1 => {
                let p = pick(rng, &live);
                live.retain(|l| *l != p);
                dark.push(p.clone());
                text += &format!("block path={p}\n");
            }
            5 if !lossless && live.len() > 1 => {
                let p = pick(rng, &live);
                live.retain(|l| *l != p);
                text += &format!("discard {p}\n");
            }
            _ => {}
        }
    }
    let det = live[rng.gen_range(0..live.len())].clone();
    text += &format!("detect {det}\n");
    text
}

/// Index of basis ket `(mode, tag)` in the dense vector.
fn idx(mode: usize, tag: usize, tags: usize) -> usize {
    mode * tags + tag
}

/// Dense matrix of one element on the full `modes × 2^mirrors` space.
fn element_matrix(el: &Element, modes: usize, mirrors: usize) -> DMatrix<Complex64> {
    let tags = 1usize << mirrors;
    let dim = modes * tags;
    let one = Complex64::new(1.0, 0.0);
    let mut m = DMatrix::<Complex64>::identity(dim, dim);
    match el {
        Element::BeamSplitter(bs) => {
            let t = bs.transmission;
            let r = (1.0 - t * t).max(0.0).sqrt();
            for tag in 0..tags {
                for (k, input) in bs.inputs.iter().enumerate() {
                    let Some(input) = input else { continue };
                    let col = idx(input.0, tag, tags);
                    m[(col, col)] = Complex64::default();
                    m[(idx(bs.outputs[k].0, tag, tags), col)] += Complex64::new(t, 0.0);
                    m[(idx(bs.outputs[1 - k].0, tag, tags), col)] += Complex64::new(0.0, r);
                }
            }
        }
        Element::Mirror(mi) => {
            for tag in 0..tags {
                let col = idx(mi.path.0, tag, tags);
                m[(col, col)] = Complex64::default();
                m[(idx(mi.path.0, tag | (1 << mi.index), tags), col)] += one;
            }
        }
        Element::PhaseShift { path, phi } => {
            for tag in 0..tags {
                let c = idx(path.0, tag, tags);
                m[(c, c)] = Complex64::from_polar(1.0, *phi);
            }
        }
        Element::Block { path } | Element::Discard { path } => {
            for tag in 0..tags {
                let c = idx(path.0, tag, tags);
                m[(c, c)] = Complex64::default();
            }
        }
    }
    m
}

/// Detector amplitudes indexed by tag bitmask (bit i = mirror i), computed
/// by multiplying dense element matrices.
pub fn dense_detector_amplitudes(circuit: &Circuit) -> Vec<Complex64> {
    let modes = circuit.labels.len();
    let mirrors = circuit.mirror_count();
    let tags = 1usize << mirrors;
    let mut psi = DVector::<Complex64>::zeros(modes * tags);
    psi[idx(circuit.source.0, 0, tags)] = Complex64::new(1.0, 0.0);
    for el in &circuit.elements {
        psi = element_matrix(el, modes, mirrors) * psi;
    }
    (0..tags)
        .map(|tag| psi[idx(circuit.detector.0, tag, tags)])
        .collect()
}

/// `|Σ_{tag ∋ X} ψ(tag)|²` for each mirror index X.
pub fn dense_weights(circuit: &Circuit) -> Vec<f64> {
    let amps = dense_detector_amplitudes(circuit);
    (0..circuit.mirror_count())
        .map(|x| {
            amps.iter()
                .enumerate()
                .filter(|(t, _)| t & (1 << x) != 0)
                .map(|(_, a)| *a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}
