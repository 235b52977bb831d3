//! Canonical `.mzi` text.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::algebra::Element;

use super::Circuit;

/// Formats a real so that the parser reads back the identical `f64`.
pub fn format_real(v: f64) -> String {
    const NAMED: [(f64, &str); 4] = [
        (PI, "pi"),
        (-PI, "-pi"),
        (PI / 2.0, "pi/2"),
        (-PI / 2.0, "-pi/2"),
    ];
    if let Some((_, s)) = NAMED.iter().find(|(x, _)| *x == v) {
        return (*s).to_string();
    }
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Canonical text: `source` first, one element per line, `detect` last, LF endings.
pub fn serialize(circuit: &Circuit) -> String {
    let l = |id| circuit.label(id);
    let mut out = String::new();
    let _ = writeln!(out, "source {}", l(circuit.source));
    for el in &circuit.elements {
        let _ = match el {
            Element::BeamSplitter(bs) => writeln!(
                out,
                "bs {} in=({},{}) out=({},{}) t={}",
                bs.name,
                bs.inputs[0].map(l).unwrap_or(""),
                bs.inputs[1].map(l).unwrap_or(""),
                l(bs.outputs[0]),
                l(bs.outputs[1]),
                format_real(bs.transmission)
            ),
            Element::Mirror(m) => {
                let _ = write!(
                    out,
                    "mirror {} path={} freq={} amp={}",
                    m.name,
                    l(m.path),
                    format_real(m.frequency_hz),
                    format_real(m.amplitude)
                );
                if m.phase != 0.0 {
                    let _ = write!(out, " phase={}", format_real(m.phase));
                }
                writeln!(out)
            }
            Element::PhaseShift { path, phi } => {
                writeln!(out, "phase path={} phi={}", l(*path), format_real(*phi))
            }
            Element::Block { path } => writeln!(out, "block path={}", l(*path)),
            Element::Discard { path } => writeln!(out, "discard {}", l(*path)),
        };
    }
    let _ = writeln!(out, "detect {}", l(circuit.detector));
    out
}
