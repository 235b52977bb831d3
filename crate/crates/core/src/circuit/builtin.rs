//! The nested interferometer with five vibrating mirrors in its three
//! standard configurations.
//!
//! Mirror E physically sits on the outer arm `b` before the inner
//! interferometer; it is placed after the inner recombination here so that
//! mirrors are declared in A, B, C, E, F order. Every photon reaching the
//! detector via arm `b` passes both positions, so detected amplitudes and
//! path mirror sets are unchanged.

use std::fmt;
use std::str::FromStr;

use super::{parse, Circuit};

/// Default mirror frequencies (Hz) and deflection amplitude (waist units).
/// These are simulation defaults chosen to sit on exact 1 Hz bins.
pub const MIRROR_FREQUENCIES: [(&str, f64); 5] = [
    ("A", 230.0),
    ("B", 250.0),
    ("C", 270.0),
    ("E", 290.0),
    ("F", 310.0),
];
pub const MIRROR_AMPLITUDE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// φ = π, both outer arms open.
    A,
    /// φ = 0, both outer arms open.
    B,
    /// φ = 0, lower arm `c` blocked.
    C,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::A, Scenario::B, Scenario::C];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Scenario::A),
            "b" => Ok(Scenario::B),
            "c" => Ok(Scenario::C),
            _ => Err(format!("unknown scenario '{s}' (expected a, b or c)")),
        }
    }
}

/// `.mzi` text of a built-in scenario.
pub fn builtin_source(which: Scenario) -> String {
    let phi = match which {
        Scenario::A => "pi",
        Scenario::B | Scenario::C => "0",
    };
    let block = match which {
        Scenario::C => "block path=c\n",
        _ => "",
    };
    let m = |name: &str, path: &str| {
        let f = MIRROR_FREQUENCIES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| *f)
            .unwrap_or_default();
        format!("mirror {name} path={path} freq={f} amp={MIRROR_AMPLITUDE}\n")
    };
    format!(
        "# nested Mach-Zehnder interferometer, scenario ({which})\n\
         source c\n\
         bs BS1 in=(c,) out=(c,b) t=1/sqrt(3)\n\
         bs BS2 in=(b,) out=(b,a) t=1/sqrt(2)\n\
         {A}{B}{C}{block}\
         phase path=a phi={phi}\n\
         bs BS3 in=(b,a) out=(b,a) t=1/sqrt(2)\n\
         discard a\n\
         {E}{F}\
         bs BS4 in=(c,b) out=(c,b) t=1/sqrt(3)\n\
         discard b\n\
         detect c\n",
        A = m("A", "a"),
        B = m("B", "b"),
        C = m("C", "c"),
        E = m("E", "b"),
        F = m("F", "b"),
    )
}

pub fn builtin_scenario(which: Scenario) -> Circuit {
    parse(&builtin_source(which)).expect("built-in circuits are valid")
}
