//! Circuit IR, validation and the `.mzi` text format.
//!
//! A circuit is a feed-forward list of [`Element`]s acting on named spatial
//! modes. Mirror declaration order fixes the bit order of every
//! [`TagVector`](crate::algebra::TagVector) produced by the circuit.

mod builtin;
mod parse;
mod serialize;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebra::{Element, Mirror, ModeId, MAX_MIRRORS};

pub use builtin::{builtin_scenario, builtin_source, Scenario};
pub use parse::{parse, parse_bytes, parse_real};
pub use serialize::{format_real, serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A positioned message. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line,
            column,
            message: message.into(),
        }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line,
            column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.column, sev, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("circuit has no phase shifter to override")]
    NoPhaseParameter,
    #[error("invalid circuit:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    /// Spatial-mode names, indexed by [`ModeId`].
    pub labels: Vec<String>,
    pub source: ModeId,
    pub detector: ModeId,
    pub elements: Vec<Element>,
}

impl Circuit {
    pub fn label(&self, id: ModeId) -> &str {
        self.labels.get(id.0).map(String::as_str).unwrap_or("?")
    }

    pub fn mode_id(&self, label: &str) -> Option<ModeId> {
        self.labels.iter().position(|l| l == label).map(ModeId)
    }

    /// Mirrors in declaration (tag-bit) order.
    pub fn mirrors(&self) -> impl Iterator<Item = &Mirror> {
        self.elements.iter().filter_map(|e| match e {
            Element::Mirror(m) => Some(m),
            _ => None,
        })
    }

    pub fn mirror_count(&self) -> usize {
        self.mirrors().count()
    }

    /// The phase parameter φ: the value of the first phase shifter.
    pub fn phase_parameter(&self) -> Option<f64> {
        self.elements.iter().find_map(|e| match e {
            Element::PhaseShift { phi, .. } => Some(*phi),
            _ => None,
        })
    }

    /// Copy of the circuit with φ replaced.
    pub fn with_phase(&self, phi: f64) -> Result<Circuit, CircuitError> {
        let mut out = self.clone();
        let slot = out
            .elements
            .iter_mut()
            .find_map(|e| match e {
                Element::PhaseShift { phi, .. } => Some(phi),
                _ => None,
            })
            .ok_or(CircuitError::NoPhaseParameter)?;
        *slot = phi;
        Ok(out)
    }

    /// Copy of the circuit with every mirror's deflection amplitude set to `eps`.
    pub fn with_mirror_amplitude(&self, eps: f64) -> Circuit {
        let mut out = self.clone();
        for e in &mut out.elements {
            if let Element::Mirror(m) = e {
                m.amplitude = eps;
            }
        }
        out
    }

    pub fn count_beam_splitters(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::BeamSplitter(_)))
            .count()
    }

    pub fn count_phase_shifts(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::PhaseShift { .. }))
            .count()
    }

    pub fn count_blocks(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::Block { .. }))
            .count()
    }

    pub fn count_discards(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::Discard { .. }))
            .count()
    }

    /// Mirror frequencies that occur more than once.
    pub fn degenerate_frequencies(&self) -> Vec<f64> {
        let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
        for m in self.mirrors() {
            *seen.entry(m.frequency_hz.to_bits()).or_default() += 1;
        }
        seen.into_iter()
            .filter(|(_, n)| *n > 1)
            .map(|(b, _)| f64::from_bits(b))
            .collect()
    }
}

/// Where a diagnostic attaches.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Site {
    Source,
    Detector,
    Element(usize),
}

/// Checks every circuit invariant. Positions refer to the canonical
/// serialization of `circuit`.
pub fn validate(circuit: &Circuit) -> Vec<Diagnostic> {
    let n = circuit.elements.len();
    check(circuit, &|site| match site {
        Site::Source => (1, 1),
        Site::Element(i) => (i + 2, 1),
        Site::Detector => (n + 2, 1),
    })
}

pub(crate) fn check(circuit: &Circuit, pos: &dyn Fn(Site) -> (usize, usize)) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut err = |site: Site, msg: String| {
        let (l, c) = pos(site);
        diags.push(Diagnostic::error(l, c, msg));
    };
    let known = |id: ModeId| id.0 < circuit.labels.len();
    let name = |id: ModeId| circuit.label(id).to_string();

    let mut dup_labels = BTreeSet::new();
    for (i, l) in circuit.labels.iter().enumerate() {
        if circuit.labels[..i].contains(l) {
            dup_labels.insert(l.clone());
        }
    }
    for l in dup_labels {
        err(
            Site::Source,
            format!("spatial mode '{l}' declared twice in the label table"),
        );
    }

    let mut populated = BTreeSet::new();
    // Blocked paths may still feed a beam splitter as an empty port.
    let mut dark = BTreeSet::new();
    if known(circuit.source) {
        populated.insert(circuit.source);
    } else {
        err(
            Site::Source,
            format!(
                "source refers to undeclared spatial mode #{}",
                circuit.source.0
            ),
        );
    }

    let mut bs_names: HashMap<&str, usize> = HashMap::new();
    let mut mirror_names: HashMap<&str, usize> = HashMap::new();
    let mut mirror_freqs: Vec<(f64, &str)> = Vec::new();
    let mut warnings = Vec::new();
    let mut mirror_ordinal = 0usize;

    for (i, el) in circuit.elements.iter().enumerate() {
        let site = Site::Element(i);
        for p in el.paths() {
            if !known(p) {
                err(site, format!("undeclared spatial mode #{}", p.0));
            }
        }
        match el {
            Element::BeamSplitter(bs) => {
                if let Some(prev) = bs_names.insert(&bs.name, i) {
                    err(
                        site,
                        format!(
                            "beam splitter '{}' already declared (element {})",
                            bs.name,
                            prev + 1
                        ),
                    );
                }
                if !(bs.transmission > 0.0 && bs.transmission <= 1.0) {
                    err(
                        site,
                        format!("transmission t={} must lie in (0, 1]", bs.transmission),
                    );
                }
                let inputs: Vec<ModeId> = bs.inputs.iter().flatten().copied().collect();
                if inputs.is_empty() {
                    err(
                        site,
                        format!("beam splitter '{}' has no connected input", bs.name),
                    );
                }
                if inputs.len() == 2 && inputs[0] == inputs[1] {
                    err(
                        site,
                        format!(
                            "beam splitter '{}' uses path '{}' for both inputs",
                            bs.name,
                            name(inputs[0])
                        ),
                    );
                }
                if bs.outputs[0] == bs.outputs[1] {
                    err(
                        site,
                        format!(
                            "beam splitter '{}' uses path '{}' for both outputs",
                            bs.name,
                            name(bs.outputs[0])
                        ),
                    );
                }
                for o in bs.outputs {
                    if !known(o) {
                        err(site, format!("undeclared spatial mode #{}", o.0));
                    }
                }
                let mut live = 0;
                for p in &inputs {
                    if populated.remove(p) {
                        live += 1;
                    } else if !dark.remove(p) && known(*p) {
                        err(
                            site,
                            format!("path '{}' is not populated at this point", name(*p)),
                        );
                    }
                }
                if live == 0 && !inputs.is_empty() {
                    err(
                        site,
                        format!("no light reaches beam splitter '{}'", bs.name),
                    );
                }
                for o in bs.outputs {
                    dark.remove(&o);
                    if known(o) && !populated.insert(o) && !inputs.contains(&o) {
                        err(
                            site,
                            format!(
                                "output '{}' collides with a path that is already populated",
                                name(o)
                            ),
                        );
                    }
                }
            }
            Element::Mirror(m) => {
                if known(m.path) && !populated.contains(&m.path) {
                    err(
                        site,
                        format!("path '{}' is not populated at this point", name(m.path)),
                    );
                }
                if let Some(prev) = mirror_names.insert(&m.name, i) {
                    err(
                        site,
                        format!(
                            "duplicate mirror '{}' (first declared as element {})",
                            m.name,
                            prev + 1
                        ),
                    );
                }
                if m.index != mirror_ordinal {
                    err(
                        site,
                        format!(
                            "mirror '{}' has tag index {} but is mirror #{}",
                            m.name, m.index, mirror_ordinal
                        ),
                    );
                }
                mirror_ordinal += 1;
                if mirror_ordinal == MAX_MIRRORS + 1 {
                    err(site, format!("more than {MAX_MIRRORS} mirrors"));
                }
                if !(m.frequency_hz.is_finite() && m.frequency_hz > 0.0) {
                    err(
                        site,
                        format!("mirror '{}' frequency must be positive and finite", m.name),
                    );
                }
                if !(m.amplitude.is_finite() && m.amplitude >= 0.0) {
                    err(
                        site,
                        format!(
                            "mirror '{}' amplitude must be nonnegative and finite",
                            m.name
                        ),
                    );
                }
                if !m.phase.is_finite() {
                    err(site, format!("mirror '{}' phase must be finite", m.name));
                }
                if let Some((_, other)) = mirror_freqs.iter().find(|(f, _)| *f == m.frequency_hz) {
                    let (l, c) = pos(site);
                    warnings.push(Diagnostic::warning(
                        l,
                        c,
                        format!(
                            "mirrors '{}' and '{}' share frequency {} Hz: indistinguishable spectral peaks",
                            other,
                            m.name,
                            format_real(m.frequency_hz)
                        ),
                    ));
                }
                mirror_freqs.push((m.frequency_hz, &m.name));
            }
            Element::PhaseShift { path, phi } => {
                if known(*path) && !populated.contains(path) {
                    err(
                        site,
                        format!("path '{}' is not populated at this point", name(*path)),
                    );
                }
                if !phi.is_finite() {
                    err(site, "phase must be finite".to_string());
                }
            }
            Element::Block { path } => {
                if known(*path) && !populated.remove(path) {
                    err(
                        site,
                        format!("path '{}' is not populated at this point", name(*path)),
                    );
                }
                dark.insert(*path);
            }
            Element::Discard { path } => {
                if known(*path) && !populated.remove(path) {
                    err(
                        site,
                        format!("path '{}' is not populated at this point", name(*path)),
                    );
                }
            }
        }
    }

    if !known(circuit.detector) {
        err(
            Site::Detector,
            format!(
                "detector refers to undeclared spatial mode #{}",
                circuit.detector.0
            ),
        );
    } else if !populated.contains(&circuit.detector) {
        err(
            Site::Detector,
            format!(
                "detector path '{}' is never populated",
                name(circuit.detector)
            ),
        );
    }

    diags.extend(warnings);
    diags.sort_by_key(|d| (d.line, d.column, d.severity));
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_validate_cleanly() {
        for s in [Scenario::A, Scenario::B, Scenario::C] {
            assert!(validate(&builtin_scenario(s)).is_empty(), "{s:?}");
        }
    }

    #[test]
    fn duplicate_frequency_is_a_warning() {
        let text = "source c\nmirror A path=c freq=250 amp=0.001\nmirror B path=c freq=250 amp=0.001\ndetect c\n";
        let c = parse(text).unwrap();
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert!(d[0].message.contains("indistinguishable spectral peaks"));
        assert_eq!((d[0].line, d[0].column), (3, 1));
        assert_eq!(c.degenerate_frequencies(), vec![250.0]);
    }

    #[test]
    fn duplicate_mirror_label_is_an_error() {
        let mut c = builtin_scenario(Scenario::A);
        let mut idx = 0;
        for e in &mut c.elements {
            if let Element::Mirror(m) = e {
                if idx == 1 {
                    m.name = "A".into();
                }
                idx += 1;
            }
        }
        let d = validate(&c);
        assert!(d
            .iter()
            .any(|d| d.is_error() && d.message.contains("duplicate mirror 'A'")));
    }

    #[test]
    fn detector_on_unpopulated_path_is_an_error() {
        let mut c = builtin_scenario(Scenario::A);
        c.detector = c.mode_id("a").unwrap();
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert!(d[0].is_error());
        assert!(d[0].message.contains("never populated"));
    }

    #[test]
    fn use_after_discard_is_rejected() {
        let text = "source c\ndiscard c\nphase path=c phi=pi\ndetect c\n";
        let errs = parse(text).unwrap_err();
        assert!(errs
            .iter()
            .any(|d| d.line == 3 && d.message.contains("not populated")));
    }

    #[test]
    fn phase_override() {
        let a = builtin_scenario(Scenario::A);
        assert_eq!(a.phase_parameter(), Some(std::f64::consts::PI));
        assert_eq!(a.with_phase(0.0).unwrap(), builtin_scenario(Scenario::B));
        let bare = parse("source c\ndetect c").unwrap();
        assert_eq!(bare.with_phase(1.0), Err(CircuitError::NoPhaseParameter));
    }
}
