//! Single-photon propagation through a circuit and post-selection on
//! mirror tags.

use thiserror::Error;

use crate::algebra::{apply_element, postselect, AlgebraError, Element, PhotonState};
use crate::circuit::{validate, Circuit, CircuitError, Diagnostic};
use crate::weights::WeightTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub(crate) fn checked(circuit: &Circuit, phi: Option<f64>) -> Result<Circuit, CircuitError> {
    let errors: Vec<Diagnostic> = validate(circuit)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(CircuitError::Invalid(errors));
    }
    match phi {
        Some(phi) => circuit.with_phase(phi),
        None => Ok(circuit.clone()),
    }
}

/// Runs a photon from the source through every element and returns the
/// detector-port state. Modes other than the detector that survive to the
/// end are discarded; their norm goes to `lost_norm`.
pub fn propagate(circuit: &Circuit, phi_override: Option<f64>) -> Result<PhotonState, EngineError> {
    let circuit = checked(circuit, phi_override)?;
    let modes = circuit.labels.len();
    let mut state = PhotonState::single(modes, circuit.mirror_count(), circuit.source)?;
    for el in &circuit.elements {
        state = apply_element(&state, el)?;
    }
    for (i, _) in circuit.labels.iter().enumerate() {
        let mode = crate::algebra::ModeId(i);
        if mode != circuit.detector {
            state = apply_element(&state, &Element::Discard { path: mode })?;
        }
    }
    Ok(state)
}

/// Post-selection weight `|⟨Π_X|ψ⟩|²` for every mirror X.
pub fn mirror_weights(state: &PhotonState, circuit: &Circuit) -> Result<WeightTable, EngineError> {
    let mut entries = Vec::new();
    for m in circuit.mirrors() {
        let (_, w) = postselect(state, m.index)?;
        entries.push((m.name.clone(), w));
    }
    Ok(WeightTable {
        entries,
        lost_norm: state.lost_norm,
        non_separable: !circuit.degenerate_frequencies().is_empty(),
    })
}
