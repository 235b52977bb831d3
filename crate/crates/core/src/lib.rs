//! Simulation of nested Mach-Zehnder interferometers whose mirrors vibrate at
//! distinct frequencies, tagging every path a photon can take.
//!
//! Two engines share one circuit description:
//!
//! * [`quantum`] tracks a single photon over (spatial mode × mirror tag)
//!   kets and post-selects on each mirror's tag ([`quantum::mirror_weights`]).
//! * [`field`] builds the classical transverse field at the detector and
//!   derives the quad-cell difference signal `ΔI(t)` and the field spectrum
//!   `I_T(f)`.
//!
//! [`spectral`] turns both into per-mirror weight tables and compares them.
//!
//! ```
//! use mzsim::circuit::{builtin_scenario, Scenario};
//! use mzsim::quantum::{mirror_weights, propagate};
//!
//! let circuit = builtin_scenario(Scenario::A);
//! let state = propagate(&circuit, None).unwrap();
//! let weights = mirror_weights(&state, &circuit).unwrap();
//! assert!((weights.get("E").unwrap() - 4.0 / 9.0).abs() < 1e-12);
//! ```

pub mod algebra;
pub mod circuit;
pub mod field;
pub mod quantum;
pub mod spectral;
mod weights;

pub use weights::WeightTable;
