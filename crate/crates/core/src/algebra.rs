//! Single-photon amplitudes over (spatial mode × frequency tag) kets and the
//! linear element transformations that act on them.
//!
//! A photon entering the interferometer occupies one spatial mode with an
//! all-zero [`TagVector`]. Beam splitters redistribute amplitude between
//! spatial modes, vibrating mirrors set the tag bit of the mirror they
//! represent, phase shifters rotate amplitudes, and blocks/discards remove
//! amplitude from a path (the removed squared norm is accumulated in
//! [`PhotonState::lost_norm`] instead of renormalising).
//!
//! Beam-splitter convention: transmission into the same-side output with the
//! real factor `t`, reflection into the opposite output with `i·r`,
//! `r = sqrt(1 - t²)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Amplitudes with modulus below this are dropped from a [`PhotonState`].
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Largest number of mirrors a tag vector can record.
pub const MAX_MIRRORS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("spatial mode #{mode} is not declared (circuit has {modes} modes)")]
    UnknownMode { mode: usize, modes: usize },
    #[error("tag index {index} out of range for tag length {len}")]
    TagIndexOutOfRange { index: usize, len: usize },
    #[error("beam-splitter transmission {0} is outside (0, 1]")]
    InvalidTransmission(f64),
    #[error("phase {0} is not finite")]
    NonFinitePhase(f64),
    #[error("tag length {0} exceeds the supported maximum of {MAX_MIRRORS}")]
    TooManyMirrors(usize),
    #[error("states live in different mode spaces")]
    SpaceMismatch,
}

/// Index of a spatial mode in a circuit's label table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId(pub usize);

/// Which mirrors have modulated a path. Bit `i` belongs to the `i`-th
/// declared mirror; bits are only ever set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagVector {
    bits: u64,
    len: u8,
}

impl TagVector {
    pub fn zeros(len: usize) -> Result<Self, AlgebraError> {
        if len > MAX_MIRRORS {
            return Err(AlgebraError::TooManyMirrors(len));
        }
        Ok(TagVector {
            bits: 0,
            len: len as u8,
        })
    }

    /// Builds a tag from a bit string such as `"10011"` (leftmost = index 0).
    pub fn from_bits(s: &str) -> Option<Self> {
        if s.len() > MAX_MIRRORS {
            return None;
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(TagVector {
            bits,
            len: s.len() as u8,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> Result<bool, AlgebraError> {
        self.check(index)?;
        Ok(self.bits & (1 << index) != 0)
    }

    pub fn with_set(self, index: usize) -> Result<Self, AlgebraError> {
        self.check(index)?;
        Ok(TagVector {
            bits: self.bits | (1 << index),
            ..self
        })
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Indices of the set bits, in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.bits & (1 << i) != 0)
    }

    fn check(&self, index: usize) -> Result<(), AlgebraError> {
        if index >= self.len() {
            Err(AlgebraError::TagIndexOutOfRange {
                index,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for TagVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bits & (1 << i) != 0 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKet {
    pub mode: ModeId,
    pub tag: TagVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub name: String,
    /// Input ports; `None` is an unconnected (vacuum) port.
    pub inputs: [Option<ModeId>; 2],
    pub outputs: [ModeId; 2],
    /// Amplitude transmission `t`; `t = 1/sqrt(3)` is a 1:2 intensity split.
    pub transmission: f64,
}

impl BeamSplitter {
    pub fn reflection(&self) -> f64 {
        (1.0 - self.transmission * self.transmission)
            .max(0.0)
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mirror {
    pub name: String,
    pub path: ModeId,
    /// Position of this mirror's bit in the tag vector.
    pub index: usize,
    pub frequency_hz: f64,
    /// Peak transverse deflection in beam-waist units.
    pub amplitude: f64,
    /// Deflection phase in radians.
    pub phase: f64,
}

impl Mirror {
    /// Transverse deflection `d(t) = ε·sin(2π f t + θ)`.
    pub fn deflection(&self, t: f64) -> f64 {
        self.amplitude * (std::f64::consts::TAU * self.frequency_hz * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Element {
    BeamSplitter(BeamSplitter),
    Mirror(Mirror),
    PhaseShift {
        path: ModeId,
        phi: f64,
    },
    /// Closed path; amplitude is removed.
    Block {
        path: ModeId,
    },
    /// Output port that is never detected.
    Discard {
        path: ModeId,
    },
}

impl Element {
    /// Spatial modes the element reads.
    pub fn paths(&self) -> Vec<ModeId> {
        match self {
            Element::BeamSplitter(bs) => bs.inputs.iter().flatten().copied().collect(),
            Element::Mirror(m) => vec![m.path],
            Element::PhaseShift { path, .. }
            | Element::Block { path }
            | Element::Discard { path } => vec![*path],
        }
    }
}

/// Sparse single-photon state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonState {
    modes: usize,
    tag_len: usize,
    terms: BTreeMap<BasisKet, Complex64>,
    /// Squared norm removed so far by blocks and discards.
    pub lost_norm: f64,
}

impl PhotonState {
    pub fn empty(modes: usize, tag_len: usize) -> Result<Self, AlgebraError> {
        TagVector::zeros(tag_len)?;
        Ok(PhotonState {
            modes,
            tag_len,
            terms: BTreeMap::new(),
            lost_norm: 0.0,
        })
    }

    /// One photon in `mode` with no tags set.
    pub fn single(modes: usize, tag_len: usize, mode: ModeId) -> Result<Self, AlgebraError> {
        let mut s = Self::empty(modes, tag_len)?;
        let tag = TagVector::zeros(tag_len)?;
        s.insert(BasisKet { mode, tag }, Complex64::new(1.0, 0.0))?;
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn tag_len(&self) -> usize {
        self.tag_len
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisKet, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, ket: &BasisKet) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    /// Adds `amp` to the amplitude of `ket`.
    pub fn insert(&mut self, ket: BasisKet, amp: Complex64) -> Result<(), AlgebraError> {
        self.check_mode(ket.mode)?;
        if ket.tag.len() != self.tag_len {
            return Err(AlgebraError::TagIndexOutOfRange {
                index: ket.tag.len(),
                len: self.tag_len,
            });
        }
        let entry = self.terms.entry(ket).or_default();
        *entry += amp;
        if entry.norm() < PRUNE_THRESHOLD {
            self.terms.remove(&ket);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: Complex64) -> PhotonState {
        let mut out = PhotonState {
            terms: BTreeMap::new(),
            ..*self
        };
        for (k, a) in &self.terms {
            let v = a * factor;
            if v.norm() >= PRUNE_THRESHOLD {
                out.terms.insert(*k, v);
            }
        }
        out
    }

    /// Coherent superposition `self + other` (lost norms are not combined).
    pub fn superpose(&self, other: &PhotonState) -> Result<PhotonState, AlgebraError> {
        if self.modes != other.modes || self.tag_len != other.tag_len {
            return Err(AlgebraError::SpaceMismatch);
        }
        let mut out = self.clone();
        for (k, a) in &other.terms {
            out.insert(*k, *a)?;
        }
        Ok(out)
    }

    /// Terms on `mode` only.
    pub fn restricted_to(&self, mode: ModeId) -> PhotonState {
        PhotonState {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.mode == mode)
                .map(|(k, a)| (*k, *a))
                .collect(),
            ..*self
        }
    }

    fn check_mode(&self, mode: ModeId) -> Result<(), AlgebraError> {
        if mode.0 >= self.modes {
            Err(AlgebraError::UnknownMode {
                mode: mode.0,
                modes: self.modes,
            })
        } else {
            Ok(())
        }
    }

    fn remove_path(&self, path: ModeId) -> PhotonState {
        let mut out = PhotonState {
            terms: BTreeMap::new(),
            ..*self
        };
        let mut removed = 0.0;
        for (k, a) in &self.terms {
            if k.mode == path {
                removed += a.norm_sqr();
            } else {
                out.terms.insert(*k, *a);
            }
        }
        out.lost_norm += removed;
        out
    }

    fn map_path(
        &self,
        path: ModeId,
        f: impl Fn(BasisKet, Complex64) -> (BasisKet, Complex64),
    ) -> PhotonState {
        let mut out = PhotonState {
            terms: BTreeMap::new(),
            ..*self
        };
        for (k, a) in &self.terms {
            let (k2, a2) = if k.mode == path { f(*k, *a) } else { (*k, *a) };
            let e = out.terms.entry(k2).or_default();
            *e += a2;
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }
}

/// Squared norm `Σ|amp|²` of the surviving terms.
pub fn state_norm(state: &PhotonState) -> f64 {
    state.terms.values().map(|a| a.norm_sqr()).sum()
}

/// Applies one optical element to a state.
pub fn apply_element(state: &PhotonState, element: &Element) -> Result<PhotonState, AlgebraError> {
    for p in element.paths() {
        state.check_mode(p)?;
    }
    match element {
        Element::BeamSplitter(bs) => {
            for o in bs.outputs {
                state.check_mode(o)?;
            }
            let t = bs.transmission;
            if !(t > 0.0 && t <= 1.0) {
                return Err(AlgebraError::InvalidTransmission(t));
            }
            let transmit = Complex64::new(t, 0.0);
            let reflect = Complex64::new(0.0, bs.reflection());
            let mut out = PhotonState {
                terms: BTreeMap::new(),
                ..*state
            };
            for (k, a) in &state.terms {
                match bs.inputs.iter().position(|p| *p == Some(k.mode)) {
                    Some(side) => {
                        let same = BasisKet {
                            mode: bs.outputs[side],
                            tag: k.tag,
                        };
                        let cross = BasisKet {
                            mode: bs.outputs[1 - side],
                            tag: k.tag,
                        };
                        *out.terms.entry(same).or_default() += a * transmit;
                        *out.terms.entry(cross).or_default() += a * reflect;
                    }
                    None => *out.terms.entry(*k).or_default() += a,
                }
            }
            out.prune();
            Ok(out)
        }
        Element::Mirror(m) => {
            if m.index >= state.tag_len {
                return Err(AlgebraError::TagIndexOutOfRange {
                    index: m.index,
                    len: state.tag_len,
                });
            }
            Ok(state.map_path(m.path, |k, a| {
                let tag = k
                    .tag
                    .with_set(m.index)
                    .expect("index checked against tag length");
                (BasisKet { tag, ..k }, a)
            }))
        }
        Element::PhaseShift { path, phi } => {
            if !phi.is_finite() {
                return Err(AlgebraError::NonFinitePhase(*phi));
            }
            let factor = Complex64::from_polar(1.0, *phi);
            Ok(state.map_path(*path, |k, a| (k, a * factor)))
        }
        Element::Block { path } | Element::Discard { path } => Ok(state.remove_path(*path)),
    }
}

/// Projection onto all kets whose tag bit `index` is set.
///
/// Returns the coherent amplitude sum and its squared modulus. The projector
/// is unnormalised, so the weight is a detection weight rather than a
/// normalised probability.
pub fn postselect(state: &PhotonState, index: usize) -> Result<(Complex64, f64), AlgebraError> {
    if index >= state.tag_len {
        return Err(AlgebraError::TagIndexOutOfRange {
            index,
            len: state.tag_len,
        });
    }
    let amp: Complex64 = state
        .terms
        .iter()
        .filter(|(k, _)| k.tag.get(index).unwrap_or(false))
        .map(|(_, a)| *a)
        .sum();
    Ok((amp, amp.norm_sqr()))
}
