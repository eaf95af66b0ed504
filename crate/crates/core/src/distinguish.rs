//! Partial distinguishability between the ancilla photon and the signal pair.
//!
//! The ancilla is written as `eta |1>_{t=0} + sqrt(1 - eta^2) |1>_{t=1}`, where
//! slot 0 is the temporal mode shared with the signal photons and slot 1 is
//! orthogonal to it. Unitaries act identically on every slot and detectors
//! sum photon counts across slots, so incoherence only appears when
//! heralded patterns are added.

use num_complex::Complex64;

use crate::elements::{embed_into, ModeUnitary};
use crate::error::{Error, Result};
use crate::fock::{ModeLabel, ModeRegistry, PureState};

/// Default coherence time in femtoseconds.
pub const DEFAULT_TAU_COH_FS: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapParams {
    /// Arrival-time difference in femtoseconds.
    pub delay: f64,
    /// Coherence time in femtoseconds; must be positive.
    pub tau_coh: f64,
}

/// Temporal overlap amplitude between the ancilla and the signal photons.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Overlap(f64);

impl Overlap {
    pub const FULL: Overlap = Overlap(1.0);
    pub const NONE: Overlap = Overlap(0.0);

    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(Error::Domain(format!("overlap {eta} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Product of two independent overlap factors (e.g. spectral and temporal).
    pub fn combined(self, other: Overlap) -> Overlap {
        Overlap(self.0 * other.0)
    }
}

/// Gaussian overlap `exp(-delay^2 / (2 tau^2))`.
pub fn overlap_from_delay(p: OverlapParams) -> Result<Overlap> {
    if !(p.tau_coh > 0.0) || !p.tau_coh.is_finite() {
        return Err(Error::Domain(format!("coherence time {} must be positive", p.tau_coh)));
    }
    let x = p.delay / p.tau_coh;
    Overlap::new((-0.5 * x * x).exp())
}

/// Single ancilla photon in `mode` (slot 0), split over slots 0 and 1
/// according to `eta`. The returned state lives on those two modes only.
pub fn extend_ancilla(mode: ModeLabel, eta: Overlap) -> Result<PureState> {
    if mode.temporal != 0 {
        return Err(Error::Domain(format!("ancilla mode {mode} must be in temporal slot 0")));
    }
    let early = mode;
    let late = mode.at_time(1);
    let registry = ModeRegistry::new([early, late])?.shared();
    let eta = eta.value();
    let a = PureState::basis(registry.clone(), &[(early, 1)])?.scaled(Complex64::new(eta, 0.0));
    let b = PureState::basis(registry, &[(late, 1)])?.scaled(Complex64::new((1.0 - eta * eta).max(0.0).sqrt(), 0.0));
    a.add(&b)
}

/// Every temporal copy of `label`'s channel present in `registry`.
pub fn channel_group(registry: &ModeRegistry, label: ModeLabel) -> Vec<ModeLabel> {
    registry
        .labels()
        .iter()
        .filter(|l| l.same_channel(&label))
        .copied()
        .collect()
}

/// Applies `u` on `targets` (given in slot 0) identically in every temporal
/// slot of `registry` that holds all the target channels.
pub fn embed_all_slots(u: &ModeUnitary, targets: &[ModeLabel], registry: &ModeRegistry) -> Result<ModeUnitary> {
    let slots = registry.labels().iter().map(|l| l.temporal).max().unwrap_or(0);
    let mut acc = ModeUnitary::identity(registry.len());
    let mut applied = false;
    for t in 0..=slots {
        let at: Vec<ModeLabel> = targets.iter().map(|l| l.at_time(t)).collect();
        if at.iter().all(|l| registry.contains(l)) {
            let e = embed_into(u, &at, registry)?;
            acc = crate::elements::compose(&[acc, e])?;
            applied = true;
        }
    }
    if !applied {
        return Err(Error::MissingModes(targets.to_vec()));
    }
    Ok(acc)
}
