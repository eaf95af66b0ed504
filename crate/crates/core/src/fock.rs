//! Mode bookkeeping, the Fock basis, and sparse state vectors.
//!
//! A [`ModeRegistry`] fixes a dense index for every optical mode taking part in
//! a computation. States are sparse maps from [`OccupationVector`]s (photon
//! counts per registered mode) to complex amplitudes. Amplitudes whose
//! magnitude falls below [`PRUNE_THRESHOLD`] are dropped after every linear
//! operation, so interference cancellations show up as genuinely absent
//! basis states rather than as round-off residue.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are removed from storage.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Allowed deviation of `norm^2` from one when a state must be normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// One optical mode: a spatial path, a polarization, and a temporal slot.
///
/// Temporal slot 0 is the principal mode; higher slots hold the components of
/// a photon that cannot interfere with photons in slot 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: u32,
    pub polarization: Polarization,
    pub temporal: u32,
}

impl ModeLabel {
    pub const fn new(spatial: u32, polarization: Polarization, temporal: u32) -> Self {
        Self {
            spatial,
            polarization,
            temporal,
        }
    }

    pub const fn h(spatial: u32) -> Self {
        Self::new(spatial, Polarization::H, 0)
    }

    pub const fn v(spatial: u32) -> Self {
        Self::new(spatial, Polarization::V, 0)
    }

    pub const fn at_time(self, temporal: u32) -> Self {
        Self { temporal, ..self }
    }

    pub const fn with_spatial(self, spatial: u32) -> Self {
        Self { spatial, ..self }
    }

    /// True when both labels name the same spatial path and polarization.
    pub fn same_channel(&self, other: &ModeLabel) -> bool {
        self.spatial == other.spatial && self.polarization == other.polarization
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.polarization)?;
        if self.temporal > 0 {
            write!(f, ":t{}", self.temporal)?;
        }
        Ok(())
    }
}

/// Dense numbering of the modes a state or unitary is defined over.
#[derive(Clone, Debug)]
pub struct ModeRegistry {
    labels: Vec<ModeLabel>,
    index: HashMap<ModeLabel, usize>,
}

impl PartialEq for ModeRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for ModeRegistry {}

impl ModeRegistry {
    /// Registry in canonical order: by spatial index, then H before V, then
    /// temporal slot.
    pub fn new(labels: impl IntoIterator<Item = ModeLabel>) -> Result<Self> {
        let mut labels: Vec<ModeLabel> = labels.into_iter().collect();
        labels.sort();
        Self::with_order(labels)
    }

    /// Registry that keeps the given order.
    pub fn with_order(labels: impl IntoIterator<Item = ModeLabel>) -> Result<Self> {
        let labels: Vec<ModeLabel> = labels.into_iter().collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(*label, i).is_some() {
                return Err(Error::DuplicateMode(*label));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> ModeLabel {
        self.labels[index]
    }

    pub fn index_of(&self, label: &ModeLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &ModeLabel) -> bool {
        self.index.contains_key(label)
    }

    /// Indices for `labels`, or the list of labels that are not registered.
    pub fn indices_of(&self, labels: &[ModeLabel]) -> Result<Vec<usize>> {
        let missing: Vec<ModeLabel> = labels.iter().filter(|l| !self.contains(l)).copied().collect();
        if !missing.is_empty() {
            return Err(Error::MissingModes(missing));
        }
        Ok(labels.iter().map(|l| self.index[l]).collect())
    }

    /// Copy of this registry with every label repeated for temporal slots
    /// `0..slots`, in canonical order.
    pub fn with_temporal_slots(&self, slots: u32) -> Result<Self> {
        let labels: BTreeSet<ModeLabel> = self
            .labels
            .iter()
            .flat_map(|l| (0..slots).map(move |t| l.at_time(t)))
            .collect();
        Self::new(labels)
    }
}

/// Photon count per registered mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector {
    counts: Vec<u32>,
    total: u32,
}

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::new(vec![0; modes])
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.counts[mode]
    }

    /// `prod_k n_k!`; exact for up to 18 photons.
    pub fn factorial_product(&self) -> f64 {
        self.counts
            .iter()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    /// `sqrt(prod_k n_k!)`, the normalization of the creation-operator monomial.
    pub fn sqrt_factorial_product(&self) -> f64 {
        self.factorial_product().sqrt()
    }

    /// Mode indices, each repeated once per photon it holds.
    pub fn mode_list(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
            .collect()
    }
}

/// Sparse superposition of Fock basis states over a [`ModeRegistry`].
///
/// The squared norm is not forced to one: after heralding it is the
/// probability of the heralding event.
#[derive(Clone, Debug)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    amplitudes: BTreeMap<OccupationVector, Complex64>,
}

impl PureState {
    pub fn vacuum(registry: Arc<ModeRegistry>) -> Self {
        let vac = OccupationVector::vacuum(registry.len());
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vac, Complex64::new(1.0, 0.0));
        Self { registry, amplitudes }
    }

    /// State with no support. Useful as an accumulator.
    pub fn zero(registry: Arc<ModeRegistry>) -> Self {
        Self {
            registry,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Builds a state from `(occupation, amplitude)` pairs. Repeated
    /// occupations are summed and the result is pruned.
    pub fn from_amplitudes(
        registry: Arc<ModeRegistry>,
        terms: impl IntoIterator<Item = (OccupationVector, Complex64)>,
    ) -> Result<Self> {
        let mut amplitudes: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != registry.len() {
                return Err(Error::DimensionMismatch {
                    expected: registry.len(),
                    found: occ.len(),
                });
            }
            *amplitudes.entry(occ).or_default() += amp;
        }
        let mut state = Self { registry, amplitudes };
        state.prune();
        Ok(state)
    }

    /// Occupation vector with the listed photon counts and zero elsewhere.
    pub fn occupation(registry: &ModeRegistry, counts: &[(ModeLabel, u32)]) -> Result<OccupationVector> {
        let mut occ = vec![0; registry.len()];
        let labels: Vec<ModeLabel> = counts.iter().map(|(l, _)| *l).collect();
        let indices = registry.indices_of(&labels)?;
        for (i, (_, n)) in indices.into_iter().zip(counts) {
            occ[i] += n;
        }
        Ok(OccupationVector::new(occ))
    }

    /// Single basis state with unit amplitude.
    pub fn basis(registry: Arc<ModeRegistry>, counts: &[(ModeLabel, u32)]) -> Result<Self> {
        let occ = Self::occupation(&registry, counts)?;
        Self::from_amplitudes(registry, [(occ, Complex64::new(1.0, 0.0))])
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Number of stored basis states.
    pub fn support_size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.amplitudes.get(occ).copied().unwrap_or_default()
    }

    /// Amplitude of the basis state with the listed counts (zero elsewhere).
    pub fn amplitude_of(&self, counts: &[(ModeLabel, u32)]) -> Result<Complex64> {
        let occ = Self::occupation(&self.registry, counts)?;
        Ok(self.amplitude(&occ))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = Self {
            registry: self.registry.clone(),
            amplitudes: self.amplitudes.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
        };
        out.prune();
        out
    }

    /// Coherent sum of two states on the same registry.
    pub fn add(&self, other: &PureState) -> Result<Self> {
        self.check_same_registry(other)?;
        let mut amplitudes = self.amplitudes.clone();
        for (k, v) in &other.amplitudes {
            *amplitudes.entry(k.clone()).or_default() += v;
        }
        let mut out = Self {
            registry: self.registry.clone(),
            amplitudes,
        };
        out.prune();
        Ok(out)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_same_registry(other)?;
        Ok(self.amplitudes.iter().map(|(k, a)| a.conj() * other.amplitude(k)).sum())
    }

    /// Photon totals present in the support, ascending.
    pub fn photon_numbers(&self) -> BTreeSet<u32> {
        self.amplitudes.keys().map(|k| k.total()).collect()
    }

    /// Mode indices holding at least one photon in some basis state.
    pub fn occupied_modes(&self) -> BTreeSet<usize> {
        self.amplitudes
            .keys()
            .flat_map(|k| k.counts().iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, _)| i))
            .collect()
    }

    /// Re-expresses the state over `target`, which must register every
    /// occupied mode. Modes that are absent from `self` start empty.
    pub fn lift(&self, target: Arc<ModeRegistry>) -> Result<Self> {
        let occupied: Vec<usize> = self.occupied_modes().into_iter().collect();
        let missing: Vec<ModeLabel> = occupied
            .iter()
            .map(|&i| self.registry.label(i))
            .filter(|l| !target.contains(l))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingModes(missing));
        }
        let map: Vec<(usize, usize)> = occupied
            .iter()
            .map(|&i| (i, target.index_of(&self.registry.label(i)).unwrap()))
            .collect();
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, v)| {
                let mut counts = vec![0; target.len()];
                for &(from, to) in &map {
                    counts[to] = k.get(from);
                }
                (OccupationVector::new(counts), *v)
            })
            .collect();
        Ok(Self {
            registry: target,
            amplitudes,
        })
    }

    /// Renames every mode through `rename`, producing a state over a new
    /// canonical registry.
    pub fn map_modes(&self, rename: impl Fn(ModeLabel) -> ModeLabel) -> Result<Self> {
        let renamed: Vec<ModeLabel> = self.registry.labels().iter().map(|l| rename(*l)).collect();
        let target = Arc::new(ModeRegistry::new(renamed.iter().copied())?);
        let map: Vec<usize> = renamed.iter().map(|l| target.index_of(l).unwrap()).collect();
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, v)| {
                let mut counts = vec![0; target.len()];
                for (from, &to) in map.iter().enumerate() {
                    counts[to] = k.get(from);
                }
                (OccupationVector::new(counts), *v)
            })
            .collect();
        Ok(Self {
            registry: target,
            amplitudes,
        })
    }

    pub(crate) fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    fn check_same_registry(&self, other: &PureState) -> Result<()> {
        if Arc::ptr_eq(&self.registry, &other.registry) || *self.registry == *other.registry {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        for (n, (occ, amp)) in self.amplitudes.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|", amp.re, amp.im)?;
            let mut first = true;
            for (i, &c) in occ.counts().iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{}:{}", self.registry.label(i), c)?;
                first = false;
            }
            if first {
                write!(f, "vac")?;
            }
            write!(f, ">")?;
        }
        Ok(())
    }
}

/// Rescales `state` to unit norm and returns the original norm alongside.
pub fn normalize(state: &PureState) -> Result<(PureState, f64)> {
    let norm = state.norm();
    if state.is_zero() || norm < PRUNE_THRESHOLD {
        return Err(Error::ZeroState);
    }
    Ok((state.scaled(Complex64::new(1.0 / norm, 0.0)), norm))
}

/// Product of two states living on disjoint modes of a shared registry.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    a.check_same_registry(b)?;
    let overlap: Vec<ModeLabel> = a
        .occupied_modes()
        .intersection(&b.occupied_modes())
        .map(|&i| a.registry.label(i))
        .collect();
    if !overlap.is_empty() {
        return Err(Error::OverlappingModes(overlap));
    }
    let terms = a.iter().flat_map(|(ka, va)| {
        b.iter().map(move |(kb, vb)| {
            let counts = ka.counts().iter().zip(kb.counts()).map(|(x, y)| x + y).collect();
            (OccupationVector::new(counts), va * vb)
        })
    });
    PureState::from_amplitudes(a.registry.clone(), terms)
}

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    for s in [a, b] {
        let norm_sqr = s.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
    }
    Ok(a.inner(b)?.norm_sqr())
}

/// Incoherent mixture of normalized pure states.
#[derive(Clone, Debug, Default)]
pub struct Ensemble {
    components: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, weight: f64, state: PureState) -> Result<()> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::Domain(format!("ensemble weight {weight} outside (0, 1]")));
        }
        if self.total_weight() + weight > 1.0 + 1e-9 {
            return Err(Error::Domain("ensemble weights sum above 1".into()));
        }
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        self.components.push((weight, state));
        Ok(())
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    /// Weighted sum of a per-component probability.
    pub fn expectation(&self, mut probability: impl FnMut(&PureState) -> Result<f64>) -> Result<f64> {
        self.components.iter().map(|(w, s)| probability(s).map(|p| w * p)).sum()
    }
}
