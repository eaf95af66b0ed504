//! The sign-shift experiment: entangled-pair inputs, the two beam splitters,
//! the polarization analyzer, and the coincidence probabilities swept over
//! phase and pump delay.
//!
//! Mode layout (spatial indices):
//!
//! ```text
//!  1, 2   entangled pair entering BS1
//!  3, 4   BS1 outputs; both photons in 3 is the branch that is kept
//!  5      ancilla input of BS2 (H-polarized)
//!  7, 8   BS2 outputs; 8 is the herald port (detector D2, H only)
//!  10, 11 PBS outputs towards detectors A (V) and B (H)
//! ```
//!
//! BS2 acts in place on two rails: rail 7 carries mode 3 into port 1 and the
//! transmitted/reflected light out to mode 7; rail 8 carries the ancilla
//! (mode 5) into port 2 and out to mode 8. All probabilities are conditional
//! on the four-photon emission and on both pair photons leaving BS1 through
//! mode 3; the BS1 branch probability is reported separately by
//! [`apply_bs1`].

pub mod fit;
pub mod table;

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distinguish::{
    channel_group, embed_all_slots, extend_ancilla, overlap_from_delay, Overlap, OverlapParams, DEFAULT_TAU_COH_FS,
};
use crate::elements::{
    compose, dual_pol_beam_splitter, embed_into, half_wave_plate, pbs_router, ModeUnitary, Reflectivity, ANALYZED_PORT,
    DETECTOR_A, DETECTOR_B,
};
use crate::error::{Error, Result};
use crate::evolve::{herald, transform, HeraldCondition, HeraldResult, HeraldSpec};
use crate::fock::{normalize, tensor_product, ModeLabel, ModeRegistry, PureState};

pub use fit::{dip_visibility, fit_fringe, phase_distance, phase_shift, visibility, wrap_phase, FringeFit};
pub use table::{linspace, SweepRow, SweepTable};

pub const PAIR_PORT_1: u32 = 1;
pub const PAIR_PORT_2: u32 = 2;
pub const SIGNAL_MODE: u32 = 3;
pub const BS1_DISCARD_MODE: u32 = 4;
pub const ANCILLA_MODE: u32 = 5;
pub const HERALD_MODE: u32 = 8;

/// Relative phase of the `HH` term of the entangled input, in radians.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PhaseSetting(f64);

impl PhaseSetting {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() {
            Ok(Self(theta))
        } else {
            Err(Error::Domain(format!("phase {theta} is not finite")))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub r_v: Reflectivity,
    pub r_h: Reflectivity,
    /// Polarization rotation of HWP2 in degrees.
    pub hwp_rotation: f64,
    /// Coherence time in femtoseconds.
    pub tau_coh: f64,
    /// Additive accidental floor on four-fold probabilities.
    pub background: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            r_v: Reflectivity::HALF,
            r_h: Reflectivity::HALF,
            hwp_rotation: 45.0,
            tau_coh: DEFAULT_TAU_COH_FS,
            background: 0.0,
        }
    }
}

impl ExperimentConfig {
    /// Settings for the two-photon interference run: HWP2 leaves polarization alone.
    pub fn hom() -> Self {
        Self {
            hwp_rotation: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background >= 0.0) || !self.background.is_finite() {
            return Err(Error::Domain(format!("background {} must be >= 0", self.background)));
        }
        if !(self.tau_coh > 0.0) || !self.tau_coh.is_finite() {
            return Err(Error::Domain(format!("coherence time {} must be > 0", self.tau_coh)));
        }
        if !self.hwp_rotation.is_finite() {
            return Err(Error::Domain("HWP rotation must be finite".into()));
        }
        Ok(())
    }
}

fn pair_registry() -> Arc<ModeRegistry> {
    ModeRegistry::new([
        ModeLabel::h(PAIR_PORT_1),
        ModeLabel::v(PAIR_PORT_1),
        ModeLabel::h(PAIR_PORT_2),
        ModeLabel::v(PAIR_PORT_2),
    ])
    .expect("distinct labels")
    .shared()
}

type PhotonPair = (ModeLabel, ModeLabel);

fn pair_state(terms: [(PhotonPair, Complex64); 2]) -> Result<PureState> {
    let reg = pair_registry();
    let mut acc = PureState::zero(reg.clone());
    for ((p1, p2), amp) in terms {
        let b = PureState::basis(reg.clone(), &[(p1, 1), (p2, 1)])?;
        acc = acc.add(&b.scaled(amp))?;
    }
    Ok(acc)
}

/// `(|1V>_1 |1V>_2 + e^{i theta} |1H>_1 |1H>_2) / sqrt(2)`.
pub fn input_phi_theta(theta: PhaseSetting) -> Result<PureState> {
    pair_state([
        (
            (ModeLabel::v(PAIR_PORT_1), ModeLabel::v(PAIR_PORT_2)),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ),
        (
            (ModeLabel::h(PAIR_PORT_1), ModeLabel::h(PAIR_PORT_2)),
            Complex64::from_polar(FRAC_1_SQRT_2, theta.radians()),
        ),
    ])
}

/// `(|1V>_1 |1H>_2 + |1H>_1 |1V>_2) / sqrt(2)`.
pub fn input_psi_plus() -> Result<PureState> {
    pair_state([
        (
            (ModeLabel::v(PAIR_PORT_1), ModeLabel::h(PAIR_PORT_2)),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ),
        (
            (ModeLabel::h(PAIR_PORT_1), ModeLabel::v(PAIR_PORT_2)),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ),
    ])
}

/// Input state, circuit and detector conditions of one pipeline run.
#[derive(Clone, Debug)]
pub struct Stage {
    pub input: PureState,
    pub circuit: ModeUnitary,
    pub herald: HeraldSpec,
}

impl Stage {
    pub fn output(&self) -> Result<PureState> {
        transform(&self.circuit, &self.input)
    }

    pub fn run(&self) -> Result<HeraldResult> {
        herald(&self.output()?, &self.herald)
    }
}

/// Pair state on modes 1, 2 through the 50/50 BS1; keeps the branch with both
/// photons in mode 3. Returns that branch normalized, with its probability.
pub fn bs1_stage(state: &PureState) -> Result<Stage> {
    let reg = pair_registry();
    let input = state.lift(reg.clone())?;
    let ports = [
        ModeLabel::h(PAIR_PORT_1),
        ModeLabel::v(PAIR_PORT_1),
        ModeLabel::h(PAIR_PORT_2),
        ModeLabel::v(PAIR_PORT_2),
    ];
    let circuit = embed_into(
        &dual_pol_beam_splitter(Reflectivity::HALF, Reflectivity::HALF),
        &ports,
        &reg,
    )?;
    let herald = HeraldSpec::new().group(
        [ModeLabel::h(PAIR_PORT_2), ModeLabel::v(PAIR_PORT_2)],
        HeraldCondition::Zero,
    )?;
    Ok(Stage { input, circuit, herald })
}

/// Applies BS1 and post-selects both photons in mode 3.
pub fn apply_bs1(state: &PureState) -> Result<(PureState, f64)> {
    let result = bs1_stage(state)?.run()?;
    let branch = result.conditional_state().ok_or(Error::ZeroState)?;
    let rail_to_mode3 = |l: ModeLabel| {
        debug_assert_eq!(l.spatial, PAIR_PORT_1);
        l.with_spatial(SIGNAL_MODE)
    };
    let (normalized, _) = normalize(&branch.map_modes(rail_to_mode3)?)?;
    Ok((normalized, result.probability))
}

/// Modes seen after BS2: ports 7 and 8, detector paths A and B, each in
/// `slots` temporal slots.
pub fn analysis_registry(slots: u32) -> Result<Arc<ModeRegistry>> {
    let base = ModeRegistry::new([
        ModeLabel::h(ANALYZED_PORT),
        ModeLabel::v(ANALYZED_PORT),
        ModeLabel::h(HERALD_MODE),
        ModeLabel::v(HERALD_MODE),
        ModeLabel::v(DETECTOR_A),
        ModeLabel::h(DETECTOR_B),
    ])?;
    Ok(base.with_temporal_slots(slots)?.shared())
}

/// BS2, then HWP2 on port 7, then the PBS router.
pub fn analysis_circuit(cfg: &ExperimentConfig, registry: &ModeRegistry) -> Result<ModeUnitary> {
    let bs2 = embed_all_slots(
        &dual_pol_beam_splitter(cfg.r_v, cfg.r_h),
        &[
            ModeLabel::h(ANALYZED_PORT),
            ModeLabel::v(ANALYZED_PORT),
            ModeLabel::h(HERALD_MODE),
            ModeLabel::v(HERALD_MODE),
        ],
        registry,
    )?;
    let hwp = embed_all_slots(
        &half_wave_plate(cfg.hwp_rotation),
        &[ModeLabel::h(ANALYZED_PORT), ModeLabel::v(ANALYZED_PORT)],
        registry,
    )?;
    compose(&[bs2, hwp, pbs_router(registry)?])
}

/// D2 sees exactly one H photon at port 8; A and B each see exactly one
/// photon; port 7 is empty after the PBS. V light at port 8 is not detected.
pub fn fourfold_herald(registry: &ModeRegistry) -> Result<HeraldSpec> {
    HeraldSpec::new()
        .group(
            channel_group(registry, ModeLabel::h(HERALD_MODE)),
            HeraldCondition::Exactly(1),
        )?
        .group(
            channel_group(registry, ModeLabel::v(DETECTOR_A)),
            HeraldCondition::Exactly(1),
        )?
        .group(
            channel_group(registry, ModeLabel::h(DETECTOR_B)),
            HeraldCondition::Exactly(1),
        )?
        .group(
            channel_group(registry, ModeLabel::h(ANALYZED_PORT)),
            HeraldCondition::Zero,
        )?
        .group(
            channel_group(registry, ModeLabel::v(ANALYZED_PORT)),
            HeraldCondition::Zero,
        )?
        .group(channel_group(registry, ModeLabel::v(HERALD_MODE)), HeraldCondition::Any)
}

/// A and B each see exactly one photon; everything else unconstrained.
pub fn twofold_herald(registry: &ModeRegistry) -> Result<HeraldSpec> {
    HeraldSpec::new()
        .group(
            channel_group(registry, ModeLabel::v(DETECTOR_A)),
            HeraldCondition::Exactly(1),
        )?
        .group(
            channel_group(registry, ModeLabel::h(DETECTOR_B)),
            HeraldCondition::Exactly(1),
        )
}

/// Places the mode-3 signal state on rail 7 and, if given, the ancilla on
/// rail 8 with overlap `eta`.
pub fn bs2_input(signal: &PureState, ancilla: Option<Overlap>, registry: Arc<ModeRegistry>) -> Result<PureState> {
    let on_rail = signal.map_modes(|l| {
        if l.spatial == SIGNAL_MODE {
            l.with_spatial(ANALYZED_PORT)
        } else {
            l
        }
    })?;
    let sig = on_rail.lift(registry.clone())?;
    match ancilla {
        None => Ok(sig),
        Some(eta) => {
            let anc = extend_ancilla(ModeLabel::h(HERALD_MODE), eta)?.lift(registry)?;
            tensor_product(&sig, &anc)
        }
    }
}

/// Four-photon stage: signal state in mode 3 plus the ancilla, through the analyzer.
pub fn fourfold_stage(signal: &PureState, eta: Overlap, cfg: &ExperimentConfig, slots: u32) -> Result<Stage> {
    cfg.validate()?;
    let registry = analysis_registry(slots)?;
    Ok(Stage {
        input: bs2_input(signal, Some(eta), registry.clone())?,
        circuit: analysis_circuit(cfg, &registry)?,
        herald: fourfold_herald(&registry)?,
    })
}

/// Pair-only stage: signal state in mode 3, no ancilla.
pub fn twofold_stage(signal: &PureState, cfg: &ExperimentConfig) -> Result<Stage> {
    cfg.validate()?;
    let registry = analysis_registry(1)?;
    Ok(Stage {
        input: bs2_input(signal, None, registry.clone())?,
        circuit: analysis_circuit(cfg, &registry)?,
        herald: twofold_herald(&registry)?,
    })
}

/// Probability of the `D1 D2 DA DB` coincidence for `|Phi_theta>`, plus the
/// configured background.
pub fn fourfold_probability(theta: PhaseSetting, eta: Overlap, cfg: &ExperimentConfig) -> Result<f64> {
    let (signal, _) = apply_bs1(&input_phi_theta(theta)?)?;
    let p = fourfold_stage(&signal, eta, cfg, 2)?.run()?.probability;
    Ok(p + cfg.background)
}

/// Probability of the `DA DB` coincidence for `|Phi_theta>` with no ancilla.
pub fn twofold_probability(theta: PhaseSetting, cfg: &ExperimentConfig) -> Result<f64> {
    let (signal, _) = apply_bs1(&input_phi_theta(theta)?)?;
    Ok(twofold_stage(&signal, cfg)?.run()?.probability)
}

/// Four-fold probability for the `|1V; 1H>_3` input prepared from `|Psi+>`.
/// Use with [`ExperimentConfig::hom`].
pub fn hom_probability(eta: Overlap, cfg: &ExperimentConfig) -> Result<f64> {
    let (signal, _) = apply_bs1(&input_psi_plus()?)?;
    let p = fourfold_stage(&signal, eta, cfg, 2)?.run()?.probability;
    Ok(p + cfg.background)
}

fn delay_overlap(delay: f64, cfg: &ExperimentConfig) -> Result<Overlap> {
    overlap_from_delay(OverlapParams {
        delay,
        tau_coh: cfg.tau_coh,
    })
}

/// Four-fold probability against pump delay (femtoseconds).
pub fn sweep_delay(theta: PhaseSetting, delays: &[f64], cfg: &ExperimentConfig) -> Result<SweepTable> {
    table::check_abscissae(delays)?;
    cfg.validate()?;
    let (signal, _) = apply_bs1(&input_phi_theta(theta)?)?;
    let values: Vec<f64> = delays
        .par_iter()
        .map(|&d| {
            let eta = delay_overlap(d, cfg)?;
            Ok(fourfold_stage(&signal, eta, cfg, 2)?.run()?.probability + cfg.background)
        })
        .collect::<Result<_>>()?;
    let mut t = SweepTable::new("delay_fs", ["fourfold"]);
    for (&d, v) in delays.iter().zip(values) {
        t.push_row(d, vec![v])?;
    }
    Ok(t)
}

/// Two-photon interference dip against pump delay for the `|Psi+>` input.
/// The overlap at each delay is `eta_max` times the Gaussian temporal overlap.
pub fn sweep_hom(delays: &[f64], eta_max: Overlap, cfg: &ExperimentConfig) -> Result<SweepTable> {
    table::check_abscissae(delays)?;
    cfg.validate()?;
    let (signal, _) = apply_bs1(&input_psi_plus()?)?;
    let values: Vec<f64> = delays
        .par_iter()
        .map(|&d| {
            let eta = delay_overlap(d, cfg)?.combined(eta_max);
            Ok(fourfold_stage(&signal, eta, cfg, 2)?.run()?.probability + cfg.background)
        })
        .collect::<Result<_>>()?;
    let mut t = SweepTable::new("delay_fs", ["fourfold"]);
    for (&d, v) in delays.iter().zip(values) {
        t.push_row(d, vec![v])?;
    }
    Ok(t)
}

/// Two-fold and four-fold probabilities against the input phase at fixed overlap.
pub fn sweep_phase(thetas: &[f64], eta: Overlap, cfg: &ExperimentConfig) -> Result<SweepTable> {
    table::check_abscissae(thetas)?;
    cfg.validate()?;
    let rows: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&t| {
            let theta = PhaseSetting::new(t)?;
            let (signal, _) = apply_bs1(&input_phi_theta(theta)?)?;
            let two = twofold_stage(&signal, cfg)?.run()?.probability;
            let four = fourfold_stage(&signal, eta, cfg, 2)?.run()?.probability + cfg.background;
            Ok((two, four))
        })
        .collect::<Result<_>>()?;
    let mut t = SweepTable::new("theta", ["twofold", "fourfold"]);
    for (&x, (two, four)) in thetas.iter().zip(rows) {
        t.push_row(x, vec![two, four])?;
    }
    Ok(t)
}

/// Fits of both phase-sweep columns and the phase of the four-fold fringe
/// relative to the two-fold one, in `[0, 2 pi)`.
#[derive(Clone, Copy, Debug)]
pub struct PhaseShiftFit {
    pub twofold: FringeFit,
    pub fourfold: FringeFit,
    pub shift: f64,
}

pub fn fit_phase_shift(table: &SweepTable) -> Result<PhaseShiftFit> {
    let missing = |c: &str| Error::Domain(format!("table has no '{c}' column"));
    let twofold = fit_fringe(&table.samples("twofold").ok_or_else(|| missing("twofold"))?)?;
    let fourfold = fit_fringe(&table.samples("fourfold").ok_or_else(|| missing("fourfold"))?)?;
    Ok(PhaseShiftFit {
        twofold,
        fourfold,
        shift: phase_shift(&twofold, &fourfold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::transform_oracle;
    use crate::fock::fidelity;
    use std::f64::consts::{PI, TAU};

    fn theta(t: f64) -> PhaseSetting {
        PhaseSetting::new(t).unwrap()
    }

    fn eta(e: f64) -> Overlap {
        Overlap::new(e).unwrap()
    }

    /// Hand-derived four-fold probability for `|Phi_theta>` under the frozen
    /// splitter convention. Ancilla components in slot 0 and slot 1 end in
    /// orthogonal outcomes, so the overlap enters only through `eta^2`:
    /// indistinguishable `cos^2(theta/2)/8`, distinguishable
    /// `sin^2(theta/2)/8 + 1/16`.
    fn fourfold_model(theta: f64, eta: f64) -> f64 {
        let e2 = eta * eta;
        let s2 = (theta / 2.0).sin().powi(2);
        e2 * (1.0 - s2) / 8.0 + (1.0 - e2) * (s2 / 8.0 + 1.0 / 16.0)
    }

    #[test]
    fn input_states() {
        for t in [0.0, 1.0, PI] {
            let s = input_phi_theta(theta(t)).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let s = input_phi_theta(theta(PI)).unwrap();
        let vv = s.amplitude_of(&[(ModeLabel::v(1), 1), (ModeLabel::v(2), 1)]).unwrap();
        let hh = s.amplitude_of(&[(ModeLabel::h(1), 1), (ModeLabel::h(2), 1)]).unwrap();
        assert!((hh / vv + 1.0).norm() < 1e-12);

        let psi = input_psi_plus().unwrap();
        assert_eq!(psi.support_size(), 2);
        for (_, a) in psi.iter() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let phi0 = input_phi_theta(theta(0.0)).unwrap();
        assert_eq!(fidelity(&psi, &phi0).unwrap(), 0.0);
    }

    #[test]
    fn bs1_makes_number_entangled_state() {
        let t = 0.7;
        let (s, p) = apply_bs1(&input_phi_theta(theta(t)).unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let reg = s.registry().clone();
        let expected = PureState::from_amplitudes(
            reg.clone(),
            [
                (
                    PureState::occupation(&reg, &[(ModeLabel::v(3), 2)]).unwrap(),
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                ),
                (
                    PureState::occupation(&reg, &[(ModeLabel::h(3), 2)]).unwrap(),
                    Complex64::from_polar(FRAC_1_SQRT_2, t),
                ),
            ],
        )
        .unwrap();
        assert!((fidelity(&s, &expected).unwrap() - 1.0).abs() < 1e-12);

        let (s, p) = apply_bs1(&input_psi_plus().unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let amp = s.amplitude_of(&[(ModeLabel::v(3), 1), (ModeLabel::h(3), 1)]).unwrap();
        assert!((amp.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bs1_agrees_with_oracle() {
        let stage = bs1_stage(&input_phi_theta(theta(0.0)).unwrap()).unwrap();
        let out = transform_oracle(&stage.circuit, &stage.input).unwrap();
        let p = herald(&out, &stage.herald).unwrap().probability;
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fourfold_examples() {
        let cfg = ExperimentConfig::default();
        let p = |t, e| fourfold_probability(theta(t), eta(e), &cfg).unwrap();
        assert!((p(0.0, 1.0) - 0.125).abs() < 1e-12);
        assert!(p(PI, 1.0).abs() < 1e-12);
        assert!((p(0.0, 0.0) - 0.0625).abs() < 1e-12);
        assert!((p(PI, 0.0) - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn fourfold_matches_hand_model_and_oracle() {
        let cfg = ExperimentConfig::default();
        for &t in &[0.0, 0.4, 1.3, PI, 4.0] {
            for &e in &[0.0, 0.3, 0.77, 1.0] {
                let got = fourfold_probability(theta(t), eta(e), &cfg).unwrap();
                assert!((got - fourfold_model(t, e)).abs() < 1e-12, "theta={t} eta={e}");

                let (signal, _) = apply_bs1(&input_phi_theta(theta(t)).unwrap()).unwrap();
                let stage = fourfold_stage(&signal, eta(e), &cfg, 2).unwrap();
                let oracle = transform_oracle(&stage.circuit, &stage.input).unwrap();
                let p = herald(&oracle, &stage.herald).unwrap().probability;
                assert!((p - got).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fourfold_background_is_additive() {
        let cfg = ExperimentConfig {
            background: 0.01,
            ..ExperimentConfig::default()
        };
        let p = fourfold_probability(theta(PI), eta(1.0), &cfg).unwrap();
        assert!((p - 0.01).abs() < 1e-12);
        let bad = ExperimentConfig {
            background: -1.0,
            ..ExperimentConfig::default()
        };
        assert!(fourfold_probability(theta(0.0), eta(1.0), &bad).is_err());
    }

    #[test]
    fn twofold_examples() {
        let cfg = ExperimentConfig::default();
        let p = |t| twofold_probability(theta(t), &cfg).unwrap();
        assert!(p(0.0).abs() < 1e-12);
        assert!((p(PI) - 0.25).abs() < 1e-12);
        assert!((p(PI / 2.0) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn hom_examples() {
        let cfg = ExperimentConfig::hom();
        assert!(hom_probability(eta(1.0), &cfg).unwrap() < 1e-12);
        assert!((hom_probability(eta(0.0), &cfg).unwrap() - 0.25).abs() < 1e-12);
        for e in [0.2, 0.5, 0.9] {
            let got = hom_probability(eta(e), &cfg).unwrap();
            assert!((got - 0.25 * (1.0 - e * e)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_slot_matches_extended_at_full_overlap() {
        let cfg = ExperimentConfig::default();
        for t in [0.0, 1.0, 2.5] {
            let (signal, _) = apply_bs1(&input_phi_theta(theta(t)).unwrap()).unwrap();
            let one = fourfold_stage(&signal, Overlap::FULL, &cfg, 1).unwrap().run().unwrap();
            let two = fourfold_stage(&signal, Overlap::FULL, &cfg, 2).unwrap().run().unwrap();
            assert!((one.probability - two.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_is_even_quadratic_in_overlap() {
        let cfg = ExperimentConfig::default();
        let etas = [0.0, 0.25, 0.5, 0.75, 1.0];
        for t in [0.3, 2.0] {
            let ps: Vec<f64> = etas
                .iter()
                .map(|&e| fourfold_probability(theta(t), eta(e), &cfg).unwrap())
                .collect();
            // least squares on {1, eta^2}
            let design = nalgebra::DMatrix::from_fn(etas.len(), 2, |i, j| if j == 0 { 1.0 } else { etas[i] * etas[i] });
            let y = nalgebra::DVector::from_vec(ps.clone());
            let coef = design.clone().svd(true, true).solve(&y, 0.0).unwrap();
            let resid = (&design * coef - y).norm();
            assert!(resid < 1e-9);
        }
    }

    #[test]
    fn detector_aggregation_is_consistent() {
        let cfg = ExperimentConfig::default();
        let (signal, _) = apply_bs1(&input_phi_theta(theta(1.1)).unwrap()).unwrap();
        let stage = fourfold_stage(&signal, eta(0.6), &cfg, 2).unwrap();
        let out = stage.output().unwrap();
        let grouped = herald(&out, &stage.herald).unwrap().probability;

        // same event, one herald call per temporal assignment of the detected photons
        let reg = out.registry().clone();
        let mut summed = 0.0;
        for t8 in 0..2 {
            for ta in 0..2 {
                for tb in 0..2 {
                    let mut spec = HeraldSpec::new();
                    for (base, t) in [
                        (ModeLabel::h(HERALD_MODE), t8),
                        (ModeLabel::v(DETECTOR_A), ta),
                        (ModeLabel::h(DETECTOR_B), tb),
                    ] {
                        spec = spec.group([base.at_time(t)], HeraldCondition::Exactly(1)).unwrap();
                        spec = spec.group([base.at_time(1 - t)], HeraldCondition::Zero).unwrap();
                    }
                    spec = spec
                        .group(channel_group(&reg, ModeLabel::h(ANALYZED_PORT)), HeraldCondition::Zero)
                        .unwrap()
                        .group(channel_group(&reg, ModeLabel::v(ANALYZED_PORT)), HeraldCondition::Zero)
                        .unwrap();
                    summed += herald(&out, &spec).unwrap().probability;
                }
            }
        }
        assert!((grouped - summed).abs() < 1e-12);
    }

    #[test]
    fn sweep_delay_examples() {
        let cfg = ExperimentConfig::default();
        let t = sweep_delay(theta(PI), &[0.0], &cfg).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.rows()[0].values[0].abs() < 1e-12);
        let far = |th| sweep_delay(theta(th), &[1000.0], &cfg).unwrap().rows()[0].values[0];
        assert!((far(PI) - 0.1875).abs() < 1e-9);
        assert!((far(0.0) - 0.0625).abs() < 1e-9);
        assert_eq!(sweep_delay(theta(0.0), &[], &cfg).unwrap_err(), Error::EmptySweep);
        assert_eq!(
            sweep_delay(theta(0.0), &[1.0, 1.0], &cfg).unwrap_err(),
            Error::NotIncreasing(1)
        );
    }

    #[test]
    fn sweep_delay_is_symmetric() {
        let cfg = ExperimentConfig::default();
        let delays = linspace(-300.0, 300.0, 31);
        for th in [0.0, PI] {
            let t = sweep_delay(theta(th), &delays, &cfg).unwrap();
            let v = t.column("fourfold").unwrap();
            for i in 0..v.len() {
                assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&v[i]));
            }
        }
    }

    #[test]
    fn phase_sweep_and_shift() {
        let cfg = ExperimentConfig::default();
        let thetas = linspace(0.0, TAU, 25);
        let t = sweep_phase(&thetas, Overlap::FULL, &cfg).unwrap();
        assert_eq!(t.columns(), &["twofold".to_string(), "fourfold".to_string()]);
        for row in t.rows() {
            let half = row.x / 2.0;
            assert!((row.values[0] - 0.25 * half.sin().powi(2)).abs() < 1e-9);
            assert!((row.values[1] - 0.125 * half.cos().powi(2)).abs() < 1e-9);
        }
        assert!(t.rows()[0].values[0].abs() < 1e-12);
        assert!((t.rows()[0].values[1] - 0.125).abs() < 1e-12);
        assert!((t.rows()[12].values[0] - 0.25).abs() < 1e-12);
        assert!(t.rows()[12].values[1].abs() < 1e-12);

        let fit = fit_phase_shift(&t).unwrap();
        assert!((fit.shift - PI).abs() < 1e-9);
    }

    #[test]
    fn hom_sweep_visibility() {
        let cfg = ExperimentConfig::hom();
        let delays = linspace(-1000.0, 1000.0, 41);
        for em in [0.5, 0.8, 0.943] {
            let t = sweep_hom(&delays, eta(em), &cfg).unwrap();
            let v = dip_visibility(&t.column("fourfold").unwrap()).unwrap();
            assert!((v - em * em).abs() < 1e-9);
        }
    }
}
