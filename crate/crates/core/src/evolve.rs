//! Multi-photon evolution through linear optics, heralded measurement, and the
//! closed-form heralded amplitudes of the nonlinear sign-shift.
//!
//! [`transform`] evaluates every output amplitude as a matrix permanent.
//! [`transform_oracle`] reaches the same state by substituting each input
//! creation operator with its image and expanding the product directly; the
//! two share no code beyond the state types, so agreement between them is an
//! independent check.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::elements::{beam_splitter, dual_pol_beam_splitter, embed_into, ModeUnitary, Reflectivity};
use crate::error::{Error, Result};
use crate::fock::{ModeLabel, ModeRegistry, OccupationVector, PureState};

/// Largest photon number `transform` will evolve.
pub const PHOTON_CAP: u32 = 8;
/// Largest number of modes `transform` will evolve.
pub const MODE_CAP: usize = 16;

/// Permanent of a square complex matrix (Ryser's formula, Gray-code order).
pub fn permanent(a: &DMatrix<Complex64>) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    Ok(match n {
        0 => Complex64::new(1.0, 0.0),
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] + a[(0, 1)] * a[(1, 0)],
        _ => ryser(a),
    })
}

fn ryser(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        let added = gray & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, col)];
            } else {
                *s -= a[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// All ways to place `photons` photons in `modes` modes, in lexicographic order.
pub fn occupations(modes: usize, photons: u32) -> Vec<OccupationVector> {
    fn rec(modes: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<OccupationVector>) {
        if prefix.len() + 1 == modes {
            prefix.push(left);
            out.push(OccupationVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for n in 0..=left {
            prefix.push(n);
            rec(modes, left - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if photons == 0 {
            out.push(OccupationVector::new(Vec::new()));
        }
        return out;
    }
    rec(modes, photons, &mut Vec::with_capacity(modes), &mut out);
    out
}

fn check_limits(u: &ModeUnitary, state: &PureState) -> Result<()> {
    let m = state.registry().len();
    if u.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u.dim(),
        });
    }
    if m > MODE_CAP {
        return Err(Error::ModeCapExceeded {
            modes: m,
            cap: MODE_CAP,
        });
    }
    if let Some(&n) = state.photon_numbers().iter().next_back() {
        if n > PHOTON_CAP {
            return Err(Error::PhotonCapExceeded {
                photons: n,
                cap: PHOTON_CAP,
            });
        }
    }
    Ok(())
}

/// Evolves `state` through `u`: `<m|U|n> = Per(U[m, n]) / sqrt(m! n!)`, with
/// the rows and columns of `U` repeated according to the occupations.
pub fn transform(u: &ModeUnitary, state: &PureState) -> Result<PureState> {
    check_limits(u, state)?;
    let m = state.registry().len();
    let outputs: BTreeMap<u32, Vec<(OccupationVector, Vec<usize>, f64)>> = state
        .photon_numbers()
        .into_iter()
        .map(|n| {
            let outs = occupations(m, n)
                .into_iter()
                .map(|o| {
                    let rows = o.mode_list();
                    let norm = o.factorial_product();
                    (o, rows, norm)
                })
                .collect();
            (n, outs)
        })
        .collect();

    let mut terms = Vec::new();
    for (input, coeff) in state.iter() {
        let cols = input.mode_list();
        let in_norm = input.factorial_product();
        for (output, rows, out_norm) in &outputs[&input.total()] {
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u.entry(rows[r], cols[c]));
            let amp = permanent(&sub)? / (in_norm * out_norm).sqrt();
            terms.push((output.clone(), coeff * amp));
        }
    }
    PureState::from_amplitudes(state.registry().clone(), terms)
}

/// Evolves `state` through `u` by expanding `prod_j (sum_k U[k][j] a_k^dagger)^{n_j}`
/// one creation operator at a time. Exponential in the photon number; meant
/// as a cross-check of [`transform`].
pub fn transform_oracle(u: &ModeUnitary, state: &PureState) -> Result<PureState> {
    check_limits(u, state)?;
    let m = state.registry().len();
    let mut terms = Vec::new();
    for (input, coeff) in state.iter() {
        // polynomial in creation operators: exponent vector -> coefficient
        let mut poly: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        let mut norm = 1.0;
        for &n in input.counts() {
            for k in 1..=n {
                norm *= f64::from(k);
            }
        }
        poly.insert(vec![0; m], coeff / norm.sqrt());
        for (j, &n) in input.counts().iter().enumerate() {
            for _ in 0..n {
                let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
                for (exps, c) in &poly {
                    for k in 0..m {
                        let w = u.entry(k, j);
                        if w == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut e = exps.clone();
                        e[k] += 1;
                        *next.entry(e).or_default() += c * w;
                    }
                }
                poly = next;
            }
        }
        for (exps, c) in poly {
            // (a^dagger)^e |0> = sqrt(e!) |e>
            let mut f = 1.0;
            for &e in &exps {
                for k in 1..=e {
                    f *= f64::from(k);
                }
            }
            terms.push((OccupationVector::new(exps), c * f.sqrt()));
        }
    }
    PureState::from_amplitudes(state.registry().clone(), terms)
}

/// What a detector group must report for a basis state to be kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeraldCondition {
    /// Exactly `k` photons summed over the group.
    Exactly(u32),
    /// At least one photon in the group (non-number-resolving click).
    ThresholdClick,
    /// No photon in the group.
    Zero,
    /// Unconstrained; the group stays in the conditional state.
    Any,
}

impl HeraldCondition {
    fn accepts(self, count: u32) -> bool {
        match self {
            HeraldCondition::Exactly(k) => count == k,
            HeraldCondition::ThresholdClick => count >= 1,
            HeraldCondition::Zero => count == 0,
            HeraldCondition::Any => true,
        }
    }
}

/// Detector conditions over disjoint groups of modes.
///
/// Modes not named by any group are unmeasured, exactly as if they were
/// listed under [`HeraldCondition::Any`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeraldSpec {
    groups: Vec<(Vec<ModeLabel>, HeraldCondition)>,
}

impl HeraldSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a group. Fails if the group is empty or shares a mode with an
    /// earlier group.
    pub fn group(mut self, modes: impl IntoIterator<Item = ModeLabel>, condition: HeraldCondition) -> Result<Self> {
        let modes: Vec<ModeLabel> = modes.into_iter().collect();
        if modes.is_empty() {
            return Err(Error::IncompleteSpec("empty mode group".into()));
        }
        let mut seen: HashSet<ModeLabel> = self.groups.iter().flat_map(|(g, _)| g.iter().copied()).collect();
        for m in &modes {
            if !seen.insert(*m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        self.groups.push((modes, condition));
        Ok(self)
    }

    pub fn groups(&self) -> &[(Vec<ModeLabel>, HeraldCondition)] {
        &self.groups
    }
}

/// Heralded component for one pattern of measured photon counts.
#[derive(Clone, Debug)]
pub struct HeraldBranch {
    /// Count in every measured mode, in registry order.
    pub pattern: Vec<(ModeLabel, u32)>,
    /// Sub-normalized state of the unmeasured modes.
    pub state: PureState,
}

#[derive(Clone, Debug)]
pub struct HeraldResult {
    pub probability: f64,
    /// One entry per distinct measured pattern, ordered by pattern. Distinct
    /// patterns are orthogonal and contribute to `probability` additively.
    pub branches: Vec<HeraldBranch>,
}

impl HeraldResult {
    /// The conditional state, when exactly one measured pattern survives.
    pub fn conditional_state(&self) -> Option<&PureState> {
        match self.branches.as_slice() {
            [only] => Some(&only.state),
            _ => None,
        }
    }
}

/// Projects `state` onto the basis states accepted by every group of `spec`.
pub fn herald(state: &PureState, spec: &HeraldSpec) -> Result<HeraldResult> {
    let registry = state.registry();
    let mut groups = Vec::with_capacity(spec.groups.len());
    let mut measured = vec![false; registry.len()];
    for (labels, cond) in &spec.groups {
        let idx = registry.indices_of(labels).map_err(|e| match e {
            Error::MissingModes(m) => Error::IncompleteSpec(format!("modes {m:?} are not registered")),
            other => other,
        })?;
        if *cond != HeraldCondition::Any {
            for &i in &idx {
                measured[i] = true;
            }
        }
        groups.push((idx, *cond));
    }
    let kept_idx: Vec<usize> = (0..registry.len()).filter(|&i| !measured[i]).collect();
    let measured_idx: Vec<usize> = (0..registry.len()).filter(|&i| measured[i]).collect();
    let kept_registry = Arc::new(ModeRegistry::with_order(kept_idx.iter().map(|&i| registry.label(i)))?);

    let mut by_pattern: BTreeMap<Vec<u32>, Vec<(OccupationVector, Complex64)>> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        let ok = groups
            .iter()
            .all(|(idx, cond)| cond.accepts(idx.iter().map(|&i| occ.get(i)).sum()));
        if !ok {
            continue;
        }
        let pattern = measured_idx.iter().map(|&i| occ.get(i)).collect();
        let rest = OccupationVector::new(kept_idx.iter().map(|&i| occ.get(i)).collect());
        by_pattern.entry(pattern).or_default().push((rest, *amp));
    }

    let mut branches = Vec::with_capacity(by_pattern.len());
    let mut probability = 0.0;
    for (pattern, terms) in by_pattern {
        let sub = PureState::from_amplitudes(kept_registry.clone(), terms)?;
        if sub.is_zero() {
            continue;
        }
        probability += sub.norm_sqr();
        branches.push(HeraldBranch {
            pattern: measured_idx
                .iter()
                .zip(pattern)
                .map(|(&i, n)| (registry.label(i), n))
                .collect(),
            state: sub,
        });
    }
    Ok(HeraldResult { probability, branches })
}

/// Closed-form heralded amplitude for `n` photons meeting one ancilla photon
/// on a beam splitter of reflectivity `r`: `sqrt(R)^(n-1) [R - n (1 - R)]`.
///
/// At `n = 0` this is `sqrt(R)`. At `R = 0` the value is the limit of the
/// polynomial form (`0^0 = 1`): `0` for `n = 0` and `n >= 2`, `-1` for `n = 1`.
pub fn ns_amplitude(n: u32, r: Reflectivity) -> f64 {
    let r = r.value();
    if n == 0 {
        return r.sqrt();
    }
    let n_f = f64::from(n);
    // (n + 1) R - n is R - n (1 - R) rearranged; it rounds to an exact zero at R = n / (n + 1)
    r.sqrt().powi(n as i32 - 1) * ((n_f + 1.0) * r - n_f)
}

/// Closed form with `m` vertical and `n` horizontal photons and an
/// H-polarized ancilla: `sqrt(R_V)^m sqrt(R_H)^(n-1) [R_H - n (1 - R_H)]`.
pub fn ns_amplitude_pol(m: u32, n: u32, r_v: Reflectivity, r_h: Reflectivity) -> f64 {
    r_v.value().sqrt().powi(m as i32) * ns_amplitude(n, r_h)
}

/// Spatial index of the signal input (and transmitted-signal output) of the NS splitter.
pub const NS_SIGNAL_PORT: u32 = 1;
/// Spatial index of the ancilla input (and heralded output) of the NS splitter.
pub const NS_ANCILLA_PORT: u32 = 2;

/// Input state and circuit of the polarization NS operation:
/// `|m_V; n_H>` on the signal port, one H photon on the ancilla port.
pub fn ns_setup(m: u32, n: u32, r_v: Reflectivity, r_h: Reflectivity) -> Result<(PureState, ModeUnitary)> {
    let ports = [
        ModeLabel::h(NS_SIGNAL_PORT),
        ModeLabel::v(NS_SIGNAL_PORT),
        ModeLabel::h(NS_ANCILLA_PORT),
        ModeLabel::v(NS_ANCILLA_PORT),
    ];
    let registry = ModeRegistry::new(ports)?.shared();
    let input = PureState::basis(registry.clone(), &[(ports[1], m), (ports[0], n), (ports[2], 1)])?;
    let u = embed_into(&dual_pol_beam_splitter(r_v, r_h), &ports, &registry)?;
    Ok((input, u))
}

/// Runs the polarization NS operation through [`transform`] and [`herald`]:
/// exactly one H photon and no V photon at the ancilla output.
pub fn ns_pipeline(m: u32, n: u32, r_v: Reflectivity, r_h: Reflectivity) -> Result<HeraldResult> {
    let (input, u) = ns_setup(m, n, r_v, r_h)?;
    let out = transform(&u, &input)?;
    let spec = HeraldSpec::new()
        .group([ModeLabel::h(NS_ANCILLA_PORT)], HeraldCondition::Exactly(1))?
        .group([ModeLabel::v(NS_ANCILLA_PORT)], HeraldCondition::Zero)?;
    herald(&out, &spec)
}

/// Heralded amplitude of `|m_V; n_H>` returning to itself on the signal port.
pub fn ns_pipeline_amplitude(m: u32, n: u32, r_v: Reflectivity, r_h: Reflectivity) -> Result<Complex64> {
    let result = ns_pipeline(m, n, r_v, r_h)?;
    let Some(state) = result.conditional_state() else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    state.amplitude_of(&[(ModeLabel::v(NS_SIGNAL_PORT), m), (ModeLabel::h(NS_SIGNAL_PORT), n)])
}

/// Single-polarization version of [`ns_pipeline_amplitude`] on two modes.
pub fn ns_pipeline_amplitude_single(n: u32, r: Reflectivity) -> Result<Complex64> {
    let ports = [ModeLabel::h(NS_SIGNAL_PORT), ModeLabel::h(NS_ANCILLA_PORT)];
    let registry = ModeRegistry::new(ports)?.shared();
    let input = PureState::basis(registry.clone(), &[(ports[0], n), (ports[1], 1)])?;
    let u = embed_into(&beam_splitter(r), &ports, &registry)?;
    let out = transform(&u, &input)?;
    let spec = HeraldSpec::new().group([ports[1]], HeraldCondition::Exactly(1))?;
    let result = herald(&out, &spec)?;
    match result.conditional_state() {
        Some(s) => s.amplitude_of(&[(ports[0], n)]),
        None => Ok(Complex64::new(0.0, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::random_unitary;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Reflectivity {
        Reflectivity::new(x).unwrap()
    }

    /// Permanent straight from the definition: sum over all permutations.
    fn permanent_by_definition(a: &DMatrix<Complex64>) -> Complex64 {
        fn rec(a: &DMatrix<Complex64>, row: usize, used: &mut Vec<bool>) -> Complex64 {
            if row == a.nrows() {
                return c(1.0, 0.0);
            }
            let mut s = c(0.0, 0.0);
            for j in 0..a.ncols() {
                if !used[j] {
                    used[j] = true;
                    s += a[(row, j)] * rec(a, row + 1, used);
                    used[j] = false;
                }
            }
            s
        }
        rec(a, 0, &mut vec![false; a.ncols()])
    }

    fn two_mode() -> Arc<ModeRegistry> {
        ModeRegistry::new([ModeLabel::h(1), ModeLabel::h(2)]).unwrap().shared()
    }

    #[test]
    fn permanent_examples() {
        let a = c(0.3, -1.2);
        assert_eq!(permanent(&DMatrix::from_element(1, 1, a)).unwrap(), a);
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(permanent(&m).unwrap(), c(10.0, 0.0));
        let ones = DMatrix::from_element(3, 3, c(1.0, 0.0));
        assert!((permanent(&ones).unwrap() - c(6.0, 0.0)).norm() < 1e-12);
        assert_eq!(permanent(&DMatrix::<Complex64>::zeros(0, 0)).unwrap(), c(1.0, 0.0));
        assert!(matches!(
            permanent(&DMatrix::<Complex64>::zeros(2, 3)),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn ryser_matches_definition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let u = random_unitary(n, &mut rng);
            let got = permanent(u.matrix()).unwrap();
            let want = permanent_by_definition(u.matrix());
            assert!((got - want).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn occupations_are_lexicographic_and_complete() {
        let occ = occupations(3, 2);
        let counts: Vec<Vec<u32>> = occ.iter().map(|o| o.counts().to_vec()).collect();
        assert_eq!(
            counts,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0]
            ]
        );
        assert_eq!(occupations(12, 3).len(), 364);
    }

    #[test]
    fn transform_identity_is_exact() {
        let reg = two_mode();
        let s = PureState::basis(reg.clone(), &[(ModeLabel::h(1), 2), (ModeLabel::h(2), 1)]).unwrap();
        let out = transform(&ModeUnitary::identity(2), &s).unwrap();
        assert_eq!(out.support_size(), 1);
        assert_eq!(
            out.amplitude_of(&[(ModeLabel::h(1), 2), (ModeLabel::h(2), 1)]).unwrap(),
            c(1.0, 0.0)
        );
        let out = transform_oracle(&ModeUnitary::identity(2), &s).unwrap();
        assert_eq!(
            out.amplitude_of(&[(ModeLabel::h(1), 2), (ModeLabel::h(2), 1)]).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn single_photon_on_beam_splitter() {
        let reg = two_mode();
        let s = PureState::basis(reg.clone(), &[(ModeLabel::h(1), 1)]).unwrap();
        let refl = 0.3;
        let out = transform(&beam_splitter(r(refl)), &s).unwrap();
        assert!((out.amplitude_of(&[(ModeLabel::h(1), 1)]).unwrap().re - refl.sqrt()).abs() < 1e-15);
        assert!((out.amplitude_of(&[(ModeLabel::h(2), 1)]).unwrap().re - (1.0 - refl).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        let reg = two_mode();
        let s = PureState::basis(reg.clone(), &[(ModeLabel::h(1), 1), (ModeLabel::h(2), 1)]).unwrap();
        let bs = beam_splitter(Reflectivity::HALF);
        for out in [transform(&bs, &s).unwrap(), transform_oracle(&bs, &s).unwrap()] {
            assert_eq!(
                out.amplitude_of(&[(ModeLabel::h(1), 1), (ModeLabel::h(2), 1)]).unwrap(),
                c(0.0, 0.0)
            );
            assert!((out.amplitude_of(&[(ModeLabel::h(1), 2)]).unwrap().re + FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((out.amplitude_of(&[(ModeLabel::h(2), 2)]).unwrap().re - FRAC_1_SQRT_2).abs() < 1e-12);
            assert_eq!(out.support_size(), 2);
        }
    }

    #[test]
    fn random_three_mode_oracle_agreement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let reg = ModeRegistry::new([ModeLabel::h(0), ModeLabel::h(1), ModeLabel::h(2)])
            .unwrap()
            .shared();
        let s = PureState::basis(
            reg.clone(),
            &[(ModeLabel::h(0), 1), (ModeLabel::h(1), 1), (ModeLabel::h(2), 1)],
        )
        .unwrap();
        let u = random_unitary(3, &mut rng);
        let a = transform(&u, &s).unwrap();
        let b = transform_oracle(&u, &s).unwrap();
        for occ in occupations(3, 3) {
            assert!((a.amplitude(&occ) - b.amplitude(&occ)).norm() < 1e-9);
        }
        assert!((a.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn caps_are_enforced() {
        let reg = two_mode();
        let s = PureState::basis(reg.clone(), &[(ModeLabel::h(1), 9)]).unwrap();
        assert_eq!(
            transform(&ModeUnitary::identity(2), &s).unwrap_err(),
            Error::PhotonCapExceeded { photons: 9, cap: 8 }
        );
        assert!(matches!(
            transform(&ModeUnitary::identity(3), &PureState::vacuum(reg)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        let big = ModeRegistry::new((0..17).map(ModeLabel::h)).unwrap().shared();
        assert!(matches!(
            transform(&ModeUnitary::identity(17), &PureState::vacuum(big)),
            Err(Error::ModeCapExceeded { .. })
        ));
    }

    #[test]
    fn herald_ns_example() {
        let (input, u) = ns_setup(0, 2, Reflectivity::HALF, Reflectivity::HALF).unwrap();
        let out = transform(&u, &input).unwrap();
        let spec = HeraldSpec::new()
            .group([ModeLabel::h(NS_ANCILLA_PORT)], HeraldCondition::Exactly(1))
            .unwrap()
            .group([ModeLabel::v(NS_ANCILLA_PORT)], HeraldCondition::Zero)
            .unwrap();
        let res = herald(&out, &spec).unwrap();
        assert!((res.probability - 0.125).abs() < 1e-12);
        let cond = res.conditional_state().unwrap();
        assert_eq!(
            cond.registry().labels(),
            &[ModeLabel::h(NS_SIGNAL_PORT), ModeLabel::v(NS_SIGNAL_PORT)]
        );
        assert_eq!(cond.support_size(), 1);
        let amp = cond.amplitude_of(&[(ModeLabel::h(NS_SIGNAL_PORT), 2)]).unwrap();
        assert!((amp.re + 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn herald_trivial_cases() {
        let reg = two_mode();
        let vac = PureState::vacuum(reg.clone());
        let all_zero = HeraldSpec::new()
            .group(reg.labels().to_vec(), HeraldCondition::Zero)
            .unwrap();
        assert!((herald(&vac, &all_zero).unwrap().probability - 1.0).abs() < 1e-15);

        let two = PureState::basis(reg.clone(), &[(ModeLabel::h(1), 2)]).unwrap();
        let one = HeraldSpec::new()
            .group([ModeLabel::h(1)], HeraldCondition::Exactly(1))
            .unwrap();
        let res = herald(&two, &one).unwrap();
        assert_eq!(res.probability, 0.0);
        assert!(res.branches.is_empty());
        assert!(res.conditional_state().is_none());

        let click = HeraldSpec::new()
            .group([ModeLabel::h(1)], HeraldCondition::ThresholdClick)
            .unwrap();
        assert!((herald(&two, &click).unwrap().probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn herald_spec_errors() {
        let reg = two_mode();
        assert_eq!(
            HeraldSpec::new()
                .group([ModeLabel::h(1)], HeraldCondition::Zero)
                .unwrap()
                .group([ModeLabel::h(1)], HeraldCondition::Any)
                .unwrap_err(),
            Error::DuplicateMode(ModeLabel::h(1))
        );
        assert!(matches!(
            HeraldSpec::new().group([], HeraldCondition::Zero),
            Err(Error::IncompleteSpec(_))
        ));
        let spec = HeraldSpec::new()
            .group([ModeLabel::h(5)], HeraldCondition::Zero)
            .unwrap();
        assert!(matches!(
            herald(&PureState::vacuum(reg), &spec),
            Err(Error::IncompleteSpec(_))
        ));
    }

    #[test]
    fn herald_splits_patterns() {
        // photon spread over two measured modes of one group: two patterns
        let reg = two_mode();
        let bs = beam_splitter(Reflectivity::HALF);
        let s = transform(&bs, &PureState::basis(reg.clone(), &[(ModeLabel::h(1), 1)]).unwrap()).unwrap();
        let spec = HeraldSpec::new()
            .group([ModeLabel::h(1), ModeLabel::h(2)], HeraldCondition::Exactly(1))
            .unwrap();
        let res = herald(&s, &spec).unwrap();
        assert_eq!(res.branches.len(), 2);
        assert!(res.conditional_state().is_none());
        assert!((res.probability - 1.0).abs() < 1e-12);
        let summed: f64 = res.branches.iter().map(|b| b.state.norm_sqr()).sum();
        assert!((summed - res.probability).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let half = Reflectivity::HALF;
        let q = 1.0 / (2.0 * 2f64.sqrt());
        assert!((ns_amplitude(2, half) + 0.353553391).abs() < 1e-9);
        assert!((ns_amplitude(2, half) + q).abs() < 1e-15);
        assert_eq!(ns_amplitude(1, half), 0.0);
        assert_eq!(ns_amplitude(3, r(0.75)), 0.0);
        assert_eq!(ns_amplitude(0, r(0.3)), 0.3f64.sqrt());
        assert!((ns_amplitude_pol(2, 0, half, half) - q).abs() < 1e-15);
        assert_eq!(ns_amplitude_pol(1, 1, half, half), 0.0);
        let klm = ns_amplitude_pol(0, 2, Reflectivity::klm_vertical(), Reflectivity::klm_horizontal());
        assert!((klm + 0.628451).abs() < 1e-6);
    }

    #[test]
    fn critical_reflectivity_zeros() {
        for n in 1..=4u32 {
            let rc = r(f64::from(n) / f64::from(n + 1));
            assert_eq!(ns_amplitude(n, rc), 0.0, "n={n}");
            assert!(ns_pipeline_amplitude_single(n, rc).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn zero_reflectivity_matches_pipeline() {
        let zero = r(0.0);
        for n in 0..=3 {
            let pipe = ns_pipeline_amplitude_single(n, zero).unwrap();
            assert!((pipe.re - ns_amplitude(n, zero)).abs() < 1e-12, "n={n}");
        }
        assert_eq!(ns_amplitude(1, zero), -1.0);
    }

    #[test]
    fn closed_forms_match_pipeline_on_grid() {
        for k in 1..=9 {
            let rr = r(f64::from(k) / 10.0);
            for n in 0..=4 {
                let pipe = ns_pipeline_amplitude_single(n, rr).unwrap();
                assert!((pipe - c(ns_amplitude(n, rr), 0.0)).norm() < 1e-12, "n={n} R={k}/10");
            }
            let rv = r(1.0 - f64::from(k) / 10.0 * 0.9);
            for total in 0..=4u32 {
                for m in 0..=total {
                    let n = total - m;
                    let pipe = ns_pipeline_amplitude(m, n, rv, rr).unwrap();
                    let closed = ns_amplitude_pol(m, n, rv, rr);
                    assert!((pipe - c(closed, 0.0)).norm() < 1e-12, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn permutation_covariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let labels: Vec<ModeLabel> = (0..4).map(ModeLabel::h).collect();
        let reg = ModeRegistry::new(labels.clone()).unwrap().shared();
        let u = random_unitary(4, &mut rng);
        let s = PureState::basis(reg.clone(), &[(labels[0], 2), (labels[2], 1)]).unwrap();
        let out = transform(&u, &s).unwrap();

        // relabel mode i -> perm[i]
        let perm = [2usize, 0, 3, 1];
        let mut pm = DMatrix::zeros(4, 4);
        for i in 0..4 {
            pm[(perm[i], i)] = c(1.0, 0.0);
        }
        let pu = ModeUnitary::from_matrix(&pm * u.matrix() * pm.transpose()).unwrap();
        let ps = s.map_modes(|l| ModeLabel::h(perm[l.spatial as usize] as u32)).unwrap();
        let pout = transform(&pu, &ps).unwrap();
        let relabeled = out
            .map_modes(|l| ModeLabel::h(perm[l.spatial as usize] as u32))
            .unwrap();
        for occ in occupations(4, 3) {
            assert!((pout.amplitude(&occ) - relabeled.amplitude(&occ)).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn transform_conserves_probability(seed in any::<u64>(), dim in 1usize..=4, photons in 0u32..=4) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let reg = ModeRegistry::new((0..dim as u32).map(ModeLabel::h)).unwrap().shared();
            let u = random_unitary(dim, &mut rng);
            // superposition over all basis states with the given photon number
            let occs = occupations(dim, photons);
            let w = 1.0 / (occs.len() as f64).sqrt();
            let s = PureState::from_amplitudes(reg, occs.into_iter().enumerate().map(|(i, o)| {
                (o, Complex64::from_polar(w, i as f64))
            })).unwrap();
            let out = transform(&u, &s).unwrap();
            prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-9);
            prop_assert!(out.photon_numbers().iter().all(|&n| n == photons));
            let oracle = transform_oracle(&u, &s).unwrap();
            for (occ, a) in out.iter() {
                prop_assert!((a - oracle.amplitude(occ)).norm() < 1e-9);
            }
        }
    }
}
