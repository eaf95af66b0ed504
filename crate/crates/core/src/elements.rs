//! Mode unitaries for beam splitters, wave plates and polarizing routers.
//!
//! A [`ModeUnitary`] `U` acts on creation operators as
//! `a_in(j) -> sum_k U[k][j] a_out(k)`: column `j` is the image of input mode
//! `j`. Beam splitters use the convention
//!
//! ```text
//! a1 ->  sqrt(R) a3 + sqrt(1-R) a4
//! a2 -> -sqrt(1-R) a3 + sqrt(R) a4
//! ```
//!
//! with the minus sign on the transmission of the second (ancilla) port. The
//! heralded sign flip and the orientation of the interference fringes depend
//! on this sign.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{ModeLabel, ModeRegistry};

/// Maximum entry-wise deviation of `U^dagger U` from identity accepted as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Spatial index of the path leading to detector A (vertical output of the PBS).
pub const DETECTOR_A: u32 = 10;
/// Spatial index of the path leading to detector B (horizontal output of the PBS).
pub const DETECTOR_B: u32 = 11;
/// Spatial index of the analyzed output port of the NS beam splitter.
pub const ANALYZED_PORT: u32 = 7;

/// Reflection probability of a beam splitter, in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Reflectivity(f64);

impl Reflectivity {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("reflectivity {value} outside [0, 1]")))
        }
    }

    pub const HALF: Reflectivity = Reflectivity(0.5);

    pub fn value(self) -> f64 {
        self.0
    }

    /// Vertical reflectivity `5 - 3 sqrt(2)` of the KLM sign gate.
    pub fn klm_vertical() -> Self {
        Self(5.0 - 3.0 * std::f64::consts::SQRT_2)
    }

    /// Horizontal reflectivity `(3 - sqrt(2)) / 7` of the KLM sign gate.
    pub fn klm_horizontal() -> Self {
        Self((3.0 - std::f64::consts::SQRT_2) / 7.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    /// Wraps a matrix after checking that it is square and unitary.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let u = Self { matrix };
        let dev = u.unitarity_deviation();
        if dev > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(u)
    }

    fn from_real(dim: usize, entries: &[f64]) -> Self {
        Self {
            matrix: DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&x| Complex64::new(x, 0.0))),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Amplitude for input mode `input` to end up in output mode `output`.
    pub fn entry(&self, output: usize, input: usize) -> Complex64 {
        self.matrix[(output, input)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry of `|U^dagger U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    /// Largest entry-wise distance to `other`.
    pub fn max_deviation(&self, other: &ModeUnitary) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Two-port beam splitter on `(port 1, port 2)`.
pub fn beam_splitter(r: Reflectivity) -> ModeUnitary {
    let refl = r.value().sqrt();
    let trans = (1.0 - r.value()).sqrt();
    ModeUnitary::from_real(2, &[refl, -trans, trans, refl])
}

/// Polarization-dependent beam splitter on four modes ordered
/// `[port1 H, port1 V, port2 H, port2 V]`. The H and V blocks are independent
/// beam splitters; polarization is never mixed.
pub fn dual_pol_beam_splitter(r_v: Reflectivity, r_h: Reflectivity) -> ModeUnitary {
    let h = beam_splitter(r_h);
    let v = beam_splitter(r_v);
    let mut m = DMatrix::zeros(4, 4);
    for (block, offset) in [(&h, 0), (&v, 1)] {
        for out in 0..2 {
            for inp in 0..2 {
                m[(2 * out + offset, 2 * inp + offset)] = block.entry(out, inp);
            }
        }
    }
    ModeUnitary { matrix: m }
}

/// Half-wave plate on `(H, V)` of one spatial mode, parameterized by the
/// polarization rotation angle in degrees (twice the physical plate angle).
pub fn half_wave_plate(rotation_deg: f64) -> ModeUnitary {
    let rho = rotation_deg.to_radians();
    let (s, c) = rho.sin_cos();
    ModeUnitary::from_real(2, &[c, s, s, -c])
}

/// Polarizing beam splitter on the analyzed port: vertical light goes to the
/// path of detector A, horizontal light to detector B. Applied for every
/// temporal slot that carries all four modes.
pub fn pbs_router(registry: &ModeRegistry) -> Result<ModeUnitary> {
    let needed = [
        ModeLabel::v(ANALYZED_PORT),
        ModeLabel::v(DETECTOR_A),
        ModeLabel::h(ANALYZED_PORT),
        ModeLabel::h(DETECTOR_B),
    ];
    registry.indices_of(&needed)?;
    let mut perm: Vec<usize> = (0..registry.len()).collect();
    let slots = registry.labels().iter().map(|l| l.temporal).max().unwrap_or(0);
    for t in 0..=slots {
        let at = needed.map(|l| l.at_time(t));
        if let Ok(idx) = registry.indices_of(&at) {
            perm.swap(idx[0], idx[1]);
            perm.swap(idx[2], idx[3]);
        }
    }
    let n = registry.len();
    let mut m = DMatrix::zeros(n, n);
    for (input, &output) in perm.iter().enumerate() {
        m[(output, input)] = Complex64::new(1.0, 0.0);
    }
    Ok(ModeUnitary { matrix: m })
}

/// Places `u` on `targets` (in that order) inside `registry`, identity elsewhere.
pub fn embed_into(u: &ModeUnitary, targets: &[ModeLabel], registry: &ModeRegistry) -> Result<ModeUnitary> {
    if targets.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: targets.len(),
        });
    }
    let mut seen = HashSet::new();
    for t in targets {
        if !seen.insert(*t) {
            return Err(Error::DuplicateMode(*t));
        }
    }
    let idx = registry.indices_of(targets)?;
    let mut m = DMatrix::identity(registry.len(), registry.len());
    for &i in &idx {
        m[(i, i)] = Complex64::new(0.0, 0.0);
    }
    for (a, &out) in idx.iter().enumerate() {
        for (b, &inp) in idx.iter().enumerate() {
            m[(out, inp)] = u.entry(a, b);
        }
    }
    Ok(ModeUnitary { matrix: m })
}

/// Cascade of elements; the first listed acts first.
pub fn compose(elements: &[ModeUnitary]) -> Result<ModeUnitary> {
    let first = elements.first().ok_or(Error::EmptyComposition)?;
    let dim = first.dim();
    let mut acc = first.matrix.clone();
    for e in &elements[1..] {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.dim(),
            });
        }
        acc = &e.matrix * acc;
    }
    let u = ModeUnitary { matrix: acc };
    let dev = u.unitarity_deviation();
    if dev > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary(dev));
    }
    Ok(u)
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ModeUnitary {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ModeUnitary { matrix: q }
}
