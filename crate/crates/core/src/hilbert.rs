//! Truncated Fock-space operator algebra for two cavity modes and one
//! two-level emitter.
//!
//! Composite basis states are ordered lexicographically as
//! `(n_H, n_V, qd)` with the emitter index running fastest, so the flat
//! index is `(n_H·(n_max+1) + n_V)·2 + qd`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Matrix};
use crate::scalar::{czero, re, Cplx, Real};

/// Tensor factor of the composite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// H-polarized cavity mode.
    H,
    /// V-polarized cavity mode.
    V,
    /// Quantum-dot two-level transition.
    Qd,
}

/// Shape of the truncated composite space `H-mode ⊗ V-mode ⊗ QD`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    n_max: usize,
}

impl SpaceLayout {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of Fock levels per cavity mode.
    #[inline]
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total dimension `(n_max+1)²·2`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.fock_dim() * self.fock_dim() * 2
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::H | Slot::V => self.fock_dim(),
            Slot::Qd => 2,
        }
    }

    /// Flat basis index of `|n_h, n_v, qd⟩` (qd: 0 ground, 1 excited).
    #[inline]
    pub fn index(&self, n_h: usize, n_v: usize, qd: usize) -> usize {
        debug_assert!(n_h <= self.n_max && n_v <= self.n_max && qd < 2);
        (n_h * self.fock_dim() + n_v) * 2 + qd
    }

    /// Inverse of [`SpaceLayout::index`].
    #[inline]
    pub fn decompose(&self, idx: usize) -> (usize, usize, usize) {
        let qd = idx % 2;
        let rest = idx / 2;
        (rest / self.fock_dim(), rest % self.fock_dim(), qd)
    }
}

/// Space an [`Operator`] acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Single bosonic mode truncated at `n_max` photons.
    Mode { n_max: usize },
    /// Single two-level system.
    TwoLevel,
    /// Full composite space.
    Composite(SpaceLayout),
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::Mode { n_max } => n_max + 1,
            Space::TwoLevel => 2,
            Space::Composite(layout) => layout.dim(),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Mode { n_max } => write!(f, "mode(n_max={n_max})"),
            Space::TwoLevel => write!(f, "two-level"),
            Space::Composite(l) => write!(f, "composite(n_max={}, d={})", l.n_max(), l.dim()),
        }
    }
}

/// Linear operator on a (possibly single-factor) truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    space: Space,
    matrix: Matrix<T>,
}

impl<T: Real> Operator<T> {
    pub fn new(space: Space, matrix: Matrix<T>) -> Result<Self> {
        let d = space.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: Matrix::zeros(d, d),
        }
    }

    pub fn identity(space: Space) -> Self {
        Self {
            space,
            matrix: Matrix::identity(space.dim()),
        }
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    /// Composite layout, if this operator acts on the full space.
    pub fn layout(&self) -> Option<SpaceLayout> {
        match self.space {
            Space::Composite(l) => Some(l),
            _ => None,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cplx<T> {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> Cplx<T> {
        self.matrix.trace()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "commutator of operators on different spaces");
        Self {
            space: self.space,
            matrix: self.matrix.commutator(&other.matrix),
        }
    }

    /// `max |A − A†|`.
    pub fn hermiticity_error(&self) -> T {
        self.matrix.hermiticity_error()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn max_abs(&self) -> T {
        self.matrix.max_abs()
    }

    pub fn to_sparse(&self) -> CsrMatrix<T> {
        CsrMatrix::from_dense(&self.matrix)
    }

    /// Checks that two operators share a space, returning it.
    pub fn check_same_space(&self, other: &Self) -> Result<Space> {
        if self.space != other.space {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(self.space)
    }
}

impl<T: Real> Add for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.space, rhs.space, "adding operators on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<T: Real> Sub for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.space, rhs.space, "subtracting operators on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.space, rhs.space, "multiplying operators on different spaces");
        Operator {
            space: self.space,
            matrix: self.matrix.matmul(&rhs.matrix),
        }
    }
}

/// Single-mode annihilation operator on Fock levels `0..=n_max`.
pub fn fock_annihilation<T: Real>(n_max: usize) -> Result<Operator<T>> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    let mut m = Matrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        m[(n - 1, n)] = re(T::from_count(n).sqrt());
    }
    Operator::new(Space::Mode { n_max }, m)
}

/// Two-level lowering operator `σ = |g⟩⟨e|` in the basis `(g, e)`.
pub fn two_level_lowering<T: Real>() -> Operator<T> {
    let mut m = Matrix::zeros(2, 2);
    m[(0, 1)] = re(T::one());
    Operator {
        space: Space::TwoLevel,
        matrix: m,
    }
}

/// Lifts a single-factor operator into the composite space by tensoring with
/// identities on the other slots.
pub fn embed<T: Real>(op: &Operator<T>, slot: Slot, layout: SpaceLayout) -> Result<Operator<T>> {
    let expected = match slot {
        Slot::H | Slot::V => Space::Mode {
            n_max: layout.n_max(),
        },
        Slot::Qd => Space::TwoLevel,
    };
    if op.space != expected {
        return Err(Error::DimensionMismatch {
            expected: layout.slot_dim(slot),
            found: op.dim(),
        });
    }
    let fock = Matrix::identity(layout.fock_dim());
    let qd = Matrix::identity(2);
    let matrix = match slot {
        Slot::H => op.matrix.kron(&fock).kron(&qd),
        Slot::V => fock.kron(&op.matrix).kron(&qd),
        Slot::Qd => fock.kron(&fock).kron(&op.matrix),
    };
    Ok(Operator {
        space: Space::Composite(layout),
        matrix,
    })
}

/// The standard ladder operators of the composite space.
#[derive(Clone, Debug)]
pub struct Ladder<T> {
    pub layout: SpaceLayout,
    pub a_h: Operator<T>,
    pub a_v: Operator<T>,
    pub sigma: Operator<T>,
}

impl<T: Real> Ladder<T> {
    pub fn new(layout: SpaceLayout) -> Self {
        let a = fock_annihilation(layout.n_max()).expect("layout guarantees n_max >= 1");
        let sigma = two_level_lowering();
        Self {
            layout,
            a_h: embed(&a, Slot::H, layout).expect("mode slot"),
            a_v: embed(&a, Slot::V, layout).expect("mode slot"),
            sigma: embed(&sigma, Slot::Qd, layout).expect("qd slot"),
        }
    }

    pub fn mode(&self, slot: Slot) -> &Operator<T> {
        match slot {
            Slot::H => &self.a_h,
            Slot::V => &self.a_v,
            Slot::Qd => &self.sigma,
        }
    }

    /// `u·a_H + v·a_V`.
    pub fn superposition(&self, u: Cplx<T>, v: Cplx<T>) -> Operator<T> {
        &self.a_h.scale(u) + &self.a_v.scale(v)
    }

    /// Total excitation number `a†_H a_H + a†_V a_V + σ†σ`.
    pub fn excitation_number(&self) -> Operator<T> {
        let nh = &self.a_h.adjoint() * &self.a_h;
        let nv = &self.a_v.adjoint() * &self.a_v;
        let ne = &self.sigma.adjoint() * &self.sigma;
        &(&nh + &nv) + &ne
    }
}

/// Ket `|n_h, n_v, qd⟩` as a column vector.
pub fn basis_ket<T: Real>(layout: SpaceLayout, n_h: usize, n_v: usize, qd: usize) -> Vec<Cplx<T>> {
    let mut v = vec![czero(); layout.dim()];
    v[layout.index(n_h, n_v, qd)] = re(T::one());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn annihilation_n1_is_single_off_diagonal() {
        let a = fock_annihilation::<f64>(1).unwrap();
        assert_eq!(a.get(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(a.get(0, 0), Complex64::new(0.0, 0.0));
        assert_eq!(a.get(1, 0), Complex64::new(0.0, 0.0));
        assert_eq!(a.get(1, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn annihilation_rejects_zero_truncation() {
        assert_eq!(fock_annihilation::<f64>(0).unwrap_err(), Error::InvalidTruncation(0));
        assert!(SpaceLayout::new(0).is_err());
    }

    #[test]
    fn number_operator_diagonal() {
        let a = fock_annihilation::<f64>(5).unwrap();
        let n = &a.adjoint() * &a;
        for k in 0..=5 {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_commutator_is_identity_below_cutoff() {
        for n_max in 1..6 {
            let a = fock_annihilation::<f64>(n_max).unwrap();
            let comm = a.commutator(&a.adjoint());
            for i in 0..=n_max {
                for j in 0..=n_max {
                    let expected = if i != j {
                        0.0
                    } else if i < n_max {
                        1.0
                    } else {
                        -(n_max as f64)
                    };
                    assert!((comm.get(i, j) - Complex64::new(expected, 0.0)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn two_level_algebra() {
        let s = two_level_lowering::<f64>();
        // σ|e⟩ = |g⟩
        assert_eq!(s.matrix().matvec(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])[0].re, 1.0);
        assert_eq!((&s * &s).max_abs(), 0.0);
        let sd = s.adjoint();
        let completeness = &(&sd * &s) + &(&s * &sd);
        assert_eq!(completeness, Operator::identity(Space::TwoLevel));
        let proj = &sd * &s;
        assert_eq!(proj.get(1, 1).re, 1.0);
        assert_eq!(proj.get(0, 0).re, 0.0);
    }

    #[test]
    fn embed_identity_and_dimension_check() {
        let layout = SpaceLayout::new(2).unwrap();
        assert_eq!(layout.dim(), 18);
        let id = Operator::<f64>::identity(Space::Mode { n_max: 2 });
        let e = embed(&id, Slot::V, layout).unwrap();
        assert_eq!(e, Operator::identity(Space::Composite(layout)));
        let wrong = fock_annihilation::<f64>(3).unwrap();
        assert!(embed(&wrong, Slot::H, layout).is_err());
        assert!(embed(&two_level_lowering::<f64>(), Slot::H, layout).is_err());
    }

    #[test]
    fn trace_of_embedded_number_operator() {
        let layout = SpaceLayout::new(2).unwrap();
        let l = Ladder::<f64>::new(layout);
        let n_h = &l.a_h.adjoint() * &l.a_h;
        // brute-force oracle: sum n_h over every basis state
        let mut brute = 0.0;
        for idx in 0..layout.dim() {
            brute += layout.decompose(idx).0 as f64;
        }
        assert_eq!(brute, 18.0);
        assert!((n_h.trace().re - brute).abs() < 1e-12);
    }

    #[test]
    fn distinct_slots_commute_exactly() {
        let layout = SpaceLayout::new(3).unwrap();
        let l = Ladder::<f64>::new(layout);
        let ops = [&l.a_h, &l.a_v, &l.sigma];
        for (i, x) in ops.iter().enumerate() {
            for (j, y) in ops.iter().enumerate() {
                if i == j {
                    continue;
                }
                assert!(x.commutator(y).max_abs() < 1e-14);
                assert!(x.commutator(&y.adjoint()).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn basis_index_round_trips() {
        let layout = SpaceLayout::new(3).unwrap();
        for idx in 0..layout.dim() {
            let (h, v, q) = layout.decompose(idx);
            assert_eq!(layout.index(h, v, q), idx);
        }
        // a_H lowers n_H only
        let l = Ladder::<f64>::new(layout);
        let from = layout.index(2, 1, 1);
        let to = layout.index(1, 1, 1);
        assert!((l.a_h.get(to, from).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn embed_preserves_spectrum_with_multiplicity() {
        let layout = SpaceLayout::new(2).unwrap();
        let a = fock_annihilation::<f64>(2).unwrap();
        let x = &a + &a.adjoint();
        let local = x.matrix().hermitian_eigenvalues().unwrap();
        let big = embed(&x, Slot::V, layout).unwrap().matrix().hermitian_eigenvalues().unwrap();
        let mult = layout.dim() / 3;
        let mut expected: Vec<f64> = local.iter().flat_map(|&e| std::iter::repeat(e).take(mult)).collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (u, v) in big.iter().zip(&expected) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let layout = SpaceLayout::new(3).unwrap();
        let a = Ladder::<f64>::new(layout);
        let b = Ladder::<f64>::new(layout);
        assert_eq!(a.a_h, b.a_h);
        assert_eq!(a.a_v, b.a_v);
        assert_eq!(a.sigma, b.sigma);
    }

    #[test]
    fn works_in_single_precision() {
        let layout = SpaceLayout::new(2).unwrap();
        let l = Ladder::<f32>::new(layout);
        assert!(l.a_h.commutator(&l.a_v.adjoint()).max_abs() < 1e-6);
    }
}
