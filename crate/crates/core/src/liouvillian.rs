//! Lindblad superoperator assembly and steady-state solution.
//!
//! Density matrices are vectorized column-major, `vec(ρ)[i + d·j] = ρ[i][j]`,
//! so that `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`.

use crate::error::{Error, Result};
use crate::hilbert::{Operator, Space};
use crate::linalg::{norm2, sparse_kron, CsrMatrix, LuDecomposition, Matrix};
use crate::scalar::{cone, czero, imag_unit, re, Cplx, Real};

/// Generator of the master equation acting on vectorized density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator<T> {
    space: Space,
    matrix: CsrMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn from_sparse(space: Space, matrix: CsrMatrix<T>) -> Result<Self> {
        let d2 = space.dim() * space.dim();
        if matrix.rows() != d2 || matrix.cols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: matrix.rows(),
            });
        }
        Ok(Self { space, matrix })
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    /// Hilbert-space dimension `d` (the superoperator is `d²×d²`).
    #[inline]
    pub fn hilbert_dim(&self) -> usize {
        self.space.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.matrix.matvec(x)
    }

    /// `max |vec(I)ᵀ·L|`; zero for a trace-preserving generator.
    pub fn trace_preservation_error(&self) -> T {
        let d = self.hilbert_dim();
        let left = self.matrix.left_matvec(&vec_identity::<T>(d));
        left.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// `vec(I_d)` in column-major order.
pub fn vec_identity<T: Real>(d: usize) -> Vec<Cplx<T>> {
    let mut v = vec![czero(); d * d];
    for i in 0..d {
        v[i + d * i] = cone();
    }
    v
}

/// `L = −i(I⊗H − Hᵀ⊗I) + Σ_k [C̄_k⊗C_k − ½(I⊗C_k†C_k + (C_k†C_k)ᵀ⊗I)]`.
pub fn build_liouvillian<T: Real>(h: &Operator<T>, collapses: &[Operator<T>]) -> Result<Superoperator<T>> {
    let space = h.space();
    for c in collapses {
        h.check_same_space(c)?;
    }
    let d = space.dim();
    let id = CsrMatrix::from_dense(&Matrix::identity(d));
    let hs = h.to_sparse();
    let ht = CsrMatrix::from_dense(&h.matrix().transpose());
    let minus_i = -imag_unit::<T>();
    let half = re(T::lit(0.5));

    let mut triplets: Vec<(usize, usize, Cplx<T>)> = Vec::new();
    for (r, c, v) in sparse_kron(&id, &hs).iter() {
        triplets.push((r, c, minus_i * v));
    }
    for (r, c, v) in sparse_kron(&ht, &id).iter() {
        triplets.push((r, c, -minus_i * v));
    }
    for op in collapses {
        let cd_c = &op.adjoint() * op;
        let conj = CsrMatrix::from_dense(&op.matrix().conj());
        for (r, c, v) in sparse_kron(&conj, &op.to_sparse()).iter() {
            triplets.push((r, c, v));
        }
        for (r, c, v) in sparse_kron(&id, &cd_c.to_sparse()).iter() {
            triplets.push((r, c, -half * v));
        }
        let cdct = CsrMatrix::from_dense(&cd_c.matrix().transpose());
        for (r, c, v) in sparse_kron(&cdct, &id).iter() {
            triplets.push((r, c, -half * v));
        }
    }
    Superoperator::from_sparse(space, CsrMatrix::from_triplets(d * d, d * d, triplets))
}

/// Density matrix on a truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    space: Space,
    matrix: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps a matrix without validation.
    pub fn from_matrix(space: Space, matrix: Matrix<T>) -> Result<Self> {
        let d = space.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.rows(),
            });
        }
        Ok(Self { space, matrix })
    }

    /// Unpacks a column-major vectorized matrix.
    pub fn from_vectorized(space: Space, v: &[Cplx<T>]) -> Result<Self> {
        let d = space.dim();
        if v.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: v.len(),
            });
        }
        Ok(Self {
            space,
            matrix: Matrix::from_fn(d, d, |i, j| v[i + d * j]),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn pure(space: Space, ket: &[Cplx<T>]) -> Result<Self> {
        let d = space.dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ket.len(),
            });
        }
        Ok(Self {
            space,
            matrix: Matrix::from_fn(d, d, |i, j| ket[i] * ket[j].conj()),
        })
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn vectorize(&self) -> Vec<Cplx<T>> {
        let d = self.dim();
        let mut v = vec![czero(); d * d];
        for j in 0..d {
            for i in 0..d {
                v[i + d * j] = self.matrix[(i, j)];
            }
        }
        v
    }

    pub fn trace(&self) -> Cplx<T> {
        self.matrix.trace()
    }

    /// `Tr(A·ρ)`.
    pub fn expect(&self, op: &Operator<T>) -> Cplx<T> {
        expect_matrix(op.matrix(), &self.matrix)
    }

    /// `(ρ + ρ†)/2`, rescaled to unit trace.
    pub fn hermitized(&self) -> Self {
        let sym = (&self.matrix + &self.matrix.adjoint()).scale_real(T::lit(0.5));
        let tr = sym.trace().re;
        Self {
            space: self.space,
            matrix: sym.scale_real(T::one() / tr),
        }
    }

    pub fn hermiticity_error(&self) -> T {
        self.matrix.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let sym = (&self.matrix + &self.matrix.adjoint()).scale_real(T::lit(0.5));
        Ok(sym.hermitian_eigenvalues()?.first().copied().unwrap_or_else(T::zero))
    }

    /// Checks Hermiticity and trace to `tol` and positivity to `positivity_tol`.
    pub fn validate(&self, tol: T, positivity_tol: T) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("not Hermitian (error {herm})"),
            });
        }
        let tr = self.trace();
        if (tr - cone::<T>()).norm() > tol {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("trace {tr} differs from 1"),
            });
        }
        let min = self.min_eigenvalue()?;
        if min < -positivity_tol {
            return Err(Error::TruncationTooSmall {
                min_eigenvalue: min.to_f64_lossy(),
                n_max: match self.space {
                    Space::Composite(l) => l.n_max(),
                    Space::Mode { n_max } => n_max,
                    Space::TwoLevel => 0,
                },
            });
        }
        Ok(())
    }

    /// Unnormalized `A·ρ·A†`.
    pub fn sandwich(&self, op: &Operator<T>) -> Matrix<T> {
        op.matrix().matmul(&self.matrix).matmul(&op.matrix().adjoint())
    }
}

/// `Tr(A·B)` without forming the product.
pub fn expect_matrix<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Cplx<T> {
    let d = a.rows();
    let mut acc = czero();
    for i in 0..d {
        for j in 0..d {
            let x = a[(i, j)];
            if x.re.is_zero() && x.im.is_zero() {
                continue;
            }
            acc += x * b[(j, i)];
        }
    }
    acc
}

/// Tolerances for [`steady_state_with`].
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions<T> {
    /// Bound on `‖L·vec(ρ)‖₂ / ‖L‖_F`.
    pub residual_tol: T,
    /// Most negative eigenvalue accepted before reporting truncation failure.
    pub positivity_tol: T,
}

impl<T: Real> Default for SteadyStateOptions<T> {
    fn default() -> Self {
        Self {
            residual_tol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
            positivity_tol: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
        }
    }
}

pub fn steady_state<T: Real>(l: &Superoperator<T>) -> Result<DensityMatrix<T>> {
    steady_state_with(l, SteadyStateOptions::default())
}

/// Kernel of `L` normalized to unit trace.
///
/// Solves the system with the first row replaced by the trace constraint
/// `vec(I)ᵀ·x = 1` by dense LU. When that system is singular the kernel is
/// searched by shifted inverse iteration from two different starting states;
/// disagreement between the two means the steady state is not unique.
pub fn steady_state_with<T: Real>(l: &Superoperator<T>, opts: SteadyStateOptions<T>) -> Result<DensityMatrix<T>> {
    let d = l.hilbert_dim();
    let n = d * d;
    let mut dense = l.matrix().to_dense();
    for j in 0..n {
        dense[(0, j)] = czero();
    }
    for i in 0..d {
        dense[(0, i + d * i)] = cone();
    }
    let mut rhs = vec![czero(); n];
    rhs[0] = cone();
    let x = match LuDecomposition::new(&dense) {
        Ok(lu) => lu.solve(&rhs),
        Err(Error::Singular { .. }) => kernel_by_inverse_iteration(l)?,
        Err(e) => return Err(e),
    };
    let rho = DensityMatrix::from_vectorized(l.space(), &x)?.hermitized();

    let min = rho.min_eigenvalue()?;
    if min < -opts.positivity_tol {
        return Err(Error::TruncationTooSmall {
            min_eigenvalue: min.to_f64_lossy(),
            n_max: match l.space() {
                Space::Composite(layout) => layout.n_max(),
                Space::Mode { n_max } => n_max,
                Space::TwoLevel => 0,
            },
        });
    }
    let residual = norm2(&l.apply(&rho.vectorize())) / l.matrix().frobenius_norm().max(T::min_positive_value());
    if residual > opts.residual_tol {
        return Err(Error::SteadyStateResidual {
            residual: residual.to_f64_lossy(),
            tolerance: opts.residual_tol.to_f64_lossy(),
        });
    }
    Ok(rho)
}

fn kernel_by_inverse_iteration<T: Real>(l: &Superoperator<T>) -> Result<Vec<Cplx<T>>> {
    let d = l.hilbert_dim();
    let n = d * d;
    let mut shifted = l.matrix().to_dense();
    let shift = l.matrix().max_abs() * T::lit(1e-9);
    for i in 0..n {
        shifted[(i, i)] -= re(shift);
    }
    let lu = LuDecomposition::new(&shifted).map_err(|_| {
        Error::DegenerateSteadyState("shifted generator is singular".into())
    })?;
    let iterate = |start: Vec<Cplx<T>>| -> Vec<Cplx<T>> {
        let mut x = start;
        for _ in 0..30 {
            x = lu.solve(&x);
            let nrm = norm2(&x);
            for z in &mut x {
                *z = *z / nrm;
            }
        }
        let tr: Cplx<T> = (0..d).map(|i| x[i + d * i]).sum();
        x.iter().map(|&z| z / tr).collect()
    };
    let mut start_a = vec_identity::<T>(d);
    for z in &mut start_a {
        *z = *z / T::from_count(d);
    }
    let mut start_b = vec![czero(); n];
    start_b[0] = cone();
    start_b[n - 1] = re(T::lit(0.5));
    let xa = iterate(start_a);
    let xb = iterate(start_b);
    let diff = xa.iter().zip(&xb).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
    if !diff.is_finite() || diff > T::lit(1e-6) {
        return Err(Error::DegenerateSteadyState(format!(
            "kernel of the generator is at least two-dimensional (states differ by {diff})"
        )));
    }
    Ok(xa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_annihilation, Ladder, SpaceLayout};
    use crate::model::{build_hamiltonian, collapse_operators, SystemParams};
    use num_complex::Complex64;

    #[test]
    fn zero_generator_without_terms() {
        let layout = SpaceLayout::new(1).unwrap();
        let h = Operator::<f64>::zeros(Space::Composite(layout));
        let l = build_liouvillian(&h, &[]).unwrap();
        assert_eq!(l.matrix().nnz(), 0);
    }

    #[test]
    fn empty_cavity_spectrum() {
        // oracle: dense 4x4 eigen-decomposition of the single-mode generator
        let kappa = 3.0f64;
        let a = fock_annihilation::<f64>(1).unwrap().scale_real(kappa.sqrt());
        let h = Operator::zeros(a.space());
        let l = build_liouvillian(&h, &[a]).unwrap();
        let mut ev = l.matrix().to_dense().eigenvalues().unwrap();
        ev.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
        let expected = [0.0, -kappa / 2.0, -kappa / 2.0, -kappa];
        for (z, e) in ev.iter().zip(expected) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12, "{z} vs {e}");
        }
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let h = Operator::<f64>::zeros(Space::Composite(SpaceLayout::new(1).unwrap()));
        let c = Operator::<f64>::zeros(Space::Composite(SpaceLayout::new(2).unwrap()));
        assert!(matches!(build_liouvillian(&h, &[c]), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn vacuum_is_steady_without_drive() {
        let layout = SpaceLayout::new(2).unwrap();
        let p = SystemParams::<f64>::reference_defaults().with_drive(0.0, 0.0, 0.0);
        let l = build_liouvillian(&build_hamiltonian(&p, layout), &collapse_operators(&p, layout)).unwrap();
        let rho = steady_state(&l).unwrap();
        let g = layout.index(0, 0, 0);
        assert!((rho.matrix()[(g, g)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix().max_abs() - 1.0 < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_kernel_is_reported() {
        // no emitter decay and no coupling: the excited population is conserved
        let layout = SpaceLayout::new(1).unwrap();
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = 0.0;
        p.gamma_par = 0.0;
        p.gamma_star = 0.0;
        let l = build_liouvillian(&build_hamiltonian(&p, layout), &collapse_operators(&p, layout)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState(_))));
    }

    #[test]
    fn vectorization_round_trip() {
        let layout = SpaceLayout::new(1).unwrap();
        let l = Ladder::<f64>::new(layout);
        let m = (&l.a_h + &l.sigma.adjoint()).into_matrix();
        let rho = DensityMatrix::from_matrix(Space::Composite(layout), m.clone()).unwrap();
        let back = DensityMatrix::from_vectorized(Space::Composite(layout), &rho.vectorize()).unwrap();
        assert_eq!(back.matrix(), &m);
    }

    #[test]
    fn vectorization_identity_holds() {
        // vec(AρB) = (Bᵀ⊗A) vec(ρ)
        let layout = SpaceLayout::new(1).unwrap();
        let l = Ladder::<f64>::new(layout);
        let a = (&l.a_h + &l.sigma).into_matrix();
        let b = (&l.a_v.adjoint() + &l.a_h).into_matrix();
        let rho = Matrix::from_fn(8, 8, |i, j| Complex64::new((i * 3 + j) as f64, i as f64 - j as f64));
        let lhs = DensityMatrix::from_matrix(Space::Composite(layout), a.matmul(&rho).matmul(&b))
            .unwrap()
            .vectorize();
        let r = DensityMatrix::from_matrix(Space::Composite(layout), rho).unwrap().vectorize();
        let rhs = b.transpose().kron(&a).matvec(&r);
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
