//! Small dense and compressed-sparse complex linear algebra.
//!
//! The matrices handled here are at most a few thousand rows: the
//! vectorized Liouvillian of a 50-dimensional Hilbert space is 2500 wide.
//! Dense LU and Hessenberg QR are adequate at that size; the sparse type
//! exists for the matrix-vector products that dominate time propagation.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, re, Cplx, Real};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Cplx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(diag: &[Cplx<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Cplx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_error(&self) -> T {
        let mut err = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Stored entries that are exactly non-zero, as `(row, col, value)`.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Cplx<T>)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.is_zero() {
                    out.push((i, j, z));
                }
            }
        }
        out
    }

    /// Eigenvalues of a general square matrix by Hessenberg reduction and
    /// shifted complex QR iteration. Order is unspecified.
    pub fn eigenvalues(&self) -> Result<Vec<Cplx<T>>> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut h = self.clone();
        h.reduce_to_hessenberg();
        let eps = T::epsilon();
        let scale = h.max_abs().max(T::min_positive_value());
        let mut out = Vec::with_capacity(n);
        let mut hi = n;
        let mut iter = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            if hi == 1 {
                out.push(h[(0, 0)]);
                break;
            }
            let mut l = hi - 1;
            while l > 0 {
                let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
                let s = if s.is_zero() { scale } else { s };
                if h[(l, l - 1)].norm() <= eps * s {
                    h[(l, l - 1)] = czero();
                    break;
                }
                l -= 1;
            }
            if l == hi - 1 {
                out.push(h[(hi - 1, hi - 1)]);
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > 60 * n {
                return Err(Error::NoConvergence);
            }
            let mu = if iter % 11 == 10 {
                // exceptional shift to break cycles
                h[(hi - 1, hi - 1)] + re(h[(hi - 1, hi - 2)].norm() * T::lit(0.75))
            } else {
                wilkinson_shift(
                    h[(hi - 2, hi - 2)],
                    h[(hi - 2, hi - 1)],
                    h[(hi - 1, hi - 2)],
                    h[(hi - 1, hi - 1)],
                )
            };
            for k in l..hi {
                h[(k, k)] -= mu;
            }
            let mut rotations = Vec::with_capacity(hi - l - 1);
            for k in l..hi - 1 {
                let a = h[(k, k)];
                let b = h[(k + 1, k)];
                let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
                let (c, s) = if r.is_zero() {
                    (cone(), czero())
                } else {
                    (a / r, b / r)
                };
                for j in k..hi {
                    let x = h[(k, j)];
                    let y = h[(k + 1, j)];
                    h[(k, j)] = c.conj() * x + s.conj() * y;
                    h[(k + 1, j)] = -s * x + c * y;
                }
                rotations.push((c, s));
            }
            for (idx, &(c, s)) in rotations.iter().enumerate() {
                let k = l + idx;
                let last = (k + 2).min(hi - 1);
                for i in l..=last {
                    let x = h[(i, k)];
                    let y = h[(i, k + 1)];
                    h[(i, k)] = x * c + y * s;
                    h[(i, k + 1)] = -x * s.conj() + y * c.conj();
                }
            }
            for k in l..hi {
                h[(k, k)] += mu;
            }
        }
        Ok(out)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<T>> {
        let mut ev: Vec<T> = self.eigenvalues()?.into_iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(ev)
    }

    fn reduce_to_hessenberg(&mut self) {
        let n = self.rows;
        if n < 3 {
            return;
        }
        for k in 0..n - 2 {
            let norm_x = (k + 1..n).map(|i| self[(i, k)].norm_sqr()).sum::<T>().sqrt();
            if norm_x.is_zero() {
                continue;
            }
            let x0 = self[(k + 1, k)];
            let phase = if x0.norm().is_zero() {
                cone()
            } else {
                x0 / x0.norm()
            };
            let alpha = -phase * norm_x;
            let mut v: Vec<Cplx<T>> = (k + 1..n).map(|i| self[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if vnorm.is_zero() {
                continue;
            }
            for z in &mut v {
                *z = *z / vnorm;
            }
            let two = re(T::lit(2.0));
            // left: rows k+1.., P = I - 2 v v†
            for j in 0..n {
                let dot: Cplx<T> = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| vi.conj() * self[(k + 1 + t, j)])
                    .sum();
                for (t, vi) in v.iter().enumerate() {
                    let cur = self[(k + 1 + t, j)];
                    self[(k + 1 + t, j)] = cur - two * *vi * dot;
                }
            }
            // right: cols k+1..
            for i in 0..n {
                let dot: Cplx<T> = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| self[(i, k + 1 + t)] * *vi)
                    .sum();
                for (t, vi) in v.iter().enumerate() {
                    let cur = self[(i, k + 1 + t)];
                    self[(i, k + 1 + t)] = cur - two * dot * vi.conj();
                }
            }
            for i in k + 2..n {
                self[(i, k)] = czero();
            }
        }
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        assert!(self.is_square(), "expm of a non-square matrix");
        let n = self.rows;
        let norm = self.norm_one();
        let mut squarings = 0u32;
        let half = T::lit(0.5);
        let mut scaled_norm = norm;
        while scaled_norm > half {
            scaled_norm = scaled_norm * half;
            squarings += 1;
        }
        let a = self.scale_real(T::lit(2.0).powi(-(squarings as i32)));
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = term.matmul(&a).scale_real(T::one() / T::from_count(k));
            let tnorm = term.max_abs();
            result = &result + &term;
            if tnorm <= T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

fn wilkinson_shift<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> Cplx<T> {
    let half = T::lit(0.5);
    let tr_half = (a + d) * half;
    let diff_half = (a - d) * half;
    let disc = (diff_half * diff_half + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Cplx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.scale(-cone::<T>())
    }
}

/// Compressed sparse row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cplx<T>>,
}

impl<T: Real> CsrMatrix<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, Cplx<T>)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Cplx<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet out of bounds");
            if last == Some((r, c)) {
                let top = values.len() - 1;
                values[top] += v;
            } else {
                indices.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_indices = Vec::with_capacity(indices.len());
        let mut keep_values = Vec::with_capacity(values.len());
        for ((c, v), r) in indices.into_iter().zip(values).zip(row_of) {
            if !v.is_zero() {
                keep_indices.push(c);
                keep_values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            rows,
            cols,
            indptr,
            indices: keep_indices,
            values: keep_values,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, Vec::new())
    }

    pub fn from_dense(m: &Matrix<T>) -> Self {
        Self::from_triplets(m.rows(), m.cols(), m.nonzeros())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Cplx<T>)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, Cplx<T>)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    /// `y = A·x`.
    pub fn matvec_into(&self, x: &[Cplx<T>], y: &mut [Cplx<T>]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = czero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![czero(); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ·A` (no conjugation).
    pub fn left_matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![czero(); self.cols];
        for (r, c, v) in self.iter() {
            y[c] += x[r] * v;
        }
        y
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// Kronecker product of two sparse matrices.
pub fn sparse_kron<T: Real>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> CsrMatrix<T> {
    let mut triplets = Vec::with_capacity(a.nnz() * b.nnz());
    for (i1, j1, x) in a.iter() {
        for (i2, j2, y) in b.iter() {
            triplets.push((i1 * b.rows() + i2, j1 * b.cols() + j2, x * y));
        }
    }
    CsrMatrix::from_triplets(a.rows() * b.rows(), a.cols() * b.cols(), triplets)
}

/// LU factorization with partial pivoting of a dense square matrix.
#[derive(Clone, Debug)]
pub struct LuDecomposition<T> {
    n: usize,
    lu: Vec<Cplx<T>>,
    perm: Vec<usize>,
}

impl<T: Real> LuDecomposition<T> {
    /// Factorizes `a`; a pivot below `n·ε·max|a|` is reported as singular.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = T::from_count(n.max(1)) * T::epsilon() * a.max_abs();
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag.is_zero() {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let inv = cone::<T>() / pivot;
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n + k + 1..k * n + n];
            for i in k + 1..n {
                let row = &mut tail[(i - k - 1) * n..(i - k) * n];
                let m = row[k];
                if m.is_zero() {
                    continue;
                }
                let m = m * inv;
                row[k] = m;
                for (dst, &src) in row[k + 1..].iter_mut().zip(pivot_row) {
                    if !src.is_zero() {
                        *dst -= m * src;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.n;
        assert_eq!(b.len(), n, "LU solve dimension mismatch");
        let mut x: Vec<Cplx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(x: &[Cplx<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn one_hot<T: Real>(n: usize, k: usize) -> Vec<Cplx<T>> {
    let mut v = vec![czero(); n];
    v[k] = Cplx::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_solves_small_system() {
        let a = Matrix::from_row_major(
            3,
            3,
            vec![
                c(0.0, 0.0),
                c(2.0, 1.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(0.0, -1.0),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 1.0),
            ],
        )
        .unwrap();
        let x_true = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let b = a.matvec(&x_true);
        let x = LuDecomposition::new(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn lu_reports_singular() {
        let a = Matrix::<f64>::from_fn(3, 3, |i, _| c(i as f64, 0.0));
        assert!(matches!(LuDecomposition::new(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let t = Matrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64 + 1.0, -(i as f64))
            } else if j > i {
                c(0.3, 0.1)
            } else {
                c(0.0, 0.0)
            }
        });
        let mut ev = t.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z - c(k as f64 + 1.0, -(k as f64))).norm() < 1e-12);
        }
        let rot = Matrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let mut ev = rot.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_preserve_trace_and_determinant_like_invariants() {
        // pseudo-random dense matrix; the eigenvalue sum must equal the trace
        let mut s = 7u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = Matrix::from_fn(12, 12, |_, _| c(next(), next()));
        let ev = a.eigenvalues().unwrap();
        let sum: Complex64 = ev.iter().sum();
        assert!((sum - a.trace()).norm() < 1e-11);
        let sq: Complex64 = ev.iter().map(|z| z * z).sum();
        assert!((sq - a.matmul(&a).trace()).norm() < 1e-10);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = Matrix::diagonal(&[c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]);
        let e = d.expm();
        assert!((e[(0, 0)] - c(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - Complex64::from_polar(1.0, 2.0)).norm() < 1e-13);
        assert!((e[(2, 2)] - c((-3f64).exp(), 0.0)).norm() < 1e-14);
        let n = Matrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e = n.expm();
        assert!((e[(0, 1)] - c(5.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn csr_matches_dense() {
        let a = Matrix::from_fn(5, 4, |i, j| if (i + j) % 3 == 0 { c(i as f64, j as f64) } else { c(0.0, 0.0) });
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.to_dense(), a);
        let x = vec![c(1.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, 3.0)];
        let y1 = s.matvec(&x);
        let y2 = a.matvec(&x);
        for (u, v) in y1.iter().zip(&y2) {
            assert!((u - v).norm() < 1e-14);
        }
        let sk = sparse_kron(&s, &s);
        assert_eq!(sk.to_dense(), a.kron(&a));
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let s = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 0, c(2.0, 0.0)), (1, 0, c(1.0, 0.0))],
        );
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.to_dense()[(1, 0)], c(3.0, 0.0));
    }
}
