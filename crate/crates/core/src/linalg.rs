//! Dense complex matrices, a cyclic Jacobi Hermitian eigensolver and the
//! Gram–Schmidt orthonormalization used for Haar sampling.
//!
//! Everything here is sized for desk-scale work (total dimension in the low
//! hundreds). Storage is row-major.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors; ragged input is rejected.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged row lengths".into()));
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Real-valued rows, convenient for fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// `|v><v|`.
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * half)
    }

    /// Kronecker product; `self` indexes the slower-varying factor.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self[(ar, ac)];
                if a.is_zero() {
                    continue;
                }
                for br in 0..other.rows {
                    let row = ar * other.rows + br;
                    for bc in 0..other.cols {
                        out[(row, ac * other.cols + bc)] = a * other[(br, bc)];
                    }
                }
            }
        }
        out
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest elementwise modulus of `self - other`. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_residual(&self) -> T {
        let g = &self.adjoint() * self;
        g.max_abs_diff(&Self::identity(self.cols))
    }

    /// Applies `op ⊗ I_rest` on the left and its adjoint on the right, where
    /// `op` acts on the leading tensor factor of dimension `op.rows()`.
    ///
    /// Equivalent to the dense conjugation by `op.kron(I)` without forming the
    /// Kronecker product.
    pub fn conjugate_leading(&self, op: &Self) -> Self {
        assert!(op.is_square() && self.is_square());
        let a = op.rows;
        assert_eq!(self.rows % a, 0, "operator does not divide the space");
        let rest = self.rows / a;
        let n = self.rows;

        let mut left = Self::zeros(n, n);
        for i in 0..a {
            for k in 0..a {
                let w = op[(i, k)];
                if w.is_zero() {
                    continue;
                }
                for r in 0..rest {
                    let dst = (i * rest + r) * n;
                    let src = (k * rest + r) * n;
                    for c in 0..n {
                        left.data[dst + c] = left.data[dst + c] + w * self.data[src + c];
                    }
                }
            }
        }

        let mut out = Self::zeros(n, n);
        for i in 0..a {
            for k in 0..a {
                let w = op[(i, k)].conj();
                if w.is_zero() {
                    continue;
                }
                for r in 0..rest {
                    let dst_col = i * rest + r;
                    let src_col = k * rest + r;
                    for row in 0..n {
                        let idx = row * n;
                        out.data[idx + dst_col] = out.data[idx + dst_col] + left.data[idx + src_col] * w;
                    }
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn neg(self) -> CMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let dst = r * rhs.cols;
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let src = k * rhs.cols;
                for c in 0..rhs.cols {
                    out.data[dst + c] = out.data[dst + c] + a * rhs.data[src + c];
                }
            }
        }
        out
    }
}

/// Eigenvalues (unsorted) and the unitary whose columns are the matching
/// eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Only the Hermitian part of the input is used.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let (values, vectors) = jacobi(m, true)?;
    Ok(HermitianEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only (unsorted).
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    jacobi(m, false).map(|(values, _)| values)
}

fn jacobi<T: Real>(m: &CMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<CMatrix<T>>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = want_vectors.then(|| CMatrix::<T>::identity(n));
    let eps = T::epsilon();
    let frob_sq = a.data.iter().map(|z| z.norm_sqr()).sum::<T>();
    let threshold = eps * eps * frob_sq;

    let off_sq = |a: &CMatrix<T>| {
        let mut s = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                s = s + a[(p, q)].norm_sqr();
            }
        }
        s
    };

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_sq(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= T::min_positive_value() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (g + g);
                let t = if theta.abs() > T::lit(1e15) {
                    T::one() / (theta + theta)
                } else {
                    let sign = if theta < T::zero() { -T::one() } else { T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // phase of a_pq; the rotation is J = diag(1, e^{-i phi}) · [[c, s], [-s, c]]
                let phase = apq / g;
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                let cc = Complex::new(c, T::zero());
                let sc = Complex::new(s, T::zero());

                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * cc + y * jqp;
                    a[(k, q)] = x * sc + y * jqq;
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = x * cc + y * jqp.conj();
                    a[(q, k)] = x * sc + y * jqq.conj();
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let x = v[(k, p)];
                        let y = v[(k, q)];
                        v[(k, p)] = x * cc + y * jqp;
                        v[(k, q)] = x * sc + y * jqq;
                    }
                }
            }
        }
    }
    if !converged && off_sq(&a) > threshold {
        return Err(Error::EigenSolverFailure {
            sweeps: MAX_JACOBI_SWEEPS,
            off_norm: off_sq(&a).sqrt().as_f64(),
            frobenius: frob_sq.sqrt().as_f64(),
        });
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((values, v))
}

/// `exp(i t H)` for Hermitian `H`, via its eigendecomposition.
pub fn exp_i_hermitian<T: Real>(h: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    let eig = hermitian_eigen(h)?;
    let n = h.rows();
    let phases: Vec<Complex<T>> = eig
        .values
        .iter()
        .map(|&l| Complex::from_polar(T::one(), t * l))
        .collect();
    let v = &eig.vectors;
    Ok(CMatrix::from_fn(n, n, |r, c| {
        (0..n).fold(Complex::zero(), |acc, k| acc + v[(r, k)] * phases[k] * v[(c, k)].conj())
    }))
}

/// Orthonormalizes the columns of a square matrix by modified Gram–Schmidt
/// with one re-orthogonalization pass.
///
/// The implied triangular factor has a positive real diagonal, which is the
/// phase convention that makes the orthonormalized Gaussian matrix Haar
/// distributed. Returns `None` when a column is numerically dependent.
pub fn orthonormalize_columns<T: Real>(g: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = g.rows();
    let mut q: Vec<Vec<Complex<T>>> = Vec::with_capacity(g.cols());
    for j in 0..g.cols() {
        let mut v = g.column(j);
        let start_norm = norm(&v);
        for _pass in 0..2 {
            for qi in &q {
                let proj = dot(qi, &v);
                for (vk, &qk) in v.iter_mut().zip(qi) {
                    *vk = *vk - qk * proj;
                }
            }
        }
        let r = norm(&v);
        if !(r > T::lit(1e3) * T::epsilon() * start_norm) || r <= T::zero() {
            return None;
        }
        q.push(v.into_iter().map(|z| z / r).collect());
    }
    Some(CMatrix::from_fn(n, g.cols(), |r, c| q[c][r]))
}

/// `<a|b>`.
pub fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
