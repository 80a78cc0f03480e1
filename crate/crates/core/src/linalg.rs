//! Small dense complex matrices and vectors.
//!
//! Every basis in this crate has at most twelve states, so a row-major
//! `Vec` with naive O(n³) products is the right tool.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Dense complex square matrix over a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

/// Complex amplitude vector over a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from row-major entries. Panics if the length is not a square.
    pub fn from_rows(dim: usize, entries: Vec<Complex<T>>) -> Self {
        assert_eq!(entries.len(), dim * dim, "row-major entries must be dim²");
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let lhs = self.entries[i * n + k];
                if lhs.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += lhs * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, state: &StateVector<T>) -> StateVector<T> {
        assert_eq!(self.dim, state.dim(), "apply dimension mismatch");
        let n = self.dim;
        let amplitudes = (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(&state.amplitudes)
                    .fold(Complex::zero(), |acc, (&m, &v)| acc + m * v)
            })
            .collect();
        StateVector { amplitudes }
    }

    /// ⟨u|M|v⟩.
    pub fn sandwich(&self, u: &StateVector<T>, v: &StateVector<T>) -> Complex<T> {
        u.inner(&self.apply(v))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).fold(T::zero(), |acc, i| acc + self.entries[i * n + j].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Spectral norm of a Hermitian matrix, by power iteration on M².
    /// Only used for diagnostics on small residual operators.
    pub fn hermitian_norm(&self) -> T {
        let sq = self.matmul(self);
        let n = self.dim;
        let mut v = StateVector::new(
            (0..n)
                .map(|i| Complex::new(T::one() + T::lit(0.1) * T::from_usize(i).unwrap(), T::zero()))
                .collect(),
        );
        let mut estimate = T::zero();
        for _ in 0..200 {
            let w = sq.apply(&v);
            let norm = w.norm();
            if norm.is_zero() {
                return T::zero();
            }
            estimate = norm / v.norm();
            v = w.scale_real(T::one() / norm);
        }
        estimate.sqrt()
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` for a numerically singular system.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.dim, rhs.dim, "solve dimension mismatch");
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut b = rhs.entries.clone();
        let scale = self.max_abs();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .norm()
                        .partial_cmp(&a[s * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot_row * n + col].norm() <= scale * T::epsilon() {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    b.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= factor * v;
                }
                for j in 0..n {
                    let v = b[col * n + j];
                    b[row * n + j] -= factor * v;
                }
            }
        }
        let mut x = vec![Complex::zero(); n * n];
        for row in (0..n).rev() {
            let pivot = a[row * n + row];
            for j in 0..n {
                let mut sum = b[row * n + j];
                for k in row + 1..n {
                    sum -= a[row * n + k] * x[k * n + j];
                }
                x[row * n + j] = sum / pivot;
            }
        }
        Some(Self { dim: n, entries: x })
    }
}

impl<T> Index<(usize, usize)> for OperatorMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for OperatorMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[i * self.dim + j]
    }
}

impl<T: Real> Add for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn add(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn sub(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn neg(self) -> OperatorMatrix<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn mul(self, rhs: Self) -> OperatorMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> AddAssign<&OperatorMatrix<T>> for OperatorMatrix<T> {
    fn add_assign(&mut self, rhs: &OperatorMatrix<T>) {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Complex::zero(); dim])
    }

    /// Unit vector on basis index `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = Complex::one();
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::new(self.amplitudes.iter().map(|&z| z * factor).collect())
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    /// Largest componentwise difference modulus.
    pub fn max_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}

impl<T> Index<usize> for StateVector<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, i: usize) -> &Complex<T> {
        &self.amplitudes[i]
    }
}

impl<T: Real> Add for &StateVector<T> {
    type Output = StateVector<T>;
    fn add(self, rhs: Self) -> StateVector<T> {
        assert_eq!(self.dim(), rhs.dim(), "add dimension mismatch");
        StateVector::new(
            self.amplitudes
                .iter()
                .zip(&rhs.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}
