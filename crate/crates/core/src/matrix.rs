//! Dense square complex matrices.
//!
//! Everything in this crate works with small, square, row-major matrices of
//! `Complex64`. The type is deliberately minimal: products, adjoints, traces,
//! Kronecker products and a Hermitian eigendecomposition (delegated to
//! `nalgebra`).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count accepted by dense operations (65536-entry matrices).
pub const MAX_DENSE_QUBITS: usize = 8;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails unless `data.len() == dim²`.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {}x{} = {} entries, got {}",
                dim,
                dim,
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows, rejecting ragged or non-square input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Shape("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, matrix is not {dim}x{dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// Real-valued convenience constructor used heavily in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Shape(format!(
                "outer product of vectors of length {} and {}",
                a.len(),
                b.len()
            )));
        }
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for ai in a {
            for bj in b {
                data.push(ai * bj.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    /// Number of qubits if the dimension is a power of two.
    pub fn qubits(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// Checked matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let out_row = &mut out[i * d..(i + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, data: out }
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_dim(other)?;
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[i * d + k] * other.data[k * d + i];
            }
        }
        Ok(acc)
    }

    /// `A · self · A†`.
    pub fn conjugate_by(&self, a: &Self) -> Result<Self> {
        self.check_same_dim(a)?;
        Ok(a.mul_unchecked(self).mul_unchecked(&a.adjoint()))
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entry of `|self − self†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let dev = (self.data[i * d + j] - self.data[j * d + i].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&adj.data)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        }
    }

    /// Eigendecomposition of the Hermitian part of the matrix.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let h = self.hermitian_part();
        let d = self.dim;
        let m = DMatrix::from_row_slice(d, d, &h.data);
        let eig = m.symmetric_eigen();
        let mut vectors = Vec::with_capacity(d);
        for c in 0..d {
            vectors.push(eig.eigenvectors.column(c).iter().copied().collect());
        }
        HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors,
        }
    }

    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.hermitian_eigen()
            .values
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim);
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl HermitianEigen {
    /// Rebuilds `Σ g(λ_k) |v_k⟩⟨v_k|`.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = g(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    out.data[i * d + j] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..da {
        for j in 0..da {
            let aij = a.data[i * da + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * d + j * db + l] = aij * b.data[k * db + l];
                }
            }
        }
    }
    out
}

/// Hilbert–Schmidt inner product `tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    a.check_same_dim(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Takes the real part of `z`, refusing if the imaginary residue exceeds `tol`.
pub fn real_part_checked(z: Complex64, tol: f64, what: &str) -> Result<f64> {
    if z.im.abs() > tol {
        return Err(Error::Consistency(format!(
            "{what} has imaginary part {:e} (limit {:e})",
            z.im, tol
        )));
    }
    Ok(z.re)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator impls panic on dimension mismatch; use the checked methods when
// dimensions come from untrusted input.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim, rhs.dim,
            "dimension mismatch in matrix subtraction"
        );
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        self.mul_unchecked(rhs)
    }
}
