//! Dense complex matrices and the handful of factorizations the leakage
//! analysis needs.
//!
//! Storage is row-major `Vec<Complex64>`. Zero-sized matrices are valid
//! everywhere: their log-determinant is 0 and their singular-value list is
//! empty.
//!
//! Singular values are never computed by a full SVD. They are the square
//! roots of the eigenvalues of the smaller Gram matrix, obtained from a
//! Householder tridiagonalization followed by implicit QL.

mod eigen;
mod factor;
mod random;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use factor::{
    cholesky, logdet_gram_shifted, logdet_hpd, logdet_psd_shifted, null_space_basis,
    scaled_pseudo_inverse, singular_values, sv_log_sum, SV_FLOOR,
};
pub use random::{sample_bartlett_factor, sample_gaussian, sample_haar_unitary};

/// Relative tolerance used to decide whether an input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Full-row-rank threshold: `σ_min > RANK_TOL · σ_max`.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(alloc::format!(
                "{} entries given for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Builds a real-valued matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_columns(&mut self, range: core::ops::Range<usize>, s: f64) {
        for i in 0..self.rows {
            for j in range.clone() {
                self.data[i * self.cols + j] *= s;
            }
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &CMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(alloc::format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix product, or an error when the inner dimensions differ.
    pub fn matmul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A A^H`, exploiting Hermitian symmetry.
    pub fn gram_rows(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in 0..=i {
                let rj = self.row(j);
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in ri.iter().zip(rj) {
                    acc += a * b.conj();
                }
                out.data[i * n + j] = acc;
                out.data[j * n + i] = acc.conj();
            }
            out.data[i * n + i].im = 0.0;
        }
        out
    }

    /// `A^H A`, exploiting Hermitian symmetry.
    pub fn gram_cols(&self) -> Self {
        self.adjoint().gram_rows()
    }

    /// Gram matrix of the smaller side: `A A^H` when rows ≤ cols, else `A^H A`.
    pub fn small_gram(&self) -> Self {
        if self.rows <= self.cols {
            self.gram_rows()
        } else {
            self.gram_cols()
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_norm_sqr())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `true` when `‖A − A^H‖_max ≤ tol · max(1, ‖A‖_max)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..self.rows {
            for j in 0..=i {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hcat(&self, other: &CMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::invalid("hcat: row counts differ"));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        }))
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vcat(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::invalid("vcat: column counts differ"));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(CMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Copy of the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on dimension mismatch; use [`CMatrix::matmul`] for a fallible product.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = b.shape();
    CMatrix::from_fn(a.rows * p, a.cols * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// Kronecker sum `A ⊕ B = A ⊗ I_q + I_p ⊗ B` for square `A` (p×p) and `B` (q×q).
pub fn kron_sum(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::invalid("kron_sum needs square inputs"));
    }
    let left = kron(a, &CMatrix::identity(b.rows));
    let right = kron(&CMatrix::identity(a.rows), b);
    left.add(&right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_small() {
        let a = CMatrix::from_vec(1, 2, vec![c(1.0, 1.0), c(0.0, 2.0)]).unwrap();
        let b = CMatrix::from_vec(2, 1, vec![c(2.0, 0.0), c(1.0, -1.0)]).unwrap();
        let p = &a * &b;
        // (1+i)2 + 2i(1-i) = 2+2i + 2i + 2 = 4+4i
        assert_eq!(p[(0, 0)], c(4.0, 4.0));
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn gram_matches_product() {
        let a = CMatrix::from_fn(3, 5, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.5));
        let direct = &a * &a.adjoint();
        assert!(a.gram_rows().max_abs_diff(&direct) < 1e-12);
        let direct = &a.adjoint() * &a;
        assert!(a.gram_cols().max_abs_diff(&direct) < 1e-12);
        assert_eq!(a.small_gram().shape(), (3, 3));
    }

    #[test]
    fn empty_shapes() {
        let e = CMatrix::zeros(0, 5);
        assert!(e.is_empty());
        assert_eq!(e.gram_rows().shape(), (0, 0));
        assert_eq!(e.adjoint().shape(), (5, 0));
        let p = &CMatrix::zeros(3, 0) * &CMatrix::zeros(0, 2);
        assert_eq!(p, CMatrix::zeros(3, 2));
    }

    #[test]
    fn kron_identity() {
        let k = kron(&CMatrix::identity(2), &CMatrix::identity(3));
        assert_eq!(k, CMatrix::identity(6));
    }

    #[test]
    fn kron_mixed_product() {
        // (A⊗B)(C⊗D) = AC ⊗ BD and (A⊗B)^H = A^H ⊗ B^H
        let a = CMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64));
        let b = CMatrix::from_fn(2, 3, |i, j| c(j as f64, -(i as f64)));
        let cm = CMatrix::from_fn(2, 2, |i, j| c((i + j) as f64, 1.0));
        let d = CMatrix::from_fn(3, 1, |i, _| c(0.5, i as f64));
        let lhs = &kron(&a, &b) * &kron(&cm, &d);
        let rhs = kron(&(&a * &cm), &(&b * &d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        assert!(kron(&a, &b)
            .adjoint()
            .max_abs_diff(&kron(&a.adjoint(), &b.adjoint()))
            < 1e-12);
    }

    #[test]
    fn kron_sum_rejects_rectangular() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(
            kron_sum(&a, &CMatrix::identity(2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn kron_sum_diagonal_eigenvalues() {
        let s = kron_sum(&CMatrix::from_diag(&[1.0, 2.0]), &CMatrix::from_diag(&[10.0])).unwrap();
        let ev = hermitian_eigenvalues(&s).unwrap();
        assert!((ev[0] - 12.0).abs() < 1e-12 && (ev[1] - 11.0).abs() < 1e-12);
    }

    #[test]
    fn concat_and_block() {
        let a = CMatrix::identity(2);
        let b = CMatrix::zeros(2, 1);
        let h = a.hcat(&b).unwrap();
        assert_eq!(h.shape(), (2, 3));
        let v = a.vcat(&CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(v.shape(), (3, 2));
        assert_eq!(h.block(0, 0, 2, 2), a);
        assert!(a.hcat(&CMatrix::zeros(3, 1)).is_err());
    }
}
