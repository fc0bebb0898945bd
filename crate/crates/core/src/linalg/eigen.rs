//! Hermitian eigensolver: complex Householder reduction to a real symmetric
//! tridiagonal matrix, then implicit QL with Wilkinson-style shifts.
//!
//! The QL sweep follows the EISPACK `tql2` procedure. Plane rotations are
//! real, so accumulating them into a complex basis is the same loop.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{CMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

/// Eigen-decomposition `A = U diag(values) U^H`, values descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `‖A − U Λ U^H‖_F / ‖A‖_F` (or the absolute residual when `A = 0`).
    pub fn reconstruction_residual(&self, a: &CMatrix) -> f64 {
        let u = &self.vectors;
        let n = u.rows();
        let mut scaled = u.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        let rebuilt = &scaled * &u.adjoint();
        let err = rebuilt.sub(a).expect("same shape").frobenius_norm();
        let norm = a.frobenius_norm();
        if norm > 0.0 {
            err / norm
        } else {
            err
        }
    }
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::invalid(alloc::format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::invalid("matrix is not Hermitian"));
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let (mut d, mut e, _) = tridiagonalize(a, false);
    tql(&mut d, &mut e, None);
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Eigenvalues (descending) together with an orthonormal eigenbasis.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    let n = a.rows();
    let (mut d, mut e, reduction) = tridiagonalize(a, true);
    let reduction = reduction.expect("requested");

    let mut z = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        z[i * n + i] = Complex64::new(1.0, 0.0);
    }
    tql(&mut d, &mut e, Some(&mut z));

    // U = Q · D · Z
    for i in 0..n {
        let ph = reduction.phases[i];
        for j in 0..n {
            z[i * n + j] *= ph;
        }
    }
    for (k, refl) in reduction.reflectors.iter().enumerate().rev() {
        let Some((v, tau)) = refl else { continue };
        let off = k + 1;
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vr) in v.iter().enumerate() {
                dot += vr.conj() * z[(off + r) * n + j];
            }
            let s = dot * *tau;
            for (r, vr) in v.iter().enumerate() {
                z[(off + r) * n + j] -= vr * s;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| z[i * n + order[j]]);
    Ok(HermitianEigen { values, vectors })
}

struct Reduction {
    reflectors: Vec<Option<(Vec<Complex64>, f64)>>,
    phases: Vec<Complex64>,
}

/// Reduces `a` to a real symmetric tridiagonal matrix `(d, e)` where `e[i]`
/// couples `i` and `i + 1` and `e[n-1] = 0`.
fn tridiagonalize(a: &CMatrix, keep: bool) -> (Vec<f64>, Vec<f64>, Option<Reduction>) {
    let n = a.rows();
    let mut w: Vec<Complex64> = a.as_slice().to_vec();
    let mut reflectors = Vec::new();
    let zero = Complex64::new(0.0, 0.0);

    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let off = k + 1;
        let x0 = w[off * n + k];
        let tail: f64 = (1..m).map(|j| w[(off + j) * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            if keep {
                reflectors.push(None);
            }
            continue;
        }
        let xnorm = libm::sqrt(x0.norm_sqr() + tail);
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;

        let mut v: Vec<Complex64> = (0..m).map(|j| w[(off + j) * n + k]).collect();
        v[0] -= alpha;
        let vhv = v[0].norm_sqr() + tail;
        let tau = 2.0 / vhv;

        // p = tau · B v over the trailing block
        for i in 0..m {
            let row = &w[(off + i) * n + off..(off + i) * n + n];
            let mut acc = zero;
            for (b, vj) in row.iter().zip(&v) {
                acc += b * vj;
            }
            p[i] = acc * tau;
        }
        let mut vhp = zero;
        for i in 0..m {
            vhp += v[i].conj() * p[i];
        }
        let kappa = 0.5 * tau * vhp.re;
        for i in 0..m {
            p[i] -= v[i] * kappa;
        }
        // B -= v w^H + w v^H
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut w[(off + i) * n + off..(off + i) * n + n];
            for (j, b) in row.iter_mut().enumerate() {
                *b -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        w[off * n + k] = alpha;
        w[k * n + off] = alpha.conj();
        for j in 1..m {
            w[(off + j) * n + k] = zero;
            w[k * n + off + j] = zero;
        }
        if keep {
            reflectors.push(Some((v, tau)));
        }
    }

    let d: Vec<f64> = (0..n).map(|i| w[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let s = w[(i + 1) * n + i];
        let r = s.norm();
        e[i] = r;
        phases[i + 1] = if r > 0.0 { phases[i] * (s / r) } else { phases[i] };
    }
    let reduction = keep.then_some(Reduction { reflectors, phases });
    (d, e, reduction)
}

/// Implicit QL on a symmetric tridiagonal matrix. Eigenvalues are left in
/// `d` (unsorted); rotations are accumulated into the columns of `z` if given.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [Complex64]>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zh = z[k * n + i + 1];
                            let zi = z[k * n + i];
                            z[k * n + i + 1] = zi * s + zh * c;
                            z[k * n + i] = zi * c - zh * s;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter >= 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_three() {
        let ev = hermitian_eigenvalues(&CMatrix::identity(3)).unwrap();
        assert_eq!(ev.len(), 3);
        for v in ev {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        let a = CMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let eig = hermitian_eigen(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-13);
        assert!((eig.values[1] - 1.0).abs() < 1e-13);
        assert!(eig.reconstruction_residual(&a) < 1e-13);
    }

    #[test]
    fn tridiagonal_input_with_complex_coupling() {
        let a = CMatrix::from_vec(
            3,
            3,
            vec![
                c(1.0, 0.0),
                c(0.0, 2.0),
                c(0.0, 0.0),
                c(0.0, -2.0),
                c(-1.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(1.0, -1.0),
                c(3.0, 0.0),
            ],
        )
        .unwrap();
        let eig = hermitian_eigen(&a).unwrap();
        assert!(eig.reconstruction_residual(&a) < 1e-13);
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(hermitian_eigenvalues(&CMatrix::zeros(0, 0)).unwrap().is_empty());
        let ev = hermitian_eigenvalues(&CMatrix::from_real(1, 1, &[-2.5]).unwrap()).unwrap();
        assert_eq!(ev, vec![-2.5]);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        assert!(matches!(
            hermitian_eigenvalues(&CMatrix::zeros(2, 3)),
            Err(Error::InvalidArgument(_))
        ));
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eigen(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_matrix() {
        let a = CMatrix::zeros(4, 4);
        let eig = hermitian_eigen(&a).unwrap();
        assert!(eig.values.iter().all(|&v| v == 0.0));
        assert!(eig.reconstruction_residual(&a) < 1e-15);
    }
}
