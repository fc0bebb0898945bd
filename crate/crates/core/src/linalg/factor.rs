use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::{hermitian_eigenvalues, sample_gaussian, CMatrix, HERMITIAN_TOL, RANK_TOL};
use crate::{Error, Result};

/// Lower Cholesky factor of a Hermitian positive definite matrix.
///
/// Only the lower triangle of `a` is read. Fails with `InvalidArgument`
/// when a pivot is not strictly positive.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::invalid("cholesky needs a square matrix"));
    }
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return Err(Error::invalid("matrix is not positive definite"));
        }
        let ljj = libm::sqrt(diag);
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// `ln det A` for Hermitian positive definite `A`, via Cholesky.
pub fn logdet_hpd(a: &CMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * (0..l.rows()).map(|i| libm::log(l[(i, i)].re)).sum::<f64>())
}

/// `Σ ln(λᵢ + shift)` over all eigenvalues of a Hermitian PSD matrix, in nats.
///
/// Evaluated as the Cholesky log-determinant of `A + shift·I`; falls back to
/// the eigenvalues when the factorization breaks down.
pub fn logdet_psd_shifted(a: &CMatrix, shift: f64) -> Result<f64> {
    if !(shift > 0.0) {
        return Err(Error::invalid("shift must be positive"));
    }
    if !a.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::invalid("logdet_psd_shifted needs a Hermitian matrix"));
    }
    let mut shifted = a.clone();
    for i in 0..a.rows() {
        shifted[(i, i)] += shift;
    }
    match logdet_hpd(&shifted) {
        Ok(v) => Ok(v),
        Err(_) => {
            let ev = hermitian_eigenvalues(a)?;
            if ev.iter().any(|&l| l + shift <= 0.0) {
                return Err(Error::invalid("matrix is not positive semidefinite"));
            }
            Ok(ev.iter().map(|&l| libm::log(l + shift)).sum())
        }
    }
}

/// `ln det(A A^H + shift·I_rows)` computed on the smaller Gram side.
pub fn logdet_gram_shifted(a: &CMatrix, shift: f64) -> Result<f64> {
    let (r, c) = a.shape();
    let core = logdet_psd_shifted(&a.small_gram(), shift)?;
    let pad = r.saturating_sub(c) as f64;
    Ok(core + pad * libm::log(shift))
}

/// Singular values, descending, `min(rows, cols)` of them.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let gram = a.small_gram();
    hermitian_eigenvalues(&gram)
        .expect("Gram matrices are Hermitian")
        .into_iter()
        .map(|l| libm::sqrt(l.max(0.0)))
        .collect()
}

/// Relative floor below which a singular value counts as zero in a
/// nominally full-rank product.
pub const SV_FLOOR: f64 = 1e-14;

/// `Σ ln σᵢ²` over the `count` largest singular values of `a`.
///
/// Returns `None` when one of them is numerically zero
/// (`σ ≤ SV_FLOOR · σ_max`), in which case the log-sum diverges.
pub fn sv_log_sum(a: &CMatrix, count: usize) -> Option<f64> {
    if count == 0 {
        return Some(0.0);
    }
    let ev = hermitian_eigenvalues(&a.small_gram()).expect("Gram matrices are Hermitian");
    assert!(count <= ev.len(), "asked for more singular values than exist");
    let top = ev[0];
    let floor = SV_FLOOR * SV_FLOOR * top;
    let mut acc = 0.0;
    for &l in &ev[..count] {
        if !(l > floor) {
            return None;
        }
        acc += libm::log(l);
    }
    Some(acc)
}

/// Singular values by one-sided Jacobi, accurate to high relative precision.
/// Used for rank decisions, where squaring into a Gram matrix would hide
/// anything below ~1e-8.
pub(crate) fn jacobi_singular_values(a: &CMatrix) -> Vec<f64> {
    // work on columns of the taller orientation
    let m = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let (rows, cols) = m.shape();
    let mut colv: Vec<Vec<Complex64>> = (0..cols).map(|j| m.column(j)).collect();
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = colv[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = colv[q].iter().map(|z| z.norm_sqr()).sum();
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    gamma += colv[p][i].conj() * colv[q][i];
                }
                let g = gamma.norm();
                if g <= eps * libm::sqrt(alpha * beta) || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..rows {
                    let ap = colv[p][i];
                    let aq = colv[q][i] * phase.conj();
                    colv[p][i] = ap * c - aq * s;
                    colv[q][i] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = colv
        .iter()
        .map(|c| libm::sqrt(c.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

fn check_full_row_rank(h: &CMatrix) -> Result<()> {
    let (k, m) = h.shape();
    if k > m {
        return Err(Error::DegenerateChannel(alloc::format!(
            "{k}x{m} matrix cannot have full row rank"
        )));
    }
    if k == 0 {
        return Ok(());
    }
    let sv = jacobi_singular_values(h);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if !(max > 0.0) || !(min > RANK_TOL * max) {
        return Err(Error::DegenerateChannel(alloc::format!(
            "smallest singular value {min:e} is below {RANK_TOL:e} x {max:e}"
        )));
    }
    Ok(())
}

fn cholesky_solve(l: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = l.rows();
    let mut x = b.clone();
    for col in 0..b.cols() {
        // L y = b
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)].re;
        }
        // L^H x = y
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)].re;
        }
    }
    x
}

/// `√m · H^H (H H^H)^{-1}` for a full-row-rank `H`; satisfies `H·result = √m·I`.
pub fn scaled_pseudo_inverse(h: &CMatrix, m: usize) -> Result<CMatrix> {
    check_full_row_rank(h)?;
    let w = h.gram_rows();
    let l = cholesky(&w).map_err(|_| Error::DegenerateChannel("H H^H is singular".into()))?;
    let y = cholesky_solve(&l, h);
    Ok(y.adjoint().scale(libm::sqrt(m as f64)))
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let mut dot = Complex64::new(0.0, 0.0);
        for (qi, vi) in q.iter().zip(v.iter()) {
            dot += qi.conj() * vi;
        }
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= qi * dot;
        }
    }
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Orthonormal `M×n` basis of a random `n`-dimensional subspace of the null
/// space of the `K×M` matrix `h`.
///
/// The columns of `H^H` are orthonormalized first, then `n` Gaussian columns
/// are orthogonalized against everything before them (Gram–Schmidt applied
/// twice). The result is isotropic within the null space.
pub fn null_space_basis<R: Rng + ?Sized>(h: &CMatrix, n: usize, rng: &mut R) -> Result<CMatrix> {
    let (k, m) = h.shape();
    if k >= m && n > 0 {
        return Err(Error::invalid(alloc::format!(
            "{k}x{m} channel has no null space"
        )));
    }
    if n > m.saturating_sub(k) {
        return Err(Error::invalid(alloc::format!(
            "requested {n} null-space columns but only {} exist",
            m - k
        )));
    }
    check_full_row_rank(h)?;

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k + n);
    for i in 0..k {
        let mut v: Vec<Complex64> = h.row(i).iter().map(|z| z.conj()).collect();
        let norm0 = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        project_out(&mut v, &basis);
        project_out(&mut v, &basis);
        if !(normalize(&mut v) > RANK_TOL * norm0) {
            return Err(Error::DegenerateChannel("rows of H are dependent".into()));
        }
        basis.push(v);
    }
    let mut out = CMatrix::zeros(m, n);
    for j in 0..n {
        let v = loop {
            let g = sample_gaussian(m, 1, 1.0, rng)?;
            let mut v = g.as_slice().to_vec();
            let norm0 = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            project_out(&mut v, &basis);
            project_out(&mut v, &basis);
            if normalize(&mut v) > 1e-6 * norm0 {
                break v;
            }
        };
        for (i, z) in v.iter().enumerate() {
            out[(i, j)] = *z;
        }
        basis.push(v);
    }
    Ok(out)
}

/// Orthonormalizes the columns of a square matrix (used for Haar sampling).
pub(crate) fn orthonormal_columns(a: &CMatrix) -> Option<CMatrix> {
    let (m, n) = a.shape();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut out = CMatrix::zeros(m, n);
    for j in 0..n {
        let mut v = a.column(j);
        let norm0 = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        project_out(&mut v, &basis);
        project_out(&mut v, &basis);
        if !(normalize(&mut v) > 1e-8 * norm0) {
            return None;
        }
        for (i, z) in v.iter().enumerate() {
            out[(i, j)] = *z;
        }
        basis.push(v);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn logdet_zero_and_identity() {
        assert_eq!(logdet_psd_shifted(&CMatrix::zeros(2, 2), 1.0).unwrap(), 0.0);
        let v = logdet_psd_shifted(&CMatrix::identity(3), 1.0).unwrap();
        assert!((v - 3.0 * core::f64::consts::LN_2).abs() < 1e-14);
        assert_eq!(logdet_psd_shifted(&CMatrix::zeros(0, 0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn logdet_rejects_bad_shift() {
        assert!(logdet_psd_shifted(&CMatrix::identity(2), 0.0).is_err());
        assert!(logdet_psd_shifted(&CMatrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn logdet_gram_shifted_pads_rows() {
        let mut r = rng();
        let a = sample_gaussian(6, 2, 1.0, &mut r).unwrap();
        let direct = logdet_psd_shifted(&a.gram_rows(), 0.3).unwrap();
        let fast = logdet_gram_shifted(&a, 0.3).unwrap();
        assert!((direct - fast).abs() < 1e-10);
    }

    #[test]
    fn singular_values_simple() {
        let d = CMatrix::from_diag(&[3.0, 4.0]);
        let sv = singular_values(&d);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        let row = CMatrix::from_vec(1, 2, alloc::vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)])
            .unwrap();
        let sv = singular_values(&row);
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - libm::sqrt(6.0)).abs() < 1e-14);
        assert!(singular_values(&CMatrix::zeros(0, 3)).is_empty());
    }

    #[test]
    fn jacobi_agrees_with_gram_route() {
        let mut r = rng();
        let a = sample_gaussian(5, 9, 1.0, &mut r).unwrap();
        let s1 = singular_values(&a);
        let s2 = jacobi_singular_values(&a);
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-10 * s1[0]);
        }
    }

    #[test]
    fn sv_log_sum_flags_rank_deficiency() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(sv_log_sum(&a, 2).is_none());
        assert!(sv_log_sum(&a, 1).is_some());
        assert_eq!(sv_log_sum(&a, 0), Some(0.0));
    }

    #[test]
    fn pseudo_inverse_unit_row() {
        let h = CMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        let p = scaled_pseudo_inverse(&h, 2).unwrap();
        assert!((p[(0, 0)].re - libm::sqrt(2.0)).abs() < 1e-14);
        assert!(p[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn pseudo_inverse_orthonormal_rows() {
        // H = √M · (orthonormal rows) gives H† = H^H / √M · √M = orthonormal columns
        let mut r = rng();
        let q = super::super::sample_haar_unitary(4, &mut r).unwrap();
        let h = q.block(0, 0, 2, 4).scale(2.0);
        let p = scaled_pseudo_inverse(&h, 4).unwrap();
        let g = p.gram_cols();
        assert!(g.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn rank_deficient_is_degenerate() {
        let h = CMatrix::from_real(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        assert!(matches!(
            scaled_pseudo_inverse(&h, 3),
            Err(Error::DegenerateChannel(_))
        ));
        let mut r = rng();
        assert!(matches!(
            null_space_basis(&h, 1, &mut r),
            Err(Error::DegenerateChannel(_))
        ));
    }

    #[test]
    fn null_space_of_unit_row() {
        let h = CMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        let v = null_space_basis(&h, 1, &mut rng()).unwrap();
        assert!(v[(0, 0)].norm() < 1e-15);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_space_too_many_columns() {
        let h = CMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            null_space_basis(&h, 2, &mut rng()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
