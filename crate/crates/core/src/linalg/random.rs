use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::factor::orthonormal_columns;
use super::CMatrix;
use crate::{Error, Result};

fn cn<R: Rng + ?Sized>(sd: f64, rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

/// i.i.d. circularly symmetric `CN(0, variance)` entries.
pub fn sample_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::invalid(alloc::format!(
            "variance must be finite and non-negative, got {variance}"
        )));
    }
    let sd = libm::sqrt(variance / 2.0);
    Ok(CMatrix::from_fn(rows, cols, |_, _| cn(sd, rng)))
}

/// Lower-triangular `r×r` factor `L` with `L L^H` distributed as the Gram
/// matrix `B B^H` of an `r×dof` standard complex Gaussian `B`.
///
/// Diagonal entries are real with `L_ii² ~ Gamma(dof − i, 1)` (0-based `i`);
/// entries below the diagonal are `CN(0, 1)`. For any fixed `A`, the nonzero
/// singular values of `A·L` and `A·B` then share a distribution, at a
/// fraction of the cost when `dof ≫ r`.
pub fn sample_bartlett_factor<R: Rng + ?Sized>(r: usize, dof: usize, rng: &mut R) -> Result<CMatrix> {
    if dof < r {
        return Err(Error::invalid(alloc::format!(
            "Bartlett factor needs dof >= dimension, got {dof} < {r}"
        )));
    }
    let mut l = CMatrix::zeros(r, r);
    for i in 0..r {
        let shape = (dof - i) as f64;
        let g = Gamma::new(shape, 1.0).expect("shape is positive");
        let x: f64 = g.sample(rng);
        l[(i, i)] = Complex64::new(libm::sqrt(x), 0.0);
        for j in 0..i {
            l[(i, j)] = cn(core::f64::consts::FRAC_1_SQRT_2, rng);
        }
    }
    Ok(l)
}

/// Haar-distributed `n×n` unitary (Gram–Schmidt on a Gaussian matrix).
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    loop {
        let g = sample_gaussian(n, n, 1.0, rng)?;
        if let Some(q) = orthonormal_columns(&g) {
            return Ok(q);
        }
    }
}
