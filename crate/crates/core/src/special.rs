//! Digamma, log-gamma, Stiefel and Grassmann log-volumes, and the expected
//! log-determinant of a complex Wishart matrix. Everything is in nats.

use crate::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Natural log of a manifold volume.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogVolume(pub f64);

impl LogVolume {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Integers up to this bound take the exact harmonic-sum branch.
const EXACT_INTEGER_LIMIT: f64 = 1e6;

/// `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
///
/// Integer arguments use `−γ + Σ_{p<x} 1/p`. Other arguments are shifted
/// up to `x ≥ 10` by recurrence and finished with the asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(alloc::format!("digamma needs x > 0, got {x}")));
    }
    if x == libm::floor(x) && x <= EXACT_INTEGER_LIMIT {
        let n = x as u64;
        let mut h = 0.0;
        // summing small terms first keeps the rounding error down
        for p in (1..n).rev() {
            h += 1.0 / p as f64;
        }
        return Ok(h - EULER_GAMMA);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    // Bernoulli tail: 1/12, 1/120, 1/252, 1/240, 1/132
    let tail = r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))));
    Ok(acc + libm::log(y) - 0.5 / y - tail)
}

/// `ψ(n)` for a positive integer count.
pub(crate) fn digamma_n(n: usize) -> f64 {
    digamma(n as f64).expect("positive integer")
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(alloc::format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

fn check_dims(t: usize, m: usize) -> Result<()> {
    if m > t {
        return Err(Error::invalid(alloc::format!(
            "manifold dimension {m} exceeds ambient {t}"
        )));
    }
    Ok(())
}

/// `ln |S(T, M)|`, the volume of the complex Stiefel manifold of `T×M`
/// orthonormal frames.
pub fn log_stiefel_volume(t: usize, m: usize) -> Result<LogVolume> {
    check_dims(t, m)?;
    let ln_pi = libm::log(core::f64::consts::PI);
    let ln2 = core::f64::consts::LN_2;
    let v = (t - m + 1..=t)
        .map(|i| ln2 + i as f64 * ln_pi - libm::lgamma(i as f64))
        .sum();
    Ok(LogVolume(v))
}

/// `ln |G(T, M)| = ln |S(T, M)| − ln |S(M, M)|`.
pub fn log_grassmann_volume(t: usize, m: usize) -> Result<LogVolume> {
    let s = log_stiefel_volume(t, m)?;
    let u = log_stiefel_volume(m, m)?;
    Ok(LogVolume(s.0 - u.0))
}

/// `E[ln det(S S^H)]` for `S` an `M×T` matrix of i.i.d. `CN(0,1)`:
/// `Σ_{i=1}^{M} ψ(T − i + 1)`.
pub fn expected_logdet_wishart(m: usize, t: usize) -> Result<f64> {
    if t < m {
        return Err(Error::invalid(alloc::format!(
            "Wishart needs T >= M, got T = {t}, M = {m}"
        )));
    }
    Ok(digamma_sum(t, m))
}

/// `Σ_{i=1}^{count} ψ(top − i + 1)`; zero when `count = 0`.
pub(crate) fn digamma_sum(top: usize, count: usize) -> f64 {
    debug_assert!(count <= top);
    (0..count).map(|i| digamma_n(top - i)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn digamma_integers() {
        assert!((digamma(1.0).unwrap() + 0.577_215_664_9).abs() < 1e-10);
        assert!((digamma(3.0).unwrap() - 0.922_784_335_1).abs() < 1e-10);
        let x = 320.0;
        assert!((digamma(x).unwrap() - (libm::log(x) - 0.5 / x)).abs() < 1e-5);
    }

    #[test]
    fn digamma_half() {
        // ψ(1/2) = −γ − 2 ln 2
        let want = -EULER_GAMMA - 2.0 * core::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn digamma_rejects_nonpositive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(digamma(f64::NAN).is_err());
    }

    #[test]
    fn digamma_recurrence_grid() {
        let mut x = 0.05;
        while x <= 50.0 {
            let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            assert!(d.abs() < 1e-12, "x = {x}: {d}");
            x += 0.05;
        }
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut f = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64).unwrap() - libm::log(f)).abs() < 1e-10);
            f *= n as f64;
        }
        assert!(ln_gamma(0.0).is_err());
    }

    #[test]
    fn stiefel_small() {
        assert!((log_stiefel_volume(1, 1).unwrap().0 - libm::log(2.0 * PI)).abs() < 1e-13);
        let want = libm::log(4.0 * PI * PI * PI);
        assert!((log_stiefel_volume(2, 2).unwrap().0 - want).abs() < 1e-13);
        assert_eq!(log_stiefel_volume(5, 0).unwrap().0, 0.0);
        assert!(log_stiefel_volume(448, 64).unwrap().0.is_finite());
        assert!(log_stiefel_volume(2, 3).is_err());
    }

    #[test]
    fn grassmann_small() {
        assert!((log_grassmann_volume(2, 1).unwrap().0 - libm::log(PI)).abs() < 1e-13);
        assert_eq!(log_grassmann_volume(7, 0).unwrap().0, 0.0);
        let want = libm::log(PI * PI / 2.0);
        assert!((log_grassmann_volume(3, 1).unwrap().0 - want).abs() < 1e-12);
        assert!((log_grassmann_volume(3, 2).unwrap().0 - want).abs() < 1e-12);
    }

    #[test]
    fn grassmann_complement_symmetry() {
        for t in 2..=100 {
            for m in 1..t {
                let a = log_grassmann_volume(t, m).unwrap().0;
                let b = log_grassmann_volume(t, t - m).unwrap().0;
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "({t},{m})");
            }
        }
    }

    #[test]
    fn wishart_closed_form() {
        assert!((expected_logdet_wishart(1, 1).unwrap() + EULER_GAMMA).abs() < 1e-15);
        assert!((expected_logdet_wishart(2, 3).unwrap() - 1.345_568_670_2).abs() < 1e-9);
        assert_eq!(expected_logdet_wishart(0, 4).unwrap(), 0.0);
        assert!(expected_logdet_wishart(3, 2).is_err());
    }

    proptest! {
        #[test]
        fn digamma_is_increasing(x in 0.01f64..200.0, dx in 0.001f64..5.0) {
            prop_assert!(digamma(x + dx).unwrap() > digamma(x).unwrap());
        }

        #[test]
        fn digamma_bracketed_by_logs(x in 1.0f64..1e4) {
            // ln(x) − 1/x < ψ(x) < ln(x) − 1/(2x)
            let d = digamma(x).unwrap();
            prop_assert!(d < libm::log(x) - 0.5 / x + 1e-12);
            prop_assert!(d > libm::log(x) - 1.0 / x - 1e-12);
        }

        #[test]
        fn stiefel_finite_and_additive(t in 1usize..500, m in 1usize..64) {
            prop_assume!(m <= t);
            // S(T, M) = S(T, M-1) + one extra factor for i = T - M + 1
            let a = log_stiefel_volume(t, m).unwrap().0;
            let b = log_stiefel_volume(t, m - 1).unwrap().0;
            let i = (t - m + 1) as f64;
            let extra = core::f64::consts::LN_2 + i * libm::log(core::f64::consts::PI) - libm::lgamma(i);
            prop_assert!(a.is_finite());
            prop_assert!((a - b - extra).abs() < 1e-9 * a.abs().max(1.0));
        }
    }
}
