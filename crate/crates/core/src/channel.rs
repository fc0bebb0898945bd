//! System configuration, channel realizations and signal synthesis.
//!
//! The BS sends `X = α H† S + β V N`, where `H†` is the scaled pseudo-inverse
//! of the downlink channel and `V` spans `N_J` dimensions of its null space.
//! The eavesdropper then sees the effective channels `G₁ = α G H†` and
//! `G₂ = β G V`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{
    null_space_basis, sample_gaussian, sample_haar_unitary, scaled_pseudo_inverse, CMatrix,
};
use crate::{Error, Result};

const POWER_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-10;

/// `10^(−dB/10)`: noise variance for a unit-power signal at the given SNR.
pub fn noise_variance_from_db(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0)
}

/// Dimensions, power split and SNRs of one downlink.
///
/// Built through [`SystemConfigBuilder`], which enforces
/// `α²K + β²N_J = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    m: usize,
    k: usize,
    n_e: usize,
    n_j: usize,
    t: usize,
    alpha2: f64,
    beta2: f64,
    snr_e_db: f64,
    snr_l_db: f64,
    fixed: PowerInput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PowerInput {
    Alpha2(f64),
    Beta2(f64),
    Both(f64, f64),
    EqualSplit,
}

/// Builder for [`SystemConfig`].
///
/// Give at most one of `alpha2` and `beta2` and the other is solved from the
/// power constraint; give both and they are checked against it. With
/// neither, `α² = β² = M / (K + N_J)`. With `N_J = 0`, `β² = 0` and
/// `α² = M / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfigBuilder {
    m: usize,
    k: usize,
    n_e: usize,
    n_j: usize,
    t: usize,
    alpha2: Option<f64>,
    beta2: Option<f64>,
    snr_e_db: f64,
    snr_l_db: f64,
}

impl Default for SystemConfigBuilder {
    fn default() -> Self {
        Self {
            m: 64,
            k: 16,
            n_e: 64,
            n_j: 48,
            t: 64,
            alpha2: None,
            beta2: None,
            snr_e_db: 30.0,
            snr_l_db: 30.0,
        }
    }
}

impl SystemConfigBuilder {
    pub fn m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }
    pub fn k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
    pub fn n_e(mut self, n_e: usize) -> Self {
        self.n_e = n_e;
        self
    }
    pub fn n_j(mut self, n_j: usize) -> Self {
        self.n_j = n_j;
        self
    }
    pub fn t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }
    pub fn alpha2(mut self, alpha2: f64) -> Self {
        self.alpha2 = Some(alpha2);
        self
    }
    pub fn beta2(mut self, beta2: f64) -> Self {
        self.beta2 = Some(beta2);
        self
    }
    pub fn snr_e_db(mut self, db: f64) -> Self {
        self.snr_e_db = db;
        self
    }
    pub fn snr_l_db(mut self, db: f64) -> Self {
        self.snr_l_db = db;
        self
    }

    pub fn build(self) -> Result<SystemConfig> {
        let Self { m, k, n_e, n_j, t, .. } = self;
        if k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if m <= k {
            return Err(Error::invalid(alloc::format!("need M > K, got M = {m}, K = {k}")));
        }
        if n_j > m - k {
            return Err(Error::invalid(alloc::format!(
                "N_J = {n_j} exceeds M - K = {}",
                m - k
            )));
        }
        if n_e == 0 {
            return Err(Error::invalid("N_E must be at least 1"));
        }
        if t == 0 {
            return Err(Error::invalid("T must be at least 1"));
        }
        for (name, v) in [("snr_e_db", self.snr_e_db), ("snr_l_db", self.snr_l_db)] {
            if !v.is_finite() {
                return Err(Error::invalid(alloc::format!("{name} must be finite")));
            }
        }
        for (name, v) in [("alpha2", self.alpha2), ("beta2", self.beta2)] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid(alloc::format!(
                        "{name} must be finite and non-negative, got {v}"
                    )));
                }
            }
        }
        let (mf, kf, jf) = (m as f64, k as f64, n_j as f64);
        let fixed = match (self.alpha2, self.beta2) {
            (None, None) => PowerInput::EqualSplit,
            (Some(a), None) => PowerInput::Alpha2(a),
            (None, Some(b)) => PowerInput::Beta2(b),
            (Some(a), Some(b)) => PowerInput::Both(a, b),
        };
        let (alpha2, beta2) = if n_j == 0 {
            match fixed {
                PowerInput::Beta2(b) | PowerInput::Both(_, b) if b != 0.0 => {
                    return Err(Error::invalid("beta2 must be 0 when N_J = 0"));
                }
                PowerInput::Alpha2(a) | PowerInput::Both(a, _)
                    if (a * kf - mf).abs() > POWER_TOL * mf =>
                {
                    return Err(Error::invalid(alloc::format!(
                        "with N_J = 0 the power constraint forces alpha2 = M/K = {}",
                        mf / kf
                    )));
                }
                _ => (mf / kf, 0.0),
            }
        } else {
            match fixed {
                PowerInput::EqualSplit => {
                    let p = mf / (kf + jf);
                    (p, p)
                }
                PowerInput::Alpha2(a) => (a, (mf - a * kf) / jf),
                PowerInput::Beta2(b) => ((mf - b * jf) / kf, b),
                PowerInput::Both(a, b) => {
                    if (a * kf + b * jf - mf).abs() > POWER_TOL * mf {
                        return Err(Error::invalid(alloc::format!(
                            "alpha2*K + beta2*N_J = {} but must equal M = {m}",
                            a * kf + b * jf
                        )));
                    }
                    (a, b)
                }
            }
        };
        if !(alpha2 > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "power split leaves alpha2 = {alpha2}; data power must be positive"
            )));
        }
        if beta2 < 0.0 {
            return Err(Error::invalid(alloc::format!(
                "power split leaves beta2 = {beta2} < 0"
            )));
        }
        Ok(SystemConfig {
            m,
            k,
            n_e,
            n_j,
            t,
            alpha2,
            beta2,
            snr_e_db: self.snr_e_db,
            snr_l_db: self.snr_l_db,
            fixed,
        })
    }
}

impl SystemConfig {
    pub fn builder() -> SystemConfigBuilder {
        SystemConfigBuilder::default()
    }

    /// A builder pre-filled with this configuration, keeping the same power
    /// input (so changing `N_J` re-solves the free power factor).
    pub fn to_builder(&self) -> SystemConfigBuilder {
        let (alpha2, beta2) = match self.fixed {
            PowerInput::Alpha2(a) => (Some(a), None),
            PowerInput::Beta2(b) => (None, Some(b)),
            PowerInput::Both(a, b) => (Some(a), Some(b)),
            PowerInput::EqualSplit => (None, None),
        };
        SystemConfigBuilder {
            m: self.m,
            k: self.k,
            n_e: self.n_e,
            n_j: self.n_j,
            t: self.t,
            alpha2,
            beta2,
            snr_e_db: self.snr_e_db,
            snr_l_db: self.snr_l_db,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn n_e(&self) -> usize {
        self.n_e
    }
    pub fn n_j(&self) -> usize {
        self.n_j
    }
    pub fn t(&self) -> usize {
        self.t
    }
    /// Effective coherence time after `K` training symbols (0 if `T ≤ K`).
    pub fn t_prime(&self) -> usize {
        self.t.saturating_sub(self.k)
    }
    pub fn m_bar(&self) -> usize {
        self.k + self.n_j
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }
    pub fn snr_e_db(&self) -> f64 {
        self.snr_e_db
    }
    pub fn snr_l_db(&self) -> f64 {
        self.snr_l_db
    }
    pub fn sigma_z2(&self) -> f64 {
        noise_variance_from_db(self.snr_e_db)
    }
    pub fn sigma_w2(&self) -> f64 {
        noise_variance_from_db(self.snr_l_db)
    }

    /// `Tr E[X X^H] / T = MK/(M−K)·α² + N_J·β²`, the exact mean transmit
    /// power per symbol (slightly above `M`).
    pub fn exact_transmit_power(&self) -> f64 {
        let (m, k) = (self.m as f64, self.k as f64);
        m * k / (m - k) * self.alpha2 + self.n_j as f64 * self.beta2
    }

    /// Exact per-entry variance of `G₁`: `α² M/(M−K)`.
    pub fn g1_entry_variance(&self) -> f64 {
        let (m, k) = (self.m as f64, self.k as f64);
        self.alpha2 * m / (m - k)
    }

    /// The eavesdropper-side statistics used by the bounds, with `Ḡ` taken
    /// as i.i.d. Gaussian.
    pub fn leakage_model(&self) -> LeakageModel {
        LeakageModel {
            k: self.k,
            n_e: self.n_e,
            n_j: self.n_j,
            t: self.t,
            t_prime: self.t_prime(),
            alpha2: self.alpha2,
            beta2: self.beta2,
        }
    }

    /// Single-user view for per-user wiretap coding: `K = 1`, with the power
    /// factors and training length of the full system.
    pub fn per_user_model(&self) -> LeakageModel {
        LeakageModel {
            k: 1,
            ..self.leakage_model()
        }
    }
}

/// Dimensions and power factors seen by the eavesdropper.
///
/// `Ḡ = [G₁ G₂]` is modeled with i.i.d. `CN(0, α²)` entries in its first `K`
/// columns and `CN(0, β²)` in the last `N_J`. Unlike [`SystemConfig`] this
/// carries no antenna count `M` and no power constraint, so it can describe
/// toy systems directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageModel {
    pub k: usize,
    pub n_e: usize,
    pub n_j: usize,
    pub t: usize,
    pub t_prime: usize,
    pub alpha2: f64,
    pub beta2: f64,
}

impl LeakageModel {
    /// `T′ = T − K`.
    pub fn new(k: usize, n_e: usize, n_j: usize, t: usize, alpha2: f64, beta2: f64) -> Result<Self> {
        if k == 0 || n_e == 0 || t == 0 {
            return Err(Error::invalid("K, N_E and T must be at least 1"));
        }
        if !(alpha2 > 0.0) || !alpha2.is_finite() || !(beta2 >= 0.0) || !beta2.is_finite() {
            return Err(Error::invalid("need alpha2 > 0 and beta2 >= 0"));
        }
        Ok(Self {
            k,
            n_e,
            n_j,
            t,
            t_prime: t.saturating_sub(k),
            alpha2,
            beta2,
        })
    }

    pub fn with_t_prime(mut self, t_prime: usize) -> Self {
        self.t_prime = t_prime;
        self
    }

    pub fn m_bar(&self) -> usize {
        self.k + self.n_j
    }
}

/// One block-fading draw and the quantities derived from it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub g: CMatrix,
    /// `√M H^H (H H^H)^{-1}`.
    pub h_pinv: CMatrix,
    /// `M×N_J` orthonormal basis inside the null space of `H`.
    pub v: CMatrix,
    pub g1: CMatrix,
    pub g2: CMatrix,
}

impl ChannelRealization {
    /// `Ḡ = [G₁ G₂]`.
    pub fn g_bar(&self) -> CMatrix {
        self.g1.hcat(&self.g2).expect("same row count")
    }

    /// Largest deviation from `G₁ = αGH†`, `G₂ = βGV` and `HV = 0`.
    pub fn relation_residual(&self, cfg: &SystemConfig) -> f64 {
        let g1 = (&self.g * &self.h_pinv).scale(libm::sqrt(cfg.alpha2));
        let g2 = (&self.g * &self.v).scale(libm::sqrt(cfg.beta2));
        let hv = (&self.h * &self.v).frobenius_norm() / self.h.frobenius_norm().max(1.0);
        self.g1.max_abs_diff(&g1).max(self.g2.max_abs_diff(&g2)).max(hv)
    }
}

/// Draws `H` and `G` with i.i.d. `CN(0,1)` entries and builds `G₁`, `G₂`.
pub fn sample_realization<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    let h = sample_gaussian(cfg.k, cfg.m, 1.0, rng)?;
    let g = sample_gaussian(cfg.n_e, cfg.m, 1.0, rng)?;
    let h_pinv = scaled_pseudo_inverse(&h, cfg.m)?;
    let v = null_space_basis(&h, cfg.n_j, rng)?;
    let g1 = (&g * &h_pinv).scale(libm::sqrt(cfg.alpha2));
    let g2 = (&g * &v).scale(libm::sqrt(cfg.beta2));
    Ok(ChannelRealization { h, g, h_pinv, v, g1, g2 })
}

fn check_signal_shapes(real: &ChannelRealization, s: &CMatrix, n: &CMatrix) -> Result<()> {
    let k = real.h.rows();
    let n_j = real.v.cols();
    if s.rows() != k || n.rows() != n_j || s.cols() != n.cols() {
        return Err(Error::invalid(alloc::format!(
            "expected S as {k}xT and N as {n_j}xT, got {}x{} and {}x{}",
            s.rows(),
            s.cols(),
            n.rows(),
            n.cols()
        )));
    }
    Ok(())
}

/// `X = α H† S + β V N`.
pub fn transmit_signal(real: &ChannelRealization, s: &CMatrix, n: &CMatrix, cfg: &SystemConfig) -> Result<CMatrix> {
    check_signal_shapes(real, s, n)?;
    let data = (&real.h_pinv * s).scale(libm::sqrt(cfg.alpha2));
    let an = (&real.v * n).scale(libm::sqrt(cfg.beta2));
    data.add(&an)
}

/// Artificial fast fading: column `t` of the noise branch is
/// `β V A(t) N[:, t]`, with a fresh unitary `A(t)` per symbol.
pub fn transmit_signal_aff(
    real: &ChannelRealization,
    s: &CMatrix,
    n: &CMatrix,
    a_seq: &[CMatrix],
    cfg: &SystemConfig,
) -> Result<CMatrix> {
    check_signal_shapes(real, s, n)?;
    let n_j = n.rows();
    if a_seq.len() != n.cols() {
        return Err(Error::invalid(alloc::format!(
            "need one precoder per symbol: {} given for T = {}",
            a_seq.len(),
            n.cols()
        )));
    }
    let eye = CMatrix::identity(n_j);
    let mut mixed = CMatrix::zeros(n_j, n.cols());
    for (t, a) in a_seq.iter().enumerate() {
        if a.shape() != (n_j, n_j) || a.gram_cols().max_abs_diff(&eye) > UNITARY_TOL {
            return Err(Error::invalid(alloc::format!("A({t}) is not a {n_j}x{n_j} unitary")));
        }
        for i in 0..n_j {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n_j {
                acc += a[(i, j)] * n[(j, t)];
            }
            mixed[(i, t)] = acc;
        }
    }
    transmit_signal(real, s, &mixed, cfg)
}

/// `T` independent Haar unitaries of size `N_J`.
pub fn sample_aff_sequence<R: Rng + ?Sized>(n_j: usize, t: usize, rng: &mut R) -> Result<Vec<CMatrix>> {
    (0..t).map(|_| sample_haar_unitary(n_j, rng)).collect()
}

/// `Y_L = H X + W` and `Y_E = G X + Z`, with `W ~ CN(0, σ_w²)` and
/// `Z ~ CN(0, σ_z²)` entrywise.
pub fn received_signals<R: Rng + ?Sized>(
    real: &ChannelRealization,
    x: &CMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<(CMatrix, CMatrix)> {
    if x.rows() != real.h.cols() {
        return Err(Error::invalid(alloc::format!(
            "X has {} rows, channel has {} transmit antennas",
            x.rows(),
            real.h.cols()
        )));
    }
    let w = sample_gaussian(real.h.rows(), x.cols(), cfg.sigma_w2(), rng)?;
    let z = sample_gaussian(real.g.rows(), x.cols(), cfg.sigma_z2(), rng)?;
    let y_l = (&real.h * x).add(&w)?;
    let y_e = (&real.g * x).add(&z)?;
    Ok((y_l, y_e))
}

/// Summary statistics of the effective channels over many realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDistributionReport {
    pub trials: usize,
    /// Largest `|sample mean|` over the entries of `G₁` and `G₂`.
    pub max_abs_mean: f64,
    /// Mean of `|G₁ᵢⱼ|²` over all entries and trials.
    pub g1_variance: f64,
    /// `α² M/(M−K)`.
    pub g1_variance_exact: f64,
    /// Mean of `|G₂ᵢⱼ|²`; `None` when there is no noise branch.
    pub g2_variance: Option<f64>,
    pub beta2: f64,
    /// Largest `|corr(G₁ᵢⱼ, G₂ₖₗ)|` over the leading entries.
    pub max_abs_corr: f64,
    /// KS distance of `√2 Re G₁₁ / α` from `N(0, 1)`.
    pub ks_nominal: f64,
    /// KS distance of `Re G₁₁` from `N(0, α²M/(2(M−K)))`.
    pub ks_exact: f64,
    /// `1.63 / √trials`.
    pub ks_threshold: f64,
    /// Set when `N_J = 0` or `β² = 0`: `G₂` carries nothing.
    pub an_degenerate: bool,
}

/// Largest gap between the empirical CDF of `samples` and the `N(0, sd²)` CDF.
pub fn ks_statistic_normal(samples: &mut [f64], sd: f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = 0.5 * libm::erfc(-x / (sd * core::f64::consts::SQRT_2));
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    d
}

/// Samples `trials` realizations and summarizes `G₁`, `G₂`.
pub fn check_effective_distributions<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    trials: usize,
    rng: &mut R,
) -> Result<EffectiveDistributionReport> {
    if trials < 2 {
        return Err(Error::invalid("need at least 2 trials"));
    }
    let (n_e, k, n_j) = (cfg.n_e, cfg.k, cfg.n_j);
    let an_degenerate = n_j == 0 || cfg.beta2 == 0.0;
    // cross-correlation over the first rows and columns only
    let rows = n_e.min(2);
    let c1 = k.min(4);
    let c2 = n_j.min(4);
    let pairs = rows * c1 * rows * c2;
    let zero = Complex64::new(0.0, 0.0);
    let mut cross = alloc::vec![zero; pairs];
    let mut pow1 = alloc::vec![0.0; rows * c1];
    let mut pow2 = alloc::vec![0.0; rows * c2];
    let mut sum1 = alloc::vec![zero; n_e * k];
    let mut sum2 = alloc::vec![zero; n_e * n_j];
    let mut g1_pow = 0.0;
    let mut g2_pow = 0.0;
    let mut first = Vec::with_capacity(trials);

    for _ in 0..trials {
        let r = sample_realization(cfg, rng)?;
        for (s, z) in sum1.iter_mut().zip(r.g1.as_slice()) {
            *s += z;
            g1_pow += z.norm_sqr();
        }
        for (s, z) in sum2.iter_mut().zip(r.g2.as_slice()) {
            *s += z;
            g2_pow += z.norm_sqr();
        }
        first.push(r.g1[(0, 0)].re);
        let mut p = 0;
        for i1 in 0..rows {
            for j1 in 0..c1 {
                let a = r.g1[(i1, j1)];
                pow1[i1 * c1 + j1] += a.norm_sqr();
                for i2 in 0..rows {
                    for j2 in 0..c2 {
                        cross[p] += a * r.g2[(i2, j2)].conj();
                        p += 1;
                    }
                }
            }
        }
        for i2 in 0..rows {
            for j2 in 0..c2 {
                pow2[i2 * c2 + j2] += r.g2[(i2, j2)].norm_sqr();
            }
        }
    }

    let tf = trials as f64;
    let max_abs_mean = sum1
        .iter()
        .chain(&sum2)
        .map(|s| s.norm() / tf)
        .fold(0.0, f64::max);
    let mut max_abs_corr: f64 = 0.0;
    if !an_degenerate {
        let mut p = 0;
        for a in 0..rows * c1 {
            for b in 0..rows * c2 {
                let denom = libm::sqrt(pow1[a] * pow2[b]);
                if denom > 0.0 {
                    max_abs_corr = max_abs_corr.max(cross[p].norm() / denom);
                }
                p += 1;
            }
        }
    }
    let sd_nominal = libm::sqrt(cfg.alpha2 / 2.0);
    let sd_exact = libm::sqrt(cfg.g1_entry_variance() / 2.0);
    let ks_nominal = ks_statistic_normal(&mut first, sd_nominal);
    let ks_exact = ks_statistic_normal(&mut first, sd_exact);

    Ok(EffectiveDistributionReport {
        trials,
        max_abs_mean,
        g1_variance: g1_pow / (tf * (n_e * k) as f64),
        g1_variance_exact: cfg.g1_entry_variance(),
        g2_variance: (n_j > 0).then(|| g2_pow / (tf * (n_e * n_j) as f64)),
        beta2: cfg.beta2,
        max_abs_corr,
        ks_nominal,
        ks_exact,
        ks_threshold: 1.63 / libm::sqrt(tf),
        an_degenerate,
    })
}
