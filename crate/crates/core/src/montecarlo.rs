//! Seeded Monte Carlo estimators for the expectations in the leakage
//! constants.
//!
//! Trial `i` of an estimate draws from its own ChaCha8 stream: the generator
//! is seeded from the master seed mixed with a per-estimator tag, and its
//! stream number is `i`. Results are collected in trial order and reduced
//! serially, so a [`TrialRunner`] that spreads trials over threads yields the
//! same bits as [`SerialRunner`].
//!
//! Products with a long Gaussian factor (`Ḡ X̄`, `G₂ N₂`, …) are sampled
//! through a Bartlett factor: for `B` an `r×q` standard Gaussian with
//! `r ≤ q`, `B B^H` has the law of `L L^H` for a lower-triangular `L` with
//! `L_ii² ~ Gamma(q − i + 1, 1)` and `CN(0,1)` entries below the diagonal.
//! Since `A B` and `A L` then share nonzero singular values in law, each
//! trial costs `O(r²)` draws instead of `O(rq)`.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::LeakageModel;
use crate::linalg::{
    cholesky, hermitian_eigenvalues, logdet_gram_shifted, sample_bartlett_factor, sample_gaussian,
    singular_values, CMatrix, SV_FLOOR,
};
use crate::{Error, Result, LOG2_E};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    /// Trials that entered the mean.
    pub trials: usize,
    /// Trials excluded because a nominally nonzero singular value vanished.
    pub flagged: usize,
}

impl McEstimate {
    /// Ordered reduction of per-trial samples.
    pub fn from_samples(samples: &[f64], flagged: usize) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::DegenerateChannel(alloc::format!(
                "only {n} usable trials ({flagged} flagged)"
            )));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
        Ok(Self {
            mean,
            std_error: libm::sqrt(var / nf),
            trials: n,
            flagged,
        })
    }

    /// An exactly known value, with zero standard error.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            trials: 0,
            flagged: 0,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            mean: self.mean * s,
            std_error: self.std_error * s.abs(),
            ..self
        }
    }

    /// Difference of two independent estimates.
    pub fn minus(self, other: McEstimate) -> Self {
        Self {
            mean: self.mean - other.mean,
            std_error: libm::hypot(self.std_error, other.std_error),
            trials: self.trials.min(other.trials),
            flagged: self.flagged + other.flagged,
        }
    }

    /// `|mean − target| ≤ k · std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Runs independent trials and returns their results in trial order.
pub trait TrialRunner: Sync {
    fn map_trials<T, F>(&self, trials: usize, kernel: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every trial on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialRunner;

impl TrialRunner for SerialRunner {
    fn map_trials<T, F>(&self, trials: usize, kernel: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..trials).map(kernel).collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Seed of one estimator family, derived from the master seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix(master ^ splitmix(tag))
}

const TAG_GBAR: u64 = 1;
const TAG_UNIVERSAL: u64 = 2;
const TAG_SPLIT: u64 = 3;
const TAG_SV_BASE: u64 = 16;

/// The random products whose expected log singular-value sums enter the
/// leakage constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SvKind {
    /// `Ḡ X̄`: `N_E×M̄` effective channel times an `M̄×T` unit-variance input.
    GXBar,
    /// `G₂ N₂`: `N_E×N_J` with variance `β²`, times `N_J×(T−K)`.
    G2N2,
    /// `G₂₂ N′`: `(N_E−K)×N_J` with variance `β²`, times `N_J×T′`.
    G22NPrime,
    /// `G₂ N′`: `N_E×N_J` with variance `β²`, times `N_J×T′`.
    G2NPrime,
    /// `G₁`: `N_E×K` with variance `α²`.
    G1,
    /// `N′`: `N_J×T′` unit variance.
    NPrime,
}

impl SvKind {
    pub const ALL: [SvKind; 6] = [
        SvKind::GXBar,
        SvKind::G2N2,
        SvKind::G22NPrime,
        SvKind::G2NPrime,
        SvKind::G1,
        SvKind::NPrime,
    ];

    fn tag(self) -> u64 {
        TAG_SV_BASE + self as u64
    }

    /// Number of nonzero singular values summed over.
    pub fn count(self, m: &LeakageModel) -> usize {
        match self {
            SvKind::GXBar => m.m_bar().min(m.n_e),
            SvKind::G2N2 | SvKind::G2NPrime => m.n_j.min(m.n_e),
            SvKind::G22NPrime => m.n_j,
            SvKind::G1 => m.k.min(m.n_e),
            SvKind::NPrime => m.n_j.min(m.t_prime),
        }
    }

    fn check(self, m: &LeakageModel) -> Result<()> {
        let uses_beta = !matches!(self, SvKind::G1 | SvKind::NPrime);
        if uses_beta && m.n_j > 0 && !(m.beta2 > 0.0) {
            return Err(Error::precondition("beta2=0", "noise-branch channel is identically zero"));
        }
        match self {
            SvKind::GXBar | SvKind::G2N2 if m.t < m.m_bar() => Err(Error::precondition(
                "T<Mbar",
                alloc::format!("T = {} < K + N_J = {}", m.t, m.m_bar()),
            )),
            SvKind::G22NPrime if m.n_e < m.m_bar() => Err(Error::precondition(
                "N_E<Mbar",
                alloc::format!("N_E = {} < K + N_J = {}", m.n_e, m.m_bar()),
            )),
            SvKind::G22NPrime | SvKind::G2NPrime if m.t_prime < m.n_j => Err(Error::precondition(
                "T'<N_J",
                alloc::format!("T' = {} < N_J = {}", m.t_prime, m.n_j),
            )),
            _ => Ok(()),
        }
    }
}

/// `Ḡ = [G₁ G₂]` with column variances `α²` then `β²`.
fn sample_gbar<R: rand::Rng + ?Sized>(m: &LeakageModel, rng: &mut R) -> CMatrix {
    let mut g = sample_gaussian(m.n_e, m.m_bar(), 1.0, rng).expect("unit variance");
    g.scale_columns(0..m.k, libm::sqrt(m.alpha2));
    g.scale_columns(m.k..m.m_bar(), libm::sqrt(m.beta2));
    g
}

/// `ln det W` by Cholesky; `None` if a pivot is numerically zero.
fn chol_logdet(w: &CMatrix) -> Option<f64> {
    let n = w.rows();
    if n == 0 {
        return Some(0.0);
    }
    let trace: f64 = (0..n).map(|i| w[(i, i)].re).sum();
    let floor = SV_FLOOR * SV_FLOOR * trace;
    let l = cholesky(w).ok()?;
    let mut acc = 0.0;
    for i in 0..n {
        let p = l[(i, i)].re * l[(i, i)].re;
        if !(p > floor) {
            return None;
        }
        acc += libm::log(p);
    }
    Some(acc)
}

/// `Σ ln λᵢ²` over all `min(rows, cols)` singular values of `A`.
fn full_log_sum(a: &CMatrix) -> Option<f64> {
    chol_logdet(&a.small_gram())
}

/// `Σ ln λᵢ²` of `A·L` for lower-triangular `L`, over `min(rows(A), cols(A))`
/// values.
fn product_log_sum(a: &CMatrix, l: &CMatrix) -> Option<f64> {
    if a.rows() >= a.cols() {
        // det(L^H A^H A L) = det(A^H A) |det L|²
        let mut acc = full_log_sum(a)?;
        for i in 0..l.rows() {
            acc += 2.0 * libm::log(l[(i, i)].re);
        }
        Some(acc)
    } else {
        full_log_sum(&(a * l))
    }
}

/// Bartlett log-determinant of a `p×q` unit Gaussian's smaller Gram.
fn gaussian_log_sum<R: rand::Rng + ?Sized>(p: usize, q: usize, rng: &mut R) -> f64 {
    let l = sample_bartlett_factor(p.min(q), p.max(q), rng).expect("dof >= dimension");
    (0..l.rows()).map(|i| 2.0 * libm::log(l[(i, i)].re)).sum()
}

fn sv_trial<R: rand::Rng + ?Sized>(kind: SvKind, m: &LeakageModel, rng: &mut R) -> Option<f64> {
    let beta = libm::sqrt(m.beta2);
    match kind {
        SvKind::GXBar => {
            let g = sample_gbar(m, rng);
            let l = sample_bartlett_factor(m.m_bar(), m.t, rng).ok()?;
            product_log_sum(&g, &l)
        }
        SvKind::G2N2 => {
            let g2 = sample_gaussian(m.n_e, m.n_j, 1.0, rng).ok()?.scale(beta);
            let l = sample_bartlett_factor(m.n_j, m.t - m.k, rng).ok()?;
            product_log_sum(&g2, &l)
        }
        SvKind::G22NPrime => {
            let g22 = sample_gaussian(m.n_e - m.k, m.n_j, 1.0, rng).ok()?.scale(beta);
            let l = sample_bartlett_factor(m.n_j, m.t_prime, rng).ok()?;
            product_log_sum(&g22, &l)
        }
        SvKind::G2NPrime => {
            let g2 = sample_gaussian(m.n_e, m.n_j, 1.0, rng).ok()?.scale(beta);
            let l = sample_bartlett_factor(m.n_j, m.t_prime, rng).ok()?;
            product_log_sum(&g2, &l)
        }
        SvKind::G1 => {
            let g1 = sample_gaussian(m.n_e, m.k, m.alpha2, rng).ok()?;
            full_log_sum(&g1)
        }
        SvKind::NPrime => Some(gaussian_log_sum(m.n_j, m.t_prime, rng)),
    }
}

/// Result of the singular-value splitting check at small noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub trials: usize,
    /// `Ξ = min(N_E, M̄)`: values expected to track `Ḡ X̄`.
    pub xi: usize,
    /// `Ω = min(N_E, T)`: nonzero singular values of `Y_E`.
    pub omega: usize,
    /// Median over trials and the top `Ξ` indices of `|σᵢ(Y_E) − μᵢ| / μᵢ`.
    pub median_rel_dev: f64,
    pub max_rel_dev: f64,
    /// Mean over trials of `Σ σᵢ²` for the trailing `Ω − Ξ` values of `Y_E`,
    /// divided by the same sum for an independent noise block; `None` when
    /// the trailing set is empty.
    pub trailing_power_ratio: Option<f64>,
}

/// Trial-parallel estimators with a fixed trial count and master seed.
#[derive(Debug, Clone)]
pub struct Estimator<R = SerialRunner> {
    runner: R,
    trials: usize,
    seed: u64,
}

impl Estimator<SerialRunner> {
    pub fn serial(trials: usize, seed: u64) -> Result<Self> {
        Self::new(SerialRunner, trials, seed)
    }
}

impl<R: TrialRunner> Estimator<R> {
    pub fn new(runner: R, trials: usize, seed: u64) -> Result<Self> {
        if trials < 2 {
            return Err(Error::invalid("Monte Carlo needs at least 2 trials"));
        }
        Ok(Self { runner, trials, seed })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn runner(&self) -> &R {
        &self.runner
    }

    fn estimate<F>(&self, tag: u64, kernel: F) -> Result<McEstimate>
    where
        F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync + Send,
    {
        let seed = derive_seed(self.seed, tag);
        let raw = self
            .runner
            .map_trials(self.trials, |i| kernel(&mut trial_rng(seed, i as u64)));
        let flagged = raw.iter().filter(|x| x.is_none()).count();
        let samples: Vec<f64> = raw.into_iter().flatten().collect();
        McEstimate::from_samples(&samples, flagged)
    }

    /// `E[Σᵢ ln λᵢ²]` over the nonzero singular values of the chosen product,
    /// in nats.
    pub fn e_log_sv_sum(&self, kind: SvKind, model: &LeakageModel) -> Result<McEstimate> {
        kind.check(model)?;
        let m = *model;
        self.estimate(kind.tag(), move |rng| sv_trial(kind, &m, rng))
    }

    /// Ergodic leakage with full CSI at the eavesdropper, in bits per symbol:
    /// `E[ln det(ḠḠ^H + σ²I) − ln det(G₂G₂^H + σ²I)] / ln 2`.
    pub fn ergodic_leakage(&self, model: &LeakageModel, sigma_z2: f64) -> Result<McEstimate> {
        if !(sigma_z2 > 0.0) || !sigma_z2.is_finite() {
            return Err(Error::invalid("noise variance must be positive and finite"));
        }
        let m = *model;
        let est = self.estimate(TAG_GBAR, move |rng| {
            let g = sample_gbar(&m, rng);
            let (n_e, k, mb) = (m.n_e, m.k, m.m_bar());
            if mb <= n_e {
                // trailing block of Ḡ^H Ḡ is G₂^H G₂
                let mut w = g.gram_cols();
                for i in 0..mb {
                    w[(i, i)] += sigma_z2;
                }
                let w22 = w.block(k, k, mb - k, mb - k);
                let full = chol_logdet(&w)?;
                let part = chol_logdet(&w22)?;
                Some(full - part - k as f64 * libm::log(sigma_z2))
            } else {
                let g2 = g.block(0, k, n_e, mb - k);
                let a = logdet_gram_shifted(&g, sigma_z2).ok()?;
                let b = logdet_gram_shifted(&g2, sigma_z2).ok()?;
                Some(a - b)
            }
        })?;
        Ok(est.scaled(LOG2_E))
    }

    /// High-SNR constant of the ergodic leakage, in bits:
    /// `E[Σ ln λ²_Ḡ − Σ ln λ²_{G₂}] / ln 2`.
    pub fn ergodic_constant(&self, model: &LeakageModel) -> Result<McEstimate> {
        if model.n_j > 0 && !(model.beta2 > 0.0) {
            return Err(Error::precondition("beta2=0", "noise-branch channel is identically zero"));
        }
        let m = *model;
        let est = self.estimate(TAG_GBAR, move |rng| {
            let g = sample_gbar(&m, rng);
            let g2 = g.block(0, m.k, m.n_e, m.n_j);
            Some(full_log_sum(&g)? - full_log_sum(&g2)?)
        })?;
        Ok(est.scaled(LOG2_E))
    }

    /// Expectation part of the universal bound's constant, in bits:
    /// `(1/T′) E[Σᵢ Σⱼ log₂(1 + λ²_{G₁,j} / (β² λ²_{N′,i} + σ²))]
    ///  + (1 − N_J/T′)⁺ E[Σⱼ log₂(λ²_{G₁,j} + σ²)]`.
    pub fn universal_constant(&self, model: &LeakageModel, sigma_z2: f64) -> Result<McEstimate> {
        if !(sigma_z2 > 0.0) || !sigma_z2.is_finite() {
            return Err(Error::invalid("noise variance must be positive and finite"));
        }
        self.universal_inner(model, sigma_z2)
    }

    /// The `σ² → 0` limit of [`Self::universal_constant`].
    pub fn universal_constant_high_snr(&self, model: &LeakageModel) -> Result<McEstimate> {
        if model.n_j > 0 && !(model.beta2 > 0.0) {
            return Err(Error::precondition("beta2=0", "high-SNR limit diverges without jamming power"));
        }
        self.universal_inner(model, 0.0)
    }

    fn universal_inner(&self, model: &LeakageModel, sigma_z2: f64) -> Result<McEstimate> {
        if model.t_prime == 0 {
            return Err(Error::precondition("T'<1", "no symbols left after training"));
        }
        let m = *model;
        let tp = m.t_prime as f64;
        let clamp = (1.0 - m.n_j as f64 / tp).max(0.0);
        self.estimate(TAG_UNIVERSAL, move |rng| {
            let g1 = sample_gaussian(m.n_e, m.k, m.alpha2, rng).ok()?;
            let lg = hermitian_eigenvalues(&g1.small_gram()).ok()?;
            let r = m.n_j.min(m.t_prime);
            let ln = if r > 0 {
                let l = sample_bartlett_factor(r, m.n_j.max(m.t_prime), rng).ok()?;
                hermitian_eigenvalues(&l.gram_rows()).ok()?
            } else {
                Vec::new()
            };
            let mut first = 0.0;
            for &a in &ln {
                let denom = m.beta2 * a.max(0.0) + sigma_z2;
                for &b in &lg {
                    first += libm::log1p(b.max(0.0) / denom);
                }
            }
            let mut second = 0.0;
            if clamp > 0.0 {
                for &b in &lg {
                    let v = b.max(0.0) + sigma_z2;
                    if !(v > 0.0) {
                        return None;
                    }
                    second += libm::log(v);
                }
            }
            let v = (first / tp + clamp * second) * LOG2_E;
            v.is_finite().then_some(v)
        })
    }

    /// Compares the singular values of `Y_E = Ḡ X̄ + Z` with those of `Ḡ X̄`
    /// at noise variance `sigma_z2`.
    pub fn sv_split_check(&self, model: &LeakageModel, sigma_z2: f64) -> Result<SplitReport> {
        if model.t < model.m_bar() {
            return Err(Error::precondition(
                "T<Mbar",
                alloc::format!("T = {} < K + N_J = {}", model.t, model.m_bar()),
            ));
        }
        if !(sigma_z2 > 0.0) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        let m = *model;
        let xi = m.n_e.min(m.m_bar());
        let omega = m.n_e.min(m.t);
        let seed = derive_seed(self.seed, TAG_SPLIT);
        let raw = self.runner.map_trials(self.trials, |i| {
            let mut rng = trial_rng(seed, i as u64);
            let g = sample_gbar(&m, &mut rng);
            let x = sample_gaussian(m.m_bar(), m.t, 1.0, &mut rng).expect("unit variance");
            let gx = &g * &x;
            let z = sample_gaussian(m.n_e, m.t, sigma_z2, &mut rng).expect("positive variance");
            let y = gx.add(&z).expect("same shape");
            let mu = singular_values(&gx);
            let sy = singular_values(&y);
            let devs: Vec<f64> = (0..xi).map(|j| (sy[j] - mu[j]).abs() / mu[j]).collect();
            let trailing = if omega > xi {
                let zb = sample_gaussian(m.n_e - xi, m.t - xi, sigma_z2, &mut rng)
                    .expect("positive variance");
                let own: f64 = sy[xi..omega].iter().map(|s| s * s).sum();
                Some(own / zb.frobenius_norm_sqr())
            } else {
                None
            };
            (devs, trailing)
        });
        let mut all: Vec<f64> = Vec::with_capacity(self.trials * xi);
        let mut ratio_sum = 0.0;
        let mut ratio_n = 0usize;
        for (devs, tr) in raw {
            all.extend(devs);
            if let Some(r) = tr {
                ratio_sum += r;
                ratio_n += 1;
            }
        }
        all.sort_by(|a, b| a.total_cmp(b));
        let median = if all.is_empty() {
            0.0
        } else if all.len() % 2 == 1 {
            all[all.len() / 2]
        } else {
            0.5 * (all[all.len() / 2 - 1] + all[all.len() / 2])
        };
        Ok(SplitReport {
            trials: self.trials,
            xi,
            omega,
            median_rel_dev: median,
            max_rel_dev: all.last().copied().unwrap_or(0.0),
            trailing_power_ratio: (ratio_n > 0).then(|| ratio_sum / ratio_n as f64),
        })
    }
}
