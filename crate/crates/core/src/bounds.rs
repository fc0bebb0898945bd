//! Closed-form leakage bounds and secrecy rates, in bits per symbol.
//!
//! Each bound has the high-SNR form `dof · log₂ SNR_E + c`. The expectation
//! terms inside the constants come from a [`montecarlo::Estimator`]; their
//! standard errors travel with the result.
//!
//! [`montecarlo::Estimator`]: crate::montecarlo::Estimator

use core::f64::consts::{E, LN_10, PI};

use crate::channel::{LeakageModel, SystemConfig};
use crate::montecarlo::{Estimator, McEstimate, SvKind, TrialRunner};
use crate::special::{digamma_sum, log_grassmann_volume, EULER_GAMMA};
use crate::{Error, Result, LOG2_E};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Ergodic,
    NonCoherent,
    PartialCoherent,
    Universal,
}

/// `dof · log₂ SNR + c` for `c` in `[c_lower, c_upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBounds {
    pub dof: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub regime: Regime,
    /// Monte Carlo standard error shared by both constants.
    pub std_error: f64,
    /// The model the bound was evaluated for.
    pub model: LeakageModel,
}

/// `log₂` of an SNR given in dB.
pub fn log2_snr(snr_db: f64) -> f64 {
    snr_db / 10.0 * LN_10 * LOG2_E
}

impl LeakageBounds {
    fn at(&self, snr_db: f64, c: f64) -> f64 {
        (self.dof * log2_snr(snr_db) + c).max(0.0)
    }

    pub fn lower_at(&self, snr_db: f64) -> f64 {
        self.at(snr_db, self.c_lower)
    }

    pub fn upper_at(&self, snr_db: f64) -> f64 {
        self.at(snr_db, self.c_upper)
    }

    /// `(c_lower − k·se, c_upper + k·se)`.
    pub fn widened(&self, k: f64) -> (f64, f64) {
        (self.c_lower - k * self.std_error, self.c_upper + k * self.std_error)
    }
}

fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// `log₂ |G(a, b)|`.
fn log2_grassmann(a: usize, b: usize) -> f64 {
    log_grassmann_volume(a, b).expect("b <= a").value() * LOG2_E
}

/// `log₂ e · Σ_{i=1}^{count} ψ(top − i + 1)`.
fn psi_bits(top: usize, count: usize) -> f64 {
    digamma_sum(top, count) * LOG2_E
}

fn visible_streams(m: &LeakageModel) -> usize {
    m.n_e.saturating_sub(m.n_j).min(m.k)
}

/// `min((N_E − N_J)⁺, K)`.
pub fn ergodic_dof(m: &LeakageModel) -> f64 {
    visible_streams(m) as f64
}

/// `min((N_E − N_J)⁺, K) · (1 − M̄/T)`; requires `T ≥ M̄`.
pub fn noncoherent_dof(m: &LeakageModel) -> Result<f64> {
    check_long_block(m)?;
    let num = visible_streams(m) * (m.t - m.m_bar());
    Ok(num as f64 / m.t as f64)
}

/// `K (1 − N_J/T′)⁺`.
pub fn partial_dof(m: &LeakageModel) -> Result<f64> {
    check_training(m)?;
    let num = m.k * m.t_prime.saturating_sub(m.n_j);
    Ok(num as f64 / m.t_prime as f64)
}

/// `min(N_E, K) (1 − N_J/T′)⁺`.
pub fn universal_dof(m: &LeakageModel) -> Result<f64> {
    check_training(m)?;
    let num = m.n_e.min(m.k) * m.t_prime.saturating_sub(m.n_j);
    Ok(num as f64 / m.t_prime as f64)
}

fn check_long_block(m: &LeakageModel) -> Result<()> {
    if m.t < m.m_bar() {
        return Err(Error::precondition(
            "T<Mbar",
            alloc::format!("T = {} < K + N_J = {}", m.t, m.m_bar()),
        ));
    }
    Ok(())
}

fn check_training(m: &LeakageModel) -> Result<()> {
    if m.t_prime == 0 {
        return Err(Error::precondition("T'<1", "no symbols left after training"));
    }
    Ok(())
}

fn check_beta(m: &LeakageModel) -> Result<()> {
    if m.n_j > 0 && !(m.beta2 > 0.0) {
        return Err(Error::precondition("beta2=0", "jamming dimensions carry no power"));
    }
    Ok(())
}

/// High-SNR ergodic leakage: dof `min((N_E − N_J)⁺, K)` and a Monte Carlo
/// constant.
pub fn ergodic_highsnr<R: TrialRunner>(m: &LeakageModel, est: &Estimator<R>) -> Result<LeakageBounds> {
    let c = est.ergodic_constant(m)?;
    Ok(LeakageBounds {
        dof: ergodic_dof(m),
        c_lower: c.mean,
        c_upper: c.mean,
        regime: Regime::Ergodic,
        std_error: c.std_error,
        model: *m,
    })
}

/// Options for [`noncoherent_bounds_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NonCoherentOptions {
    /// Treat `T < M̄` as zero-DoF and bound it by the saturated line instead
    /// of failing. This goes beyond the proven regime.
    pub allow_short_block: bool,
}

/// Non-coherent eavesdropper bounds; fails with `T<Mbar` when `T < M̄`.
pub fn noncoherent_bounds<R: TrialRunner>(m: &LeakageModel, est: &Estimator<R>) -> Result<LeakageBounds> {
    noncoherent_bounds_with(m, est, NonCoherentOptions::default())
}

pub fn noncoherent_bounds_with<R: TrialRunner>(
    m: &LeakageModel,
    est: &Estimator<R>,
    opts: NonCoherentOptions,
) -> Result<LeakageBounds> {
    if m.t < m.m_bar() {
        if !opts.allow_short_block {
            check_long_block(m)?;
        }
        let c = saturated_line(m.n_e, m.t, m.t);
        return Ok(LeakageBounds {
            dof: 0.0,
            c_lower: 0.0,
            c_upper: c,
            regime: Regime::NonCoherent,
            std_error: 0.0,
            model: *m,
        });
    }
    check_beta(m)?;
    let gx = est.e_log_sv_sum(SvKind::GXBar, m)?;
    let g2n2 = if m.n_j > 0 {
        est.e_log_sv_sum(SvKind::G2N2, m)?
    } else {
        McEstimate::exact(0.0)
    };
    Ok(noncoherent_from_expectations(m, gx.minus(g2n2)))
}

/// The non-coherent bounds given `E[Σ ln λ²_{ḠX̄}] − E[Σ ln λ²_{G₂N₂}]` in
/// nats. Requires `T ≥ M̄`.
pub fn noncoherent_from_expectations(m: &LeakageModel, diff: McEstimate) -> LeakageBounds {
    let (k, n_e, n_j, t, mb) = (m.k, m.n_e, m.n_j, m.t, m.m_bar());
    let (kf, nef, njf, tf) = (k as f64, n_e as f64, n_j as f64, t as f64);
    let frac = (t - mb) as f64 / tf;
    let a = visible_streams(m) as f64;
    let pie = PI * E;

    let volumes = log2_grassmann(t, mb.min(n_e)) - log2_grassmann(mb.max(n_e), n_e)
        + log2_grassmann(n_j.max(n_e), n_e)
        - log2_grassmann(t - k, n_j.min(n_e));
    let d = frac * diff.mean * LOG2_E - nef / tf * psi_bits(t, k) + volumes / tf
        - a * frac * log2(pie)
        - kf * nef / tf * log2(pie * m.alpha2);

    let (jam_up, jam_lo) = if n_j > 0 {
        (njf * log2(tf / m.beta2), njf * log2(m.beta2 / (t - k) as f64))
    } else {
        (0.0, 0.0)
    };
    let c_upper = nef / tf * (kf * log2(pie * tf) + jam_up - psi_bits(t - k, n_j)) + d;
    let c_lower = nef / tf * (kf * log2(pie * m.alpha2) + jam_lo + psi_bits(t, mb)) + d;
    LeakageBounds {
        dof: (visible_streams(m) * (t - mb)) as f64 / tf,
        c_lower,
        c_upper,
        regime: Regime::NonCoherent,
        std_error: frac * diff.std_error * LOG2_E,
        model: *m,
    }
}

/// `c_upper − c_lower` of the non-coherent bounds for `α² = β² = 1`:
/// `(1/T)[M̄ N_E log₂T − N_E Σ_{i≤M̄} ψ(T−i+1) log₂e]
///  + (N_E/T)[N_J log₂(T−K) − Σ_{i≤N_J} ψ(T−K−i+1) log₂e]`.
pub fn entropy_gap(m: &LeakageModel) -> Result<f64> {
    if (m.alpha2 - 1.0).abs() > 1e-12 || (m.beta2 - 1.0).abs() > 1e-12 && m.n_j > 0 {
        return Err(Error::invalid("entropy gap is defined for alpha2 = beta2 = 1"));
    }
    if m.t < m.m_bar() {
        return Err(Error::invalid(alloc::format!(
            "entropy gap needs T >= K + N_J, got T = {}",
            m.t
        )));
    }
    let (k, n_e, n_j, t, mb) = (m.k, m.n_e as f64, m.n_j, m.t, m.m_bar());
    let tf = t as f64;
    let first = (mb as f64 * n_e * log2(tf) - n_e * psi_bits(t, mb)) / tf;
    let second = if n_j > 0 {
        n_e / tf * (n_j as f64 * log2((t - k) as f64) - psi_bits(t - k, n_j))
    } else {
        0.0
    };
    Ok(first + second)
}

/// `N_E log₂T − (N_E/T) Σ_{i=1}^{count} ψ(T−i+1) log₂e`.
fn saturated_line(n_e: usize, t: usize, count: usize) -> f64 {
    let (nef, tf) = (n_e as f64, t as f64);
    nef * log2(tf) - nef / tf * psi_bits(t, count.min(t))
}

/// Saturated leakage when `M̄ = T`: the exact line and its relaxation
/// `N_E log₂(e^γ T)`, in that order.
pub fn saturated_upper(m: &LeakageModel) -> Result<(f64, f64)> {
    if m.m_bar() != m.t {
        return Err(Error::invalid(alloc::format!(
            "saturated bound needs K + N_J = T, got {} and {}",
            m.m_bar(),
            m.t
        )));
    }
    let exact = saturated_line(m.n_e, m.t, m.m_bar());
    let relaxed = m.n_e as f64 * (EULER_GAMMA * LOG2_E + log2(m.t as f64));
    Ok((exact, relaxed))
}

/// The universal bound at one SNR, valid at any SNR:
/// `min(N_E,K)(1 − N_J/T′)⁺ log₂SNR + c(σ²)`.
pub fn universal_upper<R: TrialRunner>(
    m: &LeakageModel,
    snr_e_db: f64,
    est: &Estimator<R>,
) -> Result<McEstimate> {
    let dof = universal_dof(m)?;
    let sigma2 = crate::channel::noise_variance_from_db(snr_e_db);
    let c = est.universal_constant(m, sigma2)?;
    Ok(McEstimate {
        mean: c.mean + dof * log2_snr(snr_e_db),
        ..c
    })
}

/// The universal bound's high-SNR line. It is an upper bound only, so
/// `c_lower = c_upper` holds the same value.
pub fn universal_bounds<R: TrialRunner>(m: &LeakageModel, est: &Estimator<R>) -> Result<LeakageBounds> {
    let dof = universal_dof(m)?;
    let c = est.universal_constant_high_snr(m)?;
    Ok(LeakageBounds {
        dof,
        c_lower: c.mean,
        c_upper: c.mean,
        regime: Regime::Universal,
        std_error: c.std_error,
        model: *m,
    })
}

/// Partially coherent eavesdropper bounds; requires `N_E ≥ M̄` and
/// `T′ ≥ N_J`.
pub fn partial_coherent_bounds<R: TrialRunner>(
    m: &LeakageModel,
    est: &Estimator<R>,
) -> Result<LeakageBounds> {
    check_partial(m)?;
    check_beta(m)?;
    let diff = if m.n_j > 0 {
        let a = est.e_log_sv_sum(SvKind::G22NPrime, m)?;
        let b = est.e_log_sv_sum(SvKind::G2NPrime, m)?;
        a.minus(b)
    } else {
        McEstimate::exact(0.0)
    };
    partial_from_expectations(m, diff)
}

fn check_partial(m: &LeakageModel) -> Result<()> {
    check_training(m)?;
    if m.n_e < m.m_bar() {
        return Err(Error::precondition(
            "N_E<Mbar",
            alloc::format!("N_E = {} < K + N_J = {}", m.n_e, m.m_bar()),
        ));
    }
    if m.t_prime < m.n_j {
        return Err(Error::precondition(
            "T'<N_J",
            alloc::format!("T' = {} < N_J = {}", m.t_prime, m.n_j),
        ));
    }
    Ok(())
}

/// The partially coherent bounds given
/// `E[Σ ln λ²_{G₂₂N′}] − E[Σ ln λ²_{G₂N′}]` in nats.
pub fn partial_from_expectations(m: &LeakageModel, diff: McEstimate) -> Result<LeakageBounds> {
    check_partial(m)?;
    let (k, n_e, n_j, tp) = (m.k, m.n_e, m.n_j, m.t_prime);
    let (kf, nef, njf, tpf) = (k as f64, n_e as f64, n_j as f64, tp as f64);
    let frac = (tp - n_j) as f64 / tpf;
    let pie = PI * E;

    let d = frac * (diff.mean * LOG2_E - kf * log2(pie)) + psi_bits(n_e, k) + kf * log2(pie * m.alpha2);
    let psi = psi_bits(tp, n_j);
    let (up_jam, lo_jam) = if n_j > 0 {
        (
            njf * nef * log2(tpf) - kf * njf * log2(pie * tpf * m.beta2),
            -nef * njf * log2(tpf) - kf * njf * log2(pie * m.beta2),
        )
    } else {
        (0.0, 0.0)
    };
    let c_upper = (up_jam - nef * psi) / tpf + d;
    let c_lower = ((nef - kf) * psi + lo_jam) / tpf + d;
    Ok(LeakageBounds {
        dof: (k * (tp - n_j)) as f64 / tpf,
        c_lower,
        c_upper,
        regime: Regime::PartialCoherent,
        std_error: frac * diff.std_error * LOG2_E,
        model: *m,
    })
}

/// Secrecy rates for one eavesdropper regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyPair {
    /// One wiretap code across all `K` users.
    pub single_user: f64,
    /// Independent wiretap codes per user.
    pub multi_user: f64,
    /// Monte Carlo standard errors of the two rates.
    pub single_user_se: f64,
    pub multi_user_se: f64,
}

/// All four rates: both coding strategies against both eavesdroppers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyRates {
    pub su_noncoherent: f64,
    pub su_partial: f64,
    pub mu_noncoherent: f64,
    pub mu_partial: f64,
}

/// Sum rate of the `K` users, `K log₂(1 + M α² SNR_L)`.
pub fn user_sum_rate(cfg: &SystemConfig, snr_l_db: f64) -> f64 {
    let snr = libm::pow(10.0, snr_l_db / 10.0);
    cfg.k() as f64 * libm::log2(1.0 + cfg.m() as f64 * cfg.alpha2() * snr)
}

/// Secrecy rates for the regime of the given bounds, with leakage taken at
/// the upper constant. `su` must be evaluated for the full system and `mu`
/// for its single-user view ([`SystemConfig::per_user_model`]). Because the
/// leakage is an upper bound, the rates are conservative.
pub fn secrecy_pair(
    cfg: &SystemConfig,
    su: &LeakageBounds,
    mu: &LeakageBounds,
    snr_e_db: f64,
    snr_l_db: f64,
) -> Result<SecrecyPair> {
    if su.regime != mu.regime {
        return Err(Error::invalid("single- and multi-user leakage come from different regimes"));
    }
    if su.model != cfg.leakage_model() {
        return Err(Error::invalid("single-user leakage was computed for another configuration"));
    }
    if mu.model != cfg.per_user_model() {
        return Err(Error::invalid("multi-user leakage must use the per-user view with K = 1"));
    }
    let k = cfg.k() as f64;
    let prefactor = match su.regime {
        Regime::PartialCoherent | Regime::Universal => cfg.t_prime() as f64 / cfg.t() as f64,
        Regime::NonCoherent | Regime::Ergodic => 1.0,
    };
    let sum = user_sum_rate(cfg, snr_l_db);
    let single = (sum - su.upper_at(snr_e_db)).max(0.0);
    let per_user = (sum / k - mu.upper_at(snr_e_db)).max(0.0);
    let active = |r: f64, se: f64| if r > 0.0 { se } else { 0.0 };
    Ok(SecrecyPair {
        single_user: prefactor * single,
        multi_user: prefactor * k * per_user,
        single_user_se: prefactor * active(single, su.std_error),
        multi_user_se: prefactor * k * active(per_user, mu.std_error),
    })
}

/// All four secrecy rates from the non-coherent and partially coherent
/// bounds of the full system and its per-user view.
pub fn secrecy_rates(
    cfg: &SystemConfig,
    noncoherent: (&LeakageBounds, &LeakageBounds),
    partial: (&LeakageBounds, &LeakageBounds),
    snr_e_db: f64,
    snr_l_db: f64,
) -> Result<SecrecyRates> {
    if noncoherent.0.regime != Regime::NonCoherent || partial.0.regime != Regime::PartialCoherent {
        return Err(Error::invalid("expected non-coherent then partially coherent bounds"));
    }
    let nc = secrecy_pair(cfg, noncoherent.0, noncoherent.1, snr_e_db, snr_l_db)?;
    let pc = secrecy_pair(cfg, partial.0, partial.1, snr_e_db, snr_l_db)?;
    Ok(SecrecyRates {
        su_noncoherent: nc.single_user,
        su_partial: pc.single_user,
        mu_noncoherent: nc.multi_user,
        mu_partial: pc.multi_user,
    })
}
