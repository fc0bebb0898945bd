//! Cross-module self-checks run by `anam validate`.

use std::fmt::Write as _;

use anam_core::bounds::{ergodic_dof, log2_snr};
use anam_core::channel::{
    check_effective_distributions, sample_realization, transmit_signal, LeakageModel, SystemConfig,
};
use anam_core::linalg::sample_gaussian;
use anam_core::montecarlo::{derive_seed, trial_rng, Estimator, McEstimate, SvKind, TrialRunner};
use anam_core::special::{digamma, expected_logdet_wishart, log_grassmann_volume};

use crate::runner::RayonRunner;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub trials: usize,
    pub workers: usize,
    /// Added to every digamma value in the Wishart closed form. Nonzero only
    /// to confirm that the suite catches a broken build.
    pub digamma_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {}: {}", c.name, c.detail);
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(s, "{} checks, {failed} failed", self.checks.len());
        s
    }
}

fn outcome(name: &'static str, r: anam_core::Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn cfg(m: usize, k: usize, n_e: usize, n_j: usize, t: usize) -> anam_core::Result<SystemConfig> {
    SystemConfig::builder()
        .m(m)
        .k(k)
        .n_e(n_e)
        .n_j(n_j)
        .t(t)
        .alpha2(1.0)
        .build()
}

pub fn run_validation(opts: &ValidationOptions) -> anam_core::Result<ValidationReport> {
    let runner = RayonRunner::new(opts.workers)
        .map_err(|e| anam_core::Error::InvalidArgument(format!("thread pool: {e}")))?;
    let est = Estimator::new(runner, opts.trials, opts.seed)?;
    let seed_for = |i: u64| derive_seed(opts.seed, 0x100 + i);
    let n = opts.trials;

    let checks = vec![
        outcome("effective-distributions", effective_distributions(n, seed_for(0))),
        outcome("variance-approach", variance_approach(n, seed_for(1))),
        outcome("transmit-power", transmit_power(n, seed_for(2))),
        outcome("wishart", wishart(&est, opts.digamma_bias)),
        outcome("grassmann-symmetry", grassmann_symmetry()),
        outcome("singular-value-split", sv_split(&est)),
        outcome("ergodic-slope", ergodic_slope(&est)),
        outcome("digamma-recurrence", digamma_recurrence()),
    ];
    Ok(ValidationReport {
        seed: opts.seed,
        trials: opts.trials,
        checks,
    })
}

fn effective_distributions(trials: usize, seed: u64) -> anam_core::Result<(bool, String)> {
    let c = cfg(32, 8, 8, 24, 32)?;
    let r = check_effective_distributions(&c, trials, &mut trial_rng(seed, 0))?;
    let nf = trials as f64;
    let g2 = r.g2_variance.unwrap_or(f64::NAN);
    let mean_ok = r.max_abs_mean < 5.0 * (c.g1_entry_variance() / nf).sqrt();
    let var_ok = (r.g1_variance / r.g1_variance_exact - 1.0).abs() < 0.05 && (g2 / r.beta2 - 1.0).abs() < 0.05;
    let corr_ok = r.max_abs_corr < 5.0 / nf.sqrt();
    let ks_ok = r.ks_exact < r.ks_threshold;
    Ok((
        mean_ok && var_ok && corr_ok && ks_ok,
        format!(
            "mean {:.4}, var G1 {:.4} (exact {:.4}), var G2 {:.4}, corr {:.4}, KS {:.4} < {:.4}",
            r.max_abs_mean, r.g1_variance, r.g1_variance_exact, g2, r.max_abs_corr, r.ks_exact, r.ks_threshold
        ),
    ))
}

fn variance_approach(trials: usize, seed: u64) -> anam_core::Result<(bool, String)> {
    let narrow = cfg(8, 4, 4, 4, 8)?;
    let wide = cfg(32, 4, 4, 28, 32)?;
    let a = check_effective_distributions(&narrow, trials, &mut trial_rng(seed, 0))?;
    let b = check_effective_distributions(&wide, trials, &mut trial_rng(seed, 1))?;
    let (ra, rb) = (a.g1_variance / narrow.alpha2(), b.g1_variance / wide.alpha2());
    let ok = (rb - 1.0).abs() < (ra - 1.0).abs()
        && (a.g1_variance / a.g1_variance_exact - 1.0).abs() < 0.05
        && (b.g1_variance / b.g1_variance_exact - 1.0).abs() < 0.05;
    Ok((ok, format!("var G1 / alpha2 = {ra:.4} at M/K = 2, {rb:.4} at M/K = 8")))
}

fn transmit_power(trials: usize, seed: u64) -> anam_core::Result<(bool, String)> {
    let c = cfg(32, 8, 4, 24, 8)?;
    let mut samples = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut rng = trial_rng(seed, i as u64);
        let real = sample_realization(&c, &mut rng)?;
        let s = sample_gaussian(c.k(), c.t(), 1.0, &mut rng)?;
        let nn = sample_gaussian(c.n_j(), c.t(), 1.0, &mut rng)?;
        let x = transmit_signal(&real, &s, &nn, &c)?;
        samples.push(x.frobenius_norm_sqr() / c.t() as f64);
    }
    let p = McEstimate::from_samples(&samples, 0)?;
    let exact = c.exact_transmit_power();
    let ok = (p.mean / exact - 1.0).abs() < 0.02 && p.within(exact, 4.0);
    Ok((
        ok,
        format!("Tr X X^H / T = {:.4} +- {:.4}, exact {exact:.4}, nominal M = {}", p.mean, p.std_error, c.m()),
    ))
}

fn wishart<R: TrialRunner>(est: &Estimator<R>, bias: f64) -> anam_core::Result<(bool, String)> {
    let (n_e, k) = (4, 8);
    let mut closed = 0.0;
    for i in 1..=n_e {
        closed += digamma((k - i + 1) as f64)? + bias;
    }
    let library = expected_logdet_wishart(n_e, k)?;
    let model = LeakageModel::new(k, n_e, 0, k, 1.0, 0.0)?;
    let mc = est.e_log_sv_sum(SvKind::G1, &model)?;
    let ok = mc.within(closed, 4.0) && (closed - library).abs() < 1e-9;
    Ok((
        ok,
        format!("closed form {closed:.6}, Monte Carlo {:.6} +- {:.6}", mc.mean, mc.std_error),
    ))
}

fn grassmann_symmetry() -> anam_core::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for t in 1..=64 {
        for m in 0..=t {
            let a = log_grassmann_volume(t, m)?.value();
            let b = log_grassmann_volume(t, t - m)?.value();
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    Ok((worst < 1e-10, format!("max relative asymmetry {worst:.2e} for T <= 64")))
}

fn sv_split<R: TrialRunner>(est: &Estimator<R>) -> anam_core::Result<(bool, String)> {
    let model = LeakageModel::new(4, 16, 8, 32, 1.0, 1.0)?;
    let r = est.sv_split_check(&model, 1e-8)?;
    Ok((
        r.median_rel_dev < 1e-3,
        format!("median relative deviation {:.3e} over top {} values", r.median_rel_dev, r.xi),
    ))
}

fn ergodic_slope<R: TrialRunner>(est: &Estimator<R>) -> anam_core::Result<(bool, String)> {
    let model = LeakageModel::new(4, 16, 8, 32, 1.0, 1.0)?;
    let noise = |db: f64| 10f64.powf(-db / 10.0);
    let lo = est.ergodic_leakage(&model, noise(40.0))?;
    let hi = est.ergodic_leakage(&model, noise(43.0))?;
    let slope = (hi.mean - lo.mean) / (log2_snr(43.0) - log2_snr(40.0));
    let dof = ergodic_dof(&model);
    Ok((
        (slope - dof).abs() < 0.05 * dof.max(1.0),
        format!("slope {slope:.4} bits per doubling, dof {dof}"),
    ))
}

fn digamma_recurrence() -> anam_core::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 1..=400 {
        let x = 0.05 * i as f64 + 0.013;
        let d = digamma(x + 1.0)? - digamma(x)? - 1.0 / x;
        worst = worst.max(d.abs());
    }
    Ok((worst < 1e-12, format!("max |psi(x+1) - psi(x) - 1/x| = {worst:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(bias: f64) -> ValidationOptions {
        ValidationOptions {
            seed: 5,
            trials: 400,
            workers: 2,
            digamma_bias: bias,
        }
    }

    #[test]
    fn pure_checks_pass() {
        assert!(grassmann_symmetry().unwrap().0);
        assert!(digamma_recurrence().unwrap().0);
    }

    #[test]
    fn biased_digamma_breaks_wishart_only_there() {
        let est = Estimator::serial(400, 5).unwrap();
        assert!(wishart(&est, 0.0).unwrap().0);
        assert!(!wishart(&est, 0.1).unwrap().0);
        assert!(digamma_recurrence().unwrap().0);
    }

    #[test]
    fn report_format() {
        let r = ValidationReport {
            seed: 1,
            trials: 2,
            checks: vec![
                CheckOutcome {
                    name: "a",
                    passed: true,
                    detail: "ok".into(),
                },
                CheckOutcome {
                    name: "b",
                    passed: false,
                    detail: "bad".into(),
                },
            ],
        };
        assert_eq!(r.to_text(), "PASS a: ok\nFAIL b: bad\n2 checks, 1 failed\n");
        assert!(!r.all_passed());
    }

    #[test]
    fn suite_passes_and_repeats() {
        let a = run_validation(&opts(0.0)).unwrap();
        assert!(a.all_passed(), "{}", a.to_text());
        let b = run_validation(&opts(0.0)).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let bad = run_validation(&opts(0.1)).unwrap();
        let failed: Vec<_> = bad.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert_eq!(failed, ["wishart"]);
    }
}
