//! Sweep evaluation and CSV output.

use std::collections::HashMap;
use std::fmt::Write as _;

use anam_core::bounds::{self, LeakageBounds, NonCoherentOptions, SecrecyPair};
use anam_core::channel::{LeakageModel, SystemConfig};
use anam_core::montecarlo::{Estimator, McEstimate, TrialRunner};
use anam_core::Error;

use crate::config::{Metric, RunSettings, SecrecyRegime, SweepSpec};

pub const CSV_HEADER: &str = "axis,metric,value,std_error,reason";

/// One `(axis value, metric)` cell. `value` is `None` when the metric is
/// unavailable at this point; `reason` then says why.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub metric: Metric,
    pub value: Option<f64>,
    pub std_error: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: &'static str,
    pub rows: Vec<SweepRow>,
}

fn reason_for(e: &Error) -> String {
    match e {
        Error::Precondition { code, .. } => format!("precondition:{code}"),
        Error::DegenerateChannel(_) => "error:degenerate".to_string(),
        Error::InvalidArgument(_) => "error:invalid".to_string(),
    }
}

type Cell = Result<(f64, f64), String>;

fn cell(r: anam_core::Result<(f64, f64)>) -> Cell {
    match r {
        Ok((v, se)) if v.is_finite() && se.is_finite() => Ok((v, se)),
        Ok(_) => Err("nonfinite".to_string()),
        Err(e) => Err(reason_for(&e)),
    }
}

/// Which pair of leakage bounds to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    NonCoherent,
    Partial,
}

/// Evaluates metrics for one configuration. Bounds are memoized per
/// `(family, model)` so the lower and upper curves and the secrecy rates
/// share Monte Carlo work.
pub struct PointEvaluator<'a, R: TrialRunner> {
    est: &'a Estimator<R>,
    run: &'a RunSettings,
    cache: HashMap<(Family, ModelKey), Result<LeakageBounds, Error>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct ModelKey([u64; 7]);

impl From<&LeakageModel> for ModelKey {
    fn from(m: &LeakageModel) -> Self {
        ModelKey([
            m.k as u64,
            m.n_e as u64,
            m.n_j as u64,
            m.t as u64,
            m.t_prime as u64,
            m.alpha2.to_bits(),
            m.beta2.to_bits(),
        ])
    }
}

impl<'a, R: TrialRunner> PointEvaluator<'a, R> {
    pub fn new(est: &'a Estimator<R>, run: &'a RunSettings) -> Self {
        Self {
            est,
            run,
            cache: HashMap::new(),
        }
    }

    pub fn bounds(&mut self, family: Family, m: &LeakageModel) -> Result<LeakageBounds, Error> {
        let key = (family, ModelKey::from(m));
        if let Some(b) = self.cache.get(&key) {
            return b.clone();
        }
        let b = match family {
            Family::NonCoherent => bounds::noncoherent_bounds_with(
                m,
                self.est,
                NonCoherentOptions {
                    allow_short_block: self.run.allow_short_block,
                },
            ),
            Family::Partial => bounds::partial_coherent_bounds(m, self.est),
        };
        self.cache.insert(key, b.clone());
        b
    }

    fn secrecy(&mut self, cfg: &SystemConfig) -> Result<SecrecyPair, Error> {
        let family = match self.run.secrecy_regime {
            SecrecyRegime::NonCoherent => Family::NonCoherent,
            SecrecyRegime::Partial => Family::Partial,
        };
        let su = self.bounds(family, &cfg.leakage_model())?;
        let mu = self.bounds(family, &cfg.per_user_model())?;
        bounds::secrecy_pair(cfg, &su, &mu, cfg.snr_e_db(), cfg.snr_l_db())
    }

    /// `(value, std_error)` in bits, or a reason code.
    pub fn metric(&mut self, cfg: &SystemConfig, metric: Metric) -> Result<(f64, f64), String> {
        let m = cfg.leakage_model();
        let snr = cfg.snr_e_db();
        let pair = |e: McEstimate| (e.mean, e.std_error);
        let r = match metric {
            Metric::Ergodic => self.est.ergodic_leakage(&m, cfg.sigma_z2()).map(pair),
            Metric::NoncohLb => self
                .bounds(Family::NonCoherent, &m)
                .map(|b| (b.lower_at(snr), b.std_error)),
            Metric::NoncohUb => self
                .bounds(Family::NonCoherent, &m)
                .map(|b| (b.upper_at(snr), b.std_error)),
            Metric::PartialLb => self
                .bounds(Family::Partial, &m)
                .map(|b| (b.lower_at(snr), b.std_error)),
            Metric::PartialUb => self
                .bounds(Family::Partial, &m)
                .map(|b| (b.upper_at(snr), b.std_error)),
            Metric::Universal => bounds::universal_upper(&m, snr, self.est).map(pair),
            Metric::SecrecySu => self.secrecy(cfg).map(|p| (p.single_user, p.single_user_se)),
            Metric::SecrecyMu => self.secrecy(cfg).map(|p| (p.multi_user, p.multi_user_se)),
        };
        cell(r)
    }
}

/// Evaluates every metric at every axis value, in axis order. The same
/// master seed is used at each point, so neighbouring points share random
/// numbers and curves are smooth in the axis.
pub fn run_sweep<R: TrialRunner>(spec: &SweepSpec, runner: R) -> anam_core::Result<SweepResult> {
    let est = Estimator::new(runner, spec.run.trials, spec.run.seed)?;
    let mut rows = Vec::with_capacity(spec.axis_values.len() * spec.metrics.len());
    for &x in &spec.axis_values {
        let point = spec.point(x);
        let mut eval = PointEvaluator::new(&est, &spec.run);
        for &metric in &spec.metrics {
            let c = match &point {
                Ok(cfg) => eval.metric(cfg, metric),
                Err(_) => Err("error:invalid".to_string()),
            };
            rows.push(match c {
                Ok((v, se)) => SweepRow {
                    axis: x,
                    metric,
                    value: Some(v),
                    std_error: se,
                    reason: String::new(),
                },
                Err(reason) => SweepRow {
                    axis: x,
                    metric,
                    value: None,
                    std_error: 0.0,
                    reason,
                },
            });
        }
    }
    Ok(SweepResult {
        axis_name: spec.axis.name(),
        rows,
    })
}

/// `x` with 9 significant digits, like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl SweepResult {
    /// CSV with LF line endings. Unavailable cells leave `value` and
    /// `std_error` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (value, se) = match r.value {
                Some(v) => (format_sig9(v), format_sig9(r.std_error)),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_sig9(r.axis),
                r.metric.name(),
                value,
                se,
                r.reason
            );
        }
        out
    }
}
