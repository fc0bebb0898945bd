//! Flat `key = value` configuration files.
//!
//! ```text
//! # leakage against coherence length
//! M = 64
//! K = 16
//! N_E = 64
//! N_J = 48
//! alpha2 = 1
//! snr_e_db = 30
//! sweep_axis = T_gamma
//! axis_values = 1, 2, 3, 5, 7
//! metrics = noncoh_lb, noncoh_ub, ergodic
//! ```
//!
//! `#` starts a comment. Keys are case-sensitive and may appear once. Values
//! given on the command line replace file values.

use std::fmt;
use std::str::FromStr;

use anam_core::channel::SystemConfig;

/// Environment variable holding the default trial count.
pub const ENV_TRIALS: &str = "ANAM_TRIALS";

/// Trials per Monte Carlo constant when nothing else is specified.
pub const DEFAULT_CONSTANT_TRIALS: usize = 20_000;

/// Trials per check that samples full channel realizations.
pub const DEFAULT_CHANNEL_TRIALS: usize = 2_000;

pub const KEYS: &[&str] = &[
    "M",
    "K",
    "N_E",
    "N_J",
    "T",
    "alpha2",
    "beta2",
    "snr_e_db",
    "snr_l_db",
    "sweep_axis",
    "axis_values",
    "metrics",
    "trials",
    "seed",
    "workers",
    "secrecy_regime",
    "allow_short_block",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    /// 1-based line in the file; `None` for command-line values.
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl ConfigError {
    pub fn new(line: Option<usize>, field: &str, message: impl Into<String>) -> Self {
        Self {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: Option<usize>,
}

/// Parsed but not yet interpreted configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

fn check_key(key: &str, line: Option<usize>) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(ConfigError::new(line, key, "unknown key"))
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = Some(i + 1);
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(line, content, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::new(line, "", "missing key before `=`"));
            }
            check_key(key, line)?;
            if let Some(prev) = cfg.get(key) {
                return Err(ConfigError::new(
                    line,
                    key,
                    format!("already set on line {}", prev.line.unwrap_or(0)),
                ));
            }
            cfg.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(cfg)
    }

    /// Replaces (or adds) a value from the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        check_key(key, None)?;
        self.entries.retain(|e| e.key != key);
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: None,
        });
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::new(None, pair, "expected `key=value`"))?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn parse_opt<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                ConfigError::new(e.line, key, format!("expected {what}, got `{}`", e.value))
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str, what: &str) -> Result<T, ConfigError> {
        self.parse_opt(key, what)?
            .ok_or_else(|| ConfigError::new(None, key, "missing"))
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|e| e.line)
    }

    /// The system configuration. `T` may be omitted when `default_t` is set.
    pub fn system_config(&self, default_t: Option<usize>) -> Result<SystemConfig, ConfigError> {
        let m: usize = self.require("M", "a positive integer")?;
        let k: usize = self.require("K", "a positive integer")?;
        let n_e: usize = self.require("N_E", "a positive integer")?;
        let n_j: usize = self.require("N_J", "a non-negative integer")?;
        let t = match (self.parse_opt::<usize>("T", "a positive integer")?, default_t) {
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => return Err(ConfigError::new(None, "T", "missing")),
        };
        let mut b = SystemConfig::builder().m(m).k(k).n_e(n_e).n_j(n_j).t(t);
        if let Some(a) = self.parse_opt::<f64>("alpha2", "a number")? {
            b = b.alpha2(a);
        }
        if let Some(v) = self.parse_opt::<f64>("beta2", "a number")? {
            b = b.beta2(v);
        }
        if let Some(v) = self.parse_opt::<f64>("snr_e_db", "a number in dB")? {
            b = b.snr_e_db(v);
        }
        if let Some(v) = self.parse_opt::<f64>("snr_l_db", "a number in dB")? {
            b = b.snr_l_db(v);
        }
        b.build().map_err(|e| ConfigError::new(None, "system", e.to_string()))
    }

    /// Trial count, seed, worker count and evaluation options.
    ///
    /// The trial count comes from the first of: the `trials` key, the
    /// `ANAM_TRIALS` value passed in `env_trials`, and `fallback`.
    pub fn run_settings(&self, env_trials: Option<&str>, fallback: usize) -> Result<RunSettings, ConfigError> {
        let (trials, trials_source) = match self.get("trials") {
            Some(e) => {
                let n = self.require::<usize>("trials", "an integer >= 2")?;
                let src = if e.line.is_some() {
                    TrialsSource::File
                } else {
                    TrialsSource::CommandLine
                };
                (n, src)
            }
            None => match env_trials {
                Some(v) => {
                    let n = v.trim().parse::<usize>().map_err(|_| {
                        ConfigError::new(None, ENV_TRIALS, format!("expected an integer >= 2, got `{v}`"))
                    })?;
                    (n, TrialsSource::Environment)
                }
                None => (fallback, TrialsSource::Default),
            },
        };
        if trials < 2 {
            let field = if trials_source == TrialsSource::Environment { ENV_TRIALS } else { "trials" };
            return Err(ConfigError::new(self.line_of("trials"), field, "need at least 2 trials"));
        }
        let seed = self.parse_opt::<u64>("seed", "a non-negative integer")?.unwrap_or(1);
        let workers = self.parse_opt::<usize>("workers", "a positive integer")?.unwrap_or(1);
        if workers == 0 {
            return Err(ConfigError::new(self.line_of("workers"), "workers", "must be at least 1"));
        }
        let secrecy_regime = match self.get("secrecy_regime") {
            None => SecrecyRegime::NonCoherent,
            Some(e) => e.value.parse().map_err(|m: String| ConfigError::new(e.line, "secrecy_regime", m))?,
        };
        let allow_short_block = self
            .parse_opt::<bool>("allow_short_block", "`true` or `false`")?
            .unwrap_or(false);
        Ok(RunSettings {
            trials,
            trials_source,
            seed,
            workers,
            secrecy_regime,
            allow_short_block,
        })
    }

    pub fn sweep_spec(&self, env_trials: Option<&str>) -> Result<SweepSpec, ConfigError> {
        let axis_entry = self
            .get("sweep_axis")
            .ok_or_else(|| ConfigError::new(None, "sweep_axis", "missing"))?;
        let axis: SweepAxis = axis_entry
            .value
            .parse()
            .map_err(|m: String| ConfigError::new(axis_entry.line, "sweep_axis", m))?;

        let values_entry = self
            .get("axis_values")
            .ok_or_else(|| ConfigError::new(None, "axis_values", "missing"))?;
        let vline = values_entry.line;
        let mut axis_values = Vec::new();
        for tok in split_list(&values_entry.value) {
            let v: f64 = tok
                .parse()
                .map_err(|_| ConfigError::new(vline, "axis_values", format!("`{tok}` is not a number")))?;
            if !v.is_finite() {
                return Err(ConfigError::new(vline, "axis_values", "values must be finite"));
            }
            axis_values.push(v);
        }
        if axis_values.is_empty() {
            return Err(ConfigError::new(vline, "axis_values", "empty list"));
        }
        if axis_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(vline, "axis_values", "must be strictly increasing"));
        }

        let metrics_entry = self
            .get("metrics")
            .ok_or_else(|| ConfigError::new(None, "metrics", "missing"))?;
        let mut metrics = Vec::new();
        for tok in split_list(&metrics_entry.value) {
            let m: Metric = tok
                .parse()
                .map_err(|msg: String| ConfigError::new(metrics_entry.line, "metrics", msg))?;
            if !metrics.contains(&m) {
                metrics.push(m);
            }
        }
        if metrics.is_empty() {
            return Err(ConfigError::new(metrics_entry.line, "metrics", "empty list"));
        }

        let m: usize = self.require("M", "a positive integer")?;
        let default_t = (axis == SweepAxis::TGamma).then_some(m);
        let base = self.system_config(default_t)?;
        let run = self.run_settings(env_trials, DEFAULT_CONSTANT_TRIALS)?;
        let spec = SweepSpec {
            base,
            axis,
            axis_values,
            metrics,
            run,
        };
        for &v in &spec.axis_values {
            spec.point(v).map_err(|e| ConfigError { line: vline, ..e })?;
        }
        Ok(spec)
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialsSource {
    CommandLine,
    File,
    Environment,
    Default,
}

impl fmt::Display for TrialsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrialsSource::CommandLine => "command line",
            TrialsSource::File => "config file",
            TrialsSource::Environment => ENV_TRIALS,
            TrialsSource::Default => "default",
        })
    }
}

/// Which eavesdropper the secrecy metrics are computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecrecyRegime {
    NonCoherent,
    Partial,
}

impl FromStr for SecrecyRegime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noncoherent" => Ok(Self::NonCoherent),
            "partial" => Ok(Self::Partial),
            _ => Err(format!("expected `noncoherent` or `partial`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSettings {
    pub trials: usize,
    pub trials_source: TrialsSource,
    pub seed: u64,
    pub workers: usize,
    pub secrecy_regime: SecrecyRegime,
    pub allow_short_block: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrEDb,
    /// `T = γ M`.
    TGamma,
    NE,
    NJ,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrEDb => "snr_e_db",
            SweepAxis::TGamma => "T_gamma",
            SweepAxis::NE => "N_E",
            SweepAxis::NJ => "N_J",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [SweepAxis::SnrEDb, SweepAxis::TGamma, SweepAxis::NE, SweepAxis::NJ]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis `{s}` (snr_e_db, T_gamma, N_E, N_J)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Ergodic,
    NoncohLb,
    NoncohUb,
    PartialLb,
    PartialUb,
    Universal,
    SecrecySu,
    SecrecyMu,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Ergodic,
        Metric::NoncohLb,
        Metric::NoncohUb,
        Metric::PartialLb,
        Metric::PartialUb,
        Metric::Universal,
        Metric::SecrecySu,
        Metric::SecrecyMu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ergodic => "ergodic",
            Metric::NoncohLb => "noncoh_lb",
            Metric::NoncohUb => "noncoh_ub",
            Metric::PartialLb => "partial_lb",
            Metric::PartialUb => "partial_ub",
            Metric::Universal => "universal",
            Metric::SecrecySu => "secrecy_su",
            Metric::SecrecyMu => "secrecy_mu",
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub run: RunSettings,
}

fn whole(v: f64, field: &str) -> Result<usize, ConfigError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(ConfigError::new(None, field, format!("{v} is not a non-negative integer")))
    }
}

impl SweepSpec {
    /// The configuration at one axis value.
    pub fn point(&self, v: f64) -> Result<SystemConfig, ConfigError> {
        let b = self.base.to_builder();
        let b = match self.axis {
            SweepAxis::SnrEDb => b.snr_e_db(v),
            SweepAxis::TGamma => {
                let t = v * self.base.m() as f64;
                let rounded = t.round();
                if (t - rounded).abs() > 1e-9 * t.abs().max(1.0) || rounded < 1.0 {
                    return Err(ConfigError::new(
                        None,
                        "axis_values",
                        format!("T_gamma = {v} gives a non-integer T = {t}"),
                    ));
                }
                b.t(rounded as usize)
            }
            SweepAxis::NE => b.n_e(whole(v, "axis_values")?),
            SweepAxis::NJ => b.n_j(whole(v, "axis_values")?),
        };
        b.build()
            .map_err(|e| ConfigError::new(None, "axis_values", format!("{} = {v}: {e}", self.axis.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = "\
# comment line
M = 64
K = 16
N_E = 64   # trailing comment
N_J = 48
alpha2 = 1
snr_e_db = 30
sweep_axis = T_gamma
axis_values = 1, 2, 3
metrics = noncoh_lb, noncoh_ub
trials = 100
seed = 7
";

    #[test]
    fn parses_sweep() {
        let raw = RawConfig::parse(SWEEP).unwrap();
        let spec = raw.sweep_spec(None).unwrap();
        assert_eq!(spec.axis, SweepAxis::TGamma);
        assert_eq!(spec.axis_values, vec![1.0, 2.0, 3.0]);
        assert_eq!(spec.metrics, vec![Metric::NoncohLb, Metric::NoncohUb]);
        assert_eq!(spec.run.trials, 100);
        assert_eq!(spec.run.trials_source, TrialsSource::File);
        assert_eq!(spec.point(3.0).unwrap().t(), 192);
    }

    #[test]
    fn reports_line_and_field() {
        let err = RawConfig::parse("M = 64\nK = x\n").unwrap().system_config(Some(1)).unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.field, "K");
        let err = RawConfig::parse("M = 64\nbogus = 1\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (Some(2), "bogus"));
        let err = RawConfig::parse("M = 64\nM = 65\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = RawConfig::parse("just words\n").unwrap_err();
        assert_eq!(err.line, Some(1));
    }

    #[test]
    fn overrides_win() {
        let mut raw = RawConfig::parse(SWEEP).unwrap();
        raw.set_pair("N_J=24").unwrap();
        raw.set("trials", "50").unwrap();
        let spec = raw.sweep_spec(Some("9999")).unwrap();
        assert_eq!(spec.base.n_j(), 24);
        assert_eq!(spec.base.beta2(), 2.0);
        assert_eq!(spec.run.trials, 50);
        assert_eq!(spec.run.trials_source, TrialsSource::CommandLine);
        assert!(raw.set("nope", "1").is_err());
    }

    #[test]
    fn environment_trials() {
        let text = SWEEP.replace("trials = 100\n", "");
        let raw = RawConfig::parse(&text).unwrap();
        let run = raw.run_settings(Some("321"), 5).unwrap();
        assert_eq!((run.trials, run.trials_source), (321, TrialsSource::Environment));
        let run = raw.run_settings(None, 5).unwrap();
        assert_eq!((run.trials, run.trials_source), (5, TrialsSource::Default));
        let err = raw.run_settings(Some("many"), 5).unwrap_err();
        assert_eq!(err.field, ENV_TRIALS);
    }

    #[test]
    fn axis_checks() {
        let bad = SWEEP.replace("1, 2, 3", "2, 1");
        let err = RawConfig::parse(&bad).unwrap().sweep_spec(None).unwrap_err();
        assert_eq!((err.field.as_str(), err.line), ("axis_values", Some(9)));
        let frac = SWEEP.replace("1, 2, 3", "1.01");
        assert!(RawConfig::parse(&frac).unwrap().sweep_spec(None).is_err());
        let nj = SWEEP
            .replace("T_gamma", "N_J")
            .replace("1, 2, 3", "10, 49")
            .replace("snr_e_db = 30", "T = 128");
        let err = RawConfig::parse(&nj).unwrap().sweep_spec(None).unwrap_err();
        assert_eq!(err.field, "axis_values");
    }

    #[test]
    fn missing_pieces() {
        let no_metrics = SWEEP.replace("metrics = noncoh_lb, noncoh_ub\n", "");
        let err = RawConfig::parse(&no_metrics).unwrap().sweep_spec(None).unwrap_err();
        assert_eq!(err.field, "metrics");
        let no_t = "M = 8\nK = 2\nN_E = 2\nN_J = 2\n";
        let err = RawConfig::parse(no_t).unwrap().system_config(None).unwrap_err();
        assert_eq!(err.field, "T");
        let unknown = SWEEP.replace("noncoh_lb", "entropy");
        assert!(RawConfig::parse(&unknown).unwrap().sweep_spec(None).is_err());
    }

    #[test]
    fn display() {
        let e = ConfigError::new(Some(3), "T", "missing");
        assert_eq!(e.to_string(), "line 3, field `T`: missing");
        let e = ConfigError::new(None, "T", "missing");
        assert_eq!(e.to_string(), "field `T`: missing");
    }
}
