use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anam::config::{RawConfig, DEFAULT_CHANNEL_TRIALS, DEFAULT_CONSTANT_TRIALS, ENV_TRIALS};
use anam::runner::RayonRunner;
use anam::sweep::{format_sig9, run_sweep, Family, PointEvaluator};
use anam::validate::{run_validation, ValidationOptions};
use anam_core::bounds::LeakageBounds;
use anam_core::montecarlo::Estimator;
use anam_core::planner::{coherence_symbols, required_antennas, DeploymentParams, DEFAULT_SYMBOL_DURATION_S};

/// Leakage bounds and secrecy rates for artificial-noise massive MIMO.
#[derive(Parser)]
#[command(name = "anam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate metrics along one axis and write CSV.
    Sweep {
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate every metric at the configured point.
    Bounds {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Coherence time and the antenna count for a zero-DoF eavesdropper.
    Plan {
        #[arg(long)]
        carrier_hz: f64,
        #[arg(long)]
        speed_mps: f64,
        #[arg(long, default_value_t = DEFAULT_SYMBOL_DURATION_S)]
        symbol_duration_s: f64,
    },
    /// Run the self-validation suite.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_digamma_bias: f64,
    },
}

#[derive(Args)]
struct Overrides {
    /// Override a config key, e.g. `--set N_J=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Validation,
    Config(String),
}

fn env_trials() -> Option<String> {
    std::env::var(ENV_TRIALS).ok()
}

fn load(path: &Path, o: &Overrides) -> Result<RawConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut raw = RawConfig::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let cfg_err = |e: anam::config::ConfigError| Failure::Config(e.to_string());
    for pair in &o.set {
        raw.set_pair(pair).map_err(cfg_err)?;
    }
    if let Some(n) = o.trials {
        raw.set("trials", &n.to_string()).map_err(cfg_err)?;
    }
    if let Some(s) = o.seed {
        raw.set("seed", &s.to_string()).map_err(cfg_err)?;
    }
    if let Some(w) = o.workers {
        raw.set("workers", &w.to_string()).map_err(cfg_err)?;
    }
    Ok(raw)
}

fn runner(workers: usize) -> Result<RayonRunner, Failure> {
    RayonRunner::new(workers).map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn sweep(config: &Path, output: Option<&Path>, o: &Overrides) -> Result<(), Failure> {
    let raw = load(config, o)?;
    let spec = raw
        .sweep_spec(env_trials().as_deref())
        .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
    eprintln!(
        "anam sweep: trials = {} ({}), seed = {}, workers = {}",
        spec.run.trials, spec.run.trials_source, spec.run.seed, spec.run.workers
    );
    let res = run_sweep(&spec, runner(spec.run.workers)?).map_err(|e| Failure::Config(e.to_string()))?;
    let csv = res.to_csv();
    match output {
        Some(p) => std::fs::write(p, csv).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn bounds_line(name: &str, b: &Result<LeakageBounds, anam_core::Error>) -> String {
    match b {
        Ok(b) => format!(
            "{name}: dof {}, c_lower {}, c_upper {}, std_error {}",
            format_sig9(b.dof),
            format_sig9(b.c_lower),
            format_sig9(b.c_upper),
            format_sig9(b.std_error)
        ),
        Err(e) => format!("{name}: unavailable ({e})"),
    }
}

fn bounds(config: &Path, o: &Overrides) -> Result<(), Failure> {
    let raw = load(config, o)?;
    let at = |e: anam::config::ConfigError| Failure::Config(format!("{}: {e}", config.display()));
    let cfg = raw.system_config(None).map_err(at)?;
    let run = raw
        .run_settings(env_trials().as_deref(), DEFAULT_CONSTANT_TRIALS)
        .map_err(at)?;
    let est = Estimator::new(runner(run.workers)?, run.trials, run.seed).map_err(|e| Failure::Config(e.to_string()))?;
    let mut eval = PointEvaluator::new(&est, &run);

    println!(
        "# M = {}, K = {}, N_E = {}, N_J = {}, T = {}, alpha2 = {}, beta2 = {}, snr_e_db = {}, snr_l_db = {}",
        cfg.m(),
        cfg.k(),
        cfg.n_e(),
        cfg.n_j(),
        cfg.t(),
        format_sig9(cfg.alpha2()),
        format_sig9(cfg.beta2()),
        format_sig9(cfg.snr_e_db()),
        format_sig9(cfg.snr_l_db())
    );
    println!("# trials = {} ({}), seed = {}", run.trials, run.trials_source, run.seed);
    let m = cfg.leakage_model();
    println!("# {}", bounds_line("noncoherent", &eval.bounds(Family::NonCoherent, &m)));
    println!("# {}", bounds_line("partial", &eval.bounds(Family::Partial, &m)));
    println!("metric,value,std_error,reason");
    for metric in anam::config::Metric::ALL {
        match eval.metric(&cfg, metric) {
            Ok((v, se)) => println!("{},{},{},", metric.name(), format_sig9(v), format_sig9(se)),
            Err(reason) => println!("{},,,{reason}", metric.name()),
        }
    }
    Ok(())
}

fn plan(carrier_hz: f64, speed_mps: f64, symbol_duration_s: f64) -> Result<(), Failure> {
    let p = DeploymentParams::with_symbol_duration(carrier_hz, speed_mps, symbol_duration_s)
        .map_err(|e| Failure::Config(e.to_string()))?;
    println!("doppler_hz = {}", format_sig9(p.doppler_hz()));
    println!("coherence_symbols = {}", format_sig9(coherence_symbols(&p)));
    println!("required_antennas = {}", required_antennas(&p));
    Ok(())
}

fn validate(seed: u64, trials: Option<usize>, workers: usize, bias: f64) -> Result<(), Failure> {
    let mut raw = RawConfig::default();
    if let Some(n) = trials {
        raw.set("trials", &n.to_string()).map_err(|e| Failure::Config(e.to_string()))?;
    }
    let run = raw
        .run_settings(env_trials().as_deref(), DEFAULT_CHANNEL_TRIALS)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let opts = ValidationOptions {
        seed,
        trials: run.trials,
        workers,
        digamma_bias: bias,
    };
    let report = run_validation(&opts).map_err(|e| Failure::Config(e.to_string()))?;
    println!("# anam validate: seed = {seed}, trials = {} ({})", run.trials, run.trials_source);
    print!("{}", report.to_text());
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep {
            config,
            output,
            overrides,
        } => sweep(config, output.as_deref(), overrides),
        Command::Bounds { config, overrides } => bounds(config, overrides),
        Command::Plan {
            carrier_hz,
            speed_mps,
            symbol_duration_s,
        } => plan(*carrier_hz, *speed_mps, *symbol_duration_s),
        Command::Validate {
            seed,
            trials,
            workers,
            inject_digamma_bias,
        } => validate(*seed, *trials, *workers, *inject_digamma_bias),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("anam: {msg}");
            ExitCode::from(2)
        }
    }
}
