use std::path::PathBuf;
use std::process::{Command, Output};

fn anam(args: &[&str], env_trials: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anam"));
    cmd.args(args);
    match env_trials {
        Some(v) => cmd.env("ANAM_TRIALS", v),
        None => cmd.env_remove("ANAM_TRIALS"),
    };
    cmd.output().unwrap()
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "\
M = 8
K = 2
N_E = 8
N_J = 4
alpha2 = 1
snr_e_db = 20
sweep_axis = T_gamma
axis_values = 0.5, 2
metrics = noncoh_lb, ergodic
seed = 3
";

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

#[test]
fn plan_prints_antenna_count() {
    let out = anam(&["plan", "--carrier-hz", "10e9", "--speed-mps", "1.3"], None);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("required_antennas = 135\n"));
}

#[test]
fn plan_rejects_zero_speed() {
    let out = anam(&["plan", "--carrier-hz", "10e9", "--speed-mps", "0"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_echoes_trials() {
    let cfg = write_config("cli_small.conf", SMALL);
    let out = anam(&["sweep", cfg.to_str().unwrap()], Some("64"));
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "axis,metric,value,std_error,reason");
    assert_eq!(lines[1], "0.5,noncoh_lb,,,precondition:T<Mbar");
    assert_eq!(lines.len(), 5);
    assert!(text(&out.stderr).contains("trials = 64 (ANAM_TRIALS)"));
}

#[test]
fn flags_override_file_and_environment() {
    let cfg = write_config("cli_override.conf", SMALL);
    let dest = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_override.csv");
    let out = anam(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--trials",
            "50",
            "--set",
            "N_J=2",
            "--output",
            dest.to_str().unwrap(),
        ],
        Some("64"),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(text(&out.stderr).contains("trials = 50 (command line)"));
    let csv = std::fs::read_to_string(&dest).unwrap();
    // with N_J = 2, T = 4 = K + N_J is no longer short
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..2], ["0.5", "noncoh_lb"]);
    assert!(!row[2].is_empty() && row[4].is_empty(), "{csv}");
}

#[test]
fn config_errors_exit_2_with_location() {
    let cfg = write_config("cli_bad.conf", &SMALL.replace("K = 2", "K = two"));
    let out = anam(&["sweep", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("line 2") && err.contains("`K`"), "{err}");

    let cfg = write_config("cli_unknown.conf", &format!("{SMALL}colour = blue\n"));
    let out = anam(&["sweep", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 11, field `colour`: unknown key"));

    let out = anam(&["sweep", "/nonexistent/anam.conf"], None);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config("cli_env.conf", SMALL);
    let out = anam(&["sweep", cfg.to_str().unwrap()], Some("lots"));
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("ANAM_TRIALS"));
}

#[test]
fn bounds_prints_every_metric() {
    let cfg = write_config("cli_bounds.conf", &SMALL.replace("sweep_axis", "T = 32\n#"));
    let out = anam(&["bounds", cfg.to_str().unwrap(), "--trials", "40"], None);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(s.contains("# trials = 40 (command line), seed = 3"));
    for m in [
        "ergodic", "noncoh_lb", "noncoh_ub", "partial_lb", "partial_ub", "universal", "secrecy_su", "secrecy_mu",
    ] {
        assert!(s.lines().any(|l| l.starts_with(&format!("{m},"))), "{m} missing:\n{s}");
    }
}

#[test]
fn validate_exit_codes_and_repeatability() {
    let ok = anam(&["validate", "--trials", "300", "--seed", "2"], None);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stdout));
    let again = anam(&["validate", "--trials", "300", "--seed", "2", "--workers", "3"], None);
    assert_eq!(ok.stdout, again.stdout);

    let broken = anam(&["validate", "--trials", "300", "--inject-digamma-bias", "0.1"], None);
    assert_eq!(broken.status.code(), Some(1));
    let report = text(&broken.stdout);
    assert!(report.contains("FAIL wishart"));
    assert_eq!(report.matches("FAIL").count(), 1, "{report}");
}
