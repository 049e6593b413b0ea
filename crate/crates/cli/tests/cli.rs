use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "scheme,estimator,U,M,Mp,Tc,KriceDb,EsN0Db,blocks,symbols,symbolErrors,ser,serCi95,bits,bitErrors,ber,seed,configDigest";

const SMALL: &str = r#"
uavs = 2
scheme = "apf"
estimator = "cyclic-delay"

[apf]
order = 4
pole_modulus = 0.7
taps = 12

[sweep]
esn0_db = [5.0, 15.0]
blocks_per_point = 40
min_symbol_errors = 0
master_seed = 7
"#;

fn apfrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apfrelay")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SMALL);
    let out = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let o = apfrelay(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--plot", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("apf,cyclic-delay,2,4,0.7,12,20.0,5.0,40,"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SMALL);
    let mut files = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("w{w}.csv"));
        let o = apfrelay(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", w]);
        assert!(o.status.success());
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let bad = [
        ("unknown.toml", format!("{SMALL}\nextra_key = 1\n")),
        ("cyclic.toml", SMALL.replace("\"apf\"", "\"phase-dither\"")),
        ("taps.toml", SMALL.replace("taps = 12", "taps = 60")),
        ("modulus.toml", SMALL.replace("pole_modulus = 0.7", "pole_modulus = 1.2")),
    ];
    for (name, text) in bad {
        let cfg = write_config(dir.path(), name, &text);
        let o = apfrelay(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!out.exists());
}

#[test]
fn missing_config_is_an_io_failure() {
    let o = apfrelay(&["simulate", "--config", "/nonexistent/x.toml", "--out", "/tmp/never.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/x.toml"));
}

#[test]
fn pole_study_rows_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &SMALL.replace("blocks_per_point = 40", "blocks_per_point = 4"));
    let out = dir.path().join("p.csv");
    let o = apfrelay(&[
        "study", "poles", "--config", &cfg, "--out", out.to_str().unwrap(),
        "--moduli", "0.1,0.7", "--orders", "2", "--taps", "6,12", "--esn0", "30",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn flatness_report_prints_one_line_per_uav_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SMALL);
    let traces = dir.path().join("t.csv");
    let o = apfrelay(&[
        "report", "flatness", "--config", &cfg, "--uavs", "1,3", "--realizations", "10",
        "--traces", traces.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(&traces).unwrap().lines().count(), 1 + 2 * 128);
}

#[test]
fn awgn_report_matches_theory() {
    let o = apfrelay(&["report", "awgn", "--symbols", "100000"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for line in stdout.lines().skip(1) {
        let z: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(z.abs() < 3.0, "{line}");
    }
}
