use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weiltrace"));
    c.env_remove("WEILTRACE_DATA_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weiltrace-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_local_default_and_extra_prime() {
    let o = run(&["verify-local"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("<P,1_O> = -1 ln 2"), "{text}");
    assert!(text.contains("verify-local: PASS"));
    assert!(!text.contains("p =  13"));
    let text = stdout(&run(&["verify-local", "--p", "13"]));
    assert!(text.contains("p =  13  <P,1_O> = -1/12 ln 13"), "{text}");
}

#[test]
fn zero_tolerance_is_a_configuration_error() {
    assert_eq!(run(&["verify-local", "--tolerance", "0"]).status.code(), Some(3));
    assert_eq!(run(&["verify-local", "--p", "12"]).status.code(), Some(3));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(3));
}

#[test]
fn verify_explicit_passes_and_emits_plot_data() {
    let dir = scratch("explicit");
    let csv = dir.join("curve.csv");
    let json_a = dir.join("a.json");
    let json_b = dir.join("b.json");
    let args = ["verify-explicit", "--u0", "2", "--sigma", "0.2", "--zeros", "100", "--xmax", "10000", "--tol", "1e-6"];
    let o = bin().args(args).args(["--emit-csv", p(&csv), "--emit-json", p(&json_a)]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verify-explicit: PASS"));

    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["zero_count", "ordinate", "zero_term", "spectral_side", "residual"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 101);
    let last: f64 = rows[100][4].parse().unwrap();
    assert!(last < 1e-6);

    bin().args(args).args(["--emit-json", p(&json_b)]).output().unwrap();
    let a = std::fs::read(&json_a).unwrap();
    assert_eq!(a, std::fs::read(&json_b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["parallel"], false);
    assert!(v["report"]["result"]["geometric"]["prime_tail_bound"].as_f64().unwrap() < 1e-8);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn numerical_failure_exits_two() {
    // a prime cutoff far too small for the profile
    let o = run(&["verify-explicit", "--xmax", "20"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify-explicit", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pnt_prints_pi_of_a_million() {
    let o = run(&["pnt", "--x", "1000000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("pi(1000000) = 78498"), "{text}");
    assert!(text.contains("1.084490"));
}

#[test]
fn zeros_round_trip_and_integrity() {
    let dir = scratch("zeros");
    let file = dir.join("zeros.txt");
    assert_eq!(run(&["zeros", "--count", "10", "--out", p(&file)]).status.code(), Some(0));
    let o = run(&["zeros", "--check", p(&file)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));

    std::fs::write(&file, "14.134725\n13.0\n").unwrap();
    assert_eq!(run(&["zeros", "--check", p(&file)]).status.code(), Some(4));
    std::fs::write(&file, "14.134725\n21.5\n").unwrap();
    assert_eq!(run(&["zeros", "--check", p(&file)]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn data_directory_comes_from_the_environment() {
    let dir = scratch("data");
    std::fs::write(dir.join("zeros_ref.txt"), "25.0\n14.0\n").unwrap();
    let o = bin().env("WEILTRACE_DATA_DIR", &dir).args(["verify-explicit"]).output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_sits_below_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# explicit formula run\nsigma = 5\nzeros = 100\ntol = 1e-6\n").unwrap();
    // sigma from the file makes the prime tail hopeless; the flag restores the default profile
    assert_eq!(run(&["verify-explicit", "--config", p(&cfg)]).status.code(), Some(2));
    assert_eq!(run(&["verify-explicit", "--config", p(&cfg), "--sigma", "0.2"]).status.code(), Some(0));
    std::fs::write(&cfg, "tol = 0\n").unwrap();
    assert_eq!(run(&["poisson", "--config", p(&cfg)]).status.code(), Some(3));
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(run(&["poisson", "--config", p(&cfg)]).status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn trace_and_poisson_commands() {
    let o = run(&["verify-trace", "--u0", "1.5", "--sigma", "0.4", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("S = {inf,2}"));
    assert_eq!(run(&["verify-trace", "--n", "1000"]).status.code(), Some(3));
    let o = run(&["poisson", "--x", "1.7", "--coeffs", "1,0,0,0,0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
