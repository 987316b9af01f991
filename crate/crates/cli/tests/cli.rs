use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slowgrowth"));
    c.env_remove("SLOWGROWTH_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn catalog_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["catalog"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("log_power"));
    assert!(dir.path().join("catalog.toml").exists());
    assert!(dir.path().join("catalog.csv").exists());
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["analyze", "-f", "log_power(a=1)"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let fail = run(&["analyze", "-f", "aniso_power_sum(p=[1.1,2,2])"], dir.path());
    assert_eq!(fail.status.code(), Some(2), "{}", stdout(&fail));
    assert!(stdout(&fail).contains("FAIL"));
    let report = std::fs::read_to_string(dir.path().join("analyze.toml")).unwrap();
    assert!(report.contains("pass = false"));

    let bad = run(&["analyze", "-f", "no_such_thing(p=2)"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}

#[test]
fn usage_errors_exit_one() {
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["solve", "--n-grid", "many"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn print_config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["--print-config", "--seed", "9", "-f", "iterated_log(k=2)", "solve", "--n-grid", "24"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("seed = 9") && text.contains("n_grid = 24"), "{text}");

    let path = dir.path().join("run.toml");
    std::fs::write(&path, &text).unwrap();
    let again = bin().arg("--config").arg(&path).args(["--print-config", "solve"]).output().unwrap();
    assert_eq!(stdout(&again), text);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[solve]\nn_grd = 3\n").unwrap();
    let o = bin().arg("--config").arg(&path).arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["--config", "/nonexistent/run.toml", "catalog"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = bin().env("SLOWGROWTH_OUT", &target).arg("catalog").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("catalog.toml").exists());

    let flag = dir.path().join("from-flag");
    let o = bin().env("SLOWGROWTH_OUT", &target).arg("--out").arg(&flag).arg("catalog").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag.join("catalog.toml").exists());
}

#[test]
fn solve_writes_grid_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--n-grid", "32", "--scale", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["solve.toml", "solve_grid.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    for (args, files) in [
        (vec!["analyze", "-f", "aniso_power_sum(p=[1.3,1.8])", "--seed", "4"], vec!["analyze.toml", "analyze_bounds.csv"]),
        (vec!["lemmas"], vec!["lemmas.toml", "lemmas_g1g2.csv"]),
        (vec!["solve", "--n-grid", "24"], vec!["solve.toml", "solve_grid.txt"]),
    ] {
        run(&args, dir.path());
        let first: Vec<Vec<u8>> = files.iter().map(|f| read(f)).collect();
        run(&args, dir.path());
        let second: Vec<Vec<u8>> = files.iter().map(|f| read(f)).collect();
        assert!(first == second, "{args:?}");
    }
}
