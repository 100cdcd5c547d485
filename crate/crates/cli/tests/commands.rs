use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holder(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holder")).args(args).arg("--out").arg(out).output().unwrap()
}

fn run_ok(args: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = holder(args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn first_line(dir: &Path) -> String {
    read(dir, "report.txt").lines().next().unwrap_or_default().to_string()
}

fn data_rows(text: &str) -> usize {
    text.lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn divergence_reports_nonnegative_values() {
    let d = run_ok(&["divergence", "--set", "family=pseudospherical", "--set", "gamma=0.1,0.5,1", "--set", "p.theta=0,1", "--set", "q.theta=1,2"]);
    let csv = read(d.path(), "results.csv");
    assert!(csv.starts_with("family,gamma,s_fg,s_ff,divergence\n"));
    assert_eq!(data_rows(&csv), 3);
    for row in csv.lines().skip(1) {
        let d: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(d > 0.0, "{row}");
    }
    assert_eq!(first_line(d.path()), "PASS");
}

#[test]
fn score_expected_and_empirical() {
    let d = run_ok(&["score", "--set", "p.theta=0,1", "--set", "q.theta=0.5,1"]);
    assert!(read(d.path(), "results.csv").contains(",expected,"));
    let d = run_ok(&["score", "--set", "n=200", "--set", "theta=0,1", "--set", "q.theta=0,1"]);
    assert!(read(d.path(), "results.csv").contains(",empirical,"));
}

#[test]
fn fit_writes_estimate_and_trace() {
    let d = run_ok(&["fit", "--seed", "3", "--set", "family=gamma", "--set", "n=2000", "--set", "theta=1,2", "--set", "trace=true"]);
    let csv = read(d.path(), "results.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "theta1,theta2,objective,iters,converged");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (m, s): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
    assert!((m - 1.0).abs() < 0.2 && (s - 2.0).abs() < 0.2, "{row:?}");
    assert_eq!(row[4], "true");
    assert!(read(d.path(), "trace.csv").starts_with("iteration,objective,theta1,theta2\n"));
}

#[test]
fn regress_recovers_slope() {
    let d = run_ok(&["regress", "--seed", "4", "--set", "n=400", "--set", "theta=2,-1,0.5", "--set", "kappa=1"]);
    let csv = read(d.path(), "results.csv");
    let a: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((a - 2.0).abs() < 0.1, "{csv}");
}

#[test]
fn invariance_passes_for_a_rotation() {
    let d = run_ok(&[
        "invariance",
        "--set", "model=gaussian-full-d", "--set", "model.dim=2",
        "--set", "p.theta=0,0,1,0,1", "--set", "q.theta=0.5,-0.3,1.2,0.3,0.9",
        "--set", "family=holder", "--set", "phi=kappa:1.5", "--set", "gamma=0.5",
        "--set", "affine=sigma=0.6,-0.8,0.8,0.6; mu=0.2,0.1",
    ]);
    assert_eq!(first_line(d.path()), "PASS", "{}", read(d.path(), "report.txt"));
}

#[test]
fn influence_sweep_has_fifty_rows() {
    let d = run_ok(&["sweep", "--set", "sweep=influence", "--set", "z.points=50", "--set", "phi=kappa:1"]);
    assert_eq!(data_rows(&read(d.path(), "plotdata_if_norm.csv")), 50);
}

#[test]
fn gamma_and_contamination_sweeps_write_plot_data() {
    let d = run_ok(&["sweep", "--set", "sweep=gamma", "--set", "p.theta=0,1", "--set", "q.theta=1,1"]);
    let names: Vec<String> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().any(|n| n.starts_with("plotdata_divergence_vs_gamma")), "{names:?}");
    let d = run_ok(&["sweep", "--seed", "2", "--set", "sweep=contamination", "--set", "n=300"]);
    let names: Vec<String> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().filter(|n| n.starts_with("plotdata_contamination")).count() >= 2, "{names:?}");
}

#[test]
fn redescend_verdicts() {
    let d = run_ok(&["redescend", "--set", "gamma=0.5", "--set", "kappa=1", "--set", "theta=0,1"]);
    assert_eq!(first_line(d.path()), "PASS");
    let d = run_ok(&["redescend", "--set", "gamma=0.5", "--set", "kappa=1.5", "--set", "theta=0,1"]);
    assert_eq!(first_line(d.path()), "FAIL");
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# divergence run\nfamily = density-power\ngamma = 0.5\np.theta = 0,1\nq.theta = 2,1\n").unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_holder"))
        .args(["divergence", "--config"])
        .arg(&cfg)
        .args(["--set", "gamma=1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out, "results.csv").contains("density-power,1,"));
}

#[test]
fn seeds_change_outputs_and_repeat_exactly() {
    let args = |seed: &'static str| vec!["fit", "--seed", seed, "--set", "n=200", "--set", "theta=0,1"];
    let a = run_ok(&args("1"));
    let b = run_ok(&args("1"));
    let c = run_ok(&args("2"));
    assert_eq!(fs::read(a.path().join("results.csv")).unwrap(), fs::read(b.path().join("results.csv")).unwrap());
    assert_ne!(fs::read(a.path().join("results.csv")).unwrap(), fs::read(c.path().join("results.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| holder(args, dir.path()).status.code();
    assert_eq!(code(&["bogus"]), Some(64));
    assert_eq!(code(&["fit", "--set", "family=nope"]), Some(2));
    assert_eq!(code(&["fit", "--set", "gamma=-1"]), Some(2));
    assert_eq!(code(&["fit", "--set", "n=500", "--set", "max_iters=2"]), Some(3));
    assert_eq!(code(&["regress", "--set", "family=gamma", "--set", "theta=1,0,1"]), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_holder")).output().unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn non_converged_fit_still_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = holder(&["fit", "--set", "n=500", "--set", "max_iters=2"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(read(dir.path(), "results.csv").lines().nth(1).unwrap().ends_with(",false"));
    assert_eq!(first_line(dir.path()), "FAIL");
}
