use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spreadlab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_defaults_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--out", "sim"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = data_rows(&dir.path().join("sim/summary.csv"));
    let mean: f64 = summary[0][3].parse().unwrap();
    assert!(mean.is_finite() && mean >= 1.0);
    assert_eq!(summary[0][10], "false");
    assert!(dir.path().join("sim/trajectory.csv").exists());
    assert!(stderr(&o).contains("effective configuration (flags > file > defaults)"));
}

#[test]
fn divergent_run_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--alpha", "0.9", "--mechanism", "nonuniform"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("divergence"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--config", "absent.ini", "simulate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read config file"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.ini"),
        "seed = 9\n[simulate]\nsteps = 3000\nwarmup = 300\npi = 0.25\n[ingest]\ntick-size = 0.05\n",
    )
    .unwrap();
    let o = run_in(dir.path(), &["--config", "exp.ini", "simulate", "--pi", "0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("pi = 0.3 (flag)"));
    assert!(err.contains("steps = 3000 (file)"));
    assert!(err.contains("seed = 9 (file)"));
    assert!(err.contains("k = 3 (default)"));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.contains("# pi=0.3\n") && traj.contains("# seed=9\n") && traj.contains("# steps=3000\n"));

    fs::write(dir.path().join("typo.ini"), "[simulate]\nstep = 10\n").unwrap();
    let o = run_in(dir.path(), &["--config", "typo.ini", "simulate"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown config keys"));
}

#[test]
fn invalid_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--pi", "1.5"][..],
        &["simulate", "--initial-depth", "0"],
        &["simulate", "--mechanism", "nonuniform", "--alpha", "1.2"],
        &["parity-sweep", "--means", "1.0,2"],
    ] {
        let o = run_in(dir.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

/// Expected odd fraction for a shifted geometric spread of the given mean.
fn geometric_oracle(mean: f64, alpha: Option<f64>) -> f64 {
    let p = 1.0 / mean;
    let odd_prob = |s: u64| -> f64 {
        if s == 2 {
            return 1.0;
        }
        match (alpha, s % 2) {
            (None, 1) => 0.5,
            (None, _) => s as f64 / (2.0 * (s as f64 - 1.0)),
            (Some(a), 1) => (1.0 - a) * (s as f64 - 1.0) / (2.0 * (s as f64 - 2.0)),
            (Some(a), _) => a + (1.0 - a) / 2.0,
        }
    };
    let (mut num, mut den) = (0.0, 0.0);
    for s in 2..5000u64 {
        let w = (1.0 - p).powi(s as i32 - 1) * p;
        num += w * odd_prob(s);
        den += w;
    }
    num / den
}

#[test]
fn parity_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["parity-sweep", "--means", "2,4,8", "--samples", "1000000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("parity_sweep.csv"));
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let mean: f64 = row[0].parse().unwrap();
        let alpha = (row[1] == "nonuniform").then(|| row[2].parse::<f64>().unwrap());
        let f: f64 = row[3].parse().unwrap();
        let n: f64 = row[4].parse().unwrap();
        let expected = geometric_oracle(mean, alpha);
        let sigma = (expected * (1.0 - expected) / n).sqrt();
        assert!((f - expected).abs() < 3.0 * sigma, "{row:?} vs {expected}");
    }
    let uniform8: f64 = rows[4][3].parse().unwrap();
    assert!(uniform8 > 0.5);
}

#[test]
fn analyze_simulated_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--mechanism", "nonuniform", "--alpha", "0.7", "--out", "sim"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run_in(dir.path(), &["analyze", "--input", "sim/trajectory.csv", "--all", "--out", "an"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut files: Vec<String> = fs::read_dir(dir.path().join("an"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        ["acf.csv", "alpha.csv", "conditional_parity.csv", "delta_s.csv", "odd_fraction.csv", "relaxation.csv"]
    );
    let alpha = data_rows(&dir.path().join("an/alpha.csv"));
    let pooled = alpha.iter().find(|r| r[0] == "all").unwrap();
    let (a, sigma): (f64, f64) = (pooled[2].parse().unwrap(), pooled[3].parse().unwrap());
    assert!((a - 0.7).abs() < 3.0 * sigma, "{pooled:?}");
    let text = fs::read_to_string(dir.path().join("an/alpha.csv")).unwrap();
    assert!(text.starts_with("# estimator=alpha_estimate events="));
}

#[test]
fn analyze_reports_missing_conditioning_events() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ev.csv"), "t,s_pre,s_post,kind\n0,3,2,limit\n1,2,3,market\n2,3,1,limit\n").unwrap();
    let o = run_in(dir.path(), &["analyze", "--input", "ev.csv", "--relaxation", "--relax-delta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no conditioning events with spread change 2"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["analyze", "--input", "ev.csv"]);
    assert!(stderr(&o).contains("no estimator selected"));
    let o = run_in(dir.path(), &["analyze", "--input", "ev.csv", "--acf"]);
    assert!(stderr(&o).contains("needs a `mid` column"));
}

#[test]
fn ingest_matches_golden_file() {
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        fs::copy(fixture("tape.csv"), dir.path().join("tape.csv")).unwrap();
        let o = run_in(dir.path(), &["ingest", "--input", "tape.csv", "--with-mid"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let got = fs::read(dir.path().join("events.csv")).unwrap();
        assert_eq!(got, fs::read(fixture("tape_events.golden.csv")).unwrap());
    }
}

#[test]
fn ingest_off_grid_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("offgrid.csv");
    let o = run_in(dir.path(), &["ingest", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3: price 10.005 is off the tick grid"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["ingest", "--input", input.to_str().unwrap(), "--lenient"]);
    // one quote left after skipping the off-grid row: too few to classify
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("need at least two quotes"));
}

#[test]
fn engine_quote_tape_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--steps", "50000", "--warmup", "5000", "--quote-tape"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run_in(dir.path(), &["ingest", "--input", "quotes.csv", "--out", "ing"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = data_rows(&dir.path().join("trajectory.csv"));
    let events = data_rows(&dir.path().join("ing/events.csv"));
    let changed: Vec<&Vec<String>> = traj.iter().filter(|r| r[3] != r[4]).collect();
    assert_eq!(changed.len(), events.len());
    let mut mislabelled = 0;
    for (r, e) in changed.iter().zip(&events) {
        let t: u64 = r[0].parse().unwrap();
        assert_eq!(e[0], (t + 1).to_string());
        match r[1].as_str() {
            "cancel" => {
                assert_eq!(e[3], "market");
                mislabelled += 1;
            }
            kind => assert_eq!(e[3], kind),
        }
    }
    let summary = data_rows(&dir.path().join("summary.csv"));
    assert_eq!(summary[0][6], mislabelled.to_string());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["--seed", "77", "simulate", "--mechanism", "nonuniform", "--steps", "100000", "--warmup", "10000", "--replicas", "3", "--quote-tape", "--out", out]
    };
    assert!(run_in(dir.path(), &args("a")).status.success());
    assert!(run_in(dir.path(), &args("b")).status.success());
    for name in ["summary.csv", "trajectory_0.csv", "trajectory_2.csv", "quotes_1.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
    let sweep = |out: &'static str, threads: &'static str| {
        let o = run_in(dir.path(), &["parity-sweep", "--samples", "50000", "--threads", threads, "--out", out]);
        assert!(o.status.success());
        fs::read(dir.path().join(out).join("parity_sweep.csv")).unwrap()
    };
    assert_eq!(sweep("s1", "1"), sweep("s4", "4"));
}
