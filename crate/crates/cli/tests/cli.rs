use std::process::{Command, Output};

fn tfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfk")).args(args).output().expect("spawn tfk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn frechet_prints_one_row_per_solver() {
    let o = tfk(&["--threads", "1", "frechet", "--n", "4", "--p", "3", "--solver", "bcirc,dft", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "solver,status,time_s,speedup_pct,op_count,iterations,rel_error");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("bcirc,ok,"));
    assert!(lines[2].starts_with("dft,ok,"));
    let err: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(err <= 1e-12);
}

#[test]
fn frechet_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = tfk(&["frechet", "--n", "4", "--p", "2", "--solver", "lowrank", "--reps", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("lowrank,ok,"));
}

#[test]
fn cond_reports_three_methods() {
    let o = tfk(&["cond", "--n", "2", "--p", "3", "--fn", "poly:0,1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,status,time_s,calls,time_per_call_s,estimate,accuracy"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["power", "kron_efficient", "kron_full"]);
    assert_eq!(rows[1][3], "4");
    assert_eq!(rows[2][3], "12");
    // The identity map has condition number 1; the transform round trips leave only rounding.
    for r in &rows {
        assert!(r[6].parse::<f64>().unwrap() <= 1e-14, "{r:?}");
    }
}

#[test]
fn gen_and_nucmin_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.t3json");
    let o = tfk(&["gen", "--kind", "random", "--n", "3", "--p", "2", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = tfk(&["nucmin", "--input", path.to_str().unwrap(), "--steps", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# tensor n=3 m=3 p=2"));
    assert_eq!(lines.next(), Some("step,nuclear_norm,step_size,grad_norm"));
    let norms: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(norms.len() >= 2);
    assert!(norms.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn nucmin_generated_seed_one_decreases() {
    let o = tfk(&["nucmin", "--n", "3", "--p", "4", "--steps", "10", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let norms: Vec<f64> = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn gen_conv_diff_writes_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cd.t3json");
    let o = tfk(&["gen", "--kind", "conv-diff", "--n", "9", "--p", "2", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"n\":9") || text.contains("\"n\": 9"));
}

#[test]
fn help_succeeds() {
    let o = tfk(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("frechet"));
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    for args in [
        vec!["gen", "--kind", "conv-diff", "--n", "8", "--p", "2", "--out", "/tmp/never.t3json"],
        vec!["frechet", "--n", "4", "--p", "2", "--fn", "nope"],
        vec!["frechet", "--n", "4", "--p", "2", "--solver", "magic"],
        vec!["nucmin", "--input", "/nonexistent/a.t3json"],
        vec!["nucmin", "--steps", "3"],
        vec!["frechet", "--reps", "0", "--n", "4", "--p", "2"],
        vec!["frechet", "--bogus"],
        vec!["gen", "--kind", "conv-diff"],
    ] {
        let o = tfk(&args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("tfk: error: "), "{err}");
    }
}
