use std::path::Path;
use std::process::{Command, Output};

fn c2mm(args: &[&str], dir: &Path, threads: Option<usize>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_c2mm"));
    c.args(args).current_dir(dir);
    if let Some(t) = threads {
        c.env("C2MM_THREADS", t.to_string());
    }
    c.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn multicritical_point() {
    let d = tempfile::tempdir().unwrap();
    let o = c2mm(&["phase", "--alpha", "-1", "--tau", "1"], d.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Multicritical"));
}

#[test]
fn bad_spec_names_the_invariant() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "bad.json",
        r#"{"nu":0,"tau":0.5,"n":3,"V":[0,1],"W":[0,0,-0.5]}"#,
    );
    let o = c2mm(&["biortho", "--spec", "bad.json"], d.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("W") && err.contains("strictly positive leading coefficient"),
        "{err}"
    );
}

#[test]
fn validation_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "s.json",
        r#"{"nu":0,"tau":0.8,"n":3,"V":[0,1],"W":[0,0,0.5]}"#,
    );
    write(d.path(), "c.json", r#"{"alpha": 2, "colour": 1}"#);
    for args in [
        &["phase", "--config", "c.json", "--tau", "1"][..],
        &["phase", "--alpha", "1", "--tau", "0"],
        &["phase", "--tau", "1"],
        &["kernel", "--spec", "s.json", "--precision", "half"],
        &["sample", "--spec", "s.json", "--mode", "gibbs"],
        &["kernel", "--spec", "missing.json"],
        &["phase-map", "--alpha-range", "2:1"],
        &["no-such-command"],
    ] {
        assert_eq!(
            c2mm(args, d.path(), None).status.code(),
            Some(2),
            "{args:?}"
        );
    }
    assert_eq!(
        c2mm(&["phase", "--alpha", "1", "--tau", "1"], d.path(), Some(0))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_values_sit_under_the_command_line() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"alpha": 2, "tau": 0.8}"#);
    let o = c2mm(&["phase", "--config", "c.json"], d.path(), None);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("I\n"));
    let o = c2mm(
        &["phase", "--config", "c.json", "--tau", "3", "--alpha", "1"],
        d.path(),
        None,
    );
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("II\n"));
}

#[test]
fn tolerance_failures_exit_three() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "s.json",
        r#"{"nu":0,"tau":0.8,"n":3,"V":[0,1],"W":[0,0,0.5]}"#,
    );
    let o = c2mm(
        &[
            "scaling", "--spec", "s.json", "--regime", "hard", "--tol", "1e-30",
        ],
        d.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kernel_density_csv() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "spec.json",
        r#"{"nu":0,"tau":0.8,"n":3,"V":[0,1],"W":[0,0,0.5]}"#,
    );
    let o = c2mm(
        &[
            "kernel",
            "--spec",
            "spec.json",
            "--density",
            "default",
            "--out",
            "d.csv",
            "--emit-plot",
            "d.svg",
        ],
        d.path(),
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(d.path().join("d.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,rho_n"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, r) = l.split_once(',').unwrap();
            (x.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    let h = rows[1].0 - rows[0].0;
    let mass: f64 = rows.iter().map(|r| r.1).sum::<f64>() * h;
    assert!((mass - 1.0).abs() < 2e-3, "{mass}");
    assert!(std::fs::read_to_string(d.path().join("d.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn csv_numbers_carry_seventeen_digits() {
    let d = tempfile::tempdir().unwrap();
    let o = c2mm(
        &["phase-map", "--alpha-steps", "3", "--tau-steps", "2"],
        d.path(),
        None,
    );
    let text = String::from_utf8(o.stdout).unwrap();
    let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first, "-4.0000000000000000e0");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "s.json",
        r#"{"nu":0,"tau":0.8,"n":3,"V":[0,1],"W":[0,0,0.5]}"#,
    );
    let run = |threads: usize, name: &str| {
        let o = c2mm(
            &[
                "sample",
                "--spec",
                "s.json",
                "--mode",
                "mcmc",
                "--count",
                "300",
                "--chains",
                "3",
                "--burn-in",
                "100",
                "--seed",
                "4",
                "--out",
                name,
            ],
            d.path(),
            Some(threads),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(d.path().join(name)).unwrap()
    };
    assert_eq!(run(1, "a.csv"), run(4, "b.csv"));
}

#[test]
fn gamma_and_gap_print_values() {
    let d = tempfile::tempdir().unwrap();
    let o = c2mm(&["gamma", "--alpha", "-1", "--tau", "1"], d.path(), None);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout).trim(),
        "1.0000000000000000e0"
    );
    write(
        d.path(),
        "lin.json",
        r#"{"nu":0,"tau":0.5,"n":2,"V":[0,1],"W":[0,1]}"#,
    );
    let o = c2mm(&["gap", "--spec", "lin.json", "--b", "0.2"], d.path(), None);
    let e0: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!(e0 > 0.0 && e0 < 1.0);
}
