use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn latwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latwalk"))
        .args(args)
        .env("LATWALK_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
name = "cli_two_slit"
model = "Mstar"
n_p = 400
n_t = 60
seed = 9

[source]
kind = "two_slit"
d = 1
"#;

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn repeated_runs_write_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = latwalk(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("visibility = "));
    }
    let (fa, fb) = (files(&a), files(&b));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["momentum.csv", "positions.csv", "summary.txt"]);
    assert_eq!(fa, fb);
}

#[test]
fn overrides_change_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let dir = tmp.path().join("o");
    let o = latwalk(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--np",
        "100",
        "--model",
        "Mstarstar",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("seed = 3") && s.contains("n_p = 100"), "{s}");
}

#[test]
fn validate_reports_name_and_hash() {
    let o = latwalk(&["validate", "two_slit"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.starts_with("two_slit: ok ("), "{s}");
}

#[test]
fn every_bundled_scenario_validates() {
    let o = latwalk(&["list-scenarios"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert!(names.len() >= 10);
    for n in ["free_single", "two_slit", "chsh", "delta_single"] {
        assert!(names.iter().any(|m| m == n), "{n} missing");
    }
    for n in &names {
        let o = latwalk(&["validate", n]);
        assert!(o.status.success(), "{n}: {}", stderr(&o));
    }
}

#[test]
fn bad_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, SMALL.replace("n_t = 60", "n_t = -4")).unwrap();
    let o = latwalk(&["validate", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("n_t"), "{}", stderr(&o));

    fs::write(&cfg, SMALL.replace("d = 1", "d = 1\nspin = 2")).unwrap();
    let o = latwalk(&["validate", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("spin"), "{}", stderr(&o));

    let o = latwalk(&["validate", "no_such_scenario"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no such file or bundled scenario"));
}

#[test]
fn print_theory_emits_a_normalized_table() {
    let o = latwalk(&["print-theory", "free_single", "--nt", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("node,theory"));
    let rows: Vec<(i64, f64)> = lines
        .map(|l| {
            let (x, p) = l.split_once(',').unwrap();
            (x.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 41);
    let mass: f64 = rows.iter().map(|(_, p)| p).sum();
    assert!((mass - 1.0).abs() < 1e-9);

    let o = latwalk(&["print-theory", "chsh"]);
    assert!(!o.status.success());
}
