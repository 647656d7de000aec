//! End-to-end runs of the `zmetrics` binary: outputs, exit codes and
//! determinism.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn zmetrics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zmetrics"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, n: usize) -> std::path::PathBuf {
    let file = dir.join("sim.csv");
    let o = zmetrics(&["simulate", "--n", &n.to_string(), "--out", path(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    file
}

#[test]
fn measure_spec_matches_golden() {
    let o = zmetrics(&["measure", "spec", path(&fixture("mini.zs"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(fixture("mini.expected.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn measure_code_matches_golden() {
    let files = ["inc_ctr.mil", "knots_interleaved.mil", "knots_nested.mil"].map(fixture);
    let mut args = vec!["measure", "code"];
    args.extend(files.iter().map(|f| path(f)));
    let o = zmetrics(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(fixture("code.expected.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn json_format_is_valid_json() {
    let o = zmetrics(&["--format", "json", "measure", "spec", path(&fixture("mini.zs"))]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_array());
}

#[test]
fn simulated_fit_reproduces_reference_formula() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 70);
    let model = dir.path().join("model.json");
    let o = zmetrics(&[
        "fit",
        path(&sim),
        "--target",
        "CL",
        "--predictors",
        "CC,USE,AND,OR",
        "--out",
        path(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("CL(M) = 3.099*CC - 1.237*USE + 2.557*AND - 41.735*OR - 9.873"),
        "{}",
        stderr(&o)
    );

    let o = zmetrics(&["predict", "--model", path(&model), path(&fixture("mini.zs"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "schema,CL");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(value.is_finite());
    }
}

#[test]
fn correlate_rejects_two_rows_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 70);
    let text = std::fs::read_to_string(&sim).unwrap();
    let short = dir.path().join("short.csv");
    std::fs::write(&short, text.lines().take(3).collect::<Vec<_>>().join("\n") + "\n").unwrap();
    let o = zmetrics(&["correlate", path(&short)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn correlate_emits_every_combination_deterministically() {
    let pairs = fixture("corpus/expected/pairs.csv");
    let first = zmetrics(&["correlate", path(&pairs)]);
    let second = zmetrics(&["correlate", path(&pairs)]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 1 + 11 * 9 * 3);
    let golden = std::fs::read_to_string(fixture("corpus/expected/correlations.csv")).unwrap();
    assert_eq!(stdout(&first), golden);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(zmetrics(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(zmetrics(&["fit"]).status.code(), Some(1));
    assert_eq!(zmetrics(&["--format", "xml", "measure", "spec", "x.zs"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 20);
    let o = zmetrics(&["fit", path(&sim), "--target", "CL", "--threshold", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = zmetrics(&["measure", "spec", "/nonexistent/spec.zs"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_with_zero() {
    let o = zmetrics(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("run-all"));
}

#[test]
fn parse_errors_report_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.zs");
    std::fs::write(&bad, "schema A\n  decl x : T\n  pred x = \nend\n").unwrap();
    let o = zmetrics(&["measure", "spec", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{}:3:", bad.display())), "{}", stderr(&o));

    let bad = dir.path().join("bad.mil");
    std::fs::write(&bad, "procedure P is\nbegin\n   goto Nowhere;\nend P;\n").unwrap();
    let o = zmetrics(&["measure", "code", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{}:3:", bad.display())), "{}", stderr(&o));
}

#[test]
fn run_all_reproduces_committed_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = zmetrics(&[
        "run-all",
        path(&fixture("corpus/spec.zs")),
        path(&fixture("corpus/code")),
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = fixture("corpus/expected");
    let mut names: Vec<_> = std::fs::read_dir(&expected)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut produced: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    produced.sort();
    assert_eq!(produced, names);
    for name in names {
        let want = std::fs::read(expected.join(&name)).unwrap();
        let got = std::fs::read(out.join(&name)).unwrap();
        assert!(want == got, "{} differs", name.to_string_lossy());
    }
}

#[test]
fn run_all_without_pairs_fails_at_pair_stage() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code");
    std::fs::create_dir(&code).unwrap();
    let o = zmetrics(&[
        "run-all",
        path(&fixture("corpus/spec.zs")),
        path(&code),
        "--out",
        path(&dir.path().join("report")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("stage pair"), "{}", stderr(&o));
}

#[test]
fn pair_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let code_dir = fixture("corpus/code");
    let mut args = vec![
        "pair".to_string(),
        fixture("corpus/spec.zs").display().to_string(),
    ];
    let mut files: Vec<_> = std::fs::read_dir(&code_dir)
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    files.sort();
    args.extend(files);
    args.extend(["--report".to_string(), report.display().to_string()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = zmetrics(&refs);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(fixture("corpus/expected/pairs.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["pairs"].as_array().unwrap().len(), 12);
    assert_eq!(rep["suggestions"][0]["unknown"], "ArchiveLg");
}
