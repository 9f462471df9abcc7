use std::io::Write as _;
use std::process::{Command, Output, Stdio};

use mdperm_core::{gen, write_matrix, GenKind, GenSpec, MultiMatrix};
use serde_json::Value;

const FIXTURE: &str = include_str!("fixtures/paper_example.mdm");
const SCHEMA: &str = include_str!("../../../report.schema.json");

fn mdperm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdperm"))
        .args(args)
        .output()
        .expect("run mdperm")
}

fn mdperm_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mdperm"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mdperm");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn validate_report(path: &std::path::Path) -> Value {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let report: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    report
}

#[test]
fn example_is_byte_identical_to_fixture() {
    let o = mdperm(&["example", "paper"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), FIXTURE);
    assert_eq!(stdout(&mdperm(&["example"])), FIXTURE);
}

#[test]
fn compute_paper_example_every_method() {
    for method in ["naive", "laplace", "decompose", "auto"] {
        let o = mdperm(&["compute", "--example", "paper", "--method", method]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "74", "{method}");
        assert!(stderr(&o).contains("elapsed:"));
    }
}

#[test]
fn compute_fixture_file_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "example.mdm", FIXTURE);
    assert_eq!(stdout(&mdperm(&["compute", &path])).trim(), "74");
    assert_eq!(stdout(&mdperm_stdin(&["compute", "-"], FIXTURE)).trim(), "74");
}

#[test]
fn compute_identity_order_three() {
    let text = write_matrix(&MultiMatrix::identity(3).unwrap());
    for method in ["naive", "laplace", "ryser"] {
        let o = mdperm_stdin(&["compute", "-", "--method", method], &text);
        assert_eq!(stdout(&o).trim(), "1", "{method}");
    }
}

#[test]
fn compute_decompose_matches_naive_on_random_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let a = gen(&GenSpec::new(GenKind::Uniform { p: 0.6 }, 3, 4, seed)).unwrap();
        let path = write_temp(&dir, &format!("a{seed}.mdm"), &write_matrix(&a));
        let naive = stdout(&mdperm(&["compute", &path, "--method", "naive"]));
        let dec = stdout(&mdperm(&["compute", &path, "--method", "decompose", "--k", "1"]));
        assert_eq!(naive, dec);
    }
}

#[test]
fn compute_real_entries() {
    let text = "mdm 1\nd=2 n=2\n0.5 0.25\n1 0.5\n";
    assert_eq!(stdout(&mdperm_stdin(&["compute", "-"], text)).trim(), "0.5");
}

#[test]
fn compute_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = mdperm(&["compute", "--example", "paper", "--json", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["permanent"], "74");
    assert_eq!(v["exact"], true);
}

#[test]
fn method_dimension_mismatch_exits_2() {
    let o = mdperm(&["compute", "--example", "paper", "--method", "ryser"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d = 2"), "{}", stderr(&o));
    let o = mdperm(&["compute", "--example", "paper", "--method", "decompose", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mdperm(&["compute", "--example", "paper", "--method", "naive", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_exceeded_exits_3() {
    let o = mdperm(&[
        "compute",
        "--example",
        "paper",
        "--method",
        "naive",
        "--budget-terms",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget exceeded"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2() {
    let mut short = FIXTURE.trim_end().to_owned();
    short.truncate(short.rfind(' ').unwrap());
    let cases = [
        (short, "expected 64 entries, got 63"),
        ("mdm 1\nd=2 n=2\n1 0\n0 1.5\n".to_owned(), "[0,1]"),
        ("mdx 1\nd=2 n=2\n1 0\n0 1\n".to_owned(), "header"),
    ];
    for (text, needle) in cases {
        let o = mdperm_stdin(&["compute", "-"], &text);
        assert_eq!(o.status.code(), Some(2), "{needle}");
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
    }
    let o = mdperm(&["compute", "/nonexistent/file.mdm"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_paper_example_table() {
    let o = mdperm(&["bounds", "--example", "paper"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = |name: &str, value: &str| {
        out.lines()
            .any(|l| l.starts_with(name) && l.split_whitespace().any(|t| t.starts_with(value)))
    };
    assert!(row("conjecture_minc", "96"), "{out}");
    assert!(row("covering", "576"), "{out}");
    assert!(row("trivial_product", "4096"), "{out}");
    assert!(row("plane_reduction", "104.23"), "{out}");
    assert!(out.contains("permanent: 74"));
    assert!(!out.contains('\u{2717}'));
}

#[test]
fn bounds_all_ones_2d() {
    let text = write_matrix(&MultiMatrix::ones(2, 3).unwrap());
    let out = stdout(&mdperm_stdin(&["bounds", "-", "--which", "bregman_minc"], &text));
    let row = out.lines().find(|l| l.starts_with("bregman_minc")).unwrap();
    assert!(row.split_whitespace().any(|t| t == "6"), "{row}");
    assert!(out.contains("permanent: 6"));
}

#[test]
fn bounds_zero_matrix() {
    let text = write_matrix(&MultiMatrix::zeros(3, 3).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("b.json");
    let o = mdperm_stdin(&["bounds", "-", "--json", json.to_str().unwrap()], &text);
    assert!(o.status.success());
    assert!(stdout(&o).contains("permanent: 0"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["permanent"], "0");
    assert_eq!(v["log_permanent"], "-inf");
    for b in v["bounds"].as_array().unwrap() {
        if b["applicable"] == true {
            assert!(b["value"] == 0.0 || b["value"] == 1.0, "{b}");
        }
    }
}

#[test]
fn bounds_unknown_name_exits_2() {
    let o = mdperm(&["bounds", "--example", "paper", "--which", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_minimize_axis_orders() {
    let out = stdout(&mdperm(&[
        "bounds",
        "--example",
        "paper",
        "--which",
        "covering",
        "--minimize-axis-orders",
    ]));
    assert_eq!(out.lines().filter(|l| l.starts_with("covering")).count(), 1);
}

#[test]
fn fuzz_2d_has_no_candidates() {
    let o = mdperm(&["fuzz", "--d", "2", "--n", "5", "--count", "200", "--seed", "42"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("instances=200"), "{out}");
    assert!(out.contains("proven_violations=0"));
    assert!(out.contains("conjecture_candidates=0"));
}

#[test]
fn fuzz_fixed_sums_report_is_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = mdperm(&[
        "fuzz",
        "--d",
        "3",
        "--n",
        "4",
        "--count",
        "100",
        "--seed",
        "7",
        "--gen",
        "fixed-sums",
        "--r",
        "8,8,8,8",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = validate_report(&path);
    let instances = report["instances"].as_array().unwrap();
    assert_eq!(instances.len(), 100);
    for (i, inst) in instances.iter().enumerate() {
        assert_eq!(inst["index"], i);
        let spec: GenSpec = inst["spec"].as_str().unwrap().parse().unwrap();
        let a = gen(&spec).unwrap();
        assert_eq!(a.hyperplane_counts(0).unwrap(), vec![8; 4]);
        let per = mdperm_core::permanent_naive(&a, &Default::default()).unwrap();
        assert_eq!(inst["permanent"], per.to_string());
    }
}

#[test]
fn fuzz_report_validates_for_every_generator() {
    let dir = tempfile::tempdir().unwrap();
    for (i, extra) in [
        vec!["--gen", "uniform", "--p", "0.4"],
        vec!["--gen", "block-diagonal", "--blocks", "1,2"],
        vec!["--gen", "one-per-line"],
        vec!["--gen", "mixed"],
        vec!["--gen", "fixed-sums", "--r", "3,4,5", "--strict"],
    ]
    .into_iter()
    .enumerate()
    {
        let path = dir.path().join(format!("r{i}.json"));
        let mut args = vec!["fuzz", "--d", "3", "--n", "3", "--count", "20", "--seed", "5", "--json"];
        args.push(path.to_str().unwrap());
        args.extend(extra);
        let o = mdperm(&args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let report = validate_report(&path);
        assert_eq!(report["header"]["proven_violations"], 0);
    }
}

#[test]
fn fuzz_skips_over_budget_instances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = mdperm(&[
        "fuzz",
        "--d",
        "4",
        "--n",
        "4",
        "--count",
        "3",
        "--budget-terms",
        "1000",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let report = validate_report(&path);
    assert_eq!(report["header"]["skipped"], 3);
    assert!(report["instances"][0]["skip_reason"]
        .as_str()
        .unwrap()
        .contains("budget"));
}

#[test]
fn fuzz_fixed_sums_needs_r() {
    let o = mdperm(&["fuzz", "--d", "3", "--n", "3", "--gen", "fixed-sums"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "0", "3"] {
        let path = dir.path().join(format!("t{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_mdperm"))
            .args(["fuzz", "--d", "3", "--n", "3", "--count", "60", "--seed", "9", "--json"])
            .arg(&path)
            .env("MDPERM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        reports.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);

    let o = Command::new(env!("CARGO_BIN_EXE_mdperm"))
        .args(["example"])
        .env("MDPERM_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compute_from_generator_spec() {
    let o = mdperm(&["compute", "--spec", "one-per-line d=3 n=3 seed=1", "--method", "naive"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = mdperm(&["compute", "--spec", "bogus d=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn omega_report_runs() {
    let o = mdperm(&["omega", "--d", "3", "--n", "3", "--count", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}
