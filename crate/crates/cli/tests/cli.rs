use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tailfuse_core::transforms::combined_pvalue;
use tailfuse_core::{TailTransform, TransformSpec, WeightVector};

const HEADER: &str =
    "experiment,copula,param,tau,n,transform,gamma,alpha,reps,rejections,estimate,ci_lo,ci_hi,bonf_rejections,ratio,seed";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tailfuse"));
    cmd.env_remove("TAILFUSE_THREADS").env("RUST_LOG", "error");
    cmd
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The value printed after `key` on its own line.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
        .to_string()
}

fn theory(args: &[&str]) -> f64 {
    let o = bin().arg("theory").args(args).output().unwrap();
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o).trim().parse().unwrap()
}

#[test]
fn combine_examples() {
    let o = run_with_stdin(&["combine", "--transform", "pareto:1"], "0.01 0.02 0.05\n");
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((field(&out, "combined").parse::<f64>().unwrap() - 0.017647).abs() < 5e-7);
    assert_eq!(field(&out, "bonferroni"), "0.03");

    for t in [
        "pareto:1",
        "cauchy",
        "trunc_cauchy",
        "trunc_t:0.3",
        "trunc_t:1.2:0.01",
    ] {
        let o = run_with_stdin(&["combine", "--transform", t], "0.5");
        assert_eq!(field(&stdout(&o), "combined"), "0.5", "{t}");
    }

    let o = run_with_stdin(&["combine", "--transform", "pareto:1", "-"], "0.02, 0.5");
    // The reference value is quoted to fewer digits than the CLI prints.
    assert!(
        (field(&stdout(&o), "combined").parse::<f64>().unwrap() - 0.038462).abs() <= 5e-7 + 1e-12
    );
}

#[test]
fn combine_reads_files_and_reports_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    fs::write(&path, "# header comment\n0.001\n0.2, 0.3\n\n0.9\n").unwrap();
    let o = bin()
        .args([
            "combine",
            "--transform",
            "trunc_t:0.6",
            "--alpha",
            "0.01",
            "--weights",
            "2,1,1,0.5",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "n"), "4");
    assert_eq!(field(&out, "transform"), "trunc_t:0.6:0.001");
    assert_eq!(field(&out, "alpha"), "0.01");
    assert_eq!(field(&out, "decision"), "reject");
}

#[test]
fn combine_matches_library_to_printed_precision() {
    let cases: [(&str, &[f64]); 4] = [
        ("trunc_cauchy", &[0.003, 0.04, 0.5, 0.77]),
        ("trunc_t:0.3", &[0.2, 0.01, 0.9]),
        ("pareto:1.5", &[1e-5, 0.3]),
        ("cauchy", &[0.12, 0.34, 0.56, 0.78, 0.9]),
    ];
    for (t, p) in cases {
        let text: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        let o = run_with_stdin(&["combine", "--transform", t], &text.join(" "));
        let printed = field(&stdout(&o), "combined");
        let spec: TransformSpec = t.parse().unwrap();
        let exact = combined_pvalue(
            &TailTransform::new(spec).unwrap(),
            p,
            &WeightVector::uniform(p.len()),
        )
        .unwrap();
        let expected: f64 = format!("{exact:.5e}").parse().unwrap();
        assert!(
            (printed.parse::<f64>().unwrap() - expected).abs() <= 1e-12 * expected,
            "{t}: printed {printed}, library {exact}"
        );
    }
}

#[test]
fn combine_input_errors() {
    let o = run_with_stdin(&["combine"], "0.1\n0.2 abc\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = run_with_stdin(&["combine"], "0.1 1.5");
    assert_eq!(o.status.code(), Some(2));
    let o = run_with_stdin(&["combine"], "");
    assert_eq!(o.status.code(), Some(2));
    let o = run_with_stdin(&["combine", "--transform", "trunc_t:0.6:0"], "0.1");
    assert_eq!(o.status.code(), Some(2));
    let o = run_with_stdin(&["combine", "--weights", "1,1"], "0.1 0.2 0.3");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn theory_examples() {
    assert!((theory(&["q_bound", "--gamma", "0.6", "--n", "5"]) - 0.525306).abs() < 5e-7);
    assert_eq!(
        theory(&["bonf_ratio", "--family", "comonotone", "--n", "5"]),
        5.0
    );
    assert_eq!(
        theory(&["bonf_ratio", "--family", "independence", "--n", "5"]),
        1.0
    );
    let r = theory(&[
        "bonf_ratio",
        "--family",
        "logistic",
        "--alpha",
        "0.5",
        "--n",
        "5",
    ]);
    assert!((r - 5f64.sqrt()).abs() < 1e-8);
    let l = theory(&[
        "ell", "--family", "logistic", "--alpha", "0.5", "--v", "1,1",
    ]);
    assert!((l - std::f64::consts::SQRT_2).abs() < 1e-8);
    let c = theory(&["cstar", "--family", "independence", "--u", "0.5,0.4"]);
    assert!((c - 0.2).abs() < 1e-9);
    let q = theory(&[
        "q_spectral",
        "--gamma",
        "0.6",
        "--measure",
        "comonotone",
        "--n",
        "5",
    ]);
    assert!((q - 0.525306).abs() < 5e-7);
    let h = theory(&[
        "h_ratio",
        "--gamma",
        "2",
        "--measure",
        "independence",
        "--n",
        "5",
    ]);
    assert!((h - 0.2).abs() < 1e-9);
    let p = theory(&["power_ratio", "--family", "comonotone", "--c", "1,1,1"]);
    assert!((p - 3.0).abs() < 1e-12);
}

#[test]
fn theory_spectral_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let bad = dir.path().join("bad.json");
    fs::write(
        &a,
        r#"{"atoms": [[0.25, 0.75], [1, 0]], "masses": [1.3333333333333333, 0.6666666666666667]}"#,
    )
    .unwrap();
    fs::write(
        &b,
        r#"{"atoms": [[0.1, 0.9], [0.9, 0.1]], "masses": [1, 1]}"#,
    )
    .unwrap();
    fs::write(
        &bad,
        r#"{"atoms": [[0.8, 0.2], [0.2, 0.8]], "masses": [1.5, 0.5]}"#,
    )
    .unwrap();

    let order = |x: &Path, y: &str| {
        let o = bin()
            .args(["theory", "convex_order"])
            .arg(x)
            .arg(y)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).trim().to_string()
    };
    assert_eq!(order(&a, b.to_str().unwrap()), "incomparable");
    assert_eq!(order(&b, "comonotone"), "first_dominates");
    assert_eq!(order(&b, "independence"), "second_dominates");

    let o = bin()
        .args(["theory", "validate", "--measure"])
        .arg(&b)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("moment_constraint pass"));

    let o = bin()
        .args(["theory", "validate", "--measure"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("moments 1.3,0.7"));
    let o = bin()
        .args(["theory", "q_spectral", "--gamma", "0.5", "--measure"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("moment constraint"));
}

#[test]
fn theory_argument_errors() {
    let o = bin()
        .args(["theory", "ell", "--family", "logistic", "--v", "1,1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args(["theory", "q_bound", "--gamma", "-1", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn sweep(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["sweep", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn sweep_matches_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&golden("tiny.json"), dir.path(), &["--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    let want = fs::read_to_string(golden("tiny.csv")).unwrap();
    assert_eq!(got.lines().next(), Some(HEADER));
    assert_eq!(got, want);
    let svg = fs::read_to_string(dir.path().join("tiny.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("trunc_t:0.6:0.001"));
}

#[test]
fn sweep_is_thread_count_invariant() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = golden("tiny.json");
    let o1 = bin()
        .env("TAILFUSE_THREADS", "1")
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(a.path())
        .output()
        .unwrap();
    let o2 = bin()
        .env("TAILFUSE_THREADS", "3")
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(
        fs::read(a.path().join("tiny.csv")).unwrap(),
        fs::read(b.path().join("tiny.csv")).unwrap()
    );
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&golden("tiny.json"), dir.path(), &["--seed", "43"]);
    assert!(o.status.success());
    let got = fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    assert_ne!(got, fs::read_to_string(golden("tiny.csv")).unwrap());
    assert!(got.lines().nth(1).unwrap().ends_with(",43"));
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn sweep_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(golden("tiny.json")).unwrap();

    let empty = write_config(
        dir.path(),
        "empty.json",
        &base.replace("[0.0, 0.5, 1.0]", "[]"),
    );
    let o = sweep(&empty, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau_grid"));

    let o = sweep(&golden("tiny.json"), dir.path(), &["--mode", "power"]);
    assert_eq!(o.status.code(), Some(2));

    let typo = write_config(
        dir.path(),
        "typo.json",
        &base.replace("\"trunc_q\"", "\"trunc\""),
    );
    let o = sweep(&typo, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("transforms[1]"));

    let o = sweep(&dir.path().join("missing.json"), dir.path(), &[]);
    assert_ne!(o.status.code(), Some(0));

    let o = bin()
        .env("TAILFUSE_THREADS", "zero")
        .args(["sweep", "--config"])
        .arg(golden("tiny.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn power_sweep_with_signal() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(golden("tiny.json")).unwrap();
    let text = base.replace(
        "\"chunk\": 4096",
        "\"chunk\": 4096, \"alternative\": {\"type\": \"type_b\", \"beta\": 3, \"layout\": \"sparse\"}",
    );
    let config = write_config(dir.path(), "power.json", &text);
    let o = sweep(&config, dir.path(), &[]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "null mode must refuse an alternative"
    );
    let o = sweep(&config, dir.path(), &["--mode", "power"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let power: f64 = row[10].parse().unwrap();
    assert!(power > 0.05 && power <= 1.0);
}
