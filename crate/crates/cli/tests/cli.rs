use std::fs;
use std::path::PathBuf;
use std::process::Command;

use heightlab_cli::dispatch;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_heightlab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["heightlab"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = dispatch(&argv, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn help_matches_golden_files() {
    let cases: [(&str, &[&str]); 7] = [
        ("help.txt", &["--help"]),
        ("help_cf.txt", &["cf", "--help"]),
        ("help_heights.txt", &["heights", "--help"]),
        ("help_approx.txt", &["approx", "--help"]),
        ("help_exponent.txt", &["exponent", "--help"]),
        ("help_experiment.txt", &["experiment", "--help"]),
        ("help_series.txt", &["series", "--help"]),
    ];
    for (file, args) in cases {
        let (code, out, _) = in_process(args);
        assert_eq!(code, 0);
        let want = fs::read_to_string(golden(file)).unwrap();
        assert_eq!(out, want, "{file}");
    }
}

#[test]
fn help_lists_every_flag() {
    let mut all = String::new();
    for sub in ["cf", "heights", "approx", "exponent", "experiment", "series"] {
        all += &in_process(&[sub, "--help"]).1;
    }
    for flag in [
        "--target", "--height", "--bound", "--tau", "--depth", "--seed", "--trials", "--cap",
        "--precision-bits", "--out", "--format", "--count", "--kind", "--d ", "--s ", "--config",
    ] {
        assert!(all.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn cf_prints_fibonacci_table() {
    let (code, out, _) = run(&["cf", "--target", "golden", "--depth", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "n,a,p,q\n1,1,1,1\n2,1,1,2\n3,1,2,3\n4,1,3,5\n5,1,5,8\n");
}

#[test]
fn cf_json_parses() {
    let (code, out, _) = run(&["cf", "--target", "sqrt2", "--depth", "3", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["entries"][2]["q"], "12");
}

#[test]
fn series_boundary_verdict() {
    let (code, out, _) = run(&["series", "--kind", "max", "--d", "2", "--tau", "4", "--s", "1.0"]);
    assert_eq!(code, 0);
    assert!(out.lines().skip(1).all(|l| l.contains(",-1,1,diverges (boundary),")), "{out}");
}

#[test]
fn min_without_count_is_usage_error() {
    let (code, _, err) = run(&["approx", "--height", "min", "--bound", "10", "--target", "golden", "--target", "sqrt2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--count"), "{err}");
}

#[test]
fn min_with_count_runs() {
    let (code, out, _) = run(&[
        "approx", "--height", "min", "--count", "--tau", "5", "--bound", "1000", "--target", "liouville", "--target",
        "golden",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "count,exact\n3,false\n");
}

#[test]
fn unknown_flag_prints_help() {
    let (code, _, err) = run(&["cf", "--target", "golden", "--bogus"]);
    assert_eq!(code, 2);
    assert!(err.contains("--bogus"));
    assert!(err.contains("--depth <DEPTH>"), "{err}");
}

#[test]
fn exit_code_precision() {
    let (code, out, _) = run(&["cf", "--target", "e", "--depth", "50", "--precision-bits", "64"]);
    assert_eq!(code, 3);
    assert!(out.starts_with("n,a,p,q\n1,1,1,1\n"));
}

#[test]
fn exit_code_cap() {
    let (code, _, err) = run(&[
        "approx", "--height", "prod", "--bound", "10^12", "--brute", "--target", "golden", "--target", "sqrt2",
        "--target", "e",
    ]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn exit_code_failed_predicate() {
    // the liouville pair cannot show growth at these caps
    let (code, out, _) = run(&["experiment", "min-split", "--cap", "1000,100000"]);
    assert_eq!(code, 5);
    assert!(out.contains("B,golden sqrt2,100000,"));
}

#[test]
fn exit_code_insufficient_data() {
    let (code, _, err) = run(&["exponent", "--target", "golden", "--height", "max", "--cap", "300"]);
    assert_eq!(code, 1);
    assert!(err.contains("insufficient data"));
}

#[test]
fn domain_error_is_usage() {
    let (code, _, _) = run(&["series", "--kind", "lcm", "--d", "2", "--tau", "4", "--s", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = std::env::temp_dir().join(format!("heightlab-cfg-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "# defaults\ntarget = sqrt2\ndepth = 4\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (code, out, _) = run(&["cf", "--config", c]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5);
    assert!(out.contains("4,2,12,29"));
    let (_, out, _) = run(&["cf", "--config", c, "--depth", "2"]);
    assert_eq!(out.lines().count(), 3);
    let (_, out, _) = run(&["cf", "--config", c, "--target", "golden", "--depth", "3"]);
    assert!(out.ends_with("3,1,2,3\n"));
    fs::write(&cfg, "nonsense = 1\n").unwrap();
    assert_eq!(run(&["cf", "--config", c]).0, 2);
}

#[test]
fn khintchine_writes_result_and_sidecars() {
    let dir = std::env::temp_dir().join(format!("heightlab-run-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    let p = path.to_str().unwrap();
    let (code, _, err) = run(&["experiment", "khintchine", "--trials", "4", "--seed", "9", "--cap", "1e5", "--out", p]);
    // four trials are too few for the predicates to be meaningful either way
    assert!(code == 0 || code == 5, "{err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["trials"].as_array().unwrap().len(), 4);
    assert_eq!(v["trials"][0]["seed"], 9);
    let trace = fs::read_to_string(dir.join("run.json.traces/trial_00000.csv")).unwrap();
    assert!(trace.starts_with("height_base,height_root,quotient_lo,quotient_hi\n"));
    // same config, same per-trial rows
    let first = v["trials"].clone();
    run(&["experiment", "khintchine", "--trials", "4", "--seed", "9", "--cap", "1e5", "--out", p]);
    let v2: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(first, v2["trials"]);
}

#[test]
fn heights_of_a_point() {
    let (code, out, _) = run(&["heights", "--target", "dec:1/2", "--target", "dec:2/3", "--height", "lcm"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"(1/2, 2/3)\",lcm,6,"));
}
