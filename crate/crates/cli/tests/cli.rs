use std::path::Path;
use std::process::{Command, Output};

use nctrace_cli::Report;

fn nctrace(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nctrace"))
        .args(args)
        .env("NCTRACE_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str], cache: &Path) -> (Report, i32) {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let mut all = args.to_vec();
    all.extend(["--json", json.to_str().unwrap()]);
    let out = nctrace(&all, cache);
    let text = std::fs::read_to_string(&json)
        .unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&out.stderr)));
    (serde_json::from_str(&text).unwrap(), out.status.code().unwrap())
}

#[test]
fn dual_su2_has_three_rows() {
    let cache = tempfile::tempdir().unwrap();
    let (r, code) = report(&["dual", "--group", "su2", "--cutoff", "2"], cache.path());
    assert_eq!(code, 0);
    let rows: Vec<(String, usize)> = r.dual.iter().map(|x| (x.label.clone(), x.d)).collect();
    assert_eq!(rows, [("0".into(), 1), ("1/2".into(), 2), ("1".into(), 3)]);
    assert!((r.dual[2].weight - 3f64.sqrt()).abs() < 1e-15);
    let out = nctrace(&["dual", "--group", "su2", "--cutoff", "2"], cache.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1/2"), "{text}");
}

#[test]
fn det_example() {
    let cache = tempfile::tempdir().unwrap();
    let (r, code) = report(&["det", "--group", "torus:1", "--symbol", "bessel:-1", "--lambda", "0.1,0"], cache.path());
    assert_eq!(code, 0);
    let d = r.determinants.unwrap();
    let v = d.det_omega.unwrap();
    assert!((v[0] - 1.2214).abs() < 1e-3 && v[1] == 0.0, "{v:?}");
    assert!((d.det_p_omega.unwrap()[0] - 0.2f64.exp()).abs() < 0.05 * 0.2f64.exp());
    assert_eq!(d.trace.estimator, "e1");
    assert!(d.truncated.is_some());
}

#[test]
fn trace_all_near_two() {
    let cache = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let (r, code) = report(
        &["trace", "--group", "torus:1", "--symbol", "bessel:-1", "--est", "all", "--csv", csv.to_str().unwrap()],
        cache.path(),
    );
    assert_eq!(code, 0);
    let tags: Vec<String> = r.estimates.iter().map(|e| e.tag()).collect();
    assert_eq!(tags, ["e1/index", "e2/index", "e3/index"]);
    for e in &r.estimates {
        let v = e.value.unwrap()[0];
        assert!((v - 2.0).abs() < 0.04, "{}: {v}", e.tag());
    }
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("source,estimator,normalization,n,alpha_re,alpha_im"));
    let n: usize = r.estimates.iter().map(|e| e.alpha_sequence.len()).sum();
    assert_eq!(rows.lines().count(), n + 1);
}

#[test]
fn config_errors_exit_2() {
    let cache = tempfile::tempdir().unwrap();
    for args in [
        &["trace", "--group", "torus:0"][..],
        &["trace", "--group", "sl3"],
        &["trace", "--group", "torus:1", "--symbol", "bessel"],
        &["det", "--group", "torus:1", "--lambda", "0.1"],
        &["trace", "--group", "torus:1", "--norm", "both"],
        &["trace", "--group", "torus:1", "--cutoffs", "12"],
        &["residue", "--group", "su2"],
        &["trace", "--group", "torus:1", "--symbol", "cos:2,1*bessel:-1", "--est", "e1"],
        &["frobnicate"],
    ] {
        let out = nctrace(args, cache.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn divergence_exits_3_with_report() {
    let cache = tempfile::tempdir().unwrap();
    let (r, code) = report(
        &["trace", "--group", "torus:1", "--symbol", "bessel:-0.5", "--cutoff", "1e4", "--est", "e1"],
        cache.path(),
    );
    assert_eq!(code, 3);
    assert!(r.failed);
    assert!(r.estimates[0].error.as_deref().unwrap().contains("Dixmier class"));
}

#[test]
fn reruns_are_identical_with_and_without_cache() {
    let cache = tempfile::tempdir().unwrap();
    let args = ["compare", "--group", "torus:2", "--cutoff", "200"];
    let (a, _) = report(&args, cache.path());
    let (b, _) = report(&args, cache.path());
    let mut nc = args.to_vec();
    nc.push("--no-cache");
    let (c, _) = report(&nc, cache.path());
    // e1 and the residue comparison share one spectrum
    assert_eq!((a.runtime.cache_writes, a.runtime.cache_hits), (1, 1));
    assert_eq!((b.runtime.cache_writes, b.runtime.cache_hits), (0, 2));
    assert_eq!(c.runtime.cache_dir, None);
    assert_eq!(a.numeric_json(), b.numeric_json());
    assert_eq!(a.numeric_json(), c.numeric_json());
    assert!(a.residue.is_some());
    assert_eq!(a.gaps.len(), 6);
}

#[test]
fn residue_subcommand() {
    let cache = tempfile::tempdir().unwrap();
    let (r, code) = report(
        &["residue", "--group", "torus:2", "--form", "1,0,2", "--cutoff", "800"],
        cache.path(),
    );
    assert_eq!(code, 0);
    let res = r.residue.unwrap();
    assert!((res.residue - std::f64::consts::PI / 2f64.sqrt()).abs() < 1e-10);
    assert!(res.passes && res.gap.unwrap() < 0.02);

    let (r, code) = report(
        &["residue", "--group", "torus:1", "--symbol", "cos:2,1*bessel:-1", "--cutoff", "2e4", "--haar-res", "8"],
        cache.path(),
    );
    assert_eq!(code, 0);
    let res = r.residue.unwrap();
    assert!((res.residue - 4.0).abs() < 1e-12);
    assert_eq!(res.dixmier.estimator, "residue");
}

#[test]
fn selftest_is_listed() {
    let cache = tempfile::tempdir().unwrap();
    let out = nctrace(&["--help"], cache.path());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["dual", "trace", "residue", "det", "compare", "selftest"] {
        assert!(text.contains(sub), "{sub}");
    }
}
