use std::path::Path;
use std::process::{Command, Output};

fn caustica(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caustica"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = caustica(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_flag_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = caustica(dir.path(), &["conj", "--model", "torus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn conj_circle_writes_identical_artifacts_twice() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let o = caustica(dir.path(), &["conj", "--model", "circle2d", "--patch", "ring:8", "--out", name]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let out = stdout(&o);
        assert!(out.lines().any(|l| l.starts_with("PASS")));
        assert!(!out.lines().any(|l| l.starts_with("FAIL")));
    };
    run("a.csv");
    run("b.csv");
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let ja = String::from_utf8(read("a.json")).unwrap();
    let jb = String::from_utf8(read("b.json")).unwrap();
    assert_eq!(ja, jb);
    let csv = String::from_utf8(read("a.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("v0,"));
    assert_eq!(csv.lines().count(), 9);
    let doc: serde_json::Value = serde_json::from_str(&ja).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["seed"], 0);
}

#[test]
fn sphere_is_reproducible_for_a_given_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str, seed: &'static str| {
        vec!["--seed", seed, "sphere", "--n-lat", "32", "--n-lon", "64", "--circles", "8", "--out", out]
    };
    for (out, seed) in [("s1.csv", "7"), ("s2.csv", "7")] {
        let o = caustica(dir.path(), &args(out, seed));
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("s1.csv"), read("s2.csv"));
    assert_eq!(read("s1.json"), read("s2.json"));
}

#[test]
fn failed_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // the product flow with a horizontal covector is not strongly convex
    let o = caustica(dir.path(), &["scon", "--model", "product", "--xi", "1,0,0", "--expect", "holds"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL")));
}

fn write_field(path: &Path, n: u32, l: f64) {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"CSF2");
    bytes.extend_from_slice(&n.to_le_bytes());
    bytes.extend_from_slice(&l.to_le_bytes());
    let h = l / n as f64;
    for r in 0..n {
        for c in 0..n {
            let x = -l / 2.0 + c as f64 * h;
            let y = -l / 2.0 + r as f64 * h;
            let v: f64 = (-(x * x + y * y) / 2.0).exp();
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn circ_apply_transforms_a_csf2_field() {
    let dir = tempfile::tempdir().unwrap();
    write_field(&dir.path().join("in.csf2"), 128, 16.0);
    let o = caustica(
        dir.path(),
        &["circ", "apply", "--impl", "both", "--in", "in.csf2", "--out", "out.csf2", "--m", "512"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let bytes = std::fs::read(dir.path().join("out.csf2")).unwrap();
    assert_eq!(&bytes[..4], b"CSF2");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 128);
    assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), 16.0);
    assert_eq!(bytes.len(), 16 + 128 * 128 * 8);
}

#[test]
fn garbage_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.csf2"), b"not a field").unwrap();
    let o = caustica(dir.path(), &["circ", "apply", "--in", "junk.csf2", "--out", "o.csf2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn one_thread_matches_the_default_pool() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_caustica"));
        cmd.current_dir(dir.path()).args(["conj", "--model", "magnetic3d:2", "--patch", "fib:10", "--out", out]);
        if let Some(t) = threads {
            cmd.env("CAUSTICA_THREADS", t);
        }
        let o = cmd.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    };
    run("one.csv", Some("1"));
    run("all.csv", None);
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("one.csv"), read("all.csv"));
}
