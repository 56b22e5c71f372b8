use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_detcolor")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn detcolor")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, kind: &str, n: usize, param: &str, variant: &str) -> (PathBuf, PathBuf) {
    let stem = dir.join(name);
    let n = n.to_string();
    let out = run(&[
        "gen",
        "--kind",
        kind,
        "--n",
        &n,
        "--param",
        param,
        "--variant",
        variant,
        "--seed",
        "3",
        "--out",
        arg(&stem),
    ]);
    assert!(
        out.status.success(),
        "gen failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (dir.join(format!("{name}.graph")), dir.join(format!("{name}.palette")))
}

#[test]
fn gen_color_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = gen(dir.path(), "k4", "clique", 4, "0", "delta-plus-one");
    let stem = dir.path().join("k4-run");
    let out = run(&["color", "--graph", arg(&g), "--palette", arg(&p), "--out", arg(&stem)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let stats: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("k4-run.stats.json")).unwrap()).unwrap();
    assert_eq!(stats["n"], 4);
    assert_eq!(stats["m"], 6);
    assert_eq!(stats["valid"], true);
    assert!(dir.path().join("k4-run.trace.json").exists());

    let colors = dir.path().join("k4-run.colors");
    let out = run(&[
        "validate",
        "--graph",
        arg(&g),
        "--palette",
        arg(&p),
        "--colors",
        arg(&colors),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn monochromatic_edge_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = gen(dir.path(), "path", "path", 3, "0", "delta-plus-one");
    let colors = dir.path().join("bad.colors");
    std::fs::write(&colors, "0 1\n1 1\n2 0\n").unwrap();
    let out = run(&[
        "validate",
        "--graph",
        arg(&g),
        "--palette",
        arg(&p),
        "--colors",
        arg(&colors),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("monochromatic"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = gen(dir.path(), "pl", "power-law", 300, "6", "deg-plus-one");
    let color = |tag: &str| {
        let out = run(&["color", "--graph", arg(&g), "--palette", arg(&p)]);
        assert_eq!(out.status.code(), Some(0), "{tag}");
        out.stdout
    };
    assert_eq!(color("first"), color("second"));
    let low = || {
        run(&[
            "lowspace",
            "--graph",
            arg(&g),
            "--palette",
            arg(&p),
            "--bins",
            "2",
            "--ls-threshold-override",
            "8",
        ])
        .stdout
    };
    let a = low();
    assert!(!a.is_empty());
    assert_eq!(a, low());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["color"]).status.code(), Some(2));
    assert_eq!(
        run(&["gen", "--kind", "mystery", "--n", "4", "--out", "/tmp/x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("broken.graph");
    std::fs::write(&g, "graph 3 2\n0 1\n1 x\n").unwrap();
    let out = run(&["color", "--graph", arg(&g)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn external_mis_solver_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = gen(dir.path(), "gnp", "gnp", 120, "0.2", "delta-plus-one");
    let common = [
        "lowspace",
        "--graph",
        arg(&g),
        "--palette",
        arg(&p),
        "--bins",
        "2",
        "--ls-threshold-override",
        "16",
    ];
    let builtin = dir.path().join("builtin");
    let external = dir.path().join("external");
    let mut a = common.to_vec();
    a.extend(["--out", arg(&builtin)]);
    assert_eq!(run(&a).status.code(), Some(0));
    let solver = format!("{} mis-greedy", bin());
    let mut b = common.to_vec();
    b.extend(["--mis-solver", &solver, "--out", arg(&external)]);
    let out = run(&b);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |stem: &Path| std::fs::read_to_string(stem.with_extension("colors")).unwrap();
    assert_eq!(read(&builtin), read(&external));
}

#[test]
fn census_reports_uniformity() {
    let out = run(&["census", "--hash-a", "3", "--hash-b", "3", "--hash-c", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_uniform"], true);
    assert_eq!(v["seed_bits"], 6);
    for t in v["tails"].as_array().unwrap() {
        assert!(t["empirical"].as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn bench_emits_csv() {
    let out = run(&[
        "bench",
        "--kinds",
        "path:0,gnp:0.1",
        "--ns",
        "32,64",
        "--variants",
        "delta-plus-one,deg-plus-one",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("label,mode,n,m,delta,rounds"));
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}
