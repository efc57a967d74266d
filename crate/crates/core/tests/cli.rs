use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn swnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swnav"))
        .args(args)
        .output()
        .expect("run swnav")
}

fn path(dir: &Path, name: &str) -> (PathBuf, String) {
    let p = dir.join(name);
    let s = p.to_str().unwrap().to_string();
    (p, s)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", stderr(&out));
    out
}

fn ws_graph(dir: &Path) -> String {
    ws_graph_sized(dir, 120)
}

fn ws_graph_sized(dir: &Path, n: usize) -> String {
    let (_, g) = path(dir, &format!("ws{n}.txt"));
    let n = n.to_string();
    ok(swnav(&["--seed", "1", "generate", "--model", "ws", "--n", &n, "--k", "4", "--p", "0.1", "--graph-out", &g]));
    g
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(swnav(&["--help"]).status.code(), Some(0));
    assert_eq!(swnav(&["--version"]).status.code(), Some(0));
    assert_eq!(swnav(&["embed", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one_and_name_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let (_, g) = path(dir.path(), "g.txt");
    let cases: [(&[&str], &str); 5] = [
        (&["generate", "--model", "ws", "--n", "100", "--k", "5", "--p", "0.1", "--graph-out", &g], "even"),
        (&["generate", "--model", "ws", "--n", "100", "--k", "4", "--p", "1.5", "--graph-out", &g], "[0, 1]"),
        (&["generate", "--model", "ba", "--n", "100", "--mlinks", "3", "--gamma", "2", "--graph-out", &g], "k0 > -m_links"),
        (&["embed", "--graph-in", "/nonexistent/g.txt", "--coords-out", &g], "does not exist"),
        (&["frobnicate"], "frobnicate"),
    ];
    for (args, needle) in cases {
        let out = swnav(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(swnav(&[]).status.code(), Some(1));
}

#[test]
fn sweep_spec_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (spec, s) = path(dir.path(), "s.cfg");
    let (_, out_dir) = path(dir.path(), "out");
    std::fs::write(&spec, "family = ba\nn = 100\nmlinks = 3\ngamma_grid = 2.0, 3.0\n").unwrap();
    let out = swnav(&["sweep", "--spec", &s, "--out-dir", &out_dir]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("k0 > -m_links"), "{}", stderr(&out));

    std::fs::write(&spec, "family = ws\ncolour = blue\n").unwrap();
    let out = swnav(&["sweep", "--spec", &s, "--out-dir", &out_dir]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn oracle_reports_refusals_and_fails_on_large_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let (square, sq) = path(dir.path(), "c4.txt");
    std::fs::write(&square, "n 4\n0 1\n1 2\n2 3\n0 3\n").unwrap();
    let out = ok(swnav(&["oracle", "--graph-in", &sq, "--max-iters", "100", "--probes", "5"]));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["closed_form_error"].as_str().unwrap().contains("bipartite"), "{v}");
    assert!(v["max_relative_distance_discrepancy"].is_null());

    let big = ws_graph_sized(dir.path(), 300);
    let out = swnav(&["oracle", "--graph-in", &big]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn malformed_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let (bad, b) = path(dir.path(), "bad.txt");
    std::fs::write(&bad, "n 3\n0 1\n1 7\n").unwrap();
    let (_, c) = path(dir.path(), "c.txt");
    let out = swnav(&["embed", "--graph-in", &b, "--coords-out", &c]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.txt"), "{}", stderr(&out));
}

#[test]
fn non_convergence_is_data_not_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (square, sq) = path(dir.path(), "c4.txt");
    std::fs::write(&square, "n 4\n0 1\n1 2\n2 3\n0 3\n").unwrap();
    let (_, c) = path(dir.path(), "c.txt");
    let out = ok(swnav(&["embed", "--graph-in", &sq, "--max-iters", "50", "--coords-out", &c]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("false"), "{stdout}");
}

#[test]
fn pipeline_outputs_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let g = ws_graph(dir.path());
    let text = std::fs::read_to_string(&g).unwrap();
    assert!(text.starts_with("n 120\n"));
    assert_eq!(text.lines().count(), 1 + 240);

    let (_, c) = path(dir.path(), "c.txt");
    ok(swnav(&["embed", "--graph-in", &g, "--dim", "3", "--coords-out", &c]));
    let coords = std::fs::read_to_string(&c).unwrap();
    assert!(coords.starts_with("120 3\n"));

    let (_, r) = path(dir.path(), "r.csv");
    ok(swnav(&["route", "--graph-in", &g, "--coords-in", &c, "--trials", "50", "--out", &r]));
    let routes = std::fs::read_to_string(&r).unwrap();
    let mut lines = routes.lines();
    assert_eq!(lines.next(), Some("source,target,success,path_len,shortest_len,reason"));
    assert_eq!(lines.count(), 50);

    let (_, pd) = path(dir.path(), "pd.json");
    ok(swnav(&["--format", "json", "pathdist", "--graph-in", &g, "--coords-in", &c, "--trials", "50", "--out", &pd]));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&pd).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    let all: u64 = rows.iter().map(|r| r["count_all"].as_u64().unwrap()).sum();
    assert_eq!(all, 50);
}

#[test]
fn oracle_reports_small_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let (g, gs) = path(dir.path(), "k.txt");
    ok(swnav(&["--seed", "4", "generate", "--model", "ws", "--n", "40", "--k", "6", "--p", "0.3", "--graph-out", &gs]));
    assert!(g.exists());
    let out = ok(swnav(&["oracle", "--graph-in", &gs, "--eps", "1e-14", "--probes", "10"]));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = v["max_relative_distance_discrepancy"].as_f64().unwrap();
    assert!(d < 1e-5, "{v}");
}

#[test]
fn seeds_change_outputs_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (name, seed) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let (p, s) = path(dir.path(), name);
        ok(swnav(&["--seed", seed, "generate", "--model", "ba", "--n", "200", "--mlinks", "2", "--k0", "1", "--graph-out", &s]));
        texts.push(std::fs::read(p).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert_ne!(texts[0], texts[2]);
}

#[test]
fn sweep_is_invariant_to_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (spec, s) = path(dir.path(), "s.cfg");
    std::fs::write(&spec, "family = ba\nn = 150\nmlinks = 3\ngamma_grid = 2.5, 3.5\ndims = 5\nrealizations = 3\ntrials = 100\n").unwrap();
    let mut outs = Vec::new();
    for w in ["1", "3"] {
        let (dir_path, d) = path(dir.path(), &format!("out{w}"));
        ok(swnav(&["--format", "json", "sweep", "--spec", &s, "--out-dir", &d, "--workers", w]));
        let mut names: Vec<_> = std::fs::read_dir(&dir_path)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        let bytes: Vec<_> = names.iter().map(|n| std::fs::read(dir_path.join(n)).unwrap()).collect();
        outs.push((names, bytes));
    }
    assert_eq!(outs[0], outs[1]);
    assert!(outs[0].0.contains(&"cells.json".to_string()), "{:?}", outs[0].0);
    assert!(outs[0].0.contains(&"aggregate.json".to_string()));
}
