use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conley_nds::transition::load_graph;
use conley_nds::transition::TransitionGraph;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn cnds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnds")).args(args).output().expect("spawn cnds")
}

fn ok(args: &[&str]) -> String {
    let out = cnds(args);
    assert!(out.status.success(), "cnds {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(format!("{name}.toml")).display().to_string()
}

fn build(name: &str, dir: &Path, workers: &str) -> PathBuf {
    ok(&["build-map", "--config", &cfg(name), "--out", dir.to_str().unwrap(), "--workers", workers]);
    dir.join(format!("{}.cnds", config_name(name)))
}

fn config_name(file: &str) -> &str {
    file.strip_suffix("-coarse").unwrap_or(file)
}

/// Compares against `tests/golden/<file>`; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(file: &str, actual: &str) {
    let path = golden_dir().join(file);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "{file} differs from golden copy");
}

#[test]
fn build_map_writes_a_loadable_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = build("double-well", dir.path(), "1");
    let g: TransitionGraph<f64> = load_graph(&path).unwrap();
    assert_eq!(g.node_count(), 64);
    assert_eq!(g.meta.system, "double-well");
}

#[test]
fn box_cap_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("big.toml");
    fs::write(&c, "name = \"double-well\"\ngrid.depth = 30\ngrid.max_boxes = 1000\n").unwrap();
    let out = cnds(&["build-map", "--config", c.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap is 1000"));
}

#[test]
fn usage_and_config_errors_exit_with_code_one() {
    assert_eq!(cnds(&["no-such-command"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("bad.toml");
    fs::write(&c, "name = \"double-well\"\ngrid.colour = 3\n").unwrap();
    let out = cnds(&["build-map", "--config", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.colour"));
}

#[test]
fn divergence_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("blow.toml");
    fs::write(&c, "name = \"double-well\"\nintegrator.blowup = 1.5\n").unwrap();
    let out = cnds(&["pullback", "--config", c.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupt_graph_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = build("double-well", dir.path(), "1");
    let mut text = fs::read_to_string(&path).unwrap();
    text = text.replacen("1: ", "1: 0 ", 1);
    fs::write(&path, text).unwrap();
    assert_eq!(cnds(&["conley", path.to_str().unwrap()]).status.code(), Some(4));
    fs::write(&path, "CNDS9\nversion=9\n").unwrap();
    assert_eq!(cnds(&["conley", path.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn outputs_do_not_depend_on_workers_or_repetition() {
    for name in ["double-well", "example-5-1", "example-5-2-circle", "forced-lorenz-coarse"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ga = build(name, a.path(), "1");
        let gb = build(name, b.path(), "3");
        assert_eq!(fs::read(&ga).unwrap(), fs::read(&gb).unwrap(), "{name} graph");
        for g in [&ga, &gb] {
            ok(&["conley", g.to_str().unwrap()]);
            ok(&["lyapunov", g.to_str().unwrap()]);
        }
        let stem = config_name(name);
        for ext in ["conley.json", "lyapunov.json", "nodes.csv", "lyapunov.csv", "condensation.dot"] {
            let f = format!("{stem}.{ext}");
            assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn golden_summaries() {
    for name in ["double-well", "example-5-1", "example-5-2-circle", "forced-lorenz-coarse"] {
        let dir = tempfile::tempdir().unwrap();
        let g = build(name, dir.path(), "2");
        ok(&["conley", g.to_str().unwrap()]);
        ok(&["lyapunov", g.to_str().unwrap()]);
        let stem = config_name(name);
        for ext in ["conley.json", "lyapunov.json"] {
            let text = fs::read_to_string(dir.path().join(format!("{stem}.{ext}"))).unwrap();
            check_golden(&format!("{name}.{ext}"), &text);
        }
    }
    for name in ["double-well", "example-5-1"] {
        let dir = tempfile::tempdir().unwrap();
        ok(&["pullback", "--config", &cfg(name), "--out", dir.path().to_str().unwrap()]);
        let text = fs::read_to_string(dir.path().join(format!("{name}.pullback.json"))).unwrap();
        check_golden(&format!("{name}.pullback.json"), &text);
    }
}

#[test]
fn conley_reports_match_the_examples() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example-5-1", "example-5-2-circle", "double-well"] {
        let g = build(name, dir.path(), "1");
        ok(&["conley", g.to_str().unwrap()]);
    }
    let read = |n: &str| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{n}.conley.json"))).unwrap()).unwrap()
    };
    let e52 = read("example-5-2-circle");
    assert_eq!(e52["cyclic_fraction"], 1.0);
    let e51 = read("example-5-1");
    assert!(e51["chain_recurrent_per_fiber"].as_array().unwrap().iter().all(|c| (1..=3).contains(&c.as_u64().unwrap())));
    let dw = read("double-well");
    assert_eq!(dw["clusters_per_fiber"], serde_json::json!([3]));
    for v in [&e51, &e52, &dw] {
        assert_eq!(v["union_residual"], 0);
        assert_eq!(v["intersection_residual"], 0);
    }
    let csv = fs::read_to_string(dir.path().join("double-well.nodes.csv")).unwrap();
    assert!(csv.starts_with("base_index,box_index,scc_id,cyclic,in_A_1,"));
}

#[test]
fn lyapunov_properties_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = build("double-well", dir.path(), "1");
    let out = ok(&["lyapunov", g.to_str().unwrap(), "--config", &cfg("double-well"), "--trace", "0.5"]);
    assert!(out.contains("(a) true (b) true (c) true (d) true"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("double-well.lyapunov.json")).unwrap()).unwrap();
    assert_eq!(v["properties"]["monotone_violations"], 0);
    assert_eq!(v["all_hold"], true);
    let trace = fs::read_to_string(dir.path().join("double-well.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t,lambda,g,l_partial"));
    assert_eq!(lines.count(), 2001);
}

#[test]
fn pullback_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = ok(&["pullback", "--config", &cfg("example-5-1"), "--out", d]);
    assert!(out.contains("nested=true converged=true"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("example-5-1.pullback.json")).unwrap()).unwrap();
    assert!(v["final_distance"].as_f64().unwrap() <= v["box_diameter"].as_f64().unwrap());
    let csv = fs::read_to_string(dir.path().join("example-5-1.pullback.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("s,covering_size,inside_u,successive,distance"));

    let small = dir.path().join("small.toml");
    fs::write(&small, "name = \"double-well\"\npullback.u_lo = -0.1\npullback.u_hi = 0.1\n").unwrap();
    let out = ok(&["pullback", "--config", small.to_str().unwrap(), "--out", d]);
    assert!(out.contains("nested=false"), "{out}");

    let out = ok(&["pullback", "--config", &cfg("double-well"), "--out", d]);
    assert!(out.contains("nested=true converged=true"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("double-well.pullback.json")).unwrap()).unwrap();
    let diam = v["box_diameter"].as_f64().unwrap();
    assert!(v["a_approx_lo"][0].as_f64().unwrap() <= -1.0 && v["a_approx_lo"][0].as_f64().unwrap() >= -1.0 - 2.0 * diam);
    assert!(v["a_approx_hi"][0].as_f64().unwrap() >= 1.0 && v["a_approx_hi"][0].as_f64().unwrap() <= 1.0 + 2.0 * diam);
}

#[test]
fn chain_and_verify_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = build("example-5-2-circle", dir.path(), "1");
    let out = ok(&["chain", g.to_str().unwrap(), "--from", "0", "--to", "128"]);
    assert!(out.starts_with("path ("), "{out}");
    let g = build("double-well", dir.path(), "1");
    // Box 48 holds x = 1, box 40 holds x = 0.5.
    let out = ok(&["chain", g.to_str().unwrap(), "--from", "48", "--to", "40"]);
    assert_eq!(out.trim(), "not found");
    let out = ok(&["verify", "oracle", "--seed", "3"]);
    assert!(out.starts_with("500 graphs") && out.contains(" 0 failures"), "{out}");
    let out = ok(&["verify", g.to_str().unwrap()]);
    assert!(out.contains("identities hold; Lyapunov properties hold"));
}

#[test]
fn print_defaults_round_trips() {
    let text = ok(&["--print-defaults", "--system", "forced-lorenz"]);
    assert!(text.contains("transition.escape = \"drop\""));
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("d.toml");
    fs::write(&c, &text).unwrap();
    assert_eq!(ok(&["--print-defaults", "--config", c.to_str().unwrap()]), text);
}
