#[path = "../../core/tests/common/dot.rs"]
mod dot;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(rel: &str) -> String {
    root().join("corpus").join(rel).display().to_string()
}

fn thingkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thingkit"))
        .args(args)
        .env("THINGKIT_CORPUS_DIR", root().join("corpus"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Compares with `tests/golden/<name>`, rewriting it under `THINGKIT_BLESS`.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("THINGKIT_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {name}; run with THINGKIT_BLESS=1"));
    assert_eq!(actual, expected, "golden {name}");
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thingkit-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn validate_clean_model_is_silent() {
    let o = thingkit(&["validate", &corpus("firewall/firewall.tm")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn validate_reports_errors_with_exit_1() {
    let dir = scratch("bad");
    let file = dir.join("bad.tm");
    std::fs::write(
        &file,
        "machine m {\n  stage receive r\n  stage transfer t\n}\nflow m.r -> m.t\n",
    )
    .unwrap();
    let o = thingkit(&["validate", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("E_ADJACENCY"), "{}", stdout(&o));

    let o = thingkit(&["validate", file.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let codes: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"E_ADJACENCY"), "{codes:?}");
}

#[test]
fn parse_errors_exit_1_on_stderr() {
    let dir = scratch("syntax");
    let file = dir.join("broken.tm");
    std::fs::write(&file, "machine { stage").unwrap();
    let o = thingkit(&["validate", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "");
    assert_eq!(stderr(&o).lines().count(), 2, "{}", stderr(&o));
}

#[test]
fn unreadable_input_exits_2() {
    let o = thingkit(&["validate", "/nonexistent/model.tm"]);
    assert_eq!(o.status.code(), Some(2));
    let o = thingkit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn router_events() {
    let o = thingkit(&[
        "events",
        &corpus("router/router.tm"),
        "--grouping",
        &corpus("router/events.grp"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 11);
    assert!(out.starts_with("E1   A packet is received.\n"));
    golden("router_events.txt", &out);
}

#[test]
fn events_json_is_schema_stable() {
    let o = thingkit(&[
        "events",
        &corpus("firewall/firewall.tm"),
        "--grouping",
        &corpus("firewall/events.grp"),
        "--format",
        "json",
    ]);
    golden("firewall_events.json", &stdout(&o));
}

#[test]
fn grouping_format_reads_back() {
    let model = corpus("cloud_server/cloud_server.tm");
    let grp = corpus("cloud_server/events.grp");
    let o = thingkit(&["events", &model, "--grouping", &grp, "--format", "grouping"]);
    let dir = scratch("regroup");
    let file = dir.join("again.grp");
    std::fs::write(&file, stdout(&o)).unwrap();
    let a = thingkit(&["events", &model, "--grouping", &grp]);
    let b = thingkit(&["events", &model, "--grouping", file.to_str().unwrap()]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 22);
}

#[test]
fn firewall_chronology() {
    let args = [
        "chronology",
        &corpus("firewall/firewall.tm"),
        "--grouping",
        &corpus("firewall/events.grp"),
    ];
    let o = thingkit(&args);
    golden("firewall_chronology.txt", &stdout(&o));

    let mut dot_args = args.to_vec();
    dot_args.extend(["--format", "dot"]);
    let dot = stdout(&thingkit(&dot_args));
    dot::check_dot(&dot).unwrap();
    assert_eq!(dot.matches("\"E5\" ->").count(), 2);
    golden("firewall_chronology.dot", &dot);
}

#[test]
fn firewall_simulation_summary() {
    let o = thingkit(&[
        "simulate",
        &corpus("firewall/firewall.tm"),
        "--config",
        &corpus("firewall/sim.toml"),
        "--seed",
        "42",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("drops=4"), "{out}");
    assert!(out.contains("completions=6"), "{out}");
    golden("firewall_simulate.txt", &out);
}

#[test]
fn simulation_trace_out_and_json() {
    let dir = scratch("trace");
    let trace = dir.join("trace.txt");
    let o = thingkit(&[
        "simulate",
        &corpus("router/router.tm"),
        "--config",
        &corpus("router/sim.toml"),
        "--seed",
        "1",
        "--trace-out",
        trace.to_str().unwrap(),
        "--grouping",
        &corpus("router/events.grp"),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["events"][0]["id"], "E1");
    assert_eq!(v["events"][0]["count"], v["injected"]);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().any(|l| l.starts_with("end ")));
}

#[test]
fn seed_is_mandatory() {
    let o = thingkit(&[
        "simulate",
        &corpus("firewall/firewall.tm"),
        "--config",
        &corpus("firewall/sim.toml"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulation_errors_exit_3() {
    let dir = scratch("nohandler");
    let cfg = dir.join("sim.toml");
    std::fs::write(&cfg, "[[source]]\nstage = \"packet_in\"\ncount = 1\n").unwrap();
    let o = thingkit(&[
        "simulate",
        &corpus("firewall/firewall.tm"),
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("handler"), "{}", stderr(&o));
}

#[test]
fn router_dot_has_one_dashed_edge_per_trigger() {
    let model = corpus("router/router.tm");
    let o = thingkit(&["export", &model, "--dot"]);
    let dot = stdout(&o);
    dot::check_dot(&dot).unwrap();
    let text = std::fs::read_to_string(&model).unwrap();
    let triggers = text
        .lines()
        .filter(|l| l.trim_start().starts_with("trigger "))
        .count();
    assert!(triggers > 0);
    assert_eq!(dot.matches("style=dashed").count(), triggers);
    assert!(dot.contains("subgraph \"cluster_router.routing_table\""));
    golden("router_model.dot", &dot);
}

#[test]
fn export_json_variants() {
    let model = corpus("router/router.tm");
    let o = thingkit(&["export", &model, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["name"], "router");
    let o = thingkit(&[
        "export",
        &model,
        "--json",
        "--grouping",
        &corpus("router/events.grp"),
    ]);
    golden("router_graph.json", &stdout(&o));
    let o = thingkit(&["export", &model]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_corpus_export_is_valid_dot() {
    for name in [
        "network_arch",
        "router",
        "firewall",
        "cloud_server",
        "cloud_database",
        "cloud_storage",
        "cloud_full",
    ] {
        let model = corpus(&format!("{name}/{name}.tm"));
        dot::check_dot(&stdout(&thingkit(&["export", &model, "--dot"]))).unwrap();
        let grp = corpus(&format!("{name}/events.grp"));
        dot::check_dot(&stdout(&thingkit(&[
            "export",
            &model,
            "--dot",
            "--grouping",
            &grp,
        ])))
        .unwrap();
    }
}

#[test]
fn corpus_subcommands() {
    let o = thingkit(&["corpus", "list"]);
    assert_eq!(stdout(&o).lines().count(), 7);
    let o = thingkit(&["corpus", "show", "router"]);
    assert!(stdout(&o).contains("E11  The packet is constructed and forwarded to the next node."));
    let o = thingkit(&["corpus", "show", "nope"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = scratch("extract");
    let o = thingkit(&["corpus", "extract", "firewall", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.join("firewall.tm").exists());
    assert!(dir.join("events.golden").exists());
}
