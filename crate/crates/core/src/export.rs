//! DOT and JSON renderings of models and event graphs.
//!
//! Output depends only on the input value, so it is stable across runs.

use std::fmt::Write;

use serde::Serialize;

use crate::events::{EdgeKind, EventGraph};
use crate::model::{join_path, Capacity, Machine, MachineItem, Model, Terminal};

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn machine_dot(out: &mut String, m: &Machine, parent: &str, depth: usize) {
    let path = join_path(parent, &m.id);
    let pad = "  ".repeat(depth);
    writeln!(out, "{pad}subgraph {} {{", esc(&format!("cluster_{path}"))).unwrap();
    let title = m.label.as_deref().unwrap_or(&m.id);
    writeln!(out, "{pad}  label={};", esc(title)).unwrap();
    for item in &m.items {
        match item {
            MachineItem::Stage(s) => {
                let mut label = format!("{}\n{}", s.id, s.kind.keyword());
                match s.terminal {
                    Terminal::Sink => label.push_str(" (sink)"),
                    Terminal::Drop => label.push_str(" (drop)"),
                    Terminal::None => {}
                }
                let shape = if s.source { "doublecircle" } else { "ellipse" };
                writeln!(
                    out,
                    "{pad}  {} [label={}, shape={shape}];",
                    esc(&join_path(&path, &s.id)),
                    esc(&label)
                )
                .unwrap();
            }
            MachineItem::Store(s) => {
                let cap = match s.capacity {
                    Capacity::Unbounded => "unbounded".to_string(),
                    Capacity::Bounded(n) => n.to_string(),
                };
                writeln!(
                    out,
                    "{pad}  {} [label={}, shape=box];",
                    esc(&join_path(&path, &s.id)),
                    esc(&format!("{}\nstore [{cap}]", s.id))
                )
                .unwrap();
            }
            MachineItem::Machine(sub) => machine_dot(out, sub, &path, depth + 1),
        }
    }
    writeln!(out, "{pad}}}").unwrap();
}

/// Machines become `cluster_` subgraphs, stages ellipses labelled with their
/// kind, stores boxes. Flows are solid edges and triggers dashed ones.
pub fn model_to_dot(model: &Model) -> String {
    let name = if model.name.is_empty() {
        "model"
    } else {
        &model.name
    };
    let mut out = format!("digraph {} {{\n  compound=true;\n", esc(name));
    for m in &model.machines {
        machine_dot(&mut out, m, "", 1);
    }
    for f in &model.flows {
        let mut attrs = Vec::new();
        if let Some(c) = &f.condition {
            attrs.push(format!("label={}", esc(c)));
        }
        if f.overflow {
            attrs.push("color=red".to_string());
        }
        write!(out, "  {} -> {}", esc(&f.from), esc(&f.to)).unwrap();
        if !attrs.is_empty() {
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    for t in &model.triggers {
        write!(out, "  {} -> {} [style=dashed", esc(&t.from), esc(&t.to)).unwrap();
        if let Some(c) = &t.condition {
            write!(out, ", label={}", esc(c)).unwrap();
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

/// One node per event; trigger-derived edges are dashed and initial events
/// drawn with a double border.
pub fn graph_to_dot(graph: &EventGraph) -> String {
    let name = if graph.events.model.is_empty() {
        "events"
    } else {
        &graph.events.model
    };
    let initial = graph.initial();
    let mut out = format!("digraph {} {{\n", esc(name));
    for e in &graph.events.events {
        let periph = if initial.contains(&e.id.as_str()) {
            2
        } else {
            1
        };
        writeln!(
            out,
            "  {} [label={}, shape=box, peripheries={periph}];",
            esc(&e.id),
            esc(&format!("{}\n{}", e.id, e.description))
        )
        .unwrap();
    }
    for e in &graph.edges {
        let from = &graph.events.events[e.from].id;
        let to = &graph.events.events[e.to].id;
        write!(out, "  {} -> {}", esc(from), esc(to)).unwrap();
        if e.kind == EdgeKind::Trigger {
            out.push_str(" [style=dashed]");
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

/// The model with source positions removed.
pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&model.without_spans()).expect("model serializes")
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    id: &'a str,
    description: &'a str,
    region: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<u64>,
    initial: bool,
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    from: &'a str,
    to: &'a str,
    kind: EdgeKind,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    model: &'a str,
    events: Vec<JsonEvent<'a>>,
    edges: Vec<JsonEdge<'a>>,
    residue: &'a [String],
}

/// Events and edges, edges naming events by id.
pub fn graph_to_json(graph: &EventGraph) -> String {
    let initial = graph.initial();
    let events = &graph.events.events;
    let doc = JsonGraph {
        model: &graph.events.model,
        events: events
            .iter()
            .map(|e| JsonEvent {
                id: &e.id,
                description: &e.description,
                region: &e.region,
                time: e.time,
                initial: initial.contains(&e.id.as_str()),
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| JsonEdge {
                from: &events[e.from].id,
                to: &events[e.to].id,
                kind: e.kind,
            })
            .collect(),
        residue: &graph.events.residue,
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}
