use std::fmt::Write;

use thiserror::Error;

use super::lexer::quote;
use crate::model::{
    validate, Capacity, Diagnostic, Machine, MachineItem, Model, OverflowPolicy, Stage, Store,
    Terminal,
};

#[derive(Debug, Error)]
#[error("model has {} error diagnostic(s); first: {}", .0.len(), .0[0])]
pub struct SerializeError(pub Vec<Diagnostic>);

/// Canonical text for a valid model: declaration order, two-space indent,
/// one statement per line. Flows and triggers follow the machines, written
/// with absolute paths.
pub fn serialize_model(model: &Model) -> Result<String, SerializeError> {
    let errors: Vec<Diagnostic> = validate(model)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(SerializeError(errors));
    }
    Ok(write_model(model))
}

pub(crate) fn write_model(model: &Model) -> String {
    // blocks are separated by one blank line
    let mut blocks = Vec::new();
    if !model.name.is_empty() {
        blocks.push(format!("model {}\n", model.name));
    }
    if !model.things.is_empty() {
        let mut block = String::new();
        for thing in &model.things {
            let attrs: Vec<String> = thing
                .attributes
                .iter()
                .map(|(n, k)| format!("{n}: {}", k.keyword()))
                .collect();
            if attrs.is_empty() {
                writeln!(block, "thing {} {{ }}", thing.name).unwrap();
            } else {
                writeln!(block, "thing {} {{ {} }}", thing.name, attrs.join(", ")).unwrap();
            }
        }
        blocks.push(block);
    }
    for machine in &model.machines {
        let mut block = String::new();
        write_machine(&mut block, machine, 0);
        blocks.push(block);
    }
    if !(model.flows.is_empty() && model.triggers.is_empty()) {
        let mut block = String::new();
        for flow in &model.flows {
            write!(block, "flow {} -> {}", flow.from, flow.to).unwrap();
            if let Some(t) = &flow.thing_type {
                write!(block, " : {t}").unwrap();
            }
            if let Some(c) = &flow.condition {
                write!(block, " when {c}").unwrap();
            }
            if flow.overflow {
                block.push_str(" overflow");
            }
            write_tags(&mut block, &flow.tags);
            block.push('\n');
        }
        for trigger in &model.triggers {
            write!(block, "trigger {} ~> {}", trigger.from, trigger.to).unwrap();
            if let Some(c) = &trigger.condition {
                write!(block, " when {c}").unwrap();
            }
            write_tags(&mut block, &trigger.tags);
            block.push('\n');
        }
        blocks.push(block);
    }
    blocks.join("\n")
}

fn write_tags(out: &mut String, tags: &[u32]) {
    for t in tags {
        write!(out, " @{t}").unwrap();
    }
}

fn write_label(out: &mut String, label: &Option<String>) {
    if let Some(l) = label {
        out.push(' ');
        out.push_str(&quote(l));
    }
}

fn write_machine(out: &mut String, machine: &Machine, depth: usize) {
    let pad = "  ".repeat(depth);
    write!(out, "{pad}machine {}", machine.id).unwrap();
    write_tags(out, &machine.tags);
    write_label(out, &machine.label);
    out.push_str(" {\n");
    for item in &machine.items {
        match item {
            MachineItem::Stage(s) => write_stage(out, s, depth + 1),
            MachineItem::Store(s) => write_store(out, s, depth + 1),
            MachineItem::Machine(m) => write_machine(out, m, depth + 1),
        }
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn write_stage(out: &mut String, stage: &Stage, depth: usize) {
    write!(
        out,
        "{}stage {} {}",
        "  ".repeat(depth),
        stage.kind,
        stage.id
    )
    .unwrap();
    write_tags(out, &stage.tags);
    write_label(out, &stage.label);
    if stage.duration > 0 {
        write!(out, " duration {}", stage.duration).unwrap();
    }
    if stage.source {
        out.push_str(" source");
    }
    match stage.terminal {
        Terminal::None => {}
        Terminal::Sink => out.push_str(" sink"),
        Terminal::Drop => out.push_str(" drop"),
    }
    out.push('\n');
}

fn write_store(out: &mut String, store: &Store, depth: usize) {
    write!(out, "{}store {}", "  ".repeat(depth), store.id).unwrap();
    write_tags(out, &store.tags);
    write_label(out, &store.label);
    if let Capacity::Bounded(n) = store.capacity {
        write!(out, " capacity {n}").unwrap();
    }
    if store.overflow == OverflowPolicy::Block {
        out.push_str(" block");
    }
    out.push('\n');
}
