use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    is_legal_flow, join_path, Capacity, EndpointKind, Machine, MachineItem, Model, ModelIndex,
    SourceSpan, StageKind, Terminal,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    #[serde(rename = "E_DUPLICATE_ID")]
    DuplicateId,
    #[serde(rename = "E_HIERARCHY")]
    Hierarchy,
    #[serde(rename = "E_UNRESOLVED")]
    Unresolved,
    #[serde(rename = "E_ADJACENCY")]
    Adjacency,
    #[serde(rename = "E_BOUNDARY")]
    Boundary,
    #[serde(rename = "E_TRIGGER_SOURCE")]
    TriggerSource,
    #[serde(rename = "E_TRIGGER_TARGET")]
    TriggerTarget,
    #[serde(rename = "E_UNDECLARED_TYPE")]
    UndeclaredType,
    #[serde(rename = "E_DUPLICATE_TYPE")]
    DuplicateType,
    #[serde(rename = "E_CAPACITY")]
    Capacity,
    #[serde(rename = "E_SOURCE_KIND")]
    SourceKind,
    #[serde(rename = "E_TERMINAL_OUTFLOW")]
    TerminalOutflow,
    #[serde(rename = "E_UNGUARDED_BRANCH")]
    UnguardedBranch,
    #[serde(rename = "E_OVERFLOW")]
    Overflow,
    #[serde(rename = "W_UNREACHABLE")]
    Unreachable,
    #[serde(rename = "W_RESIDUE")]
    Residue,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::DuplicateId => "E_DUPLICATE_ID",
            DiagnosticCode::Hierarchy => "E_HIERARCHY",
            DiagnosticCode::Unresolved => "E_UNRESOLVED",
            DiagnosticCode::Adjacency => "E_ADJACENCY",
            DiagnosticCode::Boundary => "E_BOUNDARY",
            DiagnosticCode::TriggerSource => "E_TRIGGER_SOURCE",
            DiagnosticCode::TriggerTarget => "E_TRIGGER_TARGET",
            DiagnosticCode::UndeclaredType => "E_UNDECLARED_TYPE",
            DiagnosticCode::DuplicateType => "E_DUPLICATE_TYPE",
            DiagnosticCode::Capacity => "E_CAPACITY",
            DiagnosticCode::SourceKind => "E_SOURCE_KIND",
            DiagnosticCode::TerminalOutflow => "E_TERMINAL_OUTFLOW",
            DiagnosticCode::UnguardedBranch => "E_UNGUARDED_BRANCH",
            DiagnosticCode::Overflow => "E_OVERFLOW",
            DiagnosticCode::Unreachable => "W_UNREACHABLE",
            DiagnosticCode::Residue => "W_RESIDUE",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::Unreachable | DiagnosticCode::Residue => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub path: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(
        code: DiagnosticCode,
        path: impl Into<String>,
        message: impl Into<String>,
        span: Option<&SourceSpan>,
    ) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            path: path.into(),
            message: message.into(),
            span: span.cloned(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{level}[{}] {}: {}", self.code, self.path, self.message)
    }
}

/// Checks a model against the stage semantics. Never fails; every problem
/// comes back as a diagnostic, ordered by source position.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let index = model.index();
    let mut out = Vec::new();

    check_things(model, &mut out);
    let mut seen_top = HashSet::new();
    for machine in &model.machines {
        if !seen_top.insert(machine.id.as_str()) {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicateId,
                &machine.id,
                format!("machine `{}` is declared twice at top level", machine.id),
                machine.span.as_ref(),
            ));
        }
        check_machine(machine, "", &mut Vec::new(), &mut out);
    }
    check_flows(model, &index, &mut out);
    check_triggers(model, &index, &mut out);
    check_reachability(model, &index, &mut out);

    // stable: elements without spans keep their discovery order at the end
    out.sort_by_key(|d| d.span.as_ref().map_or((1, 0, 0), |s| (0, s.line, s.column)));
    out
}

fn check_things(model: &Model, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for thing in &model.things {
        if !seen.insert(thing.name.as_str()) {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicateType,
                &thing.name,
                format!("thing type `{}` is declared twice", thing.name),
                thing.span.as_ref(),
            ));
        }
    }
}

fn check_machine<'a>(
    machine: &'a Machine,
    parent: &str,
    ancestors: &mut Vec<&'a str>,
    out: &mut Vec<Diagnostic>,
) {
    let path = join_path(parent, &machine.id);
    if ancestors.contains(&machine.id.as_str()) {
        out.push(Diagnostic::new(
            DiagnosticCode::Hierarchy,
            &path,
            format!(
                "machine `{}` repeats the id of an enclosing machine",
                machine.id
            ),
            machine.span.as_ref(),
        ));
    }
    let mut seen = HashSet::new();
    for item in &machine.items {
        let item_path = join_path(&path, item.id());
        if !seen.insert(item.id()) {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicateId,
                &item_path,
                format!("id `{}` is already used in machine `{path}`", item.id()),
                item.span(),
            ));
        }
        match item {
            MachineItem::Stage(stage) => {
                if stage.source && !matches!(stage.kind, StageKind::Create | StageKind::Transfer) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::SourceKind,
                        &item_path,
                        format!(
                            "only create and transfer stages can be sources, not {}",
                            stage.kind
                        ),
                        stage.span.as_ref(),
                    ));
                }
            }
            MachineItem::Store(store) => {
                if store.capacity == Capacity::Bounded(0) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::Capacity,
                        &item_path,
                        "bounded store capacity must be at least 1",
                        store.span.as_ref(),
                    ));
                }
            }
            MachineItem::Machine(sub) => {
                ancestors.push(&machine.id);
                check_machine(sub, &path, ancestors, out);
                ancestors.pop();
            }
        }
    }
}

fn endpoint(
    index: &ModelIndex<'_>,
    path: &str,
    owner_path: &str,
    what: &str,
    span: Option<&SourceSpan>,
    out: &mut Vec<Diagnostic>,
) -> Option<(EndpointKind, String)> {
    match index.element(path) {
        Some(e) => Some((e.kind, e.owner.clone())),
        None => {
            let reason = if index.machine(path).is_some() {
                "names a machine, not a stage or store"
            } else {
                "does not resolve"
            };
            out.push(Diagnostic::new(
                DiagnosticCode::Unresolved,
                owner_path,
                format!("{what} `{path}` {reason}"),
                span,
            ));
            None
        }
    }
}

fn check_flows(model: &Model, index: &ModelIndex<'_>, out: &mut Vec<Diagnostic>) {
    let mut overflow_seen = HashSet::new();
    for flow in &model.flows {
        let fpath = flow.path();
        let span = flow.span.as_ref();
        let from = endpoint(index, &flow.from, &fpath, "flow source", span, out);
        let to = endpoint(index, &flow.to, &fpath, "flow target", span, out);
        if let Some(ty) = &flow.thing_type {
            if model.thing(ty).is_none() {
                out.push(Diagnostic::new(
                    DiagnosticCode::UndeclaredType,
                    &fpath,
                    format!("thing type `{ty}` is not declared"),
                    span,
                ));
            }
        }
        if let (Some((fk, fowner)), Some((tk, towner))) = (&from, &to) {
            if !is_legal_flow(*fk, *tk) {
                out.push(Diagnostic::new(
                    DiagnosticCode::Adjacency,
                    &fpath,
                    format!("a {} cannot flow into a {}", fk.name(), tk.name()),
                    span,
                ));
            } else if *fk == EndpointKind::Stage(StageKind::Transfer)
                && *tk == EndpointKind::Stage(StageKind::Transfer)
                && fowner == towner
            {
                out.push(Diagnostic::new(
                    DiagnosticCode::Boundary,
                    &fpath,
                    format!(
                        "transfer to transfer must cross a machine boundary (both in `{fowner}`)"
                    ),
                    span,
                ));
            }
        }
        if flow.overflow {
            let problem = if !matches!(from, Some((EndpointKind::Store, _))) && from.is_some() {
                Some("only stores have overflow flows".to_string())
            } else if flow.condition.is_some() {
                Some("an overflow flow cannot carry a branch condition".to_string())
            } else if !overflow_seen.insert(flow.from.as_str()) {
                Some(format!(
                    "store `{}` already has an overflow flow",
                    flow.from
                ))
            } else {
                None
            };
            if let Some(message) = problem {
                out.push(Diagnostic::new(
                    DiagnosticCode::Overflow,
                    &fpath,
                    message,
                    span,
                ));
            }
        }
    }

    // Branch points and terminal stages.
    let mut outgoing: BTreeMap<&str, Vec<&super::Flow>> = BTreeMap::new();
    for flow in model.flows.iter().filter(|f| !f.overflow) {
        outgoing.entry(flow.from.as_str()).or_default().push(flow);
    }
    for element in index.elements() {
        let Some(flows) = outgoing.get(element.path.as_str()) else {
            continue;
        };
        let span = element
            .stage
            .and_then(|s| s.span.as_ref())
            .or_else(|| element.store.and_then(|s| s.span.as_ref()));
        if let Some(stage) = element.stage {
            if stage.terminal != Terminal::None {
                out.push(Diagnostic::new(
                    DiagnosticCode::TerminalOutflow,
                    &element.path,
                    "a sink or drop stage cannot have outgoing flows",
                    span,
                ));
            }
        }
        if flows.len() > 1 && flows.iter().any(|f| f.condition.is_none()) {
            out.push(Diagnostic::new(
                DiagnosticCode::UnguardedBranch,
                &element.path,
                format!(
                    "{} outgoing flows but not all carry a `when` condition",
                    flows.len()
                ),
                span,
            ));
        }
    }
}

fn check_triggers(model: &Model, index: &ModelIndex<'_>, out: &mut Vec<Diagnostic>) {
    for trigger in &model.triggers {
        let tpath = trigger.path();
        let span = trigger.span.as_ref();
        if let Some((kind, _)) = endpoint(index, &trigger.from, &tpath, "trigger source", span, out)
        {
            if kind == EndpointKind::Store {
                out.push(Diagnostic::new(
                    DiagnosticCode::TriggerSource,
                    &tpath,
                    "triggers start from a stage, not a store",
                    span,
                ));
            }
        }
        if let Some((kind, _)) = endpoint(index, &trigger.to, &tpath, "trigger target", span, out) {
            if !matches!(
                kind,
                EndpointKind::Stage(StageKind::Create) | EndpointKind::Stage(StageKind::Process)
            ) {
                out.push(Diagnostic::new(
                    DiagnosticCode::TriggerTarget,
                    &tpath,
                    format!(
                        "a trigger activates create or process stages, not a {}",
                        kind.name()
                    ),
                    span,
                ));
            }
        }
    }
}

fn check_reachability(model: &Model, index: &ModelIndex<'_>, out: &mut Vec<Diagnostic>) {
    let mut entered: HashSet<&str> = HashSet::new();
    entered.extend(model.flows.iter().map(|f| f.to.as_str()));
    entered.extend(model.triggers.iter().map(|t| t.to.as_str()));
    for element in index.elements() {
        let Some(stage) = element.stage else { continue };
        if !stage.source && !entered.contains(element.path.as_str()) {
            out.push(Diagnostic::new(
                DiagnosticCode::Unreachable,
                &element.path,
                "no incoming flow or trigger and not marked as a source",
                stage.span.as_ref(),
            ));
        }
    }
}
