//! Static thinging-machine diagrams.
//!
//! A [`Model`] is a forest of [`Machine`]s. Each machine owns an ordered list
//! of items (stages, stores and nested machines); flows and triggers live at
//! model level and refer to elements by absolute dotted path.

mod adjacency;
mod index;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use adjacency::{is_legal_flow, legal_pairs, EndpointKind};
pub use index::{resolve, ElementInfo, ElementRef, ModelIndex, NotFound};
pub use validate::{validate, Diagnostic, DiagnosticCode, Severity};

/// Position of an element in its source text.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            file: file.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// The five generic stages of a thinging machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [
        StageKind::Create,
        StageKind::Process,
        StageKind::Release,
        StageKind::Transfer,
        StageKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            StageKind::Create => "create",
            StageKind::Process => "process",
            StageKind::Release => "release",
            StageKind::Transfer => "transfer",
            StageKind::Receive => "receive",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        StageKind::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Gerund used for elementary event descriptions.
    pub fn gerund(self) -> &'static str {
        match self {
            StageKind::Create => "creating",
            StageKind::Process => "processing",
            StageKind::Release => "releasing",
            StageKind::Transfer => "transferring",
            StageKind::Receive => "receiving",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// How a stage ends the life of a thing that has no outgoing flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    /// Not annotated; a stage without outgoing flows still completes things.
    #[default]
    None,
    /// Explicit exit: things leaving here count as completed.
    Sink,
    /// Things leaving here are discarded.
    Drop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub id: String,
    pub kind: StageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Step numbers (`@n`) used to cite a source diagram. No semantics.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    /// Dwell time in ticks.
    #[serde(default)]
    pub duration: u64,
    /// Entry point for simulation sources.
    #[serde(default)]
    pub source: bool,
    #[serde(default)]
    pub terminal: Terminal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Stage {
    pub fn new(id: impl Into<String>, kind: StageKind) -> Self {
        Stage {
            id: id.into(),
            kind,
            label: None,
            tags: Vec::new(),
            duration: 0,
            source: false,
            terminal: Terminal::None,
            span: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capacity {
    #[default]
    Unbounded,
    Bounded(u64),
}

impl Capacity {
    pub fn admits(self, held: usize) -> bool {
        match self {
            Capacity::Unbounded => true,
            Capacity::Bounded(n) => (held as u64) < n,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverflowPolicy {
    #[default]
    Drop,
    Block,
}

/// FIFO holder attached to flows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Store {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    #[serde(default)]
    pub capacity: Capacity,
    #[serde(default)]
    pub overflow: OverflowPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Store {
    pub fn new(id: impl Into<String>) -> Self {
        Store {
            id: id.into(),
            label: None,
            tags: Vec::new(),
            capacity: Capacity::Unbounded,
            overflow: OverflowPolicy::Drop,
            span: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "lowercase")]
pub enum MachineItem {
    Stage(Stage),
    Store(Store),
    Machine(Machine),
}

impl MachineItem {
    pub fn id(&self) -> &str {
        match self {
            MachineItem::Stage(s) => &s.id,
            MachineItem::Store(s) => &s.id,
            MachineItem::Machine(m) => &m.id,
        }
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            MachineItem::Stage(s) => s.span.as_ref(),
            MachineItem::Store(s) => s.span.as_ref(),
            MachineItem::Machine(m) => m.span.as_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Machine {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    /// Stages, stores and submachines in declaration order.
    pub items: Vec<MachineItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Machine {
    pub fn new(id: impl Into<String>) -> Self {
        Machine {
            id: id.into(),
            label: None,
            tags: Vec::new(),
            items: Vec::new(),
            span: None,
        }
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.items.push(MachineItem::Stage(stage));
        self
    }

    pub fn with_store(mut self, store: Store) -> Self {
        self.items.push(MachineItem::Store(store));
        self
    }

    pub fn with_machine(mut self, machine: Machine) -> Self {
        self.items.push(MachineItem::Machine(machine));
        self
    }

    pub fn stages(&self) -> impl Iterator<Item = &Stage> {
        self.items.iter().filter_map(|i| match i {
            MachineItem::Stage(s) => Some(s),
            _ => None,
        })
    }

    pub fn stores(&self) -> impl Iterator<Item = &Store> {
        self.items.iter().filter_map(|i| match i {
            MachineItem::Store(s) => Some(s),
            _ => None,
        })
    }

    pub fn submachines(&self) -> impl Iterator<Item = &Machine> {
        self.items.iter().filter_map(|i| match i {
            MachineItem::Machine(m) => Some(m),
            _ => None,
        })
    }
}

/// Solid-arrow movement of a thing between two elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thing_type: Option<String>,
    /// Branch condition, resolved to a handler at simulation time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    /// Taken by arrivals that find the source store full.
    #[serde(default)]
    pub overflow: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Flow {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Flow {
            from: from.into(),
            to: to.into(),
            thing_type: None,
            condition: None,
            overflow: false,
            tags: Vec::new(),
            span: None,
        }
    }

    /// `from -> to`, the path under which diagnostics cite this flow.
    pub fn path(&self) -> String {
        format!("{} -> {}", self.from, self.to)
    }
}

/// Dashed-arrow activation; carries no thing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Trigger {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Trigger {
            from: from.into(),
            to: to.into(),
            condition: None,
            tags: Vec::new(),
            span: None,
        }
    }

    pub fn path(&self) -> String {
        format!("{} ~> {}", self.from, self.to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Int,
    Text,
    Bool,
}

impl AttrKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AttrKind::Int => "int",
            AttrKind::Text => "text",
            AttrKind::Bool => "bool",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "int" => Some(AttrKind::Int),
            "text" => Some(AttrKind::Text),
            "bool" => Some(AttrKind::Bool),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThingType {
    pub name: String,
    pub attributes: Vec<(String, AttrKind)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl ThingType {
    pub fn attribute(&self, name: &str) -> Option<AttrKind> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub things: Vec<ThingType>,
    pub machines: Vec<Machine>,
    pub flows: Vec<Flow>,
    pub triggers: Vec<Trigger>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Model::default()
        }
    }

    pub fn thing(&self, name: &str) -> Option<&ThingType> {
        self.things.iter().find(|t| t.name == name)
    }

    pub fn index(&self) -> ModelIndex<'_> {
        ModelIndex::build(self)
    }

    /// Copy with every span removed; structural equality compares these.
    pub fn without_spans(&self) -> Model {
        fn strip(machine: &mut Machine) {
            machine.span = None;
            for item in &mut machine.items {
                match item {
                    MachineItem::Stage(s) => s.span = None,
                    MachineItem::Store(s) => s.span = None,
                    MachineItem::Machine(m) => strip(m),
                }
            }
        }
        let mut out = self.clone();
        out.things.iter_mut().for_each(|t| t.span = None);
        out.machines.iter_mut().for_each(strip);
        out.flows.iter_mut().for_each(|f| f.span = None);
        out.triggers.iter_mut().for_each(|t| t.span = None);
        out
    }

    pub fn structurally_eq(&self, other: &Model) -> bool {
        self.without_spans() == other.without_spans()
    }
}

/// Joins a parent path and a child id.
pub fn join_path(parent: &str, id: &str) -> String {
    if parent.is_empty() {
        id.to_string()
    } else {
        format!("{parent}.{id}")
    }
}

/// Parent machine path of a dotted element path (`a.b.c` -> `a.b`).
pub fn parent_path(path: &str) -> &str {
    path.rsplit_once('.').map_or("", |(p, _)| p)
}
