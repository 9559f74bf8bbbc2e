//! Deterministic discrete-event execution of a model.
//!
//! Things enter at source stages, dwell `duration` ticks in each stage, then
//! leave along the one outgoing flow whose guard holds. Stores are FIFO
//! queues with a single server. Triggers fire when a thing leaves their
//! source stage.

mod config;
mod engine;
mod predicate;
mod replay;
mod stats;

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Diagnostic;

pub use config::{AttrDist, PolicyName, SimConfig, SourceSpec, StoreOverride};
pub use engine::{simulate, Simulator, TRIGGER_DEPTH_LIMIT};
pub use predicate::{CmpOp, Predicate, PredicateError};
pub use replay::replay_check;
pub use stats::{stats, EventCount, Latency, SimStats};

/// An attribute value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thing {
    pub uid: u64,
    /// Declared thing type, or empty for untyped things.
    pub type_tag: String,
    pub attributes: BTreeMap<String, Value>,
    pub created_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecordKind {
    /// A source emitted a thing.
    Injected,
    /// A triggered Create stage produced a thing.
    Created,
    Fired,
    Moved,
    Stored,
    Fetched,
    Dropped,
    /// A thing left the system at a sink or a stage with no outgoing flow.
    Completed,
}

impl RecordKind {
    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Injected => "Injected",
            RecordKind::Created => "Created",
            RecordKind::Fired => "Fired",
            RecordKind::Moved => "Moved",
            RecordKind::Stored => "Stored",
            RecordKind::Fetched => "Fetched",
            RecordKind::Dropped => "Dropped",
            RecordKind::Completed => "Completed",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub tick: u64,
    pub kind: RecordKind,
    /// Element path; the flow's source for `Moved`.
    pub path: String,
    /// Flow target, for `Moved` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    /// `None` for firings caused by a trigger with no thing attached.
    pub uid: Option<u64>,
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tick, self.kind, self.path)?;
        if let Some(to) = &self.to {
            write!(f, "->{to}")?;
        }
        match self.uid {
            Some(u) => write!(f, " {u}"),
            None => f.write_str(" -"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub model: String,
    pub seed: u64,
    pub records: Vec<Record>,
    /// Things still in the system at the end, by element path.
    pub final_state: BTreeMap<String, Vec<u64>>,
    /// Tick of the last processed event.
    pub end_tick: u64,
    /// False when `max_ticks` cut the run short.
    pub quiescent: bool,
}

impl Trace {
    /// One record per line, then an `end` line and one `held` line per
    /// element still holding things.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            writeln!(out, "{r}").unwrap();
        }
        let state = if self.quiescent {
            "quiescent"
        } else {
            "nonquiescent"
        };
        writeln!(out, "end {} {state}", self.end_tick).unwrap();
        for (path, uids) in &self.final_state {
            let uids: Vec<String> = uids.iter().map(u64::to_string).collect();
            writeln!(out, "held {path} {}", uids.join(" ")).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.quiescent {
            Vec::new()
        } else {
            let held: usize = self.final_state.values().map(Vec::len).sum();
            vec![format!(
                "NonQuiescent: stopped at tick {} with {held} thing(s) in flight and work pending",
                self.end_tick
            )]
        }
    }

    pub fn count(&self, kind: RecordKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("model has errors: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Diagnostic>),
    #[error("config: {0}")]
    Config(String),
    #[error("no handler for condition `{0}`")]
    HandlerMissing(String),
    #[error("handler `{name}`: {error}")]
    Handler { name: String, error: PredicateError },
    #[error("AmbiguousBranch at {path}: {holding} condition(s) hold for thing {uid}")]
    AmbiguousBranch {
        path: String,
        uid: u64,
        holding: usize,
    },
    #[error("no outgoing flow of {path} accepts thing {uid} of type `{type_tag}`")]
    NoRoute {
        path: String,
        uid: u64,
        type_tag: String,
    },
    #[error("trigger cascade from {0} exceeds the depth limit")]
    TriggerDepth(String),
    #[error("trace is from model `{trace}` but events are from `{events}`")]
    ModelMismatch { trace: String, events: String },
}
