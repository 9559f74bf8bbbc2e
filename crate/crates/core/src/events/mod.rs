//! Events over a model: elementary events (one per stage or store), merging
//! them into coarser events, and the chronology graph between events.
//!
//! An event's region is a set of stage/store paths. Flows belong to the event
//! that owns their source element, so they never appear in regions.

mod graph;
mod grouping;

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Diagnostic, DiagnosticCode, EndpointKind, Model};

pub use graph::{chronology, coarsen_preserves_order, Edge, EdgeKind, EventGraph};
pub use grouping::{parse_grouping, parse_grouping_named, Group, Grouping};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub description: String,
    /// Element paths in declaration order.
    pub region: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSet {
    /// Name of the model the events were extracted from.
    pub model: String,
    pub events: Vec<Event>,
    /// Elements that belong to no event.
    pub residue: Vec<String>,
    /// Every covered element in declaration order.
    #[serde(skip)]
    declared: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("path `{0}` appears in more than one group")]
    Overlap(String),
    #[error("path `{0}` is not a stage or store of the model")]
    UnknownPath(String),
    #[error("event id `{0}` is used twice")]
    DuplicateId(String),
    #[error("event `{0}` has an empty region")]
    EmptyRegion(String),
    #[error("regions and residue do not partition the model's elements: {0}")]
    NotAPartition(String),
    #[error("event sets belong to different models (`{0}` vs `{1}`)")]
    ModelMismatch(String, String),
    #[error("event `{0}` is not contained in a single coarse event")]
    NotARefinement(String),
}

/// Result of [`merge_events`]: the coarse set plus residue warnings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Merged {
    pub events: EventSet,
    pub warnings: Vec<Diagnostic>,
}

impl EventSet {
    /// Builds a set from explicit events; element order is taken from the
    /// regions as listed, then the residue.
    pub fn new(model: impl Into<String>, events: Vec<Event>, residue: Vec<String>) -> Self {
        let mut set = EventSet {
            model: model.into(),
            events,
            residue,
            declared: Vec::new(),
        };
        set.declared = set.scan_order();
        set
    }

    fn scan_order(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.events
            .iter()
            .flat_map(|e| e.region.iter())
            .chain(self.residue.iter())
            .filter(|p| seen.insert(p.as_str()))
            .cloned()
            .collect()
    }

    /// Every element covered by this set, in declaration order.
    pub fn elements(&self) -> Vec<&str> {
        if self.declared.is_empty() {
            // deserialized sets carry no order; fall back to listing order
            return self.scan_order_refs();
        }
        self.declared.iter().map(String::as_str).collect()
    }

    fn scan_order_refs(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.events
            .iter()
            .flat_map(|e| e.region.iter())
            .chain(self.residue.iter())
            .map(String::as_str)
            .filter(|p| seen.insert(*p))
            .collect()
    }

    /// Position of each element in declaration order.
    fn element_order(&self) -> HashMap<&str, usize> {
        self.elements()
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.events.iter().position(|e| e.id == id)
    }

    /// Maps each region element to the index of its event.
    pub fn owners(&self) -> HashMap<&str, usize> {
        let mut out = HashMap::new();
        for (i, e) in self.events.iter().enumerate() {
            for p in &e.region {
                out.insert(p.as_str(), i);
            }
        }
        out
    }

    /// Checks that regions and residue partition the model's stages and stores.
    pub fn check_partition(&self, model: &Model) -> Result<(), EventError> {
        let index = model.index();
        let expected: HashSet<&str> = index.elements().iter().map(|e| e.path.as_str()).collect();
        let mut seen = HashSet::new();
        for p in self
            .events
            .iter()
            .flat_map(|e| e.region.iter())
            .chain(self.residue.iter())
        {
            if !expected.contains(p.as_str()) {
                return Err(EventError::UnknownPath(p.clone()));
            }
            if !seen.insert(p.as_str()) {
                return Err(EventError::Overlap(p.clone()));
            }
        }
        if let Some(missing) = expected.iter().find(|p| !seen.contains(*p)) {
            return Err(EventError::NotAPartition(format!(
                "`{missing}` is not covered"
            )));
        }
        Ok(())
    }

    /// One line per event: id, padded, then the description.
    pub fn to_text(&self) -> String {
        let width = self.events.iter().map(|e| e.id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for e in &self.events {
            writeln!(out, "{:<width$}  {}", e.id, e.description).unwrap();
        }
        out
    }

    /// Like [`EventSet::to_text`], with each event's region listed below it.
    pub fn to_text_with_regions(&self) -> String {
        let width = self.events.iter().map(|e| e.id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for e in &self.events {
            writeln!(out, "{:<width$}  {}", e.id, e.description).unwrap();
            for p in &e.region {
                writeln!(out, "{:<width$}    {p}", "").unwrap();
            }
        }
        if !self.residue.is_empty() {
            writeln!(out, "residue: {}", self.residue.join(", ")).unwrap();
        }
        out
    }
}

/// One event per stage and per store, named by path, in declaration order.
pub fn elementary_events(model: &Model) -> EventSet {
    let index = model.index();
    let mut seen = HashSet::new();
    let events = index
        .elements()
        .iter()
        .filter(|e| seen.insert(e.path.as_str()))
        .map(|e| {
            let verb = match e.kind {
                EndpointKind::Stage(kind) => kind.gerund(),
                EndpointKind::Store => "storing",
            };
            Event {
                id: e.path.clone(),
                description: format!("{verb} {}", e.path),
                region: vec![e.path.clone()],
                time: None,
            }
        })
        .collect();
    EventSet::new(model.name.clone(), events, Vec::new())
}

/// Merges the events of `elementary` into the groups of `grouping`.
///
/// Output events are ordered by the declaration order of their first region
/// element. Elements named by no group go to the residue, each with a
/// `W_RESIDUE` warning.
pub fn merge_events(elementary: &EventSet, grouping: &Grouping) -> Result<Merged, EventError> {
    let order = elementary.element_order();
    let mut claimed: HashSet<&str> = HashSet::new();
    let mut ids = HashSet::new();
    let mut events = Vec::with_capacity(grouping.groups.len());
    for group in &grouping.groups {
        if !ids.insert(group.id.as_str()) {
            return Err(EventError::DuplicateId(group.id.clone()));
        }
        if group.paths.is_empty() {
            return Err(EventError::EmptyRegion(group.id.clone()));
        }
        let mut region = Vec::with_capacity(group.paths.len());
        for p in &group.paths {
            if !order.contains_key(p.as_str()) {
                return Err(EventError::UnknownPath(p.clone()));
            }
            if !claimed.insert(p.as_str()) {
                return Err(EventError::Overlap(p.clone()));
            }
            region.push(p.clone());
        }
        region.sort_by_key(|p| order[p.as_str()]);
        events.push(Event {
            id: group.id.clone(),
            description: group.description.clone(),
            region,
            time: group.time,
        });
    }
    events.sort_by_key(|e| order[e.region[0].as_str()]);

    let mut residue: Vec<String> = order
        .keys()
        .filter(|p| !claimed.contains(*p))
        .map(|p| p.to_string())
        .collect();
    residue.sort_by_key(|p| order[p.as_str()]);
    let warnings = residue
        .iter()
        .map(|p| {
            Diagnostic::new(
                DiagnosticCode::Residue,
                p,
                "element belongs to no event",
                None,
            )
        })
        .collect();
    Ok(Merged {
        events: EventSet {
            model: elementary.model.clone(),
            events,
            residue,
            declared: elementary
                .elements()
                .into_iter()
                .map(String::from)
                .collect(),
        },
        warnings,
    })
}
