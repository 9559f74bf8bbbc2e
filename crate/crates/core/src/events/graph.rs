use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{EventSet, Grouping};
use crate::model::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Flow,
    Trigger,
}

impl EdgeKind {
    pub fn arrow(self) -> &'static str {
        match self {
            EdgeKind::Flow => "->",
            EdgeKind::Trigger => "~>",
        }
    }
}

/// Edge between two events, by index into [`EventGraph::events`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventGraph {
    pub events: EventSet,
    pub edges: BTreeSet<Edge>,
}

/// Lifts every flow and trigger of `model` to the events owning its
/// endpoints. Self-edges and endpoints in the residue are dropped.
pub fn chronology(model: &Model, events: &EventSet) -> EventGraph {
    let owners = events.owners();
    let links = model
        .flows
        .iter()
        .map(|f| (&f.from, &f.to, EdgeKind::Flow))
        .chain(
            model
                .triggers
                .iter()
                .map(|t| (&t.from, &t.to, EdgeKind::Trigger)),
        );
    let mut edges = BTreeSet::new();
    for (from, to, kind) in links {
        if let (Some(&a), Some(&b)) = (owners.get(from.as_str()), owners.get(to.as_str())) {
            if a != b {
                edges.insert(Edge {
                    from: a,
                    to: b,
                    kind,
                });
            }
        }
    }
    EventGraph {
        events: events.clone(),
        edges,
    }
}

impl EventGraph {
    fn index_of(&self, id: &str) -> Option<usize> {
        self.events.position(id)
    }

    /// Distinct successor ids of `id`, in event order.
    pub fn successors(&self, id: &str) -> Vec<&str> {
        let Some(i) = self.index_of(id) else {
            return Vec::new();
        };
        let targets: BTreeSet<usize> = self
            .edges
            .iter()
            .filter(|e| e.from == i)
            .map(|e| e.to)
            .collect();
        targets
            .into_iter()
            .map(|t| self.events.events[t].id.as_str())
            .collect()
    }

    pub fn out_degree(&self, id: &str) -> usize {
        self.successors(id).len()
    }

    /// Events with no incoming edge.
    pub fn initial(&self) -> Vec<&str> {
        let targets: BTreeSet<usize> = self.edges.iter().map(|e| e.to).collect();
        self.events
            .events
            .iter()
            .enumerate()
            .filter(|(i, _)| !targets.contains(i))
            .map(|(_, e)| e.id.as_str())
            .collect()
    }

    /// True if any edge, of either kind, leads from `from` to `to`.
    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges.iter().any(|e| e.from == a && e.to == b),
            _ => false,
        }
    }

    /// Maps this graph's events onto the events of `coarse` that contain
    /// them and keeps the edges between distinct coarse events. Events whose
    /// region lies outside every coarse region are dropped.
    pub fn quotient(&self, coarse: &EventSet) -> EventGraph {
        let owners = coarse.owners();
        let map: Vec<Option<usize>> = self
            .events
            .events
            .iter()
            .map(|e| {
                e.region
                    .first()
                    .and_then(|p| owners.get(p.as_str()).copied())
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| match (map[e.from], map[e.to]) {
                (Some(a), Some(b)) if a != b => Some(Edge {
                    from: a,
                    to: b,
                    kind: e.kind,
                }),
                _ => None,
            })
            .collect();
        EventGraph {
            events: coarse.clone(),
            edges,
        }
    }

    /// One line per edge, `FROM -> TO` for flows and `FROM ~> TO` for
    /// triggers, then the initial events.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            writeln!(
                out,
                "{} {} {}",
                self.events.events[e.from].id,
                e.kind.arrow(),
                self.events.events[e.to].id
            )
            .unwrap();
        }
        let initial = self.initial();
        if initial.is_empty() {
            out.push_str("initial:\n");
        } else {
            writeln!(out, "initial: {}", initial.join(", ")).unwrap();
        }
        out
    }
}

/// True iff every edge of `elementary` between elements of different groups
/// has a counterpart between those groups in `coarse`.
pub fn coarsen_preserves_order(
    elementary: &EventGraph,
    coarse: &EventGraph,
    grouping: &Grouping,
) -> bool {
    let group_of: HashMap<&str, &str> = grouping
        .groups
        .iter()
        .flat_map(|g| g.paths.iter().map(move |p| (p.as_str(), g.id.as_str())))
        .collect();
    let group = |i: usize| {
        elementary.events.events[i]
            .region
            .first()
            .and_then(|p| group_of.get(p.as_str()).copied())
    };
    elementary
        .edges
        .iter()
        .all(|e| match (group(e.from), group(e.to)) {
            (Some(a), Some(b)) if a != b => coarse.has_edge(a, b),
            _ => true,
        })
}
