use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{RecordKind, SimError, Trace};
use crate::events::EventSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventCount {
    pub id: String,
    pub count: u64,
}

/// Ticks from entering the system to completion, over completed things.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub min: u64,
    pub mean: f64,
    pub max: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    /// `Fired` records per stage and `Stored` records per store.
    pub firings: BTreeMap<String, u64>,
    /// Activations per event, when an event set was given.
    pub events: Vec<EventCount>,
    pub injected: u64,
    pub created: u64,
    pub completed: u64,
    pub dropped: u64,
    pub in_flight: u64,
    pub latency: Option<Latency>,
}

impl SimStats {
    /// Every thing that entered is accounted for.
    pub fn conserved(&self) -> bool {
        self.injected + self.created == self.completed + self.dropped + self.in_flight
    }

    pub fn summary(&self) -> String {
        let mut line = format!(
            "injected={} created={} completions={} drops={} in_flight={}",
            self.injected, self.created, self.completed, self.dropped, self.in_flight
        );
        if let Some(l) = &self.latency {
            line.push_str(&format!(" latency={}/{:.2}/{}", l.min, l.mean, l.max));
        }
        line
    }
}

/// Counts over `trace`. An event is counted each time a thing enters its
/// region from outside it; firings with no thing always count.
pub fn stats(trace: &Trace, events: Option<&EventSet>) -> Result<SimStats, SimError> {
    if let Some(ev) = events {
        if ev.model != trace.model {
            return Err(SimError::ModelMismatch {
                trace: trace.model.clone(),
                events: ev.model.clone(),
            });
        }
    }
    let owners = events.map(EventSet::owners).unwrap_or_default();
    let mut per_event = vec![0u64; events.map_or(0, |e| e.events.len())];
    let mut out = SimStats::default();
    let mut entered_at: HashMap<u64, u64> = HashMap::new();
    let mut last_event: HashMap<u64, Option<usize>> = HashMap::new();
    let mut latencies = Vec::new();

    for r in &trace.records {
        match r.kind {
            RecordKind::Injected | RecordKind::Created => {
                if r.kind == RecordKind::Injected {
                    out.injected += 1;
                } else {
                    out.created += 1;
                }
                if let Some(u) = r.uid {
                    entered_at.insert(u, r.tick);
                }
            }
            RecordKind::Fired | RecordKind::Stored => {
                *out.firings.entry(r.path.clone()).or_default() += 1;
                let here = owners.get(r.path.as_str()).copied();
                let counts = match r.uid {
                    None => true,
                    Some(u) => last_event.insert(u, here).flatten() != here,
                };
                if let (true, Some(i)) = (counts, here) {
                    per_event[i] += 1;
                }
            }
            RecordKind::Completed => {
                out.completed += 1;
                if let Some(start) = r.uid.and_then(|u| entered_at.get(&u)) {
                    latencies.push(r.tick - start);
                }
            }
            RecordKind::Dropped => out.dropped += 1,
            RecordKind::Moved | RecordKind::Fetched => {}
        }
    }
    out.in_flight = trace.final_state.values().map(|v| v.len() as u64).sum();
    if let Some(ev) = events {
        out.events = ev
            .events
            .iter()
            .zip(per_event)
            .map(|(e, count)| EventCount {
                id: e.id.clone(),
                count,
            })
            .collect();
    }
    if !latencies.is_empty() {
        let sum: u64 = latencies.iter().sum();
        out.latency = Some(Latency {
            min: *latencies.iter().min().unwrap(),
            mean: sum as f64 / latencies.len() as f64,
            max: *latencies.iter().max().unwrap(),
        });
    }
    Ok(out)
}
