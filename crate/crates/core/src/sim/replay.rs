use std::collections::{HashMap, HashSet};

use super::{RecordKind, Trace};
use crate::model::{Machine, MachineItem, Model, StageKind};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Stage(StageKind),
    Store,
}

/// Kind pairs a flow may connect. Transfer to transfer also needs the two
/// stages to sit in different machines.
fn legal(from: Kind, to: Kind) -> bool {
    use StageKind::*;
    match (from, to) {
        (_, Kind::Store) => from != Kind::Store,
        (Kind::Store, Kind::Stage(k)) => matches!(k, Process | Release),
        (Kind::Stage(a), Kind::Stage(b)) => matches!(
            (a, b),
            (Transfer, Receive)
                | (Receive, Process)
                | (Receive, Release)
                | (Process, Release)
                | (Process, Create)
                | (Create, Process)
                | (Create, Release)
                | (Release, Transfer)
                | (Transfer, Transfer)
        ),
    }
}

fn collect(machine: &Machine, prefix: &str, out: &mut HashMap<String, Kind>) {
    let base = if prefix.is_empty() {
        machine.id.clone()
    } else {
        format!("{prefix}.{}", machine.id)
    };
    for item in &machine.items {
        match item {
            MachineItem::Stage(s) => {
                out.entry(format!("{base}.{}", s.id))
                    .or_insert(Kind::Stage(s.kind));
            }
            MachineItem::Store(s) => {
                out.entry(format!("{base}.{}", s.id)).or_insert(Kind::Store);
            }
            MachineItem::Machine(m) => collect(m, &base, out),
        }
    }
}

fn parent(path: &str) -> &str {
    path.rsplit_once('.').map_or("", |(p, _)| p)
}

/// Re-walks `trace` against `model`: every move follows a model flow between
/// legally adjacent elements, each thing's records start where its last one
/// left it, nothing acts after leaving, and the final state agrees.
pub fn replay_check(model: &Model, trace: &Trace) -> bool {
    let mut kinds = HashMap::new();
    for m in &model.machines {
        collect(m, "", &mut kinds);
    }
    let flows: HashSet<(&str, &str)> = model
        .flows
        .iter()
        .map(|f| (f.from.as_str(), f.to.as_str()))
        .collect();
    let mut at: HashMap<u64, String> = HashMap::new();
    let mut gone: HashSet<u64> = HashSet::new();
    let mut last_tick = 0;

    for r in &trace.records {
        if r.tick < last_tick {
            return false;
        }
        last_tick = r.tick;
        let Some(&kind) = kinds.get(&r.path) else {
            return false;
        };
        let Some(uid) = r.uid else {
            if r.kind != RecordKind::Fired || !matches!(kind, Kind::Stage(_)) {
                return false;
            }
            continue;
        };
        if gone.contains(&uid) {
            return false;
        }
        match r.kind {
            RecordKind::Injected | RecordKind::Created => {
                if at.insert(uid, r.path.clone()).is_some() {
                    return false;
                }
            }
            RecordKind::Moved => {
                let Some(to) = &r.to else { return false };
                let Some(&to_kind) = kinds.get(to) else {
                    return false;
                };
                if at.get(&uid) != Some(&r.path) || !flows.contains(&(r.path.as_str(), to.as_str()))
                {
                    return false;
                }
                if !legal(kind, to_kind) {
                    return false;
                }
                let transfer = Kind::Stage(StageKind::Transfer);
                if kind == transfer && to_kind == transfer && parent(&r.path) == parent(to) {
                    return false;
                }
                at.insert(uid, to.clone());
            }
            RecordKind::Fired => {
                if at.get(&uid) != Some(&r.path) || kind == Kind::Store {
                    return false;
                }
            }
            RecordKind::Stored | RecordKind::Fetched => {
                if at.get(&uid) != Some(&r.path) || kind != Kind::Store {
                    return false;
                }
            }
            RecordKind::Dropped | RecordKind::Completed => {
                if at.remove(&uid).as_ref() != Some(&r.path) {
                    return false;
                }
                gone.insert(uid);
            }
        }
    }

    let held: usize = trace.final_state.values().map(Vec::len).sum();
    held == at.len()
        && trace
            .final_state
            .iter()
            .all(|(path, uids)| uids.iter().all(|u| at.get(u) == Some(path)))
}
