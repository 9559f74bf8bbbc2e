use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use super::predicate::Predicate;
use super::{Record, RecordKind, SimError, Thing, Trace, Value};
use crate::model::{
    validate, AttrKind, Capacity, Flow, Model, OverflowPolicy, Stage, StageKind, Terminal, Trigger,
};

/// Longest chain of thingless trigger firings allowed within one departure.
pub const TRIGGER_DEPTH_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug)]
struct StoreRule {
    capacity: Capacity,
    policy: OverflowPolicy,
}

/// A model and config checked and indexed for repeated runs.
pub struct Simulator<'m> {
    model: &'m Model,
    config: SimConfig,
    stages: HashMap<String, &'m Stage>,
    stores: HashMap<String, StoreRule>,
    /// Outgoing flows per element, overflow flows excluded, in model order.
    out_flows: HashMap<String, Vec<&'m Flow>>,
    overflow: HashMap<String, &'m Flow>,
    triggers: HashMap<String, Vec<&'m Trigger>>,
    handlers: HashMap<String, Predicate>,
    /// Thing type emitted by each configured source.
    source_types: Vec<String>,
}

/// Runs `model` under `config` with the config's own seed.
pub fn simulate(model: &Model, config: &SimConfig) -> Result<Trace, SimError> {
    Simulator::new(model, config)?.run(config.seed)
}

fn default_value(kind: AttrKind) -> Value {
    match kind {
        AttrKind::Int => Value::Int(0),
        AttrKind::Text => Value::Text(String::new()),
        AttrKind::Bool => Value::Bool(false),
    }
}

fn value_kind(v: &Value) -> AttrKind {
    match v {
        Value::Int(_) => AttrKind::Int,
        Value::Text(_) => AttrKind::Text,
        Value::Bool(_) => AttrKind::Bool,
    }
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m Model, config: &SimConfig) -> Result<Self, SimError> {
        let errors: Vec<_> = validate(model)
            .into_iter()
            .filter(|d| d.is_error())
            .collect();
        if !errors.is_empty() {
            return Err(SimError::InvalidModel(errors));
        }
        if config.max_ticks == 0 {
            return Err(SimError::Config("max_ticks must be positive".into()));
        }
        let index = model.index();
        let mut stages = HashMap::new();
        let mut stores = HashMap::new();
        for e in index.elements() {
            if let Some(s) = e.stage {
                stages.entry(e.path.clone()).or_insert(s);
            }
            if let Some(s) = e.store {
                stores.entry(e.path.clone()).or_insert(StoreRule {
                    capacity: s.capacity,
                    policy: s.overflow,
                });
            }
        }
        for (path, o) in &config.stores {
            let rule = stores
                .get_mut(path)
                .ok_or_else(|| SimError::Config(format!("`{path}` is not a store of the model")))?;
            if let Some(c) = o.capacity {
                rule.capacity = if c == 0 {
                    Capacity::Unbounded
                } else {
                    Capacity::Bounded(c)
                };
            }
            if let Some(p) = o.policy {
                rule.policy = p.into();
            }
        }

        let mut out_flows: HashMap<String, Vec<&Flow>> = HashMap::new();
        let mut overflow = HashMap::new();
        for f in &model.flows {
            if f.overflow {
                overflow.insert(f.from.clone(), f);
            } else {
                out_flows.entry(f.from.clone()).or_default().push(f);
            }
        }
        let mut triggers: HashMap<String, Vec<&Trigger>> = HashMap::new();
        for t in &model.triggers {
            triggers.entry(t.from.clone()).or_default().push(t);
        }

        let mut handlers = HashMap::new();
        for (name, text) in &config.handlers {
            let p = Predicate::parse(text).map_err(|error| SimError::Handler {
                name: name.clone(),
                error,
            })?;
            handlers.insert(name.clone(), p);
        }
        let conditions = model
            .flows
            .iter()
            .filter_map(|f| f.condition.as_ref())
            .chain(model.triggers.iter().filter_map(|t| t.condition.as_ref()));
        for c in conditions {
            if !handlers.contains_key(c) {
                return Err(SimError::HandlerMissing(c.clone()));
            }
        }

        let mut source_types = Vec::new();
        for src in &config.sources {
            let stage = stages.get(&src.stage).ok_or_else(|| {
                SimError::Config(format!("source `{}` is not a stage", src.stage))
            })?;
            if !stage.source || !matches!(stage.kind, StageKind::Create | StageKind::Transfer) {
                return Err(SimError::Config(format!(
                    "source `{}` must be a create or transfer stage marked `source`",
                    src.stage
                )));
            }
            let type_tag = match &src.thing {
                Some(t) => t.clone(),
                None => out_flows
                    .get(&src.stage)
                    .and_then(|fs| fs.iter().find_map(|f| f.thing_type.clone()))
                    .unwrap_or_default(),
            };
            let schema = if type_tag.is_empty() {
                None
            } else {
                Some(model.thing(&type_tag).ok_or_else(|| {
                    SimError::Config(format!("thing type `{type_tag}` is not declared"))
                })?)
            };
            for (attr, dist) in &src.attributes {
                dist.check(attr)?;
                if let Some(schema) = schema {
                    let declared = schema.attribute(attr).ok_or_else(|| {
                        SimError::Config(format!("thing `{type_tag}` has no attribute `{attr}`"))
                    })?;
                    if declared != value_kind(&dist.sample_kind()) {
                        return Err(SimError::Config(format!(
                            "attribute `{attr}` of `{type_tag}` is {}",
                            declared.keyword()
                        )));
                    }
                }
            }
            source_types.push(type_tag);
        }

        Ok(Simulator {
            model,
            config: config.clone(),
            stages,
            stores,
            out_flows,
            overflow,
            triggers,
            handlers,
            source_types,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Runs once with `seed`, ignoring the seed in the config.
    pub fn run(&self, seed: u64) -> Result<Trace, SimError> {
        let mut run = Run {
            sim: self,
            tick: 0,
            seq: 0,
            heap: BinaryHeap::new(),
            things: HashMap::new(),
            pos: BTreeMap::new(),
            queues: HashMap::new(),
            blocked: HashMap::new(),
            busy: HashMap::new(),
            serving: HashMap::new(),
            records: Vec::new(),
            next_uid: 1,
        };
        run.generate(seed);
        let quiescent = run.execute()?;
        let mut final_state: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for (uid, path) in &run.pos {
            final_state.entry(path.clone()).or_default().push(*uid);
        }
        Ok(Trace {
            model: self.model.name.clone(),
            seed,
            records: run.records,
            final_state,
            end_tick: run.tick,
            quiescent,
        })
    }

    fn defaults_for(&self, type_tag: &str) -> BTreeMap<String, Value> {
        self.model
            .thing(type_tag)
            .map(|t| {
                t.attributes
                    .iter()
                    .map(|(n, k)| (n.clone(), default_value(*k)))
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ev {
    Inject { uid: u64, stage: String },
    Depart { uid: u64, stage: String },
    Fetch { store: String },
}

struct Run<'s, 'm> {
    sim: &'s Simulator<'m>,
    tick: u64,
    seq: u64,
    heap: BinaryHeap<Reverse<(u64, u64, Ev)>>,
    things: HashMap<u64, Thing>,
    /// Current element of every thing in the system.
    pos: BTreeMap<u64, String>,
    queues: HashMap<String, VecDeque<u64>>,
    /// Things waiting for room in a Block-policy store, with the stage they wait at.
    blocked: HashMap<String, VecDeque<(u64, String)>>,
    /// Thing each store is currently serving.
    busy: HashMap<String, u64>,
    /// Store each served thing came from, until it leaves its first stage.
    serving: HashMap<u64, String>,
    records: Vec<Record>,
    next_uid: u64,
}

impl<'m> Run<'_, 'm> {
    fn schedule(&mut self, at: u64, ev: Ev) {
        self.heap.push(Reverse((at, self.seq, ev)));
        self.seq += 1;
    }

    fn record(&mut self, kind: RecordKind, path: &str, uid: Option<u64>) {
        self.records.push(Record {
            tick: self.tick,
            kind,
            path: path.to_string(),
            to: None,
            uid,
        });
    }

    fn record_move(&mut self, from: &str, to: &str, uid: u64) {
        self.records.push(Record {
            tick: self.tick,
            kind: RecordKind::Moved,
            path: from.to_string(),
            to: Some(to.to_string()),
            uid: Some(uid),
        });
    }

    /// Draws every source thing up front: source order, then thing index,
    /// then attribute name.
    fn generate(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sim = self.sim;
        for (src, type_tag) in sim.config.sources.iter().zip(&sim.source_types) {
            for k in 0..src.count {
                let mut attributes = sim.defaults_for(type_tag);
                for (name, dist) in &src.attributes {
                    attributes.insert(name.clone(), dist.draw(k, &mut rng));
                }
                let uid = self.next_uid;
                self.next_uid += 1;
                let at = src.start + k * src.interarrival;
                self.things.insert(
                    uid,
                    Thing {
                        uid,
                        type_tag: type_tag.clone(),
                        attributes,
                        created_at: at,
                    },
                );
                self.schedule(
                    at,
                    Ev::Inject {
                        uid,
                        stage: src.stage.clone(),
                    },
                );
            }
        }
    }

    /// Processes events until none remain (true) or the next one lies past
    /// `max_ticks` (false).
    fn execute(&mut self) -> Result<bool, SimError> {
        while let Some(Reverse((at, _, ev))) = self.heap.pop() {
            if at > self.sim.config.max_ticks {
                return Ok(false);
            }
            self.tick = at;
            match ev {
                Ev::Inject { uid, stage } => {
                    self.record(RecordKind::Injected, &stage, Some(uid));
                    self.enter(uid, &stage);
                }
                Ev::Depart { uid, stage } => self.depart(uid, &stage)?,
                Ev::Fetch { store } => self.fetch(&store)?,
            }
        }
        Ok(true)
    }

    fn enter(&mut self, uid: u64, stage: &str) {
        self.pos.insert(uid, stage.to_string());
        self.record(RecordKind::Fired, stage, Some(uid));
        let duration = self.sim.stages[stage].duration;
        self.schedule(
            self.tick + duration,
            Ev::Depart {
                uid,
                stage: stage.to_string(),
            },
        );
    }

    fn finish(&mut self, kind: RecordKind, path: &str, uid: u64) {
        self.record(kind, path, Some(uid));
        self.pos.remove(&uid);
    }

    fn depart(&mut self, uid: u64, stage: &str) -> Result<(), SimError> {
        let sim = self.sim;
        let st = sim.stages[stage];
        let has_out = sim.out_flows.get(stage).is_some_and(|f| !f.is_empty());
        match st.terminal {
            Terminal::Drop => self.finish(RecordKind::Dropped, stage, uid),
            Terminal::Sink => self.finish(RecordKind::Completed, stage, uid),
            Terminal::None if !has_out => self.finish(RecordKind::Completed, stage, uid),
            Terminal::None => {
                let flow = self.choose(stage, uid)?;
                self.follow(uid, flow);
            }
        }
        if let Some(store) = self.serving.remove(&uid) {
            self.busy.remove(&store);
            self.schedule(self.tick, Ev::Fetch { store });
        }
        self.fire_triggers(stage, Some(uid), 0)
    }

    /// The single outgoing flow of `from` that takes thing `uid`.
    fn choose(&self, from: &str, uid: u64) -> Result<&'m Flow, SimError> {
        let sim = self.sim;
        let thing = &self.things[&uid];
        let candidates: Vec<&Flow> = sim.out_flows[from]
            .iter()
            .copied()
            .filter(|f| f.thing_type.as_deref().is_none_or(|t| t == thing.type_tag))
            .collect();
        match candidates.as_slice() {
            [] => Err(SimError::NoRoute {
                path: from.to_string(),
                uid,
                type_tag: thing.type_tag.clone(),
            }),
            [only] if only.condition.is_none() => Ok(only),
            _ => {
                let mut holding = Vec::new();
                for f in &candidates {
                    let ok = match &f.condition {
                        None => true,
                        Some(c) => self.holds(c, thing)?,
                    };
                    if ok {
                        holding.push(*f);
                    }
                }
                if holding.len() == 1 {
                    Ok(holding[0])
                } else {
                    Err(SimError::AmbiguousBranch {
                        path: from.to_string(),
                        uid,
                        holding: holding.len(),
                    })
                }
            }
        }
    }

    fn holds(&self, condition: &str, thing: &Thing) -> Result<bool, SimError> {
        self.sim.handlers[condition]
            .eval(&thing.attributes)
            .map_err(|error| SimError::Handler {
                name: condition.to_string(),
                error,
            })
    }

    fn follow(&mut self, uid: u64, flow: &'m Flow) {
        if self.sim.stores.contains_key(&flow.to) {
            self.admit(uid, &flow.from, &flow.to);
        } else {
            self.record_move(&flow.from, &flow.to, uid);
            self.enter(uid, &flow.to);
        }
    }

    fn admit(&mut self, uid: u64, from: &str, store: &str) {
        let sim = self.sim;
        let rule = sim.stores[store];
        let held = self.queues.get(store).map_or(0, VecDeque::len);
        if rule.capacity.admits(held) {
            self.record_move(from, store, uid);
            self.store(uid, store);
            return;
        }
        match rule.policy {
            OverflowPolicy::Block => {
                self.blocked
                    .entry(store.to_string())
                    .or_default()
                    .push_back((uid, from.to_string()));
            }
            OverflowPolicy::Drop => {
                self.record_move(from, store, uid);
                match sim.overflow.get(store).copied() {
                    Some(f) => {
                        self.record_move(store, &f.to, uid);
                        self.enter(uid, &f.to);
                    }
                    None => self.finish(RecordKind::Dropped, store, uid),
                }
            }
        }
    }

    fn store(&mut self, uid: u64, store: &str) {
        self.pos.insert(uid, store.to_string());
        self.record(RecordKind::Stored, store, Some(uid));
        self.queues
            .entry(store.to_string())
            .or_default()
            .push_back(uid);
        if !self.busy.contains_key(store) {
            self.schedule(
                self.tick,
                Ev::Fetch {
                    store: store.to_string(),
                },
            );
        }
    }

    fn fetch(&mut self, store: &str) -> Result<(), SimError> {
        if self.busy.contains_key(store) {
            return Ok(());
        }
        let Some(uid) = self.queues.get_mut(store).and_then(VecDeque::pop_front) else {
            return Ok(());
        };
        self.record(RecordKind::Fetched, store, Some(uid));
        if let Some((waiting, from)) = self.blocked.get_mut(store).and_then(VecDeque::pop_front) {
            self.record_move(&from, store, waiting);
            self.store(waiting, store);
        }
        let has_out = self.sim.out_flows.get(store).is_some_and(|f| !f.is_empty());
        if !has_out {
            self.finish(RecordKind::Completed, store, uid);
            self.schedule(
                self.tick,
                Ev::Fetch {
                    store: store.to_string(),
                },
            );
            return Ok(());
        }
        let flow = self.choose(store, uid)?;
        self.busy.insert(store.to_string(), uid);
        self.serving.insert(uid, store.to_string());
        self.follow(uid, flow);
        Ok(())
    }

    fn fire_triggers(
        &mut self,
        stage: &str,
        cause: Option<u64>,
        depth: usize,
    ) -> Result<(), SimError> {
        if depth > TRIGGER_DEPTH_LIMIT {
            return Err(SimError::TriggerDepth(stage.to_string()));
        }
        let sim = self.sim;
        let Some(triggers) = sim.triggers.get(stage) else {
            return Ok(());
        };
        for t in triggers {
            if let Some(c) = &t.condition {
                let Some(uid) = cause else { continue };
                if !self.holds(c, &self.things[&uid])? {
                    continue;
                }
            }
            let target = sim.stages[&t.to];
            let makes_thing = target.kind == StageKind::Create
                && sim.out_flows.get(&t.to).is_some_and(|f| !f.is_empty());
            if makes_thing {
                self.create(&t.to, cause);
            } else {
                self.record(RecordKind::Fired, &t.to, None);
                self.fire_triggers(&t.to, None, depth + 1)?;
            }
        }
        Ok(())
    }

    /// A triggered Create stage produces a thing of its outgoing flow's type.
    /// Attributes are copied from the causing thing when the types agree.
    fn create(&mut self, stage: &str, cause: Option<u64>) {
        let sim = self.sim;
        let cause = cause.map(|u| &self.things[&u]);
        let flow_type = sim.out_flows[stage]
            .iter()
            .find_map(|f| f.thing_type.clone());
        let type_tag = flow_type
            .or_else(|| cause.map(|c| c.type_tag.clone()))
            .unwrap_or_default();
        let attributes = match cause {
            Some(c) if c.type_tag == type_tag => c.attributes.clone(),
            _ => sim.defaults_for(&type_tag),
        };
        let uid = self.next_uid;
        self.next_uid += 1;
        self.things.insert(
            uid,
            Thing {
                uid,
                type_tag,
                attributes,
                created_at: self.tick,
            },
        );
        self.record(RecordKind::Created, stage, Some(uid));
        self.enter(uid, stage);
    }
}
