//! Seeded generator of valid models, plus a matching simulation config.
//!
//! Machines form a pipeline joined by transfer-to-transfer flows across
//! machine boundaries. Inside a machine, stages follow legal kind pairs and
//! may include stores and guarded two-way branches on the `x` attribute.
//! Triggers only point forward, so cascades always terminate.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thingkit::model::{
    join_path, AttrKind, Capacity, Flow, Machine, MachineItem, Model, OverflowPolicy, Stage,
    StageKind, Store, Terminal, ThingType, Trigger,
};
use thingkit::sim::SimConfig;

use StageKind::*;

struct Builder {
    rng: ChaCha8Rng,
    flows: Vec<Flow>,
    triggers: Vec<Trigger>,
    /// Stage paths in declaration order, with their kinds.
    stages: Vec<(String, StageKind)>,
}

impl Builder {
    fn stage(&mut self, m: &mut Machine, path: &str, kind: StageKind) -> String {
        let id = format!("s{}", m.items.len());
        let mut s = Stage::new(id.clone(), kind);
        s.duration = self.rng.gen_range(0..3);
        if self.rng.gen_bool(0.2) {
            s.label = Some(format!("step \"{}\"", m.items.len()));
        }
        if self.rng.gen_bool(0.2) {
            s.tags = vec![self.rng.gen_range(1..100)];
        }
        m.items.push(MachineItem::Stage(s));
        let full = join_path(path, &id);
        self.stages.push((full.clone(), kind));
        full
    }

    fn store(&mut self, m: &mut Machine, path: &str) -> String {
        let id = format!("q{}", m.items.len());
        let mut s = Store::new(id.clone());
        if self.rng.gen_bool(0.6) {
            s.capacity = Capacity::Bounded(self.rng.gen_range(1..4));
        }
        if self.rng.gen_bool(0.3) {
            s.overflow = OverflowPolicy::Block;
        }
        m.items.push(MachineItem::Store(s));
        join_path(path, &id)
    }

    fn flow(&mut self, from: &str, to: &str) {
        let mut f = Flow::new(from, to);
        if self.rng.gen_bool(0.15) {
            f.thing_type = Some("item".into());
        }
        self.flows.push(f);
    }

    fn guarded(&mut self, from: &str, to: &str, condition: &str) {
        let mut f = Flow::new(from, to);
        f.condition = Some(condition.into());
        self.flows.push(f);
    }

    /// Stages after the entry, ending on a Release when `exit` is set.
    /// Returns the last element.
    fn body(
        &mut self,
        m: &mut Machine,
        path: &str,
        mut last: (String, Option<StageKind>),
        exit: bool,
    ) -> String {
        let steps = self.rng.gen_range(0..5);
        for _ in 0..steps {
            let choices: &[&str] = match last.1 {
                Some(Receive) | Some(Create) | None => &["process", "release"],
                Some(Process) => &["create", "release", "store", "branch"],
                _ => &["release"],
            };
            let pick = *choices.choose(&mut self.rng).unwrap();
            match pick {
                "process" | "create" => {
                    let kind = if pick == "process" { Process } else { Create };
                    let s = self.stage(m, path, kind);
                    self.flow(&last.0, &s);
                    last = (s, Some(kind));
                }
                "store" => {
                    let q = self.store(m, path);
                    self.flow(&last.0, &q);
                    let kind = *[Process, Release].choose(&mut self.rng).unwrap();
                    let s = self.stage(m, path, kind);
                    self.flow(&q, &s);
                    last = (s, Some(kind));
                }
                "branch" => {
                    let c = self.stage(m, path, Create);
                    let r = self.stage(m, path, Release);
                    self.guarded(&last.0, &c, "hi");
                    self.guarded(&last.0, &r, "lo");
                    self.flow(&c, &r);
                    last = (r, Some(Release));
                }
                _ => {
                    let s = self.stage(m, path, Release);
                    self.flow(&last.0, &s);
                    last = (s, Some(Release));
                }
            }
            if last.1 == Some(Release) {
                break;
            }
        }
        if exit && last.1 != Some(Release) {
            let s = self.stage(m, path, Release);
            self.flow(&last.0, &s);
            last = (s, Some(Release));
        }
        if !exit && last.1 == Some(Release) {
            // a release must hand over to a transfer
            let s = self.stage(m, path, Transfer);
            self.flow(&last.0, &s);
            last = (s, Some(Transfer));
        }
        last.0
    }
}

fn nest(parent: &mut Machine, depth_path: &[usize], child: Machine) {
    let mut m = parent;
    for &i in depth_path {
        m = match &mut m.items[i] {
            MachineItem::Machine(sub) => sub,
            _ => unreachable!(),
        };
    }
    m.items.push(MachineItem::Machine(child));
}

pub fn random_model(seed: u64) -> Model {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        flows: Vec::new(),
        triggers: Vec::new(),
        stages: Vec::new(),
    };
    let n = b.rng.gen_range(1..=4);
    let mut roots: Vec<Machine> = Vec::new();
    // (root index, item indices to the machine, path)
    let mut prev: Option<(usize, Vec<usize>, String)> = None;
    let mut prev_exit: Option<String> = None;

    for k in 0..n {
        let nested = prev.is_some() && b.rng.gen_bool(0.3);
        let id = format!("m{k}");
        let (root, trail, path) = match (&prev, nested) {
            (Some((root, trail, p)), true) => (*root, trail.clone(), join_path(p, &id)),
            _ => (roots.len(), Vec::new(), id.clone()),
        };
        let mut m = Machine::new(id);
        if b.rng.gen_bool(0.3) {
            m.label = Some(format!("machine {k}"));
        }
        let entry = match &prev_exit {
            None => {
                let c = b.stage(&mut m, &path, Create);
                if let Some(MachineItem::Stage(s)) = m.items.last_mut() {
                    s.source = true;
                }
                (c, Some(Create))
            }
            Some(exit) => {
                let t = b.stage(&mut m, &path, Transfer);
                b.flow(exit, &t);
                let r = b.stage(&mut m, &path, Receive);
                b.flow(&t, &r);
                (r, Some(Receive))
            }
        };
        let last_machine = k + 1 == n;
        let end = b.body(&mut m, &path, entry, !last_machine);
        if last_machine {
            let sink = b.rng.gen_bool(0.5);
            for item in m.items.iter_mut().rev() {
                if let MachineItem::Stage(s) = item {
                    if join_path(&path, &s.id) == end && sink && s.kind != Transfer {
                        s.terminal = Terminal::Sink;
                    }
                    break;
                }
            }
            prev_exit = None;
        } else {
            let t = b.stage(&mut m, &path, Transfer);
            b.flow(&end, &t);
            prev_exit = Some(t);
        }

        let my_trail;
        if nested {
            let parent_root = &mut roots[root];
            let pos = {
                let mut mm: &Machine = parent_root;
                for &i in &trail {
                    mm = match &mm.items[i] {
                        MachineItem::Machine(sub) => sub,
                        _ => unreachable!(),
                    };
                }
                mm.items.len()
            };
            nest(parent_root, &trail, m);
            let mut t = trail.clone();
            t.push(pos);
            my_trail = t;
        } else {
            roots.push(m);
            my_trail = Vec::new();
        }
        prev = Some((root, my_trail, path));
    }

    // Forward triggers. Creates are only targeted from stages that no
    // trigger fires, so the new thing always has a typed cause.
    let count = b.rng.gen_range(0..3);
    let stages = b.stages.clone();
    for _ in 0..count {
        if stages.len() < 2 {
            break;
        }
        let i = b.rng.gen_range(0..stages.len() - 1);
        let j = b.rng.gen_range(i + 1..stages.len());
        let (from, _) = &stages[i];
        let (to, kind) = &stages[j];
        let fired = |p: &str, ts: &[Trigger]| ts.iter().any(|t| t.to == p);
        let ok = match kind {
            Process => true,
            Create => !fired(from, &b.triggers) && !b.triggers.iter().any(|t| t.from == *to),
            _ => false,
        };
        let dup = b.triggers.iter().any(|t| t.from == *from && t.to == *to);
        if ok && !dup && !(matches!(kind, Process) && fired_creates(&b.triggers, &stages, to)) {
            b.triggers.push(Trigger::new(from.clone(), to.clone()));
        }
    }

    Model {
        name: format!("random_{seed}"),
        things: vec![ThingType {
            name: "item".into(),
            attributes: vec![("x".into(), AttrKind::Int), ("flag".into(), AttrKind::Bool)],
            span: None,
        }],
        machines: roots,
        flows: b.flows,
        triggers: b.triggers,
    }
}

/// Whether `path` already triggers a Create stage; a thingless firing there
/// would create an untyped thing.
fn fired_creates(triggers: &[Trigger], stages: &[(String, StageKind)], path: &str) -> bool {
    triggers
        .iter()
        .any(|t| t.from == path && stages.iter().any(|(p, k)| *p == t.to && *k == Create))
}

pub fn config_for(model: &Model, seed: u64) -> SimConfig {
    let source = model
        .machines
        .first()
        .and_then(|m| match m.items.first() {
            Some(MachineItem::Stage(s)) => Some(join_path(&m.id, &s.id)),
            _ => None,
        })
        .expect("first machine starts with its source");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let text = format!(
        "seed = {}\nmax_ticks = 100000\n\n[[source]]\nstage = \"{source}\"\ncount = {}\ninterarrival = {}\nthing = \"item\"\nattributes.x = {{ uniform = {{ min = 0, max = 9 }} }}\nattributes.flag = {{ bernoulli = 0.5 }}\n\n[handlers]\nhi = \"x >= 5\"\nlo = \"x < 5\"\n",
        seed >> 1,
        rng.gen_range(1..20),
        rng.gen_range(0..3),
    );
    SimConfig::from_toml(&text).expect("generated config parses")
}
