use std::collections::HashMap;

use thiserror::Error;

use super::{
    join_path, EndpointKind, Flow, Machine, MachineItem, Model, Stage, Store, ThingType, Trigger,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no element at path `{0}`")]
pub struct NotFound(pub String);

/// Something a path can name.
#[derive(Debug, Clone, Copy)]
pub enum ElementRef<'a> {
    Machine(&'a Machine),
    Stage(&'a Stage),
    Store(&'a Store),
    Flow(&'a Flow),
    Trigger(&'a Trigger),
    ThingType(&'a ThingType),
}

impl<'a> ElementRef<'a> {
    pub fn as_stage(&self) -> Option<&'a Stage> {
        match self {
            ElementRef::Stage(s) => Some(s),
            _ => None,
        }
    }
}

/// A stage or store, located in the machine tree.
#[derive(Debug, Clone)]
pub struct ElementInfo<'a> {
    pub path: String,
    pub owner: String,
    /// Pre-order position over all stages and stores.
    pub order: usize,
    pub kind: EndpointKind,
    pub stage: Option<&'a Stage>,
    pub store: Option<&'a Store>,
}

/// Path lookup tables for a model. Duplicate ids keep their first occurrence.
#[derive(Debug)]
pub struct ModelIndex<'a> {
    pub model: &'a Model,
    elements: Vec<ElementInfo<'a>>,
    by_path: HashMap<String, usize>,
    machines: Vec<(String, &'a Machine)>,
    machine_by_path: HashMap<String, usize>,
}

impl<'a> ModelIndex<'a> {
    pub fn build(model: &'a Model) -> Self {
        let mut index = ModelIndex {
            model,
            elements: Vec::new(),
            by_path: HashMap::new(),
            machines: Vec::new(),
            machine_by_path: HashMap::new(),
        };
        for machine in &model.machines {
            index.visit(machine, "");
        }
        index
    }

    fn visit(&mut self, machine: &'a Machine, parent: &str) {
        let path = join_path(parent, &machine.id);
        if !self.machine_by_path.contains_key(&path) && !self.by_path.contains_key(&path) {
            self.machine_by_path
                .insert(path.clone(), self.machines.len());
        }
        self.machines.push((path.clone(), machine));
        for item in &machine.items {
            match item {
                MachineItem::Stage(stage) => self.push(
                    &path,
                    &stage.id,
                    EndpointKind::Stage(stage.kind),
                    Some(stage),
                    None,
                ),
                MachineItem::Store(store) => {
                    self.push(&path, &store.id, EndpointKind::Store, None, Some(store))
                }
                MachineItem::Machine(sub) => self.visit(sub, &path),
            }
        }
    }

    fn push(
        &mut self,
        owner: &str,
        id: &str,
        kind: EndpointKind,
        stage: Option<&'a Stage>,
        store: Option<&'a Store>,
    ) {
        let path = join_path(owner, id);
        let order = self.elements.len();
        if !self.by_path.contains_key(&path) && !self.machine_by_path.contains_key(&path) {
            self.by_path.insert(path.clone(), order);
        }
        self.elements.push(ElementInfo {
            path,
            owner: owner.to_string(),
            order,
            kind,
            stage,
            store,
        });
    }

    /// All stages and stores in declaration (pre-order) order.
    pub fn elements(&self) -> &[ElementInfo<'a>] {
        &self.elements
    }

    pub fn element(&self, path: &str) -> Option<&ElementInfo<'a>> {
        self.by_path.get(path).map(|&i| &self.elements[i])
    }

    pub fn stage(&self, path: &str) -> Option<&'a Stage> {
        self.element(path).and_then(|e| e.stage)
    }

    pub fn store(&self, path: &str) -> Option<&'a Store> {
        self.element(path).and_then(|e| e.store)
    }

    pub fn machine(&self, path: &str) -> Option<&'a Machine> {
        self.machine_by_path.get(path).map(|&i| self.machines[i].1)
    }

    /// Every machine with its path, pre-order.
    pub fn machines(&self) -> &[(String, &'a Machine)] {
        &self.machines
    }

    pub fn resolve(&self, path: &str) -> Result<ElementRef<'a>, NotFound> {
        if let Some(m) = self.machine(path) {
            return Ok(ElementRef::Machine(m));
        }
        if let Some(e) = self.element(path) {
            return Ok(match (e.stage, e.store) {
                (Some(s), _) => ElementRef::Stage(s),
                (_, Some(s)) => ElementRef::Store(s),
                _ => unreachable!("element is a stage or a store"),
            });
        }
        if let Some((from, to)) = path.split_once("->") {
            let (from, to) = (from.trim(), to.trim());
            if let Some(f) = self
                .model
                .flows
                .iter()
                .find(|f| f.from == from && f.to == to)
            {
                return Ok(ElementRef::Flow(f));
            }
        }
        if let Some((from, to)) = path.split_once("~>") {
            let (from, to) = (from.trim(), to.trim());
            if let Some(t) = self
                .model
                .triggers
                .iter()
                .find(|t| t.from == from && t.to == to)
            {
                return Ok(ElementRef::Trigger(t));
            }
        }
        if let Some(t) = self.model.thing(path) {
            return Ok(ElementRef::ThingType(t));
        }
        Err(NotFound(path.to_string()))
    }
}

/// Looks up a machine, stage, store, flow (`a -> b`), trigger (`a ~> b`) or
/// thing type by path.
pub fn resolve<'a>(model: &'a Model, path: &str) -> Result<ElementRef<'a>, NotFound> {
    let index = ModelIndex::build(model);
    index.resolve(path)
}
