//! Batch work over many seeds or many model mutations.
//!
//! With the `parallel` feature (on by default) the batch entry points spread
//! work over a rayon pool; the `_sequential` variants always run in order on
//! the calling thread. Both return results in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::model::{is_legal_flow, validate, DiagnosticCode, EndpointKind, Model, StageKind};
use crate::sim::{replay_check, stats, SimError, SimStats, Simulator};

/// Outcome of one seeded run.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub stats: SimStats,
    /// Whether the trace passed [`replay_check`].
    pub replays: bool,
}

fn one_seed(sim: &Simulator<'_>, model: &Model, seed: u64) -> Result<SeedRun, SimError> {
    let trace = sim.run(seed)?;
    Ok(SeedRun {
        seed,
        stats: stats(&trace, None)?,
        replays: replay_check(model, &trace),
    })
}

pub fn run_seeds_sequential(
    sim: &Simulator<'_>,
    model: &Model,
    seeds: &[u64],
) -> Vec<Result<SeedRun, SimError>> {
    seeds.iter().map(|&s| one_seed(sim, model, s)).collect()
}

#[cfg(feature = "parallel")]
pub fn run_seeds(
    sim: &Simulator<'_>,
    model: &Model,
    seeds: &[u64],
) -> Vec<Result<SeedRun, SimError>> {
    seeds.par_iter().map(|&s| one_seed(sim, model, s)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_seeds(
    sim: &Simulator<'_>,
    model: &Model,
    seeds: &[u64],
) -> Vec<Result<SeedRun, SimError>> {
    run_seeds_sequential(sim, model, seeds)
}

/// One flow rewired to connect an illegal pair of element kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub flow: usize,
    pub from: String,
    pub to: String,
    pub kinds: (EndpointKind, EndpointKind),
    /// Whether the validator reported `E_ADJACENCY` for the mutant.
    pub detected: bool,
}

/// First element of each kind, the stand-in used when rewiring flows.
fn representatives(model: &Model) -> Vec<(EndpointKind, String)> {
    let index = model.index();
    EndpointKind::ALL
        .iter()
        .filter_map(|&k| {
            index
                .elements()
                .iter()
                .find(|e| e.kind == k)
                .map(|e| (k, e.path.clone()))
        })
        .collect()
}

/// Flow index and the new endpoints, each with its kind.
type Rewire = (usize, (EndpointKind, String), (EndpointKind, String));

fn mutations(model: &Model) -> Vec<Rewire> {
    let reps = representatives(model);
    let transfer = EndpointKind::Stage(StageKind::Transfer);
    let mut out = Vec::new();
    for flow in 0..model.flows.len() {
        for from in &reps {
            for to in &reps {
                if is_legal_flow(from.0, to.0) || (from.0 == transfer && to.0 == transfer) {
                    continue;
                }
                out.push((flow, from.clone(), to.clone()));
            }
        }
    }
    out
}

fn check(model: &Model, (flow, (fk, from), (tk, to)): Rewire) -> Mutation {
    let mut mutant = model.clone();
    mutant.flows[flow].from = from.clone();
    mutant.flows[flow].to = to.clone();
    let detected = validate(&mutant)
        .iter()
        .any(|d| d.code == DiagnosticCode::Adjacency);
    Mutation {
        flow,
        from,
        to,
        kinds: (fk, tk),
        detected,
    }
}

/// Every single-flow mutation of `model` to an illegal kind pair, each
/// validated. `Transfer -> Transfer` is skipped since its legality depends
/// on machine boundaries, not kinds.
pub fn mutation_sweep_sequential(model: &Model) -> Vec<Mutation> {
    mutations(model)
        .into_iter()
        .map(|m| check(model, m))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn mutation_sweep(model: &Model) -> Vec<Mutation> {
    mutations(model)
        .into_par_iter()
        .map(|m| check(model, m))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn mutation_sweep(model: &Model) -> Vec<Mutation> {
    mutation_sweep_sequential(model)
}
