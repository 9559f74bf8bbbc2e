//! Simulation configuration, read from TOML. See `docs/config.md`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SimError, Value};
use crate::model::OverflowPolicy;

fn default_max_ticks() -> u64 {
    100_000
}

fn default_interarrival() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    #[serde(default, rename = "source")]
    pub sources: Vec<SourceSpec>,
    /// Condition name to predicate text.
    #[serde(default)]
    pub handlers: BTreeMap<String, String>,
    #[serde(default)]
    pub stores: BTreeMap<String, StoreOverride>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            max_ticks: default_max_ticks(),
            sources: Vec::new(),
            handlers: BTreeMap::new(),
            stores: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Path of a stage marked `source`.
    pub stage: String,
    pub count: u64,
    #[serde(default = "default_interarrival")]
    pub interarrival: u64,
    #[serde(default)]
    pub start: u64,
    /// Thing type; defaults to the type on the stage's outgoing flow.
    #[serde(default)]
    pub thing: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, AttrDist>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreOverride {
    /// `0` means unbounded.
    #[serde(default)]
    pub capacity: Option<u64>,
    #[serde(default)]
    pub policy: Option<PolicyName>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Drop,
    Block,
}

impl From<PolicyName> for OverflowPolicy {
    fn from(p: PolicyName) -> Self {
        match p {
            PolicyName::Drop => OverflowPolicy::Drop,
            PolicyName::Block => OverflowPolicy::Block,
        }
    }
}

/// How one attribute is drawn for each generated thing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum AttrDist {
    Constant(Value),
    /// Cycles through the list by thing index.
    Seq(Vec<Value>),
    Choice {
        values: Vec<Value>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Inclusive integer range.
    Uniform {
        min: i64,
        max: i64,
    },
    Bernoulli(f64),
}

impl AttrDist {
    pub(crate) fn check(&self, attr: &str) -> Result<(), SimError> {
        let bad = |why: &str| Err(SimError::Config(format!("attribute `{attr}`: {why}")));
        match self {
            AttrDist::Seq(v) if v.is_empty() => bad("empty `seq`"),
            AttrDist::Choice { values, .. } if values.is_empty() => bad("empty `choice`"),
            AttrDist::Choice {
                values,
                weights: Some(w),
            } => {
                if w.len() != values.len() {
                    bad("`weights` and `values` differ in length")
                } else if WeightedIndex::new(w).is_err() {
                    bad("weights must be non-negative with a positive sum")
                } else {
                    Ok(())
                }
            }
            AttrDist::Uniform { min, max } if min > max => bad("`min` exceeds `max`"),
            AttrDist::Bernoulli(p) if !(0.0..=1.0).contains(p) => bad("probability outside [0, 1]"),
            _ => Ok(()),
        }
    }

    /// The kind of value this distribution yields.
    pub(crate) fn sample_kind(&self) -> Value {
        match self {
            AttrDist::Constant(v) => v.clone(),
            AttrDist::Seq(v) => v[0].clone(),
            AttrDist::Choice { values, .. } => values[0].clone(),
            AttrDist::Uniform { min, .. } => Value::Int(*min),
            AttrDist::Bernoulli(_) => Value::Bool(false),
        }
    }

    pub(crate) fn draw<R: Rng>(&self, index: u64, rng: &mut R) -> Value {
        match self {
            AttrDist::Constant(v) => v.clone(),
            AttrDist::Seq(v) => v[(index % v.len() as u64) as usize].clone(),
            AttrDist::Choice { values, weights } => match weights {
                Some(w) => {
                    let dist = WeightedIndex::new(w).expect("weights checked");
                    values[dist.sample(rng)].clone()
                }
                None => values[rng.gen_range(0..values.len())].clone(),
            },
            AttrDist::Uniform { min, max } => Value::Int(rng.gen_range(*min..=*max)),
            AttrDist::Bernoulli(p) => Value::Bool(rng.gen_bool(*p)),
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<SimConfig, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    /// Fails for seeds above `i64::MAX`, which TOML cannot represent.
    pub fn to_toml(&self) -> Result<String, SimError> {
        toml::to_string(self).map_err(|e| SimError::Config(e.to_string()))
    }
}
