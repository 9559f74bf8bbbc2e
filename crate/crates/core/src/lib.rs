//! Thinging-machine models of network systems.
//!
//! * [`model`]: diagram types and the static validator
//! * [`dsl`]: the `.tm` text format
//! * [`events`]: elementary events, merging and chronology graphs
//! * [`sim`]: deterministic discrete-event execution of a model
//! * [`corpus`]: the bundled case-study models
//! * [`export`]: DOT and JSON renderings
//! * [`sweep`]: batch runs over many seeds, parallel with the `parallel` feature

pub mod corpus;
pub mod dsl;
pub mod events;
pub mod export;
pub mod model;
pub mod sim;
pub mod sweep;
