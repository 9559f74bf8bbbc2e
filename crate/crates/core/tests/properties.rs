mod common;

use std::collections::HashMap;

use common::gen::{config_for, random_model};
use proptest::prelude::*;
use thingkit::dsl::{parse_model, serialize_model};
use thingkit::events::{chronology, elementary_events, merge_events, Grouping};
use thingkit::model::validate;
use thingkit::sim::{replay_check, stats, RecordKind, Simulator, Trace};

/// Per-event activations recomputed from regions directly.
fn filter_counts(trace: &Trace, regions: &[Vec<String>]) -> Vec<u64> {
    let region_of = |path: &str| regions.iter().position(|r| r.iter().any(|p| p == path));
    let mut counts = vec![0; regions.len()];
    let mut last: HashMap<u64, Option<usize>> = HashMap::new();
    for r in &trace.records {
        if !matches!(r.kind, RecordKind::Fired | RecordKind::Stored) {
            continue;
        }
        let here = region_of(&r.path);
        let fresh = match r.uid {
            None => true,
            Some(u) => {
                let before = last.get(&u).copied().flatten();
                last.insert(u, here);
                before != here
            }
        };
        if let (true, Some(i)) = (fresh, here) {
            counts[i] += 1;
        }
    }
    counts
}

/// Conservation checked after every record, not just at the end.
fn conserved_at_every_prefix(trace: &Trace) -> bool {
    let (mut entered, mut left) = (0i64, 0i64);
    let mut live: HashMap<u64, ()> = HashMap::new();
    for r in &trace.records {
        match r.kind {
            RecordKind::Injected | RecordKind::Created => {
                entered += 1;
                live.insert(r.uid.unwrap(), ());
            }
            RecordKind::Completed | RecordKind::Dropped => {
                left += 1;
                live.remove(&r.uid.unwrap());
            }
            _ => {}
        }
        if entered != left + live.len() as i64 {
            return false;
        }
    }
    let held: usize = trace.final_state.values().map(Vec::len).sum();
    held == live.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let m = random_model(seed);
        let text = serialize_model(&m).unwrap();
        let back = parse_model(&text).unwrap();
        prop_assert!(back.structurally_eq(&m));
        prop_assert_eq!(serialize_model(&back).unwrap(), text);
    }

    #[test]
    fn validate_is_pure_and_idempotent(seed in any::<u64>()) {
        let m = random_model(seed);
        let before = m.clone();
        let a = validate(&m);
        prop_assert_eq!(&a, &validate(&m));
        prop_assert_eq!(m, before);
    }

    #[test]
    fn simulation_invariants(seed in any::<u64>(), run_seed in any::<u64>()) {
        let m = random_model(seed);
        let cfg = config_for(&m, seed);
        let sim = Simulator::new(&m, &cfg).unwrap();
        let trace = sim.run(run_seed).unwrap();
        prop_assert!(replay_check(&m, &trace));
        prop_assert!(conserved_at_every_prefix(&trace));
        prop_assert!(stats(&trace, None).unwrap().conserved());
        prop_assert_eq!(trace.to_text(), sim.run(run_seed).unwrap().to_text());
        prop_assert!(trace.records.windows(2).all(|w| w[0].tick <= w[1].tick));
    }

    #[test]
    fn event_counts_agree_with_region_filtering(seed in any::<u64>()) {
        let m = random_model(seed);
        let elem = elementary_events(&m);
        let events = merge_events(&elem, &Grouping::by_machine(&elem)).unwrap().events;
        let trace = Simulator::new(&m, &config_for(&m, seed)).unwrap().run(seed).unwrap();
        let s = stats(&trace, Some(&events)).unwrap();
        let regions: Vec<Vec<String>> = events.events.iter().map(|e| e.region.clone()).collect();
        let counts: Vec<u64> = s.events.iter().map(|e| e.count).collect();
        prop_assert_eq!(counts, filter_counts(&trace, &regions));
    }

    #[test]
    fn quotient_equals_coarse_chronology(seed in any::<u64>()) {
        let m = random_model(seed);
        let elem = elementary_events(&m);
        let coarse = merge_events(&elem, &Grouping::by_machine(&elem)).unwrap().events;
        let q = chronology(&m, &elem).quotient(&coarse);
        prop_assert_eq!(q, chronology(&m, &coarse));
    }
}
