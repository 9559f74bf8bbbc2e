use thingkit::corpus::{load_corpus, ENTRIES};
use thingkit::dsl::{parse_model, serialize_model};
use thingkit::events::{elementary_events, merge_events, Grouping};
use thingkit::model::validate;
use thingkit::sim::{replay_check, simulate, stats};

fn bless() -> bool {
    std::env::var_os("THINGKIT_BLESS").is_some()
}

#[test]
fn every_entry_loads_and_matches_its_goldens() {
    for name in ENTRIES {
        let mut e = load_corpus(name).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(validate(&e.model), [], "{name}");
        if bless() {
            e.bless().unwrap();
        }
        assert!(
            e.events_match_golden(),
            "{name}: events differ from golden\n{}",
            e.render_events()
        );
        assert!(
            e.chronology_matches_golden(),
            "{name}: chronology differs from golden\n{}",
            e.render_chronology()
        );
    }
}

#[test]
fn event_counts() {
    for (name, n) in [("router", 11), ("firewall", 11), ("cloud_server", 22)] {
        let e = load_corpus(name).unwrap();
        let ids: Vec<&str> = e.events.events.iter().map(|e| e.id.as_str()).collect();
        let expected: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
        assert_eq!(ids, expected, "{name}");
    }
}

#[test]
fn cloud_server_ends_with_ip_configuration() {
    let e = load_corpus("cloud_server").unwrap();
    assert_eq!(
        e.events.events.last().unwrap().description,
        "The IP is configured in the network card."
    );
    assert_eq!(
        e.events.events[0].description,
        "The manager receives a server request."
    );
}

#[test]
fn elementary_event_count_is_stage_plus_store_count() {
    let e = load_corpus("router").unwrap();
    let src = &e.source;
    let declared = src
        .lines()
        .map(str::trim_start)
        .filter(|l| l.starts_with("stage ") || l.starts_with("store "))
        .count();
    assert_eq!(elementary_events(&e.model).events.len(), declared);
}

#[test]
fn identity_grouping_reproduces_elementary_events() {
    for name in ENTRIES {
        let e = load_corpus(name).unwrap();
        let elem = elementary_events(&e.model);
        let merged = merge_events(&elem, &Grouping::identity(&elem)).unwrap();
        assert_eq!(merged.events, elem, "{name}");
        assert!(merged.warnings.is_empty());
    }
}

#[test]
fn corpus_round_trips_through_text() {
    for name in ENTRIES {
        let e = load_corpus(name).unwrap();
        let text = serialize_model(&e.model).unwrap();
        let back = parse_model(&text).unwrap();
        assert!(back.structurally_eq(&e.model), "{name}");
    }
}

#[test]
fn shipped_configs_run_cleanly() {
    for name in ENTRIES {
        let e = load_corpus(name).unwrap();
        let trace = simulate(&e.model, &e.config).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert!(trace.quiescent, "{name}");
        assert!(replay_check(&e.model, &trace), "{name}");
        let s = stats(&trace, Some(&e.events)).unwrap();
        assert!(s.conserved(), "{name}");
        assert!(s.injected > 0, "{name}");
    }
}

#[test]
fn cloud_full_routes_each_request_kind() {
    let e = load_corpus("cloud_full").unwrap();
    let trace = simulate(&e.model, &e.config).unwrap();
    let fired = |path: &str| {
        trace
            .records
            .iter()
            .filter(|r| r.path == path && r.kind == thingkit::sim::RecordKind::Fired)
            .count()
    };
    assert_eq!(fired("vms.virtualized_software.configure"), 4);
    assert_eq!(fired("automation.db_site"), 4);
    assert_eq!(fired("automation.st_site"), 4);
}
