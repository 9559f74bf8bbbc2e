//! The bundled case-study models.
//!
//! Each entry lives in `<corpus>/<name>/` and holds `<name>.tm`,
//! `events.grp`, `events.golden`, `chronology.golden` and `sim.toml`.
//! The corpus directory is `THINGKIT_CORPUS_DIR` when set, otherwise the
//! `corpus/` directory of the source tree.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dsl::{parse_model_named, ParseError};
use crate::events::{
    chronology, elementary_events, merge_events, parse_grouping_named, EventError, EventGraph,
    EventSet, Grouping,
};
use crate::model::{validate, Diagnostic, Model};
use crate::sim::SimConfig;

pub const ENTRIES: [&str; 7] = [
    "network_arch",
    "router",
    "firewall",
    "cloud_server",
    "cloud_database",
    "cloud_storage",
    "cloud_full",
];

pub const CORPUS_DIR_VAR: &str = "THINGKIT_CORPUS_DIR";

const EVENTS_HEADER: &str = "\
# Events after merging the elementary events by events.grp.
# Regenerate with THINGKIT_BLESS=1 cargo test -p thingkit --test corpus.
";

const CHRONOLOGY_HEADER: &str = "\
# Chronology derived from model structure: every flow and trigger is lifted
# to the events owning its endpoints, self-edges removed.
# `->` edges come from flows, `~>` edges from triggers.
# Regenerate with THINGKIT_BLESS=1 cargo test -p thingkit --test corpus.
";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry `{0}` (known: {})", ENTRIES.join(", "))]
    UnknownCorpusEntry(String),
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: io::Error },
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<ParseError>),
    #[error("{name}: {}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        name: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{name}: {error}")]
    Events { name: String, error: EventError },
    #[error("{name}: sim.toml: {error}")]
    Config { name: String, error: String },
}

/// A loaded, validated corpus entry.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub dir: PathBuf,
    pub source: String,
    pub model: Model,
    pub grouping: Grouping,
    pub events: EventSet,
    pub config: SimConfig,
    /// Contents of the golden files, when present.
    pub golden_events: Option<String>,
    pub golden_chronology: Option<String>,
}

impl CorpusEntry {
    pub fn model_path(&self) -> PathBuf {
        self.dir.join(format!("{}.tm", self.name))
    }

    pub fn chronology(&self) -> EventGraph {
        chronology(&self.model, &self.events)
    }

    pub fn elementary_chronology(&self) -> EventGraph {
        chronology(&self.model, &elementary_events(&self.model))
    }

    /// What `events.golden` should contain.
    pub fn render_events(&self) -> String {
        format!("{EVENTS_HEADER}{}", self.events.to_text())
    }

    /// What `chronology.golden` should contain.
    pub fn render_chronology(&self) -> String {
        format!("{CHRONOLOGY_HEADER}{}", self.chronology().to_text())
    }

    pub fn events_match_golden(&self) -> bool {
        self.golden_events
            .as_deref()
            .is_some_and(|g| strip_comments(g) == strip_comments(&self.render_events()))
    }

    pub fn chronology_matches_golden(&self) -> bool {
        self.golden_chronology
            .as_deref()
            .is_some_and(|g| strip_comments(g) == strip_comments(&self.render_chronology()))
    }

    /// Rewrites both golden files from the current pipeline output.
    pub fn bless(&mut self) -> Result<(), CorpusError> {
        let events = self.render_events();
        let chron = self.render_chronology();
        write(&self.dir.join("events.golden"), &events)?;
        write(&self.dir.join("chronology.golden"), &chron)?;
        self.golden_events = Some(events);
        self.golden_chronology = Some(chron);
        Ok(())
    }
}

/// Drops `#` comment lines.
pub fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn corpus_dir() -> PathBuf {
    match std::env::var_os(CORPUS_DIR_VAR) {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus"),
    }
}

pub fn load_corpus(name: &str) -> Result<CorpusEntry, CorpusError> {
    load_corpus_from(&corpus_dir(), name)
}

pub fn load_corpus_from(root: &Path, name: &str) -> Result<CorpusEntry, CorpusError> {
    if !ENTRIES.contains(&name) {
        return Err(CorpusError::UnknownCorpusEntry(name.to_string()));
    }
    let dir = root.join(name);
    let model_file = dir.join(format!("{name}.tm"));
    let source = read(&model_file)?;
    let model = parse_model_named(&source, &model_file.display().to_string())
        .map_err(CorpusError::Parse)?;
    let diagnostics = validate(&model);
    if !diagnostics.is_empty() {
        return Err(CorpusError::Invalid {
            name: name.to_string(),
            diagnostics,
        });
    }

    let grp_file = dir.join("events.grp");
    let grouping = parse_grouping_named(&read(&grp_file)?, &grp_file.display().to_string())
        .map_err(CorpusError::Parse)?;
    let merged = merge_events(&elementary_events(&model), &grouping).map_err(|error| {
        CorpusError::Events {
            name: name.to_string(),
            error,
        }
    })?;
    if !merged.warnings.is_empty() {
        return Err(CorpusError::Invalid {
            name: name.to_string(),
            diagnostics: merged.warnings,
        });
    }

    let config = SimConfig::from_toml(&read(&dir.join("sim.toml"))?).map_err(|error| {
        CorpusError::Config {
            name: name.to_string(),
            error: error.to_string(),
        }
    })?;

    Ok(CorpusEntry {
        name: name.to_string(),
        golden_events: fs::read_to_string(dir.join("events.golden")).ok(),
        golden_chronology: fs::read_to_string(dir.join("chronology.golden")).ok(),
        dir,
        source,
        model,
        grouping,
        events: merged.events,
        config,
    })
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|error| CorpusError::Io {
        path: path.to_path_buf(),
        error,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CorpusError> {
    fs::write(path, text).map_err(|error| CorpusError::Io {
        path: path.to_path_buf(),
        error,
    })
}
