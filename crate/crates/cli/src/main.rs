//! `thingkit`: validate, analyse and simulate thinging-machine models.
//!
//! Exit codes: 0 success, 1 parse or validation errors, 2 usage errors or
//! unreadable input, 3 simulation errors. Results go to stdout, messages to
//! stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thingkit::corpus::{self, CorpusError, ENTRIES};
use thingkit::dsl::parse_model_named;
use thingkit::events::{
    chronology, elementary_events, merge_events, parse_grouping_named, EventSet, Grouping,
};
use thingkit::export::{graph_to_dot, graph_to_json, model_to_dot, model_to_json};
use thingkit::model::{validate, Model};
use thingkit::sim::{stats, SimConfig, Simulator};

#[derive(Parser)]
#[command(
    name = "thingkit",
    version,
    about = "Thinging-machine modelling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model against the stage topology and print diagnostics.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the events of a model.
    Events {
        model: PathBuf,
        #[command(flatten)]
        grouping: GroupingArgs,
        #[arg(long, value_enum, default_value_t = EventsFormat::Text)]
        format: EventsFormat,
    },
    /// Print the chronology graph between events.
    Chronology {
        model: PathBuf,
        #[command(flatten)]
        grouping: GroupingArgs,
        #[arg(long, value_enum, default_value_t = GraphFormat::Text)]
        format: GraphFormat,
    },
    /// Run the simulator and print a summary.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: u64,
        /// Write the full trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        trace_format: Format,
        #[command(flatten)]
        grouping: GroupingArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render a model, or its event graph when a grouping is given.
    Export {
        model: PathBuf,
        #[arg(long, conflicts_with = "json", required_unless_present = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        grouping: GroupingArgs,
    },
    /// List, inspect or copy out the bundled case studies.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    /// Print an entry's events and chronology.
    Show {
        name: String,
    },
    /// Copy an entry's files into a directory.
    Extract {
        name: String,
        dir: PathBuf,
    },
}

#[derive(Args)]
struct GroupingArgs {
    /// Merge elementary events with this `.grp` file.
    #[arg(long, conflicts_with = "by_machine")]
    grouping: Option<PathBuf>,
    /// One event per machine.
    #[arg(long)]
    by_machine: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EventsFormat {
    Text,
    Json,
    /// Events with their regions.
    Regions,
    /// A `.grp` file reproducing the events.
    Grouping,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Text,
    Json,
    Dot,
}

/// A failure already reported on stderr, carrying its exit code.
struct Exit(u8);

const PARSE: u8 = 1;
const USAGE: u8 = 2;
const RUNTIME: u8 = 3;

fn fail(code: u8, msg: impl std::fmt::Display) -> Exit {
    eprintln!("error: {msg}");
    Exit(code)
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Exit> {
    let text = read(path)?;
    parse_model_named(&text, &path.display().to_string()).map_err(|errors| {
        for e in &errors {
            eprintln!("{e}");
        }
        Exit(PARSE)
    })
}

/// Parses and validates; errors stop here, warnings go to stderr.
fn load_valid_model(path: &Path) -> Result<Model, Exit> {
    let model = load_model(path)?;
    let diags = validate(&model);
    for d in &diags {
        eprintln!("{d}");
    }
    if diags.iter().any(|d| d.is_error()) {
        return Err(Exit(PARSE));
    }
    Ok(model)
}

fn events_for(model: &Model, args: &GroupingArgs) -> Result<EventSet, Exit> {
    let elem = elementary_events(model);
    let grouping = match (&args.grouping, args.by_machine) {
        (Some(path), _) => {
            let text = read(path)?;
            parse_grouping_named(&text, &path.display().to_string()).map_err(|errors| {
                for e in &errors {
                    eprintln!("{e}");
                }
                Exit(PARSE)
            })?
        }
        (None, true) => Grouping::by_machine(&elem),
        (None, false) => return Ok(elem),
    };
    let merged = merge_events(&elem, &grouping).map_err(|e| fail(PARSE, e))?;
    for w in &merged.warnings {
        eprintln!("{w}");
    }
    Ok(merged.events)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Validate { model, format } => {
            let model = load_model(&model)?;
            let diags = validate(&model);
            match format {
                Format::Text => {
                    for d in &diags {
                        println!("{d}");
                    }
                }
                Format::Json => print!("{}", json(&diags)),
            }
            if diags.iter().any(|d| d.is_error()) {
                return Err(Exit(PARSE));
            }
        }
        Command::Events {
            model,
            grouping,
            format,
        } => {
            let model = load_valid_model(&model)?;
            let events = events_for(&model, &grouping)?;
            match format {
                EventsFormat::Text => print!("{}", events.to_text()),
                EventsFormat::Json => print!("{}", json(&events)),
                EventsFormat::Regions => print!("{}", events.to_text_with_regions()),
                EventsFormat::Grouping => print!("{}", Grouping::identity(&events).to_text()),
            }
        }
        Command::Chronology {
            model,
            grouping,
            format,
        } => {
            let model = load_valid_model(&model)?;
            let graph = chronology(&model, &events_for(&model, &grouping)?);
            match format {
                GraphFormat::Text => print!("{}", graph.to_text()),
                GraphFormat::Json => println!("{}", graph_to_json(&graph)),
                GraphFormat::Dot => print!("{}", graph_to_dot(&graph)),
            }
        }
        Command::Simulate {
            model,
            config,
            seed,
            trace_out,
            trace_format,
            grouping,
            format,
        } => {
            let model = load_valid_model(&model)?;
            let config = SimConfig::from_toml(&read(&config)?).map_err(|e| fail(USAGE, e))?;
            let events = if grouping.grouping.is_some() || grouping.by_machine {
                Some(events_for(&model, &grouping)?)
            } else {
                None
            };
            let sim = Simulator::new(&model, &config).map_err(|e| fail(RUNTIME, e))?;
            let trace = sim.run(seed).map_err(|e| fail(RUNTIME, e))?;
            for w in trace.warnings() {
                eprintln!("warning: {w}");
            }
            if let Some(path) = trace_out {
                let text = match trace_format {
                    Format::Text => trace.to_text(),
                    Format::Json => trace.to_json() + "\n",
                };
                write_out(&path, &text)?;
            }
            let s = stats(&trace, events.as_ref()).map_err(|e| fail(RUNTIME, e))?;
            match format {
                Format::Text => {
                    println!("{}", s.summary());
                    let width = s.events.iter().map(|e| e.id.len()).max().unwrap_or(0);
                    for e in &s.events {
                        println!("{:<width$}  {}", e.id, e.count);
                    }
                }
                Format::Json => print!("{}", json(&s)),
            }
        }
        Command::Export {
            model,
            dot,
            json: _,
            grouping,
        } => {
            let model = load_valid_model(&model)?;
            let out = if grouping.grouping.is_some() || grouping.by_machine {
                let graph = chronology(&model, &events_for(&model, &grouping)?);
                if dot {
                    graph_to_dot(&graph)
                } else {
                    graph_to_json(&graph) + "\n"
                }
            } else if dot {
                model_to_dot(&model)
            } else {
                model_to_json(&model) + "\n"
            };
            print!("{out}");
        }
        Command::Corpus { action } => corpus_cmd(action)?,
    }
    Ok(())
}

fn corpus_error(e: CorpusError) -> Exit {
    let code = match e {
        CorpusError::UnknownCorpusEntry(_) | CorpusError::Io { .. } => USAGE,
        _ => PARSE,
    };
    fail(code, e)
}

fn corpus_cmd(action: CorpusAction) -> Result<(), Exit> {
    match action {
        CorpusAction::List => {
            let dir = corpus::corpus_dir();
            for name in ENTRIES {
                println!("{name}\t{}", dir.join(name).display());
            }
        }
        CorpusAction::Show { name } => {
            let e = corpus::load_corpus(&name).map_err(corpus_error)?;
            let mut out = String::new();
            writeln!(out, "{}  ({})", e.name, e.model_path().display()).unwrap();
            out.push('\n');
            out.push_str(&e.events.to_text());
            out.push('\n');
            out.push_str(&e.chronology().to_text());
            print!("{out}");
        }
        CorpusAction::Extract { name, dir } => {
            let e = corpus::load_corpus(&name).map_err(corpus_error)?;
            fs::create_dir_all(&dir)
                .map_err(|err| fail(USAGE, format!("{}: {err}", dir.display())))?;
            let entries = fs::read_dir(&e.dir)
                .map_err(|err| fail(USAGE, format!("{}: {err}", e.dir.display())))?;
            let mut copied: Vec<String> = Vec::new();
            for entry in entries.flatten() {
                let path = entry.path();
                if !path.is_file() {
                    continue;
                }
                let target = dir.join(entry.file_name());
                fs::copy(&path, &target)
                    .map_err(|err| fail(USAGE, format!("{}: {err}", target.display())))?;
                copied.push(entry.file_name().to_string_lossy().into_owned());
            }
            copied.sort();
            eprintln!("copied {} file(s) to {}", copied.len(), dir.display());
            for f in copied {
                println!("{}", dir.join(f).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code)) => ExitCode::from(code),
    }
}
