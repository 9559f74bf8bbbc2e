use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::EventSet;
use crate::dsl::{quote, Cursor, PResult, ParseError, Tok, ANONYMOUS_SOURCE};
use crate::model::{parent_path, SourceSpan};

const KEYWORDS: [&str; 1] = ["event"];

/// One named group of element paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<u64>,
    pub paths: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

/// The contents of a `.grp` file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub groups: Vec<Group>,
}

impl Grouping {
    /// One group per event of `events`, reproducing it under merging.
    pub fn identity(events: &EventSet) -> Self {
        Grouping {
            groups: events
                .events
                .iter()
                .map(|e| Group {
                    id: e.id.clone(),
                    description: e.description.clone(),
                    time: e.time,
                    paths: e.region.clone(),
                    span: None,
                })
                .collect(),
        }
    }

    /// One group per innermost machine, covering the elements it owns
    /// directly. Top-level elements with no machine form a group of their own.
    pub fn by_machine(events: &EventSet) -> Self {
        let mut groups: Vec<Group> = Vec::new();
        for path in events.elements() {
            let owner = parent_path(path);
            let id = if owner.is_empty() { "top" } else { owner };
            match groups.iter_mut().find(|g| g.id == id) {
                Some(g) => g.paths.push(path.to_string()),
                None => groups.push(Group {
                    id: id.to_string(),
                    description: format!("inside {id}"),
                    time: None,
                    paths: vec![path.to_string()],
                    span: None,
                }),
            }
        }
        Grouping { groups }
    }

    /// Text that [`parse_grouping`] reads back to an equal grouping, spans aside.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            write!(out, "event {} {}", g.id, quote(&g.description)).unwrap();
            if let Some(t) = g.time {
                write!(out, " at {t}").unwrap();
            }
            out.push_str(" {\n");
            for (i, p) in g.paths.iter().enumerate() {
                let sep = if i + 1 < g.paths.len() { "," } else { "" };
                writeln!(out, "  {p}{sep}").unwrap();
            }
            out.push_str("}\n");
        }
        out
    }
}

pub fn parse_grouping(source: &str) -> Result<Grouping, Vec<ParseError>> {
    parse_grouping_named(source, ANONYMOUS_SOURCE)
}

/// Parses `event ID "description" [at N] { path, ... }` blocks.
pub fn parse_grouping_named(source: &str, file: &str) -> Result<Grouping, Vec<ParseError>> {
    let mut cur = Cursor::new(source, file, &KEYWORDS);
    let mut groups = Vec::new();
    while *cur.peek() != Tok::Eof {
        match group(&mut cur) {
            Ok(g) => groups.push(g),
            Err(_) => {
                cur.recover();
                if *cur.peek() == Tok::RBrace {
                    cur.advance();
                }
            }
        }
    }
    let errors = cur.finish();
    if errors.is_empty() {
        Ok(Grouping { groups })
    } else {
        Err(errors)
    }
}

fn group(cur: &mut Cursor) -> PResult<Group> {
    let span = cur.span();
    if !cur.at_word("event") {
        let r = cur.error("`event`");
        cur.advance();
        return Err(r);
    }
    cur.advance();
    let id = cur.word("event id")?;
    let description = match cur.peek() {
        Tok::Str(s) => {
            let s = s.clone();
            cur.advance();
            s
        }
        _ => return Err(cur.error("quoted description")),
    };
    let time = if cur.at_word("at") {
        cur.advance();
        Some(cur.int("time after `at`")?)
    } else {
        None
    };
    cur.expect(Tok::LBrace, "`{`")?;
    cur.depth += 1;
    let mut paths = Vec::new();
    let body = (|| -> PResult<()> {
        while *cur.peek() != Tok::RBrace {
            paths.push(cur.path("element path")?);
            match cur.peek() {
                Tok::Comma => {
                    cur.advance();
                }
                Tok::RBrace => {}
                _ => return Err(cur.error("`,` or `}`")),
            }
        }
        Ok(())
    })();
    if body.is_err() {
        cur.recover();
    }
    cur.depth -= 1;
    if *cur.peek() == Tok::RBrace {
        cur.advance();
    } else {
        cur.force_error(format!("`}}` closing event {id}"));
        return Err(crate::dsl::Reported);
    }
    body?;
    Ok(Group {
        id,
        description,
        time,
        paths,
        span: Some(span),
    })
}
