use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Tok, Token};
use crate::model::{
    join_path, parent_path, AttrKind, Capacity, Flow, Machine, MachineItem, Model, ModelIndex,
    OverflowPolicy, SourceSpan, Stage, StageKind, Store, Terminal, ThingType, Trigger,
};

/// File name recorded in spans when parsing text that did not come from a file.
pub const ANONYMOUS_SOURCE: &str = "<input>";

const STATEMENT_KEYWORDS: [&str; 7] = [
    "model", "thing", "machine", "stage", "store", "flow", "trigger",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, found {}",
            self.span, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

/// Marker: the error has been recorded and the caller should resynchronise.
pub(crate) struct Reported;

pub(crate) type PResult<T> = Result<T, Reported>;

/// Token cursor with error collection, shared by the model and grouping parsers.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    file: String,
    pub errors: Vec<ParseError>,
    /// Nesting depth of open `{` blocks.
    pub depth: usize,
    keywords: &'static [&'static str],
}

impl Cursor {
    pub fn new(source: &str, file: &str, keywords: &'static [&'static str]) -> Self {
        Cursor {
            toks: tokenize(source),
            pos: 0,
            file: file.to_string(),
            errors: Vec::new(),
            depth: 0,
            keywords,
        }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    pub fn span(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        SourceSpan::new(self.file.clone(), t.line, t.column)
    }

    pub fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    /// Records an error at the current token. End-of-input errors inside an
    /// open block are left to the block, which reports it as unclosed.
    pub fn error(&mut self, expected: impl Into<String>) -> Reported {
        if !(self.depth > 0 && *self.peek() == Tok::Eof) {
            self.force_error(expected);
        }
        Reported
    }

    pub fn force_error(&mut self, expected: impl Into<String>) {
        let found = self.peek().to_string();
        self.errors.push(ParseError {
            span: self.span(),
            expected: expected.into(),
            found,
        });
    }

    /// Skips to the next statement keyword or to the `}` closing the current
    /// block, without consuming that brace.
    pub fn recover(&mut self) {
        let mut nested = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::RBrace if nested == 0 => return,
                Tok::RBrace => nested -= 1,
                Tok::LBrace => nested += 1,
                Tok::Ident(s) if nested == 0 && self.keywords.contains(&s.as_str()) => return,
                _ => {}
            }
            self.advance();
        }
    }

    pub fn expect(&mut self, tok: Tok, expected: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    /// Any identifier that is not a statement keyword.
    pub fn word(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !self.keywords.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    /// An identifier matching `[a-z_][a-z0-9_]*`.
    pub fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s)
                if !self.keywords.contains(&s.as_str())
                    && s.chars()
                        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') =>
            {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    /// Dotted path: `ident ("." ident)*`.
    pub fn path(&mut self, what: &str) -> PResult<String> {
        let mut out = self.ident(what)?;
        while *self.peek() == Tok::Dot {
            self.advance();
            out.push('.');
            out.push_str(&self.ident("identifier after `.`")?);
        }
        Ok(out)
    }

    pub fn int(&mut self, what: &str) -> PResult<u64> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                self.advance();
                Ok(n)
            }
            _ => Err(self.error(what)),
        }
    }

    pub fn finish(mut self) -> Vec<ParseError> {
        self.errors.sort_by_key(|e| (e.span.line, e.span.column));
        self.errors
    }
}

struct PendingFlow {
    scope: String,
    flow: Flow,
}

struct PendingTrigger {
    scope: String,
    trigger: Trigger,
}

struct ModelParser {
    cur: Cursor,
    name: Option<String>,
    things: Vec<ThingType>,
    machines: Vec<Machine>,
    flows: Vec<PendingFlow>,
    triggers: Vec<PendingTrigger>,
}

/// Parses `.tm` source text. Name resolution is performed (relative paths in
/// flows and triggers become absolute); semantic checks are left to
/// [`crate::model::validate`].
pub fn parse_model(source: &str) -> Result<Model, Vec<ParseError>> {
    parse_model_named(source, ANONYMOUS_SOURCE)
}

/// Like [`parse_model`], recording `file` in every span.
pub fn parse_model_named(source: &str, file: &str) -> Result<Model, Vec<ParseError>> {
    let mut p = ModelParser {
        cur: Cursor::new(source, file, &STATEMENT_KEYWORDS),
        name: None,
        things: Vec::new(),
        machines: Vec::new(),
        flows: Vec::new(),
        triggers: Vec::new(),
    };
    p.top_level();
    let ModelParser {
        cur,
        name,
        things,
        machines,
        flows,
        triggers,
    } = p;
    let errors = cur.finish();
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut model = Model {
        name: name.unwrap_or_default(),
        things,
        machines,
        flows: Vec::new(),
        triggers: Vec::new(),
    };
    let (flows, triggers) = {
        let index = ModelIndex::build(&model);
        let flows: Vec<Flow> = flows
            .into_iter()
            .map(|PendingFlow { scope, mut flow }| {
                flow.from = resolve_in_scope(&index, &scope, &flow.from);
                flow.to = resolve_in_scope(&index, &scope, &flow.to);
                flow
            })
            .collect();
        let triggers: Vec<Trigger> = triggers
            .into_iter()
            .map(|PendingTrigger { scope, mut trigger }| {
                trigger.from = resolve_in_scope(&index, &scope, &trigger.from);
                trigger.to = resolve_in_scope(&index, &scope, &trigger.to);
                trigger
            })
            .collect();
        (flows, triggers)
    };
    model.flows = flows;
    model.triggers = triggers;
    Ok(model)
}

/// Innermost enclosing machine wins; unresolvable paths are kept as written.
fn resolve_in_scope(index: &ModelIndex<'_>, scope: &str, path: &str) -> String {
    let mut s = scope;
    loop {
        let candidate = join_path(s, path);
        if index.element(&candidate).is_some() || index.machine(&candidate).is_some() {
            return candidate;
        }
        if s.is_empty() {
            return path.to_string();
        }
        s = parent_path(s);
    }
}

impl ModelParser {
    fn top_level(&mut self) {
        loop {
            let result = match self.cur.peek() {
                Tok::Eof => return,
                Tok::Ident(w) => match w.as_str() {
                    "model" => self.model_name(),
                    "thing" => self.thing(),
                    "machine" => self.machine("").map(|m| self.machines.push(m)),
                    "flow" => self.flow(""),
                    "trigger" => self.trigger(""),
                    _ => Err(self.unexpected("`model`, `thing`, `machine`, `flow` or `trigger`")),
                },
                _ => Err(self.unexpected("`model`, `thing`, `machine`, `flow` or `trigger`")),
            };
            if result.is_err() {
                self.cur.recover();
                if *self.cur.peek() == Tok::RBrace {
                    // stray closing brace at top level
                    self.cur.advance();
                }
            }
        }
    }

    /// Reports the current token and steps over it so recovery makes progress.
    fn unexpected(&mut self, expected: &str) -> Reported {
        let r = self.cur.error(expected);
        self.cur.advance();
        r
    }

    fn model_name(&mut self) -> PResult<()> {
        self.cur.advance();
        let name = self.cur.ident("model name")?;
        if self.name.is_some() {
            self.cur.force_error("a single `model` statement");
        }
        self.name = Some(name);
        Ok(())
    }

    fn thing(&mut self) -> PResult<()> {
        let span = self.cur.span();
        self.cur.advance();
        let name = self.cur.ident("thing type name")?;
        self.cur.expect(Tok::LBrace, "`{`")?;
        self.cur.depth += 1;
        let mut attributes = Vec::new();
        let result = loop {
            match self.cur.peek() {
                Tok::RBrace => {
                    self.cur.advance();
                    break Ok(());
                }
                Tok::Eof => {
                    self.cur.force_error("`}`");
                    break Err(Reported);
                }
                _ => {}
            }
            let attr = match self.cur.ident("attribute name") {
                Ok(a) => a,
                Err(r) => break Err(r),
            };
            if let Err(r) = self.cur.expect(Tok::Colon, "`:`") {
                break Err(r);
            }
            let kind = match self.cur.peek() {
                Tok::Ident(w) => AttrKind::from_keyword(w),
                _ => None,
            };
            let Some(kind) = kind else {
                break Err(self.cur.error("`int`, `text` or `bool`"));
            };
            self.cur.advance();
            attributes.push((attr, kind));
            match self.cur.peek() {
                Tok::Comma => {
                    self.cur.advance();
                }
                Tok::RBrace => {}
                _ => break Err(self.cur.error("`,` or `}`")),
            }
        };
        self.cur.depth -= 1;
        result?;
        self.things.push(ThingType {
            name,
            attributes,
            span: Some(span),
        });
        Ok(())
    }

    fn tags_and_label(&mut self, tags: &mut Vec<u32>, label: &mut Option<String>) -> PResult<bool> {
        match self.cur.peek().clone() {
            Tok::Tag(n) => {
                self.cur.advance();
                tags.push(n);
                Ok(true)
            }
            Tok::Str(s) => {
                if label.is_some() {
                    return Err(self.cur.error("a single label"));
                }
                self.cur.advance();
                *label = Some(s);
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn machine(&mut self, parent: &str) -> PResult<Machine> {
        let span = self.cur.span();
        self.cur.advance();
        let id = match self.cur.ident("machine identifier") {
            Ok(id) => id,
            // keep going into the body so its errors are reported too
            Err(_) if matches!(self.cur.peek(), Tok::LBrace | Tok::Str(_) | Tok::Tag(_)) => {
                String::new()
            }
            Err(r) => return Err(r),
        };
        let mut machine = Machine::new(id);
        machine.span = Some(span);
        while self.tags_and_label(&mut machine.tags, &mut machine.label)? {}
        self.cur.expect(Tok::LBrace, "`{`")?;
        self.cur.depth += 1;
        let path = join_path(parent, &machine.id);
        loop {
            let result = match self.cur.peek() {
                Tok::RBrace => {
                    self.cur.advance();
                    break;
                }
                Tok::Eof => {
                    self.cur
                        .force_error(format!("`}}` closing machine `{}`", machine.id));
                    break;
                }
                Tok::Ident(w) => {
                    match w.as_str() {
                        "stage" => self
                            .stage()
                            .map(|s| machine.items.push(MachineItem::Stage(s))),
                        "store" => self
                            .store()
                            .map(|s| machine.items.push(MachineItem::Store(s))),
                        "machine" => self
                            .machine(&path)
                            .map(|m| machine.items.push(MachineItem::Machine(m))),
                        "flow" => self.flow(&path),
                        "trigger" => self.trigger(&path),
                        _ => Err(self
                            .unexpected("`stage`, `store`, `machine`, `flow`, `trigger` or `}`")),
                    }
                }
                _ => Err(self.unexpected("`stage`, `store`, `machine`, `flow`, `trigger` or `}`")),
            };
            if result.is_err() {
                self.cur.recover();
            }
        }
        self.cur.depth -= 1;
        Ok(machine)
    }

    fn stage(&mut self) -> PResult<Stage> {
        let span = self.cur.span();
        self.cur.advance();
        let kind = match self.cur.peek() {
            Tok::Ident(w) => StageKind::from_keyword(w),
            _ => None,
        };
        let Some(kind) = kind else {
            return Err(self
                .cur
                .error("stage kind (`create`, `process`, `release`, `transfer` or `receive`)"));
        };
        self.cur.advance();
        let mut stage = Stage::new(self.cur.ident("stage identifier")?, kind);
        stage.span = Some(span);
        loop {
            if self.tags_and_label(&mut stage.tags, &mut stage.label)? {
                continue;
            }
            let Tok::Ident(w) = self.cur.peek() else {
                break;
            };
            match w.as_str() {
                "duration" => {
                    self.cur.advance();
                    stage.duration = self.cur.int("duration in ticks")?;
                }
                "source" => {
                    self.cur.advance();
                    stage.source = true;
                }
                "sink" | "drop" => {
                    let terminal = if w == "sink" {
                        Terminal::Sink
                    } else {
                        Terminal::Drop
                    };
                    if stage.terminal != Terminal::None {
                        return Err(self.cur.error("at most one of `sink` or `drop`"));
                    }
                    self.cur.advance();
                    stage.terminal = terminal;
                }
                _ => break,
            }
        }
        Ok(stage)
    }

    fn store(&mut self) -> PResult<Store> {
        let span = self.cur.span();
        self.cur.advance();
        let mut store = Store::new(self.cur.ident("store identifier")?);
        store.span = Some(span);
        loop {
            if self.tags_and_label(&mut store.tags, &mut store.label)? {
                continue;
            }
            let Tok::Ident(w) = self.cur.peek() else {
                break;
            };
            match w.as_str() {
                "capacity" => {
                    self.cur.advance();
                    store.capacity = if self.cur.at_word("unbounded") {
                        self.cur.advance();
                        Capacity::Unbounded
                    } else {
                        Capacity::Bounded(self.cur.int("capacity or `unbounded`")?)
                    };
                }
                "drop" => {
                    self.cur.advance();
                    store.overflow = OverflowPolicy::Drop;
                }
                "block" => {
                    self.cur.advance();
                    store.overflow = OverflowPolicy::Block;
                }
                _ => break,
            }
        }
        Ok(store)
    }

    fn flow(&mut self, scope: &str) -> PResult<()> {
        let span = self.cur.span();
        self.cur.advance();
        let from = self.cur.path("flow source path")?;
        self.cur.expect(Tok::Arrow, "`->`")?;
        let to = self.cur.path("flow target path")?;
        let mut flow = Flow::new(from, to);
        flow.span = Some(span);
        loop {
            match self.cur.peek().clone() {
                Tok::Colon => {
                    self.cur.advance();
                    flow.thing_type = Some(self.cur.ident("thing type name")?);
                }
                Tok::Tag(n) => {
                    self.cur.advance();
                    flow.tags.push(n);
                }
                Tok::Ident(w) if w == "when" => {
                    self.cur.advance();
                    flow.condition = Some(self.cur.ident("condition name")?);
                }
                Tok::Ident(w) if w == "overflow" => {
                    self.cur.advance();
                    flow.overflow = true;
                }
                _ => break,
            }
        }
        self.flows.push(PendingFlow {
            scope: scope.to_string(),
            flow,
        });
        Ok(())
    }

    fn trigger(&mut self, scope: &str) -> PResult<()> {
        let span = self.cur.span();
        self.cur.advance();
        let from = self.cur.path("trigger source path")?;
        self.cur.expect(Tok::Squiggle, "`~>`")?;
        let to = self.cur.path("trigger target path")?;
        let mut trigger = Trigger::new(from, to);
        trigger.span = Some(span);
        loop {
            match self.cur.peek().clone() {
                Tok::Tag(n) => {
                    self.cur.advance();
                    trigger.tags.push(n);
                }
                Tok::Ident(w) if w == "when" => {
                    self.cur.advance();
                    trigger.condition = Some(self.cur.ident("condition name")?);
                }
                _ => break,
            }
        }
        self.triggers.push(PendingTrigger {
            scope: scope.to_string(),
            trigger,
        });
        Ok(())
    }
}
