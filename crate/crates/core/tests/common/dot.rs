//! A small recursive-descent checker for the DOT language: enough of the
//! grammar to reject malformed output, not a renderer.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Colon,
    Edge(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let c: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < c.len() {
        match c[i] {
            w if w.is_whitespace() => i += 1,
            '{' => {
                out.push(Tok::LBrace);
                i += 1
            }
            '}' => {
                out.push(Tok::RBrace);
                i += 1
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1
            }
            '=' => {
                out.push(Tok::Eq);
                i += 1
            }
            ';' => {
                out.push(Tok::Semi);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            ':' => {
                out.push(Tok::Colon);
                i += 1
            }
            '-' if c.get(i + 1) == Some(&'>') => {
                out.push(Tok::Edge("->"));
                i += 2
            }
            '-' if c.get(i + 1) == Some(&'-') => {
                out.push(Tok::Edge("--"));
                i += 2
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match c.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => {
                            s.push('\\');
                            if let Some(&n) = c.get(i + 1) {
                                s.push(n);
                            }
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            ch if ch.is_alphanumeric() || ch == '_' || ch == '.' || ch == '-' => {
                let start = i;
                while i < c.len() && (c[i].is_alphanumeric() || c[i] == '_' || c[i] == '.') {
                    i += 1;
                }
                if i == start {
                    return Err(format!("stray `{ch}`"));
                }
                out.push(Tok::Id(c[start..i].iter().collect()));
            }
            ch => return Err(format!("unexpected `{ch}`")),
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
    arrow: &'static str,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(Tok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            t => Err(format!("expected id, found {t:?}")),
        }
    }
    fn keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Id(s)) if s.eq_ignore_ascii_case(k))
    }
    fn attr_lists(&mut self) -> Result<(), String> {
        while self.eat(&Tok::LBracket) {
            while !self.eat(&Tok::RBracket) {
                self.id()?;
                if !self.eat(&Tok::Eq) {
                    return Err("expected `=` in attribute".into());
                }
                self.id()?;
                if !self.eat(&Tok::Comma) {
                    self.eat(&Tok::Semi);
                }
            }
        }
        Ok(())
    }
    fn subgraph(&mut self) -> Result<(), String> {
        if self.keyword("subgraph") {
            self.pos += 1;
            if matches!(self.peek(), Some(Tok::Id(_))) {
                self.id()?;
            }
        }
        if !self.eat(&Tok::LBrace) {
            return Err("expected `{`".into());
        }
        self.stmts()?;
        if !self.eat(&Tok::RBrace) {
            return Err("expected `}`".into());
        }
        Ok(())
    }
    fn operand(&mut self) -> Result<(), String> {
        if self.keyword("subgraph") || self.peek() == Some(&Tok::LBrace) {
            return self.subgraph();
        }
        self.id()?;
        if self.eat(&Tok::Colon) {
            self.id()?;
        }
        Ok(())
    }
    fn stmts(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Tok::RBrace) | None) {
            if self.keyword("graph") || self.keyword("node") || self.keyword("edge") {
                self.pos += 1;
                self.attr_lists()?;
            } else {
                let simple = matches!(self.peek(), Some(Tok::Id(_)))
                    && !self.keyword("subgraph")
                    && self.toks.get(self.pos + 1) == Some(&Tok::Eq);
                if simple {
                    self.pos += 2;
                    self.id()?;
                } else {
                    self.operand()?;
                    while let Some(Tok::Edge(op)) = self.peek() {
                        if *op != self.arrow {
                            return Err(format!("edge operator `{op}` in wrong graph type"));
                        }
                        self.pos += 1;
                        self.operand()?;
                    }
                    self.attr_lists()?;
                }
            }
            self.eat(&Tok::Semi);
        }
        Ok(())
    }
}

/// `Ok` when `src` is one syntactically valid DOT graph.
pub fn check_dot(src: &str) -> Result<(), String> {
    let toks = lex(src)?;
    let mut p = P {
        toks,
        pos: 0,
        arrow: "->",
    };
    if p.keyword("strict") {
        p.pos += 1;
    }
    if p.keyword("digraph") {
        p.arrow = "->";
    } else if p.keyword("graph") {
        p.arrow = "--";
    } else {
        return Err("expected `graph` or `digraph`".into());
    }
    p.pos += 1;
    if matches!(p.peek(), Some(Tok::Id(_))) {
        p.id()?;
    }
    if !p.eat(&Tok::LBrace) {
        return Err("expected `{`".into());
    }
    p.stmts()?;
    if !p.eat(&Tok::RBrace) {
        return Err("expected closing `}`".into());
    }
    if p.pos != p.toks.len() {
        return Err("trailing input after graph".into());
    }
    Ok(())
}
