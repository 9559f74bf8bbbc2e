//! Handler predicates: boolean expressions over a thing's attributes.
//!
//! ```text
//! expr  := and ("or" and)*
//! and   := unary ("and" unary)*
//! unary := "not" unary | atom
//! atom  := "true" | "false" | "(" expr ")" | name [op literal]
//! op    := "==" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! A bare `name` tests a boolean attribute.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    Const(bool),
    Flag(String),
    Cmp(String, CmpOp, Value),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("column {column}: expected {expected}")]
    Syntax { column: usize, expected: String },
    #[error("thing has no attribute `{0}`")]
    UnknownAttribute(String),
    #[error("`{attribute}` {op} {value}: operands have different types")]
    TypeMismatch {
        attribute: String,
        op: &'static str,
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Int(i64),
    Str(String),
    Op(CmpOp),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, PredicateError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let bad = |column: usize, expected: &str| PredicateError::Syntax {
        column,
        expected: expected.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '=' | '!' | '<' | '>' => {
                let op = match two.as_str() {
                    "==" => Some((CmpOp::Eq, 2)),
                    "!=" => Some((CmpOp::Ne, 2)),
                    "<=" => Some((CmpOp::Le, 2)),
                    ">=" => Some((CmpOp::Ge, 2)),
                    _ if c == '<' => Some((CmpOp::Lt, 1)),
                    _ if c == '>' => Some((CmpOp::Gt, 1)),
                    _ => None,
                };
                let (op, len) = op.ok_or_else(|| bad(col, "a comparison operator"))?;
                i += len;
                Tok::Op(op)
            }
            '"' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&c| c == '"')
                    .ok_or_else(|| bad(col, "closing `\"`"))?;
                let s: String = chars[i + 1..i + 1 + end].iter().collect();
                i += end + 2;
                Tok::Str(s)
            }
            '-' | '0'..='9' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                Tok::Int(text.parse().map_err(|_| bad(col, "an integer"))?)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Word(chars[start..i].iter().collect())
            }
            _ => return Err(bad(col, "an expression")),
        };
        out.push((tok, col));
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, PredicateError> {
        Err(PredicateError::Syntax {
            column: self.toks[self.pos].1,
            expected: expected.to_string(),
        })
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(s) if s == w)
    }

    fn expr(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.and()?;
        while self.at_word("or") {
            self.bump();
            lhs = Predicate::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.unary()?;
        while self.at_word("and") {
            self.bump();
            lhs = Predicate::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Predicate, PredicateError> {
        if self.at_word("not") {
            self.bump();
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Predicate, PredicateError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("`)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Predicate::Const(w == "true"))
            }
            Tok::Word(w) if !matches!(w.as_str(), "and" | "or" | "not") => {
                self.bump();
                let Tok::Op(op) = *self.peek() else {
                    return Ok(Predicate::Flag(w));
                };
                self.bump();
                let value = match self.peek().clone() {
                    Tok::Int(n) => Value::Int(n),
                    Tok::Str(s) => Value::Text(s),
                    Tok::Word(b) if b == "true" || b == "false" => Value::Bool(b == "true"),
                    _ => return self.fail("a literal"),
                };
                self.bump();
                Ok(Predicate::Cmp(w, op, value))
            }
            _ => self.fail("an attribute, `true`, `false`, `not` or `(`"),
        }
    }
}

impl Predicate {
    pub fn parse(src: &str) -> Result<Predicate, PredicateError> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
        };
        let e = p.expr()?;
        if *p.peek() != Tok::End {
            return p.fail("end of expression");
        }
        Ok(e)
    }

    pub fn eval(&self, attrs: &BTreeMap<String, Value>) -> Result<bool, PredicateError> {
        Ok(match self {
            Predicate::Const(b) => *b,
            Predicate::Flag(name) => match attrs.get(name) {
                Some(Value::Bool(b)) => *b,
                Some(other) => {
                    return Err(PredicateError::TypeMismatch {
                        attribute: name.clone(),
                        op: "==",
                        value: other.to_string(),
                    })
                }
                None => return Err(PredicateError::UnknownAttribute(name.clone())),
            },
            Predicate::Cmp(name, op, rhs) => {
                let lhs = attrs
                    .get(name)
                    .ok_or_else(|| PredicateError::UnknownAttribute(name.clone()))?;
                let ord = match (lhs, rhs) {
                    (Value::Int(a), Value::Int(b)) => a.cmp(b),
                    (Value::Text(a), Value::Text(b)) => a.cmp(b),
                    (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
                    _ => {
                        return Err(PredicateError::TypeMismatch {
                            attribute: name.clone(),
                            op: op.symbol(),
                            value: rhs.to_string(),
                        })
                    }
                };
                match op {
                    CmpOp::Eq => ord.is_eq(),
                    CmpOp::Ne => ord.is_ne(),
                    CmpOp::Lt => ord.is_lt(),
                    CmpOp::Le => ord.is_le(),
                    CmpOp::Gt => ord.is_gt(),
                    CmpOp::Ge => ord.is_ge(),
                }
            }
            Predicate::Not(p) => !p.eval(attrs)?,
            Predicate::And(a, b) => a.eval(attrs)? && b.eval(attrs)?,
            Predicate::Or(a, b) => a.eval(attrs)? || b.eval(attrs)?,
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Const(b) => write!(f, "{b}"),
            Predicate::Flag(n) => f.write_str(n),
            Predicate::Cmp(n, op, v) => write!(f, "{n} {} {v:?}", op.symbol()),
            Predicate::Not(p) => write!(f, "not ({p})"),
            Predicate::And(a, b) => write!(f, "({a}) and ({b})"),
            Predicate::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs() -> BTreeMap<String, Value> {
        BTreeMap::from([
            ("port".to_string(), Value::Int(23)),
            ("proto".to_string(), Value::Text("tcp".into())),
            ("syn".to_string(), Value::Bool(true)),
        ])
    }

    fn eval(src: &str) -> bool {
        Predicate::parse(src).unwrap().eval(&attrs()).unwrap()
    }

    #[test]
    fn comparisons_and_connectives() {
        assert!(eval("port == 23"));
        assert!(!eval("port != 23"));
        assert!(eval("port < 80 and proto == \"tcp\""));
        assert!(eval("not syn or port >= 23"));
        assert!(eval("not (port > 23)"));
        assert!(eval("true"));
        assert!(!eval("syn and false"));
        assert!(eval("port > -1"));
    }

    #[test]
    fn and_binds_tighter_than_or() {
        assert!(eval("true or false and false"));
        assert!(!eval("(true or false) and false"));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            Predicate::parse("port =="),
            Err(PredicateError::Syntax { column: 8, .. })
        ));
        assert!(Predicate::parse("port == 1 extra").is_err());
        let p = Predicate::parse("size == 1").unwrap();
        assert_eq!(
            p.eval(&attrs()),
            Err(PredicateError::UnknownAttribute("size".into()))
        );
        let p = Predicate::parse("port == \"x\"").unwrap();
        assert!(matches!(
            p.eval(&attrs()),
            Err(PredicateError::TypeMismatch { .. })
        ));
    }
}
