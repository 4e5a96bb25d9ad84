//! Recursive descent parser for the ASCII formula syntax.
//!
//! Binding power, strongest first: unary operators (`!`, `K{..}`, `P{..}`,
//! `<<..>> X/F/G`, `[[..]] X/F/G`, `E/A X/F/G`), `&`, `|`, `->` (right
//! associative), `<->`. Binary temporal forms always carry their own
//! parentheses: `<<1>> (phi U psi)`, `E (phi W psi)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Agent, Coalition, Formula, FormulaError, Prop};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Human-readable names of the tokens that would have been accepted.
    pub expected: Vec<String>,
    pub found: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {}; found {})", self.expected.join(", "), self.found)?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseError {}

/// Parses user input. Atoms with a leading underscore are rejected since that
/// prefix is reserved for generated names.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, false)?.finish()
}

/// Like [`parse`] but also accepts reserved atoms, so translator output can be
/// read back.
pub fn parse_lenient(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, true)?.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LCoop,
    RCoop,
    LDual,
    RDual,
    Eof,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Not => f.write_str("`!`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Iff => f.write_str("`<->`"),
            Tok::LCoop => f.write_str("`<<`"),
            Tok::RCoop => f.write_str("`>>`"),
            Tok::LDual => f.write_str("`[[`"),
            Tok::RDual => f.write_str("`]]`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok<'_>, Pos)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, column: col };
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Word(&text[start..i]), pos));
            continue;
        }
        let rest = &bytes[i..];
        let (tok, len) = if rest.starts_with(b"<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with(b"<<") {
            (Tok::LCoop, 2)
        } else if rest.starts_with(b">>") {
            (Tok::RCoop, 2)
        } else if rest.starts_with(b"[[") {
            (Tok::LDual, 2)
        } else if rest.starts_with(b"]]") {
            (Tok::RDual, 2)
        } else if rest.starts_with(b"->") {
            (Tok::Implies, 2)
        } else {
            let t = match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b',' => Tok::Comma,
                b'!' => Tok::Not,
                b'&' => Tok::And,
                b'|' => Tok::Or,
                _ => {
                    let ch = text[i..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        line,
                        column: col,
                        expected: Vec::new(),
                        found: format!("`{ch}`"),
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            };
            (t, 1)
        };
        out.push((tok, pos));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantifier {
    Coop,
    Dual,
    Exists,
    Forall,
}

struct Parser<'a> {
    toks: Vec<(Tok<'a>, Pos)>,
    idx: usize,
    allow_reserved: bool,
}

fn is_atom_name(w: &str, allow_reserved: bool) -> bool {
    let mut bytes = w.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_lowercase() => true,
        Some(b'_') if allow_reserved => true,
        _ => false,
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allow_reserved: bool) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, idx: 0, allow_reserved })
    }

    fn finish(mut self) -> Result<Formula, ParseError> {
        let f = self.formula()?;
        if self.peek() != Tok::Eof {
            return Err(self.unexpected(&["`&`", "`|`", "`->`", "`<->`", "end of input"]));
        }
        Ok(f)
    }

    fn peek(&self) -> Tok<'a> {
        self.toks[self.idx].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].1
    }

    fn bump(&mut self) {
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
    }

    fn eat(&mut self, t: Tok<'_>) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: String, expected: &[&str]) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            column: pos.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
            message,
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error_here(format!("unexpected {}", self.peek()), expected)
    }

    fn expect(&mut self, t: Tok<'_>, name: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(Tok::Iff) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(Tok::Implies) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    const FORMULA_START: &'static [&'static str] =
        &["atom", "`true`", "`false`", "`!`", "`(`", "`K`", "`P`", "`<<`", "`[[`", "`E`", "`A`"];

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::LCoop => {
                self.bump();
                let g = self.coalition(Tok::RCoop, "`>>`")?;
                self.temporal(Quantifier::Coop, Some(g))
            }
            Tok::LDual => {
                self.bump();
                let g = self.coalition(Tok::RDual, "`]]`")?;
                self.temporal(Quantifier::Dual, Some(g))
            }
            Tok::Word(w) => {
                match w {
                    "true" => {
                        self.bump();
                        Ok(Formula::tt())
                    }
                    "false" => {
                        self.bump();
                        Ok(Formula::False)
                    }
                    "K" | "P" => {
                        self.bump();
                        self.expect(Tok::LBrace, "`{`")?;
                        let g = self.coalition(Tok::RBrace, "`}`")?;
                        let body = self.unary()?;
                        Ok(if w == "K" { Formula::knows(g, body) } else { Formula::possible(g, body) })
                    }
                    "E" => {
                        self.bump();
                        self.temporal(Quantifier::Exists, None)
                    }
                    "A" => {
                        self.bump();
                        self.temporal(Quantifier::Forall, None)
                    }
                    "Y" | "S" => Err(self.error_here(format!("past temporal operator `{w}` is not supported"), &[])),
                    "X" | "F" | "G" | "U" | "W" => Err(self.error_here(
                        format!("temporal operator `{w}` must follow `<<..>>`, `[[..]]`, `E` or `A`"),
                        Self::FORMULA_START,
                    )),
                    _ if is_atom_name(w, self.allow_reserved) => {
                        self.bump();
                        Ok(Formula::Atom(Prop::new(w)))
                    }
                    _ if w.starts_with('_') => Err(self
                        .error_here(format!("atom `{w}`: a leading underscore is reserved for generated atoms"), &[])),
                    _ => Err(self.error_here(format!("`{w}` is not a valid atom"), Self::FORMULA_START)),
                }
            }
            _ => Err(self.unexpected(Self::FORMULA_START)),
        }
    }

    fn coalition(&mut self, close: Tok<'_>, close_name: &str) -> Result<Coalition, ParseError> {
        let mut agents = Vec::new();
        if self.eat(close) {
            return Ok(Coalition::empty());
        }
        loop {
            let pos = self.pos();
            let agent = match self.peek() {
                Tok::Word(w) => Agent::new(w).map_err(|e| self.formula_error(e))?,
                _ => return Err(self.unexpected(&["agent"])),
            };
            if agent.is_environment() {
                return Err(self.formula_error(FormulaError::EnvironmentInCoalition));
            }
            if agents.contains(&agent) {
                let mut e = self.formula_error(FormulaError::DuplicateAgent(agent.to_string()));
                e.line = pos.line;
                e.column = pos.column;
                return Err(e);
            }
            agents.push(agent);
            self.bump();
            if self.eat(Tok::Comma) {
                continue;
            }
            if self.eat(close) {
                break;
            }
            return Err(self.unexpected(&["`,`", close_name]));
        }
        Coalition::new(agents).map_err(|e| self.formula_error(e))
    }

    fn formula_error(&self, e: FormulaError) -> ParseError {
        self.error_here(e.to_string(), &[])
    }

    fn temporal(&mut self, q: Quantifier, g: Option<Coalition>) -> Result<Formula, ParseError> {
        let g = g.unwrap_or_default();
        match self.peek() {
            Tok::Word("X") => {
                self.bump();
                let a = self.unary()?;
                Ok(match q {
                    Quantifier::Coop => Formula::coop_next(g, a),
                    Quantifier::Dual => Formula::dual_next(g, a),
                    Quantifier::Exists => Formula::exists_next(a),
                    Quantifier::Forall => Formula::forall_next(a),
                })
            }
            Tok::Word("F") => {
                self.bump();
                let a = self.unary()?;
                Ok(match q {
                    Quantifier::Coop => Formula::coop_eventually(g, a),
                    Quantifier::Dual => Formula::dual_eventually(g, a),
                    Quantifier::Exists => Formula::exists_eventually(a),
                    Quantifier::Forall => Formula::forall_eventually(a),
                })
            }
            Tok::Word("G") => {
                self.bump();
                let a = self.unary()?;
                Ok(match q {
                    Quantifier::Coop => Formula::coop_always(g, a),
                    Quantifier::Dual => Formula::dual_always(g, a),
                    Quantifier::Exists => Formula::exists_always(a),
                    Quantifier::Forall => Formula::forall_always(a),
                })
            }
            Tok::LParen => {
                self.bump();
                let a = self.formula()?;
                let weak = match self.peek() {
                    Tok::Word("U") => false,
                    Tok::Word("W") => true,
                    Tok::Word("S") => {
                        return Err(self.error_here("past temporal operator `S` is not supported".into(), &[]))
                    }
                    _ => return Err(self.unexpected(&["`U`", "`W`"])),
                };
                self.bump();
                let b = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match (q, weak) {
                    (Quantifier::Coop, false) => Formula::coop_until(g, a, b),
                    (Quantifier::Coop, true) => Formula::coop_weak_until(g, a, b),
                    (Quantifier::Dual, false) => Formula::dual_until(g, a, b),
                    (Quantifier::Dual, true) => Formula::dual_weak_until(g, a, b),
                    (Quantifier::Exists, false) => Formula::exists_until(a, b),
                    (Quantifier::Exists, true) => Formula::exists_weak_until(a, b),
                    (Quantifier::Forall, false) => Formula::forall_until(a, b),
                    (Quantifier::Forall, true) => Formula::forall_weak_until(a, b),
                })
            }
            _ => Err(self.unexpected(&["`X`", "`F`", "`G`", "`(`"])),
        }
    }
}
