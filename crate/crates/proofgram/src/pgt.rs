//! PGT: line-oriented textual KB format.
//!
//! ```text
//! # comment
//! axiom ax-mp/2 : ?ps <- ?ph , wi(?ph,?ps)
//! prod idALT(0) -> ax-mp(ax-1,ax-mp(ax-1,ax-2)) : wi(?ph,?ph)
//! ```
//!
//! Proof terms are written `name` or `name(t1,...,tk)` with parameters
//! `$1`, `$2`, ...; formula variables are `?name`.  Names match
//! `[A-Za-z0-9._'-]+` or are single-quoted with backslash escapes.
//! Declarations must appear in grammar order.

use crate::bank::{Bank, FTerm, PTerm};
use crate::error::{Error, Result};
use crate::formula::{self, Clause};
use crate::grammar::{Base, Grammar, Kb, Production};
use crate::term;
use rustc_hash::FxHashMap;

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '\'' | '-')
}

fn name_needs_quoting(name: &str) -> bool {
    name.is_empty() || name.starts_with('\'') || !name.chars().all(is_name_char)
}

/// Append a name, quoting it when it cannot be written bare.
pub fn push_name(name: &str, out: &mut String) {
    if name_needs_quoting(name) {
        out.push('\'');
        for c in name.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    } else {
        out.push_str(name);
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Param(u32),
    Var(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Slash,
    Arrow,    // ->
    RevArrow, // <-
    Word(&'static str),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str, line: usize) -> Self {
        Lexer { chars: s.chars().peekable(), line }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax(format!("line {}: {}", self.line, msg))
    }

    fn next_tok(&mut self) -> Result<Option<Tok>> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.chars.next();
                }
                Some('#') => return Ok(None),
                _ => break,
            }
        }
        let c = *self.chars.peek().unwrap();
        match c {
            '(' => {
                self.chars.next();
                Ok(Some(Tok::LParen))
            }
            ')' => {
                self.chars.next();
                Ok(Some(Tok::RParen))
            }
            ',' => {
                self.chars.next();
                Ok(Some(Tok::Comma))
            }
            ':' => {
                self.chars.next();
                Ok(Some(Tok::Colon))
            }
            '/' => {
                self.chars.next();
                Ok(Some(Tok::Slash))
            }
            '$' => {
                self.chars.next();
                let mut digits = String::new();
                while let Some(d) = self.chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(*d);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                let idx: u32 = digits
                    .parse()
                    .map_err(|_| self.err("expected parameter index after `$`"))?;
                if idx == 0 {
                    return Err(self.err("parameter indices are 1-based"));
                }
                Ok(Some(Tok::Param(idx)))
            }
            '?' => {
                self.chars.next();
                let mut name = String::new();
                while let Some(d) = self.chars.peek() {
                    if is_name_char(*d) {
                        name.push(*d);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(self.err("expected variable name after `?`"));
                }
                Ok(Some(Tok::Var(name)))
            }
            '\'' => {
                self.chars.next();
                let mut name = String::new();
                loop {
                    match self.chars.next() {
                        None => return Err(self.err("unterminated quoted name")),
                        Some('\\') => match self.chars.next() {
                            None => return Err(self.err("unterminated escape")),
                            Some(e) => name.push(e),
                        },
                        Some('\'') => break,
                        Some(ch) => name.push(ch),
                    }
                }
                Ok(Some(Tok::Name(name)))
            }
            '-' | '<' => {
                // `->` or `<-` or a name starting with `-`
                if c == '<' {
                    self.chars.next();
                    if self.chars.peek() == Some(&'-') {
                        self.chars.next();
                        return Ok(Some(Tok::RevArrow));
                    }
                    return Err(self.err("expected `<-`"));
                }
                // peek ahead: `->`
                let mut clone = self.chars.clone();
                clone.next();
                if clone.peek() == Some(&'>') {
                    self.chars.next();
                    self.chars.next();
                    return Ok(Some(Tok::Arrow));
                }
                self.lex_name()
            }
            c if is_name_char(c) => self.lex_name(),
            other => Err(self.err(&format!("unexpected character `{other}`"))),
        }
    }

    fn lex_name(&mut self) -> Result<Option<Tok>> {
        let mut name = String::new();
        loop {
            let Some(d) = self.chars.peek().copied() else { break };
            // a name never swallows the arrow of `x->y`
            if d == '-' {
                let mut clone = self.chars.clone();
                clone.next();
                if clone.peek() == Some(&'>') {
                    break;
                }
            }
            if is_name_char(d) {
                name.push(d);
                self.chars.next();
            } else {
                break;
            }
        }
        Ok(Some(match name.as_str() {
            "axiom" => Tok::Word("axiom"),
            "prod" => Tok::Word("prod"),
            _ => Tok::Name(name),
        }))
    }
}

struct LineParser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    bank: &'a mut Bank,
}

impl<'a> LineParser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax(format!("line {}: {}", self.line, msg))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(ref t) if t == want => Ok(()),
            other => Err(self.err(&format!("expected {what}, found {other:?}"))),
        }
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Name(n)) => Ok(n),
            other => Err(self.err(&format!("expected {what}, found {other:?}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let n = self.name(what)?;
        n.parse().map_err(|_| self.err(&format!("expected {what}, found `{n}`")))
    }

    fn pterm(&mut self) -> Result<PTerm> {
        match self.next() {
            Some(Tok::Param(i)) => Ok(self.bank.param(i)),
            Some(Tok::Name(n)) => {
                let sym = self.bank.sym(&n);
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    loop {
                        args.push(self.pterm()?);
                        match self.next() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RParen) => break,
                            other => {
                                return Err(self.err(&format!(
                                    "expected `,` or `)` in proof term, found {other:?}"
                                )))
                            }
                        }
                    }
                }
                Ok(self.bank.papp(sym, &args))
            }
            other => Err(self.err(&format!("expected proof term, found {other:?}"))),
        }
    }

    fn fterm(&mut self, vars: &mut FxHashMap<String, u32>) -> Result<FTerm> {
        match self.next() {
            Some(Tok::Var(v)) => {
                let n = vars.len() as u32;
                let id = *vars.entry(v).or_insert(n);
                Ok(self.bank.fvar(id))
            }
            Some(Tok::Name(n)) => {
                let sym = self.bank.sym(&n);
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    loop {
                        args.push(self.fterm(vars)?);
                        match self.next() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RParen) => break,
                            other => {
                                return Err(self.err(&format!(
                                    "expected `,` or `)` in formula, found {other:?}"
                                )))
                            }
                        }
                    }
                }
                Ok(self.bank.fapp(sym, &args))
            }
            other => Err(self.err(&format!("expected formula term, found {other:?}"))),
        }
    }

    fn clause(&mut self) -> Result<Clause> {
        let mut vars = FxHashMap::default();
        let head = self.fterm(&mut vars)?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::RevArrow) {
            self.next();
            loop {
                body.push(self.fterm(&mut vars)?);
                if self.peek() == Some(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        Ok(Clause { head, body })
    }
}

/// Parse a PGT document into a KB.  Structural validation beyond syntax
/// (ordering, arities) is left to [`crate::grammar::validate_grammar`].
pub fn read(bank: &mut Bank, text: &str) -> Result<Kb> {
    let mut base = Base::new();
    let mut prods = Vec::new();
    let mut stated = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut lexer = Lexer::new(raw, line);
        let mut toks = Vec::new();
        while let Some(t) = lexer.next_tok()? {
            toks.push(t);
        }
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { toks, pos: 0, line, bank };
        match p.next() {
            Some(Tok::Word("axiom")) => {
                let name = p.name("axiom name")?;
                p.expect(&Tok::Slash, "`/`")?;
                let arity = p.number("axiom arity")?;
                p.expect(&Tok::Colon, "`:`")?;
                let clause = p.clause()?;
                if clause.body.len() != arity as usize {
                    return Err(p.err(&format!(
                        "axiom `{name}` declares arity {arity} but clause body has {} atoms",
                        clause.body.len()
                    )));
                }
                if p.peek().is_some() {
                    return Err(p.err("trailing tokens after axiom declaration"));
                }
                let sym = p.bank.sym(&name);
                let canon = formula::canonicalize_clause(p.bank, &clause).0;
                if !base.insert(sym, canon) {
                    return Err(Error::DuplicateLabel(name));
                }
            }
            Some(Tok::Word("prod")) => {
                let name = p.name("production name")?;
                p.expect(&Tok::LParen, "`(`")?;
                let arity = p.number("production arity")?;
                p.expect(&Tok::RParen, "`)`")?;
                p.expect(&Tok::Arrow, "`->`")?;
                let rhs = p.pterm()?;
                let clause = if p.peek() == Some(&Tok::Colon) {
                    p.next();
                    let c = p.clause()?;
                    Some(formula::canonicalize_clause(p.bank, &c).0)
                } else {
                    None
                };
                if p.peek().is_some() {
                    return Err(p.err("trailing tokens after production"));
                }
                if let Some(c) = &clause {
                    if c.body.len() != arity as usize {
                        return Err(p.err(&format!(
                            "production `{name}` has arity {arity} but stated clause body has {} atoms",
                            c.body.len()
                        )));
                    }
                }
                let sym = p.bank.sym(&name);
                prods.push(Production { name: sym, arity, rhs });
                stated.push(clause);
            }
            other => {
                return Err(Error::Syntax(format!(
                    "line {line}: expected `axiom` or `prod`, found {other:?}"
                )))
            }
        }
    }
    Ok(Kb::new(base, Grammar::new(prods), stated))
}

/// Serialize a KB; `header` lines are emitted first as `#` comments.
pub fn write(bank: &Bank, kb: &Kb, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    for (name, clause) in &kb.base.entries {
        out.push_str("axiom ");
        push_name(bank.sym_name(*name), &mut out);
        out.push('/');
        out.push_str(&clause.body.len().to_string());
        out.push_str(" : ");
        write_clause(bank, clause, &mut out);
        out.push('\n');
    }
    for (p, st) in kb.grammar.prods.iter().zip(&kb.stated) {
        out.push_str("prod ");
        push_name(bank.sym_name(p.name), &mut out);
        out.push('(');
        out.push_str(&p.arity.to_string());
        out.push_str(") -> ");
        term::write_pterm(bank, p.rhs, &mut out, push_name);
        if let Some(c) = st {
            out.push_str(" : ");
            write_clause(bank, c, &mut out);
        }
        out.push('\n');
    }
    out
}

fn write_clause(bank: &Bank, clause: &Clause, out: &mut String) {
    let emit_var = |v: u32, buf: &mut String| {
        buf.push_str("?x");
        buf.push_str(&(v + 1).to_string());
    };
    formula::write_fterm(bank, clause.head, out, &emit_var);
    if !clause.body.is_empty() {
        out.push_str(" <- ");
        for (k, &b) in clause.body.iter().enumerate() {
            if k > 0 {
                out.push_str(" , ");
            }
            formula::write_fterm(bank, b, out, &emit_var);
        }
    }
}
