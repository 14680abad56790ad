//! Syntax-grammar-driven formula parsing.
//!
//! Metamath stores formulas as token sequences; parsing them into terms uses
//! a context-free grammar generated from the database's declarations: every
//! syntax axiom (`$a` with a non-provability typecode) is a production whose
//! nonterminals are typecodes, and an active `$f` variable is a leaf of its
//! typecode.  An Earley chart recognizer with left-corner filtering handles
//! the (large) set.mm grammar; exactly one parse is required.

use crate::bank::{Bank, FTerm, Sym};
use crate::error::{Error, Result};
use rustc_hash::{FxHashMap, FxHashSet};

use super::parser::{Database, StmtId, StmtKind, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SySym {
    Const(Tok),
    /// Nonterminal (typecode); `slot` is the argument position among the
    /// axiom's mandatory `$f` hypotheses (the functor argument order).
    Nt { cat: Tok, slot: u8 },
}

#[derive(Debug)]
pub struct SyntaxProd {
    pub stmt: StmtId,
    pub lhs: Tok,
    pub symbols: Box<[SySym]>,
    pub arity: u8,
}

#[derive(Debug, Default)]
pub struct SyntaxGrammar {
    pub prods: Vec<SyntaxProd>,
    /// Productions by (lhs, first constant).
    by_const: FxHashMap<(Tok, Tok), Vec<u32>>,
    /// Productions by lhs whose first symbol is a nonterminal.
    by_nt_first: FxHashMap<Tok, Vec<u32>>,
    /// Syntactic typecodes seen as production LHS or `$f` typecodes.
    pub categories: FxHashSet<Tok>,
    /// Functor label per production (for unparsing).
    by_label: FxHashMap<String, u32>,
}

impl SyntaxGrammar {
    /// Build from all syntax axioms up to (and excluding) `upto`.
    pub fn build(db: &Database, provable: &FxHashSet<Tok>, upto: Option<StmtId>) -> Result<Self> {
        let mut g = SyntaxGrammar::default();
        let end = upto.unwrap_or(db.statements.len() as StmtId);
        for id in 0..end {
            let stmt = db.stmt(id);
            match stmt.kind {
                StmtKind::Float => {
                    g.categories.insert(stmt.typecode);
                }
                StmtKind::Axiom if !provable.contains(&stmt.typecode) => {
                    let frame = stmt.frame.as_ref().unwrap();
                    let mut var_slot: FxHashMap<Tok, (Tok, u8)> = FxHashMap::default();
                    let mut arity = 0u8;
                    for &h in frame.hyps.iter() {
                        let hs = db.stmt(h);
                        if hs.kind == StmtKind::Float {
                            var_slot.insert(hs.var.unwrap(), (hs.typecode, arity));
                            arity += 1;
                        }
                    }
                    if stmt.expr.is_empty() {
                        return Err(Error::Syntax(format!(
                            "syntax axiom `{}` has an empty expression",
                            stmt.label
                        )));
                    }
                    let mut symbols = Vec::with_capacity(stmt.expr.len());
                    let mut seen: FxHashSet<Tok> = FxHashSet::default();
                    for &t in stmt.expr.iter() {
                        if db.var_toks[t.0 as usize] {
                            let &(cat, slot) = var_slot.get(&t).ok_or_else(|| {
                                Error::Syntax(format!(
                                    "variable `{}` of `{}` has no mandatory $f",
                                    db.tok_name(t),
                                    stmt.label
                                ))
                            })?;
                            if !seen.insert(t) {
                                return Err(Error::Syntax(format!(
                                    "variable `{}` repeats in syntax axiom `{}`",
                                    db.tok_name(t),
                                    stmt.label
                                )));
                            }
                            symbols.push(SySym::Nt { cat, slot });
                        } else {
                            symbols.push(SySym::Const(t));
                        }
                    }
                    let pid = g.prods.len() as u32;
                    match symbols[0] {
                        SySym::Const(c) => {
                            g.by_const.entry((stmt.typecode, c)).or_default().push(pid)
                        }
                        SySym::Nt { .. } => {
                            g.by_nt_first.entry(stmt.typecode).or_default().push(pid)
                        }
                    }
                    g.categories.insert(stmt.typecode);
                    g.by_label.insert(stmt.label.clone(), pid);
                    g.prods.push(SyntaxProd {
                        stmt: id,
                        lhs: stmt.typecode,
                        symbols: symbols.into_boxed_slice(),
                        arity,
                    });
                }
                _ => {}
            }
        }
        Ok(g)
    }

    pub fn production_for_label(&self, label: &str) -> Option<&SyntaxProd> {
        self.by_label.get(label).map(|&i| &self.prods[i as usize])
    }
}

/// Variables visible to one parse: token -> (category, formula variable id).
pub type VarEnv = FxHashMap<Tok, (Tok, u32)>;

/// Collect the `$f` variables of an assertion's frame into a [`VarEnv`],
/// allocating formula-variable ids in frame order.
pub fn frame_var_env(db: &Database, frame: &super::parser::Frame) -> VarEnv {
    let mut env = VarEnv::default();
    for &h in frame.hyps.iter() {
        let hs = db.stmt(h);
        if hs.kind == StmtKind::Float {
            let next = env.len() as u32;
            env.insert(hs.var.unwrap(), (hs.typecode, next));
        }
    }
    env
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    prod: u32,
    dot: u16,
    origin: u32,
}

struct StateSet {
    items: Vec<Item>,
    seen: FxHashSet<Item>,
    /// Items whose next symbol is the given nonterminal.
    waiting: FxHashMap<Tok, Vec<Item>>,
    predicted: FxHashSet<Tok>,
}

impl StateSet {
    fn new() -> Self {
        StateSet {
            items: Vec::new(),
            seen: FxHashSet::default(),
            waiting: FxHashMap::default(),
            predicted: FxHashSet::default(),
        }
    }

    fn add(&mut self, item: Item) {
        if self.seen.insert(item) {
            self.items.push(item);
        }
    }
}

pub struct FormulaParser<'a> {
    pub db: &'a Database,
    pub grammar: &'a SyntaxGrammar,
}

impl<'a> FormulaParser<'a> {
    /// Parse `tokens` as category `goal`, mapping variable leaves through
    /// `env`.  Exactly one parse tree is required.
    pub fn parse(
        &self,
        bank: &mut Bank,
        env: &VarEnv,
        tokens: &[Tok],
        goal: Tok,
        label: &str,
    ) -> Result<FTerm> {
        let completed = self.recognize(env, tokens, goal, label)?;
        let mut builder = TreeRebuilder {
            parser: self,
            env,
            tokens,
            completed: &completed,
            label,
        };
        builder.build(bank, goal, 0, tokens.len() as u32)
    }

    fn recognize(
        &self,
        env: &VarEnv,
        tokens: &[Tok],
        goal: Tok,
        label: &str,
    ) -> Result<FxHashSet<(Tok, u32, u32)>> {
        let n = tokens.len();
        let mut sets: Vec<StateSet> = (0..=n).map(|_| StateSet::new()).collect();
        let mut completed: FxHashSet<(Tok, u32, u32)> = FxHashSet::default();
        let mut max_pos = 0usize;
        // seed
        self.predict(&mut sets, &mut completed, env, tokens, 0, goal);
        for pos in 0..=n {
            let mut idx = 0;
            while idx < sets[pos].items.len() {
                let item = sets[pos].items[idx];
                idx += 1;
                let prod = &self.grammar.prods[item.prod as usize];
                if (item.dot as usize) == prod.symbols.len() {
                    // completion
                    let key = (prod.lhs, item.origin, pos as u32);
                    if completed.insert(key) {
                        let waiters = sets[item.origin as usize]
                            .waiting
                            .get(&prod.lhs)
                            .cloned()
                            .unwrap_or_default();
                        for w in waiters {
                            sets[pos].add(Item { prod: w.prod, dot: w.dot + 1, origin: w.origin });
                        }
                    }
                    continue;
                }
                match prod.symbols[item.dot as usize] {
                    SySym::Const(c) => {
                        if pos < n && tokens[pos] == c {
                            max_pos = max_pos.max(pos + 1);
                            sets[pos + 1].add(Item {
                                prod: item.prod,
                                dot: item.dot + 1,
                                origin: item.origin,
                            });
                        }
                    }
                    SySym::Nt { cat, .. } => {
                        sets[pos].waiting.entry(cat).or_default().push(item);
                        self.predict(&mut sets, &mut completed, env, tokens, pos, cat);
                        // the only completion that can already exist with
                        // origin `pos` is a variable leaf (no epsilon rules,
                        // and longer spans are discovered at later positions)
                        if pos < n {
                            if let Some(&(vcat, _)) = env.get(&tokens[pos]) {
                                if vcat == cat {
                                    completed.insert((cat, pos as u32, pos as u32 + 1));
                                    max_pos = max_pos.max(pos + 1);
                                    sets[pos + 1].add(Item {
                                        prod: item.prod,
                                        dot: item.dot + 1,
                                        origin: item.origin,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        if completed.contains(&(goal, 0, n as u32)) {
            Ok(completed)
        } else {
            Err(Error::NoParse {
                what: format!("category `{}`", self.db.tok_name(goal)),
                label: label.to_owned(),
                pos: max_pos,
            })
        }
    }

    fn predict(
        &self,
        sets: &mut [StateSet],
        completed: &mut FxHashSet<(Tok, u32, u32)>,
        env: &VarEnv,
        tokens: &[Tok],
        pos: usize,
        cat: Tok,
    ) {
        let mut work = vec![cat];
        while let Some(cat) = work.pop() {
            if !sets[pos].predicted.insert(cat) {
                continue;
            }
            // variable leaf
            if pos < tokens.len() {
                if let Some(&(vcat, _)) = env.get(&tokens[pos]) {
                    if vcat == cat {
                        completed.insert((cat, pos as u32, pos as u32 + 1));
                    }
                }
                // productions starting with the next constant
                if let Some(pids) = self.grammar.by_const.get(&(cat, tokens[pos])) {
                    for &p in pids {
                        sets[pos].add(Item { prod: p, dot: 0, origin: pos as u32 });
                    }
                }
            }
            // productions starting with a nonterminal: predict the left corner
            if let Some(pids) = self.grammar.by_nt_first.get(&cat) {
                for &p in pids {
                    sets[pos].add(Item { prod: p, dot: 0, origin: pos as u32 });
                    if let SySym::Nt { cat: inner, .. } =
                        self.grammar.prods[p as usize].symbols[0]
                    {
                        work.push(inner);
                    }
                }
            }
        }
    }
}

struct TreeRebuilder<'a, 'b> {
    parser: &'b FormulaParser<'a>,
    env: &'b VarEnv,
    tokens: &'b [Tok],
    completed: &'b FxHashSet<(Tok, u32, u32)>,
    label: &'b str,
}

#[derive(Debug, Clone)]
enum Option1 {
    Leaf(u32),
    Prod(u32, Vec<(Tok, u32, u32)>),
}

impl<'a, 'b> TreeRebuilder<'a, 'b> {
    fn build(&mut self, bank: &mut Bank, cat: Tok, from: u32, to: u32) -> Result<FTerm> {
        let mut options: Vec<Option1> = Vec::new();
        // variable leaf
        if to == from + 1 {
            if let Some(&(vcat, vid)) = self.env.get(&self.tokens[from as usize]) {
                if vcat == cat {
                    options.push(Option1::Leaf(vid));
                }
            }
        }
        // productions
        let first = self.tokens[from as usize];
        let mut pids: Vec<u32> = Vec::new();
        if let Some(v) = self.parser.grammar.by_const.get(&(cat, first)) {
            pids.extend_from_slice(v);
        }
        if let Some(v) = self.parser.grammar.by_nt_first.get(&cat) {
            pids.extend_from_slice(v);
        }
        for pid in pids {
            let prod = &self.parser.grammar.prods[pid as usize];
            let mut splits: Vec<Vec<(Tok, u32, u32)>> = Vec::new();
            self.enumerate_splits(prod, 0, from, to, &mut Vec::new(), &mut splits);
            for s in splits {
                options.push(Option1::Prod(pid, s));
                if options.len() > 1 {
                    return Err(Error::AmbiguousParse {
                        label: self.label.to_owned(),
                        from: from as usize,
                        to: to as usize,
                    });
                }
            }
        }
        match options.len() {
            0 => Err(Error::Internal(format!(
                "no derivation for recognized span {from}..{to} in `{}`",
                self.label
            ))),
            1 => match options.pop().unwrap() {
                Option1::Leaf(vid) => Ok(bank.fvar(vid)),
                Option1::Prod(pid, children) => {
                    let prod = &self.parser.grammar.prods[pid as usize];
                    let label = self.parser.db.stmt(prod.stmt).label.clone();
                    let arity = prod.arity as usize;
                    let mut args: Vec<Option<FTerm>> = vec![None; arity];
                    let mut nts = prod
                        .symbols
                        .iter()
                        .filter_map(|s| match s {
                            SySym::Nt { slot, .. } => Some(*slot),
                            SySym::Const(_) => None,
                        });
                    for (cat2, f, t) in children {
                        let slot = nts.next().unwrap();
                        args[slot as usize] = Some(self.build(bank, cat2, f, t)?);
                    }
                    let sym = bank.sym(&label);
                    let args: Vec<FTerm> = args.into_iter().map(|a| a.unwrap()).collect();
                    Ok(bank.fapp(sym, &args))
                }
            },
            _ => unreachable!(),
        }
    }

    /// All ways production symbols `k..` can span `pos..to` (children spans
    /// of nonterminal symbols recorded in order); stops after 2.
    fn enumerate_splits(
        &self,
        prod: &SyntaxProd,
        k: usize,
        pos: u32,
        to: u32,
        acc: &mut Vec<(Tok, u32, u32)>,
        out: &mut Vec<Vec<(Tok, u32, u32)>>,
    ) {
        if out.len() >= 2 {
            return;
        }
        if k == prod.symbols.len() {
            if pos == to {
                out.push(acc.clone());
            }
            return;
        }
        match prod.symbols[k] {
            SySym::Const(c) => {
                if pos < to && self.tokens[pos as usize] == c {
                    self.enumerate_splits(prod, k + 1, pos + 1, to, acc, out);
                }
            }
            SySym::Nt { cat, .. } => {
                // try every completed span of `cat` starting at pos
                for end in (pos + 1)..=to {
                    if self.completed.contains(&(cat, pos, end)) {
                        acc.push((cat, pos, end));
                        self.enumerate_splits(prod, k + 1, end, to, acc, out);
                        acc.pop();
                        if out.len() >= 2 {
                            return;
                        }
                    }
                }
            }
        }
    }
}

/// Unparse a formula term back into the token sequence it came from.
pub fn unparse(
    bank: &Bank,
    db: &Database,
    grammar: &SyntaxGrammar,
    t: FTerm,
    var_tokens: &FxHashMap<u32, Tok>,
    out: &mut Vec<Tok>,
) -> Result<()> {
    match bank.fnode(t).clone() {
        crate::bank::FNode::Var(v) => {
            let tok = var_tokens.get(&v).ok_or_else(|| {
                Error::Internal(format!("no token for formula variable {v}"))
            })?;
            out.push(*tok);
            Ok(())
        }
        crate::bank::FNode::App(f, args) => {
            let label = bank.sym_name(f);
            let prod = grammar.production_for_label(label).ok_or_else(|| {
                Error::Internal(format!("no syntax production for functor `{label}`"))
            })?;
            if prod.arity as usize != args.len() {
                return Err(Error::Internal(format!(
                    "functor `{label}` arity mismatch in unparse"
                )));
            }
            for sym in prod.symbols.iter() {
                match *sym {
                    SySym::Const(c) => out.push(c),
                    SySym::Nt { slot, .. } => {
                        unparse(bank, db, grammar, args[slot as usize], var_tokens, out)?;
                    }
                }
            }
            Ok(())
        }
    }
}
