//! Formula terms and definite clauses.
//!
//! A clause `A <- B1 ... Bn` stands for
//! `provable(A) <- provable(B1) /\ ... /\ provable(Bn)` with the single unary
//! predicate elided; we store just the argument terms.  Clause bodies are
//! ordered sequences.

use crate::bank::{Bank, FNode, FTerm};
use rustc_hash::FxHashMap;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: FTerm,
    pub body: Vec<FTerm>,
}

impl Clause {
    pub fn unit(head: FTerm) -> Self {
        Clause { head, body: Vec::new() }
    }

    pub fn atoms(&self) -> impl Iterator<Item = FTerm> + '_ {
        std::iter::once(self.head).chain(self.body.iter().copied())
    }
}

/// Distinct formula nodes reachable from `roots`, children before parents.
pub fn fpostorder(bank: &Bank, roots: &[FTerm]) -> Vec<FTerm> {
    let mut seen: FxHashMap<FTerm, ()> = FxHashMap::default();
    let mut out = Vec::new();
    let mut stack: Vec<(FTerm, bool)> = Vec::new();
    for &r in roots {
        if seen.contains_key(&r) {
            continue;
        }
        stack.push((r, false));
        while let Some((t, done)) = stack.pop() {
            if done {
                out.push(t);
                continue;
            }
            if seen.contains_key(&t) {
                continue;
            }
            seen.insert(t, ());
            stack.push((t, true));
            if let FNode::App(_, args) = bank.fnode(t) {
                for &c in args.iter() {
                    if !seen.contains_key(&c) {
                        stack.push((c, false));
                    }
                }
            }
        }
    }
    out
}

/// Weight of a formula term: variables and constants weigh 0,
/// `f(t1..tn)` with `n >= 1` weighs `1 + sum |ti|`.
pub fn fterm_weight(bank: &Bank, t: FTerm) -> u64 {
    let mut memo: FxHashMap<FTerm, u64> = FxHashMap::default();
    for n in fpostorder(bank, &[t]) {
        let w = match bank.fnode(n) {
            FNode::Var(_) => 0,
            FNode::App(_, args) if args.is_empty() => 0,
            FNode::App(_, args) => 1 + args.iter().map(|c| memo[c]).sum::<u64>(),
        };
        memo.insert(n, w);
    }
    memo[&t]
}

/// Nesting depth with the same base cases as [`fterm_weight`].
pub fn fterm_height(bank: &Bank, t: FTerm) -> u64 {
    let mut memo: FxHashMap<FTerm, u64> = FxHashMap::default();
    for n in fpostorder(bank, &[t]) {
        let h = match bank.fnode(n) {
            FNode::Var(_) => 0,
            FNode::App(_, args) if args.is_empty() => 0,
            FNode::App(_, args) => 1 + args.iter().map(|c| memo[c]).max().unwrap_or(0),
        };
        memo.insert(n, h);
    }
    memo[&t]
}

/// Size and height of a clause: the sum resp. maximum over head and body
/// atoms of the term weight resp. height.
pub fn clause_metrics(bank: &Bank, f: &Clause) -> (u64, u64) {
    let size = f.atoms().map(|a| fterm_weight(bank, a)).sum();
    let height = f.atoms().map(|a| fterm_height(bank, a)).max().unwrap_or(0);
    (size, height)
}

/// Variables in first-occurrence (leftmost, depth-first over the tree view)
/// order.  Computed on the DAG: per node, child orders are concatenated left
/// to right and deduplicated, which agrees with the tree-view order.
pub fn fvars_in_order(bank: &Bank, roots: &[FTerm]) -> Vec<u32> {
    let order = fpostorder(bank, roots);
    let mut per_node: FxHashMap<FTerm, Vec<u32>> = FxHashMap::default();
    for n in order {
        let vars = match bank.fnode(n) {
            FNode::Var(v) => vec![*v],
            FNode::App(_, args) => {
                let mut acc: Vec<u32> = Vec::new();
                for c in args.iter() {
                    for &v in &per_node[c] {
                        if !acc.contains(&v) {
                            acc.push(v);
                        }
                    }
                }
                acc
            }
        };
        per_node.insert(n, vars);
    }
    let mut out: Vec<u32> = Vec::new();
    for &r in roots {
        for &v in &per_node[&r] {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Rebuild `t` with variables renamed by `map` (total on vars of `t`).
pub fn rename_vars(bank: &mut Bank, t: FTerm, map: &FxHashMap<u32, u32>) -> FTerm {
    let order = fpostorder(bank, &[t]);
    let mut images: FxHashMap<FTerm, FTerm> = FxHashMap::default();
    for n in order {
        let img = match bank.fnode(n).clone() {
            FNode::Var(v) => bank.fvar(map[&v]),
            FNode::App(f, args) => {
                let new: Vec<FTerm> = args.iter().map(|c| images[c]).collect();
                if new == args.as_slice() {
                    n
                } else {
                    bank.fapp(f, &new)
                }
            }
        };
        images.insert(n, img);
    }
    images[&t]
}

/// Canonical form: variables renamed to `0, 1, ...` in first-occurrence
/// order over the head, then the body atoms left to right.  Two clauses are
/// variants with identical body order iff their canonical forms are equal.
pub fn canonicalize_clause(bank: &mut Bank, f: &Clause) -> (Clause, u32) {
    let mut roots = vec![f.head];
    roots.extend(f.body.iter().copied());
    let vars = fvars_in_order(bank, &roots);
    let map: FxHashMap<u32, u32> = vars
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();
    let head = rename_vars(bank, f.head, &map);
    let body = f.body.iter().map(|&b| rename_vars(bank, b, &map)).collect();
    (Clause { head, body }, vars.len() as u32)
}

/// Renaming-invariant structural fingerprint of a formula term. Variables
/// all hash alike, so variants collide; used to bucket candidates before
/// exact variant/subsumption checks.
pub fn shape_hash(bank: &Bank, t: FTerm) -> u64 {
    let mut memo: FxHashMap<FTerm, u64> = FxHashMap::default();
    for n in fpostorder(bank, &[t]) {
        let h = match bank.fnode(n) {
            FNode::Var(_) => 0x9e3779b97f4a7c15,
            FNode::App(f, args) => {
                let mut h = 0xcbf29ce484222325u64 ^ (f.0 as u64).wrapping_mul(0x100000001b3);
                for c in args.iter() {
                    h = h.rotate_left(13) ^ memo[c].wrapping_mul(0x100000001b3);
                }
                h
            }
        };
        memo.insert(n, h);
    }
    memo[&t]
}

pub fn fmt_fterm(bank: &Bank, t: FTerm) -> String {
    let mut out = String::new();
    write_fterm(bank, t, &mut out, &|v, buf| {
        buf.push_str("?x");
        buf.push_str(&(v + 1).to_string());
    });
    out
}

/// Iterative formula printer with caller-controlled variable rendering.
pub fn write_fterm(
    bank: &Bank,
    t: FTerm,
    out: &mut String,
    emit_var: &dyn Fn(u32, &mut String),
) {
    enum Tok {
        Term(FTerm),
        Text(&'static str),
    }
    let mut stack = vec![Tok::Term(t)];
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Text(s) => out.push_str(s),
            Tok::Term(t) => match bank.fnode(t) {
                FNode::Var(v) => emit_var(*v, out),
                FNode::App(f, args) => {
                    crate::pgt::push_name(bank.sym_name(*f), out);
                    if !args.is_empty() {
                        out.push('(');
                        stack.push(Tok::Text(")"));
                        for (k, &c) in args.iter().enumerate().rev() {
                            stack.push(Tok::Term(c));
                            if k > 0 {
                                stack.push(Tok::Text(","));
                            }
                        }
                    }
                }
            },
        }
    }
}

pub fn fmt_clause(bank: &Bank, f: &Clause) -> String {
    let mut out = fmt_fterm(bank, f.head);
    if !f.body.is_empty() {
        out.push_str(" <- ");
        for (k, &b) in f.body.iter().enumerate() {
            if k > 0 {
                out.push_str(" , ");
            }
            out.push_str(&fmt_fterm(bank, b));
        }
    }
    out
}
