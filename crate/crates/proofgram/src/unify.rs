//! First-order unification, matching and clause subsumption.
//!
//! Internally terms are handled as *views* `(term, offset)`: the offset
//! shifts the variable namespace, which renames clauses apart without
//! rebuilding them.  Bindings are triangular and resolved by walking;
//! idempotent substitutions are materialized only at the end.

use crate::bank::{Bank, FNode, FTerm};
use crate::formula::{self, Clause};
use rustc_hash::{FxHashMap, FxHashSet};

/// Idempotent substitution: domain variables do not occur in range terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Subst {
    pub map: FxHashMap<u32, FTerm>,
}

impl Subst {
    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }
}

/// Variable view: offset-shifted variable key.
fn key(var: u32, off: u32) -> u64 {
    ((off as u64) << 32) | var as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct View(pub FTerm, pub u32);

#[derive(Debug, Default)]
pub struct UnifyCtx {
    bind: FxHashMap<u64, View>,
    trail: Vec<u64>,
    /// In matching mode only variables with offset >= this bind; others are
    /// rigid.  `0` means everything binds (full unification).
    rigid_below: u32,
}

impl UnifyCtx {
    pub fn new() -> Self {
        UnifyCtx::default()
    }

    pub fn matching(rigid_below: u32) -> Self {
        UnifyCtx { rigid_below, ..UnifyCtx::default() }
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn rollback(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let k = self.trail.pop().unwrap();
            self.bind.remove(&k);
        }
    }

    fn resolve(&self, bank: &Bank, mut v: View) -> View {
        loop {
            match bank.fnode(v.0) {
                FNode::Var(x) => match self.bind.get(&key(*x, v.1)) {
                    Some(&next) => v = next,
                    None => return v,
                },
                _ => return v,
            }
        }
    }

    fn occurs(&self, bank: &Bank, var_key: u64, t: View) -> bool {
        let mut visited: FxHashSet<(FTerm, u32)> = FxHashSet::default();
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            let v = self.resolve(bank, v);
            if !visited.insert((v.0, v.1)) {
                continue;
            }
            match bank.fnode(v.0) {
                FNode::Var(x) => {
                    if key(*x, v.1) == var_key {
                        return true;
                    }
                }
                FNode::App(_, args) => {
                    for &c in args.iter() {
                        stack.push(View(c, v.1));
                    }
                }
            }
        }
        false
    }

    fn bind(&mut self, k: u64, t: View) {
        self.bind.insert(k, t);
        self.trail.push(k);
    }

    /// Unify two views under the current bindings; false on clash or occurs
    /// check, with all new bindings still recorded on the trail (callers
    /// roll back on failure when they need to).
    pub fn unify(&mut self, bank: &Bank, a: View, b: View) -> bool {
        let mut work = vec![(a, b)];
        while let Some((a, b)) = work.pop() {
            let a = self.resolve(bank, a);
            let b = self.resolve(bank, b);
            if a == b {
                continue;
            }
            match (bank.fnode(a.0).clone(), bank.fnode(b.0).clone()) {
                (FNode::Var(x), FNode::Var(_)) if a.1 >= self.rigid_below => {
                    self.bind(key(x, a.1), b);
                }
                (FNode::Var(_), FNode::Var(y)) if b.1 >= self.rigid_below => {
                    self.bind(key(y, b.1), a);
                }
                (FNode::Var(x), _) if a.1 >= self.rigid_below => {
                    if self.occurs(bank, key(x, a.1), b) {
                        return false;
                    }
                    self.bind(key(x, a.1), b);
                }
                (_, FNode::Var(y)) if b.1 >= self.rigid_below => {
                    if self.occurs(bank, key(y, b.1), a) {
                        return false;
                    }
                    self.bind(key(y, b.1), a);
                }
                (FNode::Var(_), _) | (_, FNode::Var(_)) => return false,
                (FNode::App(f, fa), FNode::App(g, ga)) => {
                    if f != g || fa.len() != ga.len() {
                        return false;
                    }
                    for (&x, &y) in fa.iter().zip(ga.iter()).rev() {
                        work.push((View(x, a.1), View(y, b.1)));
                    }
                }
            }
        }
        true
    }

    /// Fully resolve a view into a plain term; unbound variables of offset
    /// `o` are renamed through `var_out` (shared across calls on one ctx).
    pub fn materialize(
        &self,
        bank: &mut Bank,
        t: View,
        var_out: &mut dyn FnMut(&mut Bank, u64) -> FTerm,
    ) -> FTerm {
        let mut memo: FxHashMap<(FTerm, u32), FTerm> = FxHashMap::default();
        self.materialize_memo(bank, t, var_out, &mut memo)
    }

    /// As [`Self::materialize`] but with a caller-owned memo, so several
    /// views can share structure (and variable naming via `var_out`).
    pub fn materialize_with(
        &self,
        bank: &mut Bank,
        t: View,
        var_out: &mut dyn FnMut(&mut Bank, u64) -> FTerm,
        memo: &mut FxHashMap<(FTerm, u32), FTerm>,
    ) -> FTerm {
        self.materialize_memo(bank, t, var_out, memo)
    }

    fn materialize_memo(
        &self,
        bank: &mut Bank,
        root: View,
        var_out: &mut dyn FnMut(&mut Bank, u64) -> FTerm,
        memo: &mut FxHashMap<(FTerm, u32), FTerm>,
    ) -> FTerm {
        // iterative: explicit stack over unresolved views
        enum Task {
            Visit(View),
            Build(View),
        }
        let mut stack = vec![Task::Visit(root)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(v) => {
                    if memo.contains_key(&(v.0, v.1)) {
                        continue;
                    }
                    let r = self.resolve(bank, v);
                    match bank.fnode(r.0).clone() {
                        FNode::Var(x) => {
                            let out = var_out(bank, key(x, r.1));
                            memo.insert((r.0, r.1), out);
                            if r != v {
                                memo.insert((v.0, v.1), out);
                            }
                        }
                        FNode::App(_, args) => {
                            stack.push(Task::Build(v));
                            for &c in args.iter() {
                                stack.push(Task::Visit(View(c, r.1)));
                            }
                        }
                    }
                }
                Task::Build(v) => {
                    if memo.contains_key(&(v.0, v.1)) {
                        continue;
                    }
                    let r = self.resolve(bank, v);
                    let (f, args) = match bank.fnode(r.0).clone() {
                        FNode::App(f, args) => (f, args),
                        FNode::Var(_) => unreachable!("Build on var view"),
                    };
                    let new: Vec<FTerm> = args.iter().map(|&c| memo[&(c, r.1)]).collect();
                    let out = bank.fapp(f, &new);
                    memo.insert((r.0, r.1), out);
                    if r != v {
                        memo.insert((v.0, v.1), out);
                    }
                }
            }
        }
        memo[&(root.0, root.1)]
    }
}

/// Most general unifier of a set of sets of terms (all in one variable
/// space): the most general substitution making every nonempty set a
/// singleton.  `None` (UNDEFINED) on clash or occurs-check failure.
pub fn mgu(bank: &mut Bank, sets: &[Vec<FTerm>]) -> Option<Subst> {
    let mut ctx = UnifyCtx::new();
    for set in sets {
        for pair in set.windows(2) {
            if !ctx.unify(bank, View(pair[0], 0), View(pair[1], 0)) {
                return None;
            }
        }
    }
    Some(extract_subst(&ctx, bank))
}

fn extract_subst(ctx: &UnifyCtx, bank: &mut Bank) -> Subst {
    let mut keys: Vec<u64> = ctx.bind.keys().copied().collect();
    keys.sort_unstable();
    let mut map = FxHashMap::default();
    for k in keys {
        debug_assert_eq!(k >> 32, 0, "public mgu operates at offset 0");
        let var = (k & 0xffff_ffff) as u32;
        let vt = bank.fvar(var);
        let resolved = ctx.materialize(bank, View(vt, 0), &mut |bank, kk| {
            bank.fvar((kk & 0xffff_ffff) as u32)
        });
        map.insert(var, resolved);
    }
    Subst { map }
}

/// Homomorphic application of a substitution.
pub fn apply(bank: &mut Bank, subst: &Subst, t: FTerm) -> FTerm {
    let order = formula::fpostorder(bank, &[t]);
    let mut images: FxHashMap<FTerm, FTerm> = FxHashMap::default();
    for n in order {
        let img = match bank.fnode(n).clone() {
            FNode::Var(v) => subst.map.get(&v).copied().unwrap_or(n),
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

pub fn apply_clause(bank: &mut Bank, subst: &Subst, f: &Clause) -> Clause {
    Clause {
        head: apply(bank, subst, f.head),
        body: f.body.iter().map(|&b| apply(bank, subst, b)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Ordered,
    ModPermutation,
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    /// Substitution over the pattern's variables, present iff `F` is an
    /// instance of `F'` (together with the body permutation used).
    pub instance: Option<(Subst, Vec<usize>)>,
    pub variant: bool,
    pub strict: bool,
}

const SUBJ: u32 = 0;
const PAT: u32 = 1;

/// One-sided instance check: is there sigma (and, mod permutation, a body
/// permutation pi) with `f == apply(sigma, pi(pattern))`?
pub fn instance_of(
    bank: &mut Bank,
    f: &Clause,
    pattern: &Clause,
    mode: MatchMode,
) -> Option<(Subst, Vec<usize>)> {
    if f.body.len() != pattern.body.len() {
        return None;
    }
    let mut ctx = UnifyCtx::matching(PAT);
    if !ctx.unify(bank, View(pattern.head, PAT), View(f.head, SUBJ)) {
        return None;
    }
    let n = pattern.body.len();
    let perm: Vec<usize> = match mode {
        MatchMode::Ordered => {
            for (&p, &s) in pattern.body.iter().zip(f.body.iter()) {
                if !ctx.unify(bank, View(p, PAT), View(s, SUBJ)) {
                    return None;
                }
            }
            (0..n).collect()
        }
        MatchMode::ModPermutation => {
            // candidate subject atoms per pattern atom, filtered by root
            // functor compatibility
            let mut cands: Vec<Vec<usize>> = Vec::with_capacity(n);
            for &p in &pattern.body {
                let proot = match bank.fnode(p) {
                    FNode::App(g, args) => Some((*g, args.len())),
                    FNode::Var(_) => None,
                };
                let mut c = Vec::new();
                for (j, &s) in f.body.iter().enumerate() {
                    let ok = match (proot, bank.fnode(s)) {
                        (None, _) => true,
                        (Some((g, k)), FNode::App(h, args)) => g == *h && k == args.len(),
                        (Some(_), FNode::Var(_)) => false,
                    };
                    if ok {
                        c.push(j);
                    }
                }
                cands.push(c);
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| cands[i].len());
            let mut assign = vec![usize::MAX; n];
            let mut used = vec![false; n];
            if !assign_bodies(bank, &mut ctx, pattern, f, &order, &cands, 0, &mut assign, &mut used)
            {
                return None;
            }
            assign
        }
    };
    // materialize bindings of pattern vars
    let mut keys: Vec<u64> = ctx.bind.keys().copied().collect();
    keys.sort_unstable();
    let mut map = FxHashMap::default();
    for k in keys {
        if (k >> 32) as u32 != PAT {
            continue;
        }
        let var = (k & 0xffff_ffff) as u32;
        let vt = bank.fvar(var);
        let out = ctx.materialize(bank, View(vt, PAT), &mut |bank, kk| {
            bank.fvar((kk & 0xffff_ffff) as u32)
        });
        map.insert(var, out);
    }
    Some((Subst { map }, perm))
}

fn assign_bodies(
    bank: &mut Bank,
    ctx: &mut UnifyCtx,
    pattern: &Clause,
    f: &Clause,
    order: &[usize],
    cands: &[Vec<usize>],
    depth: usize,
    assign: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let i = order[depth];
    for &j in &cands[i] {
        if used[j] {
            continue;
        }
        let mark = ctx.mark();
        if ctx.unify(bank, View(pattern.body[i], PAT), View(f.body[j], SUBJ)) {
            used[j] = true;
            assign[i] = j;
            if assign_bodies(bank, ctx, pattern, f, order, cands, depth + 1, assign, used) {
                return true;
            }
            used[j] = false;
            assign[i] = usize::MAX;
        }
        ctx.rollback(mark);
    }
    false
}

/// Instance / variant / strict-instance classification of `f` against `f2`.
pub fn match_clause(bank: &mut Bank, f: &Clause, f2: &Clause, mode: MatchMode) -> MatchResult {
    let instance = instance_of(bank, f, f2, mode);
    let reverse = instance_of(bank, f2, f, mode).is_some();
    let variant = instance.is_some() && reverse;
    let strict = instance.is_some() && !reverse;
    MatchResult { instance, variant, strict }
}
