//! Most general theorems (MGT) for proof terms, grammars and KBs.
//!
//! The proves-relation is computed bottom-up over the proof-term DAG.  For a
//! parameter `V_i` the clause is `u_i <- u_1 /\ ... /\ u_k` (rule PAR); for
//! an application `p(d1..dn)` the presupposition clause `A <- B1..Bn` and
//! the children's clauses are renamed apart and
//! `mgu({{B1,B1'},..,{Bn,Bn'},{U,R1,..,Rn}})` is applied to `A <- U` (rule
//! APP).  Bodies are kept sparse: a slot for `u_i` is tracked only while
//! `V_i` actually occurs below, which makes per-node results independent of
//! the parameter budget `k` and lets them be memoized on the hash-consed
//! node.  Undefined is a value (`None`), not an error.

use crate::bank::{Bank, FTerm, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::formula::{self, Clause};
use crate::grammar::{Base, Grammar, Kb};
use crate::term;
use crate::unify::{self, MatchMode, UnifyCtx, View};
use rustc_hash::FxHashMap;

/// Clause in canonical form: variables are `0..nvars`, numbered by first
/// occurrence over the head and then the body atoms left to right.  Two
/// canonical clauses are variants (with aligned bodies) iff they are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanClause {
    pub head: FTerm,
    pub body: Vec<FTerm>,
    pub nvars: u32,
}

impl CanClause {
    pub fn clause(&self) -> Clause {
        Clause { head: self.head, body: self.body.clone() }
    }

    pub fn from_clause(bank: &mut Bank, c: &Clause) -> Self {
        let (canon, nvars) = formula::canonicalize_clause(bank, c);
        CanClause { head: canon.head, body: canon.body, nvars }
    }
}

/// Per-node MGT with sparse body: `(i, atom)` for each parameter `V_i`
/// occurring in the subterm, ascending in `i`; canonical variables.
#[derive(Debug, Clone)]
struct NodeMgt {
    head: FTerm,
    slots: Vec<(u32, FTerm)>,
    nvars: u32,
}

struct CanonVars {
    map: FxHashMap<u64, u32>,
}

impl CanonVars {
    fn new() -> Self {
        CanonVars { map: FxHashMap::default() }
    }

    fn get(&mut self, key: u64) -> u32 {
        let next = self.map.len() as u32;
        *self.map.entry(key).or_insert(next)
    }
}

/// MGT computation engine over a fixed, growable presupposition base.
/// Entries may be recorded as known-undefined (`None`), which propagates as
/// UNDEFINED rather than a lookup error.
pub struct MgtEngine {
    entries: FxHashMap<Sym, Option<CanClause>>,
    memo: FxHashMap<PTerm, Option<NodeMgt>>,
}

impl MgtEngine {
    pub fn new(bank: &mut Bank, base: &Base) -> Self {
        let mut entries = FxHashMap::default();
        for (name, clause) in &base.entries {
            entries.insert(*name, Some(CanClause::from_clause(bank, clause)));
        }
        MgtEngine { entries, memo: FxHashMap::default() }
    }

    /// Extend the base.  The memo stays valid because existing entries are
    /// never changed and memoized nodes only mention already-defined names.
    pub fn extend(&mut self, name: Sym, clause: Option<CanClause>) {
        self.entries.insert(name, clause);
    }

    pub fn lookup(&self, name: Sym) -> Option<&Option<CanClause>> {
        self.entries.get(&name)
    }

    /// MGT of `d` with parameter budget `k` (defaults to the maximal
    /// parameter index when `None` is passed).
    pub fn mgt(&mut self, bank: &mut Bank, d: PTerm, k: Option<u32>) -> Result<Option<CanClause>> {
        let maxp = term::max_param(bank, d);
        let k = k.unwrap_or(maxp);
        if k < maxp {
            return Err(Error::ParamBudget { k, max: maxp });
        }
        let node = self.node_mgt(bank, d)?;
        let Some(node) = node else { return Ok(None) };
        // assemble the k-slot body: constrained slots where present, fresh
        // unconstrained variables elsewhere
        let mut next = node.nvars;
        let mut body = Vec::with_capacity(k as usize);
        let mut slot_iter = node.slots.iter().peekable();
        for i in 1..=k {
            match slot_iter.peek() {
                Some(&&(j, atom)) if j == i => {
                    slot_iter.next();
                    body.push(atom);
                }
                _ => {
                    body.push(bank.fvar(next));
                    next += 1;
                }
            }
        }
        let clause = Clause { head: node.head, body };
        Ok(Some(CanClause::from_clause(bank, &clause)))
    }

    fn node_mgt(&mut self, bank: &mut Bank, d: PTerm) -> Result<Option<NodeMgt>> {
        for n in term::postorder(bank, &[d]) {
            if self.memo.contains_key(&n) {
                continue;
            }
            let result = self.compute_node(bank, n)?;
            self.memo.insert(n, result);
        }
        Ok(self.memo[&d].clone())
    }

    fn compute_node(&mut self, bank: &mut Bank, n: PTerm) -> Result<Option<NodeMgt>> {
        let (name, children) = match bank.pnode(n).clone() {
            PNode::Param(i) => {
                let v = bank.fvar(0);
                return Ok(Some(NodeMgt { head: v, slots: vec![(i, v)], nvars: 1 }));
            }
            PNode::App(f, args) => (f, args),
        };
        let presup = match self.entries.get(&name) {
            None => {
                return Err(Error::MissingPresupposition(
                    bank.sym_name(name).to_owned(),
                ))
            }
            Some(None) => return Ok(None),
            Some(Some(c)) => c.clone(),
        };
        if presup.body.len() != children.len() {
            return Err(Error::ArityMismatch {
                name: bank.sym_name(name).to_owned(),
                declared: presup.body.len(),
                used: children.len(),
            });
        }
        // offsets: presupposition clause at 0, child i at i+1
        let mut child_mgts = Vec::with_capacity(children.len());
        for &c in children.iter() {
            match &self.memo[&c] {
                None => return Ok(None),
                Some(m) => child_mgts.push(m.clone()),
            }
        }
        let mut ctx = UnifyCtx::new();
        for (i, cm) in child_mgts.iter().enumerate() {
            let off = (i + 1) as u32;
            if !ctx.unify(bank, View(presup.body[i], 0), View(cm.head, off)) {
                return Ok(None);
            }
        }
        // merge the children's parameter slots: for each parameter index the
        // corresponding body atoms of all children are unified
        let mut param_first: Vec<(u32, View)> = Vec::new();
        for (i, cm) in child_mgts.iter().enumerate() {
            let off = (i + 1) as u32;
            for &(j, atom) in &cm.slots {
                match param_first.iter().find(|&&(jj, _)| jj == j) {
                    None => param_first.push((j, View(atom, off))),
                    Some(&(_, first)) => {
                        if !ctx.unify(bank, first, View(atom, off)) {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        param_first.sort_by_key(|&(j, _)| j);
        // materialize canonically: head first, then slots ascending
        let mut cv = CanonVars::new();
        let mut memo: FxHashMap<(FTerm, u32), FTerm> = FxHashMap::default();
        let mut var_out = |bank: &mut Bank, key: u64| {
            let id = cv.get(key);
            bank.fvar(id)
        };
        let head = ctx.materialize_with(bank, View(presup.head, 0), &mut var_out, &mut memo);
        let mut slots = Vec::with_capacity(param_first.len());
        for (j, v) in param_first {
            let atom = ctx.materialize_with(bank, v, &mut var_out, &mut memo);
            slots.push((j, atom));
        }
        let nvars = cv.map.len() as u32;
        Ok(Some(NodeMgt { head, slots, nvars }))
    }
}

/// MGT of a proof term over a base (Def. 2 style, one-shot).
pub fn mgt(bank: &mut Bank, base: &Base, d: PTerm, k: Option<u32>) -> Result<Option<CanClause>> {
    MgtEngine::new(bank, base).mgt(bank, d, k)
}

/// UNDEFINED propagation policy for [`grammar_mgt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedMode {
    /// If any involved MGT is undefined, every nonterminal is undefined.
    #[default]
    Blanket,
    /// Only nonterminals depending on an undefined one become undefined.
    PerDependency,
}

/// Grammar-MGT: process productions in order, enriching the base with the
/// computed MGTs.
pub fn grammar_mgt(
    bank: &mut Bank,
    base: &Base,
    grammar: &Grammar,
    mode: UndefinedMode,
) -> Result<Vec<Option<CanClause>>> {
    let mut engine = MgtEngine::new(bank, base);
    let mut out = Vec::with_capacity(grammar.len());
    let mut any_undefined = false;
    for p in &grammar.prods {
        let r = engine.mgt(bank, p.rhs, Some(p.arity))?;
        any_undefined |= r.is_none();
        engine.extend(p.name, r.clone());
        out.push(r);
    }
    if mode == UndefinedMode::Blanket && any_undefined {
        out.iter_mut().for_each(|r| *r = None);
    }
    Ok(out)
}

/// Shallow-MGT: like [`grammar_mgt`] but enriching with the *stated* theorem
/// clauses.  Productions without a stated clause fall back to their computed
/// value, which coincides with the definition when `F_j` is the MGT itself.
pub fn shallow_mgt(bank: &mut Bank, kb: &Kb) -> Result<Vec<Option<CanClause>>> {
    let mut engine = MgtEngine::new(bank, &kb.base);
    let mut out = Vec::with_capacity(kb.grammar.len());
    for (p, stated) in kb.grammar.prods.iter().zip(&kb.stated) {
        let r = engine.mgt(bank, p.rhs, Some(p.arity))?;
        let entry = match stated {
            Some(f) => Some(CanClause::from_clause(bank, f)),
            None => r.clone(),
        };
        engine.extend(p.name, entry);
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremStatus {
    /// Stated clause is a variant of the shallow-MGT.
    Ok,
    /// Stated clause is a strict instance of the shallow-MGT.
    StrictInstance,
    /// Stated clause is not an instance of the shallow-MGT.
    Violation,
    /// The shallow-MGT is undefined.
    Undefined,
    /// No stated clause (machine production); nothing to check.
    Unstated,
}

#[derive(Debug)]
pub struct KbVerifyReport {
    pub statuses: Vec<TheoremStatus>,
}

impl KbVerifyReport {
    pub fn count(&self, s: TheoremStatus) -> usize {
        self.statuses.iter().filter(|&&x| x == s).count()
    }

    pub fn violations(&self) -> usize {
        self.count(TheoremStatus::Violation) + self.count(TheoremStatus::Undefined)
    }

    /// Fraction of stated clauses that are strict instances (`>mgt`).
    pub fn strict_fraction(&self) -> f64 {
        let stated = self
            .statuses
            .iter()
            .filter(|&&s| s != TheoremStatus::Unstated)
            .count();
        if stated == 0 {
            return 0.0;
        }
        self.count(TheoremStatus::StrictInstance) as f64 / stated as f64
    }
}

/// Check `F_i >= shallow-mgt(p_i)` for every stated theorem, classifying
/// variants vs strict instances (ordered-body matching).
pub fn kb_verify(bank: &mut Bank, kb: &Kb) -> Result<KbVerifyReport> {
    let shallow = shallow_mgt(bank, kb)?;
    Ok(classify(bank, kb, &shallow))
}

fn classify(bank: &mut Bank, kb: &Kb, shallow: &[Option<CanClause>]) -> KbVerifyReport {
    let mut statuses = Vec::with_capacity(kb.grammar.len());
    for (stated, sh) in kb.stated.iter().zip(shallow) {
        let status = match (stated, sh) {
            (None, _) => TheoremStatus::Unstated,
            (Some(_), None) => TheoremStatus::Undefined,
            (Some(f), Some(m)) => {
                let mclause = m.clause();
                match unify::instance_of(bank, f, &mclause, MatchMode::Ordered) {
                    None => TheoremStatus::Violation,
                    Some(_) => {
                        if unify::instance_of(bank, &mclause, f, MatchMode::Ordered).is_some() {
                            TheoremStatus::Ok
                        } else {
                            TheoremStatus::StrictInstance
                        }
                    }
                }
            }
        };
        statuses.push(status);
    }
    KbVerifyReport { statuses }
}

/// Def. 8 instance chain
/// `F_i >= shallow-mgt(p_i) >= grammar-mgt(p_i) >= mgt(val(p_i))`,
/// checking each link whenever both sides are defined; the last link only
/// for productions whose expansion fits `edge_budget`.
pub fn verify_chain(bank: &mut Bank, kb: &Kb, edge_budget: u128) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let shallow = shallow_mgt(bank, kb)?;
    let gm = grammar_mgt(bank, &kb.base, &kb.grammar, UndefinedMode::PerDependency)?;
    for (i, p) in kb.grammar.prods.iter().enumerate() {
        let name = bank.sym_name(p.name).to_owned();
        if let (Some(f), Some(sh)) = (&kb.stated[i], &shallow[i]) {
            if unify::instance_of(bank, f, &sh.clause(), MatchMode::Ordered).is_none() {
                problems.push(format!("{name}: stated clause not an instance of shallow-MGT"));
            }
        }
        if let (Some(sh), Some(g)) = (&shallow[i], &gm[i]) {
            let shc = sh.clause();
            if unify::instance_of(bank, &shc, &g.clause(), MatchMode::Ordered).is_none() {
                problems.push(format!("{name}: shallow-MGT not an instance of grammar-MGT"));
            }
        }
        if let Some(g) = &gm[i] {
            if let Some(val) = crate::compress::expand_within(bank, &kb.grammar, i, edge_budget)? {
                let vm = mgt_of_expansion(bank, &kb.base, val, p.arity)?;
                match vm {
                    None => { /* grammar-mgt defined implies mgt(val) defined; checked below */ }
                    Some(vm) => {
                        let gc = g.clause();
                        if unify::instance_of(bank, &gc, &vm.clause(), MatchMode::Ordered).is_none()
                        {
                            problems.push(format!(
                                "{name}: grammar-MGT not an instance of mgt(val)"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(problems)
}

fn mgt_of_expansion(
    bank: &mut Bank,
    base: &Base,
    val: PTerm,
    arity: u32,
) -> Result<Option<CanClause>> {
    mgt(bank, base, val, Some(arity))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Production;
    use super::tests_support::example3_base;

    fn imp(bank: &mut Bank, a: FTerm, b: FTerm) -> FTerm {
        let s = bank.sym("=>");
        bank.fapp(s, &[a, b])
    }

    fn canon(bank: &mut Bank, head: FTerm, body: Vec<FTerm>) -> CanClause {
        CanClause::from_clause(bank, &Clause { head, body })
    }

    #[test]
    fn example3_golden_mgts() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax2s = bank.sym("ax-2");
        let ax1 = bank.papp(ax1s, &[]);
        let ax2 = bank.papp(ax2s, &[]);
        let v = |bank: &mut Bank, i: u32| bank.fvar(i);

        // (i) mgt(ax-1) = x1 => (x2 => x1)
        let r = mgt(&mut bank, &base, ax1, None).unwrap().unwrap();
        let (x1, x2, x3, x4) = (
            v(&mut bank, 0),
            v(&mut bank, 1),
            v(&mut bank, 2),
            v(&mut bank, 3),
        );
        let e_in = imp(&mut bank, x2, x1);
        let e = imp(&mut bank, x1, e_in);
        assert_eq!(r, canon(&mut bank, e, vec![]));
        assert!(r.body.is_empty(), "MGT of ground term is a unit clause");

        // (ii) mgt(D(ax-1, ax-1)) = x1 => (x2 => (x3 => x2))
        let t = bank.papp(d, &[ax1, ax1]);
        let r = mgt(&mut bank, &base, t, None).unwrap().unwrap();
        let i1 = imp(&mut bank, x3, x2);
        let i2 = imp(&mut bank, x2, i1);
        let e = imp(&mut bank, x1, i2);
        assert_eq!(r, canon(&mut bank, e, vec![]));

        // (iii) mgt(D(V1, ax-1), k=1) = x1 <- ((x2 => (x3 => x2)) => x1)
        let v1 = bank.param(1);
        let t = bank.papp(d, &[v1, ax1]);
        let r = mgt(&mut bank, &base, t, Some(1)).unwrap().unwrap();
        let i1 = imp(&mut bank, x3, x2);
        let i2 = imp(&mut bank, x2, i1);
        let b = imp(&mut bank, i2, x1);
        assert_eq!(r, canon(&mut bank, x1, vec![b]));

        // (iv) mgt(D(ax-1, D(V1, ax-1))) = (x1=>x2) <- ((x3=>(x4=>x3))=>x2)
        let inner = bank.papp(d, &[v1, ax1]);
        let t = bank.papp(d, &[ax1, inner]);
        let r = mgt(&mut bank, &base, t, Some(1)).unwrap().unwrap();
        let h = imp(&mut bank, x1, x2);
        let i1 = imp(&mut bank, x4, x3);
        let i2 = imp(&mut bank, x3, i1);
        let b = imp(&mut bank, i2, x2);
        assert_eq!(r, canon(&mut bank, h, vec![b]));

        // (v) mgt(D(D(ax-2, ax-2), ax-2)) is UNDEFINED
        let inner = bank.papp(d, &[ax2, ax2]);
        let t = bank.papp(d, &[inner, ax2]);
        assert_eq!(mgt(&mut bank, &base, t, None).unwrap(), None);

        // (vi) mgt(D(D(ax-2, V1), ax-2))
        let inner = bank.papp(d, &[ax2, v1]);
        let t = bank.papp(d, &[inner, ax2]);
        let r = mgt(&mut bank, &base, t, Some(1)).unwrap().unwrap();
        let x23 = imp(&mut bank, x2, x3);
        let ante = imp(&mut bank, x1, x23);
        let h = imp(&mut bank, ante, x4);
        let x12 = imp(&mut bank, x1, x2);
        let x13 = imp(&mut bank, x1, x3);
        let mid = imp(&mut bank, x12, x13);
        let tail = imp(&mut bank, mid, x4);
        let b = imp(&mut bank, ante, tail);
        assert_eq!(r, canon(&mut bank, h, vec![b]));

        // (vii) mgt(D(D(ax-2, ax-1), ax-2)) = ((x1=>(x2=>x3)) => (x1=>(x2=>x3)))
        let inner = bank.papp(d, &[ax2, ax1]);
        let t = bank.papp(d, &[inner, ax2]);
        let r = mgt(&mut bank, &base, t, None).unwrap().unwrap();
        let x23 = imp(&mut bank, x2, x3);
        let a = imp(&mut bank, x1, x23);
        let e = imp(&mut bank, a, a);
        assert_eq!(r, canon(&mut bank, e, vec![]));
    }

    #[test]
    fn missing_presupposition_is_an_error() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let q = bank.sym("mystery");
        let t = bank.papp(q, &[]);
        assert!(matches!(
            mgt(&mut bank, &base, t, None),
            Err(Error::MissingPresupposition(_))
        ));
    }

    #[test]
    fn param_budget_too_small() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax1 = bank.papp(ax1s, &[]);
        let v2 = bank.param(2);
        let t = bank.papp(d, &[v2, ax1]);
        assert!(matches!(
            mgt(&mut bank, &base, t, Some(1)),
            Err(Error::ParamBudget { .. })
        ));
    }

    #[test]
    fn example5_nonlinearity_gap() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax1 = bank.papp(ax1s, &[]);
        let v1 = bank.param(1);
        // d[V1] = D(V1, D(D(V1, ax-1), ax-1))
        let i1 = bank.papp(d, &[v1, ax1]);
        let i2 = bank.papp(d, &[i1, ax1]);
        let dt = bank.papp(d, &[v1, i2]);
        let m = mgt(&mut bank, &base, dt, Some(1)).unwrap().unwrap();
        assert_eq!(m.body.len(), 1);
        // Prop. 4: sigma = mgu({B1, B1'}) with B1' = mgt(ax-1) renamed apart
        let b1 = m.body[0];
        let ax1_mgt = mgt(&mut bank, &base, ax1, None).unwrap().unwrap();
        let shift: FxHashMap<u32, u32> = (0..ax1_mgt.nvars).map(|v| (v, v + m.nvars)).collect();
        let b1p = formula::rename_vars(&mut bank, ax1_mgt.head, &shift);
        let sigma = unify::mgu(&mut bank, &[vec![b1, b1p]]).unwrap();
        let a_sigma = unify::apply(&mut bank, &sigma, m.head);
        // sigma binds only variables of B1'; A is untouched
        assert_eq!(a_sigma, m.head);
        // mgt(d[d1]) = z1 => (z2 => (z3 => z2))
        let ground = term::substitute_params(&mut bank, dt, &[ax1]).unwrap();
        let gm = mgt(&mut bank, &base, ground, None).unwrap().unwrap();
        let z1 = bank.fvar(0);
        let z2 = bank.fvar(1);
        let z3 = bank.fvar(2);
        let j1 = imp(&mut bank, z3, z2);
        let j2 = imp(&mut bank, z2, j1);
        let e = imp(&mut bank, z1, j2);
        assert_eq!(gm, canon(&mut bank, e, vec![]));
        // A sigma is a strict instance of mgt(d[d1])
        let asig = Clause::unit(a_sigma);
        let gclause = gm.clause();
        let r = unify::match_clause(&mut bank, &asig, &gclause, MatchMode::Ordered);
        assert!(r.instance.is_some() && r.strict);
    }

    #[test]
    fn grammar_mgt_example6() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax1 = bank.papp(ax1s, &[]);
        let p1 = bank.sym("p1");
        let p2 = bank.sym("p2");
        let start = bank.sym("Start");
        let v1 = bank.param(1);
        let p2_rhs = bank.papp(d, &[ax1, v1]);
        let p1_rhs = bank.papp(p2, &[ax1]);
        let p1_ref = bank.papp(p1, &[]);
        let dpp = bank.papp(d, &[p1_ref, p1_ref]);
        let inner = bank.papp(p2, &[dpp]);
        let start_rhs = bank.papp(p2, &[inner]);
        let g = Grammar::new(vec![
            Production { name: p2, arity: 1, rhs: p2_rhs },
            Production { name: p1, arity: 0, rhs: p1_rhs },
            Production { name: start, arity: 0, rhs: start_rhs },
        ]);
        let gm = grammar_mgt(&mut bank, &base, &g, UndefinedMode::Blanket).unwrap();
        assert!(gm.iter().all(|m| m.is_some()));
        // G2 is linear, so grammar-mgt(Start) equals mgt of the expansion
        let d_aa = bank.papp(d, &[ax1, ax1]);
        let e_in = bank.papp(d, &[d_aa, d_aa]);
        let e_mid = bank.papp(d, &[ax1, e_in]);
        let e_top = bank.papp(d, &[ax1, e_mid]);
        assert_eq!(term::term_size(&bank, e_top).unwrap(), 10);
        let direct = mgt(&mut bank, &base, e_top, None).unwrap().unwrap();
        assert_eq!(gm[2].as_ref().unwrap(), &direct);
    }

    #[test]
    fn single_production_grammar_mgt() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let ax1s = bank.sym("ax-1");
        let p = bank.sym("p");
        let rhs = bank.papp(ax1s, &[]);
        let g = Grammar::new(vec![Production { name: p, arity: 0, rhs }]);
        let gm = grammar_mgt(&mut bank, &base, &g, UndefinedMode::Blanket).unwrap();
        let direct = mgt(&mut bank, &base, rhs, None).unwrap().unwrap();
        assert_eq!(gm[0].as_ref().unwrap(), &direct);
    }

    #[test]
    fn undefined_blankets_whole_grammar() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax2s = bank.sym("ax-2");
        let ax1 = bank.papp(ax1s, &[]);
        let ax2 = bank.papp(ax2s, &[]);
        let ok = bank.sym("ok");
        let bad = bank.sym("bad");
        let inner = bank.papp(d, &[ax2, ax2]);
        let clash = bank.papp(d, &[inner, ax2]);
        let g = Grammar::new(vec![
            Production { name: ok, arity: 0, rhs: ax1 },
            Production { name: bad, arity: 0, rhs: clash },
        ]);
        let gm = grammar_mgt(&mut bank, &base, &g, UndefinedMode::Blanket).unwrap();
        assert!(gm.iter().all(|m| m.is_none()));
        let gm = grammar_mgt(&mut bank, &base, &g, UndefinedMode::PerDependency).unwrap();
        assert!(gm[0].is_some() && gm[1].is_none());
    }

    #[test]
    fn shallow_mgt_uses_stated_instances() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let ax1s = bank.sym("ax-1");
        let d = bank.sym("D");
        let p = bank.sym("p");
        let q = bank.sym("q");
        let ax1 = bank.papp(ax1s, &[]);
        let v1 = bank.param(1);
        let p_ref = bank.papp(p, &[]);
        let q_rhs = bank.papp(d, &[v1, p_ref]);
        // stated clause for p: the strict instance ((x=>y)=>(z=>(x=>y)))
        let x = bank.fvar(0);
        let y = bank.fvar(1);
        let z = bank.fvar(2);
        let xy = imp(&mut bank, x, y);
        let zxy = imp(&mut bank, z, xy);
        let inst = imp(&mut bank, xy, zxy);
        let stated_p = Clause::unit(inst);
        let g = Grammar::new(vec![
            Production { name: p, arity: 0, rhs: ax1 },
            Production { name: q, arity: 1, rhs: q_rhs },
        ]);
        let kb = Kb::new(base.clone(), g.clone(), vec![Some(stated_p), None]);
        let sh = shallow_mgt(&mut bank, &kb).unwrap();
        let gm = grammar_mgt(&mut bank, &base, &g, UndefinedMode::Blanket).unwrap();
        // shallow-mgt(q) computed against the stated instance is an instance
        // of grammar-mgt(q)
        let shq = sh[1].as_ref().unwrap().clause();
        let gmq = gm[1].as_ref().unwrap().clause();
        let r = unify::match_clause(&mut bank, &shq, &gmq, MatchMode::Ordered);
        assert!(r.instance.is_some());
        assert!(r.strict, "stated strict instance propagates strictly");
        // and kb_verify classifies p's stated clause as a strict instance
        let report = kb_verify(&mut bank, &kb).unwrap();
        assert_eq!(report.statuses[0], TheoremStatus::StrictInstance);
        assert_eq!(report.statuses[1], TheoremStatus::Unstated);
        assert_eq!(report.violations(), 0);
    }

    #[test]
    fn kb_verify_flags_non_instances() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let ax1s = bank.sym("ax-1");
        let p = bank.sym("p");
        let ax1 = bank.papp(ax1s, &[]);
        // stated clause is unrelated to mgt(ax-1)
        let f = bank.sym("not-it");
        let wrong = bank.fapp(f, &[]);
        let g = Grammar::new(vec![Production { name: p, arity: 0, rhs: ax1 }]);
        let kb = Kb::new(base, g, vec![Some(Clause::unit(wrong))]);
        let report = kb_verify(&mut bank, &kb).unwrap();
        assert_eq!(report.statuses[0], TheoremStatus::Violation);
        assert_eq!(report.violations(), 1);
    }

    #[test]
    fn empty_kb() {
        let mut bank = Bank::new();
        let kb = Kb::default();
        let sh = shallow_mgt(&mut bank, &kb).unwrap();
        assert!(sh.is_empty());
    }
}
