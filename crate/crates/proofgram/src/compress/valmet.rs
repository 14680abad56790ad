//! Expansion metrics computed without expanding.
//!
//! For a production `p(V1..Vn) -> d` two families of per-production
//! constants determine everything about `val_G(p)`:
//! `size(p)` (edges of `val` with parameters as weightless leaves) and
//! `vmult(p, i)` (occurrences of `V_i` in `val`).  Both satisfy simple
//! compositional recurrences over the production order; values grow to
//! thousands of decimal digits, hence big integers.  Value identity is
//! tracked by a Merkle digest, memoized per closed configuration
//! (nonterminal, child digests).

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::term;
use num_bigint::BigUint;
use num_traits::Zero;
use rustc_hash::FxHashMap;
use sha2::{Digest as _, Sha256};

#[derive(Debug, Clone)]
pub struct ValMetrics {
    /// `size[i]`: edges of `val(p_i)` with parameter leaves weighing 0.
    pub sizes: Vec<BigUint>,
    /// `vmults[i][j]`: occurrences of `V_{j+1}` in `val(p_i)`.
    pub vmults: Vec<Vec<BigUint>>,
}

impl ValMetrics {
    pub fn compute(bank: &Bank, grammar: &Grammar) -> Result<ValMetrics> {
        let mut sizes: Vec<BigUint> = Vec::with_capacity(grammar.len());
        let mut vmults: Vec<Vec<BigUint>> = Vec::with_capacity(grammar.len());
        for (i, p) in grammar.prods.iter().enumerate() {
            let lookup = |name: Sym| -> Option<usize> {
                grammar.position(name).filter(|&j| j < i)
            };
            let size = term_val_size_inner(bank, p.rhs, &sizes, &vmults, &lookup)?;
            let mut mults = Vec::with_capacity(p.arity as usize);
            for v in 1..=p.arity {
                mults.push(term_vmult_inner(bank, p.rhs, v, &vmults, &lookup)?);
            }
            sizes.push(size);
            vmults.push(mults);
        }
        Ok(ValMetrics { sizes, vmults })
    }

    /// Expanded size of an arbitrary term over the grammar (parameters
    /// weigh 0).
    pub fn term_val_size(&self, bank: &Bank, grammar: &Grammar, t: PTerm) -> Result<BigUint> {
        let lookup = |name: Sym| grammar.position(name);
        term_val_size_inner(bank, t, &self.sizes, &self.vmults, &lookup)
    }
}

fn term_val_size_inner(
    bank: &Bank,
    t: PTerm,
    sizes: &[BigUint],
    vmults: &[Vec<BigUint>],
    lookup: &dyn Fn(Sym) -> Option<usize>,
) -> Result<BigUint> {
    let mut memo: FxHashMap<PTerm, BigUint> = FxHashMap::default();
    for n in term::postorder(bank, &[t]) {
        let v = match bank.pnode(n) {
            PNode::Param(_) => BigUint::zero(),
            PNode::App(f, args) => match lookup(*f) {
                Some(j) => {
                    if vmults[j].len() != args.len() {
                        return Err(Error::ArityMismatch {
                            name: bank.sym_name(*f).to_owned(),
                            declared: vmults[j].len(),
                            used: args.len(),
                        });
                    }
                    let mut s = sizes[j].clone();
                    for (k, c) in args.iter().enumerate() {
                        s += &vmults[j][k] * &memo[c];
                    }
                    s
                }
                None => {
                    let mut s = BigUint::from(args.len());
                    for c in args.iter() {
                        s += &memo[c];
                    }
                    s
                }
            },
        };
        memo.insert(n, v);
    }
    Ok(memo.remove(&t).unwrap())
}

fn term_vmult_inner(
    bank: &Bank,
    t: PTerm,
    param: u32,
    vmults: &[Vec<BigUint>],
    lookup: &dyn Fn(Sym) -> Option<usize>,
) -> Result<BigUint> {
    let mut memo: FxHashMap<PTerm, BigUint> = FxHashMap::default();
    for n in term::postorder(bank, &[t]) {
        let v = match bank.pnode(n) {
            PNode::Param(i) => {
                if *i == param {
                    BigUint::from(1u32)
                } else {
                    BigUint::zero()
                }
            }
            PNode::App(f, args) => match lookup(*f) {
                Some(j) => {
                    let mut s = BigUint::zero();
                    for (k, c) in args.iter().enumerate() {
                        s += &vmults[j][k] * &memo[c];
                    }
                    s
                }
                None => {
                    let mut s = BigUint::zero();
                    for c in args.iter() {
                        s += &memo[c];
                    }
                    s
                }
            },
        };
        memo.insert(n, v);
    }
    Ok(memo.remove(&t).unwrap())
}

pub type ValDigest = [u8; 32];

fn digest_param(i: u32) -> ValDigest {
    let mut h = Sha256::new();
    h.update([1u8]);
    h.update(i.to_le_bytes());
    h.finalize().into()
}

fn digest_app(name: &str, children: &[ValDigest]) -> ValDigest {
    let mut h = Sha256::new();
    h.update([2u8]);
    h.update((name.len() as u32).to_le_bytes());
    h.update(name.as_bytes());
    for c in children {
        h.update(c);
    }
    h.finalize().into()
}

/// Digest evaluator over a grammar.  `digest_term` computes the digest of
/// the *expansion* of a term, treating parameters as opaque markers; for a
/// nonterminal application the production RHS is evaluated under an
/// environment of child digests, memoized on `(nonterminal, child digests)`.
pub struct DigestEngine<'g> {
    grammar: &'g Grammar,
    /// Which grammar positions may be expanded (productions at index >= this
    /// bound are treated as terminals); full grammar by default.
    nt_memo: FxHashMap<(Sym, Vec<ValDigest>), ValDigest>,
    envs: Vec<Vec<ValDigest>>,
    env_ids: FxHashMap<Vec<ValDigest>, u32>,
}

impl<'g> DigestEngine<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        DigestEngine {
            grammar,
            nt_memo: FxHashMap::default(),
            envs: Vec::new(),
            env_ids: FxHashMap::default(),
        }
    }

    fn intern_env(&mut self, env: Vec<ValDigest>) -> u32 {
        if let Some(&id) = self.env_ids.get(&env) {
            return id;
        }
        let id = self.envs.len() as u32;
        self.envs.push(env.clone());
        self.env_ids.insert(env, id);
        id
    }

    /// Digest of the expansion of `t`, parameters as markers.
    pub fn digest_term(&mut self, bank: &Bank, t: PTerm) -> ValDigest {
        let markers: Vec<ValDigest> = Vec::new();
        self.digest_under(bank, t, markers)
    }

    /// Digest of a production's value as a parameterized function.
    pub fn digest_production(&mut self, bank: &Bank, index: usize) -> ValDigest {
        let p = &self.grammar.prods[index];
        let env: Vec<ValDigest> = (1..=p.arity).map(digest_param).collect();
        self.digest_under(bank, p.rhs, env)
    }

    fn digest_under(&mut self, bank: &Bank, root: PTerm, env: Vec<ValDigest>) -> ValDigest {
        #[derive(Clone, Copy)]
        enum Task {
            Visit(PTerm, u32),
            Build(PTerm, u32),
        }
        let root_env = self.intern_env(env);
        let mut memo: FxHashMap<(PTerm, u32), ValDigest> = FxHashMap::default();
        let mut stack = vec![Task::Visit(root, root_env)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(t, e) => {
                    if memo.contains_key(&(t, e)) {
                        continue;
                    }
                    match bank.pnode(t) {
                        PNode::Param(i) => {
                            let env = &self.envs[e as usize];
                            let idx = (*i - 1) as usize;
                            let d = if idx < env.len() { env[idx] } else { digest_param(*i) };
                            memo.insert((t, e), d);
                        }
                        PNode::App(_, args) => {
                            stack.push(Task::Build(t, e));
                            for &c in args.iter() {
                                if !memo.contains_key(&(c, e)) {
                                    stack.push(Task::Visit(c, e));
                                }
                            }
                        }
                    }
                }
                Task::Build(t, e) => {
                    if memo.contains_key(&(t, e)) {
                        continue;
                    }
                    let (f, args) = match bank.pnode(t) {
                        PNode::App(f, args) => (*f, args.clone()),
                        PNode::Param(_) => unreachable!(),
                    };
                    let child_digests: Vec<ValDigest> =
                        args.iter().map(|c| memo[&(*c, e)]).collect();
                    match self.grammar.position(f) {
                        Some(j) => {
                            let key = (f, child_digests);
                            if let Some(&d) = self.nt_memo.get(&key) {
                                memo.insert((t, e), d);
                                continue;
                            }
                            let rhs = self.grammar.prods[j].rhs;
                            let inner_env = self.intern_env(key.1.clone());
                            if let Some(&d) = memo.get(&(rhs, inner_env)) {
                                self.nt_memo.insert(key, d);
                                memo.insert((t, e), d);
                            } else {
                                stack.push(Task::Build(t, e));
                                stack.push(Task::Visit(rhs, inner_env));
                            }
                        }
                        None => {
                            let d = digest_app(bank.sym_name(f), &child_digests);
                            memo.insert((t, e), d);
                        }
                    }
                }
            }
        }
        memo[&(root, root_env)]
    }
}

/// Digests of every production's value-as-function.
pub fn production_digests(bank: &Bank, grammar: &Grammar) -> Vec<ValDigest> {
    let mut engine = DigestEngine::new(grammar);
    (0..grammar.len())
        .map(|i| engine.digest_production(bank, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Production;

    /// Example 6 G2 (well-formed order): p2(V1) -> D(ax-1,V1),
    /// p1 -> p2(ax-1), Start -> p2(p2(D(p1,p1))).
    fn g2(bank: &mut Bank) -> Grammar {
        let d = bank.sym("D");
        let ax1 = bank.sym("ax-1");
        let p1 = bank.sym("p1");
        let p2 = bank.sym("p2");
        let start = bank.sym("Start");
        let a = bank.papp(ax1, &[]);
        let v1 = bank.param(1);
        let p2_rhs = bank.papp(d, &[a, v1]);
        let p1_rhs = bank.papp(p2, &[a]);
        let p1_ref = bank.papp(p1, &[]);
        let dpp = bank.papp(d, &[p1_ref, p1_ref]);
        let inner = bank.papp(p2, &[dpp]);
        let start_rhs = bank.papp(p2, &[inner]);
        Grammar::new(vec![
            Production { name: p2, arity: 1, rhs: p2_rhs },
            Production { name: p1, arity: 0, rhs: p1_rhs },
            Production { name: start, arity: 0, rhs: start_rhs },
        ])
    }

    #[test]
    fn example6_val_size_is_ten() {
        let mut bank = Bank::new();
        let g = g2(&mut bank);
        let m = ValMetrics::compute(&bank, &g).unwrap();
        assert_eq!(m.sizes[2], BigUint::from(10u32));
        // p2 expands to D(ax-1, V1): size 2, vmult(V1) = 1
        assert_eq!(m.sizes[0], BigUint::from(2u32));
        assert_eq!(m.vmults[0], vec![BigUint::from(1u32)]);
    }

    #[test]
    fn digest_matches_explicit_expansion() {
        let mut bank = Bank::new();
        let g = g2(&mut bank);
        let start_digest = production_digests(&bank, &g)[2];
        // build the expansion by hand and digest it over an empty grammar
        let d = bank.sym("D");
        let ax1 = bank.sym("ax-1");
        let a = bank.papp(ax1, &[]);
        let daa = bank.papp(d, &[a, a]);
        let inner = bank.papp(d, &[daa, daa]);
        let mid = bank.papp(d, &[a, inner]);
        let top = bank.papp(d, &[a, mid]);
        let empty = Grammar::new(vec![]);
        let mut engine = DigestEngine::new(&empty);
        let direct = engine.digest_term(&bank, top);
        assert_eq!(start_digest, direct);
    }

    #[test]
    fn vmult_through_nonlinear_nonterminal() {
        let mut bank = Bank::new();
        let f = bank.sym("f");
        let q = bank.sym("q");
        let r = bank.sym("r");
        let v1 = bank.param(1);
        let q_rhs = bank.papp(f, &[v1, v1]);
        let q_v1 = bank.papp(q, &[v1]);
        let r_rhs = bank.papp(q, &[q_v1]);
        let g = Grammar::new(vec![
            Production { name: q, arity: 1, rhs: q_rhs },
            Production { name: r, arity: 1, rhs: r_rhs },
        ]);
        let m = ValMetrics::compute(&bank, &g).unwrap();
        // val(r) = f(f(V1,V1), f(V1,V1)): size 6, vmult 4
        assert_eq!(m.sizes[1], BigUint::from(6u32));
        assert_eq!(m.vmults[1], vec![BigUint::from(4u32)]);
    }
}
