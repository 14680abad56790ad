//! Same-value and MGT-based reduction of redundant nonterminals.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::cddc::{CanClause, MgtEngine};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Kb, Production};
use crate::term;
use crate::unify::{self, MatchMode};
use rustc_hash::{FxHashMap, FxHashSet};

use super::valmet::production_digests;

#[derive(Debug, Default)]
pub struct ReduceStats {
    pub merged: usize,
}

/// Merge nonterminals with equal expanded value (equal arity; parameterized
/// values compared with parameters as markers), keeping the earliest.
/// References are rewritten and the merged-away unprotected productions
/// dropped.  Merge candidates whose expansions fit `edge_budget` are
/// verified literally; a digest collision is an internal error.
pub fn same_value_reduce(
    bank: &mut Bank,
    kb: &mut Kb,
    protected: &FxHashSet<Sym>,
    edge_budget: u128,
) -> Result<ReduceStats> {
    let digests = production_digests(bank, &kb.grammar);
    let mut groups: FxHashMap<(u32, [u8; 32]), Vec<usize>> = FxHashMap::default();
    for (i, p) in kb.grammar.prods.iter().enumerate() {
        groups.entry((p.arity, digests[i])).or_default().push(i);
    }
    let mut redirect: FxHashMap<Sym, Sym> = FxHashMap::default();
    let mut drop: FxHashSet<usize> = FxHashSet::default();
    let mut stats = ReduceStats::default();
    let mut keys: Vec<(u32, [u8; 32])> = groups.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let members = &groups[&key];
        if members.len() < 2 {
            continue;
        }
        let keep = members[0];
        // spot-verify against the kept member when expansions are small
        for &m in &members[1..] {
            verify_same_value(bank, &kb.grammar, keep, m, edge_budget)?;
            redirect.insert(kb.grammar.prods[m].name, kb.grammar.prods[keep].name);
            if !protected.contains(&kb.grammar.prods[m].name) {
                drop.insert(m);
            }
            stats.merged += 1;
        }
    }
    if redirect.is_empty() {
        return Ok(stats);
    }
    let mut prods = Vec::with_capacity(kb.grammar.len());
    let mut stated = Vec::new();
    for (i, p) in kb.grammar.prods.iter().enumerate() {
        if drop.contains(&i) {
            continue;
        }
        let rhs = rewrite_names(bank, p.rhs, &redirect);
        prods.push(Production { name: p.name, arity: p.arity, rhs });
        stated.push(kb.stated[i].clone());
    }
    kb.grammar = Grammar::new(prods);
    kb.stated = stated;
    Ok(stats)
}

fn verify_same_value(
    bank: &mut Bank,
    grammar: &Grammar,
    a: usize,
    b: usize,
    edge_budget: u128,
) -> Result<()> {
    let ea = super::expand_within(bank, grammar, a, edge_budget)?;
    let eb = super::expand_within(bank, grammar, b, edge_budget)?;
    if let (Some(ea), Some(eb)) = (ea, eb) {
        if ea != eb {
            return Err(Error::Internal(format!(
                "value digest collision between `{}` and `{}`",
                bank.sym_name(grammar.prods[a].name),
                bank.sym_name(grammar.prods[b].name)
            )));
        }
    }
    Ok(())
}

fn rewrite_names(bank: &mut Bank, t: PTerm, redirect: &FxHashMap<Sym, Sym>) -> PTerm {
    let order = term::postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for nd in order {
        let img = match bank.pnode(nd).clone() {
            PNode::Param(_) => nd,
            PNode::App(f, args) => {
                let new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                let g = redirect.get(&f).copied().unwrap_or(f);
                if g == f && new == args.as_slice() {
                    nd
                } else {
                    bank.papp(g, &new)
                }
            }
        };
        map.insert(nd, img);
    }
    map[&t]
}

/// MGT-based reduction: if the MGTs (computed with stated clauses where
/// present) of two equal-arity nonterminals are variants, or one strictly
/// subsumes the other, modulo body permutation, the subsumed nonterminal's
/// references are rewritten to the subsuming one with the body permutation
/// applied to the arguments.  Only redirects to *earlier* productions keep
/// the grammar ordered; other pairs are skipped.  Protected nonterminals are
/// never removed.  Changes proof-term values; theorem validity is preserved.
pub fn mgt_reduce(
    bank: &mut Bank,
    kb: &mut Kb,
    protected: &FxHashSet<Sym>,
) -> Result<ReduceStats> {
    // stated-chained MGTs, dependency-aware (a reduction needs per-
    // nonterminal values even if some unrelated MGT is undefined)
    let mut engine = MgtEngine::new(bank, &kb.base);
    let mut mgts: Vec<Option<CanClause>> = Vec::with_capacity(kb.grammar.len());
    for (p, stated) in kb.grammar.prods.iter().zip(&kb.stated) {
        let r = engine.mgt(bank, p.rhs, Some(p.arity))?;
        let entry = match stated {
            Some(f) => Some(CanClause::from_clause(bank, f)),
            None => r.clone(),
        };
        engine.extend(p.name, entry);
        mgts.push(r);
    }
    // bucket by arity; within a bucket try pairs (earlier, later)
    let mut by_arity: FxHashMap<u32, Vec<usize>> = FxHashMap::default();
    for (i, p) in kb.grammar.prods.iter().enumerate() {
        if mgts[i].is_some() {
            by_arity.entry(p.arity).or_default().push(i);
        }
    }
    let mut redirect: FxHashMap<Sym, (Sym, Vec<usize>)> = FxHashMap::default();
    let mut drop: FxHashSet<usize> = FxHashSet::default();
    let mut stats = ReduceStats::default();
    let mut arities: Vec<u32> = by_arity.keys().copied().collect();
    arities.sort_unstable();
    for arity in arities {
        let members = &by_arity[&arity];
        for bi in 0..members.len() {
            let b = members[bi];
            if drop.contains(&b) || redirect.contains_key(&kb.grammar.prods[b].name) {
                continue;
            }
            for &a in members.iter().take(bi) {
                if drop.contains(&a) || redirect.contains_key(&kb.grammar.prods[a].name) {
                    continue;
                }
                let (ma, mb) = (mgts[a].clone().unwrap(), mgts[b].clone().unwrap());
                // b instance of a (a at least as general): redirect b -> a
                let mb_clause = mb.clause();
                let ma_clause = ma.clause();
                if let Some((_, perm)) =
                    unify::instance_of(bank, &mb_clause, &ma_clause, MatchMode::ModPermutation)
                {
                    let bn = kb.grammar.prods[b].name;
                    let an = kb.grammar.prods[a].name;
                    redirect.insert(bn, (an, perm));
                    if !protected.contains(&bn) {
                        drop.insert(b);
                    }
                    stats.merged += 1;
                    break;
                }
            }
        }
    }
    if redirect.is_empty() {
        return Ok(stats);
    }
    let mut prods = Vec::with_capacity(kb.grammar.len());
    let mut stated = Vec::new();
    for (i, p) in kb.grammar.prods.iter().enumerate() {
        if drop.contains(&i) {
            continue;
        }
        let rhs = rewrite_permuted(bank, p.rhs, &redirect);
        prods.push(Production { name: p.name, arity: p.arity, rhs });
        stated.push(kb.stated[i].clone());
    }
    kb.grammar = Grammar::new(prods);
    kb.stated = stated;
    super::prune(bank, kb, protected)?;
    Ok(stats)
}

/// Replace `q(t_1..t_n)` by `target(t_{perm[0]+1}, ..)`: `perm[k]` names the
/// subsumed clause's body slot matched to the subsuming clause's slot `k`.
fn rewrite_permuted(
    bank: &mut Bank,
    t: PTerm,
    redirect: &FxHashMap<Sym, (Sym, Vec<usize>)>,
) -> PTerm {
    let order = term::postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for nd in order {
        let img = match bank.pnode(nd).clone() {
            PNode::Param(_) => nd,
            PNode::App(f, args) => {
                let new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                match redirect.get(&f) {
                    Some((g, perm)) => {
                        let permuted: Vec<PTerm> =
                            perm.iter().map(|&k| new[k]).collect();
                        bank.papp(*g, &permuted)
                    }
                    None if new == args.as_slice() => nd,
                    None => bank.papp(f, &new),
                }
            }
        };
        map.insert(nd, img);
    }
    map[&t]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Base;

    #[test]
    fn duplicate_values_merged() {
        let mut bank = Bank::new();
        let d = bank.sym("D");
        let a = bank.sym("a");
        let p = bank.sym("p");
        let q = bank.sym("q");
        let s = bank.sym("S");
        let ca = bank.papp(a, &[]);
        let daa = bank.papp(d, &[ca, ca]);
        let p_ref = bank.papp(p, &[]);
        let q_ref = bank.papp(q, &[]);
        let s_rhs = bank.papp(d, &[p_ref, q_ref]);
        let g = Grammar::new(vec![
            Production { name: p, arity: 0, rhs: daa },
            Production { name: q, arity: 0, rhs: daa },
            Production { name: s, arity: 0, rhs: s_rhs },
        ]);
        let mut kb = Kb::new(Base::new(), g, vec![None, None, None]);
        let protected: FxHashSet<Sym> = [s].into_iter().collect();
        let stats = same_value_reduce(&mut bank, &mut kb, &protected, 100_000).unwrap();
        assert_eq!(stats.merged, 1);
        assert_eq!(kb.grammar.len(), 2);
        let expect = bank.papp(d, &[p_ref, p_ref]);
        assert_eq!(kb.grammar.prods[1].rhs, expect);
    }

    #[test]
    fn mgt_reduce_merges_permuted_variants() {
        // two binary rules proving the same clause with swapped hypotheses
        let mut bank = Bank::new();
        let mut base = Base::new();
        let pair = bank.sym("pair");
        let x = bank.fvar(0);
        let y = bank.fvar(1);
        let pxy = bank.fapp(pair, &[x, y]);
        let j1 = bank.sym("j1");
        base.insert(j1, crate::formula::Clause { head: pxy, body: vec![x, y] });
        let j2 = bank.sym("j2");
        let pyx = bank.fapp(pair, &[y, x]);
        base.insert(j2, crate::formula::Clause { head: pyx, body: vec![x, y] });
        // productions u(V1,V2) -> j1(V1,V2) and w(V1,V2) -> j2(V2,V1):
        // both prove pair(u1, u2) but with bodies in different order
        let u = bank.sym("u");
        let w = bank.sym("w");
        let s = bank.sym("S");
        let v1 = bank.param(1);
        let v2 = bank.param(2);
        let u_rhs = bank.papp(j1, &[v1, v2]);
        let w_rhs = bank.papp(j2, &[v2, v1]);
        let a = bank.sym("a");
        base.insert(a, crate::formula::Clause::unit(x));
        let b = bank.sym("b");
        base.insert(b, crate::formula::Clause::unit(x));
        let ca = bank.papp(a, &[]);
        let cb = bank.papp(b, &[]);
        let w_ab = bank.papp(w, &[ca, cb]);
        let u_ab = bank.papp(u, &[ca, cb]);
        let s_rhs = bank.papp(j1, &[w_ab, u_ab]);
        let g = Grammar::new(vec![
            Production { name: u, arity: 2, rhs: u_rhs },
            Production { name: w, arity: 2, rhs: w_rhs },
            Production { name: s, arity: 0, rhs: s_rhs },
        ]);
        let mut kb = Kb::new(base, g, vec![None, None, None]);
        let protected: FxHashSet<Sym> = [s].into_iter().collect();
        // w's MGT: head pair(x1,x2) <- x1, x2 ... wait: w(V1,V2) -> j2(V2,V1):
        // head pair(u2', u1') with body slots (V1 -> second of j2, ...);
        // the MGTs of u and w are variants modulo body permutation
        let before = crate::cddc::grammar_mgt(
            &mut bank,
            &kb.base,
            &kb.grammar,
            crate::cddc::UndefinedMode::PerDependency,
        )
        .unwrap();
        assert!(before.iter().all(|m| m.is_some()));
        let stats = mgt_reduce(&mut bank, &mut kb, &protected).unwrap();
        assert_eq!(stats.merged, 1);
        // w dropped and references rewritten with permuted arguments (the
        // trailing prune may unfold what is left); S still proves its clause
        assert!(kb.grammar.position(w).is_none());
        let after = crate::cddc::grammar_mgt(
            &mut bank,
            &kb.base,
            &kb.grammar,
            crate::cddc::UndefinedMode::PerDependency,
        )
        .unwrap();
        let spos = kb.grammar.position(s).unwrap();
        assert_eq!(
            before[2].as_ref().unwrap(),
            after[spos].as_ref().unwrap(),
            "top-level clause unchanged by mgt reduction"
        );
    }
}
