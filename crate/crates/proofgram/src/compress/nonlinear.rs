//! Nonlinear compression: identify repeated arguments at call sites.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::cddc::{self, TheoremStatus, UndefinedMode};
use crate::error::Result;
use crate::grammar::{Grammar, Kb, Production};
use crate::term;
use rustc_hash::{FxHashMap, FxHashSet};

use super::sav::save_values;
use super::NameAlloc;

/// What a nonlinear step must preserve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuardMode {
    /// No check.
    None,
    /// Every grammar-MGT that was defined stays defined.
    #[default]
    MgtDefined,
    /// The stated clauses of protected nonterminals remain instances of
    /// their shallow-MGTs (kb_verify stays clean for them).
    MgtSubsumes,
}

#[derive(Debug, Default)]
pub struct NonlinearStats {
    pub steps: usize,
    pub skipped: usize,
}

/// One candidate: production `prod` has an occurrence with identical
/// arguments at slots `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Candidate {
    prod: usize,
    i: u32,
    j: u32,
}

fn find_candidates(bank: &Bank, grammar: &Grammar) -> Vec<Candidate> {
    let mut found: FxHashSet<Candidate> = FxHashSet::default();
    let mut out = Vec::new();
    for p in &grammar.prods {
        for n in term::postorder(bank, &[p.rhs]) {
            if let PNode::App(f, args) = bank.pnode(n) {
                if args.len() < 2 {
                    continue;
                }
                if let Some(target) = grammar.position(*f) {
                    'pairs: for a in 0..args.len() {
                        for b in (a + 1)..args.len() {
                            if args[a] == args[b] {
                                let c = Candidate { prod: target, i: a as u32, j: b as u32 };
                                if found.insert(c) {
                                    out.push(c);
                                }
                                break 'pairs;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn guard_ok(bank: &mut Bank, kb: &Kb, protected: &FxHashSet<Sym>, guard: GuardMode) -> Result<bool> {
    match guard {
        GuardMode::None => Ok(true),
        GuardMode::MgtDefined => {
            let gm = cddc::grammar_mgt(bank, &kb.base, &kb.grammar, UndefinedMode::PerDependency)?;
            Ok(gm.iter().all(|m| m.is_some()))
        }
        GuardMode::MgtSubsumes => {
            let report = cddc::kb_verify(bank, kb)?;
            for (p, status) in kb.grammar.prods.iter().zip(&report.statuses) {
                if protected.contains(&p.name)
                    && matches!(status, TheoremStatus::Violation | TheoremStatus::Undefined)
                {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Loop: among productions with a repeated-argument occurrence pick the one
/// with lowest save-value, introduce the identified variant `p'`, rewrite
/// all matching occurrences, prune; steps violating the guard are rolled
/// back and the candidate skipped.
pub fn nonlinear_compress(
    bank: &mut Bank,
    kb: &mut Kb,
    protected: &FxHashSet<Sym>,
    guard: GuardMode,
    names: &mut NameAlloc,
) -> Result<NonlinearStats> {
    let mut stats = NonlinearStats::default();
    let mut skipped: FxHashSet<(Sym, u32, u32)> = FxHashSet::default();
    loop {
        let sav = save_values(bank, &kb.grammar)?;
        let mut cands = find_candidates(bank, &kb.grammar);
        cands.retain(|c| {
            !skipped.contains(&(kb.grammar.prods[c.prod].name, c.i, c.j))
        });
        if cands.is_empty() {
            break;
        }
        cands.sort_by_key(|c| (sav[c.prod], c.prod, c.i, c.j));
        let cand = cands[0];
        let before = kb.clone();
        apply_candidate(bank, kb, cand, names)?;
        super::prune(bank, kb, protected)?;
        if guard_ok(bank, kb, protected, guard)? {
            stats.steps += 1;
        } else {
            skipped.insert((before.grammar.prods[cand.prod].name, cand.i, cand.j));
            *kb = before;
            stats.skipped += 1;
        }
    }
    Ok(stats)
}

fn apply_candidate(
    bank: &mut Bank,
    kb: &mut Kb,
    cand: Candidate,
    names: &mut NameAlloc,
) -> Result<()> {
    let p = &kb.grammar.prods[cand.prod];
    let p_name = p.name;
    let n = p.arity;
    let (i, j) = (cand.i, cand.j);
    // RHS of p' = d with V_{j+1} identified with V_{i+1}, higher params
    // renumbered down
    let mut args: Vec<PTerm> = Vec::with_capacity(n as usize);
    for v in 1..=n {
        let target = if v == j + 1 {
            i + 1
        } else if v > j + 1 {
            v - 1
        } else {
            v
        };
        args.push(bank.param(target));
    }
    let new_rhs = term::substitute_params(bank, p.rhs, &args)?;
    let fresh = names.fresh(bank);
    let fresh_prod = Production { name: fresh, arity: n - 1, rhs: new_rhs };
    // insert p' directly after p; rewrite matching occurrences everywhere
    let mut prods: Vec<Production> = Vec::with_capacity(kb.grammar.len() + 1);
    let mut stated = Vec::with_capacity(kb.stated.len() + 1);
    for (k, q) in kb.grammar.prods.iter().enumerate() {
        let rhs = rewrite_sites(bank, q.rhs, p_name, fresh, i, j);
        prods.push(Production { name: q.name, arity: q.arity, rhs });
        stated.push(kb.stated[k].clone());
        if k == cand.prod {
            prods.push(fresh_prod.clone());
            stated.push(None);
        }
    }
    kb.grammar = Grammar::new(prods);
    kb.stated = stated;
    Ok(())
}

fn rewrite_sites(bank: &mut Bank, t: PTerm, target: Sym, fresh: Sym, i: u32, j: u32) -> PTerm {
    let order = term::postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for nd in order {
        let img = match bank.pnode(nd).clone() {
            PNode::Param(_) => nd,
            PNode::App(f, args) => {
                let mut new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                if f == target && new[i as usize] == new[j as usize] {
                    new.remove(j as usize);
                    bank.papp(fresh, &new)
                } else if new == args.as_slice() {
                    nd
                } else {
                    bank.papp(f, &new)
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
    fn minimal_identification() {
        let mut bank = Bank::new();
        let d = bank.sym("D");
        let a = bank.sym("a");
        let q = bank.sym("q");
        let s = bank.sym("S");
        let v1 = bank.param(1);
        let v2 = bank.param(2);
        let q_rhs = bank.papp(d, &[v1, v2]);
        let ca = bank.papp(a, &[]);
        let q_aa = bank.papp(q, &[ca, ca]);
        // three sites so the identified production survives pruning
        // (ref * (|d| - arity) - |d| = 3*1 - 2 = 1 > 0)
        let inner = bank.papp(d, &[q_aa, q_aa]);
        let s_rhs = bank.papp(d, &[q_aa, inner]);
        let g = Grammar::new(vec![
            Production { name: q, arity: 2, rhs: q_rhs },
            Production { name: s, arity: 0, rhs: s_rhs },
        ]);
        let mut kb = Kb::new(Base::new(), g, vec![None, None]);
        let protected: FxHashSet<Sym> = [s].into_iter().collect();
        let mut names = NameAlloc::new("lemma");
        let stats =
            nonlinear_compress(&mut bank, &mut kb, &protected, GuardMode::None, &mut names)
                .unwrap();
        assert!(stats.steps >= 1);
        // there is now a unary production with body D(V1, V1) and the
        // occurrences are rewritten to apply it to a single `a`
        let v1 = bank.param(1);
        let dvv = bank.papp(d, &[v1, v1]);
        let fresh = kb
            .grammar
            .prods
            .iter()
            .find(|p| p.arity == 1 && p.rhs == dvv)
            .unwrap_or_else(|| {
                panic!(
                    "expected identified production, got {:?}",
                    kb.grammar
                        .prods
                        .iter()
                        .map(|p| (bank.sym_name(p.name).to_owned(), p.arity))
                        .collect::<Vec<_>>()
                )
            });
        let rewritten = bank.papp(fresh.name, &[ca]);
        let s_new = kb.grammar.production(s).unwrap();
        let expect_inner = bank.papp(d, &[rewritten, rewritten]);
        let expect = bank.papp(d, &[rewritten, expect_inner]);
        assert_eq!(s_new.rhs, expect);
    }
}
