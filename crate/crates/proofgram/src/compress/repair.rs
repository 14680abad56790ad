//! TreeRePair replacement phase: repeatedly replace the most frequent digram
//! with a fresh production.
//!
//! The main forest is kept hash-consed, so occurrence counts are tree-view
//! counts obtained by weighting each distinct node with its multiplicity.
//! Overlap within one digram only arises along same-symbol chains
//! (`f` at slot `i` under `f`); those are resolved by greedy bottom-up
//! maximal matching, decided per distinct node.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Kb, Production};
use crate::term;
use rustc_hash::{FxHashMap, FxHashSet};

use super::{CompressCfg, CountMode, NameAlloc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct DigramKey {
    parent: Sym,
    child: Sym,
    slot: u32,
}

#[derive(Debug)]
pub struct RepairOutcome {
    pub forest: Vec<PTerm>,
    pub fresh: Vec<Production>,
}

struct RoundData {
    counts: FxHashMap<DigramKey, (u128, u32, u32)>, // count, parent arity, child arity
    chain_matched: FxHashMap<(PTerm, u32), bool>,
}

fn multiplicities(bank: &Bank, order: &[PTerm], roots: &[PTerm]) -> Result<FxHashMap<PTerm, u128>> {
    let mut mult: FxHashMap<PTerm, u128> = FxHashMap::default();
    for &r in roots {
        *mult.entry(r).or_insert(0) += 1;
    }
    for &n in order.iter().rev() {
        let m = mult.get(&n).copied().unwrap_or(0);
        if m == 0 {
            continue;
        }
        if let PNode::App(_, args) = bank.pnode(n) {
            for &c in args.iter() {
                let e = mult.entry(c).or_insert(0);
                *e = e
                    .checked_add(m)
                    .ok_or_else(|| Error::TermTooLarge("digram multiplicity exceeds u128".into()))?;
            }
        }
    }
    Ok(mult)
}

fn count_round(bank: &Bank, order: &[PTerm], mult: &FxHashMap<PTerm, u128>) -> Result<RoundData> {
    let mut chain_matched: FxHashMap<(PTerm, u32), bool> = FxHashMap::default();
    let mut counts: FxHashMap<DigramKey, (u128, u32, u32)> = FxHashMap::default();
    for &n in order {
        let PNode::App(f, args) = bank.pnode(n) else { continue };
        let m = mult.get(&n).copied().unwrap_or(0);
        for (i, &c) in args.iter().enumerate() {
            let PNode::App(g, gargs) = bank.pnode(c) else { continue };
            let slot = i as u32;
            let mut matched = true;
            if g == f {
                // blocked when the same-digram occurrence below is matched
                let below_is_f = matches!(
                    gargs.get(i),
                    Some(&gc) if matches!(bank.pnode(gc), PNode::App(h, _) if h == f)
                );
                let child_matched =
                    below_is_f && chain_matched.get(&(c, slot)).copied().unwrap_or(false);
                matched = !child_matched;
                chain_matched.insert((n, slot), matched);
            }
            if matched && m > 0 {
                let entry = counts
                    .entry(DigramKey { parent: *f, child: *g, slot })
                    .or_insert((0, args.len() as u32, gargs.len() as u32));
                entry.0 = entry
                    .0
                    .checked_add(m)
                    .ok_or_else(|| Error::TermTooLarge("digram count exceeds u128".into()))?;
            }
        }
    }
    Ok(RoundData { counts, chain_matched })
}

/// Replacement loop over a forest; returns the rewritten forest and the
/// fresh productions in creation order.
pub fn repair_forest(
    bank: &mut Bank,
    mut forest: Vec<PTerm>,
    names: &mut NameAlloc,
    cfg: &CompressCfg,
) -> Result<RepairOutcome> {
    let mut fresh: Vec<Production> = Vec::new();
    loop {
        let order = term::postorder(bank, &forest);
        let mult = match cfg.count_mode {
            CountMode::Tree => multiplicities(bank, &order, &forest)?,
            CountMode::Dag => order.iter().map(|&n| (n, 1u128)).collect(),
        };
        let round = count_round(bank, &order, &mult)?;
        // eligible digrams sorted by count, ties lexicographically on
        // (parent name, child name, slot)
        let mut eligible: Vec<(DigramKey, u128, u32, u32)> = round
            .counts
            .iter()
            .filter(|&(_, &(count, pa, ca))| {
                count >= cfg.min_occurrences.max(2)
                    && cfg.max_arity.map_or(true, |cap| pa - 1 + ca <= cap)
            })
            .map(|(&k, &(count, pa, ca))| (k, count, pa, ca))
            .collect();
        if eligible.is_empty() {
            break;
        }
        eligible.sort_by(|a, b| {
            b.1.cmp(&a.1).then_with(|| {
                (bank.sym_name(a.0.parent), bank.sym_name(a.0.child), a.0.slot)
                    .cmp(&(bank.sym_name(b.0.parent), bank.sym_name(b.0.child), b.0.slot))
            })
        });
        if !cfg.batch {
            eligible.truncate(1);
        }
        // fresh production per digram:
        // h(V1..V_{n-1+m}) -> f(V1..Vi-1, g(Vi..Vi+m-1), Vi+m..)
        let mut by_parent: FxHashMap<Sym, Vec<(usize, DigramKey)>> = FxHashMap::default();
        let mut batch: Vec<(Production, bool)> = Vec::new();
        for (prio, &(dk, _, pa, ca)) in eligible.iter().enumerate() {
            let h = names.fresh(bank);
            let arity = pa - 1 + ca;
            let mut fargs: Vec<PTerm> = Vec::with_capacity(pa as usize);
            let mut next = 1u32;
            for s in 0..pa {
                if s == dk.slot {
                    let mut gargs = Vec::with_capacity(ca as usize);
                    for _ in 0..ca {
                        gargs.push(bank.param(next));
                        next += 1;
                    }
                    fargs.push(bank.papp(dk.child, &gargs));
                } else {
                    fargs.push(bank.param(next));
                    next += 1;
                }
            }
            let pattern = bank.papp(dk.parent, &fargs);
            batch.push((Production { name: h, arity, rhs: pattern }, false));
            by_parent.entry(dk.parent).or_default().push((prio, dk));
        }
        // rewrite bottom-up; per node at most one digram applies, the
        // highest-priority one whose old structure matches
        let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
        for &n in &order {
            let img = match bank.pnode(n).clone() {
                PNode::Param(_) => n,
                PNode::App(f, args) => {
                    let mut hit: Option<(usize, u32)> = None;
                    if let Some(cands) = by_parent.get(&f) {
                        for &(prio, dk) in cands {
                            if let Some(&c) = args.get(dk.slot as usize) {
                                if let PNode::App(g, _) = bank.pnode(c) {
                                    if *g == dk.child {
                                        let matched = if *g == f {
                                            round
                                                .chain_matched
                                                .get(&(n, dk.slot))
                                                .copied()
                                                .unwrap_or(false)
                                        } else {
                                            true
                                        };
                                        if matched
                                            && hit.map_or(true, |(best, _)| prio < best)
                                        {
                                            hit = Some((prio, dk.slot));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    match hit {
                        Some((prio, slot)) => {
                            let i = slot as usize;
                            let c = args[i];
                            let PNode::App(_, gargs) = bank.pnode(c).clone() else {
                                unreachable!()
                            };
                            let mut hargs: Vec<PTerm> =
                                Vec::with_capacity(args.len() - 1 + gargs.len());
                            for &x in &args[..i] {
                                hargs.push(map[&x]);
                            }
                            for &x in gargs.iter() {
                                hargs.push(map[&x]);
                            }
                            for &x in &args[i + 1..] {
                                hargs.push(map[&x]);
                            }
                            batch[prio].1 = true;
                            bank.papp(batch[prio].0.name, &hargs)
                        }
                        None => {
                            let new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                            if new == args.as_slice() {
                                n
                            } else {
                                bank.papp(f, &new)
                            }
                        }
                    }
                }
            };
            map.insert(n, img);
        }
        forest = forest.iter().map(|r| map[r]).collect();
        // a digram can lose all its occurrences to higher-priority ones at
        // shared nodes; unused productions are not emitted
        fresh.extend(batch.into_iter().filter(|(_, used)| *used).map(|(p, _)| p));
    }
    // Residual sharing: ground non-leaf subtrees still referenced more than
    // once become arity-0 productions, keeping every RHS tree small.  Under
    // tree counting this is a no-op (a repeated ground subtree always
    // exposes a repeated digram); under DAG counting it materializes the
    // sharing the counts were computed over.
    share_residual(bank, &mut forest, names, &mut fresh)?;
    Ok(RepairOutcome { forest, fresh })
}

fn share_residual(
    bank: &mut Bank,
    forest: &mut Vec<PTerm>,
    names: &mut NameAlloc,
    fresh: &mut Vec<Production>,
) -> Result<()> {
    let order = term::postorder(bank, forest);
    let mut refs: FxHashMap<PTerm, u64> = FxHashMap::default();
    for &r in forest.iter() {
        *refs.entry(r).or_insert(0) += 1;
    }
    let mut ground: FxHashMap<PTerm, bool> = FxHashMap::default();
    for &n in &order {
        let g = match bank.pnode(n) {
            PNode::Param(_) => false,
            PNode::App(_, args) => {
                for &c in args.iter() {
                    *refs.entry(c).or_insert(0) += 1;
                }
                args.iter().all(|c| ground[c])
            }
        };
        ground.insert(n, g);
    }
    let shared: Vec<PTerm> = order
        .iter()
        .copied()
        .filter(|&n| {
            refs.get(&n).copied().unwrap_or(0) >= 2
                && ground[&n]
                && matches!(bank.pnode(n), PNode::App(_, args) if !args.is_empty())
        })
        .collect();
    if shared.is_empty() {
        return Ok(());
    }
    let mut name_of: FxHashMap<PTerm, Sym> = FxHashMap::default();
    for &n in &shared {
        name_of.insert(n, names.fresh(bank));
    }
    // rewrite bottom-up: below a shared node, references replace children
    let mut inline: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for &n in &order {
        let img = match bank.pnode(n).clone() {
            PNode::Param(_) => n,
            PNode::App(f, args) => {
                let new: Vec<PTerm> = args
                    .iter()
                    .map(|c| match name_of.get(c) {
                        Some(&s) => bank.papp(s, &[]),
                        None => inline[c],
                    })
                    .collect();
                if new == args.as_slice() {
                    n
                } else {
                    bank.papp(f, &new)
                }
            }
        };
        inline.insert(n, img);
    }
    for &n in &shared {
        fresh.push(Production { name: name_of[&n], arity: 0, rhs: inline[&n] });
    }
    *forest = forest
        .iter()
        .map(|r| match name_of.get(r) {
            Some(&s) => bank.papp(s, &[]),
            None => inline[r],
        })
        .collect();
    Ok(())
}

/// TreeRePair over a set of named ground terms: replacement phase, then
/// (optionally) pruning with the start productions protected.  The output
/// expands to exactly the input values.
///
/// Under [`CountMode::Dag`] the main term is maintained as a DAG whose
/// sharing is frozen as arity-0 productions first (the minimal DAG), and the
/// digram loop then runs over that small RHS forest; occurrence counts are
/// per distinct context.  Under [`CountMode::Tree`] the loop runs on the
/// hash-consed trees directly with tree-view counts.
pub fn treerepair(
    bank: &mut Bank,
    roots: &[(Sym, PTerm)],
    names: &mut NameAlloc,
    cfg: &CompressCfg,
    prune_after: bool,
) -> Result<Kb> {
    for &(name, t) in roots {
        if !term::is_ground(bank, t) {
            return Err(Error::Internal(format!(
                "treerepair input `{}` is not ground",
                bank.sym_name(name)
            )));
        }
    }
    let mut kb = match cfg.count_mode {
        CountMode::Tree => {
            let forest: Vec<PTerm> = roots.iter().map(|&(_, t)| t).collect();
            let out = repair_forest(bank, forest, names, cfg)?;
            let mut prods = out.fresh;
            for (&(name, _), &rhs) in roots.iter().zip(&out.forest) {
                prods.push(Production { name, arity: 0, rhs });
            }
            let stated = vec![None; prods.len()];
            Kb::new(Default::default(), Grammar::new(prods), stated)
        }
        CountMode::Dag => {
            let g0 = super::min_dag(bank, roots, names)?;
            let forest: Vec<PTerm> = g0.prods.iter().map(|p| p.rhs).collect();
            let inner = CompressCfg { count_mode: CountMode::Tree, ..cfg.clone() };
            let out = repair_forest(bank, forest, names, &inner)?;
            assemble_ordered(bank, &g0, &out)?
        }
    };
    if prune_after {
        let protected: FxHashSet<Sym> = roots.iter().map(|&(n, _)| n).collect();
        super::prune(bank, &mut kb, &protected)?;
    }
    Ok(kb)
}

/// Merge fresh digram productions with the rewritten DAG productions into a
/// topologically ordered grammar (fresh productions may reference share
/// productions and vice versa).
fn assemble_ordered(bank: &Bank, g0: &Grammar, out: &RepairOutcome) -> Result<Kb> {
    let mut items: Vec<Production> = out.fresh.clone();
    for (p, &rhs) in g0.prods.iter().zip(&out.forest) {
        items.push(Production { name: p.name, arity: p.arity, rhs });
    }
    let index: FxHashMap<Sym, usize> =
        items.iter().enumerate().map(|(i, p)| (p.name, i)).collect();
    let mut deps: Vec<Vec<usize>> = Vec::with_capacity(items.len());
    for p in &items {
        let mut d: Vec<usize> = Vec::new();
        for n in term::postorder(bank, &[p.rhs]) {
            if let PNode::App(f, _) = bank.pnode(n) {
                if let Some(&j) = index.get(f) {
                    if !d.contains(&j) {
                        d.push(j);
                    }
                }
            }
        }
        deps.push(d);
    }
    // Kahn with stable priority: lowest original index first
    let mut emitted = vec![false; items.len()];
    let mut order: Vec<usize> = Vec::with_capacity(items.len());
    for _ in 0..items.len() {
        let next = (0..items.len())
            .find(|&i| !emitted[i] && deps[i].iter().all(|&j| emitted[j]))
            .ok_or_else(|| Error::Internal("cyclic grammar after repair".into()))?;
        emitted[next] = true;
        order.push(next);
    }
    let prods: Vec<Production> = order.into_iter().map(|i| items[i].clone()).collect();
    let stated = vec![None; prods.len()];
    Ok(Kb::new(Default::default(), Grammar::new(prods), stated))
}
