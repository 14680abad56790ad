//! Pruning: eliminate productions with non-positive save-value by unfolding.

use crate::bank::{Bank, Sym};
use crate::error::Result;
use crate::grammar::{Grammar, Kb, Production};
use rustc_hash::FxHashSet;

use super::sav::{sav_work, unfold_in};

#[derive(Debug, Default)]
pub struct PruneStats {
    pub unfolded: usize,
}

/// Iteratively unfold the unprotected production with the smallest
/// save-value while any has save-value <= 0, recomputing after each unfold.
/// Protected nonterminals are never eliminated.  Afterwards every remaining
/// unprotected production has save-value > 0.
pub fn prune(bank: &mut Bank, kb: &mut Kb, protected: &FxHashSet<Sym>) -> Result<PruneStats> {
    let mut stats = PruneStats::default();
    loop {
        let work = sav_work(bank, &kb.grammar)?;
        let mut pick: Option<(i128, usize)> = None;
        for (i, p) in kb.grammar.prods.iter().enumerate() {
            if protected.contains(&p.name) {
                continue;
            }
            if work.sav[i] <= 0 {
                let key = (work.sav[i], i);
                if pick.map_or(true, |best| key < best) {
                    pick = Some(key);
                }
            }
        }
        let Some((_, victim)) = pick else { break };
        let target = kb.grammar.prods[victim].name;
        let body = kb.grammar.prods[victim].rhs;
        let mut prods: Vec<Production> = Vec::with_capacity(kb.grammar.len() - 1);
        let mut stated = Vec::with_capacity(kb.stated.len() - 1);
        for (i, p) in kb.grammar.prods.iter().enumerate() {
            if i == victim {
                continue;
            }
            let rhs = if work.uses[i].contains(&victim) {
                unfold_in(bank, p.rhs, target, body)?
            } else {
                p.rhs
            };
            prods.push(Production { name: p.name, arity: p.arity, rhs });
            stated.push(kb.stated[i].clone());
        }
        kb.grammar = Grammar::new(prods);
        kb.stated = stated;
        stats.unfolded += 1;
    }
    Ok(stats)
}
