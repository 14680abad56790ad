//! Save-values: the grammar-size change caused by removing a production and
//! unfolding it at every reference site.

use crate::bank::{Bank, PNode, PTerm};
use crate::error::Result;
use crate::grammar::Grammar;
use crate::term;
use rustc_hash::FxHashMap;

/// Per-production data for the arithmetic save-value computation.
pub(crate) struct SavWork {
    /// |d_i| for every production.
    pub sizes: Vec<i128>,
    /// occurrence count of each parameter in the RHS tree, per production.
    pub occs: Vec<Vec<i128>>,
    /// save-values; for `ref = 0` this is `-|d|`.
    pub sav: Vec<i128>,
    /// reference counts.
    pub refs: Vec<u64>,
    /// per production: distinct grammar positions referenced in its RHS.
    pub uses: Vec<Vec<usize>>,
}

/// Save-value of every production via the unfolding arithmetic: for each
/// reference site of `p` with arguments `t_j`,
/// `delta = |d_p| - arity(p) + sum_j (occ_j - 1) * |t_j|`, and
/// `sav(p) = sum(delta) - |d_p|`.  Handles nonlinear and LHS-only
/// parameters; agrees with the literal unfold oracle.
pub fn save_values(bank: &Bank, grammar: &Grammar) -> Result<Vec<i128>> {
    Ok(sav_work(bank, grammar)?.sav)
}

pub(crate) fn sav_work(bank: &Bank, grammar: &Grammar) -> Result<SavWork> {
    let n = grammar.len();
    let mut size_memo: FxHashMap<PTerm, u128> = FxHashMap::default();
    let mut sizes = Vec::with_capacity(n);
    let mut occs = Vec::with_capacity(n);
    for p in &grammar.prods {
        sizes.push(term::term_size_memo(bank, p.rhs, &mut size_memo)? as i128);
        let oc = term::param_occurrences(bank, p.rhs)?;
        let mut v = vec![0i128; p.arity as usize];
        for (idx, cnt) in oc {
            v[(idx - 1) as usize] = cnt as i128;
        }
        occs.push(v);
    }
    let mut sav: Vec<i128> = sizes.iter().map(|s| -s).collect();
    let mut refs = vec![0u64; n];
    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pi, p) in grammar.prods.iter().enumerate() {
        // tree multiplicities within this RHS
        let order = term::postorder(bank, &[p.rhs]);
        let mut mult: FxHashMap<PTerm, u128> = FxHashMap::default();
        mult.insert(p.rhs, 1);
        for &nd in order.iter().rev() {
            let m = mult.get(&nd).copied().unwrap_or(0);
            if let PNode::App(_, args) = bank.pnode(nd) {
                for &c in args.iter() {
                    *mult.entry(c).or_insert(0) += m;
                }
            }
        }
        for &nd in &order {
            if let PNode::App(f, args) = bank.pnode(nd) {
                if let Some(j) = grammar.position(*f) {
                    let m = mult[&nd] as i128;
                    refs[j] += mult[&nd] as u64;
                    if !uses[pi].contains(&j) {
                        uses[pi].push(j);
                    }
                    let mut delta = sizes[j] - args.len() as i128;
                    for (k, c) in args.iter().enumerate() {
                        delta += (occs[j][k] - 1) * size_memo[c] as i128;
                    }
                    sav[j] += m * delta;
                }
            }
        }
    }
    Ok(SavWork { sizes, occs, sav, refs, uses })
}

/// Literal unfolding oracle: build `G'` (remove production `index`, unfold
/// it in all RHSs) and return `|G'| - |G|`.
pub fn save_value_unfold(bank: &mut Bank, grammar: &Grammar, index: usize) -> Result<i128> {
    let old_size = grammar.size(bank) as i128;
    let target = grammar.prods[index].name;
    let body = grammar.prods[index].rhs;
    let mut new_size = 0i128;
    for (i, p) in grammar.prods.iter().enumerate() {
        if i == index {
            continue;
        }
        let rhs = unfold_in(bank, p.rhs, target, body)?;
        new_size += term::term_size(bank, rhs)? as i128;
    }
    Ok(new_size - old_size)
}

/// Replace every occurrence of `target(args)` in `t` by `body[args]`.
pub(crate) fn unfold_in(
    bank: &mut Bank,
    t: PTerm,
    target: crate::bank::Sym,
    body: PTerm,
) -> Result<PTerm> {
    let order = term::postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for nd in order {
        let img = match bank.pnode(nd).clone() {
            PNode::Param(_) => nd,
            PNode::App(f, args) => {
                let new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                if f == target {
                    term::substitute_params(bank, body, &new)?
                } else if new == args.as_slice() {
                    nd
                } else {
                    bank.papp(f, &new)
                }
            }
        };
        map.insert(nd, img);
    }
    Ok(map[&t])
}
