//! Re-compression of an existing grammar: all RHSs are joined under a fresh
//! virtual root, the combined term is compressed, and the root dismantled.
//! Original productions are never eliminated; fresh lemma productions are
//! inserted before their first use.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::cddc::{self, CanClause};
use crate::error::{Error, Result};
use crate::grammar::{Base, Grammar, Kb, Production};
use crate::term;
use rustc_hash::{FxHashMap, FxHashSet};

use super::{
    nonlinear_compress, prune, repair_forest, same_value_reduce, CompressCfg, GuardMode,
    NameAlloc,
};

#[derive(Debug, Clone)]
pub struct RecompressCfg {
    pub compress: CompressCfg,
    /// Also run MGT-based reduction on the lemma productions.
    pub mgt_reduce: bool,
}

impl Default for RecompressCfg {
    fn default() -> Self {
        RecompressCfg { compress: CompressCfg::default(), mgt_reduce: false }
    }
}

pub fn recompress(bank: &mut Bank, kb: &Kb, cfg: &RecompressCfg) -> Result<Kb> {
    if kb.grammar.is_empty() {
        return Ok(kb.clone());
    }
    let originals: Vec<Production> = kb.grammar.prods.clone();
    // combined term: virtual root over all RHSs
    let root_sym = {
        let mut alloc = NameAlloc::new("virtual-root-");
        alloc.fresh(bank)
    };
    let rhss: Vec<PTerm> = originals.iter().map(|p| p.rhs).collect();
    let combined = bank.papp(root_sym, &rhss);

    let mut names = NameAlloc::new("lemma");
    let out = repair_forest(bank, vec![combined], &mut names, &cfg.compress)?;
    let start_sym = {
        let mut alloc = NameAlloc::new("virtual-start-");
        alloc.fresh(bank)
    };
    // working KB: lemma productions plus the start carrying the root; the
    // original nonterminals are terminals here, with their stated clauses
    // (or computed MGTs) as presuppositions so guards can evaluate MGTs
    let mut work_base = kb.base.clone();
    let shallow = cddc::shallow_mgt(bank, kb)?;
    for (i, p) in originals.iter().enumerate() {
        let clause = match &kb.stated[i] {
            Some(c) => Some(CanClause::from_clause(bank, c).clause()),
            None => shallow[i].as_ref().map(|c| c.clause()),
        };
        match clause {
            Some(c) => {
                work_base.insert(p.name, c);
            }
            None => {
                return Err(Error::VerificationFailed(format!(
                    "recompress: no clause available for `{}` (undefined MGT)",
                    bank.sym_name(p.name)
                )))
            }
        }
    }
    let start_arity = term::max_param(bank, out.forest[0]);
    let mut prods = out.fresh;
    prods.push(Production { name: start_sym, arity: start_arity, rhs: out.forest[0] });
    let stated = vec![None; prods.len()];
    let mut work = Kb::new(work_base, Grammar::new(prods), stated);

    let protected: FxHashSet<Sym> = [start_sym].into_iter().collect();
    prune(bank, &mut work, &protected)?;
    nonlinear_compress(bank, &mut work, &protected, cfg.compress.guard, &mut names)?;
    same_value_reduce(bank, &mut work, &protected, cfg.compress.edge_budget)?;
    if cfg.mgt_reduce {
        super::mgt_reduce(bank, &mut work, &protected)?;
    }

    // dismantle: the start RHS must still be the virtual root application
    let start_pos = work
        .grammar
        .position(start_sym)
        .ok_or_else(|| Error::Internal("virtual start vanished".into()))?;
    let start_rhs = work.grammar.prods[start_pos].rhs;
    let new_rhss: Vec<PTerm> = match bank.pnode(start_rhs) {
        PNode::App(f, args) if *f == root_sym && args.len() == originals.len() => {
            args.iter().copied().collect()
        }
        _ => return Err(Error::Internal("virtual root was rewritten".into())),
    };
    let lemmas: Vec<Production> = work
        .grammar
        .prods
        .iter()
        .filter(|p| p.name != start_sym)
        .cloned()
        .collect();

    // first-use position of each lemma among the originals; lemma-to-lemma
    // references always point at earlier-created lemmas
    let lemma_index: FxHashMap<Sym, usize> =
        lemmas.iter().enumerate().map(|(i, p)| (p.name, i)).collect();
    let mut first_use: Vec<usize> = vec![usize::MAX; lemmas.len()];
    let mut direct_refs = |bank: &Bank, t: PTerm| -> Vec<usize> {
        let mut v = Vec::new();
        for n in term::postorder(bank, &[t]) {
            if let PNode::App(f, _) = bank.pnode(n) {
                if let Some(&li) = lemma_index.get(f) {
                    if !v.contains(&li) {
                        v.push(li);
                    }
                }
            }
        }
        v
    };
    for (pos, &rhs) in new_rhss.iter().enumerate() {
        for li in direct_refs(bank, rhs) {
            first_use[li] = first_use[li].min(pos);
        }
    }
    // propagate through lemma-lemma references, later creations first
    for li in (0..lemmas.len()).rev() {
        let pos = first_use[li];
        if pos == usize::MAX {
            continue;
        }
        for dep in direct_refs(bank, lemmas[li].rhs) {
            first_use[dep] = first_use[dep].min(pos);
        }
    }
    let mut final_prods: Vec<Production> = Vec::with_capacity(originals.len() + lemmas.len());
    let mut final_stated: Vec<Option<crate::formula::Clause>> = Vec::new();
    for (pos, orig) in originals.iter().enumerate() {
        for (li, lemma) in lemmas.iter().enumerate() {
            if first_use[li] == pos {
                final_prods.push(lemma.clone());
                final_stated.push(None);
            }
        }
        final_prods.push(Production { name: orig.name, arity: orig.arity, rhs: new_rhss[pos] });
        final_stated.push(kb.stated[pos].clone());
    }
    let mut result = Kb::new(kb.base.clone(), Grammar::new(final_prods), final_stated);
    fill_stated_with_mgts(bank, &mut result)?;
    Ok(result)
}

/// Fill missing stated clauses with the MGT computed against the stated
/// clauses of everything earlier (shallow chaining).
pub fn fill_stated_with_mgts(bank: &mut Bank, kb: &mut Kb) -> Result<()> {
    let shallow = cddc::shallow_mgt(bank, kb)?;
    for (st, sh) in kb.stated.iter_mut().zip(shallow) {
        if st.is_none() {
            *st = sh.map(|c| c.clause());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cddc::tests_support::example3_base;
    use crate::compress::production_digests;

    fn sample_kb(bank: &mut Bank) -> Kb {
        let base = example3_base(bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let a = bank.papp(ax1s, &[]);
        // two theorems sharing structure: t1 = D(ax-1, D(ax-1, ax-1)),
        // t2 = D(D(ax-1, ax-1), D(ax-1, ax-1))
        let daa = bank.papp(d, &[a, a]);
        let t1_rhs = bank.papp(d, &[a, daa]);
        let t2_rhs = bank.papp(d, &[daa, daa]);
        let t1 = bank.sym("t1");
        let t2 = bank.sym("t2");
        let g = Grammar::new(vec![
            Production { name: t1, arity: 0, rhs: t1_rhs },
            Production { name: t2, arity: 0, rhs: t2_rhs },
        ]);
        Kb::new(base, g, vec![None, None])
    }

    #[test]
    fn originals_preserved_with_values() {
        let mut bank = Bank::new();
        let kb = sample_kb(&mut bank);
        let before = production_digests(&bank, &kb.grammar);
        let out = recompress(&mut bank, &kb, &RecompressCfg::default()).unwrap();
        let after = production_digests(&bank, &out.grammar);
        for (i, p) in kb.grammar.prods.iter().enumerate() {
            let j = out.grammar.position(p.name).expect("original kept");
            assert_eq!(before[i], after[j], "value of {} changed", bank.sym_name(p.name));
        }
        // every original is present and the grammar is well formed
        let report = crate::grammar::validate_grammar(&bank, &out.grammar, &out.base);
        assert!(report.is_valid(), "{:?}", report.errors);
    }

    #[test]
    fn fixed_point_when_nothing_repeats() {
        let mut bank = Bank::new();
        let base = example3_base(&mut bank);
        let d = bank.sym("D");
        let ax1s = bank.sym("ax-1");
        let ax2s = bank.sym("ax-2");
        let a1 = bank.papp(ax1s, &[]);
        let a2 = bank.papp(ax2s, &[]);
        let rhs = bank.papp(d, &[a1, a2]);
        let t = bank.sym("t");
        let g = Grammar::new(vec![Production { name: t, arity: 0, rhs }]);
        let kb = Kb::new(base, g, vec![None]);
        let out = recompress(&mut bank, &kb, &RecompressCfg::default()).unwrap();
        assert_eq!(out.grammar.len(), 1);
        assert_eq!(out.grammar.prods[0].rhs, rhs);
    }
}
