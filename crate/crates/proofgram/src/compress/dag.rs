//! Minimal DAG compression (arity-0 grammars with maximal sharing).

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Production};
use crate::term;
use rustc_hash::FxHashMap;

use super::NameAlloc;

/// Minimal DAG compression of a set of ground terms: one production per
/// distinct non-leaf subtree referenced at least twice (counting duplicate
/// child slots and root occurrences), plus one start production per input
/// term.  A root that is itself shared gets a bare-reference RHS.
pub fn min_dag(
    bank: &mut Bank,
    roots: &[(Sym, PTerm)],
    names: &mut NameAlloc,
) -> Result<Grammar> {
    for &(name, t) in roots {
        if !term::is_ground(bank, t) {
            return Err(Error::Internal(format!(
                "min_dag input `{}` is not ground",
                bank.sym_name(name)
            )));
        }
    }
    let root_terms: Vec<PTerm> = roots.iter().map(|&(_, t)| t).collect();
    let order = term::postorder(bank, &root_terms);
    let mut refs: FxHashMap<PTerm, u64> = FxHashMap::default();
    for &t in &root_terms {
        *refs.entry(t).or_insert(0) += 1;
    }
    for &n in &order {
        if let PNode::App(_, args) = bank.pnode(n) {
            for &c in args.iter() {
                *refs.entry(c).or_insert(0) += 1;
            }
        }
    }
    let is_shared = |bank: &Bank, n: PTerm| -> bool {
        refs.get(&n).copied().unwrap_or(0) >= 2
            && matches!(bank.pnode(n), PNode::App(_, args) if !args.is_empty())
    };
    // allocate names for shared nodes in postorder (defines before uses)
    let mut shared_name: FxHashMap<PTerm, Sym> = FxHashMap::default();
    for &n in &order {
        if is_shared(bank, n) {
            let sym = names.fresh(bank);
            shared_name.insert(n, sym);
        }
    }
    // inline RHS per node: shared children become bare references
    let mut inline: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for &n in &order {
        let img = match bank.pnode(n).clone() {
            PNode::Param(_) => unreachable!("ground input"),
            PNode::App(f, args) => {
                let mut new = Vec::with_capacity(args.len());
                for &c in args.iter() {
                    match shared_name.get(&c) {
                        Some(&s) => new.push(bank.papp(s, &[])),
                        None => new.push(inline[&c]),
                    }
                }
                bank.papp(f, &new)
            }
        };
        inline.insert(n, img);
    }
    let mut prods: Vec<Production> = Vec::new();
    for &n in &order {
        if let Some(&name) = shared_name.get(&n) {
            prods.push(Production { name, arity: 0, rhs: inline[&n] });
        }
    }
    for &(name, t) in roots {
        let rhs = match shared_name.get(&t) {
            Some(&s) => bank.papp(s, &[]),
            None => inline[&t],
        };
        prods.push(Production { name, arity: 0, rhs });
    }
    Ok(Grammar::new(prods))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::NameAlloc;

    #[test]
    fn example6_dag_has_size_8() {
        let mut bank = Bank::new();
        let d = bank.sym("D");
        let ax1 = bank.sym("ax-1");
        let a = bank.papp(ax1, &[]);
        let p1 = bank.papp(d, &[a, a]);
        let inner = bank.papp(d, &[p1, p1]);
        let mid = bank.papp(d, &[a, inner]);
        let top = bank.papp(d, &[a, mid]);
        let start = bank.sym("Start");
        let mut names = NameAlloc::new("dag");
        let g = min_dag(&mut bank, &[(start, top)], &mut names).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.size(&bank), 8);
        // the shared production is D(ax-1, ax-1)
        assert_eq!(g.prods[0].rhs, p1);
    }

    #[test]
    fn share_free_path_term() {
        let mut bank = Bank::new();
        let f = bank.sym("f");
        let g_ = bank.sym("g");
        let h = bank.sym("h");
        let a = bank.sym("a");
        let ca = bank.papp(a, &[]);
        let hh = bank.papp(h, &[ca]);
        let gg = bank.papp(g_, &[hh]);
        let ff = bank.papp(f, &[gg]);
        let start = bank.sym("Start");
        let mut names = NameAlloc::new("dag");
        let g = min_dag(&mut bank, &[(start, ff)], &mut names).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.size(&bank), 3);
    }

    #[test]
    fn identical_roots_share() {
        let mut bank = Bank::new();
        let f = bank.sym("f");
        let a = bank.sym("a");
        let ca = bank.papp(a, &[]);
        let t = bank.papp(f, &[ca]);
        let s1 = bank.sym("S1");
        let s2 = bank.sym("S2");
        let mut names = NameAlloc::new("dag");
        let g = min_dag(&mut bank, &[(s1, t), (s2, t)], &mut names).unwrap();
        // one shared production plus two bare-reference starts
        assert_eq!(g.len(), 3);
        assert_eq!(g.size(&bank), 1);
    }
}
