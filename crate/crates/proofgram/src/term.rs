//! Structural operations on proof terms.
//!
//! Proof terms are stored hash-consed, so a "tree" here is really a DAG whose
//! tree view can be astronomically larger than its node count.  All
//! traversals below are iterative (proof DAGs get deep) and memoized per
//! distinct node.

use crate::bank::{Bank, PNode, PTerm};
use crate::error::{Error, Result};
use rustc_hash::FxHashMap;

/// Distinct nodes reachable from `roots`, children before parents.
pub fn postorder(bank: &Bank, roots: &[PTerm]) -> Vec<PTerm> {
    let mut seen = FxHashMap::default();
    let mut out = Vec::new();
    let mut stack: Vec<(PTerm, bool)> = Vec::new();
    for &r in roots {
        if seen.contains_key(&r) {
            continue;
        }
        stack.push((r, false));
        while let Some((t, done)) = stack.pop() {
            if done {
                out.push(t);
                continue;
            }
            if seen.contains_key(&t) {
                continue;
            }
            seen.insert(t, ());
            stack.push((t, true));
            if let PNode::App(_, args) = bank.pnode(t) {
                for &c in args.iter() {
                    if !seen.contains_key(&c) {
                        stack.push((c, false));
                    }
                }
            }
        }
    }
    out
}

/// Number of edges of the term viewed as a tree: 0 for leaves, else arity
/// plus the sum over children.  Computed in `u128`; expansions beyond that
/// are rejected rather than silently wrapped.
pub fn term_size(bank: &Bank, t: PTerm) -> Result<u128> {
    let mut memo: FxHashMap<PTerm, u128> = FxHashMap::default();
    term_size_memo(bank, t, &mut memo)
}

pub fn term_size_memo(
    bank: &Bank,
    t: PTerm,
    memo: &mut FxHashMap<PTerm, u128>,
) -> Result<u128> {
    for n in postorder(bank, &[t]) {
        if memo.contains_key(&n) {
            continue;
        }
        let size = match bank.pnode(n) {
            PNode::Param(_) => 0u128,
            PNode::App(_, args) => {
                let mut s = args.len() as u128;
                for c in args.iter() {
                    s = s
                        .checked_add(memo[c])
                        .ok_or_else(|| Error::TermTooLarge("tree size exceeds u128".into()))?;
                }
                s
            }
        };
        memo.insert(n, size);
    }
    Ok(memo[&t])
}

/// Largest parameter index occurring in `t`, 0 if ground.
pub fn max_param(bank: &Bank, t: PTerm) -> u32 {
    let mut memo: FxHashMap<PTerm, u32> = FxHashMap::default();
    for n in postorder(bank, &[t]) {
        let m = match bank.pnode(n) {
            PNode::Param(i) => *i,
            PNode::App(_, args) => args.iter().map(|c| memo[c]).max().unwrap_or(0),
        };
        memo.insert(n, m);
    }
    memo[&t]
}

pub fn is_ground(bank: &Bank, t: PTerm) -> bool {
    max_param(bank, t) == 0
}

/// Tree-occurrence count of each parameter index, ascending by index.
pub fn param_occurrences(bank: &Bank, t: PTerm) -> Result<Vec<(u32, u128)>> {
    let order = postorder(bank, &[t]);
    // multiplicity of each distinct node in the tree view
    let mut mult: FxHashMap<PTerm, u128> = FxHashMap::default();
    mult.insert(t, 1);
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
                    .ok_or_else(|| Error::TermTooLarge("multiplicity exceeds u128".into()))?;
            }
        }
    }
    let mut occ: Vec<(u32, u128)> = Vec::new();
    for &n in &order {
        if let PNode::Param(i) = bank.pnode(n) {
            occ.push((*i, mult[&n]));
        }
    }
    occ.sort_unstable();
    Ok(occ)
}

/// True iff no parameter index occurs more than once.
pub fn is_linear(bank: &Bank, t: PTerm) -> bool {
    match param_occurrences(bank, t) {
        Ok(occ) => occ.iter().all(|&(_, n)| n <= 1),
        Err(_) => false,
    }
}

/// Simultaneous replacement of `V_i` by `args[i-1]`.
pub fn substitute_params(bank: &mut Bank, t: PTerm, args: &[PTerm]) -> Result<PTerm> {
    let mp = max_param(bank, t);
    if mp as usize > args.len() {
        return Err(Error::ParamOutOfRange {
            index: mp,
            max: args.len(),
        });
    }
    let order = postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for n in order {
        let image = match bank.pnode(n).clone() {
            PNode::Param(i) => args[(i - 1) as usize],
            PNode::App(f, ch) => {
                let new: Vec<PTerm> = ch.iter().map(|c| map[c]).collect();
                if new == ch.as_slice() {
                    n
                } else {
                    bank.papp(f, &new)
                }
            }
        };
        map.insert(n, image);
    }
    Ok(map[&t])
}

pub fn fmt_pterm(bank: &Bank, t: PTerm) -> String {
    let mut out = String::new();
    write_pterm(bank, t, &mut out, |name, buf| buf.push_str(name));
    out
}

/// Iterative term printer; `emit_name` controls quoting of symbol names.
pub fn write_pterm(
    bank: &Bank,
    t: PTerm,
    out: &mut String,
    emit_name: impl Fn(&str, &mut String),
) {
    enum Tok {
        Term(PTerm),
        Text(&'static str),
    }
    let mut stack = vec![Tok::Term(t)];
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Text(s) => out.push_str(s),
            Tok::Term(t) => match bank.pnode(t) {
                PNode::Param(i) => {
                    out.push('$');
                    out.push_str(&i.to_string());
                }
                PNode::App(f, args) => {
                    emit_name(bank.sym_name(*f), out);
                    if !args.is_empty() {
                        out.push('(');
                        stack.push(Tok::Text(")"));
                        for (k, &c) in args.iter().enumerate().rev() {
                            if k > 0 {
                                stack.push(Tok::Term(c));
                                stack.push(Tok::Text(","));
                            } else {
                                stack.push(Tok::Term(c));
                            }
                        }
                    }
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(bank: &mut Bank) -> (PTerm, PTerm, PTerm) {
        let d = bank.sym("D");
        let ax1 = bank.sym("ax-1");
        let a = bank.papp(ax1, &[]);
        let da = bank.papp(d, &[a, a]);
        let v1 = bank.param(1);
        let dv = bank.papp(d, &[v1, a]);
        (a, da, dv)
    }

    #[test]
    fn sizes_match_edge_counts() {
        let mut bank = Bank::new();
        let (a, da, dv) = small(&mut bank);
        assert_eq!(term_size(&bank, a).unwrap(), 0);
        assert_eq!(term_size(&bank, da).unwrap(), 2);
        assert_eq!(term_size(&bank, dv).unwrap(), 2);
        let v1 = bank.param(1);
        assert_eq!(term_size(&bank, v1).unwrap(), 0);
        // G(ax-1) has one edge, D(G(ax-1), ax-2) has three
        let g = bank.sym("G");
        let ax2 = bank.sym("ax-2");
        let ga = bank.papp(g, &[a]);
        assert_eq!(term_size(&bank, ga).unwrap(), 1);
        let a2 = bank.papp(ax2, &[]);
        let d = bank.sym("D");
        let t = bank.papp(d, &[ga, a2]);
        assert_eq!(term_size(&bank, t).unwrap(), 3);
    }

    #[test]
    fn example6_term_has_ten_edges() {
        let mut bank = Bank::new();
        let d = bank.sym("D");
        let ax1 = bank.sym("ax-1");
        let a = bank.papp(ax1, &[]);
        let p1 = bank.papp(d, &[a, a]);
        let inner = bank.papp(d, &[p1, p1]);
        let mid = bank.papp(d, &[a, inner]);
        let top = bank.papp(d, &[a, mid]);
        assert_eq!(term_size(&bank, top).unwrap(), 10);
    }

    #[test]
    fn linearity() {
        let mut bank = Bank::new();
        let (a, _, dv) = small(&mut bank);
        assert!(is_linear(&bank, dv));
        assert!(is_linear(&bank, a));
        // D(V1, D(D(V1, ax-1), ax-1)) is nonlinear
        let d = bank.sym("D");
        let v1 = bank.param(1);
        let i1 = bank.papp(d, &[v1, a]);
        let i2 = bank.papp(d, &[i1, a]);
        let t = bank.papp(d, &[v1, i2]);
        assert!(!is_linear(&bank, t));
    }

    #[test]
    fn substitution() {
        let mut bank = Bank::new();
        let (a, _, dv) = small(&mut bank);
        let ax2 = bank.sym("ax-2");
        let a2 = bank.papp(ax2, &[]);
        let r = substitute_params(&mut bank, dv, &[a2]).unwrap();
        let d = bank.sym("D");
        assert_eq!(r, bank.papp(d, &[a2, a]));
        // ground identity
        assert_eq!(substitute_params(&mut bank, a, &[]).unwrap(), a);
        // nonlinear duplication (Example 5 shape)
        let v1 = bank.param(1);
        let i1 = bank.papp(d, &[v1, a]);
        let i2 = bank.papp(d, &[i1, a]);
        let t = bank.papp(d, &[v1, i2]);
        let s = substitute_params(&mut bank, t, &[a]).unwrap();
        let j1 = bank.papp(d, &[a, a]);
        let j2 = bank.papp(d, &[j1, a]);
        let expect = bank.papp(d, &[a, j2]);
        assert_eq!(s, expect);
        // out-of-range parameter
        assert!(substitute_params(&mut bank, t, &[]).is_err());
    }

    #[test]
    fn size_additivity_under_substitution() {
        let mut bank = Bank::new();
        let (a, da, _) = small(&mut bank);
        let d = bank.sym("D");
        let v1 = bank.param(1);
        let v2 = bank.param(2);
        let t0 = bank.papp(d, &[v1, v2]);
        let t = bank.papp(d, &[t0, v1]);
        let occ = param_occurrences(&bank, t).unwrap();
        assert_eq!(occ, vec![(1, 2), (2, 1)]);
        let s = substitute_params(&mut bank, t, &[da, a]).unwrap();
        let expect = term_size(&bank, t).unwrap()
            + 2 * term_size(&bank, da).unwrap()
            + term_size(&bank, a).unwrap();
        assert_eq!(term_size(&bank, s).unwrap(), expect);
    }
}
