//! Productions, proof grammars, presupposition bases and knowledge bases.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::formula::Clause;
use crate::term;
use rustc_hash::{FxHashMap, FxHashSet};

/// A production `p(V1..Vn) -> d`.
#[derive(Debug, Clone)]
pub struct Production {
    pub name: Sym,
    pub arity: u32,
    pub rhs: PTerm,
}

/// Ordered sequence of productions with pairwise distinct nonterminals;
/// a nonterminal may only be referenced after its production (acyclicity).
#[derive(Debug, Clone, Default)]
pub struct Grammar {
    pub prods: Vec<Production>,
    index: FxHashMap<Sym, usize>,
}

impl Grammar {
    pub fn new(prods: Vec<Production>) -> Self {
        let index = prods
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name, i))
            .collect();
        Grammar { prods, index }
    }

    pub fn position(&self, name: Sym) -> Option<usize> {
        self.index.get(&name).copied()
    }

    pub fn production(&self, name: Sym) -> Option<&Production> {
        self.position(name).map(|i| &self.prods[i])
    }

    pub fn is_nonterminal(&self, name: Sym) -> bool {
        self.index.contains_key(&name)
    }

    pub fn len(&self) -> usize {
        self.prods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prods.is_empty()
    }

    /// Total size: sum of tree sizes of all RHSs.
    pub fn size(&self, bank: &Bank) -> u64 {
        let mut memo = FxHashMap::default();
        self.prods
            .iter()
            .map(|p| term::term_size_memo(bank, p.rhs, &mut memo).expect("grammar size") as u64)
            .sum()
    }

    /// Occurrences of each nonterminal in the tree views of all RHSs
    /// (`ref_G`), indexed like `prods`.
    pub fn ref_counts(&self, bank: &Bank) -> Vec<u64> {
        let mut refs = vec![0u64; self.prods.len()];
        for p in &self.prods {
            let order = term::postorder(bank, &[p.rhs]);
            let mut mult: FxHashMap<PTerm, u64> = FxHashMap::default();
            mult.insert(p.rhs, 1);
            for &n in order.iter().rev() {
                let m = mult.get(&n).copied().unwrap_or(0);
                if let PNode::App(_, args) = bank.pnode(n) {
                    for &c in args.iter() {
                        *mult.entry(c).or_insert(0) += m;
                    }
                }
            }
            for (&n, &m) in &mult {
                if let PNode::App(f, _) = bank.pnode(n) {
                    if let Some(i) = self.position(*f) {
                        refs[i] += m;
                    }
                }
            }
        }
        refs
    }
}

/// Presupposition base: named clauses with pairwise distinct names,
/// in declaration order.
#[derive(Debug, Clone, Default)]
pub struct Base {
    pub entries: Vec<(Sym, Clause)>,
    index: FxHashMap<Sym, usize>,
}

impl Base {
    pub fn new() -> Self {
        Base::default()
    }

    pub fn insert(&mut self, name: Sym, clause: Clause) -> bool {
        if self.index.contains_key(&name) {
            return false;
        }
        self.index.insert(name, self.entries.len());
        self.entries.push((name, clause));
        true
    }

    pub fn get(&self, name: Sym) -> Option<&Clause> {
        self.index.get(&name).map(|&i| &self.entries[i].1)
    }

    pub fn contains(&self, name: Sym) -> bool {
        self.index.contains_key(&name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Knowledge base: presupposition base, proof grammar and the stated theorem
/// clauses aligned with the productions.  A stated clause may be absent for
/// machine-generated productions whose clause is the grammar-MGT itself.
#[derive(Debug, Clone, Default)]
pub struct Kb {
    pub base: Base,
    pub grammar: Grammar,
    pub stated: Vec<Option<Clause>>,
}

impl Kb {
    pub fn new(base: Base, grammar: Grammar, stated: Vec<Option<Clause>>) -> Self {
        assert_eq!(grammar.prods.len(), stated.len());
        Kb { base, grammar, stated }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    DuplicateNonterminal { name: String },
    ForwardReference { name: String, used_in: String },
    SelfReference { name: String },
    ArityMismatch { name: String, declared: usize, used: usize, in_prod: String },
    UndeclaredTerminal { name: String, in_prod: String },
    ParamOutOfRange { index: u32, arity: u32, in_prod: String },
    UnusedParam { index: u32, in_prod: String },
    InconsistentTerminalArity { name: String, seen: usize, used: usize, in_prod: String },
}

#[derive(Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
    /// Symbols used in RHSs that are not nonterminals, with observed arity.
    pub terminals: Vec<(Sym, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Well-formedness check.  Ordering violations, duplicate nonterminals,
/// arity inconsistencies, parameters beyond the declared arity and terminals
/// missing from the base are errors; LHS-only parameters are flagged as
/// warnings but accepted.
pub fn validate_grammar(bank: &Bank, grammar: &Grammar, base: &Base) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen: FxHashMap<Sym, usize> = FxHashMap::default();
    for (i, p) in grammar.prods.iter().enumerate() {
        if let Some(_prev) = seen.insert(p.name, i) {
            report.errors.push(ValidationIssue::DuplicateNonterminal {
                name: bank.sym_name(p.name).to_owned(),
            });
        }
    }
    let mut terminal_arity: FxHashMap<Sym, usize> = FxHashMap::default();
    let mut terminal_order: Vec<Sym> = Vec::new();
    for (j, p) in grammar.prods.iter().enumerate() {
        let prod_name = bank.sym_name(p.name).to_owned();
        let nodes = term::postorder(bank, &[p.rhs]);
        let mut used_params: FxHashSet<u32> = FxHashSet::default();
        for n in &nodes {
            match bank.pnode(*n) {
                PNode::Param(idx) => {
                    used_params.insert(*idx);
                    if *idx > p.arity {
                        report.errors.push(ValidationIssue::ParamOutOfRange {
                            index: *idx,
                            arity: p.arity,
                            in_prod: prod_name.clone(),
                        });
                    }
                }
                PNode::App(f, args) => {
                    if let Some(i) = grammar.position(*f) {
                        if i > j {
                            report.errors.push(ValidationIssue::ForwardReference {
                                name: bank.sym_name(*f).to_owned(),
                                used_in: prod_name.clone(),
                            });
                        } else if i == j {
                            report.errors.push(ValidationIssue::SelfReference {
                                name: prod_name.clone(),
                            });
                        }
                        let declared = grammar.prods[i].arity as usize;
                        if args.len() != declared {
                            report.errors.push(ValidationIssue::ArityMismatch {
                                name: bank.sym_name(*f).to_owned(),
                                declared,
                                used: args.len(),
                                in_prod: prod_name.clone(),
                            });
                        }
                    } else {
                        match base.get(*f) {
                            Some(clause) => {
                                if clause.body.len() != args.len() {
                                    report.errors.push(ValidationIssue::ArityMismatch {
                                        name: bank.sym_name(*f).to_owned(),
                                        declared: clause.body.len(),
                                        used: args.len(),
                                        in_prod: prod_name.clone(),
                                    });
                                }
                            }
                            None => {
                                report.errors.push(ValidationIssue::UndeclaredTerminal {
                                    name: bank.sym_name(*f).to_owned(),
                                    in_prod: prod_name.clone(),
                                });
                            }
                        }
                        match terminal_arity.insert(*f, args.len()) {
                            None => terminal_order.push(*f),
                            Some(prev) if prev != args.len() => {
                                report.errors.push(ValidationIssue::InconsistentTerminalArity {
                                    name: bank.sym_name(*f).to_owned(),
                                    seen: prev,
                                    used: args.len(),
                                    in_prod: prod_name.clone(),
                                });
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        for idx in 1..=p.arity {
            if !used_params.contains(&idx) {
                report.warnings.push(ValidationIssue::UnusedParam {
                    index: idx,
                    in_prod: prod_name.clone(),
                });
            }
        }
    }
    report.terminals = terminal_order
        .into_iter()
        .map(|s| (s, terminal_arity[&s]))
        .collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Clause;

    fn tiny_base(bank: &mut Bank) -> Base {
        let mut base = Base::new();
        let imp = bank.sym("=>");
        let x = bank.fvar(0);
        let y = bank.fvar(1);
        let ixy = bank.fapp(imp, &[x, y]);
        let d = bank.sym("D");
        base.insert(d, Clause { head: y, body: vec![ixy, x] });
        let inner = bank.fapp(imp, &[y, x]);
        let k = bank.fapp(imp, &[x, inner]);
        let ax1 = bank.sym("ax-1");
        base.insert(ax1, Clause::unit(k));
        base
    }

    #[test]
    fn example6_g2_is_valid() {
        let mut bank = Bank::new();
        let base = tiny_base(&mut bank);
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
        let d_p1 = bank.papp(d, &[p1_ref, p1_ref]);
        let inner = bank.papp(p2, &[d_p1]);
        let start_rhs = bank.papp(p2, &[inner]);
        let g = Grammar::new(vec![
            Production { name: p1, arity: 0, rhs: p1_rhs },
            Production { name: p2, arity: 1, rhs: p2_rhs },
            Production { name: start, arity: 0, rhs: start_rhs },
        ]);
        // note p1 -> p2(ax-1) references p2 *forward*: Example 6 lists G2 as
        // <p1 -> p2(ax-1), p2(V1) -> D(ax-1, V1), Start -> ...>, which breaks
        // the ordering requirement as written; the well-formed order is p2
        // before p1.
        let report = validate_grammar(&bank, &g, &base);
        assert!(!report.is_valid());
        let g2 = Grammar::new(vec![
            Production { name: p2, arity: 1, rhs: p2_rhs },
            Production { name: p1, arity: 0, rhs: p1_rhs },
            Production { name: start, arity: 0, rhs: start_rhs },
        ]);
        let report = validate_grammar(&bank, &g2, &base);
        assert!(report.is_valid(), "{:?}", report.errors);
        let names: Vec<&str> = report
            .terminals
            .iter()
            .map(|&(s, _)| bank.sym_name(s))
            .collect();
        assert_eq!(names.len(), 2);
        assert!(names.contains(&"D") && names.contains(&"ax-1"));
        assert_eq!(g2.size(&bank), 7);
    }

    #[test]
    fn ordering_violation_reported() {
        let mut bank = Bank::new();
        let base = tiny_base(&mut bank);
        let p1 = bank.sym("p1");
        let p2 = bank.sym("p2");
        let ax1 = bank.sym("ax-1");
        let a = bank.papp(ax1, &[]);
        let rhs1 = bank.papp(p2, &[a]);
        let v1 = bank.param(1);
        let rhs2 = bank.papp(p1, &[]);
        let _ = v1;
        let g = Grammar::new(vec![
            Production { name: p1, arity: 0, rhs: rhs1 },
            Production { name: p2, arity: 1, rhs: rhs2 },
        ]);
        let report = validate_grammar(&bank, &g, &base);
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationIssue::ForwardReference { .. })));
    }

    #[test]
    fn unused_param_flagged() {
        let mut bank = Bank::new();
        let base = tiny_base(&mut bank);
        let q = bank.sym("q");
        let d = bank.sym("D");
        let v1 = bank.param(1);
        let rhs = bank.papp(d, &[v1, v1]);
        let g = Grammar::new(vec![Production { name: q, arity: 2, rhs }]);
        let report = validate_grammar(&bank, &g, &base);
        assert!(report.is_valid());
        assert!(report
            .warnings
            .iter()
            .any(|w| matches!(w, ValidationIssue::UnusedParam { index: 2, .. })));
    }
}
