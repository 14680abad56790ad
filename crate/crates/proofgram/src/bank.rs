//! Interned symbols and hash-consed term stores.
//!
//! All terms are immutable once created; equality of interned ids is
//! structural equality of the terms they denote.  Ids are assigned in
//! construction order, so identical input processed in the same order yields
//! identical ids, which keeps every downstream artifact deterministic.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

/// Interned symbol (presupposition name, nonterminal or formula functor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u32);

/// Hash-consed proof term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PTerm(pub u32);

/// Hash-consed formula term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FTerm(pub u32);

/// Proof term node: a parameter `V_i` (1-based index) or an application of a
/// presupposition name / nonterminal to child proof terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PNode {
    Param(u32),
    App(Sym, SmallVec<[PTerm; 2]>),
}

/// Formula term node: a variable (bank-local numeric id) or an application of
/// a function symbol.  Constants are zero-arity applications; variable ids
/// and symbols live in disjoint namespaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FNode {
    Var(u32),
    App(Sym, SmallVec<[FTerm; 2]>),
}

#[derive(Default)]
pub struct Bank {
    sym_names: Vec<String>,
    sym_index: FxHashMap<String, Sym>,
    pnodes: Vec<PNode>,
    pindex: FxHashMap<PNode, PTerm>,
    fnodes: Vec<FNode>,
    findex: FxHashMap<FNode, FTerm>,
}

impl Bank {
    pub fn new() -> Self {
        Bank::default()
    }

    pub fn sym(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.sym_index.get(name) {
            return s;
        }
        let s = Sym(self.sym_names.len() as u32);
        self.sym_names.push(name.to_owned());
        self.sym_index.insert(name.to_owned(), s);
        s
    }

    pub fn try_sym(&self, name: &str) -> Option<Sym> {
        self.sym_index.get(name).copied()
    }

    pub fn sym_name(&self, s: Sym) -> &str {
        &self.sym_names[s.0 as usize]
    }

    pub fn num_syms(&self) -> usize {
        self.sym_names.len()
    }

    pub fn param(&mut self, index: u32) -> PTerm {
        debug_assert!(index >= 1, "parameters are 1-based");
        self.pintern(PNode::Param(index))
    }

    pub fn papp(&mut self, name: Sym, args: &[PTerm]) -> PTerm {
        self.pintern(PNode::App(name, SmallVec::from_slice(args)))
    }

    pub fn pintern(&mut self, node: PNode) -> PTerm {
        if let Some(&t) = self.pindex.get(&node) {
            return t;
        }
        let t = PTerm(self.pnodes.len() as u32);
        self.pnodes.push(node.clone());
        self.pindex.insert(node, t);
        t
    }

    pub fn pnode(&self, t: PTerm) -> &PNode {
        &self.pnodes[t.0 as usize]
    }

    pub fn num_pterms(&self) -> usize {
        self.pnodes.len()
    }

    pub fn fvar(&mut self, index: u32) -> FTerm {
        self.fintern(FNode::Var(index))
    }

    pub fn fapp(&mut self, name: Sym, args: &[FTerm]) -> FTerm {
        self.fintern(FNode::App(name, SmallVec::from_slice(args)))
    }

    pub fn fintern(&mut self, node: FNode) -> FTerm {
        if let Some(&t) = self.findex.get(&node) {
            return t;
        }
        let t = FTerm(self.fnodes.len() as u32);
        self.fnodes.push(node.clone());
        self.findex.insert(node, t);
        t
    }

    pub fn fnode(&self, t: FTerm) -> &FNode {
        &self.fnodes[t.0 as usize]
    }

    pub fn num_fterms(&self) -> usize {
        self.fnodes.len()
    }
}

impl std::fmt::Debug for Bank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bank")
            .field("syms", &self.sym_names.len())
            .field("pterms", &self.pnodes.len())
            .field("fterms", &self.fnodes.len())
            .finish()
    }
}
