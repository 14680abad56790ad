//! Grammar compression and reduction.

mod dag;
mod nonlinear;
mod prune;
mod reduce;
mod repair;
mod sav;
mod valmet;

pub use dag::min_dag;
pub use nonlinear::{nonlinear_compress, GuardMode};
pub use prune::prune;
pub use reduce::{mgt_reduce, same_value_reduce};
pub use repair::{repair_forest, treerepair, RepairOutcome};
pub use sav::{save_value_unfold, save_values};
pub use valmet::{production_digests, DigestEngine, ValDigest, ValMetrics};

mod recompress;
pub use recompress::recompress;

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::term;
use num_bigint::BigUint;
use rustc_hash::{FxHashMap, FxHashSet};

/// How digram occurrences are counted during replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// Tree-view counts: each distinct context weighted by its multiplicity
    /// in the represented tree.
    Tree,
    /// The main term is kept as a DAG whose sharing is frozen as arity-0
    /// productions (the minimal DAG) before the digram loop, so occurrence
    /// counts are per distinct context.  Pruning decides afterwards which
    /// shared subtrees are worth a production.
    #[default]
    Dag,
}

/// Compression options shared across the pipeline stages.
#[derive(Debug, Clone)]
pub struct CompressCfg {
    /// A digram must occur at least this often to be replaced.
    pub min_occurrences: u128,
    /// Cap on the arity of fresh nonterminals; unbounded by default.
    pub max_arity: Option<u32>,
    /// Guard for nonlinear compression steps.
    pub guard: GuardMode,
    /// Expansions up to this many edges are materialized for exact checks.
    pub edge_budget: u128,
    pub count_mode: CountMode,
    /// Replace only the most frequent digram per round (false) or all
    /// digrams above the threshold in one pass (true).
    pub batch: bool,
}

impl Default for CompressCfg {
    fn default() -> Self {
        CompressCfg {
            min_occurrences: 2,
            max_arity: None,
            guard: GuardMode::MgtDefined,
            edge_budget: 100_000,
            count_mode: CountMode::default(),
            batch: false,
        }
    }
}

/// Fresh-name allocator: `<prefix>1`, `<prefix>2`, ... skipping names that
/// already exist in the bank (collision with database labels is possible and
/// must be avoided).
#[derive(Debug, Clone)]
pub struct NameAlloc {
    prefix: String,
    next: u32,
}

impl NameAlloc {
    pub fn new(prefix: &str) -> Self {
        NameAlloc { prefix: prefix.to_owned(), next: 1 }
    }

    pub fn fresh(&mut self, bank: &mut Bank) -> Sym {
        loop {
            let name = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if bank.try_sym(&name).is_none() {
                return bank.sym(&name);
            }
        }
    }
}

/// Fully expand production `index`; `None` if the expansion exceeds
/// `edge_budget` edges.
pub fn expand_within(
    bank: &mut Bank,
    grammar: &Grammar,
    index: usize,
    edge_budget: u128,
) -> Result<Option<PTerm>> {
    let metrics = ValMetrics::compute(bank, grammar)?;
    expand_with_metrics(bank, grammar, &metrics, index, edge_budget)
}

pub fn expand_with_metrics(
    bank: &mut Bank,
    grammar: &Grammar,
    metrics: &ValMetrics,
    index: usize,
    edge_budget: u128,
) -> Result<Option<PTerm>> {
    if metrics.sizes[index] > BigUint::from(edge_budget) {
        return Ok(None);
    }
    let mut cache: FxHashMap<usize, PTerm> = FxHashMap::default();
    Ok(Some(expand_prod(bank, grammar, index, &mut cache)?))
}

fn expand_prod(
    bank: &mut Bank,
    grammar: &Grammar,
    index: usize,
    cache: &mut FxHashMap<usize, PTerm>,
) -> Result<PTerm> {
    // productions in order: expand each RHS over the already-expanded ones
    for i in 0..=index {
        if cache.contains_key(&i) {
            continue;
        }
        let rhs = grammar.prods[i].rhs;
        let expanded = expand_term_cached(bank, grammar, rhs, cache)?;
        cache.insert(i, expanded);
    }
    Ok(cache[&index])
}

fn expand_term_cached(
    bank: &mut Bank,
    grammar: &Grammar,
    t: PTerm,
    cache: &FxHashMap<usize, PTerm>,
) -> Result<PTerm> {
    let order = term::postorder(bank, &[t]);
    let mut map: FxHashMap<PTerm, PTerm> = FxHashMap::default();
    for n in order {
        let img = match bank.pnode(n).clone() {
            PNode::Param(_) => n,
            PNode::App(f, args) => {
                let new: Vec<PTerm> = args.iter().map(|c| map[c]).collect();
                match grammar.position(f) {
                    Some(j) => {
                        let body = cache.get(&j).copied().ok_or_else(|| {
                            Error::Internal(format!(
                                "expansion of `{}` requested before definition",
                                bank.sym_name(f)
                            ))
                        })?;
                        term::substitute_params(bank, body, &new)?
                    }
                    None => {
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
    Ok(map[&t])
}

/// Expand an arbitrary term over the grammar (used for start terms that are
/// not productions themselves).
pub fn expand_term(bank: &mut Bank, grammar: &Grammar, t: PTerm) -> Result<PTerm> {
    let mut cache: FxHashMap<usize, PTerm> = FxHashMap::default();
    for i in 0..grammar.len() {
        let rhs = grammar.prods[i].rhs;
        let expanded = expand_term_cached(bank, grammar, rhs, &cache)?;
        cache.insert(i, expanded);
    }
    expand_term_cached(bank, grammar, t, &cache)
}

/// Productions reachable from `roots` (by name), preserving order.
pub fn reachable(bank: &Bank, grammar: &Grammar, roots: &[Sym]) -> FxHashSet<Sym> {
    let mut keep: FxHashSet<Sym> = FxHashSet::default();
    let mut work: Vec<Sym> = roots.to_vec();
    while let Some(s) = work.pop() {
        if !keep.insert(s) {
            continue;
        }
        if let Some(p) = grammar.production(s) {
            for n in term::postorder(bank, &[p.rhs]) {
                if let PNode::App(f, _) = bank.pnode(n) {
                    if grammar.is_nonterminal(*f) && !keep.contains(f) {
                        work.push(*f);
                    }
                }
            }
        }
    }
    keep
}
