//! KB extraction: a Metamath database viewed as a proof grammar.
//!
//! Every provable-typecode `$p` becomes a production: the nonterminal is the
//! label, the arity is the number of its `$e` hypotheses, and the RHS is the
//! logical proof tree (provable-typecode steps only, with the theorem's own
//! `$e` hypotheses as parameters).  The stated theorem clause is the parsed
//! `$p` formula over the parsed `$e` formulas; provable `$a` statements form
//! the presupposition base.

use crate::bank::Bank;
use crate::error::{Error, Result};
use crate::formula::{self, Clause};
use crate::grammar::{Base, Grammar, Kb, Production};
use rustc_hash::{FxHashMap, FxHashSet};

use super::parser::{Database, Proof, StmtId, StmtKind, Tok};
use super::proof::{replay_proof, TreeBuilder};
use super::syntax::{frame_var_env, unparse, FormulaParser, SyntaxGrammar};

#[derive(Debug, Clone)]
pub struct ExtractCfg {
    /// Typecodes regarded as provability statements.
    pub provable_typecodes: Vec<String>,
    /// Syntactic category a provability statement's body parses under.
    pub goal_typecode: String,
    /// Last label to include ("SETCORE" style cut); everything after is
    /// ignored entirely.
    pub end_label: Option<String>,
    /// Restrict to the dependency closure of these theorem labels.
    pub roots: Option<Vec<String>>,
    /// Check that unparsing each parsed formula reproduces its tokens.
    pub check_roundtrip: bool,
}

impl Default for ExtractCfg {
    fn default() -> Self {
        ExtractCfg {
            provable_typecodes: vec!["|-".to_owned()],
            goal_typecode: "wff".to_owned(),
            end_label: None,
            roots: None,
            check_roundtrip: true,
        }
    }
}

#[derive(Debug, Default)]
pub struct ExtractReport {
    /// Theorems carrying $d restrictions (recorded, not interpreted).
    pub dv_theorems: usize,
    /// Formulas checked by the parse/unparse round trip.
    pub roundtrips: usize,
    /// Provable `$p` statements excluded for having a syntactic typecode
    /// is not applicable here; syntactic `$p` in range are listed instead.
    pub syntactic_theorems: Vec<String>,
}

pub struct ExtractOutcome {
    pub kb: Kb,
    pub report: ExtractReport,
}

/// Extract a KB from a parsed database.
pub fn extract_kb(db: &Database, bank: &mut Bank, cfg: &ExtractCfg) -> Result<ExtractOutcome> {
    let provable: FxHashSet<Tok> = cfg
        .provable_typecodes
        .iter()
        .filter_map(|s| db.try_tok(s))
        .collect();
    if provable.is_empty() {
        return Err(Error::Syntax(format!(
            "no provability typecode among {:?} exists in the database",
            cfg.provable_typecodes
        )));
    }
    let end_id: StmtId = match &cfg.end_label {
        Some(l) => db
            .id_by_label(l)
            .ok_or_else(|| Error::UnresolvedReference(l.clone()))?
            + 1,
        None => db.statements.len() as StmtId,
    };
    let goal = db
        .try_tok(&cfg.goal_typecode)
        .ok_or_else(|| Error::UnresolvedReference(cfg.goal_typecode.clone()))?;

    // production set: provable $p in range, optionally closure-restricted
    let mut report = ExtractReport::default();
    let in_range_provable: Vec<StmtId> = db
        .assertions
        .iter()
        .copied()
        .filter(|&id| id < end_id)
        .filter(|&id| {
            let s = db.stmt(id);
            if s.kind == StmtKind::Provable && !provable.contains(&s.typecode) {
                report.syntactic_theorems.push(s.label.clone());
            }
            s.kind == StmtKind::Provable && provable.contains(&s.typecode)
        })
        .collect();
    let selected: Vec<StmtId> = match &cfg.roots {
        None => in_range_provable,
        Some(roots) => {
            let mut keep: FxHashSet<StmtId> = FxHashSet::default();
            let mut work: Vec<StmtId> = Vec::new();
            for label in roots {
                let id = db
                    .id_by_label(label)
                    .ok_or_else(|| Error::UnresolvedReference(label.clone()))?;
                if id >= end_id {
                    return Err(Error::UnresolvedReference(format!(
                        "root `{label}` lies beyond the configured end label"
                    )));
                }
                work.push(id);
            }
            while let Some(id) = work.pop() {
                if !keep.insert(id) {
                    continue;
                }
                let s = db.stmt(id);
                let refs: Vec<StmtId> = match &s.proof {
                    Some(Proof::Normal(steps)) => steps.to_vec(),
                    Some(Proof::Compressed { labels, .. }) => labels.to_vec(),
                    Some(Proof::Incomplete) => {
                        return Err(Error::IncompleteProof(s.label.clone()))
                    }
                    None => Vec::new(),
                };
                for r in refs {
                    let rs = db.stmt(r);
                    if matches!(rs.kind, StmtKind::Axiom | StmtKind::Provable)
                        && !keep.contains(&r)
                    {
                        work.push(r);
                    }
                }
            }
            in_range_provable
                .into_iter()
                .filter(|id| keep.contains(id))
                .collect()
        }
    };
    let selected_set: FxHashSet<StmtId> = selected.iter().copied().collect();

    // base: provable $a statements; with a closure, only the referenced ones
    let referenced_axioms: Option<FxHashSet<StmtId>> = cfg.roots.as_ref().map(|_| {
        let mut used: FxHashSet<StmtId> = FxHashSet::default();
        for &id in &selected {
            let s = db.stmt(id);
            let refs: Vec<StmtId> = match &s.proof {
                Some(Proof::Normal(steps)) => steps.to_vec(),
                Some(Proof::Compressed { labels, .. }) => labels.to_vec(),
                _ => Vec::new(),
            };
            for r in refs {
                if db.stmt(r).kind == StmtKind::Axiom {
                    used.insert(r);
                }
            }
        }
        used
    });

    let syntax = SyntaxGrammar::build(db, &provable, Some(end_id))?;
    let parser = FormulaParser { db, grammar: &syntax };

    let parse_clause = |bank: &mut Bank, id: StmtId, report: &mut ExtractReport| -> Result<Clause> {
        let s = db.stmt(id);
        let frame = s.frame.as_ref().unwrap();
        let env = frame_var_env(db, frame);
        let var_tokens: FxHashMap<u32, Tok> =
            env.iter().map(|(&tok, &(_, vid))| (vid, tok)).collect();
        let mut parse_checked =
            |bank: &mut Bank, expr: &[Tok], label: &str, report: &mut ExtractReport| {
                let t = parser.parse(bank, &env, expr, goal, label)?;
                if cfg.check_roundtrip {
                    let mut toks = Vec::new();
                    unparse(bank, db, &syntax, t, &var_tokens, &mut toks)?;
                    if toks.as_slice() != expr {
                        return Err(Error::Internal(format!(
                            "parse/unparse round trip failed for `{label}`"
                        )));
                    }
                    report.roundtrips += 1;
                }
                Ok(t)
            };
        let head = parse_checked(bank, &s.expr, &s.label, report)?;
        let mut body = Vec::new();
        for &h in frame.hyps.iter() {
            let hs = db.stmt(h);
            if hs.kind == StmtKind::Essential {
                body.push(parse_checked(bank, &hs.expr, &hs.label, report)?);
            }
        }
        Ok(formula::canonicalize_clause(bank, &Clause { head, body }).0)
    };

    let mut base = Base::new();
    for &id in db.assertions.iter().filter(|&&id| id < end_id) {
        let s = db.stmt(id);
        if s.kind != StmtKind::Axiom || !provable.contains(&s.typecode) {
            continue;
        }
        if let Some(used) = &referenced_axioms {
            if !used.contains(&id) {
                continue;
            }
        }
        let clause = parse_clause(bank, id, &mut report)?;
        let sym = bank.sym(&s.label);
        if !base.insert(sym, clause) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
    }

    let mut prods = Vec::with_capacity(selected_set.len());
    let mut stated = Vec::with_capacity(selected_set.len());
    for &id in &selected {
        let s = db.stmt(id);
        let frame = s.frame.as_ref().unwrap();
        if !frame.dvs.is_empty() {
            report.dv_theorems += 1;
        }
        let arity = frame
            .hyps
            .iter()
            .filter(|&&h| db.stmt(h).kind == StmtKind::Essential)
            .count() as u32;
        let mut builder = TreeBuilder { bank, provable: provable.clone() };
        let outcome = replay_proof(db, id, Some(&mut builder))?;
        let rhs = outcome.tree.ok_or_else(|| {
            Error::Internal(format!("no logical tree for provable `{}`", s.label))
        })?;
        let clause = parse_clause(bank, id, &mut report)?;
        let sym = bank.sym(&s.label);
        prods.push(Production { name: sym, arity, rhs });
        stated.push(Some(clause));
    }
    Ok(ExtractOutcome {
        kb: Kb::new(base, Grammar::new(prods), stated),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cddc;
    use crate::metamath::parser::{mm_parse, tests::TOY};

    #[test]
    fn toy_extraction() {
        let db = mm_parse(TOY).unwrap();
        let mut bank = Bank::new();
        let out = extract_kb(&db, &mut bank, &ExtractCfg::default()).unwrap();
        let kb = &out.kb;
        assert_eq!(kb.grammar.len(), 3);
        assert_eq!(kb.base.len(), 2, "ax-1 and ax-mp are the provable axioms");
        // thm1 is a bare ax-1 leaf: production size 0
        assert_eq!(kb.grammar.size(&bank), 0 + 2 + 2);
        // every stated clause is an instance of its shallow-MGT
        let report = cddc::kb_verify(&mut bank, kb).unwrap();
        assert_eq!(report.violations(), 0);
        // thm1's clause is a strict instance (the proof proves the more
        // general K with fresh variables)
        assert_eq!(report.statuses[0], cddc::TheoremStatus::StrictInstance);
        // ax-1 head, ax-mp head + 2 bodies, one head per theorem
        assert_eq!(out.report.roundtrips, 1 + 3 + 3);
    }

    #[test]
    fn closure_restriction() {
        let db = mm_parse(TOY).unwrap();
        let mut bank = Bank::new();
        let cfg = ExtractCfg { roots: Some(vec!["thm1".into()]), ..ExtractCfg::default() };
        let out = extract_kb(&db, &mut bank, &cfg).unwrap();
        assert_eq!(out.kb.grammar.len(), 1);
        assert_eq!(out.kb.base.len(), 1, "only ax-1 is referenced");
    }

    #[test]
    fn end_label_cut() {
        let db = mm_parse(TOY).unwrap();
        let mut bank = Bank::new();
        let cfg = ExtractCfg { end_label: Some("thm2".into()), ..ExtractCfg::default() };
        let out = extract_kb(&db, &mut bank, &cfg).unwrap();
        assert_eq!(out.kb.grammar.len(), 2, "thm3 lies beyond the cut");
    }
}
