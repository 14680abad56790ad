//! Compressed-proof decoding and stack-machine proof replay.

use crate::bank::{Bank, PTerm};
use crate::error::{Error, Result};
use rustc_hash::{FxHashMap, FxHashSet};
use std::rc::Rc;

use super::parser::{Database, Proof, StmtId, StmtKind, Tok};

/// One decoded element of a compressed proof letter stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CStep {
    /// 1-based reference: mandatory hypotheses, then the parenthesized
    /// labels, then tagged steps.
    Num(u32),
    /// `Z`: tag the previous step's result for reuse.
    Tag,
}

/// Decode the letter stream: `A`-`T` are final base-20 digits (1-20),
/// `U`-`Y` are leading base-5 digits (1-5), `Z` tags the previous step.
pub fn decode_compressed_proof(letters: &str) -> Result<Vec<CStep>> {
    let mut out = Vec::new();
    let mut acc: u64 = 0;
    for ch in letters.chars() {
        match ch {
            'A'..='T' => {
                let n = acc * 20 + (ch as u64 - 'A' as u64 + 1);
                if n > u32::MAX as u64 {
                    return Err(Error::BadCompressedProof {
                        label: String::new(),
                        reason: "step reference overflow".into(),
                    });
                }
                out.push(CStep::Num(n as u32));
                acc = 0;
            }
            'U'..='Y' => {
                acc = acc * 5 + (ch as u64 - 'U' as u64 + 1);
                if acc > u32::MAX as u64 {
                    return Err(Error::BadCompressedProof {
                        label: String::new(),
                        reason: "step reference overflow".into(),
                    });
                }
            }
            'Z' => {
                if acc != 0 {
                    return Err(Error::BadCompressedProof {
                        label: String::new(),
                        reason: "Z inside a number".into(),
                    });
                }
                out.push(CStep::Tag);
            }
            other => {
                return Err(Error::BadCompressedProof {
                    label: String::new(),
                    reason: format!("unexpected letter `{other}`"),
                })
            }
        }
    }
    if acc != 0 {
        return Err(Error::BadCompressedProof {
            label: String::new(),
            reason: "truncated number at end of proof".into(),
        });
    }
    Ok(out)
}

/// Proof-tree value carried through replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    /// Extraction disabled or syntactic step.
    Syn,
    Node(PTerm),
}

/// Configuration for building logical proof terms during replay.
pub struct TreeBuilder<'b> {
    pub bank: &'b mut Bank,
    /// Typecodes regarded as provability assertions (default `{"|-"}`).
    pub provable: FxHashSet<Tok>,
}

pub struct ReplayOutcome {
    pub typecode: Tok,
    pub expr: Rc<[Tok]>,
    /// Logical proof tree of the theorem, when a builder was supplied and
    /// the conclusion typecode is provable.
    pub tree: Option<PTerm>,
    pub dv_warnings: Vec<String>,
}

/// Replay the proof of `$p` statement `id` on a stack machine and check the
/// conclusion against the stated expression.
pub fn replay_proof(
    db: &Database,
    id: StmtId,
    mut builder: Option<&mut TreeBuilder<'_>>,
) -> Result<ReplayOutcome> {
    let stmt = db.stmt(id);
    let label = || stmt.label.clone();
    let frame = stmt
        .frame
        .as_ref()
        .ok_or_else(|| Error::ProofError { label: label(), reason: "not an assertion".into() })?;
    let proof = stmt
        .proof
        .as_ref()
        .ok_or_else(|| Error::ProofError { label: label(), reason: "no proof".into() })?;

    // parameter index of each $e hypothesis of this theorem (1-based)
    let mut eidx: FxHashMap<StmtId, u32> = FxHashMap::default();
    for &h in frame.hyps.iter() {
        if db.stmt(h).kind == StmtKind::Essential {
            let next = eidx.len() as u32 + 1;
            eidx.insert(h, next);
        }
    }

    enum Step {
        Hyp(StmtId),
        Assert(StmtId),
        Tag,
        Recall(usize),
    }
    let steps: Vec<Step> = match proof {
        Proof::Incomplete => return Err(Error::IncompleteProof(stmt.label.clone())),
        Proof::Normal(ids) => ids
            .iter()
            .map(|&sid| match db.stmt(sid).kind {
                StmtKind::Float | StmtKind::Essential => Step::Hyp(sid),
                _ => Step::Assert(sid),
            })
            .collect(),
        Proof::Compressed { labels, letters } => {
            let decoded = decode_compressed_proof(letters).map_err(|e| match e {
                Error::BadCompressedProof { reason, .. } => {
                    Error::BadCompressedProof { label: label(), reason }
                }
                other => other,
            })?;
            let m = frame.hyps.len();
            let l = labels.len();
            let mut out = Vec::with_capacity(decoded.len());
            let mut tag_count = 0usize;
            for step in decoded {
                match step {
                    CStep::Tag => {
                        tag_count += 1;
                        out.push(Step::Tag);
                    }
                    CStep::Num(n) => {
                        let n = n as usize;
                        if n == 0 {
                            return Err(Error::BadCompressedProof {
                                label: label(),
                                reason: "zero step reference".into(),
                            });
                        } else if n <= m {
                            out.push(Step::Hyp(frame.hyps[n - 1]));
                        } else if n <= m + l {
                            let sid = labels[n - m - 1];
                            match db.stmt(sid).kind {
                                StmtKind::Float | StmtKind::Essential => {
                                    out.push(Step::Hyp(sid))
                                }
                                _ => out.push(Step::Assert(sid)),
                            }
                        } else if n <= m + l + tag_count {
                            out.push(Step::Recall(n - m - l - 1));
                        } else {
                            return Err(Error::BadCompressedProof {
                                label: label(),
                                reason: format!("step reference {n} out of range"),
                            });
                        }
                    }
                }
            }
            out
        }
    };

    let mut stack: Vec<(Tok, Rc<[Tok]>, Val)> = Vec::new();
    let mut tagged: Vec<(Tok, Rc<[Tok]>, Val)> = Vec::new();
    let mut dv_warnings: Vec<String> = Vec::new();
    for step in steps {
        match step {
            Step::Tag => {
                let top = stack.last().cloned().ok_or_else(|| Error::ProofError {
                    label: label(),
                    reason: "Z with empty stack".into(),
                })?;
                tagged.push(top);
            }
            Step::Recall(k) => {
                let entry = tagged.get(k).cloned().ok_or_else(|| Error::ProofError {
                    label: label(),
                    reason: format!("tagged step {k} not yet available"),
                })?;
                stack.push(entry);
            }
            Step::Hyp(h) => {
                let hs = db.stmt(h);
                let val = match (&mut builder, hs.kind) {
                    (Some(b), StmtKind::Essential) => match eidx.get(&h) {
                        Some(&i) => Val::Node(b.bank.param(i)),
                        None => {
                            return Err(Error::ProofError {
                                label: label(),
                                reason: format!(
                                    "hypothesis `{}` outside the theorem frame",
                                    hs.label
                                ),
                            })
                        }
                    },
                    _ => Val::Syn,
                };
                stack.push((hs.typecode, hs.expr.clone().into(), val));
            }
            Step::Assert(a) => {
                let astmt = db.stmt(a);
                let aframe = astmt.frame.as_ref().unwrap();
                let n = aframe.hyps.len();
                if stack.len() < n {
                    return Err(Error::ProofError {
                        label: label(),
                        reason: format!("stack underflow at `{}`", astmt.label),
                    });
                }
                let popped: Vec<(Tok, Rc<[Tok]>, Val)> =
                    stack.drain(stack.len() - n..).collect();
                let mut subst: FxHashMap<Tok, Rc<[Tok]>> = FxHashMap::default();
                for (&h, entry) in aframe.hyps.iter().zip(&popped) {
                    let hs = db.stmt(h);
                    if hs.kind == StmtKind::Float {
                        if hs.typecode != entry.0 {
                            return Err(Error::ProofError {
                                label: label(),
                                reason: format!(
                                    "typecode mismatch for `{}` at `{}`",
                                    hs.label, astmt.label
                                ),
                            });
                        }
                        subst.insert(hs.var.unwrap(), entry.1.clone());
                    }
                }
                let mut children: Vec<Val> = Vec::new();
                for (&h, entry) in aframe.hyps.iter().zip(&popped) {
                    let hs = db.stmt(h);
                    if hs.kind == StmtKind::Essential {
                        let want = apply_subst(db, &hs.expr, &subst);
                        if hs.typecode != entry.0 || want.as_slice() != entry.1.as_ref() {
                            return Err(Error::ProofError {
                                label: label(),
                                reason: format!(
                                    "hypothesis `{}` mismatch at `{}`",
                                    hs.label, astmt.label
                                ),
                            });
                        }
                        children.push(entry.2);
                    }
                }
                check_dvs(db, stmt, astmt, &subst, &mut dv_warnings);
                let concl: Rc<[Tok]> = apply_subst(db, &astmt.expr, &subst).into();
                let val = match &mut builder {
                    Some(b) if b.provable.contains(&astmt.typecode) => {
                        let mut args = Vec::with_capacity(children.len());
                        for c in children {
                            match c {
                                Val::Node(t) => args.push(t),
                                Val::Syn => {
                                    return Err(Error::ProofError {
                                        label: label(),
                                        reason: format!(
                                            "syntactic subproof under a provable hypothesis of `{}`",
                                            astmt.label
                                        ),
                                    })
                                }
                            }
                        }
                        let sym = b.bank.sym(&astmt.label);
                        Val::Node(b.bank.papp(sym, &args))
                    }
                    _ => Val::Syn,
                };
                stack.push((astmt.typecode, concl, val));
            }
        }
    }
    if stack.len() != 1 {
        return Err(Error::ProofError {
            label: label(),
            reason: format!("stack has {} entries at end of proof", stack.len()),
        });
    }
    let (tc, expr, val) = stack.pop().unwrap();
    if tc != stmt.typecode || expr.as_ref() != stmt.expr.as_ref() {
        return Err(Error::ProofError {
            label: label(),
            reason: "conclusion differs from the stated formula".into(),
        });
    }
    Ok(ReplayOutcome {
        typecode: tc,
        expr,
        tree: match val {
            Val::Node(t) => Some(t),
            Val::Syn => None,
        },
        dv_warnings,
    })
}

fn apply_subst(db: &Database, expr: &[Tok], subst: &FxHashMap<Tok, Rc<[Tok]>>) -> Vec<Tok> {
    let mut out = Vec::with_capacity(expr.len());
    for &t in expr {
        if db.var_toks[t.0 as usize] {
            match subst.get(&t) {
                Some(s) => out.extend_from_slice(s),
                None => out.push(t),
            }
        } else {
            out.push(t);
        }
    }
    out
}

/// Disjoint-variable restrictions are recorded and checked pairwise;
/// violations are reported as warnings (the clause translation ignores $d).
fn check_dvs(
    db: &Database,
    theorem: &super::parser::Statement,
    astmt: &super::parser::Statement,
    subst: &FxHashMap<Tok, Rc<[Tok]>>,
    warnings: &mut Vec<String>,
) {
    let aframe = astmt.frame.as_ref().unwrap();
    if aframe.dvs.is_empty() {
        return;
    }
    let tframe = theorem.frame.as_ref().unwrap();
    let vars_of = |e: &Rc<[Tok]>| -> Vec<Tok> {
        let mut v: Vec<Tok> = e
            .iter()
            .copied()
            .filter(|t| db.var_toks[t.0 as usize])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for &(x, y) in aframe.dvs.iter() {
        let (Some(sx), Some(sy)) = (subst.get(&x), subst.get(&y)) else { continue };
        for a in vars_of(sx) {
            for &b in vars_of(sy).iter() {
                if a == b {
                    warnings.push(format!(
                        "in `{}`: step `{}` requires disjoint {} {} but both map to `{}`",
                        theorem.label,
                        astmt.label,
                        db.tok_name(x),
                        db.tok_name(y),
                        db.tok_name(a)
                    ));
                    continue;
                }
                let key = (a.min(b), a.max(b));
                if !tframe.dvs.contains(&key) {
                    warnings.push(format!(
                        "in `{}`: step `{}` needs $d {} {} inherited from $d {} {}",
                        theorem.label,
                        astmt.label,
                        db.tok_name(a),
                        db.tok_name(b),
                        db.tok_name(x),
                        db.tok_name(y)
                    ));
                }
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub proofs_checked: usize,
    pub errors: Vec<(String, String)>,
    pub incomplete: Vec<String>,
    pub dv_warning_count: usize,
    pub dv_warning_samples: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Replay every `$p` proof.  Incomplete proofs are flagged, not failed;
/// $d violations are collected as warnings.
pub fn verify_database(db: &Database) -> VerifyReport {
    let mut report = VerifyReport::default();
    for &id in &db.assertions {
        let stmt = db.stmt(id);
        if stmt.kind != StmtKind::Provable {
            continue;
        }
        if matches!(stmt.proof, Some(Proof::Incomplete)) {
            report.incomplete.push(stmt.label.clone());
            continue;
        }
        match replay_proof(db, id, None) {
            Ok(out) => {
                report.proofs_checked += 1;
                report.dv_warning_count += out.dv_warnings.len();
                if report.dv_warning_samples.len() < 10 {
                    report
                        .dv_warning_samples
                        .extend(out.dv_warnings.into_iter().take(10));
                }
            }
            Err(e) => report.errors.push((stmt.label.clone(), e.to_string())),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamath::parser::{mm_parse, tests::TOY};

    #[test]
    fn decode_examples() {
        use CStep::*;
        assert_eq!(decode_compressed_proof("A").unwrap(), vec![Num(1)]);
        assert_eq!(decode_compressed_proof("T").unwrap(), vec![Num(20)]);
        assert_eq!(decode_compressed_proof("UA").unwrap(), vec![Num(21)]);
        assert_eq!(decode_compressed_proof("UUA").unwrap(), vec![Num(121)]);
        assert_eq!(decode_compressed_proof("UT").unwrap(), vec![Num(40)]);
        assert_eq!(decode_compressed_proof("VA").unwrap(), vec![Num(41)]);
        assert_eq!(
            decode_compressed_proof("BZC").unwrap(),
            vec![Num(2), Tag, Num(3)]
        );
        assert!(decode_compressed_proof("a").is_err());
        assert!(decode_compressed_proof("U").is_err());
    }

    #[test]
    fn toy_proofs_replay() {
        let db = mm_parse(TOY).unwrap();
        let id = db.id_by_label("thm1").unwrap();
        let out = replay_proof(&db, id, None).unwrap();
        assert_eq!(out.expr.as_ref(), db.by_label("thm1").unwrap().expr.as_ref());
        let report = verify_database(&db);
        assert!(report.ok(), "{:?}", report.errors);
        assert_eq!(report.proofs_checked, 3);
    }

    #[test]
    fn compressed_and_normal_agree() {
        let db = mm_parse(TOY).unwrap();
        let normal = replay_proof(&db, db.id_by_label("thm2").unwrap(), None).unwrap();
        let compressed = replay_proof(&db, db.id_by_label("thm3").unwrap(), None).unwrap();
        assert_eq!(normal.expr.as_ref(), compressed.expr.as_ref());
        // the logical trees coincide as well
        let mut bank = Bank::new();
        let provable: FxHashSet<Tok> = [db.try_tok("|-").unwrap()].into_iter().collect();
        let mut b = TreeBuilder { bank: &mut bank, provable };
        let t2 = replay_proof(&db, db.id_by_label("thm2").unwrap(), Some(&mut b))
            .unwrap()
            .tree
            .unwrap();
        let t3 = replay_proof(&db, db.id_by_label("thm3").unwrap(), Some(&mut b))
            .unwrap()
            .tree
            .unwrap();
        assert_eq!(t2, t3);
    }

    #[test]
    fn wrong_step_rejected() {
        // proof uses ax-1 where the stated conclusion differs
        let bad = "
$c |- wff ( ) -> $.
$v ph ps $.
wph $f wff ph $.
wps $f wff ps $.
wi $a wff ( ph -> ps ) $.
ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
thm $p |- ( ph -> ( ph -> ph ) ) $= wph wps ax-1 $.
";
        let db = mm_parse(bad).unwrap();
        let report = verify_database(&db);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].1.contains("conclusion"));
    }

    #[test]
    fn syntax_steps_fold_away_in_trees() {
        let db = mm_parse(TOY).unwrap();
        let mut bank = Bank::new();
        let provable: FxHashSet<Tok> = [db.try_tok("|-").unwrap()].into_iter().collect();
        // thm1 is a bare ax-1 instance: its logical tree is a leaf
        let mut builder = TreeBuilder { bank: &mut bank, provable: provable.clone() };
        let out = replay_proof(&db, db.id_by_label("thm1").unwrap(), Some(&mut builder)).unwrap();
        let ax1 = bank.try_sym("ax-1").unwrap();
        let leaf = bank.papp(ax1, &[]);
        assert_eq!(out.tree, Some(leaf));
        // thm2 = ax-mp(ax-1, ax-1): children are the $e subproofs in frame
        // order, all syntax steps folded away
        let mut builder = TreeBuilder { bank: &mut bank, provable };
        let out = replay_proof(&db, db.id_by_label("thm2").unwrap(), Some(&mut builder)).unwrap();
        let axmp = bank.try_sym("ax-mp").unwrap();
        let expect = bank.papp(axmp, &[leaf, leaf]);
        assert_eq!(out.tree, Some(expect));
    }
}
