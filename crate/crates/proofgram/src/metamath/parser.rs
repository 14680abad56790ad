//! Metamath database parsing: tokenization, block scoping and frames.

use crate::error::{Error, Result};
use rustc_hash::FxHashMap;

/// Database-local math-symbol id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tok(pub u32);

/// Index into [`Database::statements`].
pub type StmtId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StmtKind {
    Float,
    Essential,
    Axiom,
    Provable,
}

#[derive(Debug, Clone)]
pub enum Proof {
    Normal(Box<[StmtId]>),
    Compressed { labels: Box<[StmtId]>, letters: Box<str> },
    Incomplete,
}

#[derive(Debug, Clone)]
pub struct Frame {
    /// Mandatory hypotheses ($f and $e) in declaration order.
    pub hyps: Box<[StmtId]>,
    /// Active disjoint-variable pairs (normalized, first < second).
    pub dvs: Box<[(Tok, Tok)]>,
}

#[derive(Debug)]
pub struct Statement {
    pub label: String,
    pub kind: StmtKind,
    pub typecode: Tok,
    /// Tokens after the typecode.
    pub expr: Box<[Tok]>,
    /// Floating hypotheses: the declared variable.
    pub var: Option<Tok>,
    /// Assertions: the mandatory frame.
    pub frame: Option<Frame>,
    pub proof: Option<Proof>,
}

#[derive(Debug, Default)]
pub struct Database {
    pub statements: Vec<Statement>,
    pub labels: FxHashMap<String, StmtId>,
    /// Assertion ids ($a and $p) in database order.
    pub assertions: Vec<StmtId>,
    tok_names: Vec<String>,
    tok_index: FxHashMap<String, Tok>,
    pub var_toks: Vec<bool>,
    pub const_toks: Vec<bool>,
}

impl Database {
    pub fn tok_name(&self, t: Tok) -> &str {
        &self.tok_names[t.0 as usize]
    }

    pub fn try_tok(&self, name: &str) -> Option<Tok> {
        self.tok_index.get(name).copied()
    }

    fn intern_tok(&mut self, name: &str) -> Tok {
        if let Some(&t) = self.tok_index.get(name) {
            return t;
        }
        let t = Tok(self.tok_names.len() as u32);
        self.tok_names.push(name.to_owned());
        self.tok_index.insert(name.to_owned(), t);
        self.var_toks.push(false);
        self.const_toks.push(false);
        t
    }

    pub fn stmt(&self, id: StmtId) -> &Statement {
        &self.statements[id as usize]
    }

    pub fn by_label(&self, label: &str) -> Option<&Statement> {
        self.labels.get(label).map(|&id| self.stmt(id))
    }

    pub fn id_by_label(&self, label: &str) -> Option<StmtId> {
        self.labels.get(label).copied()
    }

    pub fn num_by_kind(&self, kind: StmtKind) -> usize {
        self.statements.iter().filter(|s| s.kind == kind).count()
    }
}

struct Scope {
    vars: Vec<Tok>,
    hyps: Vec<StmtId>,
    dv_groups: Vec<Vec<Tok>>,
    /// Variables with an active $f in this scope, with the hypothesis id.
    floats: Vec<(Tok, StmtId)>,
}

impl Scope {
    fn new() -> Self {
        Scope { vars: Vec::new(), hyps: Vec::new(), dv_groups: Vec::new(), floats: Vec::new() }
    }
}

/// Strip `$( ... $)` comments; comments may appear between any two tokens,
/// including inside statements.
fn strip_comments(text: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut iter = text.split_ascii_whitespace();
    while let Some(t) = iter.next() {
        if t == "$(" {
            loop {
                match iter.next() {
                    None => return Err(Error::Unbalanced { what: "comment", line: 0 }),
                    Some("$)") => break,
                    Some(_) => {}
                }
            }
        } else {
            out.push(t);
        }
    }
    Ok(out)
}

/// Parse a complete `.mm` database.  Comments are skipped; `$[ ... $]`
/// inclusion is rejected as unsupported input.
pub fn mm_parse(text: &str) -> Result<Database> {
    let mut db = Database::default();
    let mut scopes: Vec<Scope> = vec![Scope::new()];
    let mut pending_label: Option<String> = None;

    let tokens = strip_comments(text)?;
    let mut toks = tokens.iter().copied();
    let mut tokno = 0usize;

    macro_rules! next_tok {
        () => {{
            tokno += 1;
            toks.next()
        }};
    }

    let active_var = |scopes: &[Scope], t: Tok| scopes.iter().any(|s| s.vars.contains(&t));
    let active_float = |scopes: &[Scope], t: Tok| -> Option<StmtId> {
        scopes
            .iter()
            .rev()
            .find_map(|s| s.floats.iter().rev().find(|&&(v, _)| v == t).map(|&(_, id)| id))
    };

    while let Some(tok) = next_tok!() {
        match tok {
            "$[" => return Err(Error::FileInclusion),
            "${" => {
                if pending_label.is_some() {
                    return Err(Error::Syntax(format!("label before ${{ near token {tokno}")));
                }
                scopes.push(Scope::new());
            }
            "$}" => {
                if scopes.len() == 1 {
                    return Err(Error::Unbalanced { what: "block", line: tokno });
                }
                scopes.pop();
            }
            "$c" => {
                if scopes.len() != 1 {
                    return Err(Error::Syntax(format!(
                        "$c only allowed in the outermost scope (token {tokno})"
                    )));
                }
                loop {
                    match next_tok!() {
                        None => return Err(Error::Unbalanced { what: "$c", line: tokno }),
                        Some("$.") => break,
                        Some(name) => {
                            let t = db.intern_tok(name);
                            if db.const_toks[t.0 as usize] || db.var_toks[t.0 as usize] {
                                return Err(Error::Syntax(format!(
                                    "symbol `{name}` redeclared as constant"
                                )));
                            }
                            db.const_toks[t.0 as usize] = true;
                        }
                    }
                }
            }
            "$v" => loop {
                match next_tok!() {
                    None => return Err(Error::Unbalanced { what: "$v", line: tokno }),
                    Some("$.") => break,
                    Some(name) => {
                        let t = db.intern_tok(name);
                        if db.const_toks[t.0 as usize] {
                            return Err(Error::Syntax(format!(
                                "constant `{name}` redeclared as variable"
                            )));
                        }
                        if active_var(&scopes, t) {
                            return Err(Error::Syntax(format!(
                                "variable `{name}` already active"
                            )));
                        }
                        db.var_toks[t.0 as usize] = true;
                        scopes.last_mut().unwrap().vars.push(t);
                    }
                }
            },
            "$d" => {
                let mut group = Vec::new();
                loop {
                    match next_tok!() {
                        None => return Err(Error::Unbalanced { what: "$d", line: tokno }),
                        Some("$.") => break,
                        Some(name) => {
                            let t = db
                                .try_tok(name)
                                .filter(|&t| active_var(&scopes, t))
                                .ok_or_else(|| Error::UndeclaredToken {
                                    token: name.to_owned(),
                                    label: "$d".to_owned(),
                                })?;
                            group.push(t);
                        }
                    }
                }
                scopes.last_mut().unwrap().dv_groups.push(group);
            }
            "$f" | "$e" | "$a" | "$p" => {
                let label = pending_label.take().ok_or_else(|| {
                    Error::Syntax(format!("`{tok}` without label near token {tokno}"))
                })?;
                if db.labels.contains_key(&label) {
                    return Err(Error::DuplicateLabel(label));
                }
                let kind = match tok {
                    "$f" => StmtKind::Float,
                    "$e" => StmtKind::Essential,
                    "$a" => StmtKind::Axiom,
                    _ => StmtKind::Provable,
                };
                let mut body: Vec<&str> = Vec::new();
                let mut proof_src: Option<Vec<&str>> = None;
                loop {
                    match next_tok!() {
                        None => return Err(Error::Unbalanced { what: "statement", line: tokno }),
                        Some("$.") => break,
                        Some("$=") => {
                            if kind != StmtKind::Provable {
                                return Err(Error::Syntax(format!(
                                    "`$=` outside $p in `{label}`"
                                )));
                            }
                            proof_src = Some(Vec::new());
                        }
                        Some(t) => match &mut proof_src {
                            Some(p) => p.push(t),
                            None => body.push(t),
                        },
                    }
                }
                if body.is_empty() {
                    return Err(Error::Syntax(format!("empty statement `{label}`")));
                }
                let tc = db
                    .try_tok(body[0])
                    .filter(|&t| db.const_toks[t.0 as usize])
                    .ok_or_else(|| Error::UndeclaredToken {
                        token: body[0].to_owned(),
                        label: label.clone(),
                    })?;
                let mut expr = Vec::with_capacity(body.len() - 1);
                for &name in &body[1..] {
                    let t = db.try_tok(name).ok_or_else(|| Error::UndeclaredToken {
                        token: name.to_owned(),
                        label: label.clone(),
                    })?;
                    let is_var = active_var(&scopes, t);
                    if !db.const_toks[t.0 as usize] && !is_var {
                        return Err(Error::UndeclaredToken {
                            token: name.to_owned(),
                            label: label.clone(),
                        });
                    }
                    if kind != StmtKind::Float && is_var && active_float(&scopes, t).is_none() {
                        return Err(Error::Syntax(format!(
                            "variable `{name}` in `{label}` has no active $f"
                        )));
                    }
                    expr.push(t);
                }
                let id = db.statements.len() as StmtId;
                let mut stmt = Statement {
                    label: label.clone(),
                    kind,
                    typecode: tc,
                    expr: expr.into_boxed_slice(),
                    var: None,
                    frame: None,
                    proof: None,
                };
                match kind {
                    StmtKind::Float => {
                        if stmt.expr.len() != 1 {
                            return Err(Error::Syntax(format!(
                                "$f `{label}` must be `typecode variable`"
                            )));
                        }
                        let v = stmt.expr[0];
                        if !active_var(&scopes, v) {
                            return Err(Error::UndeclaredToken {
                                token: db.tok_name(v).to_owned(),
                                label,
                            });
                        }
                        if active_float(&scopes, v).is_some() {
                            return Err(Error::Syntax(format!(
                                "variable `{}` has two active $f",
                                db.tok_name(v)
                            )));
                        }
                        stmt.var = Some(v);
                        let sc = scopes.last_mut().unwrap();
                        sc.hyps.push(id);
                        sc.floats.push((v, id));
                    }
                    StmtKind::Essential => {
                        scopes.last_mut().unwrap().hyps.push(id);
                    }
                    StmtKind::Axiom | StmtKind::Provable => {
                        stmt.frame = Some(build_frame(&db, &scopes, &stmt));
                        if kind == StmtKind::Provable {
                            let src = proof_src.ok_or_else(|| Error::ProofError {
                                label: label.clone(),
                                reason: "missing proof".into(),
                            })?;
                            stmt.proof = Some(parse_proof(&db, &scopes, &label, &src)?);
                        }
                        db.assertions.push(id);
                    }
                }
                db.labels.insert(label, id);
                db.statements.push(stmt);
            }
            "$)" | "$." | "$=" | "$]" => {
                return Err(Error::Syntax(format!("unexpected `{tok}` near token {tokno}")));
            }
            label => {
                if pending_label.is_some() {
                    return Err(Error::Syntax(format!(
                        "two labels in a row near token {tokno} (`{label}`)"
                    )));
                }
                if !label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
                {
                    return Err(Error::Syntax(format!("malformed label `{label}`")));
                }
                pending_label = Some(label.to_owned());
            }
        }
    }
    if scopes.len() != 1 {
        return Err(Error::Unbalanced { what: "block", line: tokno });
    }
    if pending_label.is_some() {
        return Err(Error::Syntax("dangling label at end of input".into()));
    }
    Ok(db)
}

fn build_frame(db: &Database, scopes: &[Scope], stmt: &Statement) -> Frame {
    // mandatory variables: those of the assertion plus those of every
    // in-scope $e
    let mut mand: Vec<Tok> = Vec::new();
    let add_vars = |db: &Database, expr: &[Tok], mand: &mut Vec<Tok>| {
        for &t in expr {
            if db.var_toks[t.0 as usize] && !mand.contains(&t) {
                mand.push(t);
            }
        }
    };
    add_vars(db, &stmt.expr, &mut mand);
    for sc in scopes {
        for &h in &sc.hyps {
            let hs = db.stmt(h);
            if hs.kind == StmtKind::Essential {
                add_vars(db, &hs.expr, &mut mand);
            }
        }
    }
    let mut hyps: Vec<StmtId> = Vec::new();
    for sc in scopes {
        for &h in &sc.hyps {
            let hs = db.stmt(h);
            match hs.kind {
                StmtKind::Float => {
                    if mand.contains(&hs.var.unwrap()) {
                        hyps.push(h);
                    }
                }
                StmtKind::Essential => hyps.push(h),
                _ => unreachable!(),
            }
        }
    }
    hyps.sort_unstable();
    let mut dvs: Vec<(Tok, Tok)> = Vec::new();
    for sc in scopes {
        for group in &sc.dv_groups {
            for i in 0..group.len() {
                for j in (i + 1)..group.len() {
                    let (a, b) = (group[i].min(group[j]), group[i].max(group[j]));
                    if a != b && !dvs.contains(&(a, b)) {
                        dvs.push((a, b));
                    }
                }
            }
        }
    }
    Frame { hyps: hyps.into_boxed_slice(), dvs: dvs.into_boxed_slice() }
}

fn parse_proof(db: &Database, scopes: &[Scope], label: &str, src: &[&str]) -> Result<Proof> {
    if src.is_empty() {
        return Err(Error::ProofError { label: label.to_owned(), reason: "empty proof".into() });
    }
    let resolve = |name: &str| -> Result<StmtId> {
        if let Some(&id) = db.labels.get(name) {
            let s = db.stmt(id);
            match s.kind {
                StmtKind::Axiom | StmtKind::Provable => Ok(id),
                // hypothesis labels are legal when the hypothesis is in scope
                StmtKind::Float | StmtKind::Essential => {
                    if scopes.iter().any(|sc| sc.hyps.contains(&id)) {
                        Ok(id)
                    } else {
                        Err(Error::UnresolvedReference(format!(
                            "`{name}` (hypothesis not in scope) in proof of `{label}`"
                        )))
                    }
                }
            }
        } else {
            Err(Error::UnresolvedReference(format!("`{name}` in proof of `{label}`")))
        }
    };
    if src[0] == "(" {
        let close = src.iter().position(|&t| t == ")").ok_or_else(|| {
            Error::BadCompressedProof {
                label: label.to_owned(),
                reason: "unterminated label list".into(),
            }
        })?;
        let mut labels = Vec::with_capacity(close - 1);
        for &name in &src[1..close] {
            labels.push(resolve(name)?);
        }
        let mut letters = String::new();
        for &chunk in &src[close + 1..] {
            letters.push_str(chunk);
        }
        if letters.contains('?') {
            return Ok(Proof::Incomplete);
        }
        if let Some(bad) = letters.chars().find(|c| !c.is_ascii_uppercase()) {
            return Err(Error::BadCompressedProof {
                label: label.to_owned(),
                reason: format!("invalid character `{bad}`"),
            });
        }
        Ok(Proof::Compressed {
            labels: labels.into_boxed_slice(),
            letters: letters.into_boxed_str(),
        })
    } else {
        if src.iter().any(|&t| t == "?") {
            return Ok(Proof::Incomplete);
        }
        let mut steps = Vec::with_capacity(src.len());
        for &name in src {
            steps.push(resolve(name)?);
        }
        Ok(Proof::Normal(steps.into_boxed_slice()))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Tiny propositional database: `thm1` is an ax-1 instance, `thm2`
    /// applies ax-mp (normal proof), `thm3` is `thm2` with a compressed
    /// proof using a Z-tag.
    pub(crate) const TOY: &str = "
$c |- wff ( ) -> $.
$v ph ps ch $.
wph $f wff ph $.
wps $f wff ps $.
wch $f wff ch $.
wi $a wff ( ph -> ps ) $.
ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
${
  mp.min $e |- ph $.
  mp.maj $e |- ( ph -> ps ) $.
  ax-mp $a |- ps $.
$}
thm1 $p |- ( ph -> ( ( ps -> ph ) -> ph ) ) $= wph wps wph wi ax-1 $.
thm2 $p |- ( ch -> ( ph -> ( ps -> ph ) ) ) $= wph wps wph wi wi wch wph
  wps wph wi wi wi wph wps ax-1 wph wps wph wi wi wch ax-1 ax-mp $.
thm3 $p |- ( ch -> ( ph -> ( ps -> ph ) ) ) $= ( wi ax-1 ax-mp )
  ABADDZCGDABEGCEF $.
";

    #[test]
    fn toy_database_parses() {
        let db = mm_parse(TOY).unwrap();
        assert_eq!(db.assertions.len(), 6);
        assert_eq!(db.num_by_kind(StmtKind::Axiom), 3);
        assert_eq!(db.num_by_kind(StmtKind::Provable), 3);
        let mp = db.by_label("ax-mp").unwrap();
        let frame = mp.frame.as_ref().unwrap();
        // wph wps mp.min mp.maj in declaration order
        assert_eq!(frame.hyps.len(), 4);
        let thm = db.by_label("thm2").unwrap();
        assert!(matches!(thm.proof, Some(Proof::Normal(_))));
        let thm = db.by_label("thm3").unwrap();
        assert!(matches!(thm.proof, Some(Proof::Compressed { .. })));
    }

    #[test]
    fn unbalanced_block_rejected() {
        let r = mm_parse("$c a $.\n${\n");
        assert!(matches!(r, Err(Error::Unbalanced { .. })));
    }

    #[test]
    fn duplicate_label_rejected() {
        let r = mm_parse("$c wff a $.\nx $a wff a $.\nx $a wff a $.\n");
        assert!(matches!(r, Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn undeclared_token_rejected() {
        let r = mm_parse("$c wff $.\nx $a wff oops $.\n");
        assert!(matches!(r, Err(Error::UndeclaredToken { .. })));
    }

    #[test]
    fn inclusion_unsupported() {
        let r = mm_parse("$[ other.mm $]\n");
        assert!(matches!(r, Err(Error::FileInclusion)));
    }

    #[test]
    fn incomplete_proof_flagged() {
        let db = mm_parse("$c |- a $.\nx $a |- a $.\ny $p |- a $= ? $.\n").unwrap();
        assert!(matches!(db.by_label("y").unwrap().proof, Some(Proof::Incomplete)));
    }
}
