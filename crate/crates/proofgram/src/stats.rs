//! KB statistics and KB-to-KB formula comparison.

use crate::bank::{Bank, FNode, PNode, PTerm, Sym};
use crate::cddc::{self, TheoremStatus};
use crate::compress::ValMetrics;
use crate::error::Result;
use crate::formula::{self, Clause};
use crate::grammar::Kb;
use crate::term;
use crate::unify::{self, MatchMode};
use num_bigint::BigUint;
use num_traits::Zero;
use rustc_hash::FxHashMap;

/// Distribution summary of an integer multiset.
#[derive(Debug, Clone, Default)]
pub struct Dist {
    pub n: usize,
    pub min: i128,
    pub median: i128,
    pub mean: i128,
    pub max: i128,
}

impl Dist {
    fn of(values: &mut Vec<i128>) -> Dist {
        if values.is_empty() {
            return Dist::default();
        }
        values.sort_unstable();
        let n = values.len();
        let sum: i128 = values.iter().sum();
        Dist {
            n,
            min: values[0],
            // lower median for even cardinality
            median: values[(n - 1) / 2],
            mean: round_half_even(sum, n as i128),
            max: values[n - 1],
        }
    }
}

fn round_half_even(num: i128, den: i128) -> i128 {
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    let twice = 2 * r;
    if twice > den || (twice == den && q % 2 != 0) {
        q + 1
    } else {
        q
    }
}

/// Distribution summary over big integers (median/max exact; mean rounded).
#[derive(Debug, Clone, Default)]
pub struct BigDist {
    pub n: usize,
    pub min: BigUint,
    pub median: BigUint,
    pub mean: BigUint,
    pub max: BigUint,
}

impl BigDist {
    fn of(values: &mut Vec<BigUint>) -> BigDist {
        if values.is_empty() {
            return BigDist::default();
        }
        values.sort();
        let n = values.len();
        let sum: BigUint = values.iter().sum();
        BigDist {
            n,
            min: values[0].clone(),
            median: values[(n - 1) / 2].clone(),
            mean: sum / BigUint::from(n),
            max: values[n - 1].clone(),
        }
    }
}

#[derive(Debug, Default)]
pub struct KbStats {
    pub grammar_size: u64,
    pub productions: usize,
    pub refs: Dist,
    pub ref_sum: u64,
    pub ref0_share: f64,
    pub ref1_share: f64,
    pub prod_size: Dist,
    pub val_size: BigDist,
    pub sav: Dist,
    pub sav_neg_share: f64,
    pub sav_zero_share: f64,
    pub arity: Dist,
    pub arity0_share: f64,
    pub nonlinear_share: f64,
    pub voccs: Dist,
    pub vmult: BigDist,
    pub formula_size: Dist,
    pub formula_height: Dist,
    /// `>mgt`: share of stated clauses that are strict instances of their
    /// shallow-MGT; `None` if MGT statistics were skipped.
    pub strict_mgt_share: Option<f64>,
    /// Share removable as duplicates modulo renaming and body permutation.
    pub duplicate_share: f64,
    /// Share removable when strictly subsumed members are deleted first,
    /// then duplicates.
    pub subsumed_share: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StatsOptions {
    /// Compute the `>mgt` column (runs the shallow-MGT engine).
    pub with_mgt: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions { with_mgt: true }
    }
}

pub fn kb_stats(bank: &mut Bank, kb: &Kb, opts: StatsOptions) -> Result<KbStats> {
    let g = &kb.grammar;
    let n = g.len();
    let mut stats = KbStats {
        grammar_size: g.size(bank),
        productions: n,
        ..KbStats::default()
    };
    if n == 0 {
        return Ok(stats);
    }
    // sizes, refs, arity, linearity, voccs
    let mut size_memo: FxHashMap<PTerm, u128> = FxHashMap::default();
    let mut prod_sizes: Vec<i128> = Vec::with_capacity(n);
    let mut arities: Vec<i128> = Vec::with_capacity(n);
    let mut voccs: Vec<i128> = Vec::new();
    let mut nonlinear = 0usize;
    for p in &g.prods {
        prod_sizes.push(term::term_size_memo(bank, p.rhs, &mut size_memo)? as i128);
        arities.push(p.arity as i128);
        let occ = term::param_occurrences(bank, p.rhs)?;
        let mut by_index = vec![0i128; p.arity as usize];
        for (i, c) in occ {
            if (i as usize) <= by_index.len() {
                by_index[(i - 1) as usize] = c as i128;
            }
        }
        if by_index.iter().any(|&c| c >= 2) {
            nonlinear += 1;
        }
        voccs.extend(by_index);
    }
    let refs = g.ref_counts(bank);
    stats.ref_sum = refs.iter().sum();
    stats.ref0_share = refs.iter().filter(|&&r| r == 0).count() as f64 / n as f64;
    stats.ref1_share = refs.iter().filter(|&&r| r == 1).count() as f64 / n as f64;
    let mut refs_i: Vec<i128> = refs.iter().map(|&r| r as i128).collect();
    stats.refs = Dist::of(&mut refs_i);
    stats.prod_size = Dist::of(&mut prod_sizes);
    stats.arity0_share = arities.iter().filter(|&&a| a == 0).count() as f64 / n as f64;
    stats.arity = Dist::of(&mut arities);
    stats.nonlinear_share = nonlinear as f64 / n as f64;
    stats.voccs = Dist::of(&mut voccs);

    // expansion metrics
    let metrics = ValMetrics::compute(bank, g)?;
    let mut val_sizes: Vec<BigUint> = Vec::with_capacity(n);
    for (i, p) in g.prods.iter().enumerate() {
        // |val| counts the expanded tree edges; parameters are leaves
        let _ = p;
        val_sizes.push(metrics.sizes[i].clone());
    }
    stats.val_size = BigDist::of(&mut val_sizes);
    let mut vmults: Vec<BigUint> = Vec::new();
    for m in &metrics.vmults {
        vmults.extend(m.iter().cloned());
    }
    stats.vmult = BigDist::of(&mut vmults);

    // save-values over referenced productions
    let sav = crate::compress::save_values(bank, g)?;
    let mut sav_ref: Vec<i128> = sav
        .iter()
        .zip(&refs)
        .filter(|&(_, &r)| r > 0)
        .map(|(&s, _)| s)
        .collect();
    if !sav_ref.is_empty() {
        stats.sav_neg_share =
            sav_ref.iter().filter(|&&s| s < 0).count() as f64 / sav_ref.len() as f64;
        stats.sav_zero_share =
            sav_ref.iter().filter(|&&s| s == 0).count() as f64 / sav_ref.len() as f64;
    }
    stats.sav = Dist::of(&mut sav_ref);

    // stated-clause metrics
    let mut fsizes: Vec<i128> = Vec::new();
    let mut fheights: Vec<i128> = Vec::new();
    let stated: Vec<&Clause> = kb.stated.iter().flatten().collect();
    for f in &stated {
        let (s, h) = formula::clause_metrics(bank, f);
        fsizes.push(s as i128);
        fheights.push(h as i128);
    }
    stats.formula_size = Dist::of(&mut fsizes);
    stats.formula_height = Dist::of(&mut fheights);

    // duplicate and subsumption shares over the stated clauses
    if !stated.is_empty() {
        let owned: Vec<Clause> = stated.iter().map(|c| (*c).clone()).collect();
        stats.duplicate_share = duplicate_share(bank, &owned);
        stats.subsumed_share = subsumed_share(bank, &owned);
    }

    if opts.with_mgt {
        let report = cddc::kb_verify(bank, kb)?;
        stats.strict_mgt_share = Some(report.strict_fraction());
    }
    Ok(stats)
}

/// Bucket clauses by a renaming-invariant fingerprint so only plausible
/// pairs run the full variant/subsumption checks.
fn clause_buckets(bank: &Bank, clauses: &[Clause]) -> FxHashMap<(usize, u64, u64), Vec<usize>> {
    let mut buckets: FxHashMap<(usize, u64, u64), Vec<usize>> = FxHashMap::default();
    for (i, c) in clauses.iter().enumerate() {
        let hh = formula::shape_hash(bank, c.head);
        let mut body_hashes: Vec<u64> =
            c.body.iter().map(|&b| formula::shape_hash(bank, b)).collect();
        body_hashes.sort_unstable();
        let mut bh = 0xcbf29ce484222325u64;
        for h in body_hashes {
            bh = bh.wrapping_mul(0x100000001b3) ^ h;
        }
        buckets.entry((c.body.len(), hh, bh)).or_default().push(i);
    }
    buckets
}

/// Fraction removed when duplicates (variants modulo renaming and body
/// permutation) are deleted down to one copy each.
fn duplicate_share(bank: &mut Bank, clauses: &[Clause]) -> f64 {
    let n = clauses.len();
    let buckets = clause_buckets(bank, clauses);
    let mut removed = 0usize;
    for members in buckets.values() {
        let mut reps: Vec<usize> = Vec::new();
        for &i in members {
            let dup = reps.iter().any(|&r| {
                unify::match_clause(bank, &clauses[i], &clauses[r], MatchMode::ModPermutation)
                    .variant
            });
            if dup {
                removed += 1;
            } else {
                reps.push(i);
            }
        }
    }
    removed as f64 / n as f64
}

/// Fraction removed when every member strictly subsumed by another member is
/// deleted and the rest is de-duplicated as in [`duplicate_share`].
/// Subsumption compares equal body lengths modulo body permutation.
fn subsumed_share(bank: &mut Bank, clauses: &[Clause]) -> f64 {
    let n = clauses.len();
    // head-root index: a pattern clause can match a subject only if its head
    // is a variable or has the same root functor
    let mut by_root: FxHashMap<(usize, Option<Sym>), Vec<usize>> = FxHashMap::default();
    for (i, c) in clauses.iter().enumerate() {
        let root = match bank.fnode(c.head) {
            FNode::Var(_) => None,
            FNode::App(f, _) => Some(*f),
        };
        by_root.entry((c.body.len(), root)).or_default().push(i);
    }
    let mut keep: Vec<usize> = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let root = match bank.fnode(c.head) {
            FNode::Var(_) => None,
            FNode::App(f, _) => Some(*f),
        };
        let mut candidates: Vec<usize> = Vec::new();
        if let Some(v) = by_root.get(&(c.body.len(), root)) {
            candidates.extend_from_slice(v);
        }
        if root.is_some() {
            if let Some(v) = by_root.get(&(c.body.len(), None)) {
                candidates.extend_from_slice(v);
            }
        }
        let strictly_subsumed = candidates.iter().any(|&j| {
            j != i
                && unify::match_clause(bank, c, &clauses[j], MatchMode::ModPermutation).strict
        });
        if !strictly_subsumed {
            keep.push(i);
        }
    }
    let survivors: Vec<Clause> = keep.iter().map(|&i| clauses[i].clone()).collect();
    let dup_removed = if survivors.is_empty() {
        0.0
    } else {
        duplicate_share(bank, &survivors) * survivors.len() as f64
    };
    ((n - keep.len()) as f64 + dup_removed) / n as f64
}

/// Reference set for [`compare_kb`]: canonical clauses with a bucket index.
pub struct ClauseSet {
    clauses: Vec<Clause>,
    buckets: FxHashMap<(usize, u64, u64), Vec<usize>>,
}

impl ClauseSet {
    pub fn new(bank: &mut Bank, clauses: Vec<Clause>) -> Self {
        let canon: Vec<Clause> = clauses
            .iter()
            .map(|c| formula::canonicalize_clause(bank, c).0)
            .collect();
        let buckets = clause_buckets(bank, &canon);
        ClauseSet { clauses: canon, buckets }
    }

    pub fn from_kb(bank: &mut Bank, kb: &Kb) -> Self {
        let mut clauses: Vec<Clause> = kb.base.entries.iter().map(|(_, c)| c.clone()).collect();
        clauses.extend(kb.stated.iter().flatten().cloned());
        ClauseSet::new(bank, clauses)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Does the set contain a variant of `c` (modulo body permutation)?
    pub fn contains_variant(&self, bank: &mut Bank, c: &Clause) -> bool {
        let canon = formula::canonicalize_clause(bank, c).0;
        let hh = formula::shape_hash(bank, canon.head);
        let mut body_hashes: Vec<u64> =
            canon.body.iter().map(|&b| formula::shape_hash(bank, b)).collect();
        body_hashes.sort_unstable();
        let mut bh = 0xcbf29ce484222325u64;
        for h in body_hashes {
            bh = bh.wrapping_mul(0x100000001b3) ^ h;
        }
        let Some(members) = self.buckets.get(&(canon.body.len(), hh, bh)) else {
            return false;
        };
        members.iter().any(|&j| {
            unify::match_clause(bank, &canon, &self.clauses[j], MatchMode::ModPermutation).variant
        })
    }
}

/// Share of `kb`'s non-protected clause formulas that are variants (modulo
/// renaming and body permutation) of some reference formula.  The protected
/// top-level theorems are excluded from the numerator and denominator.
pub fn compare_kb(
    bank: &mut Bank,
    kb: &Kb,
    reference: &ClauseSet,
    exclude: &[Sym],
) -> Result<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for (p, stated) in kb.grammar.prods.iter().zip(&kb.stated) {
        if exclude.contains(&p.name) {
            continue;
        }
        let Some(c) = stated else { continue };
        total += 1;
        if reference.contains_variant(bank, c) {
            hits += 1;
        }
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(hits as f64 / total as f64)
}

/// Render a big integer the way the tables do: exact when small, otherwise
/// `m.mm x10^e` with three significant digits.
pub fn fmt_big(v: &BigUint) -> String {
    let s = v.to_string();
    if s.len() <= 7 {
        return s;
    }
    let exp = s.len() - 1;
    let mantissa = if s.len() >= 3 { &s[..3] } else { &s[..] };
    let (int, frac) = mantissa.split_at(1);
    // round the mantissa using the next digit
    let mut digits: Vec<u8> = format!("{int}{frac}").bytes().map(|b| b - b'0').collect();
    if s.len() > 3 && s.as_bytes()[3] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                return format!(
                    "{}.{}{}x10^{}",
                    digits[0], digits[1], digits[2], exp + 1
                );
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    format!("{}.{}{}x10^{}", digits[0], digits[1], digits[2], exp)
}

/// CSV rows: `metric,min,median,mean,max,extra`.
pub fn stats_csv(stats: &KbStats) -> String {
    let mut out = String::from("metric,min,median,mean,max,extra\n");
    let mut row = |name: &str, d: &Dist, extra: String| {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name, d.min, d.median, d.mean, d.max, extra
        ));
    };
    row("ref", &stats.refs, format!(
        "sum={};ref0={:.4};ref1={:.4}",
        stats.ref_sum, stats.ref0_share, stats.ref1_share
    ));
    row("prod_size", &stats.prod_size, String::new());
    row("sav", &stats.sav, format!(
        "neg={:.4};zero={:.4}",
        stats.sav_neg_share, stats.sav_zero_share
    ));
    row("arity", &stats.arity, format!(
        "arity0={:.4};nl={:.4}",
        stats.arity0_share, stats.nonlinear_share
    ));
    row("voccs", &stats.voccs, String::new());
    row("formula_size", &stats.formula_size, String::new());
    row("formula_height", &stats.formula_height, String::new());
    out.push_str(&format!(
        "val_size,{},{},{},{},\n",
        fmt_big(&stats.val_size.min),
        fmt_big(&stats.val_size.median),
        fmt_big(&stats.val_size.mean),
        fmt_big(&stats.val_size.max)
    ));
    out.push_str(&format!(
        "vmult,{},{},{},{},\n",
        fmt_big(&stats.vmult.min),
        fmt_big(&stats.vmult.median),
        fmt_big(&stats.vmult.mean),
        fmt_big(&stats.vmult.max)
    ));
    out.push_str(&format!(
        "grammar,{},,,,size={};productions={}\n",
        "", stats.grammar_size, stats.productions
    ));
    if let Some(s) = stats.strict_mgt_share {
        out.push_str(&format!("strict_mgt,,,,,{:.4}\n", s));
    }
    out.push_str(&format!("duplicates,,,,,{:.4}\n", stats.duplicate_share));
    out.push_str(&format!("subsumed,,,,,{:.4}\n", stats.subsumed_share));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{Base, Grammar, Production};

    #[test]
    fn empty_kb_all_zero() {
        let mut bank = Bank::new();
        let kb = Kb::default();
        let s = kb_stats(&mut bank, &kb, StatsOptions::default()).unwrap();
        assert_eq!(s.grammar_size, 0);
        assert_eq!(s.productions, 0);
    }

    #[test]
    fn big_format() {
        assert_eq!(fmt_big(&BigUint::from(42u32)), "42");
        assert_eq!(fmt_big(&BigUint::from(1824835u32)), "1824835");
        let v = BigUint::parse_bytes(b"50605465868718313472", 10).unwrap();
        assert_eq!(fmt_big(&v), "5.06x10^19");
        let v = BigUint::parse_bytes(b"99999999999", 10).unwrap();
        assert_eq!(fmt_big(&v), "1.00x10^11");
    }

    #[test]
    fn duplicate_and_subsumption_shares() {
        let mut bank = Bank::new();
        let f = bank.sym("f");
        let x = bank.fvar(0);
        let y = bank.fvar(1);
        let fxy = bank.fapp(f, &[x, y]);
        let fyx = bank.fapp(f, &[y, x]);
        let fxx = bank.fapp(f, &[x, x]);
        // c1 = f(x,y), c2 = f(y,x) (variant of c1), c3 = f(x,x) (strictly
        // subsumed by both)
        let cs = vec![Clause::unit(fxy), Clause::unit(fyx), Clause::unit(fxx)];
        assert!((duplicate_share(&mut bank, &cs) - 1.0 / 3.0).abs() < 1e-9);
        assert!((subsumed_share(&mut bank, &cs) - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn compare_kb_self_is_total() {
        let mut bank = Bank::new();
        let base = Base::new();
        let a = bank.sym("a");
        let p = bank.sym("p");
        let ca = bank.papp(a, &[]);
        let g = Grammar::new(vec![Production { name: p, arity: 0, rhs: ca }]);
        let fa = bank.sym("fa");
        let head = bank.fapp(fa, &[]);
        let kb = Kb::new(base, g, vec![Some(Clause::unit(head))]);
        let set = ClauseSet::from_kb(&mut bank, &kb);
        let share = compare_kb(&mut bank, &kb, &set, &[]).unwrap();
        assert_eq!(share, 1.0);
    }
}
