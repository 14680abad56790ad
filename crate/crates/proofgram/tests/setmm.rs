//! Integration tests against a real set.mm database.
//!
//! These run only when the database is available: set `SET_MM` to its path
//! or place it at `data/set.mm` in the workspace root.  Each test prints a
//! skip notice otherwise.

use proofgram::metamath::{self, ExtractCfg};
use proofgram::{cddc, Bank};

mod util;
use util::{load_set_mm, THEOREM_SAMPLER_17};

#[test]
fn parses_and_counts_match_the_corpus() {
    let Some(db) = load_set_mm() else { return };
    assert_eq!(db.assertions.len(), 46_774);
    assert_eq!(db.num_by_kind(metamath::StmtKind::Axiom), 2_854);
    assert_eq!(db.num_by_kind(metamath::StmtKind::Provable), 43_920);
}

#[test]
fn miniset_extraction_is_exact() {
    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let out = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction");
    let kb = out.kb;
    assert_eq!(kb.grammar.len(), 690);
    assert_eq!(kb.grammar.size(&bank), 2_302);
    let refs = kb.grammar.ref_counts(&bank);
    assert_eq!(refs.iter().sum::<u64>(), 2_114);
    // every stated clause is an instance of its shallow-MGT
    let report = cddc::kb_verify(&mut bank, &kb).expect("kb_verify");
    assert_eq!(report.violations(), 0);
    println!(
        "MINISET: N={} |G|={} sum_ref={} strict={:.2}%",
        kb.grammar.len(),
        kb.grammar.size(&bank),
        refs.iter().sum::<u64>(),
        report.strict_fraction() * 100.0
    );
}

#[test]
#[ignore = "heavy; run explicitly"]
fn setcore_scale() {
    let Some(db) = load_set_mm() else { return };
    let t0 = std::time::Instant::now();
    let mut bank = Bank::new();
    let cfg = ExtractCfg { end_label: Some("friendship".into()), ..ExtractCfg::default() };
    let out = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction");
    let kb = out.kb;
    println!("extracted in {:?}", t0.elapsed());
    assert_eq!(kb.grammar.len(), 27_233);
    assert_eq!(kb.grammar.size(&bank), 1_824_835);
    let refs = kb.grammar.ref_counts(&bank);
    assert_eq!(refs.iter().sum::<u64>(), 1_444_375);
    println!("structure OK in {:?}; bank: {:?}", t0.elapsed(), bank);
    let report = cddc::kb_verify(&mut bank, &kb).expect("kb_verify");
    println!(
        "kb_verify in {:?}: violations={} strict={:.4}",
        t0.elapsed(),
        report.violations(),
        report.strict_fraction()
    );
    assert_eq!(report.violations(), 0);
    let s = report.strict_fraction() * 100.0;
    assert!((s - 8.38).abs() <= 0.3, "strict share {s:.2}% vs 8.38%");
}

#[test]
#[ignore = "heavy; run explicitly"]
fn miniset_expansion_and_pipeline() {
    use num_bigint::BigUint;
    use proofgram::compress::{self, CompressCfg, NameAlloc};
    use proofgram::Sym;
    use rustc_hash::FxHashSet;

    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let kb = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction").kb;
    let t0 = std::time::Instant::now();
    // val metrics without expansion
    let metrics = compress::ValMetrics::compute(&bank, &kb.grammar).unwrap();
    let max = metrics.sizes.iter().max().unwrap();
    let sum: BigUint = kb
        .grammar
        .prods
        .iter()
        .enumerate()
        .filter(|(_, p)| THEOREM_SAMPLER_17.contains(&bank.sym_name(p.name)))
        .map(|(i, _)| metrics.sizes[i].clone())
        .sum();
    println!("val metrics in {:?}: max={} sum={}", t0.elapsed(), max, sum);
    assert_eq!(proofgram::stats::fmt_big(max), "5.06x10^22");
    assert_eq!(proofgram::stats::fmt_big(&sum), "5.06x10^22");

    // materialize the 17 expansions (hash-consed, so this is cheap)
    let t0 = std::time::Instant::now();
    let mut roots: Vec<(Sym, proofgram::PTerm)> = Vec::new();
    for name in THEOREM_SAMPLER_17 {
        let sym = bank.try_sym(name).unwrap();
        let pos = kb.grammar.position(sym).unwrap();
        let rhs = kb.grammar.prods[pos].rhs;
        let val = compress::expand_term(&mut bank, &kb.grammar, rhs).unwrap();
        roots.push((sym, val));
    }
    println!("expanded in {:?}; bank: {:?}", t0.elapsed(), bank);

    // MINIDAG
    let t0 = std::time::Instant::now();
    let mut names = NameAlloc::new("dag");
    let dag = compress::min_dag(&mut bank, &roots, &mut names).unwrap();
    println!("min_dag in {:?}: N={} |G|={}", t0.elapsed(), dag.len(), dag.size(&bank));
    assert_eq!(dag.len(), 927);
    assert_eq!(dag.size(&bank), 21_472);

    // TreeRePair replacement
    let t0 = std::time::Instant::now();
    let mut names = NameAlloc::new("lemma");
    let ccfg = CompressCfg::default();
    let mut trp =
        compress::treerepair(&mut bank, &roots, &mut names, &ccfg, false).unwrap();
    println!(
        "replacement in {:?}: N={} |G|={}",
        t0.elapsed(),
        trp.grammar.len(),
        trp.grammar.size(&bank)
    );
    // pruning
    let t0 = std::time::Instant::now();
    let protected: FxHashSet<Sym> = roots.iter().map(|&(s, _)| s).collect();
    compress::prune(&mut bank, &mut trp, &protected).unwrap();
    println!(
        "pruned in {:?}: N={} |G|={}",
        t0.elapsed(),
        trp.grammar.len(),
        trp.grammar.size(&bank)
    );
}

#[test]
#[ignore = "heavy; run explicitly"]
fn miniset_full_pipeline() {
    use proofgram::compress::{self, CompressCfg, GuardMode, NameAlloc};
    use proofgram::Sym;
    use rustc_hash::FxHashSet;

    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let kb = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction").kb;
    let mut roots: Vec<(Sym, proofgram::PTerm)> = Vec::new();
    for name in THEOREM_SAMPLER_17 {
        let sym = bank.try_sym(name).unwrap();
        let pos = kb.grammar.position(sym).unwrap();
        let rhs = kb.grammar.prods[pos].rhs;
        let val = compress::expand_term(&mut bank, &kb.grammar, rhs).unwrap();
        roots.push((sym, val));
    }
    let mut names = NameAlloc::new("lemma");
    let ccfg = CompressCfg::default();
    let mut work = compress::treerepair(&mut bank, &roots, &mut names, &ccfg, false).unwrap();
    // attach the base and the protected stated clauses for guards and MGTs
    work.base = kb.base.clone();
    for (i, p) in work.grammar.prods.iter().enumerate() {
        if let Some(pos) = kb.grammar.position(p.name) {
            work.stated[i] = kb.stated[pos].clone();
        }
    }
    let protected: FxHashSet<Sym> = roots.iter().map(|&(s, _)| s).collect();
    let t = std::time::Instant::now();
    compress::prune(&mut bank, &mut work, &protected).unwrap();
    println!("prune     -> {:5}/{:4} in {:?}", work.grammar.size(&bank), work.grammar.len(), t.elapsed());
    let t = std::time::Instant::now();
    compress::nonlinear_compress(&mut bank, &mut work, &protected, GuardMode::MgtSubsumes, &mut names).unwrap();
    println!("nonlinear -> {:5}/{:4} in {:?}", work.grammar.size(&bank), work.grammar.len(), t.elapsed());
    let t = std::time::Instant::now();
    compress::same_value_reduce(&mut bank, &mut work, &protected, ccfg.edge_budget).unwrap();
    println!("samevalue -> {:5}/{:4} in {:?}", work.grammar.size(&bank), work.grammar.len(), t.elapsed());
    let t = std::time::Instant::now();
    compress::mgt_reduce(&mut bank, &mut work, &protected).unwrap();
    println!("mgtreduce -> {:5}/{:4} in {:?}", work.grammar.size(&bank), work.grammar.len(), t.elapsed());
    let report = proofgram::cddc::kb_verify(&mut bank, &work).expect("verify final");
    let viol: usize = work
        .grammar
        .prods
        .iter()
        .zip(&report.statuses)
        .filter(|(p, s)| {
            protected.contains(&p.name)
                && matches!(
                    s,
                    proofgram::cddc::TheoremStatus::Violation
                        | proofgram::cddc::TheoremStatus::Undefined
                )
        })
        .count();
    println!("final verify: protected violations = {viol}");
    assert_eq!(viol, 0);
}

#[test]
#[ignore = "heavy; run explicitly"]
fn pipeline_arity_cap_sweep() {
    use proofgram::compress::{self, CompressCfg, GuardMode, NameAlloc};
    use proofgram::Sym;
    use rustc_hash::FxHashSet;

    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let kb = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction").kb;
    let mut roots: Vec<(Sym, proofgram::PTerm)> = Vec::new();
    for name in THEOREM_SAMPLER_17 {
        let sym = bank.try_sym(name).unwrap();
        let pos = kb.grammar.position(sym).unwrap();
        let rhs = kb.grammar.prods[pos].rhs;
        let val = compress::expand_term(&mut bank, &kb.grammar, rhs).unwrap();
        roots.push((sym, val));
    }
    let protected: FxHashSet<Sym> = roots.iter().map(|&(s, _)| s).collect();
    for (cap, batch, mode) in [
        (Some(4), false, compress::CountMode::Dag),
        (None, false, compress::CountMode::Dag),
        (Some(7), false, compress::CountMode::Dag),
        (Some(4), false, compress::CountMode::Tree),
    ] {
        let mut names = NameAlloc::new(&format!(
            "l{}{}{:?}x",
            cap.map(|c| c.to_string()).unwrap_or_default(),
            if batch { "b" } else { "s" },
            mode
        ));
        let ccfg = CompressCfg { max_arity: cap, batch, count_mode: mode, ..CompressCfg::default() };
        let mut work = compress::treerepair(&mut bank, &roots, &mut names, &ccfg, false).unwrap();
        work.base = kb.base.clone();
        for (i, p) in work.grammar.prods.iter().enumerate() {
            if let Some(pos) = kb.grammar.position(p.name) {
                work.stated[i] = kb.stated[pos].clone();
            }
        }
        let r0 = (work.grammar.size(&bank), work.grammar.len());
        compress::prune(&mut bank, &mut work, &protected).unwrap();
        let r1 = (work.grammar.size(&bank), work.grammar.len());
        compress::nonlinear_compress(&mut bank, &mut work, &protected, GuardMode::MgtSubsumes, &mut names).unwrap();
        let r2 = (work.grammar.size(&bank), work.grammar.len());
        compress::same_value_reduce(&mut bank, &mut work, &protected, ccfg.edge_budget).unwrap();
        let r3 = (work.grammar.size(&bank), work.grammar.len());
        compress::mgt_reduce(&mut bank, &mut work, &protected).unwrap();
        let r4 = (work.grammar.size(&bank), work.grammar.len());
        let amax = work.grammar.prods.iter().map(|p| p.arity).max().unwrap_or(0);
        println!(
            "cap {:?} {:?}: repl {}/{} prune {}/{} nonlin {}/{} samev {}/{} mgt {}/{} (final arity max {})",
            cap, mode, r0.0, r0.1, r1.0, r1.1, r2.0, r2.1, r3.0, r3.1, r4.0, r4.1, amax
        );
    }
}

#[test]
#[ignore = "heavy; run explicitly"]
fn pipeline_profile_cap4() {
    use proofgram::compress::{self, CompressCfg, GuardMode, NameAlloc};
    use proofgram::stats::{kb_stats, StatsOptions};
    use proofgram::Sym;
    use rustc_hash::FxHashSet;

    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let kb = metamath::extract_kb(&db, &mut bank, &cfg).expect("extraction").kb;
    let mut roots: Vec<(Sym, proofgram::PTerm)> = Vec::new();
    for name in THEOREM_SAMPLER_17 {
        let sym = bank.try_sym(name).unwrap();
        let pos = kb.grammar.position(sym).unwrap();
        let rhs = kb.grammar.prods[pos].rhs;
        let val = compress::expand_term(&mut bank, &kb.grammar, rhs).unwrap();
        roots.push((sym, val));
    }
    let protected: FxHashSet<Sym> = roots.iter().map(|&(s, _)| s).collect();
    let mut names = NameAlloc::new("lemma");
    let ccfg = CompressCfg { max_arity: Some(4), ..CompressCfg::default() };
    let mut work = compress::treerepair(&mut bank, &roots, &mut names, &ccfg, false).unwrap();
    work.base = kb.base.clone();
    for (i, p) in work.grammar.prods.iter().enumerate() {
        if let Some(pos) = kb.grammar.position(p.name) {
            work.stated[i] = kb.stated[pos].clone();
        }
    }
    compress::prune(&mut bank, &mut work, &protected).unwrap();
    let nl = compress::nonlinear_compress(&mut bank, &mut work, &protected, GuardMode::MgtSubsumes, &mut names).unwrap();
    println!("nonlinear steps {} skipped {}", nl.steps, nl.skipped);
    compress::same_value_reduce(&mut bank, &mut work, &protected, ccfg.edge_budget).unwrap();
    compress::mgt_reduce(&mut bank, &mut work, &protected).unwrap();
    let s = kb_stats(&mut bank, &work, StatsOptions { with_mgt: false }).unwrap();
    println!(
        "final {}/{}; ref med {} mean {} max {} sum {} ref1 {:.0}%; |p| med {} mean {} max {}; arity mean {} max {} a0 {:.0}% nl {:.2}%",
        s.grammar_size, s.productions,
        s.refs.median, s.refs.mean, s.refs.max, s.ref_sum, s.ref1_share * 100.0,
        s.prod_size.median, s.prod_size.mean, s.prod_size.max,
        s.arity.mean, s.arity.max, s.arity0_share * 100.0, s.nonlinear_share * 100.0
    );
}

/// Shared pipeline runner: extraction, expansion, and the five-stage
/// compression with defaults, returning the final KB with stated clauses.
#[allow(dead_code)]
fn run_minitrp(db: &metamath::Database, bank: &mut Bank) -> (proofgram::Kb, proofgram::Kb) {
    use proofgram::compress::{self, CompressCfg, GuardMode, NameAlloc};
    use proofgram::Sym;
    use rustc_hash::FxHashSet;

    let cfg = ExtractCfg {
        roots: Some(THEOREM_SAMPLER_17.iter().map(|s| s.to_string()).collect()),
        ..ExtractCfg::default()
    };
    let miniset = metamath::extract_kb(db, bank, &cfg).expect("extraction").kb;
    let mut roots: Vec<(Sym, proofgram::PTerm)> = Vec::new();
    for name in THEOREM_SAMPLER_17 {
        let sym = bank.try_sym(name).unwrap();
        let pos = miniset.grammar.position(sym).unwrap();
        let rhs = miniset.grammar.prods[pos].rhs;
        let val = compress::expand_term(bank, &miniset.grammar, rhs).unwrap();
        roots.push((sym, val));
    }
    let protected: FxHashSet<Sym> = roots.iter().map(|&(s, _)| s).collect();
    let mut names = NameAlloc::new("lemma");
    let ccfg = CompressCfg::default();
    let mut work = compress::treerepair(bank, &roots, &mut names, &ccfg, false).unwrap();
    work.base = miniset.base.clone();
    for (i, p) in work.grammar.prods.iter().enumerate() {
        if let Some(pos) = miniset.grammar.position(p.name) {
            work.stated[i] = miniset.stated[pos].clone();
        }
    }
    compress::prune(bank, &mut work, &protected).unwrap();
    compress::nonlinear_compress(bank, &mut work, &protected, GuardMode::MgtSubsumes, &mut names)
        .unwrap();
    compress::same_value_reduce(bank, &mut work, &protected, ccfg.edge_budget).unwrap();
    compress::mgt_reduce(bank, &mut work, &protected).unwrap();
    compress::fill_stated_with_mgts(bank, &mut work).unwrap();
    (work, miniset)
}

#[test]
#[ignore = "heavy; run explicitly"]
fn overlap_statistics() {
    use proofgram::stats::{compare_kb, ClauseSet};
    use proofgram::Sym;

    let Some(db) = load_set_mm() else { return };
    let mut bank = Bank::new();
    let (minitrp, miniset) = run_minitrp(&db, &mut bank);
    println!(
        "MINITRP: {}/{}",
        minitrp.grammar.size(&bank),
        minitrp.grammar.len()
    );
    let tops: Vec<Sym> = THEOREM_SAMPLER_17
        .iter()
        .map(|s| bank.try_sym(s).unwrap())
        .collect();

    // reference 1: all provable clauses of the whole database
    let t0 = std::time::Instant::now();
    let all_cfg = ExtractCfg { check_roundtrip: false, ..ExtractCfg::default() };
    let whole = metamath::extract_kb(&db, &mut bank, &all_cfg).expect("whole-db extraction");
    let mut clauses: Vec<proofgram::Clause> =
        whole.kb.base.entries.iter().map(|(_, c)| c.clone()).collect();
    clauses.extend(whole.kb.stated.iter().flatten().cloned());
    println!("set.mm clause set: {} clauses in {:?}", clauses.len(), t0.elapsed());
    let set_ref = ClauseSet::new(&mut bank, clauses);
    let vs_set = compare_kb(&mut bank, &minitrp, &set_ref, &tops).unwrap();

    // reference 2: MINISET (base + stated clauses)
    let ms_ref = ClauseSet::from_kb(&mut bank, &miniset);
    let vs_ms = compare_kb(&mut bank, &minitrp, &ms_ref, &tops).unwrap();
    println!("overlap vs set.mm: {:.1}%  vs MINISET: {:.1}%", vs_set * 100.0, vs_ms * 100.0);
    assert!(vs_set >= 0.25, "vs set.mm {:.3} < 0.25", vs_set);
    assert!(vs_ms >= 0.20, "vs MINISET {:.3} < 0.20", vs_ms);
}
