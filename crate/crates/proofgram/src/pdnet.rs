//! Proof-dependency networks and scale-free fitting.

use crate::bank::{Bank, PNode, PTerm, Sym};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::term;
use rustc_hash::FxHashMap;

/// Directed multigraph: node `p` has an edge to `q` for every occurrence of
/// `q` in the RHS of `p`'s production (stored with multiplicities).
#[derive(Debug, Default)]
pub struct PdNet {
    pub nodes: Vec<Sym>,
    /// `(src, dst, count)` with `src`/`dst` indexing `nodes`.
    pub edges: Vec<(u32, u32, u64)>,
}

impl PdNet {
    /// In-degree (with multiplicity) per node; equals `ref_G`.
    pub fn in_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.nodes.len()];
        for &(_, dst, c) in &self.edges {
            deg[dst as usize] += c;
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.nodes.len()];
        for &(src, _, c) in &self.edges {
            deg[src as usize] += c;
        }
        deg
    }

    pub fn edge_occurrences(&self) -> u64 {
        self.edges.iter().map(|&(_, _, c)| c).sum()
    }

    pub fn to_tsv(&self, bank: &Bank, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            out.push_str("# ");
            out.push_str(h);
            out.push('\n');
        }
        for &(src, dst, c) in &self.edges {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                bank.sym_name(self.nodes[src as usize]),
                bank.sym_name(self.nodes[dst as usize]),
                c
            ));
        }
        out
    }
}

pub fn build_pdnet(bank: &Bank, grammar: &Grammar) -> PdNet {
    let nodes: Vec<Sym> = grammar.prods.iter().map(|p| p.name).collect();
    let mut edges: Vec<(u32, u32, u64)> = Vec::new();
    for (src, p) in grammar.prods.iter().enumerate() {
        // tree multiplicities within this RHS
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
        let mut per_dst: FxHashMap<usize, u64> = FxHashMap::default();
        for (&n, &m) in &mult {
            if let PNode::App(f, _) = bank.pnode(n) {
                if let Some(j) = grammar.position(*f) {
                    *per_dst.entry(j).or_insert(0) += m;
                }
            }
        }
        let mut dsts: Vec<(usize, u64)> = per_dst.into_iter().collect();
        dsts.sort_unstable();
        for (dst, c) in dsts {
            edges.push((src as u32, dst as u32, c));
        }
    }
    PdNet { nodes, edges }
}

#[derive(Debug, Clone, Copy)]
pub enum KminMode {
    Fixed(u64),
    /// Scan candidate thresholds, minimizing the Kolmogorov-Smirnov distance
    /// between the empirical and fitted tail CCDFs.
    Auto,
}

#[derive(Debug, Clone)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub kmin: u64,
    pub ks_distance: f64,
    /// Number of samples >= kmin the fit is based on.
    pub tail_n: usize,
    /// All degrees equal: the MLE degenerates.
    pub degenerate: bool,
}

/// Discrete-data maximum-likelihood fit of `p(k) = (alpha-1) k^-alpha` via
/// the continuous approximation `alpha = 1 + n / sum ln(k_i / (kmin - 1/2))`
/// (Clauset-Shalizi-Newman).  Zero degrees must be excluded by the caller.
pub fn fit_power_law(degrees: &[u64], mode: KminMode) -> Result<PowerLawFit> {
    if degrees.iter().any(|&k| k == 0) {
        return Err(Error::InsufficientData(
            "zero in-degrees must be excluded from the fit".into(),
        ));
    }
    let mut sorted: Vec<u64> = degrees.to_vec();
    sorted.sort_unstable();
    match mode {
        KminMode::Fixed(kmin) => fit_at(&sorted, kmin),
        KminMode::Auto => {
            let mut kmins: Vec<u64> = sorted.to_vec();
            kmins.dedup();
            let mut best: Option<PowerLawFit> = None;
            for &kmin in &kmins {
                let Ok(fit) = fit_at(&sorted, kmin) else { continue };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        fit.ks_distance < b.ks_distance
                            || (fit.ks_distance == b.ks_distance && fit.kmin < b.kmin)
                    }
                };
                if better {
                    best = Some(fit);
                }
            }
            best.ok_or_else(|| {
                Error::InsufficientData("no kmin leaves at least 10 tail points".into())
            })
        }
    }
}

fn fit_at(sorted: &[u64], kmin: u64) -> Result<PowerLawFit> {
    let start = sorted.partition_point(|&k| k < kmin);
    let tail = &sorted[start..];
    if tail.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} tail points at kmin={kmin}",
            tail.len()
        )));
    }
    let shift = kmin as f64 - 0.5;
    let logsum: f64 = tail.iter().map(|&k| (k as f64 / shift).ln()).sum();
    if logsum <= 0.0 {
        return Ok(PowerLawFit {
            alpha: f64::INFINITY,
            kmin,
            ks_distance: 1.0,
            tail_n: tail.len(),
            degenerate: true,
        });
    }
    let alpha = 1.0 + tail.len() as f64 / logsum;
    let degenerate = tail.first() == tail.last();
    let ks = ks_distance(tail, alpha, kmin);
    Ok(PowerLawFit { alpha, kmin, ks_distance: ks, tail_n: tail.len(), degenerate })
}

/// Fitted tail CCDF `P(K >= k)` of the rounded-continuous model.
fn fitted_ccdf(k: u64, alpha: f64, kmin: u64) -> f64 {
    ((k as f64 - 0.5) / (kmin as f64 - 0.5)).powf(-(alpha - 1.0))
}

fn ks_distance(tail: &[u64], alpha: f64, kmin: u64) -> f64 {
    let n = tail.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0usize;
    while i < tail.len() {
        let k = tail[i];
        // empirical CCDF at k counts samples >= k; tail is sorted
        let emp = (tail.len() - i) as f64 / n;
        let fit = fitted_ccdf(k, alpha, kmin);
        worst = worst.max((emp - fit).abs());
        let mut j = i;
        while j < tail.len() && tail[j] == k {
            j += 1;
        }
        i = j;
    }
    worst
}

/// CCDF export rows `k,ccdf_empirical,ccdf_fitted` over all distinct degrees;
/// the fitted column is shifted to align with the empirical tail at `kmin`
/// and left empty below it.
pub fn ccdf_rows(degrees: &[u64], fit: &PowerLawFit) -> String {
    let mut sorted: Vec<u64> = degrees.iter().copied().filter(|&k| k > 0).collect();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = String::from("k,ccdf_empirical,ccdf_fitted\n");
    let scale = {
        let start = sorted.partition_point(|&k| k < fit.kmin);
        (sorted.len() - start) as f64 / n
    };
    let mut i = 0usize;
    while i < sorted.len() {
        let k = sorted[i];
        let emp = (sorted.len() - i) as f64 / n;
        if k >= fit.kmin {
            let fitted = scale * fitted_ccdf(k, fit.alpha, fit.kmin);
            out.push_str(&format!("{k},{emp},{fitted}\n"));
        } else {
            out.push_str(&format!("{k},{emp},\n"));
        }
        let mut j = i;
        while j < sorted.len() && sorted[j] == k {
            j += 1;
        }
        i = j;
    }
    out
}
