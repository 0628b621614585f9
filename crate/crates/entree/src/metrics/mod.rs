//! Tree-alignment evaluation: Leaves / Steps / Intermediates F1 and
//! AllCorrect.
//!
//! Scoring runs in two stages. First the predicted tree is aligned to the
//! gold tree: leaves match by their `sent*` labels, the hypothesis roots
//! always match, and intermediates are matched greedily by Jaccard token
//! similarity of their conclusion texts (highest pair first, ties broken
//! by step order, zero-similarity pairs left unaligned). Then the three
//! metrics are computed against the alignment. An exhaustive alignment
//! oracle for small trees validates the greedy matcher.

mod aggregate;
mod score;

pub use aggregate::{aggregate, MetricSummary, ScoreReport};
pub use score::{score_example, score_intermediates, score_leaves, score_steps, ExampleReport};

use crate::tree::{tokenize, EntailmentTree, NodeLabel};
use std::collections::BTreeSet;

/// Token-set Jaccard similarity after lowercasing; both-empty is vacuous
/// agreement (1).
pub fn jaccard(a: &str, b: &str) -> f64 {
    let sa: BTreeSet<String> = tokenize(a).into_iter().collect();
    let sb: BTreeSet<String> = tokenize(b).into_iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    inter as f64 / union as f64
}

/// Pluggable text similarity for intermediate-conclusion correctness.
pub type SimFn = dyn Fn(&str, &str) -> f64 + Sync;

/// Default similarity threshold for intermediate correctness under
/// token-Jaccard similarity.
pub const DEFAULT_INTERMEDIATE_THRESHOLD: f64 = 0.55;

/// Injective mapping from predicted to gold intermediates.
#[derive(Debug, Clone, Default)]
pub struct Alignment {
    /// `(pred int label, gold int label, similarity)`
    pub pairs: Vec<(u32, u32, f64)>,
}

impl Alignment {
    pub fn gold_for(&self, pred: u32) -> Option<u32> {
        self.pairs.iter().find(|(p, _, _)| *p == pred).map(|(_, g, _)| *g)
    }

    pub fn total_similarity(&self) -> f64 {
        self.pairs.iter().map(|(_, _, s)| s).sum()
    }
}

/// Greedy maximum-similarity matching over an explicit matrix
/// (`sim[p][g]`). Commits the highest pair first, removes both nodes,
/// repeats; ties break toward the earlier pred row, then the earlier gold
/// column; zero-similarity pairs stay unaligned.
pub fn greedy_match(sim: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let rows = sim.len();
    let cols = sim.first().map(|r| r.len()).unwrap_or(0);
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for p in 0..rows {
            if row_used[p] {
                continue;
            }
            for g in 0..cols {
                if col_used[g] || sim[p][g] <= 0.0 {
                    continue;
                }
                // strict `>` keeps the earliest (p, g) on ties
                if best.map(|(_, _, s)| sim[p][g] > s).unwrap_or(true) {
                    best = Some((p, g, sim[p][g]));
                }
            }
        }
        match best {
            Some((p, g, s)) => {
                row_used[p] = true;
                col_used[g] = true;
                out.push((p, g, s));
            }
            None => break,
        }
    }
    out
}

/// Exhaustive best-total-similarity matching; validation oracle for the
/// greedy matcher. Fails above 6×6 to keep enumeration bounded. Among
/// equal-total mappings the lexicographically smallest pair list wins, so
/// the result is deterministic.
pub fn oracle_match(sim: &[Vec<f64>]) -> Result<Vec<(usize, usize, f64)>, String> {
    let rows = sim.len();
    let cols = sim.first().map(|r| r.len()).unwrap_or(0);
    if rows > 6 || cols > 6 {
        return Err(format!("oracle bound exceeded: {}x{} matrix", rows, cols));
    }

    type Pairs = Vec<(usize, usize, f64)>;
    fn keys(v: &Pairs) -> Vec<(usize, usize)> {
        v.iter().map(|(p, g, _)| (*p, *g)).collect()
    }
    fn recurse(sim: &[Vec<f64>], row: usize, col_used: &mut [bool], current: &mut Pairs, best: &mut Option<(Pairs, f64)>) {
        if row == sim.len() {
            let total: f64 = current.iter().map(|(_, _, s)| s).sum();
            let replace = match best {
                None => true,
                Some((bv, bt)) => {
                    total > *bt + 1e-12 || ((total - *bt).abs() <= 1e-12 && keys(current) < keys(bv))
                }
            };
            if replace {
                *best = Some((current.clone(), total));
            }
            return;
        }
        // leave this row unaligned
        recurse(sim, row + 1, col_used, current, best);
        for g in 0..col_used.len() {
            if !col_used[g] && sim[row][g] > 0.0 {
                col_used[g] = true;
                current.push((row, g, sim[row][g]));
                recurse(sim, row + 1, col_used, current, best);
                current.pop();
                col_used[g] = false;
            }
        }
    }

    let mut best: Option<(Pairs, f64)> = None;
    let mut current: Pairs = Vec::new();
    let mut col_used = vec![false; cols];
    recurse(sim, 0, &mut col_used, &mut current, &mut best);
    Ok(best.map(|(pairs, _)| pairs).unwrap_or_default())
}

fn int_similarity_matrix(pred: &EntailmentTree, gold: &EntailmentTree) -> (Vec<u32>, Vec<u32>, Vec<Vec<f64>>) {
    let pred_ints = pred.intermediates();
    let gold_ints = gold.intermediates();
    let sim = pred_ints
        .iter()
        .map(|(_, pt)| gold_ints.iter().map(|(_, gt)| jaccard(pt, gt)).collect())
        .collect();
    (
        pred_ints.iter().map(|(k, _)| *k).collect(),
        gold_ints.iter().map(|(k, _)| *k).collect(),
        sim,
    )
}

/// Greedy alignment of predicted to gold intermediates by conclusion-text
/// Jaccard. Leaves and hypothesis roots align implicitly by label.
pub fn align_trees(pred: &EntailmentTree, gold: &EntailmentTree) -> Alignment {
    let (pred_labels, gold_labels, sim) = int_similarity_matrix(pred, gold);
    let pairs = greedy_match(&sim)
        .into_iter()
        .map(|(p, g, s)| (pred_labels[p], gold_labels[g], s))
        .collect();
    Alignment { pairs }
}

/// Exhaustive-oracle variant of [`align_trees`]; at most 6 intermediates
/// per tree.
pub fn exhaustive_align_trees(pred: &EntailmentTree, gold: &EntailmentTree) -> Result<Alignment, String> {
    let (pred_labels, gold_labels, sim) = int_similarity_matrix(pred, gold);
    let pairs = oracle_match(&sim)?
        .into_iter()
        .map(|(p, g, s)| (pred_labels[p], gold_labels[g], s))
        .collect();
    Ok(Alignment { pairs })
}

/// Leaf sets used by [`score_leaves`].
pub(crate) fn leaf_sets(pred: &EntailmentTree, gold: &EntailmentTree) -> (BTreeSet<u32>, BTreeSet<u32>) {
    (pred.leaf_sents(), gold.leaf_sents())
}

pub(crate) use crate::tree::NodeLabel as Label;

/// Maps a predicted premise label into gold space under the alignment;
/// `None` when a predicted intermediate is unaligned.
pub(crate) fn map_premise(p: &NodeLabel, alignment: &Alignment) -> Option<NodeLabel> {
    match p {
        NodeLabel::Sent(k) => Some(NodeLabel::Sent(*k)),
        NodeLabel::Int(k) => alignment.gold_for(*k).map(NodeLabel::Int),
        NodeLabel::Hypothesis => Some(NodeLabel::Hypothesis),
    }
}
