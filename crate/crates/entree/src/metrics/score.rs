//! The three per-example metrics.

use super::{align_trees, map_premise, Alignment, SimFn};
use crate::tree::{EntailmentTree, NodeLabel};
use std::collections::BTreeMap;

fn f1(correct: usize, pred_total: usize, gold_total: usize) -> f64 {
    if pred_total + gold_total == 0 {
        return 1.0; // nothing to predict and nothing predicted
    }
    2.0 * correct as f64 / (pred_total + gold_total) as f64
}

/// `(F1, all_correct)` over the sets of sentence labels used as leaves.
pub fn score_leaves(pred: &EntailmentTree, gold: &EntailmentTree) -> (f64, bool) {
    let (pl, gl) = super::leaf_sets(pred, gold);
    if pl.is_empty() {
        return (0.0, false);
    }
    let correct = pl.intersection(&gl).count();
    let score = f1(correct, pl.len(), gl.len());
    (score, score == 1.0)
}

/// A predicted step is structurally correct iff its conclusion aligns to a
/// gold node and its premise multiset — predicted int labels mapped
/// through the alignment — equals that gold step's premise multiset.
pub fn score_steps(pred: &EntailmentTree, gold: &EntailmentTree, alignment: &Alignment) -> (f64, bool) {
    let mut correct = 0;
    for step in pred.steps() {
        let gold_node = match step.conclusion {
            NodeLabel::Hypothesis => Some(NodeLabel::Hypothesis),
            NodeLabel::Int(k) => alignment.gold_for(k).map(NodeLabel::Int),
            NodeLabel::Sent(_) => None,
        };
        let Some(gold_node) = gold_node else { continue };
        let Some(gold_step) = gold.step_for(gold_node) else { continue };
        let mapped: Option<Vec<NodeLabel>> =
            step.premises.iter().map(|p| map_premise(p, alignment)).collect();
        let Some(mut mapped) = mapped else { continue };
        mapped.sort();
        let mut gold_premises = gold_step.premises.clone();
        gold_premises.sort();
        if mapped == gold_premises {
            correct += 1;
        }
    }
    let score = f1(correct, pred.steps().len(), gold.steps().len());
    (score, score == 1.0)
}

/// An aligned predicted intermediate is correct iff
/// `sim_fn(pred text, gold text) >= threshold`.
pub fn score_intermediates(
    pred: &EntailmentTree,
    gold: &EntailmentTree,
    alignment: &Alignment,
    sim_fn: &SimFn,
    threshold: f64,
) -> (f64, bool) {
    let gold_texts: BTreeMap<u32, &str> = gold.intermediates().into_iter().collect();
    let mut correct = 0;
    for (k, text) in pred.intermediates() {
        if let Some(gk) = alignment.gold_for(k) {
            if let Some(gt) = gold_texts.get(&gk) {
                if sim_fn(text, gt) >= threshold {
                    correct += 1;
                }
            }
        }
    }
    let score = f1(correct, pred.intermediates().len(), gold_texts.len());
    (score, score == 1.0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExampleReport {
    pub leaves_f1: f64,
    pub leaves_all: bool,
    pub steps_f1: f64,
    pub steps_all: bool,
    pub intermediates_f1: f64,
    pub intermediates_all: bool,
}

/// Aligns and scores one prediction. The `all_correct` flags are exactly
/// `F1 == 1` per metric.
pub fn score_example(
    pred: &EntailmentTree,
    gold: &EntailmentTree,
    sim_fn: &SimFn,
    threshold: f64,
) -> ExampleReport {
    let alignment = align_trees(pred, gold);
    let (leaves_f1, leaves_all) = score_leaves(pred, gold);
    let (steps_f1, steps_all) = score_steps(pred, gold, &alignment);
    let (intermediates_f1, intermediates_all) =
        score_intermediates(pred, gold, &alignment, sim_fn, threshold);
    debug_assert!((0.0..=1.0).contains(&leaves_f1));
    debug_assert!((0.0..=1.0).contains(&steps_f1));
    debug_assert!((0.0..=1.0).contains(&intermediates_f1));
    ExampleReport { leaves_f1, leaves_all, steps_f1, steps_all, intermediates_f1, intermediates_all }
}
