//! End-to-end example generation.

use super::{backchain, instantiate, verbalize_atom, verbalize_rule, verify_proof};
use super::{GroundedProof, LogicError, NamePool, Result, Rule};
use crate::tree::shape::ShapeRegistry;
use crate::tree::{EntailmentExample, EntailmentTree, NodeLabel, ProofStep};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Proof depth → number of examples.
    pub counts: BTreeMap<usize, usize>,
    pub seed: u64,
    /// When set, verbalized rules used by the proof are appended to the
    /// candidate sentences as extra non-leaf context.
    pub rules_in_context: bool,
}

fn example_rng(seed: u64, depth: usize, index: usize, attempt: usize) -> ChaCha8Rng {
    // splitmix-style combination; any stable mixing works
    let mut x = seed
        .wrapping_mul(0x9E3779B97F4A7C15)
        .wrapping_add((depth as u64).wrapping_mul(0xBF58476D1CE4E5B9))
        .wrapping_add((index as u64).wrapping_mul(0x94D049BB133111EB))
        .wrapping_add(attempt as u64 + 1);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

/// Builds the entailment example for a verified grounded proof.
fn assemble(
    id: String,
    proof: &GroundedProof,
    rules: &[Rule],
    rules_in_context: bool,
    registry: &ShapeRegistry,
    rng: &mut ChaCha8Rng,
) -> Result<EntailmentExample> {
    let n = proof.leaves.len();
    // sentence labels are independent of proof order: leaf k of the proof
    // lands at a shuffled position
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut label_of = vec![0u32; n]; // leaf index -> sent number
    let mut sentences = IndexMap::new();
    for (slot, &leaf_idx) in order.iter().enumerate() {
        let label = slot as u32 + 1;
        label_of[leaf_idx] = label;
        sentences.insert(
            format!("sent{}", label),
            verbalize_atom(&proof.leaves[leaf_idx])?,
        );
    }
    if rules_in_context {
        let mut emitted = BTreeSet::new();
        let mut next = n as u32 + 1;
        for step in &proof.steps {
            if emitted.insert(step.rule_id.clone()) {
                let rule = rules
                    .iter()
                    .find(|r| r.id == step.rule_id)
                    .ok_or_else(|| LogicError::Invalid(format!("unknown rule {}", step.rule_id)))?;
                sentences.insert(format!("sent{}", next), verbalize_rule(rule)?);
                next += 1;
            }
        }
    }

    let leaf_index: BTreeMap<&super::Atom, u32> =
        proof.leaves.iter().enumerate().map(|(i, a)| (a, label_of[i])).collect();
    let mut conclusion_label: BTreeMap<&super::Atom, u32> = BTreeMap::new();
    let mut steps = Vec::with_capacity(proof.steps.len());
    for (i, step) in proof.steps.iter().enumerate() {
        let premises = step
            .premises
            .iter()
            .map(|p| {
                if let Some(&k) = conclusion_label.get(p) {
                    NodeLabel::Int(k)
                } else {
                    NodeLabel::Sent(leaf_index[p])
                }
            })
            .collect();
        let last = i + 1 == proof.steps.len();
        if last {
            steps.push(ProofStep { premises, conclusion: NodeLabel::Hypothesis, text: String::new() });
        } else {
            let k = i as u32 + 1;
            conclusion_label.insert(&step.conclusion, k);
            steps.push(ProofStep {
                premises,
                conclusion: NodeLabel::Int(k),
                text: verbalize_atom(&step.conclusion)?,
            });
        }
    }
    let tree = EntailmentTree::new(steps)?;
    let shape = match registry.classify(&tree).as_str() {
        "Other" => None,
        code => Some(code.to_string()),
    };
    let ex = EntailmentExample {
        id,
        hypothesis: verbalize_atom(&proof.goal)?,
        sentences,
        depth: tree.proof_length(),
        shape,
        step_rules: Some(proof.steps.iter().map(|s| s.rule_id.clone()).collect()),
        tree,
    };
    ex.validate()?;
    Ok(ex)
}

/// Generates `counts[depth]` verified examples per depth. Identical
/// options produce byte-identical output; duplicates (same sentence
/// multiset and hypothesis) are rejected and regenerated.
pub fn generate_dataset(
    options: &GenerateOptions,
    rules: &[Rule],
    pool: &NamePool,
) -> Result<Vec<EntailmentExample>> {
    for rule in rules {
        rule.validate()?;
    }
    let registry = ShapeRegistry::default();
    let mut out = Vec::new();
    let mut dedup: BTreeSet<String> = BTreeSet::new();
    for (&depth, &count) in &options.counts {
        for index in 0..count {
            let mut accepted = false;
            for attempt in 0..100 {
                let mut rng = example_rng(options.seed, depth, index, attempt);
                let skeleton = backchain(rules, depth, &mut rng)?;
                let proof = instantiate(&skeleton, pool, &mut rng)?;
                if let Err(v) = verify_proof(&proof, rules) {
                    return Err(LogicError::Generation(format!(
                        "generated proof failed verification: {}",
                        v
                    )));
                }
                let id = format!("dbp-d{}-{:06}", depth, index);
                let ex = assemble(id, &proof, rules, options.rules_in_context, &registry, &mut rng)?;
                let mut texts: Vec<&str> = ex.sentences.values().map(|s| s.as_str()).collect();
                texts.sort_unstable();
                let key = format!("{}||{}", ex.hypothesis, texts.join("|"));
                if dedup.insert(key) {
                    out.push(ex);
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(LogicError::Generation(format!(
                    "exceeded retry budget generating depth-{} example {} (duplicates)",
                    depth, index
                )));
            }
        }
    }
    Ok(out)
}
