//! Random tree fixtures for tests, examples, and shape experiments.

use super::{EntailmentTree, NodeLabel, ProofStep, Result, TreeError};
use rand::seq::SliceRandom;
use rand::Rng;

const LEXICON: &[&str] = &[
    "water", "light", "animal", "plant", "energy", "heat", "rock", "wind", "soil", "cell",
    "sun", "moon", "river", "cloud", "seed", "leaf", "metal", "sound", "ice", "fire",
    "grows", "moves", "warms", "cools", "forms", "holds", "needs", "makes", "breaks", "turns",
];

/// A short random sentence from a fixed lexicon; never contains grammar
/// delimiters, so it is always a valid conclusion text.
pub fn random_text<R: Rng>(rng: &mut R) -> String {
    let len = rng.gen_range(3..=7);
    (0..len)
        .map(|_| *LEXICON.choose(rng).expect("lexicon not empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds a complete tree with exactly the given signature, fresh leaf
/// labels, and random intermediate texts. Fails if the signature cannot
/// form a complete tree (dangling intermediates or bad syntax).
pub fn tree_from_signature<R: Rng>(sig: &str, rng: &mut R) -> Result<EntailmentTree> {
    let mut step_kinds: Vec<Vec<char>> = Vec::new();
    let mut current: Option<Vec<char>> = None;
    for c in sig.chars() {
        match (c, &mut current) {
            ('[', None) => current = Some(Vec::new()),
            (']', Some(_)) => step_kinds.push(current.take().unwrap()),
            ('L', Some(v)) | ('I', Some(v)) => v.push(c),
            _ => return Err(TreeError::Data(format!("bad shape signature '{}'", sig))),
        }
    }
    if current.is_some() || step_kinds.is_empty() {
        return Err(TreeError::Data(format!("bad shape signature '{}'", sig)));
    }

    let mut next_sent = 1u32;
    let mut next_int = 1u32;
    let mut unused: Vec<u32> = Vec::new();
    let mut steps = Vec::new();
    let total = step_kinds.len();
    for (i, kinds) in step_kinds.into_iter().enumerate() {
        let mut premises = Vec::new();
        for kind in kinds {
            match kind {
                'L' => {
                    premises.push(NodeLabel::Sent(next_sent));
                    next_sent += 1;
                }
                'I' => {
                    if unused.is_empty() {
                        return Err(TreeError::Data(format!(
                            "signature '{}' consumes an intermediate that does not exist",
                            sig
                        )));
                    }
                    let idx = rng.gen_range(0..unused.len());
                    premises.push(NodeLabel::Int(unused.remove(idx)));
                }
                _ => unreachable!(),
            }
        }
        premises.shuffle(rng);
        if i + 1 == total {
            steps.push(ProofStep { premises, conclusion: NodeLabel::Hypothesis, text: String::new() });
        } else {
            steps.push(ProofStep {
                premises,
                conclusion: NodeLabel::Int(next_int),
                text: random_text(rng),
            });
            unused.push(next_int);
            next_int += 1;
        }
    }
    EntailmentTree::new(steps)
}

/// A random valid complete tree with up to `max_steps` steps and step
/// arities between 1 and 3 (unary steps exercise single-premise rules).
pub fn random_tree<R: Rng>(rng: &mut R, max_steps: usize) -> EntailmentTree {
    let total = rng.gen_range(1..=max_steps.max(1));
    let mut next_sent = 1u32;
    let mut unused: Vec<u32> = Vec::new();
    let mut steps = Vec::new();
    for i in 0..total {
        let last = i + 1 == total;
        let mut premises: Vec<NodeLabel> = Vec::new();
        if last {
            // the root must consume every dangling intermediate
            for k in unused.drain(..) {
                premises.push(NodeLabel::Int(k));
            }
            let extra = if premises.is_empty() { rng.gen_range(1..=3) } else { rng.gen_range(0..=1) };
            for _ in 0..extra {
                premises.push(NodeLabel::Sent(next_sent));
                next_sent += 1;
            }
        } else {
            let ints = if unused.is_empty() { 0 } else { rng.gen_range(0..=unused.len().min(2)) };
            for _ in 0..ints {
                let idx = rng.gen_range(0..unused.len());
                premises.push(NodeLabel::Int(unused.remove(idx)));
            }
            let min_leaves = usize::from(premises.is_empty());
            for _ in 0..rng.gen_range(min_leaves..=2).max(min_leaves) {
                premises.push(NodeLabel::Sent(next_sent));
                next_sent += 1;
            }
            if premises.is_empty() {
                premises.push(NodeLabel::Sent(next_sent));
                next_sent += 1;
            }
        }
        premises.shuffle(rng);
        let (conclusion, text) = if last {
            (NodeLabel::Hypothesis, String::new())
        } else {
            let k = i as u32 + 1;
            unused.push(k);
            (NodeLabel::Int(k), random_text(rng))
        };
        steps.push(ProofStep { premises, conclusion, text });
    }
    EntailmentTree::new(steps).expect("constructed tree is valid")
}
