//! Compositional train/finetune/test splits.
//!
//! Primitive instances (short or A-shaped proofs) form the training pool;
//! compositional instances (longer or B-shaped proofs) are divided into a
//! fine-tuning handful and a test set. Every input item must fall in one
//! of the two pools: the splits are disjoint and their union is the input.

use super::shape::ShapeRegistry;
use super::{EntailmentExample, Result, TreeError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub enum PartitionSpec {
    ByLength { train_depths: Vec<usize>, comp_depth: usize, finetune: usize, test: usize },
    ByShape { train_shapes: Vec<String>, comp_shapes: Vec<String>, finetune: usize, test: usize },
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub train: Vec<EntailmentExample>,
    pub finetune: Vec<EntailmentExample>,
    pub test: Vec<EntailmentExample>,
}

impl Partition {
    /// Ids must be unique across all three splits.
    pub fn assert_disjoint(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for ex in self.train.iter().chain(&self.finetune).chain(&self.test) {
            if !seen.insert(ex.id.as_str()) {
                return Err(TreeError::Data(format!("example id {} appears in more than one split", ex.id)));
            }
        }
        Ok(())
    }
}

/// Deterministic split: the compositional pool is shuffled with `seed`
/// and cut into `finetune` + `test`. Items matching neither pool, or a
/// short compositional pool, are errors (with counts) rather than silent
/// drops.
pub fn partition(
    data: Vec<EntailmentExample>,
    spec: &PartitionSpec,
    seed: u64,
    registry: &ShapeRegistry,
) -> Result<Partition> {
    let mut ids = BTreeSet::new();
    for ex in &data {
        if !ids.insert(ex.id.clone()) {
            return Err(TreeError::Data(format!("duplicate example id {}", ex.id)));
        }
    }

    let (finetune_count, test_count) = match spec {
        PartitionSpec::ByLength { finetune, test, .. } => (*finetune, *test),
        PartitionSpec::ByShape { finetune, test, .. } => (*finetune, *test),
    };

    let mut train = Vec::new();
    let mut comp = Vec::new();
    let mut unmatched = 0usize;
    for ex in data {
        let bucket = match spec {
            PartitionSpec::ByLength { train_depths, comp_depth, .. } => {
                if train_depths.contains(&ex.depth) {
                    Some(true)
                } else if ex.depth == *comp_depth {
                    Some(false)
                } else {
                    None
                }
            }
            PartitionSpec::ByShape { train_shapes, comp_shapes, .. } => {
                let code = registry.classify(&ex.tree);
                if train_shapes.contains(&code) {
                    Some(true)
                } else if comp_shapes.contains(&code) {
                    Some(false)
                } else {
                    None
                }
            }
        };
        match bucket {
            Some(true) => train.push(ex),
            Some(false) => comp.push(ex),
            None => unmatched += 1,
        }
    }
    if unmatched > 0 {
        return Err(TreeError::Data(format!(
            "{} examples match neither the primitive nor the compositional pool; filter them first",
            unmatched
        )));
    }
    if comp.len() != finetune_count + test_count {
        return Err(TreeError::Data(format!(
            "compositional pool has {} examples but finetune {} + test {} = {} were requested \
             (disjoint splits must cover the input exactly; size the pool to match)",
            comp.len(),
            finetune_count,
            test_count,
            finetune_count + test_count
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    comp.shuffle(&mut rng);
    let mut finetune = comp;
    let test = finetune.split_off(finetune_count);

    let partition = Partition { train, finetune, test };
    partition.assert_disjoint()?;
    verify_constraints(&partition, spec, registry)?;
    Ok(partition)
}

/// Per-item re-check of the exclusion constraints.
fn verify_constraints(p: &Partition, spec: &PartitionSpec, registry: &ShapeRegistry) -> Result<()> {
    match spec {
        PartitionSpec::ByLength { train_depths, comp_depth, .. } => {
            for ex in &p.train {
                if ex.depth == *comp_depth {
                    return Err(TreeError::Data(format!(
                        "train split contains compositional-depth example {}",
                        ex.id
                    )));
                }
                if !train_depths.contains(&ex.depth) {
                    return Err(TreeError::Data(format!("train split contains off-spec depth {}", ex.depth)));
                }
            }
            for ex in p.finetune.iter().chain(&p.test) {
                if ex.depth != *comp_depth {
                    return Err(TreeError::Data(format!(
                        "compositional split contains depth-{} example {}",
                        ex.depth, ex.id
                    )));
                }
            }
        }
        PartitionSpec::ByShape { train_shapes, comp_shapes, .. } => {
            for ex in &p.train {
                let code = registry.classify(&ex.tree);
                if !train_shapes.contains(&code) || comp_shapes.contains(&code) {
                    return Err(TreeError::Data(format!(
                        "train split contains shape {} example {}",
                        code, ex.id
                    )));
                }
            }
            for ex in p.finetune.iter().chain(&p.test) {
                let code = registry.classify(&ex.tree);
                if !comp_shapes.contains(&code) {
                    return Err(TreeError::Data(format!(
                        "compositional split contains shape {} example {}",
                        code, ex.id
                    )));
                }
            }
        }
    }
    Ok(())
}
