//! Entailment-tree data model.
//!
//! A proof is an ordered list of steps, linearized from leaves to the
//! root: each step derives an intermediate conclusion (`int*`) or the
//! final `hypothesis` from previously available nodes. Leaves are the
//! candidate sentences (`sent*`).

mod io;
mod linear;
mod partition;
pub mod shape;
mod synth;
mod token;

pub use io::{example_from_line, example_to_line, read_jsonl, write_jsonl};
pub use linear::{linearize, parse_salvage, parse_strict, SalvageOutcome};
pub use partition::{partition, Partition, PartitionSpec};
pub use synth::{random_text, random_tree, tree_from_signature};
pub use token::{tokenize, tokenize_spans, Vocabulary, AMP, ARROW, BOS, COLON, EOS, HYP, PAD, SEMI, UNK};

use indexmap::IndexMap;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("syntax error at token {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid tree: {0}")]
    Invalid(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TreeError>;

/// Node label inside a proof: a candidate sentence, an intermediate
/// conclusion, or the hypothesis root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLabel {
    Sent(u32),
    Int(u32),
    Hypothesis,
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Sent(k) => write!(f, "sent{}", k),
            NodeLabel::Int(k) => write!(f, "int{}", k),
            NodeLabel::Hypothesis => write!(f, "hypothesis"),
        }
    }
}

impl NodeLabel {
    /// Parses `sent<k>` / `int<k>` / `hypothesis`; anything else is `None`.
    pub fn parse(token: &str) -> Option<NodeLabel> {
        if token == "hypothesis" {
            return Some(NodeLabel::Hypothesis);
        }
        for (prefix, ctor) in [("sent", NodeLabel::Sent as fn(u32) -> NodeLabel), ("int", NodeLabel::Int)] {
            if let Some(rest) = token.strip_prefix(prefix) {
                if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                    if let Ok(k) = rest.parse::<u32>() {
                        if k >= 1 {
                            return Some(ctor(k));
                        }
                    }
                }
            }
        }
        None
    }
}

/// One inference step: `premises -> conclusion[: text]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub premises: Vec<NodeLabel>,
    pub conclusion: NodeLabel,
    /// Conclusion text; empty exactly when the conclusion is the hypothesis.
    pub text: String,
}

/// A proof, bottom-up. Complete trees end in the (unique) hypothesis step;
/// salvaged model output may be a valid prefix without one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntailmentTree {
    steps: Vec<ProofStep>,
}

impl EntailmentTree {
    /// Builds a complete tree, enforcing all invariants.
    pub fn new(steps: Vec<ProofStep>) -> Result<Self> {
        validate_prefix(&steps)?;
        validate_complete(&steps)?;
        Ok(EntailmentTree { steps })
    }

    /// Builds a possibly incomplete tree (valid prefix), as produced by
    /// salvage parsing.
    pub fn partial(steps: Vec<ProofStep>) -> Result<Self> {
        validate_prefix(&steps)?;
        Ok(EntailmentTree { steps })
    }

    pub fn empty() -> Self {
        EntailmentTree { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[ProofStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of steps; each step concludes one intermediate node or the
    /// hypothesis, so this is the proof length.
    pub fn proof_length(&self) -> usize {
        self.steps.len()
    }

    pub fn is_complete(&self) -> bool {
        self.steps.last().map(|s| s.conclusion == NodeLabel::Hypothesis).unwrap_or(false)
    }

    /// Sentence indices used as leaves anywhere in the proof.
    pub fn leaf_sents(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for step in &self.steps {
            for p in &step.premises {
                if let NodeLabel::Sent(k) = p {
                    out.insert(*k);
                }
            }
        }
        out
    }

    /// Intermediate conclusions in step order, `(label index, text)`.
    pub fn intermediates(&self) -> Vec<(u32, &str)> {
        self.steps
            .iter()
            .filter_map(|s| match s.conclusion {
                NodeLabel::Int(k) => Some((k, s.text.as_str())),
                _ => None,
            })
            .collect()
    }

    /// The step concluding the given label, if any.
    pub fn step_for(&self, label: NodeLabel) -> Option<&ProofStep> {
        self.steps.iter().find(|s| s.conclusion == label)
    }
}

fn validate_step_local(i: usize, step: &ProofStep) -> Result<()> {
    if step.premises.is_empty() {
        return Err(TreeError::Invalid(format!("step {} has no premises", i + 1)));
    }
    let mut seen = BTreeSet::new();
    for p in &step.premises {
        if *p == NodeLabel::Hypothesis {
            return Err(TreeError::Invalid(format!("step {} uses hypothesis as a premise", i + 1)));
        }
        if !seen.insert(*p) {
            return Err(TreeError::Invalid(format!("step {} repeats premise {}", i + 1, p)));
        }
    }
    match step.conclusion {
        NodeLabel::Sent(_) => {
            return Err(TreeError::Invalid(format!("step {} concludes a sentence label", i + 1)));
        }
        NodeLabel::Hypothesis => {
            if !step.text.is_empty() {
                return Err(TreeError::Invalid("hypothesis step carries text".into()));
            }
        }
        NodeLabel::Int(_) => {
            if step.text.is_empty() {
                return Err(TreeError::Invalid(format!("step {} has an empty conclusion text", i + 1)));
            }
            if step.text.trim() != step.text {
                return Err(TreeError::Invalid(format!(
                    "step {} text has leading/trailing whitespace",
                    i + 1
                )));
            }
            if step.text.contains(';') || step.text.contains('\n') {
                return Err(TreeError::Invalid(format!(
                    "step {} text contains a reserved delimiter",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Steps must form a valid bottom-up prefix: intermediates are defined
/// before use and concluded at most once; the hypothesis, if concluded,
/// ends the prefix.
fn validate_prefix(steps: &[ProofStep]) -> Result<()> {
    let mut defined: BTreeSet<u32> = BTreeSet::new();
    for (i, step) in steps.iter().enumerate() {
        validate_step_local(i, step)?;
        for p in &step.premises {
            if let NodeLabel::Int(k) = p {
                if !defined.contains(k) {
                    return Err(TreeError::Invalid(format!(
                        "step {} uses int{} before it is concluded",
                        i + 1,
                        k
                    )));
                }
            }
        }
        match step.conclusion {
            NodeLabel::Int(k) => {
                if !defined.insert(k) {
                    return Err(TreeError::Invalid(format!("int{} concluded twice", k)));
                }
            }
            NodeLabel::Hypothesis => {
                if i + 1 != steps.len() {
                    return Err(TreeError::Invalid("steps continue after the hypothesis".into()));
                }
            }
            NodeLabel::Sent(_) => unreachable!(),
        }
    }
    Ok(())
}

/// A complete tree additionally concludes the hypothesis in its final step
/// and uses every intermediate after its defining step.
fn validate_complete(steps: &[ProofStep]) -> Result<()> {
    match steps.last() {
        None => return Err(TreeError::Invalid("empty proof".into())),
        Some(last) if last.conclusion != NodeLabel::Hypothesis => {
            return Err(TreeError::Invalid("proof does not conclude the hypothesis".into()));
        }
        _ => {}
    }
    let mut unused: BTreeSet<u32> = BTreeSet::new();
    for step in steps {
        for p in &step.premises {
            if let NodeLabel::Int(k) = p {
                unused.remove(k);
            }
        }
        if let NodeLabel::Int(k) = step.conclusion {
            unused.insert(k);
        }
    }
    if let Some(k) = unused.iter().next() {
        return Err(TreeError::Invalid(format!("int{} is concluded but never used", k)));
    }
    Ok(())
}

/// One benchmark instance: hypothesis, candidate sentences, gold proof.
#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentExample {
    pub id: String,
    pub hypothesis: String,
    /// Ordered `sent<k>` label → sentence text.
    pub sentences: IndexMap<String, String>,
    pub tree: EntailmentTree,
    /// Proof length; must equal `tree.proof_length()`.
    pub depth: usize,
    pub shape: Option<String>,
    /// Inference rule id per step, when the generator knows them.
    pub step_rules: Option<Vec<String>>,
}

impl EntailmentExample {
    pub fn validate(&self) -> Result<()> {
        if !self.tree.is_complete() {
            return Err(TreeError::Data(format!("example {}: gold tree is incomplete", self.id)));
        }
        for k in self.tree.leaf_sents() {
            let label = format!("sent{}", k);
            if !self.sentences.contains_key(&label) {
                return Err(TreeError::Data(format!(
                    "example {}: leaf {} not among candidate sentences",
                    self.id, label
                )));
            }
        }
        if self.depth != self.tree.proof_length() {
            return Err(TreeError::Data(format!(
                "example {}: depth {} does not match proof length {}",
                self.id,
                self.depth,
                self.tree.proof_length()
            )));
        }
        if let Some(rules) = &self.step_rules {
            if rules.len() != self.tree.steps().len() {
                return Err(TreeError::Data(format!(
                    "example {}: {} rule labels for {} steps",
                    self.id,
                    rules.len(),
                    self.tree.steps().len()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
