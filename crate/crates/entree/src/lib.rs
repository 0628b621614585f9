//! Entailment-tree lab.
//!
//! A self-contained workbench for generating structured explanations
//! (entailment trees) with a small encoder-decoder transformer whose upper
//! encoder layers route tokens to specialized attention heads through
//! dynamic, similarity-gated masks. The crate bundles everything needed to
//! run compositional-generalization experiments on a single CPU:
//!
//! - [`tensor`] — dense `f64` tensors with a reverse-mode gradient tape,
//!   the neural primitives the model needs, Adam, and a finite-difference
//!   gradient checker.
//! - [`model`] — the encoder-decoder itself: plain lower blocks, routed
//!   upper blocks, a causal decoder with cross-attention, beam search, and
//!   a portable checkpoint format.
//! - [`tree`] — the entailment-tree data model, tokenizer/vocabulary,
//!   bidirectional proof linearization, shape signatures, and
//!   compositional train/finetune/test partitioning.
//! - [`logic`] — a synthetic benchmark generator that backchains family
//!   relation rules into proofs, verbalizes them from templates, and
//!   verifies every emitted proof with an independent forward-chaining
//!   oracle.
//! - [`metrics`] — greedy tree alignment plus Leaves / Steps /
//!   Intermediates F1 and AllCorrect scoring, with an exhaustive alignment
//!   oracle for small trees.
//! - [`train`] — training, fine-tuning, zero-shot evaluation, and the
//!   parameter-freeze ablations.
//! - [`analysis`] — head-knockout rule correlation, mask sparsity
//!   statistics, and the random-mask control.
//! - [`cli`] — the `entree` command-line entry point wiring it together.
//!
//! See `examples/` for one runnable program per capability.

pub mod analysis;
pub mod cli;
pub mod logic;
pub mod metrics;
pub mod model;
pub mod tensor;
pub mod train;
pub mod tree;
