//! Proof-shape signatures and the shape registry.
//!
//! The signature lists each step's child kinds bottom-up, sorted within a
//! step (`I` = intermediate before `L` = leaf): a two-step chain is
//! `[LL][IL]`, a balanced three-step tree `[LL][LL][II]`.
//!
//! Primitive shapes A1–A3 are the minimal one- and two-level topologies.
//! Compositional shapes are built from two primitives: either joined under
//! a fresh root (`compose_sig_root`, used for B1, combining trees of
//! unequal depth at the top) or by feeding one tree's root in as a leaf of
//! the other's lowest step (`compose_sig_leaf`, used for B2/B3).
//!
//! B3 defaults to A1+A3; the alternative A1+A2 reading ships as `B3alt`
//! so either interpretation can be selected via a registry file.

use super::{EntailmentTree, NodeLabel, Result, TreeError};
use indexmap::IndexMap;
use std::path::Path;

pub fn shape_signature(tree: &EntailmentTree) -> String {
    let mut sig = String::new();
    for step in tree.steps() {
        let mut kinds: Vec<char> = step
            .premises
            .iter()
            .map(|p| match p {
                NodeLabel::Sent(_) => 'L',
                NodeLabel::Int(_) => 'I',
                NodeLabel::Hypothesis => 'I',
            })
            .collect();
        kinds.sort();
        sig.push('[');
        sig.extend(kinds);
        sig.push(']');
    }
    sig
}

/// Signature of two proofs joined by a fresh root step.
pub fn compose_sig_root(x: &str, y: &str) -> String {
    format!("{}{}[II]", x, y)
}

/// Signature of proof `x` whose root replaces one leaf of `y`'s first step.
pub fn compose_sig_leaf(x: &str, y: &str) -> String {
    let first_end = y.find(']').expect("signature has a step");
    let (first, rest) = y.split_at(first_end + 1);
    let modified = first.replacen('L', "I", 1);
    format!("{}{}{}", x, modified, rest)
}

pub const A1: &str = "[LL]";
pub const A2: &str = "[LL][IL]";
pub const A3: &str = "[LL][LL][II]";

/// Maps shape codes to signatures; lookup is by signature.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRegistry {
    entries: IndexMap<String, String>,
}

impl Default for ShapeRegistry {
    fn default() -> Self {
        let mut entries = IndexMap::new();
        entries.insert("A1".to_string(), A1.to_string());
        entries.insert("A2".to_string(), A2.to_string());
        entries.insert("A3".to_string(), A3.to_string());
        entries.insert("B1".to_string(), compose_sig_root(A1, A2));
        entries.insert("B2".to_string(), compose_sig_leaf(A2, A3));
        entries.insert("B3".to_string(), compose_sig_leaf(A1, A3));
        entries.insert("B3alt".to_string(), compose_sig_leaf(A1, A2));
        ShapeRegistry { entries }
    }
}

impl ShapeRegistry {
    /// Loads `{"code": "signature", ...}` from JSON, replacing the defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let entries: IndexMap<String, String> = serde_json::from_str(&text)?;
        if entries.is_empty() {
            return Err(TreeError::Data("shape registry file is empty".into()));
        }
        Ok(ShapeRegistry { entries })
    }

    pub fn signature_of(&self, code: &str) -> Option<&str> {
        self.entries.get(code).map(|s| s.as_str())
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    /// Shape code for a tree, or `"Other"` if no signature matches.
    pub fn classify(&self, tree: &EntailmentTree) -> String {
        let sig = shape_signature(tree);
        for (code, s) in &self.entries {
            if *s == sig {
                return code.clone();
            }
        }
        "Other".to_string()
    }
}
