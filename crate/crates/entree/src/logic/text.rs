//! Verbalization templates and the name pool.

use super::{Atom, LogicError, Result, Rule, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::Path;

const DEFAULT_NAMES: &str = include_str!("data/names.txt");

/// Distinct lowercase first names; instantiation samples without
/// replacement within one example.
#[derive(Debug, Clone)]
pub struct NamePool {
    names: Vec<String>,
}

impl Default for NamePool {
    fn default() -> Self {
        NamePool::from_text(DEFAULT_NAMES).expect("bundled name pool is valid")
    }
}

impl NamePool {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for line in text.lines() {
            let name = line.trim();
            if name.is_empty() {
                continue;
            }
            if name.chars().any(|c| !c.is_ascii_lowercase()) {
                return Err(LogicError::Invalid(format!("name '{}' is not lowercase ascii", name)));
            }
            if !seen.insert(name.to_string()) {
                return Err(LogicError::Invalid(format!("duplicate name '{}'", name)));
            }
            names.push(name.to_string());
        }
        if names.is_empty() {
            return Err(LogicError::Invalid("empty name pool".into()));
        }
        Ok(NamePool { names })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn sample_distinct<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<String> {
        let mut picks: Vec<&String> = self.names.iter().collect();
        picks.shuffle(rng);
        picks.into_iter().take(count).cloned().collect()
    }
}

fn term_text(t: &Term) -> String {
    t.to_string()
}

/// Renders a ground (or degrounded) atom through the fixed templates.
pub fn verbalize_atom(atom: &Atom) -> Result<String> {
    if atom.args.len() != 2 {
        return Err(LogicError::Invalid(format!(
            "no template for {}-ary predicate {}",
            atom.args.len(),
            atom.pred
        )));
    }
    let a = term_text(&atom.args[0]);
    let b = term_text(&atom.args[1]);
    let text = match atom.pred.as_str() {
        "parent" => format!("{} is the parent of {}", a, b),
        "child" => format!("{} is the child of {}", a, b),
        "spouse" => format!("{} is the spouse of {}", a, b),
        "negspouse" => format!("{} is not the spouse of {}", a, b),
        "relative" => format!("{} is a relative of {}", a, b),
        other => return Err(LogicError::Invalid(format!("unknown predicate '{}'", other))),
    };
    Ok(text)
}

/// Renders a rule with its variables left in place, e.g.
/// `if B is the child of A then A is the parent of B`.
pub fn verbalize_rule(rule: &Rule) -> Result<String> {
    let ants = rule
        .antecedents
        .iter()
        .map(verbalize_atom)
        .collect::<Result<Vec<_>>>()?
        .join(" and ");
    Ok(format!("if {} then {}", ants, verbalize_atom(&rule.consequent)?))
}
