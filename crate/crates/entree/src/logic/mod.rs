//! Synthetic benchmark generator over family-relation rules.
//!
//! Proofs are built by backchaining a goal through the rule set to a fixed
//! depth along one spine (each step's conclusion feeds the next step),
//! grounding variables with distinct names, and verbalizing atoms through
//! fixed templates. Every emitted example is checked by an independent
//! forward-chaining oracle before it leaves the generator.

mod chain;
mod dataset;
mod text;
mod verify;

pub use chain::{backchain, instantiate, GroundedProof, GroundedStep, Skeleton, SkeletonStep};
pub use dataset::{generate_dataset, GenerateOptions};
pub use text::{verbalize_atom, verbalize_rule, NamePool};
pub use verify::{forward_chase, verify_proof, Violation};

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("rule parse error: {0}")]
    Parse(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Tree(#[from] crate::tree::TreeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LogicError>;

/// A term is either a variable (capitalized identifier) or a ground name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Name(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Name(n) => write!(f, "{}", n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Name(_)))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Name(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub antecedents: Vec<Atom>,
    pub consequent: Atom,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ants = self.antecedents.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" & ");
        write!(f, "{}: {} -> {}", self.id, ants, self.consequent)
    }
}

impl Rule {
    /// Every consequent variable must be bound by the antecedents.
    pub fn validate(&self) -> Result<()> {
        let bound: BTreeSet<&str> = self.antecedents.iter().flat_map(|a| a.vars()).collect();
        for v in self.consequent.vars() {
            if !bound.contains(v) {
                return Err(LogicError::Invalid(format!(
                    "rule {}: consequent variable {} not bound by antecedents",
                    self.id, v
                )));
            }
        }
        if self.antecedents.is_empty() {
            return Err(LogicError::Invalid(format!("rule {} has no antecedents", self.id)));
        }
        Ok(())
    }
}

/// The six family-relation rules the synthetic benchmark ships with.
pub fn default_rules() -> Vec<Rule> {
    parse_rules(
        "R1: child(B,A) -> parent(A,B)\n\
         R2: child(A,C) & parent(C,B) -> spouse(A,B)\n\
         R3: spouse(A,C) & parent(B,C) -> negspouse(A,B)\n\
         R4: relative(A,C) & child(C,B) -> relative(A,B)\n\
         R5: parent(A,C) & spouse(B,C) -> parent(A,B)\n\
         R6: parent(A,C) & parent(B,C) -> relative(A,B)",
    )
    .expect("default rules parse")
}

/// Parses the `id: ant1 & ant2 -> cons` line format; `#` starts a comment.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    let mut ids = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rule = parse_rule_line(line)
            .map_err(|e| LogicError::Parse(format!("line {}: {}", lineno + 1, e)))?;
        rule.validate()?;
        if !ids.insert(rule.id.clone()) {
            return Err(LogicError::Parse(format!("duplicate rule id {}", rule.id)));
        }
        rules.push(rule);
    }
    if rules.is_empty() {
        return Err(LogicError::Parse("no rules found".into()));
    }
    Ok(rules)
}

fn parse_rule_line(line: &str) -> std::result::Result<Rule, String> {
    let (id, rest) = line.split_once(':').ok_or("missing ':' after rule id")?;
    let (ants, cons) = rest.split_once("->").ok_or("missing '->'")?;
    let antecedents = ants
        .split('&')
        .map(|s| parse_atom(s.trim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let consequent = parse_atom(cons.trim())?;
    Ok(Rule { id: id.trim().to_string(), antecedents, consequent })
}

pub fn parse_atom(s: &str) -> std::result::Result<Atom, String> {
    let open = s.find('(').ok_or_else(|| format!("atom '{}' missing '('", s))?;
    if !s.ends_with(')') {
        return Err(format!("atom '{}' missing ')'", s));
    }
    let pred = s[..open].trim();
    if pred.is_empty() || !pred.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad predicate name in '{}'", s));
    }
    let args = s[open + 1..s.len() - 1]
        .split(',')
        .map(|a| {
            let a = a.trim();
            if a.is_empty() || !a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(format!("bad argument in '{}'", s));
            }
            if a.chars().next().unwrap().is_ascii_uppercase() {
                Ok(Term::Var(a.to_string()))
            } else {
                Ok(Term::Name(a.to_string()))
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if args.is_empty() {
        return Err(format!("atom '{}' has no arguments", s));
    }
    Ok(Atom { pred: pred.to_string(), args })
}

// ── unification ──────────────────────────────────────────────────────

pub type Subst = std::collections::BTreeMap<String, Term>;

/// Resolves a term through the substitution until it stops changing.
pub fn walk(t: &Term, s: &Subst) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match s.get(v) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

pub fn apply_subst(atom: &Atom, s: &Subst) -> Atom {
    Atom {
        pred: atom.pred.clone(),
        args: atom.args.iter().map(|t| walk(t, s)).collect(),
    }
}

/// Flat-term unification; extends `s` on success, may leave partial
/// bindings on failure (callers clone when they need to roll back).
pub fn unify(a: &Atom, b: &Atom, s: &mut Subst) -> bool {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return false;
    }
    for (ta, tb) in a.args.iter().zip(&b.args) {
        let ra = walk(ta, s);
        let rb = walk(tb, s);
        match (ra, rb) {
            (Term::Name(x), Term::Name(y)) => {
                if x != y {
                    return false;
                }
            }
            (Term::Var(v), other) | (other, Term::Var(v)) => {
                if other != Term::Var(v.clone()) {
                    s.insert(v, other);
                }
            }
        }
    }
    true
}
