//! Independent proof verification by forward chaining.
//!
//! Accepts a grounded proof iff (i) each step's premises were available
//! (leaves or earlier conclusions), (ii) each step's conclusion follows
//! from exactly its listed premises via its labeled rule under one
//! consistent substitution, (iii) the last conclusion is the goal, and
//! (iv) the goal is in the forward-chaining closure of the leaf facts —
//! a derivation route independent of the recorded steps.

use super::{unify, Atom, GroundedProof, Rule, Subst};
use std::collections::BTreeSet;

/// First violation found, as a human-readable description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Tries to derive `conclusion` from exactly `premises` via `rule`:
/// some assignment of premises to antecedents must unify consistently.
pub fn step_matches_rule(rule: &Rule, premises: &[Atom], conclusion: &Atom) -> bool {
    if rule.antecedents.len() != premises.len() {
        return false;
    }
    permutations(premises.len()).into_iter().any(|perm| {
        let mut s = Subst::new();
        for (ant, &pi) in rule.antecedents.iter().zip(&perm) {
            if !unify(ant, &premises[pi], &mut s) {
                return false;
            }
        }
        unify(&rule.consequent, conclusion, &mut s)
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Ground closure of `facts` under `rules` (naive fixpoint). Iteration and
/// size budgets keep pathological rule sets from running away.
pub fn forward_chase(facts: &[Atom], rules: &[Rule]) -> Result<BTreeSet<Atom>, Violation> {
    let mut known: BTreeSet<Atom> = facts.iter().cloned().collect();
    for _round in 0..100 {
        let mut fresh: Vec<Atom> = Vec::new();
        for rule in rules {
            let mut bindings: Vec<Subst> = vec![Subst::new()];
            for ant in &rule.antecedents {
                let mut next = Vec::new();
                for s in &bindings {
                    for fact in &known {
                        let mut s2 = s.clone();
                        if unify(ant, fact, &mut s2) {
                            next.push(s2);
                        }
                    }
                }
                bindings = next;
                if bindings.is_empty() {
                    break;
                }
            }
            for s in bindings {
                let derived = super::apply_subst(&rule.consequent, &s);
                if derived.is_ground() && !known.contains(&derived) {
                    fresh.push(derived);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(known);
        }
        known.extend(fresh);
        if known.len() > 10_000 {
            return Err(Violation("forward chase exceeded the size budget".into()));
        }
    }
    Err(Violation("forward chase exceeded the iteration budget".into()))
}

/// Full check; `Ok(())` means the proof is sound.
pub fn verify_proof(proof: &GroundedProof, rules: &[Rule]) -> Result<(), Violation> {
    let mut available: BTreeSet<Atom> = proof.leaves.iter().cloned().collect();
    for (i, step) in proof.steps.iter().enumerate() {
        for p in &step.premises {
            if !p.is_ground() {
                return Err(Violation(format!("step {}: premise {} is not ground", i + 1, p)));
            }
            if !available.contains(p) {
                return Err(Violation(format!(
                    "step {}: premise {} is neither a leaf nor an earlier conclusion",
                    i + 1,
                    p
                )));
            }
        }
        let rule = match rules.iter().find(|r| r.id == step.rule_id) {
            Some(r) => r,
            None => return Err(Violation(format!("step {}: unknown rule {}", i + 1, step.rule_id))),
        };
        if !step_matches_rule(rule, &step.premises, &step.conclusion) {
            return Err(Violation(format!(
                "step {}: {} does not follow from {:?} via {}",
                i + 1,
                step.conclusion,
                step.premises.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                rule.id
            )));
        }
        available.insert(step.conclusion.clone());
    }
    match proof.steps.last() {
        None => return Err(Violation("proof has no steps".into())),
        Some(last) if last.conclusion != proof.goal => {
            return Err(Violation(format!(
                "final conclusion {} does not match goal {}",
                last.conclusion, proof.goal
            )));
        }
        _ => {}
    }
    // independent route: the goal must be forward-derivable from the leaves
    let closure = forward_chase(&proof.leaves, rules)?;
    if !closure.contains(&proof.goal) {
        return Err(Violation(format!(
            "goal {} is not in the forward-chaining closure of the leaves",
            proof.goal
        )));
    }
    Ok(())
}
