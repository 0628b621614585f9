//! Backward rule chaining and grounding.

use super::{apply_subst, unify, Atom, LogicError, Result, Rule, Subst, Term};
use crate::logic::text::NamePool;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// A symbolic proof skeleton: steps bottom-up, atoms may contain variables.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub steps: Vec<SkeletonStep>,
    pub goal: Atom,
}

#[derive(Debug, Clone)]
pub struct SkeletonStep {
    pub rule_id: String,
    pub antecedents: Vec<Atom>,
    pub conclusion: Atom,
}

/// A fully grounded proof ready for verbalization.
#[derive(Debug, Clone)]
pub struct GroundedProof {
    /// Leaf facts in first-use order (bottom-up).
    pub leaves: Vec<Atom>,
    pub steps: Vec<GroundedStep>,
    pub goal: Atom,
}

#[derive(Debug, Clone)]
pub struct GroundedStep {
    pub rule_id: String,
    pub premises: Vec<Atom>,
    pub conclusion: Atom,
}

fn fresh_rule(rule: &Rule, counter: &mut usize) -> Rule {
    *counter += 1;
    let suffix = format!("_{}", counter);
    let rename = |a: &Atom| Atom {
        pred: a.pred.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(format!("{}{}", v, suffix)),
                Term::Name(n) => Term::Name(n.clone()),
            })
            .collect(),
    };
    Rule {
        id: rule.id.clone(),
        antecedents: rule.antecedents.iter().map(&rename).collect(),
        consequent: rename(&rule.consequent),
    }
}

/// `feasible[p]` holds the depths reachable with a spine ending in
/// predicate `p`: depth 1 needs a rule concluding `p`; depth k needs a
/// rule concluding `p` with some antecedent predicate feasible at k-1.
fn feasibility(rules: &[Rule], max_depth: usize) -> BTreeMap<String, BTreeSet<usize>> {
    let mut feasible: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for r in rules {
        feasible.entry(r.consequent.pred.clone()).or_default().insert(1);
    }
    for depth in 2..=max_depth {
        for r in rules {
            let ok = r.antecedents.iter().any(|a| {
                feasible.get(&a.pred).map(|s| s.contains(&(depth - 1))).unwrap_or(false)
            });
            if ok {
                feasible.entry(r.consequent.pred.clone()).or_default().insert(depth);
            }
        }
    }
    feasible
}

/// Expands exactly `depth` rule applications along one spine: the goal is
/// concluded by the top step, one antecedent of each step is derived by
/// the step below it, and all remaining antecedents become leaves.
/// Rule choices are uniform over the rules whose consequent unifies with
/// the open premise (and which can still support the remaining depth).
pub fn backchain<R: Rng>(rules: &[Rule], depth: usize, rng: &mut R) -> Result<Skeleton> {
    if depth < 1 {
        return Err(LogicError::Generation("depth must be >= 1".into()));
    }
    let feasible = feasibility(rules, depth);
    let goal_preds: Vec<&str> = feasible
        .iter()
        .filter(|(_, depths)| depths.contains(&depth))
        .map(|(p, _)| p.as_str())
        .collect();
    if goal_preds.is_empty() {
        return Err(LogicError::Generation(format!(
            "no predicate supports a depth-{} chain under this rule set",
            depth
        )));
    }

    // bounded retries guard against rule sets where a sampled branch can
    // still dead-end despite predicate-level feasibility
    for _attempt in 0..50 {
        let goal_pred = *goal_preds.choose(rng).expect("nonempty");
        let arity = rules
            .iter()
            .find(|r| r.consequent.pred == goal_pred)
            .map(|r| r.consequent.args.len())
            .unwrap();
        let mut counter = 0usize;
        let goal = Atom {
            pred: goal_pred.to_string(),
            args: (0..arity).map(|i| Term::Var(format!("G{}", i))).collect(),
        };
        let mut subst = Subst::new();
        let mut steps_topdown: Vec<SkeletonStep> = Vec::new();
        if expand(rules, &feasible, &goal, depth, rng, &mut counter, &mut subst, &mut steps_topdown) {
            let mut steps: Vec<SkeletonStep> = steps_topdown
                .into_iter()
                .rev()
                .map(|s| SkeletonStep {
                    rule_id: s.rule_id,
                    antecedents: s.antecedents.iter().map(|a| apply_subst(a, &subst)).collect(),
                    conclusion: apply_subst(&s.conclusion, &subst),
                })
                .collect();
            let goal = apply_subst(&goal, &subst);
            normalize_vars(&mut steps);
            let goal = renormalize_atom(&goal, &steps);
            return Ok(Skeleton { steps, goal });
        }
    }
    Err(LogicError::Generation(format!("could not build a depth-{} chain after 50 attempts", depth)))
}

#[allow(clippy::too_many_arguments)]
fn expand<R: Rng>(
    rules: &[Rule],
    feasible: &BTreeMap<String, BTreeSet<usize>>,
    open: &Atom,
    remaining: usize,
    rng: &mut R,
    counter: &mut usize,
    subst: &mut Subst,
    out_topdown: &mut Vec<SkeletonStep>,
) -> bool {
    let candidates: Vec<Rule> = rules
        .iter()
        .filter(|r| r.consequent.pred == open.pred)
        .filter(|r| {
            remaining == 1
                || r.antecedents.iter().any(|a| {
                    feasible.get(&a.pred).map(|s| s.contains(&(remaining - 1))).unwrap_or(false)
                })
        })
        .cloned()
        .collect();
    if candidates.is_empty() {
        return false;
    }
    let rule = fresh_rule(candidates.choose(rng).unwrap(), counter);
    if !unify(&rule.consequent, open, subst) {
        return false;
    }
    out_topdown.push(SkeletonStep {
        rule_id: rule.id.clone(),
        antecedents: rule.antecedents.clone(),
        conclusion: rule.consequent.clone(),
    });
    if remaining == 1 {
        return true;
    }
    let spine_options: Vec<&Atom> = rule
        .antecedents
        .iter()
        .filter(|a| feasible.get(&a.pred).map(|s| s.contains(&(remaining - 1))).unwrap_or(false))
        .collect();
    if spine_options.is_empty() {
        return false;
    }
    let spine = (*spine_options.choose(rng).unwrap()).clone();
    expand(rules, feasible, &spine, remaining - 1, rng, counter, subst, out_topdown)
}

/// Renames the suffixed fresh variables to stable `V1, V2, ...` in first
/// occurrence order (bottom-up), so instantiation is deterministic.
fn normalize_vars(steps: &mut [SkeletonStep]) {
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    let visit = |atom: &Atom, mapping: &mut BTreeMap<String, String>| {
        for v in atom.vars() {
            if !mapping.contains_key(v) {
                let fresh = format!("V{}", mapping.len() + 1);
                mapping.insert(v.to_string(), fresh);
            }
        }
    };
    for step in steps.iter() {
        for a in &step.antecedents {
            visit(a, &mut mapping);
        }
        visit(&step.conclusion, &mut mapping);
    }
    let rename = |atom: &Atom| Atom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(mapping[v].clone()),
                Term::Name(n) => Term::Name(n.clone()),
            })
            .collect(),
    };
    for step in steps.iter_mut() {
        step.antecedents = step.antecedents.iter().map(&rename).collect();
        step.conclusion = rename(&step.conclusion);
    }
}

fn renormalize_atom(goal: &Atom, steps: &[SkeletonStep]) -> Atom {
    // the goal equals the last step's conclusion after normalization
    steps.last().map(|s| s.conclusion.clone()).unwrap_or_else(|| goal.clone())
}

/// Grounds a skeleton with distinct names per distinct variable, sampled
/// without replacement from the pool.
pub fn instantiate<R: Rng>(skeleton: &Skeleton, pool: &NamePool, rng: &mut R) -> Result<GroundedProof> {
    let mut vars: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut collect = |atom: &Atom| {
        for v in atom.vars() {
            if seen.insert(v.to_string()) {
                vars.push(v.to_string());
            }
        }
    };
    for step in &skeleton.steps {
        for a in &step.antecedents {
            collect(a);
        }
        collect(&step.conclusion);
    }
    if pool.len() < vars.len() {
        return Err(LogicError::Generation(format!(
            "name pool exhausted: {} variables, {} names",
            vars.len(),
            pool.len()
        )));
    }
    let names = pool.sample_distinct(vars.len(), rng);
    let subst: Subst = vars
        .into_iter()
        .zip(names.into_iter().map(Term::Name))
        .collect();

    let steps: Vec<GroundedStep> = skeleton
        .steps
        .iter()
        .map(|s| GroundedStep {
            rule_id: s.rule_id.clone(),
            premises: s.antecedents.iter().map(|a| apply_subst(a, &subst)).collect(),
            conclusion: apply_subst(&s.conclusion, &subst),
        })
        .collect();
    let goal = apply_subst(&skeleton.goal, &subst);

    // leaves: premises not concluded by an earlier step, bottom-up order
    let mut derived: BTreeSet<Atom> = BTreeSet::new();
    let mut leaves: Vec<Atom> = Vec::new();
    for step in &steps {
        for p in &step.premises {
            if !derived.contains(p) && !leaves.contains(p) {
                leaves.push(p.clone());
            }
        }
        derived.insert(step.conclusion.clone());
    }
    for (i, step) in steps.iter().enumerate() {
        if !step.conclusion.is_ground() {
            return Err(LogicError::Generation(format!("step {} not fully grounded", i + 1)));
        }
    }
    Ok(GroundedProof { leaves, steps, goal })
}
