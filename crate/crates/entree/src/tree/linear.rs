//! Proof linearization and its inverse.
//!
//! Format, leaves to root, steps joined by `"; "`:
//!
//! ```text
//! sent1 & sent4 -> int1: <text>; sent3 & int1 -> int2: <text>; sent2 & int2 -> hypothesis
//! ```
//!
//! Strict parsing rejects any malformed input with a 1-based token
//! position. Salvage parsing keeps the longest valid step prefix — model
//! output is not guaranteed to be well-formed — and flags whether anything
//! was dropped.

use super::token::tokenize_spans;
use super::{EntailmentTree, NodeLabel, ProofStep, Result, TreeError};

/// Renders a complete tree; fails on any invariant violation.
pub fn linearize(tree: &EntailmentTree) -> Result<String> {
    // revalidate: callers may have constructed steps by hand
    let rebuilt = EntailmentTree::new(tree.steps().to_vec())?;
    let mut parts = Vec::with_capacity(rebuilt.steps().len());
    for step in rebuilt.steps() {
        let premises = step
            .premises
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" & ");
        let part = match step.conclusion {
            NodeLabel::Hypothesis => format!("{} -> hypothesis", premises),
            conclusion => format!("{} -> {}: {}", premises, conclusion, step.text),
        };
        parts.push(part);
    }
    Ok(parts.join("; "))
}

pub struct SalvageOutcome {
    pub tree: EntailmentTree,
    /// True when any suffix of the input had to be dropped.
    pub salvaged: bool,
}

/// Rejects on the first syntax or validity problem; positions are 1-based
/// token indices into the input.
pub fn parse_strict(input: &str) -> Result<EntailmentTree> {
    let steps = Parser::new(input).run_strict()?;
    EntailmentTree::new(steps)
}

/// Never fails: keeps the longest prefix of steps that forms a valid
/// partial tree and drops the rest.
pub fn parse_salvage(input: &str) -> SalvageOutcome {
    Parser::new(input).run_salvage()
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<(String, std::ops::Range<usize>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { input, tokens: tokenize_spans(input), pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> TreeError {
        TreeError::Parse { position: self.pos + 1, message: message.into() }
    }

    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(|(t, _)| t.as_str())
    }

    fn bump(&mut self) -> Option<&str> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.as_str());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == token => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected '{}', found '{}'", token, t))),
            None => Err(self.err(format!("expected '{}', found end of input", token))),
        }
    }

    fn premise_label(&mut self) -> Result<NodeLabel> {
        match self.peek() {
            None => Err(self.err("expected a premise label, found end of input")),
            Some(t) => match NodeLabel::parse(t) {
                Some(NodeLabel::Hypothesis) | None => {
                    Err(self.err(format!("expected a sent*/int* premise label, found '{}'", self.peek().unwrap())))
                }
                Some(label) => {
                    self.pos += 1;
                    Ok(label)
                }
            },
        }
    }

    /// Parses one step. `defined` holds the int indices concluded so far;
    /// the caller updates it on success.
    fn step(&mut self, defined: &[u32]) -> Result<ProofStep> {
        let mut premises = vec![self.checked_premise(defined)?];
        while self.peek() == Some("&") {
            self.pos += 1;
            let p = self.checked_premise(defined)?;
            if premises.contains(&p) {
                self.pos -= 1;
                return Err(self.err(format!("premise {} repeated within a step", p)));
            }
            premises.push(p);
        }
        self.expect("->")?;
        match self.peek() {
            None => Err(self.err("expected a conclusion label, found end of input")),
            Some("hypothesis") => {
                self.pos += 1;
                Ok(ProofStep { premises, conclusion: NodeLabel::Hypothesis, text: String::new() })
            }
            Some(t) => match NodeLabel::parse(t) {
                Some(NodeLabel::Int(k)) => {
                    if defined.contains(&k) {
                        return Err(self.err(format!("int{} concluded twice", k)));
                    }
                    self.pos += 1;
                    self.expect(":")?;
                    let text = self.conclusion_text()?;
                    Ok(ProofStep { premises, conclusion: NodeLabel::Int(k), text })
                }
                _ => Err(self.err(format!("expected int*/hypothesis conclusion, found '{}'", t))),
            },
        }
    }

    fn checked_premise(&mut self, defined: &[u32]) -> Result<NodeLabel> {
        let label = self.premise_label()?;
        if let NodeLabel::Int(k) = label {
            if !defined.contains(&k) {
                self.pos -= 1;
                return Err(self.err(format!("int{} used before it is concluded", k)));
            }
        }
        Ok(label)
    }

    /// Consumes tokens until `;` or end of input and returns the exact
    /// source slice they span, so interior spacing survives a roundtrip.
    fn conclusion_text(&mut self) -> Result<String> {
        let start = self.pos;
        while let Some(t) = self.peek() {
            if t == ";" {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected conclusion text"));
        }
        let lo = self.tokens[start].1.start;
        let hi = self.tokens[self.pos - 1].1.end;
        Ok(self.input[lo..hi].to_string())
    }

    fn run_strict(mut self) -> Result<Vec<ProofStep>> {
        let mut steps = Vec::new();
        let mut defined: Vec<u32> = Vec::new();
        if self.tokens.is_empty() {
            return Err(self.err("empty proof"));
        }
        loop {
            let step = self.step(&defined)?;
            let done = step.conclusion == NodeLabel::Hypothesis;
            if let NodeLabel::Int(k) = step.conclusion {
                defined.push(k);
            }
            steps.push(step);
            match self.bump().map(|t| t.to_string()) {
                None => break,
                Some(t) if t == ";" => {
                    if done {
                        self.pos -= 1;
                        return Err(self.err("steps continue after the hypothesis"));
                    }
                    if self.peek().is_none() {
                        return Err(self.err("trailing ';'"));
                    }
                }
                Some(t) => {
                    self.pos -= 1;
                    return Err(self.err(format!("expected ';' between steps, found '{}'", t)));
                }
            }
        }
        Ok(steps)
    }

    fn run_salvage(mut self) -> SalvageOutcome {
        let mut tree = EntailmentTree::empty();
        let mut defined: Vec<u32> = Vec::new();
        let mut clean_end = self.tokens.is_empty();
        loop {
            let mark = self.pos;
            match self.step(&defined) {
                Err(_) => {
                    self.pos = mark;
                    break;
                }
                Ok(step) => {
                    // re-check the extended prefix as a whole; drops the
                    // step on anything the token-level checks missed
                    let mut steps = tree.steps().to_vec();
                    steps.push(step.clone());
                    match EntailmentTree::partial(steps) {
                        Ok(t) => tree = t,
                        Err(_) => {
                            self.pos = mark;
                            break;
                        }
                    }
                    let done = step.conclusion == NodeLabel::Hypothesis;
                    if let NodeLabel::Int(k) = step.conclusion {
                        defined.push(k);
                    }
                    match self.peek() {
                        None => {
                            clean_end = true;
                            break;
                        }
                        Some(";") if !done => {
                            self.pos += 1;
                            if self.peek().is_none() {
                                break; // trailing ';' dropped
                            }
                        }
                        _ => break, // hypothesis reached or junk follows
                    }
                }
            }
        }
        SalvageOutcome { tree, salvaged: !clean_end }
    }
}
