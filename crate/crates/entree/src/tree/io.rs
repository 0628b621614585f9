//! JSON Lines dataset format, one example per line:
//!
//! ```json
//! {"id": "...", "hypothesis": "...", "sentences": {"sent1": "..."},
//!  "proof": "<linearization>", "depth": 2, "shape": null, "step_rules": null}
//! ```
//!
//! The same shape doubles as the import format for externally prepared
//! entailment-tree data.

use super::{linearize, parse_strict, EntailmentExample, Result, TreeError};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    hypothesis: String,
    sentences: IndexMap<String, String>,
    proof: String,
    depth: usize,
    shape: Option<String>,
    step_rules: Option<Vec<String>>,
}

pub fn example_to_line(ex: &EntailmentExample) -> Result<String> {
    let record = Record {
        id: ex.id.clone(),
        hypothesis: ex.hypothesis.clone(),
        sentences: ex.sentences.clone(),
        proof: linearize(&ex.tree)?,
        depth: ex.depth,
        shape: ex.shape.clone(),
        step_rules: ex.step_rules.clone(),
    };
    Ok(serde_json::to_string(&record)?)
}

pub fn example_from_line(line: &str) -> Result<EntailmentExample> {
    let record: Record = serde_json::from_str(line)?;
    let tree = parse_strict(&record.proof).map_err(|e| {
        TreeError::Data(format!("example {}: bad proof: {}", record.id, e))
    })?;
    let ex = EntailmentExample {
        id: record.id,
        hypothesis: record.hypothesis,
        sentences: record.sentences,
        tree,
        depth: record.depth,
        shape: record.shape,
        step_rules: record.step_rules,
    };
    ex.validate()?;
    Ok(ex)
}

pub fn write_jsonl(path: &Path, examples: &[EntailmentExample]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for ex in examples {
        writeln!(out, "{}", example_to_line(ex)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<EntailmentExample>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(example_from_line(&line).map_err(|e| {
            TreeError::Data(format!("{}:{}: {}", path.display(), i + 1, e))
        })?);
    }
    Ok(out)
}
