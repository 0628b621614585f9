use super::shape::{shape_signature, ShapeRegistry};
use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn step(premises: &[NodeLabel], conclusion: NodeLabel, text: &str) -> ProofStep {
    ProofStep { premises: premises.to_vec(), conclusion, text: text.to_string() }
}

fn fig1_tree() -> EntailmentTree {
    EntailmentTree::new(vec![
        step(
            &[NodeLabel::Sent(1), NodeLabel::Sent(4)],
            NodeLabel::Int(1),
            "puddles of water will receive sunlight",
        ),
        step(
            &[NodeLabel::Sent(3), NodeLabel::Int(1)],
            NodeLabel::Int(2),
            "the puddles of water will increase in temperature",
        ),
        step(&[NodeLabel::Sent(2), NodeLabel::Int(2)], NodeLabel::Hypothesis, ""),
    ])
    .unwrap()
}

#[test]
fn tokenize_keeps_structural_tokens_atomic() {
    assert_eq!(
        tokenize("sent1 & sent2 -> int1: a b"),
        vec!["sent1", "&", "sent2", "->", "int1", ":", "a", "b"]
    );
}

#[test]
fn tokenize_empty_and_case() {
    assert!(tokenize("").is_empty());
    assert_eq!(tokenize("The Water, warms."), vec!["the", "water", ",", "warms", "."]);
}

#[test]
fn vocabulary_roundtrips_all_ids() {
    let corpus = ["alice is the parent of bob", "bob is a relative of carol"];
    let vocab = Vocabulary::build(corpus.iter().copied(), 1, 8);
    for id in 0..vocab.size() as u32 {
        assert_eq!(vocab.id(vocab.token(id)), id);
    }
    assert_eq!(vocab.id("<pad>"), PAD);
    assert_eq!(vocab.id("->"), ARROW);
    assert_eq!(vocab.id("hypothesis"), HYP);
    assert_eq!(vocab.id("sent1"), vocab.sent_id(1).unwrap());
    assert_eq!(vocab.id("int8"), vocab.int_id(8).unwrap());
    assert_eq!(vocab.id("never-seen-token"), UNK);
}

#[test]
fn linearize_matches_reference_string() {
    let expect = "sent1 & sent4 -> int1: puddles of water will receive sunlight; \
                  sent3 & int1 -> int2: the puddles of water will increase in temperature; \
                  sent2 & int2 -> hypothesis";
    assert_eq!(linearize(&fig1_tree()).unwrap(), expect);
}

#[test]
fn linearize_single_step() {
    let t = EntailmentTree::new(vec![step(
        &[NodeLabel::Sent(1), NodeLabel::Sent(2)],
        NodeLabel::Hypothesis,
        "",
    )])
    .unwrap();
    assert_eq!(linearize(&t).unwrap(), "sent1 & sent2 -> hypothesis");
}

#[test]
fn linearize_three_premise_step_roundtrips() {
    let t = EntailmentTree::new(vec![
        step(
            &[NodeLabel::Sent(1), NodeLabel::Sent(2), NodeLabel::Sent(3)],
            NodeLabel::Int(1),
            "x y z",
        ),
        step(&[NodeLabel::Int(1), NodeLabel::Sent(4)], NodeLabel::Hypothesis, ""),
    ])
    .unwrap();
    let s = linearize(&t).unwrap();
    assert!(s.starts_with("sent1 & sent2 & sent3 -> int1: x y z"));
    assert_eq!(parse_strict(&s).unwrap(), t);
}

#[test]
fn linearize_rejects_invalid_trees() {
    // dangling intermediate
    let t = EntailmentTree::partial(vec![step(
        &[NodeLabel::Sent(1), NodeLabel::Sent(2)],
        NodeLabel::Int(1),
        "x",
    )])
    .unwrap();
    assert!(linearize(&t).is_err());
}

#[test]
fn parse_roundtrip_on_reference_tree() {
    let t = fig1_tree();
    assert_eq!(parse_strict(&linearize(&t).unwrap()).unwrap(), t);
}

#[test]
fn strict_parse_reports_token_position() {
    match parse_strict("sent1 & -> int1: x") {
        Err(TreeError::Parse { position, .. }) => assert_eq!(position, 3),
        other => panic!("expected parse error, got {:?}", other),
    }
}

#[test]
fn strict_parse_rejects_malformations() {
    for bad in [
        "",
        "sent1 -> ",
        "sent1 -> int1",                                 // missing text
        "sent1 -> int1:",                                // empty text
        "sent1 -> hypothesis; sent2 -> hypothesis",      // two roots
        "sent1 & sent1 -> hypothesis",                   // repeated premise
        "int1 & sent1 -> hypothesis",                    // undefined int
        "sent1 -> int1: a; sent2 -> hypothesis",         // dangling int1
        "sent1 -> int1: a; int1 -> hypothesis;",         // trailing separator
        "hypothesis -> int1: a; int1 -> hypothesis",     // hypothesis as premise
        "sent1 -> sent2",                                // sentence conclusion
    ] {
        assert!(parse_strict(bad).is_err(), "accepted {:?}", bad);
    }
}

#[test]
fn salvage_keeps_longest_valid_prefix() {
    let out = parse_salvage("sent1 & sent2 -> int1: a; garbage");
    assert!(out.salvaged);
    assert_eq!(out.tree.steps().len(), 1);
    assert_eq!(out.tree.steps()[0].text, "a");

    let out = parse_salvage("complete nonsense");
    assert!(out.salvaged);
    assert!(out.tree.is_empty());

    let out = parse_salvage("sent1 & sent2 -> hypothesis");
    assert!(!out.salvaged);
    assert!(out.tree.is_complete());

    // junk after the hypothesis step is dropped and flagged
    let out = parse_salvage("sent1 -> hypothesis sent9 sent9");
    assert!(out.salvaged);
    assert!(out.tree.is_complete());
}

#[test]
fn proof_length_counts_steps_and_arrows() {
    assert_eq!(fig1_tree().proof_length(), 3);
    let single = EntailmentTree::new(vec![step(
        &[NodeLabel::Sent(1), NodeLabel::Sent(2)],
        NodeLabel::Hypothesis,
        "",
    )])
    .unwrap();
    assert_eq!(single.proof_length(), 1);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let t = random_tree(&mut rng, 5);
        let s = linearize(&t).unwrap();
        assert_eq!(t.proof_length(), s.matches("->").count());
    }
}

#[test]
fn shape_signatures_and_registry_codes() {
    let registry = ShapeRegistry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let a1 = tree_from_signature("[LL]", &mut rng).unwrap();
    assert_eq!(shape_signature(&a1), "[LL]");
    assert_eq!(registry.classify(&a1), "A1");

    let a2 = tree_from_signature("[LL][IL]", &mut rng).unwrap();
    assert_eq!(registry.classify(&a2), "A2");

    let a3 = tree_from_signature("[LL][LL][II]", &mut rng).unwrap();
    assert_eq!(registry.classify(&a3), "A3");
}

#[test]
fn composed_shapes_never_classify_as_primitive() {
    let registry = ShapeRegistry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for code in ["B1", "B2", "B3", "B3alt"] {
        let sig = registry.signature_of(code).unwrap().to_string();
        for _ in 0..20 {
            let t = tree_from_signature(&sig, &mut rng).unwrap();
            let got = registry.classify(&t);
            assert_eq!(got, code);
            assert!(!got.starts_with('A'));
        }
    }
}

fn toy_example(id: &str, depth_steps: usize, rng: &mut ChaCha8Rng) -> EntailmentExample {
    let tree = random_tree(rng, depth_steps);
    example_of(id, tree)
}

fn example_of(id: &str, tree: EntailmentTree) -> EntailmentExample {
    let mut sentences = indexmap::IndexMap::new();
    for k in tree.leaf_sents() {
        sentences.insert(format!("sent{}", k), format!("sentence text {}", k));
    }
    let depth = tree.proof_length();
    EntailmentExample {
        id: id.to_string(),
        hypothesis: "the hypothesis".into(),
        sentences,
        tree,
        depth,
        shape: None,
        step_rules: None,
    }
}

#[test]
fn partition_by_length_excludes_compositional_depths_from_train() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut data = Vec::new();
    let mut idx = 0;
    while data.iter().filter(|e: &&EntailmentExample| e.depth <= 2).count() < 30
        || data.iter().filter(|e: &&EntailmentExample| e.depth == 3).count() < 10
    {
        let ex = toy_example(&format!("ex{}", idx), 3, &mut rng);
        idx += 1;
        if ex.depth <= 3 {
            data.push(ex);
        }
        if idx > 500 {
            panic!("generator failed to cover depths");
        }
    }
    let deep3 = data.iter().filter(|e| e.depth == 3).count();
    let spec = PartitionSpec::ByLength {
        train_depths: vec![1, 2],
        comp_depth: 3,
        finetune: deep3 / 2,
        test: deep3 - deep3 / 2,
    };
    let p = partition(data, &spec, 7, &ShapeRegistry::default()).unwrap();
    assert!(p.train.iter().all(|e| e.depth <= 2));
    assert!(p.finetune.iter().chain(&p.test).all(|e| e.depth == 3));
    p.assert_disjoint().unwrap();
}

#[test]
fn partition_by_shape_excludes_composed_shapes_from_train() {
    let registry = ShapeRegistry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut data = Vec::new();
    for i in 0..12 {
        let code = ["A1", "A2", "A3"][i % 3];
        let sig = registry.signature_of(code).unwrap().to_string();
        data.push(example_of(&format!("a{}", i), tree_from_signature(&sig, &mut rng).unwrap()));
    }
    for i in 0..6 {
        let code = ["B1", "B2", "B3"][i % 3];
        let sig = registry.signature_of(code).unwrap().to_string();
        data.push(example_of(&format!("b{}", i), tree_from_signature(&sig, &mut rng).unwrap()));
    }
    let spec = PartitionSpec::ByShape {
        train_shapes: vec!["A1".into(), "A2".into(), "A3".into()],
        comp_shapes: vec!["B1".into(), "B2".into(), "B3".into()],
        finetune: 3,
        test: 3,
    };
    let p = partition(data, &spec, 11, &registry).unwrap();
    assert_eq!(p.train.len(), 12);
    for ex in &p.train {
        assert!(registry.classify(&ex.tree).starts_with('A'));
    }
    for ex in p.finetune.iter().chain(&p.test) {
        assert!(registry.classify(&ex.tree).starts_with('B'));
    }
}

#[test]
fn partition_reports_deficits_and_unmatched() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = vec![toy_example("only", 1, &mut rng)];
    let spec = PartitionSpec::ByLength { train_depths: vec![1, 2], comp_depth: 3, finetune: 1, test: 1 };
    assert!(partition(data, &spec, 0, &ShapeRegistry::default()).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let deep = (0..40)
        .map(|i| toy_example(&format!("d{}", i), 5, &mut rng))
        .find(|e| e.depth >= 4)
        .expect("some deep example");
    let spec = PartitionSpec::ByLength { train_depths: vec![1, 2], comp_depth: 3, finetune: 0, test: 0 };
    assert!(partition(vec![deep], &spec, 0, &ShapeRegistry::default()).is_err());
}

#[test]
fn jsonl_roundtrip_preserves_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let examples: Vec<EntailmentExample> =
        (0..20).map(|i| toy_example(&format!("ex{}", i), 4, &mut rng)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.jsonl");
    write_jsonl(&path, &examples).unwrap();
    let loaded = read_jsonl(&path).unwrap();
    assert_eq!(loaded, examples);

    // byte determinism of the serialized form
    let lines1: Vec<String> = examples.iter().map(|e| example_to_line(e).unwrap()).collect();
    let lines2: Vec<String> = loaded.iter().map(|e| example_to_line(e).unwrap()).collect();
    assert_eq!(lines1, lines2);
}

#[test]
fn example_validation_catches_mismatches() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ex = toy_example("bad", 2, &mut rng);
    ex.depth += 1;
    assert!(ex.validate().is_err());

    let mut ex2 = toy_example("bad2", 2, &mut rng);
    let first_leaf = format!("sent{}", ex2.tree.leaf_sents().iter().next().unwrap());
    ex2.sentences.shift_remove(&first_leaf);
    assert!(ex2.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roundtrip_parse_linearize(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, 5);
        let s = linearize(&t).unwrap();
        let back = parse_strict(&s).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn salvage_never_panics_and_yields_valid_prefix(s in "\\PC*") {
        let out = parse_salvage(&s);
        // the prefix revalidates cleanly
        prop_assert!(EntailmentTree::partial(out.tree.steps().to_vec()).is_ok());
    }

    #[test]
    fn mutated_linearizations_reject_or_salvage(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, 4);
        let s = linearize(&t).unwrap();
        let mutated = super::tests::mutate_string(&s, &mut rng);
        match parse_strict(&mutated) {
            Ok(tree) => {
                // a harmless mutation: result must still be a valid tree
                prop_assert!(EntailmentTree::new(tree.steps().to_vec()).is_ok());
            }
            Err(_) => {
                let out = parse_salvage(&mutated);
                prop_assert!(EntailmentTree::partial(out.tree.steps().to_vec()).is_ok());
            }
        }
    }
}

/// Random single-edit corruption used by the mutation tests.
pub(crate) fn mutate_string(s: &str, rng: &mut ChaCha8Rng) -> String {
    use rand::Rng;
    let mut toks: Vec<String> = tokenize(s).into_iter().collect();
    if toks.is_empty() {
        return "garbage".into();
    }
    match rng.gen_range(0..4) {
        0 => {
            let i = rng.gen_range(0..toks.len());
            toks.remove(i);
        }
        1 => {
            let i = rng.gen_range(0..=toks.len());
            toks.insert(i, ["->", "&", ";", "int9", "blob"][rng.gen_range(0..5)].to_string());
        }
        2 => {
            let i = rng.gen_range(0..toks.len());
            toks[i] = "sent999".into();
        }
        _ => {
            if toks.len() >= 2 {
                let i = rng.gen_range(0..toks.len() - 1);
                toks.swap(i, i + 1);
            }
        }
    }
    toks.join(" ")
}
