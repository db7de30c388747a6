//! Helpers shared by the integration tests: a seeded random-model generator,
//! the exhaustive oracle and JSON-schema validation.
#![allow(dead_code)]

use std::path::PathBuf;

use fmcheck::encode::eval_formula;
use fmcheck::model::{ChildGroup, CrossTreeConstraint, Decision};
use fmcheck::{encode_model, parse_model, Configuration, EncodedModel, Feature, FeatureModel, GroupKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for every generated-model suite. Change it to explore other models;
/// failures report the per-model seed as well.
pub const MODEL_SEED: u64 = 0x00F0_0D5E_ED00_2024;

pub const MAX_RANDOM_FEATURES: usize = 12;

pub const KINDS: [GroupKind; 6] = [
    GroupKind::Mandatory,
    GroupKind::Optional,
    GroupKind::Alternative,
    GroupKind::Or,
    GroupKind::OptionalAlternative,
    GroupKind::OptionalOr,
];

pub fn crate_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(crate_path(rel)).unwrap()
}

pub fn load(rel: &str) -> EncodedModel {
    encode_model(&parse_model(&read(rel)).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Node {
    groups: Vec<(GroupKind, Vec<usize>)>,
}

/// A structurally valid model with 1..=`max_features` features named
/// `F0`.. (F0 is the root), group kinds drawn uniformly and at most 0.3
/// cross-tree constraints per feature.
pub fn random_model(rng: &mut impl Rng, max_features: usize) -> FeatureModel {
    let n = rng.gen_range(1..=max_features);
    let mut nodes = vec![Node { groups: Vec::new() }];
    while nodes.len() < n {
        let remaining = n - nodes.len();
        let parent = rng.gen_range(0..nodes.len());
        let mut kind = KINDS[rng.gen_range(0..KINDS.len())];
        if kind.min_children() > remaining {
            kind = if rng.gen() {
                GroupKind::Mandatory
            } else {
                GroupKind::Optional
            };
        }
        let lo = kind.min_children();
        let k = rng.gen_range(lo..=remaining.min(4).max(lo));
        let children: Vec<usize> = (nodes.len()..nodes.len() + k).collect();
        for _ in 0..k {
            nodes.push(Node { groups: Vec::new() });
        }
        nodes[parent].groups.push((kind, children));
    }
    fn build(nodes: &[Node], i: usize) -> Feature {
        let mut f = Feature::leaf(format!("F{i}").as_str());
        f.groups = nodes[i]
            .groups
            .iter()
            .map(|(kind, kids)| ChildGroup {
                kind: *kind,
                children: kids.iter().map(|&c| build(nodes, c)).collect(),
            })
            .collect();
        f
    }
    let mut model = FeatureModel::new("Random", build(&nodes, 0));
    if n >= 2 {
        let max_constraints = 3 * n / 10;
        for _ in 0..rng.gen_range(0..=max_constraints) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let (a, b) = (format!("F{a}"), format!("F{b}"));
            model.constraints.push(if rng.gen() {
                CrossTreeConstraint::requires(a.as_str(), b.as_str())
            } else {
                CrossTreeConstraint::excludes(a.as_str(), b.as_str())
            });
        }
    }
    model
}

/// The `count` models of the shared suite, each with its own seed.
pub fn random_models(count: usize) -> Vec<(u64, FeatureModel)> {
    let mut master = rng(MODEL_SEED);
    (0..count)
        .map(|_| {
            let seed: u64 = master.gen();
            (seed, random_model(&mut rng(seed), MAX_RANDOM_FEATURES))
        })
        .collect()
}

/// Full assignment in preorder for assignment number `code`, where the first
/// feature is the most significant bit.
pub fn assignment(n: usize, code: u64) -> Vec<bool> {
    (0..n).map(|i| code >> (n - 1 - i) & 1 == 1).collect()
}

pub fn to_config(e: &EncodedModel, values: &[bool]) -> Configuration {
    let mut cfg = Configuration::new();
    for (f, v) in e.features().iter().zip(values) {
        cfg.set(f.clone(), Decision::from_bool(*v));
    }
    cfg
}

/// Every satisfying full assignment, in lexicographic order, by evaluating
/// the model formula on all 2^n assignments.
pub fn oracle_products(e: &EncodedModel) -> Vec<Vec<bool>> {
    let formula = e.formula();
    let n = e.feature_count();
    (0u64..1 << n)
        .map(|code| assignment(n, code))
        .filter(|vals| eval_formula(&formula, &to_config(e, vals)).unwrap())
        .collect()
}

/// A random partial configuration deciding about a third of the features.
pub fn random_partial(rng: &mut impl Rng, e: &EncodedModel) -> Configuration {
    let mut cfg = Configuration::new();
    for f in e.features() {
        if rng.gen_ratio(1, 3) {
            cfg.set(f.clone(), Decision::from_bool(rng.gen()));
        }
    }
    cfg
}

pub fn extends(cfg: &Configuration, e: &EncodedModel, product: &[bool]) -> bool {
    e.features()
        .iter()
        .zip(product)
        .all(|(f, v)| cfg.get(f.as_str()).as_bool().is_none_or(|d| d == *v))
}

/// Validates `value` against `#/$defs/<def>` of the shipped schema and
/// panics with every violation.
pub fn assert_schema(def: &str, value: &serde_json::Value) {
    let file: serde_json::Value =
        serde_json::from_str(&read("schemas/fmcheck.schema.json")).unwrap();
    let schema = serde_json::json!({
        "$schema": file["$schema"],
        "$defs": file["$defs"],
        "$ref": format!("#/$defs/{def}"),
    });
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{def} schema violations: {errors:#?}\n{value:#}");
}

const FUZZ_TOKENS: &[&str] = &[
    "model", "feature", "constraints", "requires", "excludes", "mandatory", "optional", "xor",
    "or", "xor?", "or?", "{", "}", "{", "}", "A", "B", "v1.1", "_x", "#c\n", "\n", " ", "?", ".",
    "1a", "é", "\t", "\r\n", "$", "{{", "}}",
];

/// A parser input: a corpus file mutated by character-level edits, or a random
/// token soup.
pub fn fuzz_input(rng: &mut impl Rng, corpus: &[String]) -> String {
    if rng.gen_ratio(1, 3) {
        let n = rng.gen_range(0..40);
        return (0..n)
            .map(|_| FUZZ_TOKENS[rng.gen_range(0..FUZZ_TOKENS.len())])
            .collect::<Vec<_>>()
            .join(if rng.gen() { " " } else { "" });
    }
    let mut chars: Vec<char> = corpus[rng.gen_range(0..corpus.len())].chars().collect();
    for _ in 0..rng.gen_range(1..6) {
        let at = rng.gen_range(0..=chars.len());
        match rng.gen_range(0..4) {
            0 if at < chars.len() => {
                chars.remove(at);
            }
            1 => {
                let tok = FUZZ_TOKENS[rng.gen_range(0..FUZZ_TOKENS.len())];
                for (k, c) in tok.chars().enumerate() {
                    chars.insert(at + k, c);
                }
            }
            2 if at < chars.len() => {
                let end = rng.gen_range(at..=chars.len().min(at + 20));
                chars.drain(at..end);
            }
            _ => chars.insert(at, char::from(rng.gen_range(0x20u8..0x7f))),
        }
    }
    chars.into_iter().collect()
}

/// Small models used as fuzz seeds.
pub fn fuzz_corpus() -> Vec<String> {
    let mut corpus: Vec<String> = [
        "examples/cad_partial.fm",
        "tests/fixtures/dead_feature.fm",
        "tests/fixtures/void.fm",
        "tests/fixtures/root_only.fm",
        "tests/fixtures/broken.fm",
    ]
    .iter()
    .map(|p| read(p))
    .collect();
    let mut r = rng(MODEL_SEED);
    for _ in 0..20 {
        corpus.push(fmcheck::serialize_model(&random_model(&mut r, 8)));
    }
    corpus
}

/// Whether every error position lies inside `source` (the position just past
/// the end of a line counts as inside).
pub fn spans_in_bounds(source: &str, errors: &[fmcheck::ParseError]) -> bool {
    let lines: Vec<usize> = source.split('\n').map(|l| l.chars().count()).collect();
    errors.iter().all(|e| {
        let s = e.span;
        s.line >= 1
            && s.line <= lines.len()
            && s.column >= 1
            && s.column <= lines[s.line - 1] + 1
            && s.column - 1 + s.length <= lines[s.line - 1] + 1
    })
}
