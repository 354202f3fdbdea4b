#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use taxoprompt::taxonomy::{Entity, RelationKind, Taxonomy, Triple};

pub fn esco_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/esco")
}

/// Small taxonomy drawn from a tiny vocabulary so that labels and
/// descriptions collide across entities.
pub fn random_taxonomy(seed: u64, max_entities: usize) -> Taxonomy {
    const WORDS: [&str; 10] = [
        "weld", "bake", "code", "nurse", "drive", "paint", "teach", "audit", "cook", "plan",
    ];
    const DESCRIPTIONS: [&str; 5] = ["d0", "d1", "d2", "d3", "d4"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_entities.max(2));
    let n_skills = rng.random_range(1..n);
    let mut b = Taxonomy::builder();
    let mut skills = Vec::new();
    let mut occupations = Vec::new();
    for i in 0..n {
        let id = format!("e{i}");
        let label = *WORDS.choose(&mut rng).unwrap();
        let mut e = if i < n_skills {
            skills.push(id.clone());
            Entity::skill(&id, label)
        } else {
            occupations.push(id.clone());
            Entity::occupation(&id, label)
        };
        let n_alt = rng.random_range(0..=3);
        let alts: Vec<&str> = (0..n_alt).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
        e = e.with_alt_labels(alts);
        if rng.random_bool(0.7) {
            e = e.with_description(*DESCRIPTIONS.choose(&mut rng).unwrap());
        }
        b.add_entity(e).unwrap();
    }
    for s in &skills {
        for o in &occupations {
            if rng.random_bool(0.4) {
                let kind = *RelationKind::ALL.choose(&mut rng).unwrap();
                b.add_relation(Triple::new(s, kind, o)).unwrap();
            }
        }
    }
    b.freeze()
}

/// Taxonomy with distinct labels and descriptions, sized by arguments.
pub fn synthetic_taxonomy(seed: u64, n_skills: usize, n_occupations: usize, n_triples: usize) -> Taxonomy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Taxonomy::builder();
    let mut add = |id: String, kind: &str, i: usize, rng: &mut ChaCha8Rng| {
        let n_alt = rng.random_range(1..=2);
        let base = if kind == "skill" {
            Entity::skill(&id, format!("{kind} {i}"))
        } else {
            Entity::occupation(&id, format!("{kind} {i}"))
        };
        let e = base
            .with_alt_labels((0..n_alt).map(|a| format!("{kind} {i} alias {a}")))
            .with_description(format!("Description of {kind} {i}."));
        b.add_entity(e).unwrap();
    };
    for i in 0..n_skills {
        add(format!("s{i:04}"), "skill", i, &mut rng);
    }
    for i in 0..n_occupations {
        add(format!("o{i:04}"), "occupation", i, &mut rng);
    }
    let mut pairs = std::collections::BTreeSet::new();
    while pairs.len() < n_triples.min(n_skills * n_occupations) {
        pairs.insert((rng.random_range(0..n_skills), rng.random_range(0..n_occupations)));
    }
    for (s, o) in pairs {
        let kind = if rng.random_bool(0.5) {
            RelationKind::IsEssentialFor
        } else {
            RelationKind::IsOptionalFor
        };
        b.add_relation(Triple::new(format!("s{s:04}"), kind, format!("o{o:04}"))).unwrap();
    }
    b.freeze()
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxoprompt"))
        .args(args)
        .env_remove(taxoprompt::cli::OUT_ENV)
        .output()
        .expect("spawn taxoprompt")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "taxoprompt {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Relative path → SHA-256 of every file under `dir`.
pub fn checksums(dir: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let digest = Sha256::digest(fs::read(&path).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex);
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// One-mask example over `classes` with the given gold class.
pub fn labelled(id: &str, role: &str, classes: &[String], gold: &str) -> taxoprompt::datagen::PromptExample {
    use taxoprompt::datagen::{Polarity, PromptExample, Provenance, Task, SCHEMA_VERSION};
    use taxoprompt::promptkit::{MaskSlot, RenderedPrompt};
    PromptExample {
        schema_version: SCHEMA_VERSION,
        example_id: id.to_string(),
        task: Task::Qa,
        polarity: Polarity::Positive,
        rendered: RenderedPrompt {
            text: format!("{id} <mask_1>"),
            masks: vec![MaskSlot {
                index: 1,
                role: role.to_string(),
                label_words: classes.iter().map(|c| (c.clone(), c.clone())).collect(),
                gold: Some(gold.to_string()),
            }],
        },
        provenance: Provenance {
            subject: id.to_string(),
            object: id.to_string(),
            source: "description".to_string(),
            mention_of: None,
        },
    }
}

/// Macro-F1 straight from `(gold, predicted)` pairs: per class in the union
/// of gold and predicted labels, F1 = 2TP / (2TP + FP + FN).
pub fn brute_force_macro_f1(pairs: &[(String, String)]) -> f64 {
    let mut classes: Vec<&String> = pairs.iter().flat_map(|(g, p)| [g, p]).collect();
    classes.sort();
    classes.dedup();
    let mut total = 0.0;
    for c in &classes {
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for (g, p) in pairs {
            match (g == *c, p == *c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        total += if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
    }
    if classes.is_empty() {
        0.0
    } else {
        total / classes.len() as f64
    }
}

/// Eval set + predictions for a list of `(gold, predicted)` pairs.
pub fn scored_instance(
    pairs: &[(String, String)],
    classes: &[String],
) -> (Vec<taxoprompt::datagen::PromptExample>, Vec<taxoprompt::score::PredictionRecord>) {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (g, pr))| {
            let id = format!("x{i:05}");
            (
                labelled(&id, "r", classes, g),
                taxoprompt::score::PredictionRecord::new(id, [(1, pr.clone())]),
            )
        })
        .unzip()
}

fn labels_of(e: &Entity) -> Vec<&str> {
    std::iter::once(e.preferred_label.as_str())
        .chain(e.alt_labels.iter().map(String::as_str))
        .collect()
}

/// Every EL/QA negative that states something true of the taxonomy, found
/// by scanning all entities for each negative.
pub fn negative_violations(taxonomy: &Taxonomy, examples: &[taxoprompt::datagen::PromptExample]) -> Vec<String> {
    use taxoprompt::datagen::{Polarity, Task};
    let positive_texts: std::collections::BTreeSet<&str> = examples
        .iter()
        .filter(|e| e.polarity == Polarity::Positive)
        .map(|e| e.rendered.text.as_str())
        .collect();
    let mut bad = Vec::new();
    for ex in examples.iter().filter(|e| e.polarity == Polarity::Negative) {
        if positive_texts.contains(ex.rendered.text.as_str()) {
            bad.push(format!("{}: same text as a positive", ex.example_id));
        }
        let subject = taxonomy.entity(&ex.provenance.subject).unwrap();
        let surface = subject.preferred_label.as_str();
        match ex.task {
            Task::El => {
                let mention = ex.provenance.object.as_str();
                for x in taxonomy.entities() {
                    let l = labels_of(x);
                    if l.contains(&surface) && l.contains(&mention) {
                        bad.push(format!("{}: {} carries `{surface}` and `{mention}`", ex.example_id, x.id));
                    }
                }
            }
            Task::Qa => {
                let other = taxonomy.entity(&ex.provenance.object).unwrap();
                let d = other.description.as_deref().unwrap();
                for x in taxonomy.entities() {
                    if x.description.as_deref() == Some(d) && labels_of(x).contains(&surface) {
                        bad.push(format!("{}: {} is `{surface}` and has `{d}`", ex.example_id, x.id));
                    }
                }
            }
            Task::EcRc => bad.push(format!("{}: EC+RC negative", ex.example_id)),
        }
    }
    bad
}

/// Ids of pool examples sharing no skill/occupation id with `train`.
pub fn decontamination_oracle(
    train: &[taxoprompt::datagen::PromptExample],
    pool: &[taxoprompt::datagen::PromptExample],
) -> std::collections::BTreeSet<String> {
    let mut used = Vec::new();
    for t in train {
        used.push(t.provenance.subject.clone());
        used.push(t.provenance.object.clone());
    }
    pool.iter()
        .filter(|e| !used.iter().any(|u| *u == e.provenance.subject || *u == e.provenance.object))
        .map(|e| e.example_id.clone())
        .collect()
}
