use std::collections::HashMap;

use geokge::geometry::read_geometry_file;
use geokge::kg::{ingest_triples, Vocabulary};
use geokge::synth::{generate, GenConfig};

fn small(seed: u64, noise_rate: f64) -> GenConfig {
    GenConfig {
        n_entities: 150,
        n_triples: 800,
        noise_rate,
        seed,
        ..GenConfig::default()
    }
}

/// Mutual information in nats between the archetype a triple was drawn for
/// and the archetype its emitted term belongs to.
fn term_information(noise_rate: f64) -> f64 {
    let ds = generate(&small(4, noise_rate)).unwrap();
    let n = ds.triples.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut left: HashMap<usize, f64> = HashMap::new();
    let mut right: HashMap<usize, f64> = HashMap::new();
    for (tr, arche) in ds.triples.iter().zip(&ds.triple_archetypes) {
        let (a, b) = (arche.index(), ds.term_archetypes[tr.r].index());
        *joint.entry((a, b)).or_default() += 1.0 / n;
        *left.entry(a).or_default() += 1.0 / n;
        *right.entry(b).or_default() += 1.0 / n;
    }
    joint
        .iter()
        .map(|(&(a, b), &p)| p * (p / (left[&a] * right[&b])).ln())
        .sum()
}

#[test]
fn generation_is_deterministic_and_consistent() {
    let a = generate(&small(1, 0.1)).unwrap();
    let b = generate(&small(1, 0.1)).unwrap();
    assert_eq!(a.triples, b.triples);
    assert_eq!(a.geometries, b.geometries);
    assert_ne!(generate(&small(2, 0.1)).unwrap().triples, a.triples);

    assert_eq!(a.geometries.len(), a.entities.len());
    assert!(a.triples.iter().all(|t| t.h < a.entities.len() && t.t < a.entities.len() && t.h != t.t));
    assert!(a.triples.iter().all(|t| t.r < a.relations.len()));
    assert_eq!(a.term_archetypes.len(), a.relations.len());
}

#[test]
fn written_files_read_back() {
    let ds = generate(&small(3, 0.1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ds.write(dir.path()).unwrap();
    let geoms = read_geometry_file(&dir.path().join("geometries.tsv")).unwrap();
    assert_eq!(geoms.len(), ds.entities.len());
    for (name, g) in &geoms {
        let id = ds.entities.id(name).unwrap();
        assert_eq!(g.kind(), ds.geometries[id].kind());
    }
    let (entities, relations, triples) =
        ingest_triples(&dir.path().join("triples.tsv"), Vocabulary::new(), Vocabulary::new()).unwrap();
    assert_eq!(triples.len(), ds.triples.len());
    for (read, orig) in triples.iter().zip(&ds.triples) {
        assert_eq!(entities.name(read.h), ds.entities.name(orig.h));
        assert_eq!(relations.name(read.r), ds.relations.name(orig.r));
        assert_eq!(entities.name(read.t), ds.entities.name(orig.t));
    }
    let terms = std::fs::read_to_string(dir.path().join("terms.tsv")).unwrap();
    assert_eq!(terms.lines().filter(|l| !l.starts_with('#')).count(), ds.relations.len());
}

#[test]
fn noise_controls_term_signal() {
    let clean = term_information(0.0);
    let noisy = term_information(1.0);
    // Ten roughly balanced archetypes carry close to ln 10 nats.
    assert!(clean > 1.5, "clean {clean}");
    assert!(noisy < 0.1, "noisy {noisy}");
}
