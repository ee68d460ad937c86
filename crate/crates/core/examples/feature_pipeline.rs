//! Extracts pair features for a synthetic graph and builds the weighted
//! (relation term, category) pairs used by the alignment objective.
//!
//! `cargo run --example feature_pipeline`

use geokge::features::{build_alignment_pairs, extract_pair_features, FeatureKind, KindSet};
use geokge::synth::{generate, GenConfig};

fn main() -> geokge::Result<()> {
    let ds = generate(&GenConfig {
        n_entities: 150,
        n_triples: 600,
        seed: 3,
        ..GenConfig::default()
    })?;
    let geoms: Vec<_> = ds.geometries.iter().cloned().map(Some).collect();
    let pf = extract_pair_features(&ds.triples, &geoms, 20)?.features;
    println!("{} ordered pairs", pf.len());
    for kind in FeatureKind::ALL {
        println!("{kind}: {} categories", pf.vocab(kind).len());
    }
    let topo = pf.vocab(FeatureKind::Topo);
    for (id, pattern) in topo.categories.iter().take(5) {
        println!("  topo {id}: {pattern}");
    }

    let pairs = build_alignment_pairs(&ds.triples, &pf, KindSet::ALL);
    let mut top: Vec<_> = pairs.iter().filter(|p| p.kind == FeatureKind::Topo).collect();
    top.sort_by_key(|p| std::cmp::Reverse(p.weight));
    println!("most frequent term/topology pairs:");
    for p in top.iter().take(6) {
        println!(
            "  {:<14} {}  x{}",
            ds.relations.name(p.r),
            topo.categories.name(p.g),
            p.weight
        );
    }
    Ok(())
}
