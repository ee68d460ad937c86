//! Trains the baseline and the geometry-aligned model on the same synthetic
//! split and prints their filtered link-prediction metrics.
//!
//! `cargo run --release --example train_and_evaluate [EPOCHS]`

use geokge::features::{build_alignment_pairs, extract_pair_features, KindSet};
use geokge::kg::{split_dataset, FilterMode, SplitRatio};
use geokge::synth::{generate, GenConfig};
use geokge::train::{train_with_progress, TrainConfig, TrainData};
use geokge::evaluate_split;

fn main() -> geokge::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let ds = generate(&GenConfig {
        n_entities: 300,
        n_triples: 1500,
        seed: 1,
        ..GenConfig::default()
    })?;
    let geoms: Vec<_> = ds.geometries.iter().cloned().map(Some).collect();
    let pf = extract_pair_features(&ds.triples, &geoms, 20)?.features;
    let split = split_dataset(&ds.triples, SplitRatio::DEFAULT, 1)?;
    let filter = FilterMode::All.build_index(&split);

    for kinds in [KindSet::NONE, KindSet::ALL] {
        let cfg = TrainConfig {
            k: 32,
            epochs,
            enabled_kinds: kinds,
            seed: 1,
            ..TrainConfig::default()
        };
        let pairs = build_alignment_pairs(&split.train, &pf, kinds);
        let data = TrainData::new(&split.train, ds.entities.len(), ds.relations.len())
            .with_features(&pf, &pairs);
        let out = train_with_progress(&data, &cfg, |l| {
            if (l.epoch + 1) % 10 == 0 {
                eprintln!("epoch {:4}  triplet {:.4}  alignment {:.4}", l.epoch + 1, l.triplet, l.alignment);
            }
        })?;
        let name = if kinds.is_empty() { "baseline" } else { "topo+dir+dis" };
        println!("== {name} ==");
        print!("{}", evaluate_split(&out.space, &split.test, &filter).to_tsv(false));
    }
    Ok(())
}
