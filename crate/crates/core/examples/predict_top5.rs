//! Trains briefly, then asks for the five most plausible tails and relation
//! terms for a head entity.
//!
//! `cargo run --release --example predict_top5`

use geokge::eval::{format_predictions, predict_topk, Query, Slot};
use geokge::features::KindSet;
use geokge::kg::{split_dataset, FilterMode, SplitRatio};
use geokge::synth::{generate, GenConfig};
use geokge::train::{train, TrainConfig, TrainData};

fn main() -> geokge::Result<()> {
    let ds = generate(&GenConfig {
        n_entities: 120,
        n_triples: 600,
        seed: 5,
        ..GenConfig::default()
    })?;
    let split = split_dataset(&ds.triples, SplitRatio::DEFAULT, 5)?;
    let cfg = TrainConfig {
        k: 16,
        epochs: 30,
        gamma: 2.0,
        enabled_kinds: KindSet::NONE,
        seed: 5,
        ..TrainConfig::default()
    };
    let out = train(&TrainData::new(&split.train, ds.entities.len(), ds.relations.len()), &cfg)?;
    let filter = FilterMode::All.build_index(&split);

    let probe = split.test[0];
    println!(
        "test triple: {} {} {}",
        ds.entities.name(probe.h),
        ds.relations.name(probe.r),
        ds.entities.name(probe.t)
    );
    let tails = predict_topk(&out.space, Query::new(probe, Slot::Tail), 5, &filter);
    println!("({}, {}, ?)", ds.entities.name(probe.h), ds.relations.name(probe.r));
    print!("{}", format_predictions(&tails, &ds.entities));
    let rels = predict_topk(&out.space, Query::new(probe, Slot::Relation), 5, &filter);
    println!("({}, ?, {})", ds.entities.name(probe.h), ds.entities.name(probe.t));
    print!("{}", format_predictions(&rels, &ds.relations));
    Ok(())
}
