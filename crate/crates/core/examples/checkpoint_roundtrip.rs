//! Saves a trained model, loads it back and checks that evaluation is
//! unchanged bit for bit.
//!
//! `cargo run --example checkpoint_roundtrip`

use geokge::features::KindSet;
use geokge::kg::{split_dataset, vocab_hash, FilterMode, SplitRatio};
use geokge::synth::{generate, GenConfig};
use geokge::train::{train, Checkpoint, TrainConfig, TrainData};
use geokge::evaluate_split;

fn main() -> geokge::Result<()> {
    let ds = generate(&GenConfig {
        n_entities: 80,
        n_triples: 400,
        seed: 2,
        ..GenConfig::default()
    })?;
    let split = split_dataset(&ds.triples, SplitRatio::DEFAULT, 2)?;
    let cfg = TrainConfig {
        k: 8,
        epochs: 5,
        enabled_kinds: KindSet::NONE,
        ..TrainConfig::default()
    };
    let out = train(&TrainData::new(&split.train, ds.entities.len(), ds.relations.len()), &cfg)?;
    let filter = FilterMode::All.build_index(&split);
    let before = evaluate_split(&out.space, &split.test, &filter).to_tsv(true);

    let dir = std::env::temp_dir().join(format!("geokge-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| geokge::Error::Io { path: dir.clone(), source })?;
    let path = dir.join("model.ckpt");
    let hash = vocab_hash(&ds.entities, &ds.relations);
    out.into_checkpoint(&cfg, hash).save(&path)?;

    let loaded = Checkpoint::load(&path)?;
    loaded.check_vocab_hash(hash)?;
    let after = evaluate_split(&loaded.space, &split.test, &filter).to_tsv(true);
    println!("{} bytes, epoch {}, rng {}", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), loaded.epoch, loaded.rng_digest);
    print!("{after}");
    println!("identical after reload: {}", before == after);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
