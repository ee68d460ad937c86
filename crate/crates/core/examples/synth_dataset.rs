//! Generates a small synthetic geospatial knowledge graph and prints how the
//! triples spread over the relation archetypes.
//!
//! `cargo run --example synth_dataset [OUT_DIR]`

use geokge::synth::{generate, Archetype, GenConfig};

fn main() -> geokge::Result<()> {
    let cfg = GenConfig {
        n_entities: 200,
        n_triples: 1000,
        seed: 7,
        ..GenConfig::default()
    };
    let ds = generate(&cfg)?;
    println!("{} entities, {} terms, {} triples", ds.entities.len(), ds.relations.len(), ds.triples.len());
    for arche in Archetype::ALL {
        let i = arche.index();
        println!(
            "{arche:>10}: {:5} candidate pairs, {:4} triples",
            ds.report.candidates[i], ds.report.emitted[i]
        );
    }
    for tr in ds.triples.iter().take(5) {
        println!(
            "{}\t{}\t{}",
            ds.entities.name(tr.h),
            ds.relations.name(tr.r),
            ds.entities.name(tr.t)
        );
    }
    if let Some(dir) = std::env::args().nth(1) {
        ds.write(std::path::Path::new(&dir))?;
        println!("written to {dir}");
    }
    Ok(())
}
