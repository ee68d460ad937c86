//! Fits natural-breaks classes to a distance sample and bins new values.
//!
//! `cargo run --example natural_breaks`

use geokge::features::{assign_bin, jenks_fit};

fn main() -> geokge::Result<()> {
    let distances = [
        0.4, 0.9, 1.1, 1.3, 4.8, 5.1, 5.3, 5.9, 6.2, 14.0, 15.5, 16.1, 40.2, 41.0, 44.7,
    ];
    for k in 1..=5 {
        let fit = jenks_fit(&distances, k)?;
        println!(
            "k = {k}: boundaries {:?}, within-class deviation {:.3}",
            fit.breaks.boundaries(),
            fit.deviation
        );
    }
    let breaks = jenks_fit(&distances, 4)?.breaks;
    for d in [0.0, 3.0, 10.0, 30.0, 100.0] {
        println!("{d:>6} -> bin{:02}", assign_bin(d, &breaks));
    }
    // Fewer distinct values than classes: the class count falls back.
    let fit = jenks_fit(&[2.0, 2.0, 7.0], 5)?;
    println!("requested 5, got {} classes", fit.breaks.classes());
    Ok(())
}
