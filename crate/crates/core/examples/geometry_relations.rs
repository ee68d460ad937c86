//! Topology, direction and distance between a few hand-written geometries.
//!
//! `cargo run --example geometry_relations`

use geokge::geometry::{centroid, centroid_distance, compass_octant, de9im, parse_geometry};

fn main() -> Result<(), geokge::GeometryError> {
    let shapes = [
        ("park", "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"),
        ("pond", "POLYGON ((1 1, 2 1, 2 2, 1 2, 1 1))"),
        ("lot", "POLYGON ((4 0, 6 0, 6 2, 4 2, 4 0))"),
        ("trail", "LINESTRING (-2 3, 8 3)"),
        ("bench", "POINT (3 1)"),
        ("tower", "POINT (2 12)"),
    ];
    let geoms: Vec<_> = shapes
        .iter()
        .map(|(name, wkt)| parse_geometry(wkt).map(|g| (*name, g)))
        .collect::<Result<_, _>>()?;
    println!("head\ttail\tDE-9IM\tdirection\tdistance");
    for (a, ga) in &geoms {
        for (b, gb) in &geoms {
            if a == b {
                continue;
            }
            let m = de9im(ga, gb);
            let dir = compass_octant(centroid(ga), centroid(gb))
                .map_or("none".to_string(), |o| o.name().to_string());
            let mut tags = Vec::new();
            for (name, holds) in [
                ("contains", m.contains()),
                ("within", m.within()),
                ("touches", m.touches()),
                ("disjoint", m.is_disjoint()),
            ] {
                if holds {
                    tags.push(name);
                }
            }
            println!(
                "{a}\t{b}\t{m} {}\t{dir}\t{:.2}",
                if tags.is_empty() { "-".to_string() } else { tags.join(",") },
                centroid_distance(ga, gb)
            );
        }
    }
    Ok(())
}
