//! Synthetic geographic knowledge graphs whose relation terms are tied to the
//! actual geometry of the entity pairs they connect.
//!
//! Every term belongs to one synonym group, and every group to one geometric
//! archetype (containment, crossing, adjacency, a cardinal direction at
//! middle distance, or a near/far distance class). A triple is emitted by
//! picking an archetype, a pair of entities whose geometry realises it, and a
//! term from the archetype's group. With probability `noise_rate` the term is
//! drawn from all terms instead.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    centroid_distance, compass_octant, de9im, write_geometry_file, CompassOctant, Coord,
    Geometry, GeometryKind,
};
use crate::kg::{write_triples, Triple, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Archetype {
    /// Head contains tail.
    Contains,
    /// Head lies within tail.
    Within,
    /// Interiors meet but neither contains the other.
    Crosses,
    /// Boundaries meet, interiors do not.
    Touches,
    /// Disjoint, middle distance, head north of tail.
    North,
    East,
    South,
    West,
    /// Disjoint, nearest distance tercile.
    Near,
    /// Disjoint, farthest distance tercile.
    Far,
}

impl Archetype {
    pub const ALL: [Archetype; 10] = [
        Archetype::Contains,
        Archetype::Within,
        Archetype::Crosses,
        Archetype::Touches,
        Archetype::North,
        Archetype::East,
        Archetype::South,
        Archetype::West,
        Archetype::Near,
        Archetype::Far,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Archetype::Contains => "contains",
            Archetype::Within => "within",
            Archetype::Crosses => "crosses",
            Archetype::Touches => "touches",
            Archetype::North => "north",
            Archetype::East => "east",
            Archetype::South => "south",
            Archetype::West => "west",
            Archetype::Near => "near",
            Archetype::Far => "far",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Three phrasings per archetype; longer groups get numbered variants.
    fn default_terms(self) -> [&'static str; 3] {
        match self {
            Archetype::Contains => ["contains", "encloses", "surrounds"],
            Archetype::Within => ["located_in", "inside", "part_of"],
            Archetype::Crosses => ["crosses", "passes_through", "traverses"],
            Archetype::Touches => ["borders", "adjacent_to", "meets"],
            Archetype::North => ["north_of", "above", "northward_of"],
            Archetype::East => ["east_of", "eastward_of", "right_of"],
            Archetype::South => ["south_of", "below", "southward_of"],
            Archetype::West => ["west_of", "westward_of", "left_of"],
            Archetype::Near => ["near", "close_to", "next_to"],
            Archetype::Far => ["far_from", "distant_from", "remote_from"],
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Archetype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "archetype",
                name: s.to_owned(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_entities: usize,
    /// Fractions of points, polylines and polygons.
    pub mix: [f64; 3],
    /// Relation terms of each archetype.
    pub synonym_groups: Vec<(Archetype, Vec<String>)>,
    pub n_triples: usize,
    pub noise_rate: f64,
    pub seed: u64,
    /// Side length of the square world.
    pub extent: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_entities: 500,
            mix: [0.4, 0.3, 0.3],
            synonym_groups: Self::synonym_groups(3),
            n_triples: 3000,
            noise_rate: 0.1,
            seed: 0,
            extent: 100.0,
        }
    }
}

impl GenConfig {
    /// One group per archetype with `per_group` terms.
    pub fn synonym_groups(per_group: usize) -> Vec<(Archetype, Vec<String>)> {
        Archetype::ALL
            .into_iter()
            .map(|a| {
                let base = a.default_terms();
                let terms = (0..per_group)
                    .map(|i| match base.get(i) {
                        Some(t) => t.to_string(),
                        None => format!("{}_{}", base[i % 3], i / 3 + 1),
                    })
                    .collect();
                (a, terms)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_entities < 2 {
            return bad("at least two entities are needed".into());
        }
        if self.mix.iter().any(|f| !(0.0..=1.0).contains(f)) || (self.mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("geometry mix {:?} must be fractions summing to 1", self.mix));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return bad(format!("noise rate {} outside [0, 1]", self.noise_rate));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return bad("extent must be positive".into());
        }
        if self.synonym_groups.is_empty() {
            return bad("no synonym groups".into());
        }
        let mut seen_terms = HashSet::new();
        let mut seen_groups = HashSet::new();
        for (a, terms) in &self.synonym_groups {
            if !seen_groups.insert(*a) {
                return bad(format!("archetype `{a}` has two groups"));
            }
            if terms.is_empty() {
                return bad(format!("archetype `{a}` has no terms"));
            }
            for t in terms {
                if t.is_empty() || t.contains(char::is_whitespace) {
                    return bad(format!("invalid term `{t}`"));
                }
                if !seen_terms.insert(t.as_str()) {
                    return bad(format!("term `{t}` belongs to two groups"));
                }
            }
        }
        Ok(())
    }
}

/// Generated dataset with the ground truth behind every triple.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub entities: Vocabulary,
    pub relations: Vocabulary,
    /// Geometry of each entity, in entity-id order.
    pub geometries: Vec<Geometry>,
    pub triples: Vec<Triple>,
    /// Archetype realised by each triple's entity pair.
    pub triple_archetypes: Vec<Archetype>,
    /// Archetype of each relation term, in relation-id order.
    pub term_archetypes: Vec<Archetype>,
    pub report: SynthReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthReport {
    /// Candidate pairs per archetype, in [`Archetype::ALL`] order.
    pub candidates: [usize; 10],
    /// Triples emitted per archetype.
    pub emitted: [usize; 10],
    /// Triples whose term was drawn from all terms.
    pub noisy: usize,
    /// Draws abandoned because every retry hit an existing triple.
    pub duplicate_skips: usize,
}

impl SynthReport {
    pub fn unsatisfiable(&self) -> Vec<Archetype> {
        Archetype::ALL
            .into_iter()
            .filter(|a| self.candidates[a.index()] == 0)
            .collect()
    }
}

pub const GEOMETRY_FILE: &str = "geometries.tsv";
pub const TRIPLE_FILE: &str = "triples.tsv";
pub const MANIFEST_FILE: &str = "terms.tsv";

impl SynthDataset {
    /// Writes the geometry file, the triple file and the `term<TAB>archetype`
    /// manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_geometry_file(
            &dir.join(GEOMETRY_FILE),
            self.entities.names().iter().map(String::as_str).zip(&self.geometries),
        )?;
        write_triples(&dir.join(TRIPLE_FILE), &self.triples, &self.entities, &self.relations)?;
        let mut manifest = String::new();
        for (id, term) in self.relations.iter() {
            let _ = writeln!(manifest, "{term}\t{}", self.term_archetypes[id]);
        }
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
    }
}

fn round(c: Coord) -> Coord {
    Coord::new((c.x * 1000.0).round() / 1000.0, (c.y * 1000.0).round() / 1000.0)
}

fn uniform_point(rng: &mut ChaCha8Rng, extent: f64) -> Coord {
    round(Coord::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
}

struct Blob {
    center: Coord,
    radius: f64,
    geometry: Geometry,
}

/// Star-shaped polygon around a random centre.
fn star_polygon(rng: &mut ChaCha8Rng, extent: f64) -> Blob {
    loop {
        let center = uniform_point(rng, extent);
        let n = rng.random_range(5..=9);
        let radius = rng.random_range(0.03..0.08) * extent;
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let mut ring: Vec<Coord> = angles
            .iter()
            .map(|&a| {
                let r = radius * rng.random_range(0.5..1.0);
                round(Coord::new(center.x + r * a.cos(), center.y + r * a.sin()))
            })
            .collect();
        ring.push(ring[0]);
        if let Ok(geometry) = Geometry::polygon(ring) {
            return Blob {
                center,
                radius,
                geometry,
            };
        }
    }
}

fn random_polyline(rng: &mut ChaCha8Rng, extent: f64, blobs: &[Blob]) -> Geometry {
    loop {
        let coords = match (blobs.choose(rng), rng.random_range(0..4)) {
            // Leaves a polygon vertex straight outwards: touches that polygon.
            (Some(b), 0) => {
                let v = *b.geometry.coords()[..b.geometry.coords().len() - 1]
                    .choose(rng)
                    .expect("ring has vertices");
                let dir = v.sub(b.center);
                let dir = dir.scale(1.0 / dir.norm());
                let len = rng.random_range(0.02..0.1) * extent;
                vec![v, round(v.add(dir.scale(len)))]
            }
            // Runs from a polygon's centre to beyond its rim: crosses it.
            (Some(b), 1) => {
                let a = rng.random_range(0.0..TAU);
                let far = b.radius * rng.random_range(1.2..2.0);
                let mid = round(b.center.add(Coord::new(a.cos(), a.sin()).scale(far * 0.5)));
                vec![b.center, mid, round(b.center.add(Coord::new(a.cos(), a.sin()).scale(far)))]
            }
            _ => {
                let n = rng.random_range(2..=4);
                let mut p = uniform_point(rng, extent);
                let mut coords = vec![p];
                for _ in 1..n {
                    let a = rng.random_range(0.0..TAU);
                    let step = rng.random_range(0.02..0.08) * extent;
                    p = round(p.add(Coord::new(a.cos(), a.sin()).scale(step)));
                    coords.push(p);
                }
                coords
            }
        };
        if let Ok(g) = Geometry::polyline(coords) {
            return g;
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, extent: f64, blobs: &[Blob]) -> Geometry {
    let c = match (blobs.choose(rng), rng.random_range(0..10)) {
        // On a polygon vertex: touches it.
        (Some(b), 0..=1) => *b.geometry.coords().choose(rng).expect("ring has vertices"),
        // Near the polygon centre: usually within it.
        (Some(b), 2..=4) => {
            let a = rng.random_range(0.0..TAU);
            let r = b.radius * rng.random_range(0.0..0.4);
            round(b.center.add(Coord::new(a.cos(), a.sin()).scale(r)))
        }
        _ => uniform_point(rng, extent),
    };
    Geometry::point(c.x, c.y).expect("finite coordinates")
}

fn bboxes_overlap(a: (Coord, Coord), b: (Coord, Coord)) -> bool {
    a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y
}

/// Archetype of every ordered pair, or `None` for pairs that realise none.
fn classify_pairs(geoms: &[Geometry]) -> Vec<Vec<(usize, usize)>> {
    let n = geoms.len();
    let boxes: Vec<_> = geoms.iter().map(Geometry::bbox).collect();
    let mut topo: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 4];
    let mut disjoint: Vec<(usize, usize, f64)> = Vec::new();
    for h in 0..n {
        for t in 0..n {
            if h == t {
                continue;
            }
            let d = centroid_distance(&geoms[h], &geoms[t]);
            if !bboxes_overlap(boxes[h], boxes[t]) {
                disjoint.push((h, t, d));
                continue;
            }
            let m = de9im(&geoms[h], &geoms[t]);
            let arche = if m.is_disjoint() {
                disjoint.push((h, t, d));
                continue;
            } else if m.equals() {
                continue;
            } else if m.contains() {
                Archetype::Contains
            } else if m.within() {
                Archetype::Within
            } else if m.touches() {
                Archetype::Touches
            } else if m.interiors_intersect() {
                Archetype::Crosses
            } else {
                continue;
            };
            topo[arche.index()].push((h, t));
        }
    }

    let mut dists: Vec<f64> = disjoint.iter().map(|p| p.2).collect();
    dists.sort_by(f64::total_cmp);
    let (lo, hi) = if dists.is_empty() {
        (0.0, 0.0)
    } else {
        (dists[dists.len() / 3], dists[2 * dists.len() / 3])
    };
    let mut out = topo;
    out.resize(10, Vec::new());
    for (h, t, d) in disjoint {
        let arche = if d < lo {
            Archetype::Near
        } else if d >= hi {
            Archetype::Far
        } else {
            // Direction of the head as seen from the tail.
            match compass_octant(geoms[t].centroid(), geoms[h].centroid()) {
                Ok(CompassOctant::N) => Archetype::North,
                Ok(CompassOctant::E) => Archetype::East,
                Ok(CompassOctant::S) => Archetype::South,
                Ok(CompassOctant::W) => Archetype::West,
                _ => continue,
            }
        };
        out[arche.index()].push((h, t));
    }
    out
}

/// Draws a dataset. Deterministic for a given configuration.
pub fn generate(cfg: &GenConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n_poly = (cfg.mix[2] * cfg.n_entities as f64).round() as usize;
    let n_line = ((cfg.mix[1] * cfg.n_entities as f64).round() as usize).min(cfg.n_entities - n_poly);
    let n_point = cfg.n_entities - n_poly - n_line;
    let blobs: Vec<Blob> = (0..n_poly).map(|_| star_polygon(&mut rng, cfg.extent)).collect();
    let mut geometries: Vec<Geometry> = blobs.iter().map(|b| b.geometry.clone()).collect();
    for _ in 0..n_line {
        geometries.push(random_polyline(&mut rng, cfg.extent, &blobs));
    }
    for _ in 0..n_point {
        geometries.push(random_point(&mut rng, cfg.extent, &blobs));
    }
    // Interleave kinds so entity ids carry no geometry information.
    let mut order: Vec<usize> = (0..geometries.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let geometries: Vec<Geometry> = order.iter().map(|&i| geometries[i].clone()).collect();
    let width = cfg.n_entities.to_string().len();
    let entities = Vocabulary::from_names((0..cfg.n_entities).map(|i| {
        let prefix = match geometries[i].kind() {
            GeometryKind::Point => "pt",
            GeometryKind::Polyline => "ln",
            GeometryKind::Polygon => "pg",
        };
        format!("{prefix}{i:0width$}")
    }))?;

    let mut relations = Vocabulary::new();
    let mut term_archetypes = Vec::new();
    let mut group_terms: Vec<Vec<usize>> = vec![Vec::new(); 10];
    for (arche, terms) in &cfg.synonym_groups {
        for term in terms {
            let id = relations.get_or_insert(term);
            term_archetypes.push(*arche);
            group_terms[arche.index()].push(id);
        }
    }

    let candidates = classify_pairs(&geometries);
    let mut report = SynthReport {
        candidates: std::array::from_fn(|i| candidates[i].len()),
        ..SynthReport::default()
    };
    let usable: Vec<Archetype> = Archetype::ALL
        .into_iter()
        .filter(|a| !candidates[a.index()].is_empty() && !group_terms[a.index()].is_empty())
        .collect();
    if usable.is_empty() {
        return Err(Error::Dataset("no archetype is realised by the generated geometry".into()));
    }

    let mut seen = HashSet::new();
    let mut triples = Vec::with_capacity(cfg.n_triples);
    let mut triple_archetypes = Vec::with_capacity(cfg.n_triples);
    let all_terms = relations.len();
    for _ in 0..cfg.n_triples {
        let mut emitted = false;
        for _ in 0..100 {
            let arche = *usable.choose(&mut rng).expect("nonempty");
            let &(h, t) = candidates[arche.index()].choose(&mut rng).expect("nonempty");
            let noisy = rng.random_bool(cfg.noise_rate);
            let r = if noisy {
                rng.random_range(0..all_terms)
            } else {
                *group_terms[arche.index()].choose(&mut rng).expect("nonempty")
            };
            let tr = Triple::new(h, r, t);
            if seen.insert(tr) {
                triples.push(tr);
                triple_archetypes.push(arche);
                report.emitted[arche.index()] += 1;
                report.noisy += usize::from(noisy);
                emitted = true;
                break;
            }
        }
        if !emitted {
            report.duplicate_skips += 1;
        }
    }

    Ok(SynthDataset {
        entities,
        relations,
        geometries,
        triples,
        triple_archetypes,
        term_archetypes,
        report,
    })
}
