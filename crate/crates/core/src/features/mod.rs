//! Categorical geometric features of entity pairs (DE-9IM topology pattern,
//! compass octant, natural-breaks distance bin) and the relation-term ↔
//! feature-category alignment pairs derived from them.

mod io;
pub mod jenks;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

pub use io::{load_features, save_features};
pub use jenks::{assign_bin, jenks_breaks, jenks_fit, JenksBreaks, JenksFit};

use crate::error::{Error, Result};
use crate::geometry::{centroid, compass_octant, de9im, CompassOctant, Geometry};
use crate::kg::{Triple, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Topo,
    Dir,
    Dis,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Topo, FeatureKind::Dir, FeatureKind::Dis];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Topo => "topo",
            FeatureKind::Dir => "dir",
            FeatureKind::Dis => "dis",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subset of feature kinds, written `topo,dir,dis` (empty string = none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KindSet([bool; 3]);

impl KindSet {
    pub const NONE: KindSet = KindSet([false; 3]);
    pub const ALL: KindSet = KindSet([true; 3]);

    pub fn contains(&self, kind: FeatureKind) -> bool {
        self.0[kind.index()]
    }

    pub fn with(mut self, kind: FeatureKind) -> Self {
        self.0[kind.index()] = true;
        self
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = FeatureKind> + '_ {
        FeatureKind::ALL.into_iter().filter(|k| self.contains(*k))
    }
}

impl fmt::Display for KindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(FeatureKind::name).collect();
        f.write_str(&names.join(","))
    }
}

impl std::str::FromStr for KindSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = KindSet::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let kind = match part.to_ascii_lowercase().as_str() {
                "topo" => FeatureKind::Topo,
                "dir" => FeatureKind::Dir,
                "dis" => FeatureKind::Dis,
                other => return Err(Error::Config(format!("unknown feature kind `{other}`"))),
            };
            set = set.with(kind);
        }
        Ok(set)
    }
}

pub const DIR_NONE: &str = "DIR_NONE";

/// Category labels of one feature kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVocab {
    pub kind: FeatureKind,
    pub categories: Vocabulary,
}

impl FeatureVocab {
    /// Topology categories: the given DE-9IM patterns, sorted.
    pub fn topology<I: IntoIterator<Item = String>>(patterns: I) -> Self {
        let mut patterns: Vec<String> = patterns.into_iter().collect();
        patterns.sort();
        patterns.dedup();
        FeatureVocab {
            kind: FeatureKind::Topo,
            categories: Vocabulary::from_names(patterns).expect("deduplicated"),
        }
    }

    /// The eight octants followed by `DIR_NONE`.
    pub fn direction() -> Self {
        let names = CompassOctant::ALL
            .iter()
            .map(|o| o.name())
            .chain(std::iter::once(DIR_NONE));
        FeatureVocab {
            kind: FeatureKind::Dir,
            categories: Vocabulary::from_names(names).expect("fixed labels are unique"),
        }
    }

    /// `bin00`, `bin01`, ... for `classes` distance bins.
    pub fn distance(classes: usize) -> Self {
        FeatureVocab {
            kind: FeatureKind::Dis,
            categories: Vocabulary::from_names((0..classes).map(bin_label))
                .expect("bin labels are unique"),
        }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

pub fn bin_label(bin: usize) -> String {
    format!("bin{bin:02}")
}

pub fn dir_none_id() -> usize {
    CompassOctant::ALL.len()
}

/// Feature category ids of one ordered entity pair, indexed by
/// [`FeatureKind::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairFeature(pub [usize; 3]);

impl PairFeature {
    pub fn get(&self, kind: FeatureKind) -> usize {
        self.0[kind.index()]
    }
}

/// Features of every ordered (head, tail) entity pair seen in the triples,
/// plus the category vocabularies and the distance breaks.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub pairs: BTreeMap<(usize, usize), PairFeature>,
    pub vocabs: [FeatureVocab; 3],
    pub breaks: JenksBreaks,
}

impl PairFeatures {
    pub fn get(&self, h: usize, t: usize) -> Option<&PairFeature> {
        self.pairs.get(&(h, t))
    }

    pub fn vocab(&self, kind: FeatureKind) -> &FeatureVocab {
        &self.vocabs[kind.index()]
    }

    /// Category counts per kind, in [`FeatureKind::ALL`] order.
    pub fn sizes(&self) -> [usize; 3] {
        [self.vocabs[0].len(), self.vocabs[1].len(), self.vocabs[2].len()]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Result of [`extract_pair_features`] with what had to be skipped.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub features: PairFeatures,
    /// Entity ids referenced by triples but lacking geometry.
    pub missing_geometry: Vec<usize>,
    /// Pairs dropped because an endpoint lacked geometry.
    pub skipped_pairs: usize,
}

struct RawPair {
    key: (usize, usize),
    topo: String,
    dir: usize,
    distance: f64,
}

/// Computes topology, direction and distance-bin features for each distinct
/// ordered (head, tail) pair in `triples`. `geoms` is indexed by entity id.
/// Distance breaks are fitted on the centroid distances of those pairs.
pub fn extract_pair_features(
    triples: &[Triple],
    geoms: &[Option<Geometry>],
    dis_bins: usize,
) -> Result<Extraction> {
    if dis_bins == 0 {
        return Err(Error::Config("distance bin count must be at least 1".into()));
    }
    let mut keys: Vec<(usize, usize)> = triples.iter().map(|t| (t.h, t.t)).collect();
    keys.sort_unstable();
    keys.dedup();

    let geom_of = |id: usize| geoms.get(id).and_then(Option::as_ref);
    let mut missing: Vec<usize> = keys
        .iter()
        .flat_map(|&(h, t)| [h, t])
        .filter(|&id| geom_of(id).is_none())
        .collect();
    missing.sort_unstable();
    missing.dedup();

    let usable: Vec<(usize, usize)> = keys
        .iter()
        .copied()
        .filter(|&(h, t)| geom_of(h).is_some() && geom_of(t).is_some())
        .collect();
    let skipped_pairs = keys.len() - usable.len();
    if usable.is_empty() {
        return Err(Error::Dataset("no triple has geometry for both entities".into()));
    }

    let raw: Vec<RawPair> = usable
        .par_iter()
        .map(|&(h, t)| {
            let (gh, gt) = (geom_of(h).expect("filtered"), geom_of(t).expect("filtered"));
            let (ch, ct) = (centroid(gh), centroid(gt));
            RawPair {
                key: (h, t),
                topo: de9im(gh, gt).to_string(),
                dir: compass_octant(ch, ct).map_or(dir_none_id(), CompassOctant::id),
                distance: ch.distance(ct),
            }
        })
        .collect();

    let distances: Vec<f64> = raw.iter().map(|p| p.distance).collect();
    let breaks = jenks_breaks(&distances, dis_bins)?;
    let topo_vocab = FeatureVocab::topology(raw.iter().map(|p| p.topo.clone()));
    let pairs = raw
        .iter()
        .map(|p| {
            let topo = topo_vocab.categories.id(&p.topo).expect("pattern collected above");
            (p.key, PairFeature([topo, p.dir, breaks.classify(p.distance)]))
        })
        .collect();

    Ok(Extraction {
        features: PairFeatures {
            pairs,
            vocabs: [
                topo_vocab,
                FeatureVocab::direction(),
                FeatureVocab::distance(breaks.classes()),
            ],
            breaks,
        },
        missing_geometry: missing,
        skipped_pairs,
    })
}

/// A (relation term, feature category) pair to be drawn together during
/// training, weighted by how often it occurs in the training triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlignmentPair {
    pub r: usize,
    pub kind: FeatureKind,
    pub g: usize,
    pub weight: u32,
}

/// Aggregates (relation, kind, category) occurrences over the training
/// triples for each enabled kind. Triples without pair features are skipped.
pub fn build_alignment_pairs(
    train: &[Triple],
    pf: &PairFeatures,
    enabled: KindSet,
) -> Vec<AlignmentPair> {
    let mut counts: BTreeMap<(usize, FeatureKind, usize), u32> = BTreeMap::new();
    for tr in train {
        let Some(feat) = pf.get(tr.h, tr.t) else {
            continue;
        };
        for kind in enabled.iter() {
            *counts.entry((tr.r, kind, feat.get(kind))).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((r, kind, g), weight)| AlignmentPair { r, kind, g, weight })
        .collect()
}

/// Number of training triples whose pair has no features.
pub fn uncovered_triples(train: &[Triple], pf: &PairFeatures) -> usize {
    train.iter().filter(|t| pf.get(t.h, t.t).is_none()).count()
}

/// Resolves entity names in `geoms` against `entities`, returning a table
/// indexed by entity id. Geometries of unknown entities are ignored.
pub fn geometry_table(
    entities: &Vocabulary,
    geoms: Vec<(String, Geometry)>,
) -> Vec<Option<Geometry>> {
    let mut table = vec![None; entities.len()];
    for (name, g) in geoms {
        if let Some(id) = entities.id(&name) {
            table[id] = Some(g);
        }
    }
    table
}
