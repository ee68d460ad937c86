use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{FeatureKind, FeatureVocab, JenksBreaks, PairFeature, PairFeatures};
use crate::error::{Error, Result};
use crate::kg::Vocabulary;

/// Writes `head<TAB>tail<TAB>topo<TAB>octant<TAB>bin` lines in pair-id order
/// and a sidecar with the distance boundaries in shortest round-trip form.
pub fn save_features(
    features_path: &Path,
    sidecar_path: &Path,
    pf: &PairFeatures,
    entities: &Vocabulary,
) -> Result<()> {
    let mut out = String::new();
    for (&(h, t), feat) in &pf.pairs {
        let label = |kind: FeatureKind| pf.vocab(kind).categories.name(feat.get(kind));
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            entities.name(h),
            entities.name(t),
            label(FeatureKind::Topo),
            label(FeatureKind::Dir),
            label(FeatureKind::Dis),
        );
    }
    fs::write(features_path, out).map_err(|e| Error::io(features_path, e))?;

    let mut side = String::from("# natural-breaks distance boundaries, one per line\n");
    let _ = writeln!(side, "classes = {}", pf.breaks.classes());
    let _ = writeln!(side, "requested = {}", pf.breaks.requested());
    for b in pf.breaks.boundaries() {
        let _ = writeln!(side, "{b:?}");
    }
    fs::write(sidecar_path, side).map_err(|e| Error::io(sidecar_path, e))
}

fn load_breaks(path: &Path) -> Result<JenksBreaks> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut classes = None;
    let mut requested = None;
    let mut boundaries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(&display, i + 1, "expected an integer"))?;
            match key.trim() {
                "classes" => classes = Some(value),
                "requested" => requested = Some(value),
                other => return Err(Error::parse(&display, i + 1, format!("unknown key `{other}`"))),
            }
        } else {
            boundaries.push(
                line.parse::<f64>()
                    .map_err(|_| Error::parse(&display, i + 1, "expected a boundary value"))?,
            );
        }
    }
    let classes = classes.ok_or_else(|| Error::parse(&display, 0, "missing `classes`"))?;
    if classes != boundaries.len() + 1 {
        return Err(Error::parse(
            &display,
            0,
            format!("{} boundaries do not make {classes} classes", boundaries.len()),
        ));
    }
    JenksBreaks::from_boundaries(boundaries, requested.unwrap_or(classes))
}

/// Reads a features file written by [`save_features`]. Entity names are
/// resolved against `entities`.
pub fn load_features(
    features_path: &Path,
    sidecar_path: &Path,
    entities: &Vocabulary,
) -> Result<PairFeatures> {
    let breaks = load_breaks(sidecar_path)?;
    let text = fs::read_to_string(features_path).map_err(|e| Error::io(features_path, e))?;
    let display = features_path.display().to_string();

    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(&display, i + 1, "expected 5 tab-separated fields"));
        }
        let entity = |name: &str| {
            entities.id(name).ok_or_else(|| {
                Error::VocabMismatch(format!("{display}:{}: unknown entity `{name}`", i + 1))
            })
        };
        rows.push((i + 1, entity(fields[0])?, entity(fields[1])?, fields[2], fields[3], fields[4]));
    }
    if rows.is_empty() {
        return Err(Error::Empty(display));
    }

    for (line, _, _, topo, _, _) in &rows {
        topo.parse::<crate::geometry::De9im>()
            .map_err(|e| Error::parse(&display, *line, e))?;
    }
    let topo = FeatureVocab::topology(rows.iter().map(|r| r.3.to_owned()));
    let dir = FeatureVocab::direction();
    let dis = FeatureVocab::distance(breaks.classes());

    let mut pairs = BTreeMap::new();
    for (line, h, t, topo_label, dir_label, dis_label) in rows {
        let lookup = |vocab: &FeatureVocab, label: &str| {
            vocab.categories.id(label).ok_or_else(|| {
                Error::parse(&display, line, format!("unknown {} category `{label}`", vocab.kind))
            })
        };
        let feat = PairFeature([
            lookup(&topo, topo_label)?,
            lookup(&dir, dir_label)?,
            lookup(&dis, dis_label)?,
        ]);
        if pairs.insert((h, t), feat).is_some() {
            return Err(Error::parse(&display, line, "duplicate entity pair"));
        }
    }
    Ok(PairFeatures {
        pairs,
        vocabs: [topo, dir, dis],
        breaks,
    })
}

#[cfg(test)]
mod tests {
    use super::super::extract_pair_features;
    use super::*;
    use crate::geometry::parse_geometry;
    use crate::kg::Triple;

    #[test]
    fn round_trip_is_byte_exact() {
        let entities = Vocabulary::from_names(["a", "b", "c", "d"]).unwrap();
        let geoms: Vec<_> = [
            "POLYGON ((0 0, 3 0, 3 3, 0 3, 0 0))",
            "POINT (1.1 0.7)",
            "LINESTRING (-1 1, 5 1.3)",
            "POINT (10.123456789 -3.3)",
        ]
        .iter()
        .map(|w| Some(parse_geometry(w).unwrap()))
        .collect();
        let triples = [
            Triple::new(0, 0, 1),
            Triple::new(2, 0, 0),
            Triple::new(3, 0, 1),
            Triple::new(1, 0, 3),
        ];
        let pf = extract_pair_features(&triples, &geoms, 3).unwrap().features;
        let dir = tempfile::tempdir().unwrap();
        let (f1, s1) = (dir.path().join("f1.tsv"), dir.path().join("s1.txt"));
        save_features(&f1, &s1, &pf, &entities).unwrap();
        let loaded = load_features(&f1, &s1, &entities).unwrap();
        assert_eq!(loaded, pf);
        let (f2, s2) = (dir.path().join("f2.tsv"), dir.path().join("s2.txt"));
        save_features(&f2, &s2, &loaded, &entities).unwrap();
        assert_eq!(fs::read(&f1).unwrap(), fs::read(&f2).unwrap());
        assert_eq!(fs::read(&s1).unwrap(), fs::read(&s2).unwrap());
    }
}
