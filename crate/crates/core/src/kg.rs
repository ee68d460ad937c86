//! Symbolic knowledge-graph storage: vocabularies, triples, seeded splits and
//! the known-true index used by filtered ranking.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense, insertion-ordered mapping between names and ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from names in id order. Duplicates are rejected.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for name in names {
            let name = name.into();
            if vocab.index.contains_key(&name) {
                return Err(Error::Dataset(format!("duplicate vocabulary entry `{name}`")));
            }
            vocab.get_or_insert(&name);
        }
        Ok(vocab)
    }

    pub fn get_or_insert(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i, n.as_str()))
    }

    /// One name per line, in id order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocabulary::from_names(text.lines().filter(|l| !l.is_empty()))
    }
}

/// Stable 64-bit fingerprint of an (entity, relation) vocabulary pair.
pub fn vocab_hash(entities: &Vocabulary, relations: &Vocabulary) -> u64 {
    let mut hasher = Sha256::new();
    for name in entities.names() {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update([0xffu8]);
    for name in relations.names() {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub h: usize,
    pub r: usize,
    pub t: usize,
}

impl Triple {
    pub fn new(h: usize, r: usize, t: usize) -> Self {
        Self { h, r, t }
    }
}

fn parse_line<'a>(path: &str, lineno: usize, line: &'a str) -> Result<Option<[&'a str; 3]>> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::parse(
            path,
            lineno,
            format!("expected 3 tab-separated fields, found {}", fields.len()),
        ));
    }
    if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
        let which = ["head", "relation", "tail"][pos];
        return Err(Error::parse(path, lineno, format!("empty {which} field")));
    }
    Ok(Some([fields[0], fields[1], fields[2]]))
}

/// Reads a `head<TAB>relation<TAB>tail` file, extending the given
/// vocabularies in first-seen order. Duplicate lines are kept.
pub fn ingest_triples(
    path: &Path,
    mut entities: Vocabulary,
    mut relations: Vocabulary,
) -> Result<(Vocabulary, Vocabulary, Vec<Triple>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut triples = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some([h, r, t]) = parse_line(&display, i + 1, &line)? {
            let h = entities.get_or_insert(h);
            let r = relations.get_or_insert(r);
            let t = entities.get_or_insert(t);
            triples.push(Triple::new(h, r, t));
        }
    }
    if triples.is_empty() {
        return Err(Error::Empty(display));
    }
    Ok((entities, relations, triples))
}

/// Like [`ingest_triples`] but against fixed vocabularies: an unknown name is
/// a vocabulary mismatch rather than a new id.
pub fn ingest_triples_frozen(
    path: &Path,
    entities: &Vocabulary,
    relations: &Vocabulary,
) -> Result<Vec<Triple>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut triples = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some([h, r, t]) = parse_line(&display, i + 1, &line)? {
            let lookup = |vocab: &Vocabulary, kind: &str, name: &str| {
                vocab.id(name).ok_or_else(|| {
                    Error::VocabMismatch(format!("{display}:{}: unknown {kind} `{name}`", i + 1))
                })
            };
            triples.push(Triple::new(
                lookup(entities, "entity", h)?,
                lookup(relations, "relation", r)?,
                lookup(entities, "entity", t)?,
            ));
        }
    }
    if triples.is_empty() {
        return Err(Error::Empty(display));
    }
    Ok(triples)
}

pub fn write_triples(
    path: &Path,
    triples: &[Triple],
    entities: &Vocabulary,
    relations: &Vocabulary,
) -> Result<()> {
    let mut out = String::new();
    for tr in triples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            entities.name(tr.h),
            relations.name(tr.r),
            entities.name(tr.t)
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Removes repeated triples, keeping the first occurrence of each.
pub fn dedup_triples(triples: &mut Vec<Triple>) {
    let mut seen = HashSet::with_capacity(triples.len());
    triples.retain(|t| seen.insert(*t));
}

/// Integer train/valid/test percentages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub valid: u32,
    pub test: u32,
}

impl SplitRatio {
    pub const DEFAULT: SplitRatio = SplitRatio {
        train: 87,
        valid: 3,
        test: 10,
    };

    pub fn new(train: u32, valid: u32, test: u32) -> Result<Self> {
        let ratio = SplitRatio { train, valid, test };
        ratio.validate()?;
        Ok(ratio)
    }

    fn validate(&self) -> Result<()> {
        if self.train == 0 || self.valid == 0 || self.test == 0 {
            return Err(Error::Config(format!("split percentages must be positive: {self}")));
        }
        if self.train + self.valid + self.test != 100 {
            return Err(Error::Config(format!("split percentages must sum to 100: {self}")));
        }
        Ok(())
    }

    /// Part sizes for `n` items: floor allocation for valid and test, the
    /// remainder to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let valid = n * self.valid as usize / 100;
        let test = n * self.test as usize / 100;
        (n - valid - test, valid, test)
    }
}

impl std::fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.train, self.valid, self.test)
    }
}

impl std::str::FromStr for SplitRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("ratio `{s}` is not train:valid:test")));
        }
        let mut nums = [0u32; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("ratio `{s}` has a non-integer part")))?;
        }
        SplitRatio::new(nums[0], nums[1], nums[2])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    pub split_seed: u64,
}

impl SplitDataset {
    pub fn all(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }
}

/// Seeded shuffle followed by a contiguous train/valid/test cut.
pub fn split_dataset(triples: &[Triple], ratio: SplitRatio, seed: u64) -> Result<SplitDataset> {
    ratio.validate()?;
    let n = triples.len();
    let (n_train, n_valid, n_test) = ratio.sizes(n);
    if n_train == 0 || n_valid == 0 || n_test == 0 {
        return Err(Error::Dataset(format!(
            "{n} triples cannot fill every part of a {ratio} split"
        )));
    }
    let mut shuffled = triples.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let test = shuffled.split_off(n_train + n_valid);
    let valid = shuffled.split_off(n_train);
    Ok(SplitDataset {
        train: shuffled,
        valid,
        test,
        split_seed: seed,
    })
}

/// Known-true triples with the three projections used to filter rankings.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    known: HashSet<Triple>,
    by_hr: HashMap<(usize, usize), HashSet<usize>>,
    by_rt: HashMap<(usize, usize), HashSet<usize>>,
    by_ht: HashMap<(usize, usize), HashSet<usize>>,
}

impl FilterIndex {
    pub fn build<'a, I>(splits: I) -> Self
    where
        I: IntoIterator<Item = &'a [Triple]>,
    {
        let mut index = FilterIndex::default();
        for split in splits {
            for &tr in split {
                index.insert(tr);
            }
        }
        index
    }

    pub fn insert(&mut self, tr: Triple) {
        if self.known.insert(tr) {
            self.by_hr.entry((tr.h, tr.r)).or_default().insert(tr.t);
            self.by_rt.entry((tr.r, tr.t)).or_default().insert(tr.h);
            self.by_ht.entry((tr.h, tr.t)).or_default().insert(tr.r);
        }
    }

    pub fn contains(&self, tr: &Triple) -> bool {
        self.known.contains(tr)
    }

    pub fn tails(&self, h: usize, r: usize) -> Option<&HashSet<usize>> {
        self.by_hr.get(&(h, r))
    }

    pub fn heads(&self, r: usize, t: usize) -> Option<&HashSet<usize>> {
        self.by_rt.get(&(r, t))
    }

    pub fn relations(&self, h: usize, t: usize) -> Option<&HashSet<usize>> {
        self.by_ht.get(&(h, t))
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.known.iter()
    }
}

/// Which splits count as known-true when filtering rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// train + valid + test
    #[default]
    All,
    TrainOnly,
}

impl FilterMode {
    pub fn build_index(self, split: &SplitDataset) -> FilterIndex {
        match self {
            FilterMode::All => FilterIndex::build([
                split.train.as_slice(),
                split.valid.as_slice(),
                split.test.as_slice(),
            ]),
            FilterMode::TrainOnly => FilterIndex::build([split.train.as_slice()]),
        }
    }
}

impl std::str::FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(FilterMode::All),
            "train-only" => Ok(FilterMode::TrainOnly),
            other => Err(Error::Config(format!("unknown filter mode `{other}`"))),
        }
    }
}

/// A split written to disk: three triple files, the two vocabularies and a
/// plain-text metadata file.
#[derive(Debug, Clone)]
pub struct SplitManifest {
    pub entities: Vocabulary,
    pub relations: Vocabulary,
    pub split: SplitDataset,
}

impl SplitManifest {
    pub const TRAIN: &'static str = "train.tsv";
    pub const VALID: &'static str = "valid.tsv";
    pub const TEST: &'static str = "test.tsv";
    pub const ENTITIES: &'static str = "entities.txt";
    pub const RELATIONS: &'static str = "relations.txt";
    pub const META: &'static str = "split.meta";

    pub fn vocab_hash(&self) -> u64 {
        vocab_hash(&self.entities, &self.relations)
    }

    pub fn save(&self, dir: &Path, ratio: SplitRatio) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let s = &self.split;
        write_triples(&dir.join(Self::TRAIN), &s.train, &self.entities, &self.relations)?;
        write_triples(&dir.join(Self::VALID), &s.valid, &self.entities, &self.relations)?;
        write_triples(&dir.join(Self::TEST), &s.test, &self.entities, &self.relations)?;
        self.entities.save(&dir.join(Self::ENTITIES))?;
        self.relations.save(&dir.join(Self::RELATIONS))?;
        let meta = format!(
            "seed = {}\nratio = {}\ntrain = {}\nvalid = {}\ntest = {}\nentities = {}\nrelations = {}\nvocab_hash = {:016x}\n",
            s.split_seed,
            ratio,
            s.train.len(),
            s.valid.len(),
            s.test.len(),
            self.entities.len(),
            self.relations.len(),
            self.vocab_hash(),
        );
        let path = dir.join(Self::META);
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        file.write_all(meta.as_bytes()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let entities = Vocabulary::load(&dir.join(Self::ENTITIES))?;
        let relations = Vocabulary::load(&dir.join(Self::RELATIONS))?;
        let meta_path = dir.join(Self::META);
        let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut seed = None;
        let mut recorded_hash = None;
        for line in meta.lines() {
            if let Some((key, value)) = line.split_once('=') {
                match key.trim() {
                    "seed" => seed = value.trim().parse::<u64>().ok(),
                    "vocab_hash" => recorded_hash = u64::from_str_radix(value.trim(), 16).ok(),
                    _ => {}
                }
            }
        }
        let seed = seed.ok_or_else(|| Error::parse(meta_path.display(), 0, "missing seed"))?;
        if let Some(h) = recorded_hash {
            let actual = vocab_hash(&entities, &relations);
            if h != actual {
                return Err(Error::VocabMismatch(format!(
                    "{} records vocab hash {h:016x}, vocabulary files hash to {actual:016x}",
                    meta_path.display()
                )));
            }
        }
        let train = ingest_triples_frozen(&dir.join(Self::TRAIN), &entities, &relations)?;
        let valid = ingest_triples_frozen(&dir.join(Self::VALID), &entities, &relations)?;
        let test = ingest_triples_frozen(&dir.join(Self::TEST), &entities, &relations)?;
        Ok(SplitManifest {
            entities,
            relations,
            split: SplitDataset {
                train,
                valid,
                test,
                split_seed: seed,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn ingest_two_lines() {
        let f = write_tmp("A\tnear\tB\nB\tnear\tA\n");
        let (e, r, t) = ingest_triples(f.path(), Vocabulary::new(), Vocabulary::new()).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(r.len(), 1);
        assert_eq!(t, vec![Triple::new(0, 0, 1), Triple::new(1, 0, 0)]);
    }

    #[test]
    fn empty_relation_field_reports_line_one() {
        let f = write_tmp("A\t\tB\n");
        let err = ingest_triples(f.path(), Vocabulary::new(), Vocabulary::new()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let f = write_tmp("# header comment\n\nA\tadjacent to\tB\r\n");
        let (_, r, t) = ingest_triples(f.path(), Vocabulary::new(), Vocabulary::new()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(r.name(0), "adjacent to");
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = write_tmp("# only a comment\n");
        assert!(matches!(
            ingest_triples(f.path(), Vocabulary::new(), Vocabulary::new()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn duplicates_kept_unless_deduped() {
        let f = write_tmp("A\tr\tB\nA\tr\tB\n");
        let (_, _, mut t) = ingest_triples(f.path(), Vocabulary::new(), Vocabulary::new()).unwrap();
        assert_eq!(t.len(), 2);
        dedup_triples(&mut t);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn frozen_ingest_rejects_unknown_names() {
        let f = write_tmp("A\tr\tC\n");
        let ents = Vocabulary::from_names(["A", "B"]).unwrap();
        let rels = Vocabulary::from_names(["r"]).unwrap();
        assert!(matches!(
            ingest_triples_frozen(f.path(), &ents, &rels),
            Err(Error::VocabMismatch(_))
        ));
    }

    #[test]
    fn split_sizes() {
        let triples: Vec<Triple> = (0..100).map(|i| Triple::new(i, 0, i + 1)).collect();
        let s = split_dataset(&triples, SplitRatio::DEFAULT, 7).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (87, 3, 10));
        assert_eq!(SplitRatio::DEFAULT.sizes(4613), (4014, 138, 461));
    }

    #[test]
    fn split_rejects_bad_ratio_and_tiny_input() {
        assert!(SplitRatio::new(80, 10, 5).is_err());
        assert!("87:3".parse::<SplitRatio>().is_err());
        let triples: Vec<Triple> = (0..5).map(|i| Triple::new(i, 0, i)).collect();
        assert!(split_dataset(&triples, SplitRatio::DEFAULT, 0).is_err());
    }

    #[test]
    fn filter_index_projections() {
        let idx = FilterIndex::build([[Triple::new(0, 0, 1)].as_slice()]);
        assert!(idx.tails(0, 0).unwrap().contains(&1));
        assert!(idx.heads(0, 1).unwrap().contains(&0));
        assert!(idx.relations(0, 1).unwrap().contains(&0));

        let empty = FilterIndex::build(std::iter::empty::<&[Triple]>());
        assert!(empty.is_empty());
        assert!(empty.tails(0, 0).is_none());

        let a = [Triple::new(0, 0, 1)];
        let both = FilterIndex::build([a.as_slice(), a.as_slice()]);
        assert_eq!(both.len(), 1);
    }
}
