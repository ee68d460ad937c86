use rand::Rng;

use crate::features::AlignmentPair;
use crate::kg::{FilterIndex, Triple};

/// Redraws allowed before a known-true corruption is accepted anyway.
pub const MAX_RETRIES: usize = 10;

/// Counters for degenerate sampling situations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplingStats {
    /// Negatives accepted although they form a known-true triple.
    pub retry_exhausted: u64,
    /// Alignment pairs whose kind has a single category and so no negatives.
    pub empty_alignment_sets: u64,
}

/// Draws `n` corruptions of `tr`, each replacing the head or the tail (fair
/// coin) with a different, uniformly drawn entity. Corruptions that are
/// known-true in `filter` are redrawn up to [`MAX_RETRIES`] times.
pub fn sample_triplet_negatives<R: Rng>(
    tr: Triple,
    n: usize,
    n_entities: usize,
    filter: &FilterIndex,
    rng: &mut R,
    stats: &mut SamplingStats,
) -> Vec<Triple> {
    assert!(n_entities >= 2, "negative sampling needs at least two entities");
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let corrupt_head = rng.random_bool(0.5);
        let mut attempts = 0;
        loop {
            let original = if corrupt_head { tr.h } else { tr.t };
            // Uniform over every entity except the original.
            let mut e = rng.random_range(0..n_entities - 1);
            if e >= original {
                e += 1;
            }
            let neg = if corrupt_head {
                Triple::new(e, tr.r, tr.t)
            } else {
                Triple::new(tr.h, tr.r, e)
            };
            if !filter.contains(&neg) {
                out.push(neg);
                break;
            }
            attempts += 1;
            if attempts > MAX_RETRIES {
                stats.retry_exhausted += 1;
                out.push(neg);
                break;
            }
        }
    }
    out
}

/// Draws `n` categories of `pair.kind` that differ from `pair.g`. A kind with
/// a single category yields no negatives.
pub fn sample_alignment_negatives<R: Rng>(
    pair: &AlignmentPair,
    n: usize,
    vocab_size: usize,
    rng: &mut R,
    stats: &mut SamplingStats,
) -> Vec<usize> {
    if vocab_size < 2 {
        stats.empty_alignment_sets += 1;
        return Vec::new();
    }
    (0..n)
        .map(|_| {
            let g = rng.random_range(0..vocab_size - 1);
            if g >= pair.g {
                g + 1
            } else {
                g
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triplet_negatives_differ_from_positive() {
        let pos = Triple::new(0, 0, 1);
        let filter = FilterIndex::build([&[pos][..]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut stats = SamplingStats::default();
        let negs = sample_triplet_negatives(pos, 5, 10, &filter, &mut rng, &mut stats);
        assert_eq!(negs.len(), 5);
        assert!(negs.iter().all(|n| *n != pos && n.r == pos.r));
        assert_eq!(stats.retry_exhausted, 0);
    }

    #[test]
    fn two_entity_graph_exhausts_retries() {
        // Every corruption of (0, r, 1) is (1, r, 1) or (0, r, 0); both known.
        let known = [Triple::new(0, 0, 1), Triple::new(1, 0, 1), Triple::new(0, 0, 0)];
        let filter = FilterIndex::build([&known[..]]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut stats = SamplingStats::default();
        let negs = sample_triplet_negatives(known[0], 4, 2, &filter, &mut rng, &mut stats);
        assert_eq!(negs.len(), 4);
        assert_eq!(stats.retry_exhausted, 4);
    }

    #[test]
    fn seeded_sequences_repeat() {
        let filter = FilterIndex::default();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut stats = SamplingStats::default();
            sample_triplet_negatives(Triple::new(2, 1, 3), 20, 7, &filter, &mut rng, &mut stats)
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn alignment_negatives_keep_kind_and_change_category() {
        let pair = AlignmentPair {
            r: 0,
            kind: FeatureKind::Dir,
            g: 3,
            weight: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut stats = SamplingStats::default();
        let negs = sample_alignment_negatives(&pair, 10_000, 9, &mut rng, &mut stats);
        assert_eq!(negs.len(), 10_000);
        assert!(negs.iter().all(|&g| g != 3 && g < 9));
        assert!((0..9).filter(|&g| g != 3).all(|g| negs.contains(&g)));
        assert!(sample_alignment_negatives(&pair, 5, 1, &mut rng, &mut stats).is_empty());
        assert_eq!(stats.empty_alignment_sets, 1);
    }
}
