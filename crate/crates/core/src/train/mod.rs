//! Joint optimisation of the triplet objective and the relation/feature
//! alignment objective with Adam.
//!
//! Each epoch shuffles the training triples and walks them in batches. Every
//! batch also draws an equally sized batch of alignment pairs, with
//! replacement and proportionally to their weights, from a separate RNG
//! stream. The batch objective is
//! `mean triplet loss + align_weight · mean alignment loss`.

mod adam;
mod checkpoint;
mod config;
mod loss;
mod sampling;

use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{Checkpoint, MAGIC};
pub use config::TrainConfig;
pub use loss::{adversarial_weights, log_sigmoid, nsa_loss, sigmoid, NsaLoss};
pub use sampling::{
    sample_alignment_negatives, sample_triplet_negatives, SamplingStats, MAX_RETRIES,
};

use crate::error::{Error, Result};
use crate::features::{AlignmentPair, PairFeatures};
use crate::kg::{FilterIndex, Triple};
use crate::model::{EmbeddingSpace, Gradients};

const TRIPLET_STREAM: u64 = 1;
const ALIGN_STREAM: u64 = 2;

/// Everything the trainer reads besides the configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a> {
    pub train: &'a [Triple],
    pub n_entities: usize,
    pub n_relations: usize,
    /// Category counts per feature kind; zero when no features were built.
    pub feature_sizes: [usize; 3],
    pub alignment_pairs: &'a [AlignmentPair],
}

impl<'a> TrainData<'a> {
    /// Triplet-only data with empty feature tables.
    pub fn new(train: &'a [Triple], n_entities: usize, n_relations: usize) -> Self {
        TrainData {
            train,
            n_entities,
            n_relations,
            feature_sizes: [0; 3],
            alignment_pairs: &[],
        }
    }

    pub fn with_features(mut self, pf: &PairFeatures, pairs: &'a [AlignmentPair]) -> Self {
        self.feature_sizes = pf.sizes();
        self.alignment_pairs = pairs;
        self
    }
}

/// Mean losses over one epoch, measured before each batch's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub triplet: f64,
    /// Zero when no alignment pairs are in use.
    pub alignment: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub space: EmbeddingSpace,
    pub losses: Vec<EpochLoss>,
    pub stats: SamplingStats,
    pub rng_digest: String,
}

impl TrainOutput {
    pub fn into_checkpoint(self, config: &TrainConfig, vocab_hash: u64) -> Checkpoint {
        Checkpoint {
            config: config.clone(),
            epoch: self.losses.len() as u32,
            space: self.space,
            vocab_hash,
            rng_digest: self.rng_digest,
        }
    }
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn digest(rngs: &[&ChaCha8Rng]) -> String {
    let mut h = Sha256::new();
    for rng in rngs {
        h.update(rng.get_seed());
        h.update(rng.get_stream().to_le_bytes());
        h.update(rng.get_word_pos().to_le_bytes());
    }
    h.finalize()[..16].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn check_data(data: &TrainData, config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if data.train.is_empty() {
        return Err(Error::Dataset("no training triples".into()));
    }
    if data.n_entities < 2 {
        return Err(Error::Dataset("negative sampling needs at least two entities".into()));
    }
    for tr in data.train {
        if tr.h >= data.n_entities || tr.t >= data.n_entities || tr.r >= data.n_relations {
            return Err(Error::Dataset(format!("triple {tr:?} is outside the vocabularies")));
        }
    }
    for p in data.alignment_pairs {
        if p.r >= data.n_relations || p.g >= data.feature_sizes[p.kind.index()] || p.weight == 0 {
            return Err(Error::Dataset(format!("alignment pair {p:?} is inconsistent")));
        }
    }
    Ok(())
}

pub fn train(data: &TrainData, config: &TrainConfig) -> Result<TrainOutput> {
    train_with_progress(data, config, |_| {})
}

/// Like [`train`], calling `on_epoch` after every epoch.
pub fn train_with_progress(
    data: &TrainData,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLoss),
) -> Result<TrainOutput> {
    check_data(data, config)?;
    let mut es = EmbeddingSpace::init(
        data.n_entities,
        data.n_relations,
        data.feature_sizes,
        config.k,
        config.seed,
    );
    let filter = FilterIndex::build([data.train]);
    let pairs: Vec<AlignmentPair> = data
        .alignment_pairs
        .iter()
        .filter(|p| config.enabled_kinds.contains(p.kind))
        .copied()
        .collect();
    let use_alignment = config.align_weight > 0.0 && !pairs.is_empty();
    let sampler = if use_alignment {
        Some(
            WeightedIndex::new(pairs.iter().map(|p| p.weight))
                .map_err(|e| Error::Dataset(format!("alignment weights: {e}")))?,
        )
    } else {
        None
    };

    let mut trip_rng = rng_stream(config.seed, TRIPLET_STREAM);
    let mut align_rng = rng_stream(config.seed, ALIGN_STREAM);
    let mut grads = Gradients::for_space(&es);
    let mut adam = AdamState::for_space(&es);
    let mut stats = SamplingStats::default();
    let mut order: Vec<Triple> = data.train.to_vec();
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut trip_rng);
        let mut trip_sum = 0.0;
        let mut align_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_trip = 0.0;
            for &tr in batch {
                let negs = sample_triplet_negatives(
                    tr,
                    config.neg_rate,
                    data.n_entities,
                    &filter,
                    &mut trip_rng,
                    &mut stats,
                );
                let pos = es.triplet_distance(tr.h, tr.r, tr.t).total;
                let neg_d: Vec<f64> = negs
                    .iter()
                    .map(|n| es.triplet_distance(n.h, n.r, n.t).total)
                    .collect();
                let l = nsa_loss(pos, &neg_d, config.gamma, config.adversarial_temperature);
                batch_trip += l.loss;
                grads.add_triplet(&es, tr, scale * l.d_positive);
                for (n, g) in negs.iter().zip(&l.d_negatives) {
                    grads.add_triplet(&es, *n, scale * g);
                }
            }

            let mut batch_align = 0.0;
            if let Some(sampler) = &sampler {
                let a_scale = config.align_weight * scale;
                for _ in 0..batch.len() {
                    let pair = pairs[sampler.sample(&mut align_rng)];
                    let negs = sample_alignment_negatives(
                        &pair,
                        config.neg_rate,
                        data.feature_sizes[pair.kind.index()],
                        &mut align_rng,
                        &mut stats,
                    );
                    let pos = es.alignment_distance(pair.r, pair.kind, pair.g).total;
                    let neg_d: Vec<f64> = negs
                        .iter()
                        .map(|&g| es.alignment_distance(pair.r, pair.kind, g).total)
                        .collect();
                    let l = nsa_loss(pos, &neg_d, config.gamma, config.adversarial_temperature);
                    batch_align += l.loss;
                    grads.add_alignment(&es, pair.r, pair.kind, pair.g, a_scale * l.d_positive);
                    for (&g, d) in negs.iter().zip(&l.d_negatives) {
                        grads.add_alignment(&es, pair.r, pair.kind, g, a_scale * d);
                    }
                }
            }

            if !batch_trip.is_finite() || !batch_align.is_finite() {
                return Err(Error::NonFinite(format!("batch loss in epoch {epoch}")));
            }
            trip_sum += batch_trip;
            align_sum += batch_align;
            adam_step(&mut es, &grads, &mut adam, config.lr)?;
        }
        let n = order.len() as f64;
        let record = EpochLoss {
            epoch,
            triplet: trip_sum / n,
            alignment: if use_alignment { align_sum / n } else { 0.0 },
        };
        on_epoch(&record);
        losses.push(record);
    }

    Ok(TrainOutput {
        space: es,
        losses,
        stats,
        rng_digest: digest(&[&trip_rng, &align_rng]),
    })
}

/// Writes `epoch<TAB>triplet<TAB>alignment` lines at full precision.
pub fn write_loss_curve(path: &Path, losses: &[EpochLoss]) -> Result<()> {
    let mut out = String::from("epoch\ttriplet\talignment\n");
    for l in losses {
        let _ = writeln!(out, "{}\t{:?}\t{:?}", l.epoch, l.triplet, l.alignment);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    fn chain(n: usize) -> Vec<Triple> {
        (0..n).map(|i| Triple::new(i % 10, i % 3, (i * 7 + 1) % 10)).collect()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            k: 8,
            epochs: 5,
            batch_size: 16,
            seed: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn losses_are_finite_and_lambda_non_negative() {
        let triples = chain(40);
        let out = train(&TrainData::new(&triples, 10, 3), &small_config()).unwrap();
        assert_eq!(out.losses.len(), 5);
        assert!(out.losses.iter().all(|l| l.triplet.is_finite()));
        assert!(out.space.lambdas().iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn rejects_out_of_range_triples() {
        let triples = [Triple::new(0, 5, 1)];
        assert!(train(&TrainData::new(&triples, 2, 1), &small_config()).is_err());
    }

    #[test]
    fn disabled_kinds_leave_feature_tables_alone() {
        let triples = chain(30);
        let pairs = [AlignmentPair {
            r: 0,
            kind: FeatureKind::Dir,
            g: 1,
            weight: 3,
        }];
        let data = TrainData {
            feature_sizes: [2, 9, 4],
            alignment_pairs: &pairs,
            ..TrainData::new(&triples, 10, 3)
        };
        let mut cfg = small_config();
        cfg.enabled_kinds = "topo,dis".parse().unwrap();
        let out = train(&data, &cfg).unwrap();
        let init = EmbeddingSpace::init(10, 3, [2, 9, 4], 8, cfg.seed);
        for kind in FeatureKind::ALL {
            use crate::model::TableId;
            assert_eq!(
                out.space.table(TableId::feat_phase(kind)),
                init.table(TableId::feat_phase(kind))
            );
        }
        assert!(out.losses.iter().all(|l| l.alignment == 0.0));
    }
}
