//! Geometry-aware knowledge graph embedding for geospatial knowledge graphs.
//!
//! Entities and relation terms are embedded in polar form: a modulus part
//! modelled as element-wise scaling and a phase part modelled as an additive
//! rotation modulo 2π. Alongside the usual triplet objective, relation terms
//! are pulled towards learned embeddings of the geometric configurations they
//! describe (DE-9IM topology, 8-point compass direction and natural-breaks
//! distance bins), so that terms naming the same configuration in different
//! words end up close together.
//!
//! The crate is organised as a pipeline:
//!
//! - [`kg`]: vocabularies, triples, seeded splits and the filter index.
//! - [`geometry`]: WKT subset, centroids, projection, DE-9IM, compass octants.
//! - [`features`]: Jenks natural breaks, pair features, alignment pairs.
//! - [`model`]: parameter tables, the two distance functions and their gradients.
//! - [`train`]: self-adversarial negative sampling, Adam, checkpoints.
//! - [`eval`]: filtered ranking, MRR / Hits@N, top-k prediction reports.
//! - [`synth`]: synthetic geospatial knowledge graphs with a known signal.
//! - [`cli`]: the `geokge` command line front end.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod kg;
pub mod model;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use eval::{evaluate_split, predict_topk, rank_query, MetricsTable, Query, RankingResult, Slot};
pub use features::{
    build_alignment_pairs, extract_pair_features, jenks_breaks, AlignmentPair, FeatureKind,
    FeatureVocab, JenksBreaks, KindSet, PairFeatures,
};
pub use geometry::{de9im, Geometry, GeometryError, GeometryKind};
pub use kg::{split_dataset, FilterIndex, SplitDataset, SplitRatio, Triple, Vocabulary};
pub use model::{EmbeddingSpace, ScoreBreakdown};
pub use train::{train, Checkpoint, TrainConfig, TrainOutput};
