//! Filtered link-prediction ranking and the metrics built on it.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::kg::{FilterIndex, Triple, Vocabulary};
use crate::model::EmbeddingSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Head,
    Tail,
    Relation,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Head, Slot::Tail, Slot::Relation];
}

/// A triple with one slot to be predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub triple: Triple,
    pub slot: Slot,
}

impl Query {
    pub fn new(triple: Triple, slot: Slot) -> Self {
        Query { triple, slot }
    }

    fn target(&self) -> usize {
        match self.slot {
            Slot::Head => self.triple.h,
            Slot::Tail => self.triple.t,
            Slot::Relation => self.triple.r,
        }
    }

    fn with(&self, candidate: usize) -> Triple {
        let mut tr = self.triple;
        match self.slot {
            Slot::Head => tr.h = candidate,
            Slot::Tail => tr.t = candidate,
            Slot::Relation => tr.r = candidate,
        }
        tr
    }

    fn candidates(&self, es: &EmbeddingSpace) -> usize {
        match self.slot {
            Slot::Head | Slot::Tail => es.n_entities(),
            Slot::Relation => es.n_relations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub query: Query,
    pub target: usize,
    /// `1 + #better + #ties / 2` among surviving candidates; may be fractional.
    pub rank: f64,
    /// Best surviving candidates, ascending by distance (ties by id).
    pub top_k: Vec<(usize, f64)>,
}

fn distance(es: &EmbeddingSpace, tr: Triple) -> f64 {
    es.triplet_distance(tr.h, tr.r, tr.t).total
}

/// Distances of every candidate that is the target or not known-true.
fn surviving(es: &EmbeddingSpace, q: &Query, target: Option<usize>, filter: &FilterIndex) -> Vec<(usize, f64)> {
    (0..q.candidates(es))
        .filter_map(|c| {
            let tr = q.with(c);
            (Some(c) == target || !filter.contains(&tr)).then(|| (c, distance(es, tr)))
        })
        .collect()
}

fn top(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Ranks the query's own triple among all candidates for its slot, after
/// removing candidates that form other known-true triples.
pub fn rank_query(es: &EmbeddingSpace, q: Query, filter: &FilterIndex, top_k: usize) -> RankingResult {
    let target = q.target();
    let scored = surviving(es, &q, Some(target), filter);
    let d_target = scored
        .iter()
        .find(|(c, _)| *c == target)
        .map(|&(_, d)| d)
        .expect("target survives filtering");
    let mut better = 0usize;
    let mut ties = 0usize;
    for &(c, d) in &scored {
        if c == target {
            continue;
        }
        if d < d_target {
            better += 1;
        } else if d == d_target {
            ties += 1;
        }
    }
    RankingResult {
        query: q,
        target,
        rank: 1.0 + better as f64 + ties as f64 / 2.0,
        top_k: if top_k == 0 { Vec::new() } else { top(scored, top_k) },
    }
}

/// MRR and Hits@{1,3,5,10} over a set of queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mrr: f64,
    /// Hits at [`HITS_AT`].
    pub hits: [f64; 4],
    pub queries: usize,
}

pub const HITS_AT: [usize; 4] = [1, 3, 5, 10];

impl Metrics {
    pub fn from_ranks(ranks: &[f64]) -> Self {
        assert!(!ranks.is_empty(), "metrics over no queries");
        let n = ranks.len() as f64;
        let mrr = ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n;
        let hits = HITS_AT.map(|at| ranks.iter().filter(|&&r| r <= at as f64).count() as f64 / n);
        Metrics {
            mrr,
            hits,
            queries: ranks.len(),
        }
    }

    /// Query-weighted mean of two metric blocks.
    pub fn pool(a: &Metrics, b: &Metrics) -> Metrics {
        let (wa, wb) = (a.queries as f64, b.queries as f64);
        let mix = |x: f64, y: f64| (wa * x + wb * y) / (wa + wb);
        Metrics {
            mrr: mix(a.mrr, b.mrr),
            hits: std::array::from_fn(|i| mix(a.hits[i], b.hits[i])),
            queries: a.queries + b.queries,
        }
    }

    /// `[MRR, H@1, H@3, H@5, H@10]`.
    pub fn values(&self) -> [f64; 5] {
        [self.mrr, self.hits[0], self.hits[1], self.hits[2], self.hits[3]]
    }
}

/// Entity (head and tail), relation and pooled overall metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsTable {
    pub entity: Metrics,
    pub relation: Metrics,
    pub overall: Metrics,
}

impl MetricsTable {
    /// Builds the table from per-task blocks; overall is their query-weighted
    /// pool. Each triple yields two entity queries and one relation query.
    pub fn from_blocks(entity: Metrics, relation: Metrics) -> Self {
        MetricsTable {
            overall: Metrics::pool(&entity, &relation),
            entity,
            relation,
        }
    }

    /// Overall block from reported per-task values when each triple
    /// contributes one head, one tail and one relation query.
    pub fn overall_from_reported(entity: [f64; 5], relation: [f64; 5]) -> [f64; 5] {
        std::array::from_fn(|i| (2.0 * entity[i] + relation[i]) / 3.0)
    }

    /// TSV with a `task<TAB>MRR<TAB>H@1<TAB>H@3<TAB>H@5<TAB>H@10` header;
    /// three decimals unless `full_precision`.
    pub fn to_tsv(&self, full_precision: bool) -> String {
        let mut out = String::from("task\tMRR\tH@1\tH@3\tH@5\tH@10\n");
        for (name, m) in [("entity", &self.entity), ("relation", &self.relation), ("overall", &self.overall)] {
            out.push_str(name);
            for v in m.values() {
                if full_precision {
                    let _ = write!(out, "\t{v:?}");
                } else {
                    let _ = write!(out, "\t{v:.3}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Filtered ranks of the head, tail and relation queries of each triple, in
/// input order.
pub fn split_ranks(es: &EmbeddingSpace, split: &[Triple], filter: &FilterIndex) -> Vec<[f64; 3]> {
    split
        .par_iter()
        .map(|&tr| Slot::ALL.map(|slot| rank_query(es, Query::new(tr, slot), filter, 0).rank))
        .collect()
}

pub fn evaluate_split(es: &EmbeddingSpace, split: &[Triple], filter: &FilterIndex) -> MetricsTable {
    let ranks = split_ranks(es, split, filter);
    let entity: Vec<f64> = ranks.iter().flat_map(|r| [r[0], r[1]]).collect();
    let relation: Vec<f64> = ranks.iter().map(|r| r[2]).collect();
    MetricsTable::from_blocks(Metrics::from_ranks(&entity), Metrics::from_ranks(&relation))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub id: usize,
    pub distance: f64,
}

/// Best `k` candidates for the query's slot that do not form a known-true
/// triple. The query triple's value in that slot is ignored.
pub fn predict_topk(es: &EmbeddingSpace, q: Query, k: usize, filter: &FilterIndex) -> Vec<Prediction> {
    top(surviving(es, &q, None, filter), k)
        .into_iter()
        .map(|(id, distance)| Prediction { id, distance })
        .collect()
}

/// `rank<TAB>name<TAB>distance` report.
pub fn format_predictions(preds: &[Prediction], names: &Vocabulary) -> String {
    let mut out = String::from("rank\tname\tdistance\n");
    for (i, p) in preds.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{:.6}", i + 1, names.name(p.id), p.distance);
    }
    out
}
