//! Parameter tables and the two distance functions.
//!
//! A triple `(h, r, t)` is scored in polar form. The modulus part treats the
//! relation as an element-wise scaling, `t_m ≈ h_m ∘ |r_m|`; the phase part
//! treats it as a rotation, `t_p ≈ h_p + r_p (mod 2π)`:
//!
//! ```text
//! d(h, r, t) = ‖h_m ∘ |r_m| − t_m‖₂ + λ_triplet · ‖sin((h_p + r_p − t_p) / 2)‖₁
//! ```
//!
//! A relation term `r` is aligned with a geometric feature category `g` by the
//! analogous distance between their own modulus and phase vectors:
//!
//! ```text
//! d(r, g) = ‖|r_m| − |g_m|‖₂ + λ_align · ‖sin((r_p − g_p) / 2)‖₁
//! ```
//!
//! Relation and feature moduli are stored unconstrained and used through the
//! absolute value. Phases are stored unconstrained as well; only their value
//! modulo 2π matters. Non-differentiable points (zero L2 norm, zero sine or
//! zero raw modulus) use the subgradient 0.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureKind;
use crate::kg::Triple;

/// Dense row-major matrix of `rows × dim` reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Table {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Table {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_data(rows: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * dim, "table data does not match its shape");
        Table { rows, dim, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Index of a parameter table. The order is the serialisation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableId(usize);

impl TableId {
    pub const ENTITY_PHASE: TableId = TableId(0);
    pub const ENTITY_MOD: TableId = TableId(1);
    pub const REL_PHASE: TableId = TableId(2);
    pub const REL_MOD_RAW: TableId = TableId(3);
    pub const COUNT: usize = 10;

    pub fn feat_phase(kind: FeatureKind) -> TableId {
        TableId(4 + kind.index())
    }

    pub fn feat_mod_raw(kind: FeatureKind) -> TableId {
        TableId(7 + kind.index())
    }

    pub fn all() -> impl Iterator<Item = TableId> {
        (0..Self::COUNT).map(TableId)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_phase(self) -> bool {
        matches!(self.0, 0 | 2 | 4..=6)
    }
}

/// Learnable scalar weights on the phase parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lambda {
    Triplet = 0,
    Align = 1,
}

/// All trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    k: usize,
    tables: [Table; TableId::COUNT],
    lambdas: [f64; 2],
}

/// Distance split into its two parts; `total = modulus_part + λ · phase_part`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub modulus_part: f64,
    pub phase_part: f64,
    pub total: f64,
}

impl EmbeddingSpace {
    /// Phases uniform in `[0, 2π)`, moduli uniform in `[-0.05, 0.05]`, both
    /// λ at 1. Entity and relation tables are drawn before feature tables, so
    /// they do not depend on the feature vocabulary sizes.
    pub fn init(
        n_entities: usize,
        n_relations: usize,
        feature_sizes: [usize; 3],
        k: usize,
        seed: u64,
    ) -> Self {
        assert!(k >= 1, "embedding dimension must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = |rows: usize, rng: &mut ChaCha8Rng| {
            let data = (0..rows * k).map(|_| rng.random_range(0.0..TAU)).collect();
            Table::from_data(rows, k, data)
        };
        let ent_p = phase(n_entities, &mut rng);
        let ent_m = uniform_table(n_entities, k, &mut rng);
        let rel_p = phase(n_relations, &mut rng);
        let rel_m = uniform_table(n_relations, k, &mut rng);
        let mut feat_p = Vec::new();
        let mut feat_m = Vec::new();
        for &size in &feature_sizes {
            feat_p.push(phase(size, &mut rng));
            feat_m.push(uniform_table(size, k, &mut rng));
        }
        let [fm0, fm1, fm2]: [Table; 3] = feat_m.try_into().expect("three kinds");
        let [fp0, fp1, fp2]: [Table; 3] = feat_p.try_into().expect("three kinds");
        EmbeddingSpace {
            k,
            tables: [ent_p, ent_m, rel_p, rel_m, fp0, fp1, fp2, fm0, fm1, fm2],
            lambdas: [1.0, 1.0],
        }
    }

    pub fn from_parts(k: usize, tables: [Table; TableId::COUNT], lambdas: [f64; 2]) -> Self {
        for t in &tables {
            assert_eq!(t.dim(), k, "table dimension differs from k");
        }
        EmbeddingSpace { k, tables, lambdas }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_entities(&self) -> usize {
        self.tables[0].rows()
    }

    pub fn n_relations(&self) -> usize {
        self.tables[2].rows()
    }

    pub fn feature_sizes(&self) -> [usize; 3] {
        FeatureKind::ALL.map(|k| self.table(TableId::feat_phase(k)).rows())
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.index()]
    }

    pub fn table_mut(&mut self, id: TableId) -> &mut Table {
        &mut self.tables[id.index()]
    }

    pub fn tables(&self) -> &[Table; TableId::COUNT] {
        &self.tables
    }

    pub fn lambda(&self, which: Lambda) -> f64 {
        self.lambdas[which as usize]
    }

    pub fn set_lambda(&mut self, which: Lambda, value: f64) {
        self.lambdas[which as usize] = value;
    }

    pub fn lambdas(&self) -> [f64; 2] {
        self.lambdas
    }

    pub fn is_finite(&self) -> bool {
        self.tables.iter().all(|t| t.data().iter().all(|v| v.is_finite()))
            && self.lambdas.iter().all(|v| v.is_finite())
    }

    pub fn triplet_distance(&self, h: usize, r: usize, t: usize) -> ScoreBreakdown {
        let hm = self.table(TableId::ENTITY_MOD).row(h);
        let rm = self.table(TableId::REL_MOD_RAW).row(r);
        let tm = self.table(TableId::ENTITY_MOD).row(t);
        let hp = self.table(TableId::ENTITY_PHASE).row(h);
        let rp = self.table(TableId::REL_PHASE).row(r);
        let tp = self.table(TableId::ENTITY_PHASE).row(t);
        let mut sq = 0.0;
        let mut phase = 0.0;
        for i in 0..self.k {
            let d = hm[i] * rm[i].abs() - tm[i];
            sq += d * d;
            phase += ((hp[i] + rp[i] - tp[i]) / 2.0).sin().abs();
        }
        breakdown(sq.sqrt(), phase, self.lambda(Lambda::Triplet))
    }

    pub fn alignment_distance(&self, r: usize, kind: FeatureKind, g: usize) -> ScoreBreakdown {
        let rm = self.table(TableId::REL_MOD_RAW).row(r);
        let gm = self.table(TableId::feat_mod_raw(kind)).row(g);
        let rp = self.table(TableId::REL_PHASE).row(r);
        let gp = self.table(TableId::feat_phase(kind)).row(g);
        let mut sq = 0.0;
        let mut phase = 0.0;
        for i in 0..self.k {
            let d = rm[i].abs() - gm[i].abs();
            sq += d * d;
            phase += ((rp[i] - gp[i]) / 2.0).sin().abs();
        }
        breakdown(sq.sqrt(), phase, self.lambda(Lambda::Align))
    }
}

fn uniform_table(rows: usize, k: usize, rng: &mut ChaCha8Rng) -> Table {
    let data = (0..rows * k).map(|_| rng.random_range(-0.05..=0.05)).collect();
    Table::from_data(rows, k, data)
}

fn breakdown(modulus_part: f64, phase_part: f64, lambda: f64) -> ScoreBreakdown {
    ScoreBreakdown {
        modulus_part,
        phase_part,
        total: modulus_part + lambda * phase_part,
    }
}

/// Sign with `sign(0) = 0`.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// d|sin(x/2)|/dx
fn abs_half_sine_slope(x: f64) -> f64 {
    let half = x / 2.0;
    0.5 * half.cos() * sign(half.sin())
}

pub fn init_params(
    n_entities: usize,
    n_relations: usize,
    feature_sizes: [usize; 3],
    k: usize,
    seed: u64,
) -> EmbeddingSpace {
    EmbeddingSpace::init(n_entities, n_relations, feature_sizes, k, seed)
}

/// Gradient accumulator shaped like an [`EmbeddingSpace`], tracking which
/// rows were written so updates and resets only visit those.
#[derive(Debug, Clone)]
pub struct Gradients {
    tables: Vec<Table>,
    touched: Vec<Vec<bool>>,
    touched_rows: Vec<Vec<usize>>,
    lambdas: [f64; 2],
    lambda_touched: [bool; 2],
}

impl Gradients {
    pub fn for_space(es: &EmbeddingSpace) -> Self {
        let tables: Vec<Table> = es
            .tables()
            .iter()
            .map(|t| Table::zeros(t.rows(), t.dim()))
            .collect();
        let touched = tables.iter().map(|t| vec![false; t.rows()]).collect();
        Gradients {
            touched_rows: vec![Vec::new(); tables.len()],
            tables,
            touched,
            lambdas: [0.0; 2],
            lambda_touched: [false; 2],
        }
    }

    fn row_mut(&mut self, id: TableId, row: usize) -> &mut [f64] {
        let i = id.index();
        if !self.touched[i][row] {
            self.touched[i][row] = true;
            self.touched_rows[i].push(row);
        }
        self.tables[i].row_mut(row)
    }

    fn add_lambda(&mut self, which: Lambda, v: f64) {
        self.lambdas[which as usize] += v;
        self.lambda_touched[which as usize] = true;
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.index()]
    }

    /// Rows written since the last [`clear`](Self::clear), in first-touch order.
    pub fn touched_rows(&self, id: TableId) -> &[usize] {
        &self.touched_rows[id.index()]
    }

    pub fn lambda(&self, which: Lambda) -> Option<f64> {
        self.lambda_touched[which as usize].then_some(self.lambdas[which as usize])
    }

    pub fn clear(&mut self) {
        for i in 0..self.tables.len() {
            let dim = self.tables[i].dim();
            for &row in &self.touched_rows[i] {
                self.tables[i].data_mut()[row * dim..(row + 1) * dim].fill(0.0);
                self.touched[i][row] = false;
            }
            self.touched_rows[i].clear();
        }
        self.lambdas = [0.0; 2];
        self.lambda_touched = [false; 2];
    }

    /// Adds `scale · ∇ d(h, r, t)`.
    pub fn add_triplet(&mut self, es: &EmbeddingSpace, tr: Triple, scale: f64) -> ScoreBreakdown {
        let k = es.k();
        let score = es.triplet_distance(tr.h, tr.r, tr.t);
        let lambda = es.lambda(Lambda::Triplet);

        let hm = es.table(TableId::ENTITY_MOD).row(tr.h).to_vec();
        let rm = es.table(TableId::REL_MOD_RAW).row(tr.r).to_vec();
        let tm = es.table(TableId::ENTITY_MOD).row(tr.t).to_vec();
        let m = score.modulus_part;
        if m > 0.0 {
            let coef = scale / m;
            let delta: Vec<f64> = (0..k).map(|i| hm[i] * rm[i].abs() - tm[i]).collect();
            let g = self.row_mut(TableId::ENTITY_MOD, tr.h);
            for i in 0..k {
                g[i] += coef * delta[i] * rm[i].abs();
            }
            let g = self.row_mut(TableId::REL_MOD_RAW, tr.r);
            for i in 0..k {
                g[i] += coef * delta[i] * hm[i] * sign(rm[i]);
            }
            let g = self.row_mut(TableId::ENTITY_MOD, tr.t);
            for i in 0..k {
                g[i] -= coef * delta[i];
            }
        }

        let hp = es.table(TableId::ENTITY_PHASE).row(tr.h);
        let rp = es.table(TableId::REL_PHASE).row(tr.r);
        let tp = es.table(TableId::ENTITY_PHASE).row(tr.t);
        let slope: Vec<f64> = (0..k)
            .map(|i| scale * lambda * abs_half_sine_slope(hp[i] + rp[i] - tp[i]))
            .collect();
        let g = self.row_mut(TableId::ENTITY_PHASE, tr.h);
        for i in 0..k {
            g[i] += slope[i];
        }
        let g = self.row_mut(TableId::REL_PHASE, tr.r);
        for i in 0..k {
            g[i] += slope[i];
        }
        let g = self.row_mut(TableId::ENTITY_PHASE, tr.t);
        for i in 0..k {
            g[i] -= slope[i];
        }
        self.add_lambda(Lambda::Triplet, scale * score.phase_part);
        score
    }

    /// Adds `scale · ∇ d(r, g)` for a feature category of `kind`.
    pub fn add_alignment(
        &mut self,
        es: &EmbeddingSpace,
        r: usize,
        kind: FeatureKind,
        g: usize,
        scale: f64,
    ) -> ScoreBreakdown {
        let k = es.k();
        let score = es.alignment_distance(r, kind, g);
        let lambda = es.lambda(Lambda::Align);

        let rm = es.table(TableId::REL_MOD_RAW).row(r).to_vec();
        let gm = es.table(TableId::feat_mod_raw(kind)).row(g).to_vec();
        let m = score.modulus_part;
        if m > 0.0 {
            let coef = scale / m;
            let delta: Vec<f64> = (0..k).map(|i| rm[i].abs() - gm[i].abs()).collect();
            let out = self.row_mut(TableId::REL_MOD_RAW, r);
            for i in 0..k {
                out[i] += coef * delta[i] * sign(rm[i]);
            }
            let out = self.row_mut(TableId::feat_mod_raw(kind), g);
            for i in 0..k {
                out[i] -= coef * delta[i] * sign(gm[i]);
            }
        }

        let rp = es.table(TableId::REL_PHASE).row(r);
        let gp = es.table(TableId::feat_phase(kind)).row(g);
        let slope: Vec<f64> = (0..k)
            .map(|i| scale * lambda * abs_half_sine_slope(rp[i] - gp[i]))
            .collect();
        let out = self.row_mut(TableId::REL_PHASE, r);
        for i in 0..k {
            out[i] += slope[i];
        }
        let out = self.row_mut(TableId::feat_phase(kind), g);
        for i in 0..k {
            out[i] -= slope[i];
        }
        self.add_lambda(Lambda::Align, scale * score.phase_part);
        score
    }
}

/// Gradient of the triplet distance at `(h, r, t)`.
pub fn grad_triplet(es: &EmbeddingSpace, h: usize, r: usize, t: usize) -> Gradients {
    let mut g = Gradients::for_space(es);
    g.add_triplet(es, Triple::new(h, r, t), 1.0);
    g
}

/// Gradient of the alignment distance between relation `r` and category `g`.
pub fn grad_alignment(es: &EmbeddingSpace, r: usize, kind: FeatureKind, g: usize) -> Gradients {
    let mut out = Gradients::for_space(es);
    out.add_alignment(es, r, kind, g, 1.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tiny(k: usize) -> EmbeddingSpace {
        EmbeddingSpace::init(3, 2, [2, 2, 2], k, 11)
    }

    #[test]
    fn init_is_deterministic_and_in_range() {
        let a = EmbeddingSpace::init(20, 5, [4, 9, 3], 8, 42);
        let b = EmbeddingSpace::init(20, 5, [4, 9, 3], 8, 42);
        assert_eq!(a, b);
        for id in TableId::all() {
            for &v in a.table(id).data() {
                if id.is_phase() {
                    assert!((0.0..TAU).contains(&v));
                } else {
                    assert!((-0.05..=0.05).contains(&v));
                }
            }
        }
        assert_eq!(a.lambdas(), [1.0, 1.0]);
        let full_scale = EmbeddingSpace::init(2, 1, [1, 1, 1], 200, 0);
        assert_eq!(full_scale.k(), 200);
    }

    #[test]
    fn entity_tables_ignore_feature_sizes() {
        let a = EmbeddingSpace::init(6, 3, [0, 0, 0], 4, 9);
        let b = EmbeddingSpace::init(6, 3, [5, 9, 20], 4, 9);
        for id in [TableId::ENTITY_PHASE, TableId::ENTITY_MOD, TableId::REL_PHASE, TableId::REL_MOD_RAW] {
            assert_eq!(a.table(id), b.table(id));
        }
    }

    #[test]
    fn hand_evaluated_distances() {
        let mut es = tiny(1);
        es.table_mut(TableId::ENTITY_PHASE).row_mut(0)[0] = 0.0;
        es.table_mut(TableId::ENTITY_PHASE).row_mut(1)[0] = 0.0;
        es.table_mut(TableId::REL_PHASE).row_mut(0)[0] = PI;
        es.table_mut(TableId::ENTITY_MOD).row_mut(0)[0] = 1.0;
        es.table_mut(TableId::ENTITY_MOD).row_mut(1)[0] = 1.0;
        es.table_mut(TableId::REL_MOD_RAW).row_mut(0)[0] = 1.0;
        let s = es.triplet_distance(0, 0, 1);
        assert!((s.total - 1.0).abs() < 1e-15);
        assert_eq!(s.modulus_part, 0.0);

        let kind = FeatureKind::Dir;
        es.table_mut(TableId::feat_phase(kind)).row_mut(0)[0] = 0.0;
        es.table_mut(TableId::feat_mod_raw(kind)).row_mut(0)[0] = -1.0;
        let a = es.alignment_distance(0, kind, 0);
        assert!((a.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_gradient_equals_phase_part() {
        let es = tiny(8);
        let g = grad_triplet(&es, 0, 1, 2);
        let s = es.triplet_distance(0, 1, 2);
        assert_eq!(g.lambda(Lambda::Triplet), Some(s.phase_part));
        assert_eq!(g.lambda(Lambda::Align), None);
        let ga = grad_alignment(&es, 1, FeatureKind::Topo, 0);
        let sa = es.alignment_distance(1, FeatureKind::Topo, 0);
        assert_eq!(ga.lambda(Lambda::Align), Some(sa.phase_part));
    }

    #[test]
    fn clear_resets_touched_rows() {
        let es = tiny(4);
        let mut g = grad_triplet(&es, 0, 1, 2);
        assert_eq!(g.touched_rows(TableId::ENTITY_PHASE), &[0, 2]);
        g.clear();
        assert!(g.touched_rows(TableId::ENTITY_PHASE).is_empty());
        assert!(g.table(TableId::ENTITY_PHASE).data().iter().all(|&v| v == 0.0));
        assert_eq!(g.lambda(Lambda::Triplet), None);
    }
}
