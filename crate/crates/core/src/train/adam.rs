use crate::error::{Error, Result};
use crate::model::{EmbeddingSpace, Gradients, Lambda, Table, TableId};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Moment accumulators shaped like an [`EmbeddingSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Table>,
    v: Vec<Table>,
    lambda_m: [f64; 2],
    lambda_v: [f64; 2],
    step: u64,
}

impl AdamState {
    pub fn for_space(es: &EmbeddingSpace) -> Self {
        let zeros: Vec<Table> = es
            .tables()
            .iter()
            .map(|t| Table::zeros(t.rows(), t.dim()))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            lambda_m: [0.0; 2],
            lambda_v: [0.0; 2],
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, id: TableId) -> &Table {
        &self.m[id.index()]
    }

    pub fn second_moment(&self, id: TableId) -> &Table {
        &self.v[id.index()]
    }
}

fn update(theta: &mut f64, m: &mut f64, v: &mut f64, g: f64, lr: f64, c1: f64, c2: f64) {
    *m = BETA1 * *m + (1.0 - BETA1) * g;
    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
    let m_hat = *m / c1;
    let v_hat = *v / c2;
    *theta -= lr * m_hat / (v_hat.sqrt() + EPSILON);
}

/// Bias-corrected Adam update of every row touched in `grads`. Untouched rows
/// and their moments are left as they are. Both λ are clamped to be
/// non-negative afterwards. A non-finite gradient aborts before any change.
pub fn adam_step(
    es: &mut EmbeddingSpace,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    for id in TableId::all() {
        let table = grads.table(id);
        for &row in grads.touched_rows(id) {
            if let Some(col) = table.row(row).iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "table {} row {row} column {col} (step {})",
                    id.index(),
                    state.step + 1
                )));
            }
        }
    }
    for which in [Lambda::Triplet, Lambda::Align] {
        if let Some(g) = grads.lambda(which) {
            if !g.is_finite() {
                return Err(Error::NonFinite(format!("{which:?} weight (step {})", state.step + 1)));
            }
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);

    for id in TableId::all() {
        let g_table = grads.table(id);
        let i = id.index();
        for &row in grads.touched_rows(id) {
            let g = g_table.row(row);
            let m = state.m[i].row_mut(row);
            let v = state.v[i].row_mut(row);
            let theta = es.table_mut(id).row_mut(row);
            for c in 0..g.len() {
                update(&mut theta[c], &mut m[c], &mut v[c], g[c], lr, c1, c2);
            }
        }
    }
    for which in [Lambda::Triplet, Lambda::Align] {
        let idx = which as usize;
        if let Some(g) = grads.lambda(which) {
            let mut value = es.lambda(which);
            update(
                &mut value,
                &mut state.lambda_m[idx],
                &mut state.lambda_v[idx],
                g,
                lr,
                c1,
                c2,
            );
            es.set_lambda(which, value);
        }
        es.set_lambda(which, es.lambda(which).max(0.0));
    }
    Ok(())
}
