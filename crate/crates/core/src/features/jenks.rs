//! Fisher–Jenks natural breaks: exact dynamic program over sorted values
//! minimising total within-class squared deviation.

use crate::error::{Error, Result};

/// Class boundaries. A value `d` falls in the bin equal to the number of
/// boundaries strictly below it, so a value equal to a boundary belongs to
/// the lower class.
#[derive(Debug, Clone, PartialEq)]
pub struct JenksBreaks {
    boundaries: Vec<f64>,
    requested: usize,
}

impl JenksBreaks {
    pub fn from_boundaries(boundaries: Vec<f64>, requested: usize) -> Result<Self> {
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::Dataset("non-finite Jenks boundary".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Dataset("Jenks boundaries must be strictly increasing".into()));
        }
        let requested = requested.max(boundaries.len() + 1);
        Ok(Self {
            boundaries,
            requested,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of classes actually produced.
    pub fn classes(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Class count asked for; larger than [`classes`](Self::classes) when the
    /// data had too few distinct values.
    pub fn requested(&self) -> usize {
        self.requested
    }

    pub fn classify(&self, d: f64) -> usize {
        self.boundaries.partition_point(|&b| b < d)
    }
}

/// Optimal partition of the sorted input.
#[derive(Debug, Clone, PartialEq)]
pub struct JenksFit {
    /// Input values, ascending.
    pub sorted: Vec<f64>,
    /// Start index (into `sorted`) of each class; the first is always 0.
    pub class_starts: Vec<usize>,
    /// Total within-class sum of squared deviations.
    pub deviation: f64,
    pub breaks: JenksBreaks,
}

/// Weighted prefix sums over distinct values, centred for stability.
struct Prefix {
    w: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Prefix {
    fn new(values: &[f64], weights: &[usize]) -> Self {
        let total: f64 = weights.iter().map(|&w| w as f64).sum();
        let mean = values
            .iter()
            .zip(weights)
            .map(|(&v, &w)| v * w as f64)
            .sum::<f64>()
            / total;
        let n = values.len();
        let (mut w, mut s1, mut s2) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        for i in 0..n {
            let x = values[i] - mean;
            let c = weights[i] as f64;
            w[i + 1] = w[i] + c;
            s1[i + 1] = s1[i] + c * x;
            s2[i + 1] = s2[i] + c * x * x;
        }
        Prefix { w, s1, s2 }
    }

    /// Squared deviation of items `i..j`.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        let s1 = self.s1[j] - self.s1[i];
        let s2 = self.s2[j] - self.s2[i];
        (s2 - s1 * s1 / w).max(0.0)
    }
}

/// Fits `k` natural-breaks classes. With fewer than `k` distinct values the
/// class count falls back to the distinct count (see [`JenksBreaks::requested`]).
pub fn jenks_fit(values: &[f64], k: usize) -> Result<JenksFit> {
    if k == 0 {
        return Err(Error::Config("natural breaks needs at least one class".into()));
    }
    if values.is_empty() {
        return Err(Error::Dataset("natural breaks over an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dataset("natural breaks over non-finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    // Equal values never need to be split across classes, so run the DP over
    // distinct values weighted by multiplicity.
    let mut distinct: Vec<f64> = Vec::new();
    let mut weights: Vec<usize> = Vec::new();
    let mut first_index: Vec<usize> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if distinct.last() == Some(&v) {
            *weights.last_mut().expect("nonempty") += 1;
        } else {
            distinct.push(v);
            weights.push(1);
            first_index.push(i);
        }
    }
    let m = distinct.len();
    let classes = k.min(m);
    let prefix = Prefix::new(&distinct, &weights);

    // best[c][i]: optimal cost of items i..m split into c + 1 classes.
    let mut best = vec![vec![f64::INFINITY; m + 1]; classes];
    for i in 0..m {
        best[0][i] = prefix.cost(i, m);
    }
    for c in 1..classes {
        for i in 0..m - c {
            let mut acc = f64::INFINITY;
            for j in i + 1..=m - c {
                let v = prefix.cost(i, j) + best[c - 1][j];
                if v < acc {
                    acc = v;
                }
            }
            best[c][i] = acc;
        }
    }

    // Forward reconstruction picking the earliest cut among (near-)ties.
    let mut starts = vec![0usize];
    let mut i = 0;
    for c in (1..classes).rev() {
        let target = best[c][i];
        let tol = 1e-12 * (1.0 + target.abs());
        let j = (i + 1..=m - c)
            .find(|&j| prefix.cost(i, j) + best[c - 1][j] <= target + tol)
            .expect("minimum is attained");
        starts.push(j);
        i = j;
    }

    let boundaries: Vec<f64> = starts[1..]
        .iter()
        .map(|&j| (distinct[j - 1] + distinct[j]) / 2.0)
        .collect();
    let class_starts = starts.iter().map(|&j| first_index[j]).collect();
    Ok(JenksFit {
        deviation: best[classes - 1][0],
        breaks: JenksBreaks::from_boundaries(boundaries, k)?,
        sorted,
        class_starts,
    })
}

pub fn jenks_breaks(values: &[f64], k: usize) -> Result<JenksBreaks> {
    Ok(jenks_fit(values, k)?.breaks)
}

/// Bin of `d` under `breaks`.
pub fn assign_bin(d: f64, breaks: &JenksBreaks) -> usize {
    breaks.classify(d)
}
