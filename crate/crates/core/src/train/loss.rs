/// `ln σ(x)` without overflow for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax of `-temperature · d`.
pub fn adversarial_weights(negatives: &[f64], temperature: f64) -> Vec<f64> {
    let logits: Vec<f64> = negatives.iter().map(|&d| -temperature * d).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// Loss value and its derivatives with respect to each distance.
#[derive(Debug, Clone, PartialEq)]
pub struct NsaLoss {
    pub loss: f64,
    pub d_positive: f64,
    pub d_negatives: Vec<f64>,
}

/// Margin loss with self-adversarial negative weighting:
///
/// ```text
/// L = −ln σ(γ − d⁺) − Σ_j p_j ln σ(d⁻_j − γ),   p = softmax(−temperature · d⁻)
/// ```
///
/// The weights `p` are treated as constants when differentiating. With no
/// negatives only the positive term remains.
pub fn nsa_loss(positive: f64, negatives: &[f64], gamma: f64, temperature: f64) -> NsaLoss {
    let p = adversarial_weights(negatives, temperature);
    let mut loss = -log_sigmoid(gamma - positive);
    let d_positive = sigmoid(positive - gamma);
    let mut d_negatives = Vec::with_capacity(negatives.len());
    for (&d, &w) in negatives.iter().zip(&p) {
        loss -= w * log_sigmoid(d - gamma);
        d_negatives.push(-w * sigmoid(gamma - d));
    }
    NsaLoss {
        loss,
        d_positive,
        d_negatives,
    }
}
