//! Differentiable building blocks: affine transform, tanh, inverted dropout,
//! softmax cross-entropy, and global gradient-norm clipping. Every forward
//! has a matching analytic backward.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::WordId;
use crate::error::{Error, Result};

use super::array::Array;

/// out = W x
pub fn matvec(w: &Array, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.cols(), x.len());
    debug_assert_eq!(w.rows(), out.len());
    for (r, o) in out.iter_mut().enumerate() {
        let row = w.row(r);
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(x) {
            acc += a * b;
        }
        *o = acc;
    }
}

/// dx += W^T dy
pub fn matvec_t_add(w: &Array, dy: &[f64], dx: &mut [f64]) {
    debug_assert_eq!(w.rows(), dy.len());
    debug_assert_eq!(w.cols(), dx.len());
    for (r, &g) in dy.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = w.row(r);
        for (d, a) in dx.iter_mut().zip(row) {
            *d += g * a;
        }
    }
}

/// dW += dy x^T
pub fn outer_add(dw: &mut Array, dy: &[f64], x: &[f64]) {
    debug_assert_eq!(dw.rows(), dy.len());
    debug_assert_eq!(dw.cols(), x.len());
    for (r, &g) in dy.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = dw.row_mut(r);
        for (d, a) in row.iter_mut().zip(x) {
            *d += g * a;
        }
    }
}

pub fn add_assign(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// y = W x + b
pub fn affine_forward(w: &Array, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if w.cols() != x.len() || w.rows() != b.len() {
        return Err(Error::ShapeMismatch {
            op: "affine",
            detail: format!("W {}x{}, b {}, x {}", w.rows(), w.cols(), b.len(), x.len()),
        });
    }
    let mut y = b.to_vec();
    for (r, o) in y.iter_mut().enumerate() {
        let row = w.row(r);
        for (a, v) in row.iter().zip(x) {
            *o += a * v;
        }
    }
    Ok(y)
}

/// Accumulates dW, db and returns dx for y = W x + b.
pub fn affine_backward(
    w: &Array,
    x: &[f64],
    dy: &[f64],
    dw: &mut Array,
    db: &mut [f64],
) -> Vec<f64> {
    outer_add(dw, dy, x);
    add_assign(db, dy);
    let mut dx = vec![0.0; x.len()];
    matvec_t_add(w, dy, &mut dx);
    dx
}

pub fn tanh_forward(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

/// dx = dy . (1 - y^2) where y = tanh(x)
pub fn tanh_backward(y: &[f64], dy: &[f64]) -> Vec<f64> {
    y.iter().zip(dy).map(|(&y, &g)| g * (1.0 - y * y)).collect()
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Inverted dropout: in train mode each coordinate is zeroed independently
/// with probability 1-P_keep and survivors are scaled by 1/P_keep, so eval
/// mode is the identity.
#[derive(Debug, Clone)]
pub struct DropoutSpec {
    pub keep_prob: f64,
    pub mode: DropoutMode,
    pub rng: ChaCha8Rng,
}

impl DropoutSpec {
    pub fn new(keep_prob: f64, mode: DropoutMode, rng: ChaCha8Rng) -> DropoutSpec {
        assert!(keep_prob > 0.0 && keep_prob <= 1.0, "P_keep must be in (0,1]");
        DropoutSpec { keep_prob, mode, rng }
    }

    /// Returns (y, mask). The mask already carries the 1/P_keep scale;
    /// `None` means the identity was applied.
    pub fn apply(&mut self, x: &[f64]) -> (Vec<f64>, Option<Vec<f64>>) {
        if self.mode == DropoutMode::Eval || self.keep_prob >= 1.0 {
            return (x.to_vec(), None);
        }
        let scale = 1.0 / self.keep_prob;
        let mask: Vec<f64> = x
            .iter()
            .map(|_| {
                if self.rng.gen::<f64>() < self.keep_prob {
                    scale
                } else {
                    0.0
                }
            })
            .collect();
        let y = x.iter().zip(&mask).map(|(v, m)| v * m).collect();
        (y, Some(mask))
    }
}

/// dx = dy . mask
pub fn dropout_backward(mask: Option<&[f64]>, dy: &[f64]) -> Vec<f64> {
    match mask {
        None => dy.to_vec(),
        Some(m) => dy.iter().zip(m).map(|(g, s)| g * s).collect(),
    }
}

/// Training target for the softmax cross-entropy loss: the observed word, or
/// a full probability mass function as sorted (word, probability) pairs.
#[derive(Debug, Clone, Copy)]
pub enum XentTarget<'a> {
    OneHot(WordId),
    Pmf(&'a [(WordId, f64)]),
}

/// loss = -weight * sum_w target(w) * log softmax(logits)(w), with the
/// gradient weight * (softmax(logits) - target). Computed with max
/// subtraction, stable for logit magnitudes up to at least 1e3.
pub fn softmax_xent(logits: &[f64], target: XentTarget, weight: f64) -> Result<(f64, Vec<f64>)> {
    if let XentTarget::Pmf(pmf) = target {
        let sum: f64 = pmf.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonNormalizedTarget { sum });
        }
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut grad: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = grad.iter().sum();
    let log_z = max + z.ln();
    let inv_z = 1.0 / z;
    // grad = weight * softmax, target subtracted below
    for g in grad.iter_mut() {
        *g *= inv_z * weight;
    }
    let mut loss = 0.0;
    match target {
        XentTarget::OneHot(w) => {
            let w = w as usize;
            loss = -weight * (logits[w] - log_z);
            grad[w] -= weight;
        }
        XentTarget::Pmf(pmf) => {
            for &(w, p) in pmf {
                let w = w as usize;
                loss -= weight * p * (logits[w] - log_z);
                grad[w] -= weight * p;
            }
        }
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("softmax cross-entropy"));
    }
    Ok((loss, grad))
}

/// Softmax pmf (no loss), stable under max subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= z);
    out
}

/// Log-softmax value at one index, for scoring without materializing the pmf.
pub fn log_softmax_at(logits: &[f64], index: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logits.iter().map(|&l| (l - max).exp()).sum();
    logits[index] - (max + z.ln())
}

pub fn global_norm<'a>(arrays: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut sq = 0.0;
    for a in arrays {
        for v in a {
            sq += v * v;
        }
    }
    sq.sqrt()
}

/// If the global L2 norm exceeds max_norm, scales every array by
/// max_norm/norm; otherwise leaves them untouched. Returns the pre-clip norm.
pub fn clip_global_norm(arrays: &mut [&mut [f64]], max_norm: f64) -> f64 {
    assert!(max_norm > 0.0, "max_norm must be positive");
    let norm = global_norm(arrays.iter().map(|a| &**a));
    if norm > max_norm {
        let scale = max_norm / norm;
        for a in arrays.iter_mut() {
            for v in a.iter_mut() {
                *v *= scale;
            }
        }
    }
    norm
}
