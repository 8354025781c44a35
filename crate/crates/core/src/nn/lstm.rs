//! LSTM cell: input/forget/output gates and a tanh candidate over the
//! [hidden, input] concatenation. No peepholes. The forget-gate bias is
//! initialized to 1.0 by the model builders.

use crate::error::{Error, Result};

use super::array::Array;
use super::ops::{matvec_t_add, outer_add, sigmoid};

/// Gate block order inside the stacked weight matrix and bias:
/// input, forget, candidate, output.
pub const GATES: usize = 4;

pub struct LstmStepCache {
    pub joined: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub cell_prev: Vec<f64>,
    pub cell_new: Vec<f64>,
    pub cell_tanh: Vec<f64>,
}

/// One step of a single LSTM layer. W has shape (4s) x (s + input_dim),
/// bias length 4s; returns (cell', hidden').
pub fn lstm_step_forward(
    w: &Array,
    bias: &[f64],
    cell: &[f64],
    hidden: &[f64],
    input: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, LstmStepCache)> {
    let s = hidden.len();
    if cell.len() != s || w.rows() != GATES * s || w.cols() != s + input.len() || bias.len() != GATES * s {
        return Err(Error::ShapeMismatch {
            op: "lstm_step",
            detail: format!(
                "W {}x{}, bias {}, cell {}, hidden {}, input {}",
                w.rows(),
                w.cols(),
                bias.len(),
                cell.len(),
                s,
                input.len()
            ),
        });
    }
    let mut joined = Vec::with_capacity(s + input.len());
    joined.extend_from_slice(hidden);
    joined.extend_from_slice(input);
    let mut pre = bias.to_vec();
    for (row, out) in pre.iter_mut().enumerate() {
        let wr = w.row(row);
        for (a, b) in wr.iter().zip(&joined) {
            *out += a * b;
        }
    }
    let i: Vec<f64> = pre[..s].iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = pre[s..2 * s].iter().map(|&v| sigmoid(v)).collect();
    let g: Vec<f64> = pre[2 * s..3 * s].iter().map(|&v| v.tanh()).collect();
    let o: Vec<f64> = pre[3 * s..].iter().map(|&v| sigmoid(v)).collect();
    let cell_new: Vec<f64> = (0..s).map(|k| f[k] * cell[k] + i[k] * g[k]).collect();
    let cell_tanh: Vec<f64> = cell_new.iter().map(|&v| v.tanh()).collect();
    let hidden_new: Vec<f64> = (0..s).map(|k| o[k] * cell_tanh[k]).collect();
    let cache = LstmStepCache {
        joined,
        i,
        f,
        g,
        o,
        cell_prev: cell.to_vec(),
        cell_new: cell_new.clone(),
        cell_tanh,
    };
    Ok((cell_new, hidden_new, cache))
}

/// Accumulates dW and d_bias; returns (d_cell, d_hidden, d_input) for the
/// incoming cell state, incoming hidden state, and the step input.
pub fn lstm_step_backward(
    w: &Array,
    cache: &LstmStepCache,
    d_cell_out: &[f64],
    d_hidden_out: &[f64],
    dw: &mut Array,
    d_bias: &mut [f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = d_hidden_out.len();
    // through hidden' = o . tanh(cell')
    let mut d_cell_total: Vec<f64> = (0..s)
        .map(|k| {
            d_cell_out[k]
                + d_hidden_out[k] * cache.o[k] * (1.0 - cache.cell_tanh[k] * cache.cell_tanh[k])
        })
        .collect();
    let mut d_pre = vec![0.0; GATES * s];
    for k in 0..s {
        let di = d_cell_total[k] * cache.g[k];
        let df = d_cell_total[k] * cache.cell_prev[k];
        let dg = d_cell_total[k] * cache.i[k];
        let do_ = d_hidden_out[k] * cache.cell_tanh[k];
        d_pre[k] = di * cache.i[k] * (1.0 - cache.i[k]);
        d_pre[s + k] = df * cache.f[k] * (1.0 - cache.f[k]);
        d_pre[2 * s + k] = dg * (1.0 - cache.g[k] * cache.g[k]);
        d_pre[3 * s + k] = do_ * cache.o[k] * (1.0 - cache.o[k]);
        // propagate into the previous cell state
        d_cell_total[k] *= cache.f[k];
    }
    outer_add(dw, &d_pre, &cache.joined);
    for (b, g) in d_bias.iter_mut().zip(&d_pre) {
        *b += g;
    }
    let mut d_joined = vec![0.0; cache.joined.len()];
    matvec_t_add(w, &d_pre, &mut d_joined);
    let d_input = d_joined.split_off(s);
    (d_cell_total, d_joined, d_input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_zero_state() {
        let w = Array::matrix(8, 5);
        let bias = vec![0.0; 8];
        let (c, h, _) =
            lstm_step_forward(&w, &bias, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c, vec![0.0, 0.0]);
        assert_eq!(h, vec![0.0, 0.0]);
    }

    #[test]
    fn saturated_forget_gate_preserves_cell() {
        // forget bias 50 drives f to 1; input gate bias -50 drives i to 0
        let s = 3;
        let w = Array::matrix(GATES * s, s + 2);
        let mut bias = vec![0.0; GATES * s];
        for k in 0..s {
            bias[k] = -50.0; // input gate closed
            bias[s + k] = 50.0; // forget gate open
        }
        let cell = vec![0.7, -0.2, 1.5];
        let (c, _, _) = lstm_step_forward(&w, &bias, &cell, &[0.1, 0.2, 0.3], &[1.0, -1.0]).unwrap();
        for (a, b) in c.iter().zip(&cell) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn shape_mismatch_detected() {
        let w = Array::matrix(8, 4);
        assert!(matches!(
            lstm_step_forward(&w, &[0.0; 8], &[0.0; 2], &[0.0; 2], &[0.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
