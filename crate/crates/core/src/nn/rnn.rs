//! Vanilla recurrent cell: [state', output] = tanh(R [state, input] + bias),
//! with state and output sharing dimensionality s.

use crate::error::{Error, Result};

use super::array::Array;
use super::ops::{matvec_t_add, outer_add};

pub struct RnnStepCache {
    /// concatenated [state, input]
    pub joined: Vec<f64>,
    /// post-tanh activations, length 2s
    pub activated: Vec<f64>,
}

/// One step. R has shape (2s) x (s+d); the result splits into the new state
/// and the step output, each of length s.
pub fn rnn_step_forward(
    r: &Array,
    r_bias: &[f64],
    state: &[f64],
    input: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, RnnStepCache)> {
    let s = state.len();
    if r.rows() != 2 * s || r.cols() != s + input.len() || r_bias.len() != 2 * s {
        return Err(Error::ShapeMismatch {
            op: "rnn_step",
            detail: format!(
                "R {}x{}, bias {}, state {}, input {}",
                r.rows(),
                r.cols(),
                r_bias.len(),
                s,
                input.len()
            ),
        });
    }
    let mut joined = Vec::with_capacity(s + input.len());
    joined.extend_from_slice(state);
    joined.extend_from_slice(input);
    let mut activated = r_bias.to_vec();
    for (row, out) in activated.iter_mut().enumerate() {
        let w = r.row(row);
        for (a, b) in w.iter().zip(&joined) {
            *out += a * b;
        }
        *out = out.tanh();
    }
    let new_state = activated[..s].to_vec();
    let output = activated[s..].to_vec();
    Ok((new_state, output, RnnStepCache { joined, activated }))
}

/// Accumulates dR and d_bias; returns (d_state, d_input) for the incoming
/// state and the step input.
pub fn rnn_step_backward(
    r: &Array,
    cache: &RnnStepCache,
    d_state_out: &[f64],
    d_output: &[f64],
    dr: &mut Array,
    d_bias: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let s = d_state_out.len();
    let mut d_pre = Vec::with_capacity(2 * s);
    d_pre.extend_from_slice(d_state_out);
    d_pre.extend_from_slice(d_output);
    for (g, &y) in d_pre.iter_mut().zip(&cache.activated) {
        *g *= 1.0 - y * y;
    }
    outer_add(dr, &d_pre, &cache.joined);
    for (b, g) in d_bias.iter_mut().zip(&d_pre) {
        *b += g;
    }
    let mut d_joined = vec![0.0; cache.joined.len()];
    matvec_t_add(r, &d_pre, &mut d_joined);
    let d_input = d_joined.split_off(s);
    (d_joined, d_input)
}
