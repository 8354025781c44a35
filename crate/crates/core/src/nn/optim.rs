//! Optimizers: Adagrad and SGD with a constant-then-linear-decay learning
//! rate schedule, both with global gradient-norm clipping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::store::ParameterStore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OptimizerKind {
    Adagrad {
        learning_rate: f64,
        initial_accumulator: f64,
    },
    SgdScheduled {
        initial_lr: f64,
        constant_epochs: usize,
        linear_decay_epochs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(flatten)]
    pub kind: OptimizerKind,
    pub clip_max_norm: f64,
}

impl OptimizerConfig {
    pub fn adagrad(learning_rate: f64, clip_max_norm: f64) -> OptimizerConfig {
        OptimizerConfig {
            kind: OptimizerKind::Adagrad {
                learning_rate,
                initial_accumulator: 0.0,
            },
            clip_max_norm,
        }
    }

    pub fn sgd(
        initial_lr: f64,
        constant_epochs: usize,
        linear_decay_epochs: usize,
        clip_max_norm: f64,
    ) -> OptimizerConfig {
        OptimizerConfig {
            kind: OptimizerKind::SgdScheduled {
                initial_lr,
                constant_epochs,
                linear_decay_epochs,
            },
            clip_max_norm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            OptimizerKind::Adagrad {
                learning_rate,
                initial_accumulator,
            } => learning_rate > 0.0 && initial_accumulator >= 0.0,
            OptimizerKind::SgdScheduled { initial_lr, .. } => initial_lr > 0.0,
        };
        if !ok || self.clip_max_norm <= 0.0 {
            return Err(Error::Config(
                "optimizer rates and clip_max_norm must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Learning rate in effect at a (0-based) epoch: constant for
    /// `constant_epochs`, then decaying linearly to a floor of 0 over
    /// `linear_decay_epochs`. Adagrad's base rate is epoch-independent.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        match self.kind {
            OptimizerKind::Adagrad { learning_rate, .. } => learning_rate,
            OptimizerKind::SgdScheduled {
                initial_lr,
                constant_epochs,
                linear_decay_epochs,
            } => {
                if epoch < constant_epochs || linear_decay_epochs == 0 {
                    initial_lr
                } else {
                    let past = (epoch - constant_epochs) as f64;
                    initial_lr * (1.0 - past / linear_decay_epochs as f64).max(0.0)
                }
            }
        }
    }

    /// Applies one update from the accumulated gradients. Gradients must have
    /// been populated (and are consumed: the caller zeroes them afterwards).
    pub fn step(&self, store: &mut ParameterStore, epoch: usize) -> Result<()> {
        if !store.grads_ready() {
            return Err(Error::StepWithoutGradients);
        }
        let lr = self.learning_rate(epoch);
        match self.kind {
            OptimizerKind::Adagrad {
                initial_accumulator,
                ..
            } => {
                for (_, p) in store.iter_mut() {
                    match &p.touched_rows {
                        Some(rows) => {
                            for &r in rows {
                                let g_row = p.grad.row(r).to_vec();
                                let acc_row = p.accum.row_mut(r);
                                for (c, &g) in g_row.iter().enumerate() {
                                    if g == 0.0 {
                                        continue;
                                    }
                                    if acc_row[c] == 0.0 {
                                        acc_row[c] = initial_accumulator;
                                    }
                                    acc_row[c] += g * g;
                                    *p.value.at_mut(r, c) -= lr * g / acc_row[c].sqrt();
                                }
                            }
                        }
                        None => {
                            let n = p.value.len();
                            for i in 0..n {
                                let g = p.grad.as_slice()[i];
                                if g == 0.0 {
                                    continue;
                                }
                                let acc = &mut p.accum.as_mut_slice()[i];
                                if *acc == 0.0 {
                                    *acc = initial_accumulator;
                                }
                                *acc += g * g;
                                p.value.as_mut_slice()[i] -= lr * g / acc.sqrt();
                            }
                        }
                    }
                }
            }
            OptimizerKind::SgdScheduled { .. } => {
                for (_, p) in store.iter_mut() {
                    match &p.touched_rows {
                        Some(rows) => {
                            for &r in rows {
                                let g_row = p.grad.row(r).to_vec();
                                for (c, &g) in g_row.iter().enumerate() {
                                    if g != 0.0 {
                                        *p.value.at_mut(r, c) -= lr * g;
                                    }
                                }
                            }
                        }
                        None => {
                            let n = p.value.len();
                            for i in 0..n {
                                let g = p.grad.as_slice()[i];
                                if g != 0.0 {
                                    p.value.as_mut_slice()[i] -= lr * g;
                                }
                            }
                        }
                    }
                }
            }
        }
        for (name, p) in store.iter() {
            if p.value.check_finite("parameter").is_err() {
                return Err(Error::Config(format!(
                    "parameter {name} became non-finite after optimizer step"
                )));
            }
        }
        Ok(())
    }
}
