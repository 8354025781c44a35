//! Named parameter arrays with matching gradient and optimizer-state arrays.

use std::collections::{BTreeSet, HashMap};

use super::array::Array;

#[derive(Debug, Clone)]
pub struct Param {
    pub value: Array,
    pub grad: Array,
    /// Adagrad accumulator (unused by plain SGD).
    pub accum: Array,
    /// For row-sparse parameters (embeddings): rows touched since the last
    /// zeroing. Ordered so updates iterate deterministically.
    pub touched_rows: Option<BTreeSet<usize>>,
}

impl Param {
    fn new(value: Array, sparse_rows: bool) -> Param {
        let grad = value.zeros_like();
        let accum = value.zeros_like();
        Param {
            value,
            grad,
            accum,
            touched_rows: if sparse_rows { Some(BTreeSet::new()) } else { None },
        }
    }
}

/// Parameters in insertion order (deterministic iteration) with name lookup.
#[derive(Debug, Clone, Default)]
pub struct ParameterStore {
    names: Vec<String>,
    index: HashMap<String, usize>,
    params: Vec<Param>,
    grads_ready: bool,
}

impl ParameterStore {
    pub fn new() -> ParameterStore {
        ParameterStore::default()
    }

    pub fn add(&mut self, name: &str, value: Array) -> &mut Param {
        self.add_param(name, value, false)
    }

    /// A parameter whose gradient touches few rows per step (embeddings).
    pub fn add_sparse(&mut self, name: &str, value: Array) -> &mut Param {
        self.add_param(name, value, true)
    }

    fn add_param(&mut self, name: &str, value: Array, sparse: bool) -> &mut Param {
        assert!(
            !self.index.contains_key(name),
            "duplicate parameter name {name}"
        );
        let i = self.params.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.params.push(Param::new(value, sparse));
        &mut self.params[i]
    }

    pub fn get(&self, name: &str) -> &Param {
        &self.params[self.index[name]]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Param {
        let i = self.index[name];
        &mut self.params[i]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.names.iter().map(String::as_str).zip(self.params.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.params.iter_mut())
    }

    /// Marks that backward passes have populated gradients.
    pub fn note_grads(&mut self) {
        self.grads_ready = true;
    }

    pub fn grads_ready(&self) -> bool {
        self.grads_ready
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            match &mut p.touched_rows {
                Some(rows) => {
                    for &r in rows.iter() {
                        p.grad.row_mut(r).iter_mut().for_each(|v| *v = 0.0);
                    }
                    rows.clear();
                }
                None => p.grad.fill(0.0),
            }
        }
        self.grads_ready = false;
    }

    pub fn global_grad_norm(&self) -> f64 {
        let mut sq = 0.0;
        for p in &self.params {
            for v in p.grad.as_slice() {
                sq += v * v;
            }
        }
        sq.sqrt()
    }

    /// Scales all gradients so the global L2 norm does not exceed max_norm.
    /// Returns the pre-clip norm.
    pub fn clip_grads(&mut self, max_norm: f64) -> f64 {
        assert!(max_norm > 0.0);
        let norm = self.global_grad_norm();
        if norm > max_norm {
            let scale = max_norm / norm;
            for p in &mut self.params {
                for v in p.grad.as_mut_slice() {
                    *v *= scale;
                }
            }
        }
        norm
    }

    /// Scales accumulated gradients by a constant (minibatch averaging).
    pub fn scale_grads(&mut self, scale: f64) {
        for p in &mut self.params {
            match &p.touched_rows {
                Some(rows) => {
                    let rows: Vec<usize> = rows.iter().copied().collect();
                    for r in rows {
                        p.grad.row_mut(r).iter_mut().for_each(|v| *v *= scale);
                    }
                }
                None => p.grad.as_mut_slice().iter_mut().for_each(|v| *v *= scale),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_order_is_stable() {
        let mut s = ParameterStore::new();
        s.add("b", Array::vector(2));
        s.add("a", Array::vector(3));
        let names: Vec<&str> = s.iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["b", "a"]);
    }

    #[test]
    fn sparse_zeroing_clears_only_touched_rows() {
        let mut s = ParameterStore::new();
        s.add_sparse("E", Array::matrix(3, 2));
        {
            let p = s.get_mut("E");
            p.grad.row_mut(1).copy_from_slice(&[5.0, 5.0]);
            p.touched_rows.as_mut().unwrap().insert(1);
        }
        s.zero_grads();
        assert_eq!(s.get("E").grad.as_slice(), &[0.0; 6]);
        assert!(s.get("E").touched_rows.as_ref().unwrap().is_empty());
    }

    #[test]
    #[should_panic(expected = "duplicate parameter name")]
    fn duplicate_names_rejected() {
        let mut s = ParameterStore::new();
        s.add("w", Array::vector(1));
        s.add("w", Array::vector(1));
    }
}
