//! Named-tensor containers backing the trainable models.
//!
//! Both the synthesizer and the vocoder keep their weights in a
//! [`ParameterStore`]: an insertion-ordered map from tensor name to a dense
//! `f64` tensor. Gradients and Adam moments reuse the same layout, which
//! makes finite-difference checking a generic loop over names and entries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Tensor {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert_eq!(self.dims.len(), 2);
        let c = self.dims[1];
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        debug_assert_eq!(self.dims.len(), 2);
        let c = self.dims[1];
        &mut self.data[i * c..(i + 1) * c]
    }

    /// Entry `(i, j)` of a rank-2 tensor.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.dims.len(), 2);
        self.data[i * self.dims[1] + j]
    }
}

/// Insertion-ordered collection of named tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore {
    names: Vec<String>,
    tensors: HashMap<String, Tensor>,
    pub init_seed: u64,
}

impl ParameterStore {
    pub fn new(init_seed: u64) -> Self {
        ParameterStore {
            names: Vec::new(),
            tensors: HashMap::new(),
            init_seed,
        }
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) {
        if !self.tensors.contains_key(name) {
            self.names.push(name.to_string());
        }
        self.tensors.insert(name.to_string(), tensor);
    }

    pub fn get(&self, name: &str) -> &Tensor {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("unknown tensor {name:?}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown tensor {name:?}"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    /// Tensor names in insertion order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(|n| (n.as_str(), &self.tensors[n]))
    }

    /// A store with the same names and shapes, all entries zero.
    pub fn zeros_like(&self) -> ParameterStore {
        let mut out = ParameterStore::new(self.init_seed);
        for (name, t) in self.iter() {
            out.insert(name, Tensor::zeros(&t.dims));
        }
        out
    }

    /// Total number of scalar parameters.
    pub fn num_params(&self) -> usize {
        self.iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += alpha * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ParameterStore, alpha: f64) {
        for name in other.names.clone() {
            let src = other.get(&name).data.clone();
            let dst = self.get_mut(&name);
            for (d, s) in dst.data.iter_mut().zip(&src) {
                *d += alpha * s;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for name in self.names.clone() {
            for v in &mut self.get_mut(&name).data {
                *v *= alpha;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter()
            .flat_map(|(_, t)| t.data.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// Deterministic generator used for all seeded initialization and sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fills a store with tensors drawn from uniform(-0.05, 0.05), in the order
/// the shapes are listed. Reproducible from the seed alone.
pub fn init_uniform(seed: u64, shapes: &[(&str, Vec<usize>)]) -> ParameterStore {
    let mut rng = seeded_rng(seed);
    let mut store = ParameterStore::new(seed);
    for (name, dims) in shapes {
        let mut t = Tensor::zeros(dims);
        for v in &mut t.data {
            *v = rng.gen_range(-0.05..0.05);
        }
        store.insert(name, t);
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_reproducible() {
        let shapes = [("a", vec![3, 4]), ("b", vec![5])];
        let s1 = init_uniform(42, &shapes);
        let s2 = init_uniform(42, &shapes);
        assert_eq!(s1, s2);
        let s3 = init_uniform(43, &shapes);
        assert_ne!(s1, s3);
    }

    #[test]
    fn names_keep_insertion_order() {
        let mut s = ParameterStore::new(0);
        s.insert("z", Tensor::zeros(&[1]));
        s.insert("a", Tensor::zeros(&[1]));
        s.insert("m", Tensor::zeros(&[1]));
        assert_eq!(s.names(), &["z", "a", "m"]);
    }
}
