use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::seed::Rng;

/// Handle into a [`ParamStore`]. Only valid for the store that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
struct Param {
    name: String,
    value: Matrix,
    grad: Matrix,
}

/// Named parameter arrays, each paired with a gradient accumulator of the
/// same shape.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: Vec<Param>,
    by_name: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Matrix) -> Result<ParamId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::config(format!("duplicate parameter name `{name}`")));
        }
        let id = ParamId(self.params.len());
        let (r, c) = value.shape();
        self.params.push(Param {
            name: name.clone(),
            value,
            grad: Matrix::zeros(r, c),
        });
        self.by_name.insert(name, id);
        Ok(id)
    }

    /// Uniform in `[-a, a]`, `a = sqrt(6 / (fan_in + fan_out))`, with
    /// fan-in = rows and fan-out = cols.
    pub fn add_glorot(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        rng: &mut Rng,
    ) -> Result<ParamId> {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.random_range(-a..=a)).collect();
        self.add(name, Matrix::from_vec(rows, cols, data)?)
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Result<ParamId> {
        self.add(name, Matrix::zeros(rows, cols))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.as_slice().len()).sum()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Matrix {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Matrix {
        &self.params[id.0].grad
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.params[id.0].grad
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    /// A detached zeroed gradient buffer, for computing contributions off the
    /// store (e.g. on worker threads) before [`ParamStore::accumulate`].
    pub fn gradient_buffer(&self) -> Gradients {
        Gradients {
            mats: self
                .params
                .iter()
                .map(|p| Matrix::zeros(p.value.rows(), p.value.cols()))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, grads: &Gradients) -> Result<()> {
        if grads.mats.len() != self.params.len() {
            return Err(Error::structural("gradient buffer from a different store"));
        }
        for (p, g) in self.params.iter_mut().zip(&grads.mats) {
            p.grad.add_assign(g)?;
        }
        Ok(())
    }

    pub fn scale_grads(&mut self, factor: f64) {
        for p in &mut self.params {
            p.grad.scale(factor);
        }
    }

    /// Flat copy of all values in id order.
    pub fn flat_values(&self) -> Vec<f64> {
        self.params
            .iter()
            .flat_map(|p| p.value.as_slice().iter().copied())
            .collect()
    }

    pub fn named_values(&self) -> BTreeMap<String, Matrix> {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.value.clone()))
            .collect()
    }

    /// Overwrites values from a name → array map. Every parameter must be
    /// present with the right shape; extra names are rejected.
    pub fn load_named(&mut self, arrays: &BTreeMap<String, Matrix>) -> Result<()> {
        if arrays.len() != self.params.len() {
            return Err(Error::Incompatible(format!(
                "checkpoint has {} arrays, model expects {}",
                arrays.len(),
                self.params.len()
            )));
        }
        for p in &mut self.params {
            let v = arrays
                .get(&p.name)
                .ok_or_else(|| Error::Incompatible(format!("checkpoint lacks `{}`", p.name)))?;
            if v.shape() != p.value.shape() {
                return Err(Error::Incompatible(format!(
                    "`{}` has shape {:?}, expected {:?}",
                    p.name,
                    v.shape(),
                    p.value.shape()
                )));
            }
            v.ensure_finite(&p.name)?;
            p.value = v.clone();
        }
        Ok(())
    }
}

/// Gradient arrays laid out like the store that created them.
#[derive(Clone, Debug)]
pub struct Gradients {
    mats: Vec<Matrix>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> &Matrix {
        &self.mats[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.mats[id.0]
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.mats.iter_mut().for_each(|m| m.scale(factor));
    }

    pub fn is_finite(&self) -> bool {
        self.mats.iter().all(Matrix::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn names_are_unique() {
        let mut s = ParamStore::new();
        s.add_zeros("w", 2, 2).unwrap();
        assert!(matches!(s.add_zeros("w", 1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn glorot_bounds() {
        let mut s = ParamStore::new();
        let mut rng = seed::rng(1);
        let id = s.add_glorot("w", 10, 20, &mut rng).unwrap();
        let a = (6.0f64 / 30.0).sqrt();
        assert!(s.value(id).as_slice().iter().all(|v| v.abs() <= a));
        assert_eq!(s.grad(id).shape(), (10, 20));
    }

    #[test]
    fn accumulate_and_reload() {
        let mut s = ParamStore::new();
        let mut rng = seed::rng(2);
        let w = s.add_glorot("w", 3, 2, &mut rng).unwrap();
        let mut g = s.gradient_buffer();
        g.get_mut(w).fill(1.5);
        s.accumulate(&g).unwrap();
        s.accumulate(&g).unwrap();
        assert!(s.grad(w).as_slice().iter().all(|&v| v == 3.0));

        let saved = s.named_values();
        s.value_mut(w).fill(0.0);
        s.load_named(&saved).unwrap();
        assert_eq!(s.value(w), &saved["w"]);

        let mut wrong = saved.clone();
        wrong.insert("w".into(), Matrix::zeros(2, 3));
        assert!(matches!(s.load_named(&wrong), Err(Error::Incompatible(_))));
    }
}
