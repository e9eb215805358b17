use super::matrix::Matrix;
use super::params::ParamStore;

/// Adam with bias correction. Moments are kept per parameter, in store order.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(store: &ParamStore, lr: f64) -> Self {
        let zeros: Vec<Matrix> = store
            .ids()
            .map(|id| {
                let (r, c) = store.value(id).shape();
                Matrix::zeros(r, c)
            })
            .collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update from the gradients held in `store`.
    pub fn step(&mut self, store: &mut ParamStore) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (i, id) in store.ids().collect::<Vec<_>>().into_iter().enumerate() {
            let grad = store.grad(id).clone();
            let m = self.m[i].as_mut_slice();
            let v = self.v[i].as_mut_slice();
            let value = store.value_mut(id).as_mut_slice();
            for (k, &g) in grad.as_slice().iter().enumerate() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                value[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = ParamStore::new();
        let id = s.add_glorot("w", 2, 2, &mut seed::rng(1)).unwrap();
        let before = s.value(id).clone();
        s.grad_mut(id).fill(0.3);
        let mut opt = Adam::new(&s, 0.01);
        opt.step(&mut s);
        for (a, b) in s.value(id).as_slice().iter().zip(before.as_slice()) {
            assert!(((b - a) - 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_lr_is_noop() {
        let mut s = ParamStore::new();
        let id = s.add_glorot("w", 2, 3, &mut seed::rng(2)).unwrap();
        let before = s.value(id).clone();
        s.grad_mut(id).fill(-1.0);
        let mut opt = Adam::new(&s, 0.0);
        opt.step(&mut s);
        assert_eq!(s.value(id), &before);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut s = ParamStore::new();
        let id = s.add_glorot("w", 1, 4, &mut seed::rng(3)).unwrap();
        let mut opt = Adam::new(&s, 0.05);
        for _ in 0..2000 {
            let g = s.value(id).map(|v| 2.0 * (v - 1.0));
            *s.grad_mut(id) = g;
            opt.step(&mut s);
        }
        assert!(s.value(id).as_slice().iter().all(|v| (v - 1.0).abs() < 1e-3));
    }
}
