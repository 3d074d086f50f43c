use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;

use super::{Graph, Scalar, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Named trainable tensors in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore { names: Vec::new(), tensors: Vec::new() }
    }

    /// Adds a tensor and returns its slot. Names must be unique.
    pub fn insert(&mut self, name: impl Into<String>, t: Tensor<T>) -> Result<usize> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(Error::invalid(alloc::format!("duplicate parameter {name}")));
        }
        self.names.push(name);
        self.tensors.push(t);
        Ok(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensor(&self, i: usize) -> &Tensor<T> {
        &self.tensors[i]
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut Tensor<T> {
        &mut self.tensors[i]
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Registers every tensor as a trainable leaf of `g`, in slot order.
    pub fn bind(&self, g: &mut Graph<T>) -> Vec<Var> {
        self.tensors.iter().map(|t| g.param(t.clone())).collect()
    }

    /// Registers every tensor as a constant, for inference.
    pub fn bind_frozen(&self, g: &mut Graph<T>) -> Vec<Var> {
        self.tensors.iter().map(|t| g.input(t.clone())).collect()
    }

    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        ParamStore { names: self.names.clone(), tensors: self.tensors.iter().map(Tensor::cast).collect() }
    }

    /// Gradients of the bound leaves after `backward`; unreached leaves get
    /// zeros.
    pub fn collect_grads(&self, g: &Graph<T>, vars: &[Var]) -> Vec<Vec<T>> {
        vars.iter()
            .zip(&self.tensors)
            .map(|(&v, t)| g.grad(v).map_or_else(|| vec![T::zero(); t.len()], <[T]>::to_vec))
            .collect()
    }
}

/// Uniform initialization in `±√(6 / fan_in)`.
pub fn he_uniform<T: Scalar>(shape: Vec<usize>, fan_in: usize, rng: &mut Rng) -> Tensor<T> {
    let bound = (6.0 / fan_in.max(1) as f64).sqrt();
    Tensor::from_fn(shape, |_| T::of(rng.random_range(-bound..bound)))
}

/// Stochastic gradient descent with heavy-ball momentum:
/// `v ← μ·v + g`, `w ← w − lr·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdMomentum<T> {
    pub lr: T,
    pub momentum: T,
    velocity: Vec<Vec<T>>,
}

impl<T: Scalar> SgdMomentum<T> {
    pub fn new(lr: T, momentum: T) -> Self {
        SgdMomentum { lr, momentum, velocity: Vec::new() }
    }

    /// Restores a saved state. Velocities must match the parameters they will
    /// be applied to.
    pub fn with_velocity(lr: T, momentum: T, velocity: Vec<Vec<T>>) -> Self {
        SgdMomentum { lr, momentum, velocity }
    }

    pub fn velocity(&self) -> &[Vec<T>] {
        &self.velocity
    }

    pub fn step(&mut self, params: &mut ParamStore<T>, grads: &[Vec<T>]) -> Result<()> {
        if grads.len() != params.len() {
            return Err(Error::ShapeMismatch { op: "sgd_step", lhs: vec![params.len()], rhs: vec![grads.len()] });
        }
        if self.velocity.is_empty() {
            self.velocity = params.tensors.iter().map(|t| vec![T::zero(); t.len()]).collect();
        }
        for ((t, g), v) in params.tensors.iter().zip(grads).zip(&self.velocity) {
            if t.len() != g.len() || t.len() != v.len() {
                return Err(Error::ShapeMismatch { op: "sgd_step", lhs: t.shape().to_vec(), rhs: vec![g.len()] });
            }
        }
        for ((t, g), v) in params.tensors.iter_mut().zip(grads).zip(&mut self.velocity) {
            for ((w, &gi), vi) in t.data_mut().iter_mut().zip(g).zip(v.iter_mut()) {
                *vi = self.momentum * *vi + gi;
                *w -= self.lr * *vi;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn single(w: f64) -> ParamStore<f64> {
        let mut p = ParamStore::new();
        p.insert("w", Tensor::scalar(w)).unwrap();
        p
    }

    #[test]
    fn one_step() {
        let mut p = single(1.0);
        let mut opt = SgdMomentum::new(0.1, 0.9);
        opt.step(&mut p, &[vec![1.0]]).unwrap();
        assert!((p.tensor(0).data()[0] - 0.9).abs() < 1e-12);
        assert!((opt.velocity()[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_steps() {
        let mut p = single(1.0);
        let mut opt = SgdMomentum::new(0.1, 0.9);
        opt.step(&mut p, &[vec![1.0]]).unwrap();
        opt.step(&mut p, &[vec![1.0]]).unwrap();
        assert!((opt.velocity()[0][0] - 1.9).abs() < 1e-12);
        assert!((p.tensor(0).data()[0] - 0.71).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_decays_to_fixed_point() {
        let mut p = single(1.0);
        let mut opt = SgdMomentum::new(0.1, 0.9);
        opt.step(&mut p, &[vec![1.0]]).unwrap();
        // remaining travel is lr·v·μ/(1−μ)
        let limit = 0.9 - 0.1 * 0.9 / 0.1;
        let mut prev_gap = f64::INFINITY;
        for _ in 0..400 {
            opt.step(&mut p, &[vec![0.0]]).unwrap();
            let gap = (p.tensor(0).data()[0] - limit).abs();
            assert!(gap <= prev_gap + 1e-15);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = single(1.0);
        let mut opt = SgdMomentum::new(0.1, 0.9);
        assert!(opt.step(&mut p, &[vec![1.0, 2.0]]).is_err());
        assert!(opt.step(&mut p, &[]).is_err());
        assert_eq!(p.tensor(0).data()[0], 1.0);
    }

    #[test]
    fn he_bounds() {
        let mut rng = Rng::seed_from_u64(1);
        let t: Tensor<f32> = he_uniform(vec![64, 32], 64, &mut rng);
        let b = (6.0f32 / 64.0).sqrt();
        assert!(t.data().iter().all(|v| v.abs() <= b));
        assert!(t.data().iter().any(|v| v.abs() > 0.5 * b));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut p = single(1.0);
        assert!(p.insert("w", Tensor::scalar(2.0)).is_err());
    }
}
