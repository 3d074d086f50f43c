//! Central finite-difference gradient checking.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::{Graph, Tensor, Var};
use crate::error::{Error, Result};

/// Norm-wise relative error `‖a − n‖ / max(‖a‖, ‖n‖)`; zero when both vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut analytic.iter().zip(numeric).map(|(a, n)| a - n));
    let scale = norm(&mut analytic.iter().copied()).max(norm(&mut numeric.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Builds the graph `f` over `inputs` (all trainable), backpropagates the
/// scalar it returns, and compares each input's gradient with central
/// differences of step `h`. Returns one relative error per input.
pub fn check_gradients<F>(inputs: &[Tensor<f64>], h: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    let eval = |ts: &[Tensor<f64>]| -> Result<f64> {
        let mut g = Graph::new();
        let vars: Vec<Var> = ts.iter().map(|t| g.param(t.clone())).collect();
        let out = f(&mut g, &vars)?;
        Ok(g.value(out).data()[0])
    };
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let out = f(&mut g, &vars)?;
    g.backward(out)?;
    let mut errors = Vec::with_capacity(inputs.len());
    let mut work = inputs.to_vec();
    for (k, v) in vars.iter().enumerate() {
        let analytic = g.grad(*v).map_or_else(|| alloc::vec![0.0; inputs[k].len()], <[f64]>::to_vec);
        let mut numeric = Vec::with_capacity(analytic.len());
        for j in 0..inputs[k].len() {
            let x = inputs[k].data()[j];
            work[k].data_mut()[j] = x + h;
            let up = eval(&work)?;
            work[k].data_mut()[j] = x - h;
            let down = eval(&work)?;
            work[k].data_mut()[j] = x;
            numeric.push((up - down) / (2.0 * h));
        }
        let e = relative_error(&analytic, &numeric);
        if !e.is_finite() {
            return Err(Error::Numeric(alloc::format!("non-finite gradient error for input {k}")));
        }
        errors.push(e);
    }
    Ok(errors)
}
