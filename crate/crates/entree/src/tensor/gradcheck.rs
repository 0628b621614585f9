//! Finite-difference verification of tape gradients.

use super::{Result, Tape, Tensor, TensorId};

/// Compares tape gradients of a scalar-valued function against central
/// finite differences and returns the maximum relative error
/// `|g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|)` over all input coordinates.
///
/// `f` must build the scalar output from the leafed inputs on the given
/// tape; it is re-invoked on a fresh tape for every perturbed evaluation.
pub fn grad_check<F>(f: F, inputs: &[Tensor], eps: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[TensorId]) -> Result<TensorId>,
{
    let eval = |tensors: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let ids: Vec<TensorId> = tensors.iter().map(|t| tape.leaf(t.clone())).collect();
        let root = f(&mut tape, &ids)?;
        Ok(tape.value(root).item())
    };

    // analytic pass
    let mut tape = Tape::new();
    let ids: Vec<TensorId> = inputs
        .iter()
        .map(|t| tape.leaf(t.clone().with_grad()))
        .collect();
    let root = f(&mut tape, &ids)?;
    tape.backward(root)?;
    let analytic: Vec<Vec<f64>> = ids
        .iter()
        .map(|&id| {
            tape.grad(id)
                .map(|g| g.to_vec())
                .unwrap_or_else(|| vec![0.0; tape.value(id).numel()])
        })
        .collect();

    let mut work: Vec<Tensor> = inputs.to_vec();
    let mut max_err = 0.0f64;
    for (ti, tensor) in inputs.iter().enumerate() {
        for ci in 0..tensor.numel() {
            let orig = tensor.data()[ci];
            work[ti].data_mut()[ci] = orig + eps;
            let up = eval(&work)?;
            work[ti].data_mut()[ci] = orig - eps;
            let down = eval(&work)?;
            work[ti].data_mut()[ci] = orig;
            let fd = (up - down) / (2.0 * eps);
            let ad = analytic[ti][ci];
            let err = (ad - fd).abs() / (ad.abs() + fd.abs()).max(1e-8);
            max_err = max_err.max(err);
        }
    }
    Ok(max_err)
}
