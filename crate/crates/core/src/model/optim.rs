//! Plain SGD and bias-corrected Adam, both pure: a step maps
//! `(params, grads, state)` to fresh values.

use serde::{Deserialize, Serialize};

use super::{Dims, GradSet, ParamSet};
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.99;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    PlainSgd,
    Adam,
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// First and second moment accumulators (Adam only).
    pub moments: Option<Box<(GradSet, GradSet)>>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, dims: Dims) -> Self {
        let moments = match kind {
            OptimizerKind::PlainSgd => None,
            OptimizerKind::Adam => Some(Box::new((GradSet::zeros(dims), GradSet::zeros(dims)))),
        };
        OptimizerState {
            kind,
            step: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            epsilon: ADAM_EPSILON,
            moments,
        }
    }
}

/// One optimizer step; returns the updated weights and the advanced state.
pub fn optimizer_step(
    params: &ParamSet,
    grads: &GradSet,
    state: &OptimizerState,
    lr: f64,
) -> Result<(ParamSet, OptimizerState)> {
    if params.dims != grads.dims {
        return Err(Error::Shape(format!(
            "param dims {:?} vs grad dims {:?}",
            params.dims, grads.dims
        )));
    }
    let mut next = params.clone();
    let mut state = state.clone();
    state.step += 1;
    match state.kind {
        OptimizerKind::PlainSgd => {
            for (w, g) in next.values_mut().zip(grads.values()) {
                *w -= lr * g;
            }
        }
        OptimizerKind::Adam => {
            let (ref mut m, ref mut v) = **state
                .moments
                .as_mut()
                .expect("adam state carries moment buffers");
            if m.dims != grads.dims {
                return Err(Error::Shape(format!(
                    "optimizer moment dims {:?} vs grad dims {:?}",
                    m.dims, grads.dims
                )));
            }
            let t = state.step as i32;
            let bc1 = 1.0 - state.beta1.powi(t);
            let bc2 = 1.0 - state.beta2.powi(t);
            let it = next
                .values_mut()
                .zip(grads.values())
                .zip(m.values_mut().zip(v.values_mut()));
            for ((w, g), (m_i, v_i)) in it {
                *m_i = state.beta1 * *m_i + (1.0 - state.beta1) * g;
                *v_i = state.beta2 * *v_i + (1.0 - state.beta2) * g * g;
                let m_hat = *m_i / bc1;
                let v_hat = *v_i / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
            }
        }
    }
    Ok((next, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_params(values: &[f64]) -> (ParamSet, GradSet) {
        // vocab=2, hidden=1, featdim=1 gives 5 entries; we only poke b2.
        let dims = Dims::new(1, 1, 2);
        let p = ParamSet {
            dims,
            version: 0,
            w1: vec![0.0],
            b1: vec![0.0],
            w2: vec![0.0, 0.0],
            b2: values.to_vec(),
        };
        (p, GradSet::zeros(dims))
    }

    #[test]
    fn plain_sgd_step() {
        let (p, mut g) = tiny_params(&[1.0, 1.0]);
        g.b2 = vec![1.0, -1.0];
        let st = OptimizerState::new(OptimizerKind::PlainSgd, p.dims);
        let (next, st2) = optimizer_step(&p, &g, &st, 0.1).unwrap();
        assert_eq!(next.b2, vec![0.9, 1.1]);
        assert_eq!(st2.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_sgd_params_unchanged() {
        let (p, g) = tiny_params(&[0.3, -0.7]);
        let st = OptimizerState::new(OptimizerKind::PlainSgd, p.dims);
        let (next, _) = optimizer_step(&p, &g, &st, 0.5).unwrap();
        assert_eq!(next.b2, p.b2);
    }

    #[test]
    fn first_adam_step_is_scaled_signum() {
        // With zero moments, step 1 gives w -= lr * g/(|g| + eps) exactly.
        let (p, mut g) = tiny_params(&[1.0, 1.0]);
        g.b2 = vec![0.5, -0.25];
        let st = OptimizerState::new(OptimizerKind::Adam, p.dims);
        let lr = 0.01;
        let (next, st2) = optimizer_step(&p, &g, &st, lr).unwrap();
        for (w, gv) in next.b2.iter().zip(&g.b2) {
            let expect = 1.0 - lr * gv / (gv.abs() + ADAM_EPSILON);
            assert!((w - expect).abs() < 1e-15, "{w} vs {expect}");
        }
        assert_eq!(st2.step, 1);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let (p, _) = tiny_params(&[0.0, 0.0]);
        let g = GradSet::zeros(Dims::new(2, 1, 2));
        let st = OptimizerState::new(OptimizerKind::PlainSgd, p.dims);
        assert!(optimizer_step(&p, &g, &st, 0.1).is_err());
    }
}
