//! Adam with bias correction, plus a plain SGD mode used to make the
//! update rule testable in closed form.

use crate::error::{AclError, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First/second moment accumulators for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl MomentPair {
    pub fn zeros(len: usize) -> Self {
        MomentPair {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// Adam state for a group of tensors. `t` increments once per step over
/// the whole group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub slots: Vec<MomentPair>,
}

impl AdamState {
    pub fn new(tensor_lens: &[usize]) -> Self {
        AdamState {
            t: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: ADAM_EPS,
            slots: tensor_lens.iter().map(|&l| MomentPair::zeros(l)).collect(),
        }
    }
}

/// Bias-corrected Adam update for one tensor at step `t` (t >= 1).
pub fn adam_update_tensor(
    params: &mut [f64],
    grads: &[f64],
    slot: &mut MomentPair,
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), slot.m.len());
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        slot.m[i] = beta1 * slot.m[i] + (1.0 - beta1) * g;
        slot.v[i] = beta2 * slot.v[i] + (1.0 - beta2) * g * g;
        let m_hat = slot.m[i] / bc1;
        let v_hat = slot.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Optimizer for one parameter group.
#[derive(Debug, Clone)]
pub enum GroupOptimizer {
    Adam(AdamState),
    Sgd,
}

impl GroupOptimizer {
    /// Apply one step over the group's tensors, presented as
    /// (params, grads) pairs in a fixed order matching the state slots.
    ///
    /// `lr` must be positive. NaN gradients are rejected with an error
    /// naming the parameter group.
    pub fn step(
        &mut self,
        tensors: &mut [(&mut [f64], &[f64])],
        lr: f64,
        group_name: &str,
    ) -> Result<()> {
        if lr <= 0.0 {
            return Err(AclError::Config(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        for (params, grads) in tensors.iter() {
            if params.len() != grads.len() {
                return Err(AclError::dim(
                    format!("optimizer step for {group_name}"),
                    params.len(),
                    grads.len(),
                ));
            }
            if grads.iter().any(|g| g.is_nan()) {
                return Err(AclError::numeric(
                    format!("gradients of {group_name}"),
                    "NaN gradient",
                ));
            }
        }
        match self {
            GroupOptimizer::Sgd => {
                for (params, grads) in tensors.iter_mut() {
                    for (p, &g) in params.iter_mut().zip(grads.iter()) {
                        *p -= lr * g;
                    }
                }
            }
            GroupOptimizer::Adam(state) => {
                if state.slots.len() != tensors.len() {
                    return Err(AclError::dim(
                        format!("adam slots for {group_name}"),
                        state.slots.len(),
                        tensors.len(),
                    ));
                }
                state.t += 1;
                let (b1, b2, eps, t) = (state.beta1, state.beta2, state.eps, state.t);
                for (slot, (params, grads)) in state.slots.iter_mut().zip(tensors.iter_mut()) {
                    adam_update_tensor(params, grads, slot, t, lr, b1, b2, eps);
                }
            }
        }
        for (params, _) in tensors.iter() {
            if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
                return Err(AclError::numeric(
                    format!("parameters of {group_name}"),
                    format!("non-finite value {bad} after update"),
                ));
            }
        }
        Ok(())
    }
}
