use crate::error::{NnError, Result};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 2e-4,
            beta1: 0.0,
            beta2: 0.9,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates for one parameter array.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.t as i32);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Adam over every parameter of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    states: Vec<AdamState>,
    invocations: u64,
}

impl Adam {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        let states = net
            .parameters()
            .iter()
            .map(|p| AdamState::new(p.len()))
            .collect();
        Self {
            config,
            states,
            invocations: 0,
        }
    }

    pub fn step(&mut self, net: &mut Network) -> Result<()> {
        let mut params = net.parameters_mut();
        if params.len() != self.states.len() {
            return Err(NnError::Shape(format!(
                "optimizer tracks {} parameters, network has {}",
                self.states.len(),
                params.len()
            )));
        }
        for (p, state) in params.iter_mut().zip(self.states.iter_mut()) {
            let (values, grads) = p.value_and_grad_mut();
            if grads.len() != values.len() || state.m.len() != values.len() {
                return Err(NnError::Shape("parameter without matching gradient".into()));
            }
            adam_step(values, grads, state, &self.config);
        }
        self.invocations += 1;
        Ok(())
    }

    /// Number of completed [`Adam::step`] calls.
    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    pub fn states(&self) -> &[AdamState] {
        &self.states
    }
}
