//! Adam update rule with bias correction.

use alloc::vec::Vec;

use crate::vector::Vector;

/// Adam optimizer state (first/second moments plus hyperparameters).
///
/// [`AdamState::update`] follows the descent convention: it subtracts the
/// bias-corrected step from the parameters. Callers maximizing an objective
/// pass the negated gradient.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vector,
    v: Vector,
    step: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Fresh state with the conventional defaults β1=0.9, β2=0.999, eps=1e-8.
    pub fn new(dim: usize, lr: f64) -> Self {
        assert!(lr > 0.0, "learning rate must be positive");
        Self {
            m: Vector::zeros(dim),
            v: Vector::zeros(dim),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam descent step; returns the updated parameters.
    ///
    /// Panics if `params` or `grad` dimensions disagree with the state.
    pub fn update(&mut self, params: &Vector, grad: &Vector) -> Vector {
        assert_eq!(params.dim(), self.m.dim(), "params dimension mismatch");
        assert_eq!(grad.dim(), self.m.dim(), "gradient dimension mismatch");
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let mut out = Vec::with_capacity(params.dim());
        let mut m_next = Vec::with_capacity(params.dim());
        let mut v_next = Vec::with_capacity(params.dim());
        for i in 0..params.dim() {
            let g = grad[i];
            let m = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            let v = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m / bc1;
            let v_hat = v / bc2;
            out.push(params[i] - self.lr * m_hat / (libm::sqrt(v_hat) + self.eps));
            m_next.push(m);
            v_next.push(v);
        }
        self.m = Vector::new(m_next);
        self.v = Vector::new(v_next);
        Vector::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_matches_hand_computation() {
        // m̂ = v̂ = 1 after one step on a unit gradient, so the update is
        // lr / (1 + eps).
        let mut adam = AdamState::new(1, 0.01);
        let next = adam.update(&Vector::zeros(1), &Vector::new(vec![1.0]));
        let expected = -(0.01 / (1.0 + 1e-8));
        assert!((next[0] - expected).abs() < 1e-15, "got {}", next[0]);
        assert!((next[0] - (-0.00999999995)).abs() < 1e-9);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn two_steps_match_hand_computation() {
        let mut adam = AdamState::new(1, 0.01);
        let grad = Vector::new(vec![1.0]);
        let p1 = adam.update(&Vector::zeros(1), &grad);
        let p2 = adam.update(&p1, &grad);
        assert!((p2[0] - (-0.0199999)).abs() < 1e-6, "got {}", p2[0]);
        assert_eq!(adam.step_count(), 2);
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut adam = AdamState::new(3, 0.5);
        let params = Vector::new(vec![0.25, -1.5, 3.0]);
        let mut current = params.clone();
        for step in 1..=20 {
            current = adam.update(&current, &Vector::zeros(3));
            assert_eq!(adam.step_count(), step);
        }
        assert_eq!(current, params);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn rejects_mismatched_gradient() {
        AdamState::new(2, 0.1).update(&Vector::zeros(2), &Vector::zeros(3));
    }
}
