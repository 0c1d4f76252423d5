/// Momentum optimizer state for one weight tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub v: Vec<f64>,
    pub beta: f64,
    pub lr: f64,
}

impl MomentumState {
    pub fn new(len: usize, beta: f64, lr: f64) -> Self {
        MomentumState {
            v: vec![0.0; len],
            beta,
            lr,
        }
    }

    /// `v' = beta v + (1 - beta) g`; returns `lr v'`, the magnitude of the
    /// step to subtract from the weights.
    pub fn update(&mut self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.v.len(), "gradient shape mismatch");
        let (b, lr) = (self.beta, self.lr);
        self.v
            .iter_mut()
            .zip(g)
            .map(|(v, g)| {
                *v = b * *v + (1.0 - b) * g;
                lr * *v
            })
            .collect()
    }
}
