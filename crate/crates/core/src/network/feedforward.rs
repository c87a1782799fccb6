use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Logistic squashing function `1 / (1 + e^-z)`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenUnit {
    pub input_weight: f64,
    pub bias: f64,
    pub output_weight: f64,
}

/// `x ↦ Σ_h v_h σ(w_h x + b_h) + b_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardNet {
    pub hidden: Vec<HiddenUnit>,
    pub output_bias: f64,
    /// Set by [`train_ffn`].
    pub report: Option<TrainingReport>,
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { hidden: 4, epochs: 20_000, learning_rate: 0.5, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingReport {
    pub mse: f64,
    pub sup_error: f64,
    pub initial_mse: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl FeedforwardNet {
    pub fn zeros(hidden: usize) -> Self {
        let unit = HiddenUnit { input_weight: 0.0, bias: 0.0, output_weight: 0.0 };
        FeedforwardNet { hidden: alloc::vec![unit; hidden], output_bias: 0.0, report: None }
    }

    /// Weights drawn from `U(-1, 1)` unit by unit in the order input weight,
    /// bias, output weight. The output bias starts at zero.
    pub fn random(hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || rng.gen_range(-1.0..1.0);
        let hidden = (0..hidden)
            .map(|_| HiddenUnit { input_weight: draw(), bias: draw(), output_weight: draw() })
            .collect();
        FeedforwardNet { hidden, output_bias: 0.0, report: None }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.hidden
            .iter()
            .map(|u| u.output_weight * sigmoid(u.input_weight * x + u.bias))
            .sum::<f64>()
            + self.output_bias
    }

    /// Parameters as `[w, b, v]` per hidden unit followed by the output bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .hidden
            .iter()
            .flat_map(|u| [u.input_weight, u.bias, u.output_weight])
            .collect();
        p.push(self.output_bias);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), 3 * self.hidden.len() + 1, "parameter count");
        for (u, c) in self.hidden.iter_mut().zip(p.chunks_exact(3)) {
            *u = HiddenUnit { input_weight: c[0], bias: c[1], output_weight: c[2] };
        }
        self.output_bias = p[p.len() - 1];
    }

    /// Mean squared error over the samples.
    pub fn mse(&self, samples: &[(f64, f64)]) -> f64 {
        samples.iter().map(|&(x, y)| {
            let r = self.eval(x) - y;
            r * r
        }).sum::<f64>() / samples.len() as f64
    }

    pub fn sup_error(&self, samples: &[(f64, f64)]) -> f64 {
        samples.iter().map(|&(x, y)| (self.eval(x) - y).abs()).fold(0.0, f64::max)
    }

    /// Gradient of [`Self::mse`] in the layout of [`Self::params`].
    pub fn mse_gradient(&self, samples: &[(f64, f64)]) -> Vec<f64> {
        let h = self.hidden.len();
        let mut g = alloc::vec![0.0; 3 * h + 1];
        let scale = 2.0 / samples.len() as f64;
        let mut acts = alloc::vec![0.0; h];
        for &(x, y) in samples {
            let mut out = self.output_bias;
            for (a, u) in acts.iter_mut().zip(&self.hidden) {
                *a = sigmoid(u.input_weight * x + u.bias);
                out += u.output_weight * *a;
            }
            let r = scale * (out - y);
            for (k, (u, &a)) in self.hidden.iter().zip(&acts).enumerate() {
                let dz = r * u.output_weight * a * (1.0 - a);
                g[3 * k] += dz * x;
                g[3 * k + 1] += dz;
                g[3 * k + 2] += r * a;
            }
            g[3 * h] += r;
        }
        g
    }
}

/// Full-batch gradient descent on the mean squared error.
pub fn train_ffn(samples: &[(f64, f64)], config: &TrainConfig) -> Result<(FeedforwardNet, TrainingReport)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "training needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if config.hidden == 0 {
        return Err(Error::InvalidArgument("hidden layer must have at least one unit".into()));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let mut net = FeedforwardNet::random(config.hidden, config.seed);
    let initial_mse = net.mse(samples);
    let mut params = net.params();
    for epoch in 0..config.epochs {
        let g = net.mse_gradient(samples);
        for (p, d) in params.iter_mut().zip(&g) {
            *p -= config.learning_rate * d;
        }
        net.set_params(&params);
        if !params.iter().all(|p| p.is_finite()) || !net.mse(samples).is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
    }
    let report = TrainingReport {
        mse: net.mse(samples),
        sup_error: net.sup_error(samples),
        initial_mse,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        hidden: config.hidden,
        seed: config.seed,
    };
    net.report = Some(report);
    Ok((net, report))
}

/// Step of the central differences in [`gradient_check`].
pub const FD_STEP: f64 = 1e-6;

/// Largest relative deviation between the analytic gradient of the MSE and
/// central finite differences, per parameter. Deviations are relative to
/// `max(|analytic|, |numeric|, 1e-3)` so that near-zero components are
/// compared absolutely.
pub fn gradient_check(net: &FeedforwardNet, samples: &[(f64, f64)]) -> f64 {
    let analytic = net.mse_gradient(samples);
    let base = net.params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + FD_STEP;
        probe.set_params(&p);
        let up = probe.mse(samples);
        p[k] = base[k] - FD_STEP;
        probe.set_params(&p);
        let down = probe.mse(samples);
        let n = (up - down) / (2.0 * FD_STEP);
        worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-3));
    }
    worst
}

/// `x_{t+1} = clamp(net(x_t), 0, 1)`; `steps + 1` values.
pub fn recur_ffn(net: &FeedforwardNet, x0: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0);
    let mut x = x0;
    for _ in 0..steps {
        x = net.eval(x).clamp(0.0, 1.0);
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn closed_form_outputs() {
        let mut n = FeedforwardNet::zeros(3);
        n.output_bias = 0.5;
        assert_eq!(n.eval(-7.0), 0.5);
        let mut one = FeedforwardNet::zeros(1);
        one.hidden[0].output_weight = 1.0;
        assert_eq!(one.eval(3.0), 0.5);
    }

    #[test]
    fn sigmoid_is_monotone_and_bounded() {
        let grid: Vec<f64> = (0..10_000).map(|i| -20.0 + 40.0 * i as f64 / 9_999.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&z| sigmoid(z)).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(vals.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn zero_net_output_bias_gradient() {
        let n = FeedforwardNet::zeros(2);
        let s = [(0.3, 0.8)];
        let g = n.mse_gradient(&s);
        assert!((g[6] - 2.0 * (0.0 - 0.8)).abs() <= 1e-12);
        assert!(gradient_check(&n, &s) <= 1e-8);
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let n = FeedforwardNet::random(3, 9);
        let s = [(0.4, n.eval(0.4))];
        assert!(n.mse_gradient(&s).iter().all(|g| g.abs() <= 1e-8));
    }

    #[test]
    fn zero_epochs_leaves_initialization() {
        let s = [(0.0, 0.1), (1.0, 0.9)];
        let cfg = TrainConfig { hidden: 2, epochs: 0, learning_rate: 0.1, seed: 3 };
        let (net, report) = train_ffn(&s, &cfg).unwrap();
        let fresh = FeedforwardNet::random(2, 3);
        assert_eq!(net.params(), fresh.params());
        assert_eq!(report.mse, fresh.mse(&s));
        assert_eq!(report.mse, report.initial_mse);
    }

    #[test]
    fn constant_target_is_learned() {
        let s: Vec<_> = (0..16).map(|i| (i as f64 / 15.0, 0.3)).collect();
        let cfg = TrainConfig { hidden: 2, epochs: 5_000, learning_rate: 0.5, seed: 4 };
        let (_, report) = train_ffn(&s, &cfg).unwrap();
        assert!(report.sup_error <= 1e-3, "{report:?}");
    }

    #[test]
    fn divergence_is_reported() {
        let s = [(0.0, 0.0), (1.0, 1e3)];
        let cfg = TrainConfig { hidden: 2, epochs: 200, learning_rate: 1e3, seed: 1 };
        assert!(matches!(train_ffn(&s, &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn recurrence_with_constant_and_identity() {
        let mut c = FeedforwardNet::zeros(1);
        c.output_bias = 0.25;
        assert_eq!(recur_ffn(&c, 0.9, 3), vec![0.9, 0.25, 0.25, 0.25]);
        let mut over = FeedforwardNet::zeros(1);
        over.output_bias = 3.0;
        assert_eq!(recur_ffn(&over, 0.0, 1), vec![0.0, 1.0]);
    }
}
