//! Single-hidden-layer tanh network with a linear output and a direct
//! input-to-output linear term, trained by mini-batch Adam on mean squared
//! error.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// Row-major `hidden x inputs`.
    pub w_hidden: Vec<f64>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    /// Direct linear path from the inputs to the output.
    pub w_skip: Vec<f64>,
    pub b_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdSchedule {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Learning rate at the last epoch as a fraction of the initial one.
    pub final_lr_fraction: f64,
    pub batch_size: usize,
    /// L2 penalty on the hidden layer (weights and biases) only.
    pub weight_decay: f64,
}

impl Mlp {
    pub fn new_seeded(inputs: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let w_hidden = (0..hidden * inputs).map(|_| rng.gen_range(-bound..bound)).collect();
        let b_hidden = (0..hidden).map(|_| rng.gen_range(-bound..bound)).collect();
        let out_bound = 1.0 / (hidden as f64).sqrt();
        let w_out = (0..hidden).map(|_| rng.gen_range(-out_bound..out_bound)).collect();
        Self {
            inputs,
            hidden,
            w_hidden,
            b_hidden,
            w_out,
            w_skip: vec![0.0; inputs],
            b_out: 0.0,
        }
    }

    pub fn parameter_count(inputs: usize, hidden: usize) -> usize {
        hidden * inputs + hidden + hidden + inputs + 1
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (h, act) in out.iter_mut().enumerate() {
            let row = &self.w_hidden[h * self.inputs..(h + 1) * self.inputs];
            let z: f64 = self.b_hidden[h] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            *act = z.tanh();
        }
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut act = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut act);
        self.output(x, &act)
    }

    fn output(&self, x: &[f64], act: &[f64]) -> f64 {
        self.b_out
            + self.w_out.iter().zip(act).map(|(w, a)| w * a).sum::<f64>()
            + self.w_skip.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.w_hidden
            .iter()
            .chain(&self.b_hidden)
            .chain(&self.w_out)
            .chain(&self.w_skip)
            .all(|v| v.is_finite())
            && self.b_out.is_finite()
    }

    /// Fits `targets` from `features`; data order is shuffled with `rng`.
    pub fn train(&mut self, features: &[Vec<f64>], targets: &[f64], schedule: &SgdSchedule, rng: &mut ChaCha8Rng) {
        let n_params = Self::parameter_count(self.inputs, self.hidden);
        let mut adam = Adam::new(n_params);
        let mut grad = vec![0.0; n_params];
        let mut act = vec![0.0; self.hidden];
        let mut order: Vec<usize> = (0..features.len()).collect();
        let batch = schedule.batch_size.max(1);
        let decay = if schedule.epochs > 1 {
            schedule.final_lr_fraction.ln() / (schedule.epochs - 1) as f64
        } else {
            0.0
        };

        for epoch in 0..schedule.epochs {
            let lr = schedule.learning_rate * (decay * epoch as f64).exp();
            order.shuffle(rng);
            for chunk in order.chunks(batch) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let scale = 2.0 / chunk.len() as f64;
                for &i in chunk {
                    let x = &features[i];
                    self.hidden_activations(x, &mut act);
                    let y = self.output(x, &act);
                    let err = (y - targets[i]) * scale;
                    self.accumulate_gradient(x, &act, err, &mut grad);
                }
                let hidden_params = self.w_hidden.iter().chain(&self.b_hidden);
                for (g, w) in grad.iter_mut().zip(hidden_params) {
                    *g += 2.0 * schedule.weight_decay * w;
                }
                let mut params = self.flatten();
                adam.update(&mut params, &grad, lr);
                self.unflatten(&params);
            }
        }
    }

    fn accumulate_gradient(&self, x: &[f64], act: &[f64], err: f64, grad: &mut [f64]) {
        let (n_in, n_hid) = (self.inputs, self.hidden);
        let off_b_hidden = n_hid * n_in;
        let off_w_out = off_b_hidden + n_hid;
        let off_w_skip = off_w_out + n_hid;
        let off_b_out = off_w_skip + n_in;
        for h in 0..n_hid {
            grad[off_w_out + h] += err * act[h];
            let delta = err * self.w_out[h] * (1.0 - act[h] * act[h]);
            grad[off_b_hidden + h] += delta;
            for (j, xj) in x.iter().enumerate() {
                grad[h * n_in + j] += delta * xj;
            }
        }
        for (j, xj) in x.iter().enumerate() {
            grad[off_w_skip + j] += err * xj;
        }
        grad[off_b_out] += err;
    }

    fn flatten(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(Self::parameter_count(self.inputs, self.hidden));
        p.extend_from_slice(&self.w_hidden);
        p.extend_from_slice(&self.b_hidden);
        p.extend_from_slice(&self.w_out);
        p.extend_from_slice(&self.w_skip);
        p.push(self.b_out);
        p
    }

    fn unflatten(&mut self, p: &[f64]) {
        let (n_in, n_hid) = (self.inputs, self.hidden);
        let (w_hidden, rest) = p.split_at(n_hid * n_in);
        let (b_hidden, rest) = rest.split_at(n_hid);
        let (w_out, rest) = rest.split_at(n_hid);
        let (w_skip, rest) = rest.split_at(n_in);
        self.w_skip.copy_from_slice(w_skip);
        self.w_hidden.copy_from_slice(w_hidden);
        self.b_hidden.copy_from_slice(b_hidden);
        self.w_out.copy_from_slice(w_out);
        self.b_out = rest[0];
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hidden_weights_output_bias() {
        let net = Mlp {
            inputs: 3,
            hidden: 2,
            w_hidden: vec![0.0; 6],
            b_hidden: vec![0.0; 2],
            w_out: vec![0.7, -0.2],
            w_skip: vec![0.0; 3],
            b_out: 0.25,
        };
        assert_eq!(net.forward(&[0.0, 0.0, 0.0]), 0.25);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded_rng(3);
        let mut net = Mlp::new_seeded(3, 4, &mut rng);
        net.b_out = 0.1;
        let x = [0.3, -0.7, 1.1];
        let target = 0.4;
        let loss = |n: &Mlp| (n.forward(&x) - target).powi(2);

        let mut act = vec![0.0; 4];
        net.hidden_activations(&x, &mut act);
        let mut grad = vec![0.0; Mlp::parameter_count(3, 4)];
        net.accumulate_gradient(&x, &act, 2.0 * (net.forward(&x) - target), &mut grad);

        let base = net.flatten();
        for i in 0..base.len() {
            let h = 1e-6;
            let mut plus = net.clone();
            let mut p = base.clone();
            p[i] += h;
            plus.unflatten(&p);
            let mut minus = net.clone();
            p[i] -= 2.0 * h;
            minus.unflatten(&p);
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6, "param {i}: fd {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn fits_a_linear_map() {
        let mut rng = seeded_rng(11);
        let features: Vec<Vec<f64>> = (0..400)
            .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = features.iter().map(|x| 0.5 * x[0] - 0.3 * x[1]).collect();
        let mut net = Mlp::new_seeded(2, 4, &mut rng);
        let schedule = SgdSchedule {
            epochs: 300,
            learning_rate: 0.01,
            final_lr_fraction: 0.1,
            batch_size: 16,
            weight_decay: 0.0,
        };
        net.train(&features, &targets, &schedule, &mut rng);
        let mse: f64 = features
            .iter()
            .zip(&targets)
            .map(|(x, y)| (net.forward(x) - y).powi(2))
            .sum::<f64>()
            / targets.len() as f64;
        assert!(mse.sqrt() < 5e-3, "rmse {}", mse.sqrt());
    }
}
