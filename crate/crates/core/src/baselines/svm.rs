use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, index_labels, Features};
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// One-vs-rest linear SVM minimizing
/// `reg/2 * (|w|^2 + b^2) + mean(max(0, 1 - y (w.x + b)))`
/// by dual coordinate descent, the bias acting as a constant feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub regularization: f64,
    /// Stop once the relative duality gap falls to this value.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { regularization: 1e-3, tolerance: 1e-4, max_epochs: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub labels: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub regularization: f64,
    /// Final primal objective per class.
    pub objectives: Vec<f64>,
    pub converged: Vec<bool>,
}

/// Per-epoch trace of one binary problem.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BinaryFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal_trace: Vec<f64>,
    pub dual_trace: Vec<f64>,
    pub converged: bool,
}

pub(crate) fn primal_objective<X: Features + ?Sized>(
    xs: &[&X],
    ys: &[f64],
    weights: &[f64],
    bias: f64,
    reg: f64,
) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (x.dot(weights) + bias)).max(0.0))
        .sum();
    0.5 * reg * (weights.squared_norm() + bias * bias) + hinge / xs.len() as f64
}

pub(crate) fn fit_binary<X: Features + ?Sized>(
    xs: &[&X],
    ys: &[f64],
    dim: usize,
    config: &SvmConfig,
    class: usize,
) -> BinaryFit {
    let n = xs.len();
    let reg = config.regularization;
    let upper = 1.0 / (reg * n as f64);
    let diag: Vec<f64> = xs.iter().map(|x| x.squared_norm() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(config.seed, &[stream::SVM, class as u64]);
    let mut primal_trace = Vec::new();
    let mut dual_trace = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let grad = ys[i] * (xs[i].dot(&weights) + bias) - 1.0;
            let next = (alpha[i] - grad / diag[i]).clamp(0.0, upper);
            let step = (next - alpha[i]) * ys[i];
            if step != 0.0 {
                xs[i].add_scaled(step, &mut weights);
                bias += step;
                alpha[i] = next;
            }
        }
        let sq = weights.squared_norm() + bias * bias;
        let dual = reg * (alpha.iter().sum::<f64>() - 0.5 * sq);
        let primal = primal_objective(xs, ys, &weights, bias, reg);
        primal_trace.push(primal);
        dual_trace.push(dual);
        if primal - dual <= config.tolerance * primal.abs() {
            converged = true;
            break;
        }
    }
    BinaryFit { weights, bias, primal_trace, dual_trace, converged }
}

pub fn train_svm<X: Features + ?Sized + Sync>(
    samples: &[(&X, &str)],
    dim: usize,
    config: &SvmConfig,
) -> Result<LinearSvmModel> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(config.regularization > 0.0 && config.regularization.is_finite()) {
        return Err(Error::InvalidConfig("regularization must be positive".into()));
    }
    if !(config.tolerance > 0.0) || config.max_epochs == 0 {
        return Err(Error::InvalidConfig("tolerance and epoch limit must be positive".into()));
    }
    if let Some((x, _)) = samples.iter().find(|(x, _)| x.min_dim() > dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: x.min_dim() });
    }
    let (labels, index) = index_labels(samples.iter().map(|s| s.1));
    if labels.len() < 2 {
        return Err(Error::SingleClass(labels.len()));
    }
    let xs: Vec<&X> = samples.iter().map(|s| s.0).collect();
    if xs.iter().any(|x| !x.squared_norm().is_finite()) {
        return Err(Error::InvalidConfig("features must be finite".into()));
    }
    let fits: Vec<BinaryFit> = (0..labels.len())
        .into_par_iter()
        .map(|c| {
            let ys: Vec<f64> = index.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            fit_binary(&xs, &ys, dim, config, c)
        })
        .collect();
    Ok(LinearSvmModel {
        labels,
        objectives: fits.iter().map(|f| *f.primal_trace.last().unwrap()).collect(),
        converged: fits.iter().map(|f| f.converged).collect(),
        bias: fits.iter().map(|f| f.bias).collect(),
        weights: fits.into_iter().map(|f| f.weights).collect(),
        regularization: config.regularization,
    })
}

impl LinearSvmModel {
    pub fn margins<X: Features + ?Sized>(&self, x: &X) -> Vec<f64> {
        self.weights.iter().zip(&self.bias).map(|(w, b)| x.dot(w) + b).collect()
    }

    pub fn predict_index<X: Features + ?Sized>(&self, x: &X) -> usize {
        argmax(&self.margins(x))
    }

    pub fn predict<X: Features + ?Sized>(&self, x: &X) -> &str {
        &self.labels[self.predict_index(x)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tight() -> SvmConfig {
        SvmConfig { regularization: 0.01, tolerance: 1e-10, max_epochs: 100_000, seed: 3 }
    }

    #[test]
    fn separable_data_has_zero_hinge_loss() {
        let pts = [vec![2.0, 2.0], vec![3.0, 1.5], vec![2.5, 3.0], vec![-2.0, -1.0], vec![-3.0, -2.5], vec![-1.5, -3.0]];
        let labels = ["p", "p", "p", "n", "n", "n"];
        let samples: Vec<(&Vec<f64>, &str)> = pts.iter().zip(labels).collect();
        let m = train_svm(&samples, 2, &tight()).unwrap();
        for (x, l) in &samples {
            let c = m.labels.iter().position(|s| s == l).unwrap();
            let y = m.margins(*x)[c];
            assert!(y >= 1.0 - 1e-6, "margin {y}");
            assert_eq!(m.predict(*x), *l);
        }
    }

    #[test]
    fn symmetric_points_give_zero_bias() {
        let pts: Vec<Vec<f64>> = [1.0, 2.0, 3.5, -1.0, -2.0, -3.5].iter().map(|&v| vec![v]).collect();
        let labels = ["p", "p", "p", "n", "n", "n"];
        let samples: Vec<(&Vec<f64>, &str)> = pts.iter().zip(labels).collect();
        let m = train_svm(&samples, 1, &tight()).unwrap();
        assert!(m.bias.iter().all(|b| b.abs() < 1e-6), "{:?}", m.bias);
    }

    /// Projected gradient ascent on the box-constrained dual.
    fn reference_optimum(xs: &[Vec<f64>], ys: &[f64], reg: f64) -> f64 {
        let n = xs.len();
        let upper = 1.0 / (reg * n as f64);
        let aug: Vec<Vec<f64>> = xs.iter().map(|x| x.iter().copied().chain([1.0]).collect()).collect();
        let kernel: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| ys[i] * ys[j] * aug[i].iter().zip(&aug[j]).map(|(a, b)| a * b).sum::<f64>()).collect())
            .collect();
        let lipschitz: f64 = kernel.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let step = 1.0 / lipschitz;
        let mut alpha = vec![0.0; n];
        for _ in 0..200_000 {
            let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| kernel[i][j] * alpha[j]).sum::<f64>()).collect();
            for i in 0..n {
                alpha[i] = (alpha[i] + step * grad[i]).clamp(0.0, upper);
            }
        }
        let dim = aug[0].len();
        let w: Vec<f64> = (0..dim).map(|d| (0..n).map(|i| alpha[i] * ys[i] * aug[i][d]).sum()).collect();
        let (bias, weights) = (w[dim - 1], &w[..dim - 1]);
        let refs: Vec<&Vec<f64>> = xs.iter().collect();
        primal_objective(&refs, ys, weights, bias, reg)
    }

    #[test]
    fn matches_reference_optimizer_on_twenty_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let shift = if i < 10 { 1.0 } else { -1.0 };
                vec![shift + rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0), shift * 0.5 + rng.random_range(-1.0..1.0)]
            })
            .collect();
        let ys: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let reg = 0.05;
        let oracle = reference_optimum(&xs, &ys, reg);
        let config = SvmConfig { regularization: reg, ..SvmConfig::default() };
        let refs: Vec<&Vec<f64>> = xs.iter().collect();
        let fit = fit_binary(&refs, &ys, 3, &config, 0);
        assert!(fit.converged);
        let ours = *fit.primal_trace.last().unwrap();
        assert!((ours - oracle).abs() <= 1e-4 * oracle, "ours {ours} oracle {oracle}");

        let labels: Vec<&str> = ys.iter().map(|&y| if y > 0.0 { "pos" } else { "neg" }).collect();
        let samples: Vec<(&Vec<f64>, &str)> = xs.iter().zip(labels).collect();
        let m = train_svm(&samples, 3, &config).unwrap();
        assert!((m.objectives[1] - oracle).abs() <= 1e-4 * oracle);
    }

    #[test]
    fn dual_trace_is_monotone_and_bounds_primal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let n = 30 + trial;
            let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let ys: Vec<f64> = xs.iter().map(|x| if x[0] + 0.3 * x[1] + rng.random_range(-0.5..0.5) > 0.0 { 1.0 } else { -1.0 }).collect();
            let refs: Vec<&Vec<f64>> = xs.iter().collect();
            let config = SvmConfig { regularization: 0.02, seed: trial as u64, ..SvmConfig::default() };
            let fit = fit_binary(&refs, &ys, 4, &config, 0);
            let negated: Vec<f64> = fit.dual_trace.iter().map(|d| -d).collect();
            assert!(negated.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(fit.primal_trace.iter().zip(&fit.dual_trace).all(|(p, d)| p >= &(d - 1e-12)));
            assert!(fit.converged);
        }
    }

    #[test]
    fn single_class_rejected_and_deterministic() {
        let pts = [vec![1.0], vec![2.0]];
        let samples: Vec<(&Vec<f64>, &str)> = pts.iter().zip(["a", "a"]).collect();
        assert!(matches!(train_svm(&samples, 1, &SvmConfig::default()), Err(Error::SingleClass(1))));
        let samples: Vec<(&Vec<f64>, &str)> = pts.iter().zip(["a", "b"]).collect();
        let a = train_svm(&samples, 1, &SvmConfig::default()).unwrap();
        let b = train_svm(&samples, 1, &SvmConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sparse_features() {
        use crate::corpus::SparseCounts;
        let docs = [
            SparseCounts::from_pairs([(0, 3), (1, 1)]),
            SparseCounts::from_pairs([(0, 2)]),
            SparseCounts::from_pairs([(2, 2), (3, 1)]),
            SparseCounts::from_pairs([(3, 4)]),
        ];
        let samples: Vec<(&SparseCounts, &str)> = docs.iter().zip(["x", "x", "y", "y"]).collect();
        let m = train_svm(&samples, 4, &SvmConfig::default()).unwrap();
        assert_eq!(m.predict(&SparseCounts::from_pairs([(0, 1)])), "x");
        assert_eq!(m.predict(&SparseCounts::from_pairs([(3, 1), (9, 5)])), "y");
    }
}
