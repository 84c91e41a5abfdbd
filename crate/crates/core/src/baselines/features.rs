use crate::corpus::{DenseVector, SparseCounts};

/// A feature vector a linear model can consume.
pub trait Features {
    /// Inner product with a dense weight vector; indices past its end count as 0.
    fn dot(&self, weights: &[f64]) -> f64;
    /// `weights += scale * self`, ignoring indices past its end.
    fn add_scaled(&self, scale: f64, weights: &mut [f64]);
    fn squared_norm(&self) -> f64;
    /// Smallest dense length that holds every coordinate.
    fn min_dim(&self) -> usize;
}

impl Features for SparseCounts {
    fn dot(&self, weights: &[f64]) -> f64 {
        self.iter()
            .filter_map(|(j, c)| weights.get(j as usize).map(|w| w * c as f64))
            .sum()
    }
    fn add_scaled(&self, scale: f64, weights: &mut [f64]) {
        for (j, c) in self.iter() {
            if let Some(w) = weights.get_mut(j as usize) {
                *w += scale * c as f64;
            }
        }
    }
    fn squared_norm(&self) -> f64 {
        self.iter().map(|(_, c)| (c as f64).powi(2)).sum()
    }
    fn min_dim(&self) -> usize {
        self.iter().last().map_or(0, |(j, _)| j as usize + 1)
    }
}

impl Features for [f64] {
    fn dot(&self, weights: &[f64]) -> f64 {
        self.iter().zip(weights).map(|(x, w)| x * w).sum()
    }
    fn add_scaled(&self, scale: f64, weights: &mut [f64]) {
        for (w, x) in weights.iter_mut().zip(self) {
            *w += scale * x;
        }
    }
    fn squared_norm(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }
    fn min_dim(&self) -> usize {
        self.len()
    }
}

impl Features for Vec<f64> {
    fn dot(&self, weights: &[f64]) -> f64 {
        self.as_slice().dot(weights)
    }
    fn add_scaled(&self, scale: f64, weights: &mut [f64]) {
        self.as_slice().add_scaled(scale, weights)
    }
    fn squared_norm(&self) -> f64 {
        self.as_slice().squared_norm()
    }
    fn min_dim(&self) -> usize {
        self.len()
    }
}

impl Features for DenseVector {
    fn dot(&self, weights: &[f64]) -> f64 {
        self.values().dot(weights)
    }
    fn add_scaled(&self, scale: f64, weights: &mut [f64]) {
        self.values().add_scaled(scale, weights)
    }
    fn squared_norm(&self) -> f64 {
        self.values().squared_norm()
    }
    fn min_dim(&self) -> usize {
        self.dim()
    }
}
