use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{NnError, Result};
use crate::tensor::Tensor;

/// Lower bound on the singular-value estimate.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Persistent left/right vectors for power iteration on a `rows x cols`
/// matrix (conv kernels are viewed as `[out, in * 9]`).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerIteration {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PowerIteration {
    pub fn new(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let mut u: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        normalize(&mut u);
        let mut v: Vec<f64> = (0..cols).map(|_| rng.sample(StandardNormal)).collect();
        normalize(&mut v);
        Self { u, v }
    }

    pub fn rows(&self) -> usize {
        self.u.len()
    }

    pub fn cols(&self) -> usize {
        self.v.len()
    }

    /// `v <- W^T u / |.|`, `u <- W v / |.|`, repeated `iters` times.
    pub fn iterate(&mut self, w: &[f64], iters: usize) {
        let (rows, cols) = (self.rows(), self.cols());
        debug_assert_eq!(w.len(), rows * cols);
        for _ in 0..iters {
            self.v.fill(0.0);
            for (r, &ur) in self.u.iter().enumerate() {
                for (vc, &wrc) in self.v.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                    *vc += wrc * ur;
                }
            }
            normalize(&mut self.v);
            for (r, ur) in self.u.iter_mut().enumerate() {
                *ur = dot(&w[r * cols..(r + 1) * cols], &self.v);
            }
            normalize(&mut self.u);
        }
    }

    /// `max(u^T W v, SIGMA_FLOOR)` with the current vectors.
    pub fn sigma(&self, w: &[f64]) -> f64 {
        let cols = self.cols();
        let s: f64 = self
            .u
            .iter()
            .enumerate()
            .map(|(r, &ur)| ur * dot(&w[r * cols..(r + 1) * cols], &self.v))
            .sum();
        s.max(SIGMA_FLOOR)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

/// Runs `iters` power iterations, then returns `weight / sigma` and `sigma`.
pub fn spectral_normalize(
    weight: &Tensor,
    state: &mut PowerIteration,
    iters: usize,
) -> Result<(Tensor, f64)> {
    let rows = weight.shape().first().copied().unwrap_or(0);
    if rows == 0 || rows * state.cols() != weight.len() || rows != state.rows() {
        return Err(NnError::Shape(format!(
            "weight {:?} does not match power-iteration state {}x{}",
            weight.shape(),
            state.rows(),
            state.cols()
        )));
    }
    state.iterate(weight.data(), iters);
    let sigma = state.sigma(weight.data());
    let data = weight.data().iter().map(|w| w / sigma).collect();
    Ok((Tensor::new(weight.shape().to_vec(), data)?, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_three_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = Tensor::new(vec![2, 2], vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let mut state = PowerIteration::new(2, 2, &mut rng);
        let (_, sigma) = spectral_normalize(&w, &mut state, 50).unwrap();
        assert!((sigma - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_weight_is_floored() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Tensor::zeros(vec![3, 4]);
        let mut state = PowerIteration::new(3, 4, &mut rng);
        let (wn, sigma) = spectral_normalize(&w, &mut state, 3).unwrap();
        assert_eq!(sigma, SIGMA_FLOOR);
        assert!(wn.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn state_shape_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = Tensor::zeros(vec![3, 4]);
        let mut state = PowerIteration::new(4, 3, &mut rng);
        assert!(spectral_normalize(&w, &mut state, 1).is_err());
    }
}
