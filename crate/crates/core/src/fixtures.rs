//! Small reference games and random game generators.

use rand::Rng;

use crate::game::{BimatrixGame, Matrix, OptimizerType};

/// Three learner actions (A, B, C) against two optimizer actions (R, S).
/// No-swap-regret play earns the learner 3 here while a no-regret menu earns 5.
pub fn g1() -> BimatrixGame {
    let learner = Matrix::from_rows(&[vec![0.0, 3.0], vec![7.1, 2.1], vec![7.0, 1.0]]).unwrap();
    let optimizer = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0], vec![3.0, 0.0]]).unwrap();
    BimatrixGame::single(learner, optimizer).unwrap()
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Payoffs uniform in `[-1, 1]`, prior drawn from a flat Dirichlet.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, k: usize) -> BimatrixGame {
    let learner = random_matrix(rng, m, n, 1.0);
    let raw: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut alphas: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = alphas[..k - 1].iter().sum();
    alphas[k - 1] = (1.0 - head).max(0.0);
    let types = alphas
        .into_iter()
        .map(|alpha| OptimizerType {
            payoff: random_matrix(rng, m, n, 1.0),
            alpha,
        })
        .collect();
    BimatrixGame::new(learner, types).unwrap()
}

pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}
