use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::UhatError;

/// Dimension and sampling budget for almost-orthogonal vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JlConfig {
    /// `d = max(min_dim, ceil(c * ln n))`.
    pub c: f64,
    pub min_dim: usize,
    /// Draws allowed per vector before giving up.
    pub max_trials: usize,
}

impl Default for JlConfig {
    fn default() -> Self {
        JlConfig { c: 16.0, min_dim: 8, max_trials: 10_000 }
    }
}

impl JlConfig {
    pub fn dim(&self, n: usize) -> usize {
        let d = (self.c * (n.max(1) as f64).ln()).ceil() as usize;
        d.max(self.min_dim).max(1)
    }
}

/// Pairwise inner product threshold for distinct vectors.
pub const JL_THRESHOLD: f64 = 0.25;

/// `n` unit vectors with pairwise inner products at most 1/4.
#[derive(Clone, Debug, PartialEq)]
pub struct JlVectorSet {
    dim: usize,
    vectors: Vec<DVector<f64>>,
}

impl JlVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &DVector<f64> {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    /// Largest inner product between distinct vectors (`-inf` for one vector).
    pub fn max_cross_product(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                worst = worst.max(self.vectors[i].dot(&self.vectors[j]));
            }
        }
        worst
    }
}

pub fn jl_vectors(n: usize, seed: u64) -> Result<JlVectorSet, UhatError> {
    jl_vectors_with(n, seed, JlConfig::default())
}

/// Random sign vectors scaled by `1/sqrt(d)`, each redrawn until it clears
/// the threshold against all earlier ones.
pub fn jl_vectors_with(n: usize, seed: u64, config: JlConfig) -> Result<JlVectorSet, UhatError> {
    if n == 0 {
        return Err(UhatError::Shape("need at least one J-L vector".into()));
    }
    let dim = config.dim(n);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<DVector<f64>> = Vec::with_capacity(n);
    for index in 0..n {
        let mut accepted = None;
        for _ in 0..config.max_trials {
            let v = DVector::from_fn(dim, |_, _| if rng.random::<bool>() { scale } else { -scale });
            if vectors.iter().all(|u| u.dot(&v) <= JL_THRESHOLD) {
                accepted = Some(v);
                break;
            }
        }
        match accepted {
            Some(v) => vectors.push(v),
            None => return Err(UhatError::MaxTrialsExceeded { index, dim, trials: config.max_trials }),
        }
    }
    Ok(JlVectorSet { dim, vectors })
}
