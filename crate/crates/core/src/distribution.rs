use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tolerances::SUM_TOL;

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + c
}

/// Probability vector over an enumerated finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    weights: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Precondition("negative or non-finite weight".into()));
        }
        let s = compensated_sum(weights.iter().copied());
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::Precondition(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative mass; fails on zero total.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let s = compensated_sum(weights.iter().copied());
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Precondition("no mass to normalize".into()));
        }
        weights.iter_mut().for_each(|w| *w /= s);
        Self::new(weights)
    }

    pub fn point(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform over the listed indices of an `n`-state space.
    pub fn uniform_on(n: usize, support: &[usize]) -> Self {
        let mut weights = vec![0.0; n];
        let w = 1.0 / support.len() as f64;
        for &i in support {
            weights[i] = w;
        }
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        total_variation(&self.weights, &other.weights)
    }

    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        compensated_sum(
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(i, w)| w * f(i)),
        )
    }

    pub fn sampler(&self) -> IndexSampler {
        IndexSampler::new(&self.weights)
    }
}

/// Half the l1 distance.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Inverse-CDF sampler over the support of a weight vector.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    support: Vec<usize>,
    cdf: Vec<f64>,
}

impl IndexSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut support = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                support.push(i);
                cdf.push(acc);
            }
        }
        assert!(!support.is_empty(), "sampler over an empty support");
        Self { support, cdf }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform() * self.cdf[self.cdf.len() - 1];
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        self.support[k]
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
}
