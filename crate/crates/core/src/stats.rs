//! Summary statistics and the chi-square tests used to validate exit laws.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); zero for `n < 2`.
    pub std: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { n, mean, std }
    }

    pub fn std_error(&self) -> f64 {
        self.std / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl TestResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Upper tail of the chi-square law.
pub fn chi_square_sf(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Pearson goodness of fit of observed counts to category probabilities.
pub fn goodness_of_fit(observed: &[u64], probabilities: &[f64]) -> TestResult {
    assert_eq!(observed.len(), probabilities.len());
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probabilities) {
        let e = n as f64 * p;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    let df = cells.saturating_sub(1);
    TestResult {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Bin edges `1 = e_0 < e_1 < ... < e_B = inf` splitting Geometric(p) on
/// `{1, 2, ...}` into `bins` cells of roughly equal probability. Returns the
/// finite edges `e_1..e_{B-1}` and the exact cell probabilities.
pub fn geometric_bins(p: f64, bins: usize) -> (Vec<u64>, Vec<f64>) {
    let q = 1.0 - p;
    let mut edges: Vec<u64> = Vec::new();
    for m in 1..bins {
        let target = 1.0 - m as f64 / bins as f64;
        // smallest e with P(tau >= e) = q^(e-1) <= target
        let e = 1 + (target.ln() / q.ln()).ceil().max(0.0) as u64;
        if edges.last().is_none_or(|&l| e > l) && e > 1 {
            edges.push(e);
        }
    }
    let tail = |e: u64| q.powf((e - 1) as f64);
    let mut probs = Vec::with_capacity(edges.len() + 1);
    let mut lo = 1u64;
    for &e in &edges {
        probs.push(tail(lo) - tail(e));
        lo = e;
    }
    probs.push(tail(lo));
    (edges, probs)
}

/// Cell of `value` given the finite edges from [`geometric_bins`].
pub fn bin_of(value: u64, edges: &[u64]) -> usize {
    edges.partition_point(|&e| e <= value)
}

/// Goodness of fit of exit times to Geometric(p) on `{1, 2, ...}`.
pub fn geometric_gof(samples: &[u64], p: f64, bins: usize) -> TestResult {
    let (edges, probs) = geometric_bins(p, bins);
    let mut counts = vec![0u64; probs.len()];
    for &t in samples {
        counts[bin_of(t, &edges)] += 1;
    }
    goodness_of_fit(&counts, &probs)
}

/// Pearson test of independence on a contingency table. Empty rows and
/// columns are dropped before counting degrees of freedom.
pub fn independence_test(table: &[Vec<u64>]) -> TestResult {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let n_cols = rows.first().map_or(0, |r| r.len());
    let col_tot: Vec<u64> = (0..n_cols)
        .map(|j| rows.iter().map(|r| r[j]).sum())
        .collect();
    let cols: Vec<usize> = (0..n_cols).filter(|&j| col_tot[j] > 0).collect();
    let total: u64 = col_tot.iter().sum();
    if rows.len() < 2 || cols.len() < 2 {
        return TestResult {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
        };
    }
    let mut stat = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &j in &cols {
            let e = rt as f64 * col_tot[j] as f64 / total as f64;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let df = (rows.len() - 1) * (cols.len() - 1);
    TestResult {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Two-sample chi-square homogeneity test on category counts.
pub fn homogeneity_test(a: &[u64], b: &[u64]) -> TestResult {
    assert_eq!(a.len(), b.len());
    independence_test(&[a.to_vec(), b.to_vec()])
}

/// Lag-one sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let s = Summary::of(xs);
    let var: f64 = xs.iter().map(|x| (x - s.mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    xs.windows(2)
        .map(|w| (w[0] - s.mean) * (w[1] - s.mean))
        .sum::<f64>()
        / var
}

/// Empirical law of indices in `0..n`.
pub fn empirical(indices: impl IntoIterator<Item = usize>, n: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    let mut total = 0.0;
    for i in indices {
        counts[i] += 1.0;
        total += 1.0;
    }
    counts.iter_mut().for_each(|c| *c /= total);
    counts
}
