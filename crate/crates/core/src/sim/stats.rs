//! Order-stable accumulators and small interval estimators.

use serde::Serialize;

use crate::{Error, Result};

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "[1, inf)"));
    }
    if successes > trials {
        return Err(Error::domain("successes", successes as f64, "[0, trials]"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

/// Sample moments of a scalar, from compensated power sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentSums {
    count: u64,
    powers: [CompensatedSum; 4],
}

impl MomentSums {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let mut p = x;
        for s in &mut self.powers {
            s.add(p);
            p *= x;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for (a, b) in self.powers.iter_mut().zip(&other.powers) {
            a.merge(b);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn raw(&self, k: usize) -> f64 {
        self.powers[k - 1].value() / self.count as f64
    }

    pub fn mean(&self) -> f64 {
        self.raw(1)
    }

    fn central(&self) -> (f64, f64, f64) {
        let mu = self.mean();
        let (r2, r3, r4) = (self.raw(2), self.raw(3), self.raw(4));
        // Cancellation can push a zero variance slightly negative.
        let m2 = (r2 - mu * mu).max(0.0);
        let m3 = r3 - 3.0 * mu * r2 + 2.0 * mu.powi(3);
        let m4 = r4 - 4.0 * mu * r3 + 6.0 * mu * mu * r2 - 3.0 * mu.powi(4);
        (m2, m3, m4)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        self.central().0 * n / (n - 1.0)
    }

    /// Standard error of the sample mean.
    pub fn standard_error(&self) -> f64 {
        (self.central().0 / self.count as f64).sqrt()
    }

    pub fn skewness(&self) -> f64 {
        let (m2, m3, _) = self.central();
        m3 / m2.powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let (m2, _, m4) = self.central();
        m4 / (m2 * m2) - 3.0
    }
}

/// Running sums for the sample correlation matrix of a fixed-length vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSums {
    count: u64,
    dim: usize,
    first: Vec<CompensatedSum>,
    // Row-major upper triangle including the diagonal.
    second: Vec<CompensatedSum>,
}

impl CorrelationSums {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            dim,
            first: vec![CompensatedSum::default(); dim],
            second: vec![CompensatedSum::default(); dim * (dim + 1) / 2],
        }
    }

    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.dim, "vector length");
        self.count += 1;
        let mut k = 0;
        for i in 0..self.dim {
            self.first[i].add(v[i]);
            for j in i..self.dim {
                self.second[k].add(v[i] * v[j]);
                k += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            a.merge(b);
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            a.merge(b);
        }
    }

    /// Largest `|corr(v_i, v_j)|` over `i != j`; `None` below two components
    /// or two samples.
    pub fn max_abs_offdiag(&self) -> Option<f64> {
        if self.dim < 2 || self.count < 2 {
            return None;
        }
        let n = self.count as f64;
        let mean: Vec<f64> = self.first.iter().map(|s| s.value() / n).collect();
        let index = |i: usize, j: usize| i * self.dim - i * (i + 1) / 2 + j;
        let cov = |i: usize, j: usize| self.second[index(i, j)].value() / n - mean[i] * mean[j];
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let r = cov(i, j) / (cov(i, i) * cov(j, j)).sqrt();
                worst = worst.max(r.abs());
            }
        }
        Some(worst)
    }
}

/// Summary diagnostics over a set of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest off-diagonal sample correlation of the feedback values `Y_1..Y_n`.
    pub max_abs_offdiag_corr: Option<f64>,
    /// Skewness of `Theta_n - a theta(m)`.
    pub theta_skewness: f64,
    pub theta_excess_kurtosis: f64,
    /// Mean of `X_i^2` for rounds `0..=n`.
    pub per_round_mean_power: Vec<f64>,
}
