//! Distances between integer laws, the second-difference smoothness
//! functional, one-sample normality diagnostics and small regression helpers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{math, theory, Error, Result};

pub use crate::math::{normal_cdf, normal_quantile};

/// Tolerance on the total mass of a [`Pmf`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Number of standard deviations kept on each side by
/// [`Pmf::discretized_normal`].
pub const NORMAL_SUPPORT_SDS: f64 = 12.0;

/// A probability mass function on the integers `offset, offset + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    support_offset: i64,
    probabilities: Vec<f64>,
}

impl Pmf {
    pub fn new(support_offset: i64, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidArgument("empty pmf".into()));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument("pmf entries must be finite and nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("pmf sums to {total}")));
        }
        Ok(Pmf { support_offset, probabilities })
    }

    pub fn point_mass(k: i64) -> Self {
        Pmf { support_offset: k, probabilities: vec![1.0] }
    }

    /// Empirical law of integer samples by exact binning.
    pub fn from_samples(samples: &[i64]) -> Result<Self> {
        let (Some(&lo), Some(&hi)) = (samples.iter().min(), samples.iter().max()) else {
            return Err(Error::InvalidArgument("no samples".into()));
        };
        let mut counts = vec![0u64; (hi - lo) as usize + 1];
        for &x in samples {
            counts[(x - lo) as usize] += 1;
        }
        let n = samples.len() as f64;
        Ok(Pmf {
            support_offset: lo,
            probabilities: counts.into_iter().map(|c| c as f64 / n).collect(),
        })
    }

    /// `Binomial(trials, p)` evaluated through log-gamma.
    pub fn binomial(trials: u64, p: f64) -> Self {
        if p <= 0.0 {
            return Pmf::point_mass(0);
        }
        if p >= 1.0 {
            return Pmf::point_mass(trials as i64);
        }
        let nf = trials as f64;
        let (lp, lq) = (math::ln(p), math::ln(1.0 - p));
        let ln_n = math::lgamma(nf + 1.0);
        let probabilities = (0..=trials)
            .map(|k| {
                let kf = k as f64;
                math::exp(ln_n - math::lgamma(kf + 1.0) - math::lgamma(nf - kf + 1.0) + kf * lp + (nf - kf) * lq)
            })
            .collect();
        Pmf { support_offset: 0, probabilities }
    }

    /// The discretized normal restricted to `μ ± 12σ`; the discarded mass is
    /// below `1e-32`.
    pub fn discretized_normal(mu: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !mu.is_finite() || !sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite mu and sigma2 > 0, got ({mu}, {sigma2})")));
        }
        let sd = math::sqrt(sigma2);
        let lo = math::floor(mu - NORMAL_SUPPORT_SDS * sd) as i64;
        let hi = math::ceil(mu + NORMAL_SUPPORT_SDS * sd) as i64;
        let probabilities = (lo..=hi).map(|k| theory::discretized_normal_pmf(mu, sigma2, k)).collect();
        Ok(Pmf { support_offset: lo, probabilities })
    }

    pub fn support_offset(&self) -> i64 {
        self.support_offset
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn min(&self) -> i64 {
        self.support_offset
    }

    pub fn max(&self) -> i64 {
        self.support_offset + self.probabilities.len() as i64 - 1
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k < self.min() || k > self.max() {
            0.0
        } else {
            self.probabilities[(k - self.support_offset) as usize]
        }
    }

    pub fn cdf(&self, k: i64) -> f64 {
        if k < self.min() {
            return 0.0;
        }
        let upto = ((k - self.support_offset) as usize).min(self.probabilities.len() - 1);
        self.probabilities[..=upto].iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * (self.support_offset + i as i64) as f64)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (self.support_offset + i as i64) as f64 - m;
                p * d * d
            })
            .sum()
    }

    /// Same law moved by `shift`.
    pub fn translated(&self, shift: i64) -> Self {
        Pmf { support_offset: self.support_offset + shift, probabilities: self.probabilities.clone() }
    }
}

fn joint_range(a: &Pmf, b: &Pmf) -> core::ops::RangeInclusive<i64> {
    a.min().min(b.min())..=a.max().max(b.max())
}

/// `sup_k |F_a(k) - F_b(k)|`. Both cdfs are step functions jumping only at
/// integers, so integer breakpoints suffice.
pub fn kolmogorov_distance(a: &Pmf, b: &Pmf) -> f64 {
    let (mut fa, mut fb, mut worst) = (0.0, 0.0, 0.0f64);
    for k in joint_range(a, b) {
        fa += a.pmf(k);
        fb += b.pmf(k);
        worst = worst.max((fa - fb).abs());
    }
    worst
}

/// `sup_k |P_a(k) - P_b(k)|`.
pub fn local_distance(a: &Pmf, b: &Pmf) -> f64 {
    joint_range(a, b).map(|k| (a.pmf(k) - b.pmf(k)).abs()).fold(0.0, f64::max)
}

/// `Σ_i |P(i+2) - 2P(i+1) + P(i)|` over all integers `i`.
pub fn smoothness_d(a: &Pmf) -> f64 {
    ((a.min() - 2)..=a.max())
        .map(|i| (a.pmf(i + 2) - 2.0 * a.pmf(i + 1) + a.pmf(i)).abs())
        .sum()
}

/// Both sides of `d_loc(U, V) ≤ c · sqrt(d_K(U, V) · (D(U) + D(V)))`,
/// without the constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl SmoothingBound {
    /// `lhs / rhs`, or 0 when both sides vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn smoothing_bound_check(u: &Pmf, v: &Pmf) -> SmoothingBound {
    SmoothingBound {
        lhs: local_distance(u, v),
        rhs: math::sqrt(kolmogorov_distance(u, v) * (smoothness_d(u) + smoothness_d(v))),
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

/// Diagnostics of standardized samples `(x - μ) / σ` against `N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedTests {
    pub samples: usize,
    /// One-sample Kolmogorov-Smirnov statistic.
    pub ks_statistic: f64,
    /// `mean_i |z_(i) - Φ⁻¹((i - ½) / n)|`.
    pub wasserstein: f64,
    pub mean: Estimate,
    pub variance: Estimate,
    pub skewness: Estimate,
}

/// Standard errors use the normal-theory formulas `s/√n`,
/// `s²·sqrt(2/(n-1))` and `sqrt(6/n)`.
pub fn standardized_sample_tests(samples: &[f64], mu: f64, sigma: f64) -> Result<StandardizedTests> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mu) / sigma).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let nf = n as f64;

    let mut ks = 0.0f64;
    let mut w = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        let f = math::normal_cdf(zi);
        ks = ks.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
        w += (zi - math::normal_quantile((i as f64 + 0.5) / nf)).abs();
    }

    let mean = z.iter().sum::<f64>() / nf;
    let (m2, m3) = z.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let variance = m2 / (nf - 1.0);
    let skewness = if m2 > 0.0 { (m3 / nf) / math::powi(math::sqrt(m2 / nf), 3) } else { 0.0 };

    Ok(StandardizedTests {
        samples: n,
        ks_statistic: ks,
        wasserstein: w / nf,
        mean: Estimate { value: mean, standard_error: math::sqrt(variance / nf) },
        variance: Estimate { value: variance, standard_error: variance * math::sqrt(2.0 / (nf - 1.0)) },
        skewness: Estimate { value: skewness, standard_error: math::sqrt(6.0 / nf) },
    })
}

/// Least-squares line through `(ln n, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// From the residual variance; 0 for a perfect fit.
    pub slope_standard_error: f64,
}

impl RateFit {
    /// `exp(intercept) · n^slope`.
    pub fn predict(&self, n: f64) -> f64 {
        math::exp(self.intercept + self.slope * math::ln(n))
    }
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument("rate fit needs at least 3 points".into()));
    }
    if pairs.iter().any(|&(n, e)| !(n > 0.0) || !(e > 0.0)) {
        return Err(Error::InvalidArgument("rate fit needs positive n and errors".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| math::ln(p.0)).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| math::ln(p.1)).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs at least two distinct n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| { let r = y - intercept - slope * x; r * r }).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        slope_standard_error: math::sqrt(ssr / (m - 2.0) / sxx),
    })
}

pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("need two samples of equal length >= 2".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("correlation undefined for a constant sample".into()));
    }
    Ok(sxy / math::sqrt(sxx * syy))
}

/// Batch-means summary of a correlated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    pub standard_error: f64,
    pub batch_size: usize,
    pub batches: usize,
}

/// Non-overlapping batches of size `floor(sqrt(len))`; a trailing partial
/// batch is dropped from the error estimate but kept in the mean.
pub fn batch_means(series: &[f64]) -> Result<BatchMeans> {
    if series.len() < 4 {
        return Err(Error::InvalidArgument("batch means need at least 4 values".into()));
    }
    let size = math::floor(math::sqrt(series.len() as f64)) as usize;
    let batches = series.len() / size;
    let means: Vec<f64> = series.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let b = batches as f64;
    let grand = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (b - 1.0);
    Ok(BatchMeans {
        mean: series.iter().sum::<f64>() / series.len() as f64,
        standard_error: math::sqrt(var / b),
        batch_size: size,
        batches,
    })
}

/// Dvoretzky-Kiefer-Wolfowitz band: `P(sup |F_n - F| > ε) ≤ α` for
/// `ε = sqrt(ln(2/α) / (2n))`.
pub fn dkw_epsilon(samples: usize, alpha: f64) -> f64 {
    math::sqrt(math::ln(2.0 / alpha) / (2.0 * samples as f64))
}
