//! Estimators and tests used by the experiments.

use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Minimum replicate count accepted by [`mc_estimate`] and friends.
pub const MIN_REPLICATES: usize = 100;

/// Minimum sample size per group for [`ks_two_sample`].
pub const MIN_KS_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub p_hat: f64,
    pub n: usize,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // clamp so that lo <= p <= hi survives rounding at k = 0 and k = n
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

impl EstimateWithCI {
    pub fn from_count(k: usize, n: usize, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(k, n, Z95);
        Self {
            p_hat: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            n,
            ci_lo,
            ci_hi,
            seed,
        }
    }

    /// Binomial standard deviation of the estimator under the target `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n as f64).sqrt()
    }

    /// `|p_hat - p| <= k σ(p)`.
    pub fn within(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * self.sigma_at(p)
    }
}

/// Runs `event` on `n` replicates and returns the Wilson estimate.
pub fn mc_estimate<F>(n: usize, seed: u64, tag: u64, event: F) -> Result<EstimateWithCI>
where
    F: Fn(&mut stit_core::RandomStream) -> Result<bool> + Sync,
{
    if n < MIN_REPLICATES {
        return Err(HarnessError::InsufficientSamples {
            needed: MIN_REPLICATES,
            got: n,
        });
    }
    let hits = crate::runner::replicate(n, seed, tag, |_, rng| event(rng))?;
    Ok(EstimateWithCI::from_count(hits.iter().filter(|b| **b).count(), n, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test. Ties are handled by stepping both
/// empirical distribution functions past each distinct value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KSResult> {
    let got = xs.len().min(ys.len());
    if got < MIN_KS_SAMPLES {
        return Err(HarnessError::InsufficientSamples {
            needed: MIN_KS_SAMPLES,
            got,
        });
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n1 && a[i] <= v {
            i += 1;
        }
        while j < n2 && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(KSResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n1,
        n2,
    })
}

/// Covariance gap `P̂(D∩E) - P̂(D)P̂(E)` from paired indicators, with the
/// delta-method standard error of the sample covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovGap {
    pub n: usize,
    pub p_d: f64,
    pub p_e: f64,
    pub p_de: f64,
    pub gap: f64,
    pub sigma: f64,
}

pub fn cov_gap(pairs: &[(bool, bool)]) -> CovGap {
    let n = pairs.len();
    if n == 0 {
        return CovGap {
            n,
            p_d: f64::NAN,
            p_e: f64::NAN,
            p_de: f64::NAN,
            gap: f64::NAN,
            sigma: f64::NAN,
        };
    }
    let nf = n as f64;
    let count = |f: &dyn Fn(&(bool, bool)) -> bool| pairs.iter().filter(|p| f(p)).count() as f64 / nf;
    let p_d = count(&|p| p.0);
    let p_e = count(&|p| p.1);
    let p_de = count(&|p| p.0 && p.1);
    let gap = p_de - p_d * p_e;
    let m2 = pairs
        .iter()
        .map(|&(x, y)| {
            let v = (x as u8 as f64 - p_d) * (y as u8 as f64 - p_e);
            v * v
        })
        .sum::<f64>()
        / nf;
    let sigma = ((m2 - gap * gap).max(0.0) / nf).sqrt();
    CovGap {
        n,
        p_d,
        p_e,
        p_de,
        gap,
        sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stit_core::RandomStream;

    #[test]
    fn wilson_edges() {
        let e = EstimateWithCI::from_count(100, 100, 0);
        assert_eq!((e.p_hat, e.ci_hi), (1.0, 1.0));
        assert!(e.ci_lo < 1.0 && e.ci_lo > 0.95);
        let e = EstimateWithCI::from_count(0, 100, 0);
        assert_eq!((e.p_hat, e.ci_lo), (0.0, 0.0));
        // textbook value: 50/100 gives (0.4038, 0.5962)
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
    }

    #[test]
    fn constant_event() {
        let e = mc_estimate(500, 1, 0, |_| Ok(true)).unwrap();
        assert_eq!((e.p_hat, e.ci_hi), (1.0, 1.0));
        assert!(matches!(
            mc_estimate(99, 1, 0, |_| Ok(true)),
            Err(HarnessError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn fair_coin_is_reproducible() {
        let coin = |r: &mut RandomStream| Ok(r.bernoulli(0.5));
        let a = mc_estimate(10_000, 42, 3, coin).unwrap();
        let b = mc_estimate(10_000, 42, 3, coin).unwrap();
        assert_eq!(a, b);
        assert!(a.p_hat > 0.48 && a.p_hat < 0.52);
    }

    #[test]
    fn wilson_coverage_calibration() {
        let p = 0.3;
        let covered = (0..100u64)
            .filter(|&s| {
                let e = mc_estimate(1000, s, 7, |r| Ok(r.bernoulli(p))).unwrap();
                e.ci_lo <= p && p <= e.ci_hi
            })
            .count();
        assert!(covered >= 93, "coverage {covered}/100");
    }

    #[test]
    fn kolmogorov_q_reference_values() {
        // tabulated: Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.36) - 0.04945).abs() < 2e-4);
        assert!((kolmogorov_q(1.63) - 0.00981).abs() < 2e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(5.0) < 1e-20);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let ys: Vec<f64> = xs.iter().map(|x| x + 1000.0).collect();
        let r = ks_two_sample(&xs, &ys).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-6);
        assert!(matches!(
            ks_two_sample(&xs[..49], &ys),
            Err(HarnessError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn ks_handles_ties() {
        // identical discrete laws must not look different because of ties
        let xs: Vec<f64> = (0..1000).map(|i| (i % 5) as f64).collect();
        let ys: Vec<f64> = (0..700).map(|i| (i % 5) as f64).collect();
        assert!(ks_two_sample(&xs, &ys).unwrap().statistic < 1e-12);
    }

    #[test]
    fn ks_level_calibration() {
        let sample = |seed: u64, tag: u64| -> Vec<f64> {
            let mut r = RandomStream::derived(seed, tag, 0);
            (0..5000).map(|_| r.exponential(1.0)).collect()
        };
        let ok = (0..100u64)
            .filter(|&s| ks_two_sample(&sample(s, 1), &sample(s, 2)).unwrap().p_value > 0.01)
            .count();
        assert!(ok >= 98, "{ok}/100");
    }

    #[test]
    fn cov_gap_of_identical_and_independent_events() {
        let mut r = RandomStream::new(5, 0);
        let same: Vec<(bool, bool)> = (0..20_000)
            .map(|_| {
                let b = r.bernoulli(0.4);
                (b, b)
            })
            .collect();
        let g = cov_gap(&same);
        assert!((g.gap - g.p_d * (1.0 - g.p_d)).abs() < 1e-12);
        let indep: Vec<(bool, bool)> = (0..20_000).map(|_| (r.bernoulli(0.4), r.bernoulli(0.7))).collect();
        let g = cov_gap(&indep);
        assert!(g.gap.abs() <= 4.0 * g.sigma, "{g:?}");
        // independent case: σ² ≈ p_d(1-p_d)p_e(1-p_e)/n
        let expect = (0.24f64 * 0.21 / 20_000.0).sqrt();
        assert!((g.sigma / expect - 1.0).abs() < 0.05);
    }
}
