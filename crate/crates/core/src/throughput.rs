//! Average throughput over random per-cell activity, and the choice of
//! spin and altitudes that maximises it.
//!
//! Cell loads are K1 ~ Pois(lambda1), K2 ~ Pois(lambda2). The imbalance
//! k = K1 - K2 is Skellam distributed. Given k, the admissible K2 values
//! (both loads in 1..=N) are weighted by C(N, K2 + k) C(N, K2), and each
//! (k, K2) contributes the frame throughput of the corresponding schedule.

use crate::error::{Error, Result};
use crate::pairing::{counts_with_helper, pair_counts, partner_helps, AccountingMode, PairCounts};
use crate::params::System;
use crate::rates::RateSet;
use crate::sinr::Configuration;
use crate::special::{ln_bessel_i, ln_binomial_row};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadDistribution {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LoadDistribution {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for l in [lambda1, lambda2] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::NonPositiveRate(l));
            }
        }
        Ok(Self { lambda1, lambda2 })
    }

    pub fn mirrored(&self) -> Self {
        Self { lambda1: self.lambda2, lambda2: self.lambda1 }
    }
}

/// Contribution of one load difference `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTerm {
    pub k: i64,
    /// P(K1 - K2 = k).
    pub weight: f64,
    /// Binomially weighted average frame throughput given k (0 if no K2 is admissible).
    pub conditional: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputBreakdown {
    pub config: Configuration,
    pub accounting: AccountingMode,
    /// bits/s/Hz
    pub total: f64,
    /// Terms for k = -N..=N in ascending order.
    pub per_k: Vec<KTerm>,
}

/// P(K1 - K2 = k) for independent Poisson loads.
pub fn skellam_pmf(k: i64, lambda1: f64, lambda2: f64) -> Result<f64> {
    for l in [lambda1, lambda2] {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::NonPositiveRate(l));
        }
    }
    let z = 2.0 * (lambda1 * lambda2).sqrt();
    let order = u32::try_from(k.unsigned_abs()).map_err(|_| Error::Numeric(format!("order {k} too large")))?;
    // (k/2)(ln l1 - ln l2) is exactly antisymmetric under (k, l1, l2) -> (-k, l2, l1)
    let ln_p = -(lambda1 + lambda2) + 0.5 * k as f64 * (lambda1.ln() - lambda2.ln()) + ln_bessel_i(order, z);
    Ok(ln_p.exp())
}

/// Normalised activation weights C(N, K2 + k) C(N, K2) over the admissible
/// K2 (with K2 and K2 + k both in 1..=N), in ascending K2.
pub fn diagonal_weights(n_users: u32, k: i64) -> Vec<(u32, f64)> {
    diagonal_weights_with_row(&ln_binomial_row(n_users), k)
}

fn admissible_k2(n: i64, k: i64) -> std::ops::RangeInclusive<i64> {
    (1i64).max(1 - k)..=n.min(n - k)
}

fn diagonal_weights_with_row(ln_row: &[f64], k: i64) -> Vec<(u32, f64)> {
    let n = ln_row.len() as i64 - 1;
    let logs: Vec<(u32, f64)> = admissible_k2(n, k)
        .map(|k2| (k2 as u32, ln_row[(k2 + k) as usize] + ln_row[k2 as usize]))
        .collect();
    let Some(max) = logs.iter().map(|&(_, l)| l).reduce(f64::max) else {
        return Vec::new();
    };
    let unnorm: Vec<(u32, f64)> = logs.iter().map(|&(k2, l)| (k2, (l - max).exp())).collect();
    let norm: f64 = unnorm.iter().map(|&(_, w)| w).sum();
    unnorm.into_iter().map(|(k2, w)| (k2, w / norm)).collect()
}

/// Rate of an individually served user: its own cell's UAV serves it.
fn individual_rate(k: i64, rates: &RateSet) -> f64 {
    if k > 0 {
        rates.individual_1
    } else {
        rates.individual_2
    }
}

fn frame_throughput(counts: PairCounts, individual: f64, rates: &RateSet) -> f64 {
    let units = counts.units();
    if units == 0 {
        return 0.0;
    }
    let bits = f64::from(counts.a_d) * rates.cochannel_diff
        + f64::from(counts.a_s) * rates.cochannel_same
        + f64::from(counts.b) * individual;
    bits / (2.0 * f64::from(units))
}

/// Counts for any of the eight (r, h1, h2) tuples. With both UAVs high the
/// lighter cell's UAV helps in either direction.
fn counts_any(k: i64, k2: u32, cfg: &Configuration, mode: AccountingMode) -> PairCounts {
    counts_with_helper(k, k2, partner_helps(k, cfg.h1, cfg.h2), mode)
}

/// Frame throughput for given (k, K2): total two-way bits over slots used.
/// An empty frame yields 0.
pub fn conditional_throughput(
    k: i64,
    k2: u32,
    cfg: &Configuration,
    sys: &System,
    mode: AccountingMode,
) -> Result<f64> {
    let counts = pair_counts(k, k2, cfg.h1, cfg.h2, mode)?;
    let rates = RateSet::new(cfg, sys);
    Ok(frame_throughput(counts, individual_rate(k, &rates), &rates))
}

/// Average throughput of `cfg`. All eight (r, h1, h2) tuples are accepted.
pub fn average_throughput(
    cfg: &Configuration,
    loads: &LoadDistribution,
    sys: &System,
    mode: AccountingMode,
) -> Result<ThroughputBreakdown> {
    let n = i64::from(sys.n_users());
    let rates = RateSet::new(cfg, sys);
    let ln_row = ln_binomial_row(sys.n_users());

    let mut per_k = Vec::with_capacity(2 * n as usize + 1);
    for k in -n..=n {
        let weight = skellam_pmf(k, loads.lambda1, loads.lambda2)?;
        let individual = individual_rate(k, &rates);
        let conditional = diagonal_weights_with_row(&ln_row, k)
            .into_iter()
            .map(|(k2, w)| w * frame_throughput(counts_any(k, k2, cfg, mode), individual, &rates))
            .sum();
        per_k.push(KTerm { k, weight, conditional });
    }

    // Sum k = 0 first, then the (j, -j) pairs, so relabelling the cells
    // reproduces the total bit for bit.
    let centre = n as usize;
    let contribution = |t: &KTerm| t.weight * t.conditional;
    let mut total = contribution(&per_k[centre]);
    for j in 1..=n as usize {
        total += contribution(&per_k[centre + j]) + contribution(&per_k[centre - j]);
    }
    if !total.is_finite() {
        return Err(Error::Numeric(format!("throughput of {cfg} is {total}")));
    }
    Ok(ThroughputBreakdown { config: *cfg, accounting: mode, total, per_k })
}

/// Throughput of every configuration in `configs`, in order.
pub fn evaluate_all(
    configs: &[Configuration],
    loads: &LoadDistribution,
    sys: &System,
    mode: AccountingMode,
) -> Result<Vec<ThroughputBreakdown>> {
    configs.iter().map(|c| average_throughput(c, loads, sys, mode)).collect()
}

/// Tie-break order of the candidates: eta3, then eta1, then eta2.
pub const PREFERENCE: [Configuration; 3] = [Configuration::ETA3, Configuration::ETA1, Configuration::ETA2];

/// Best of the three candidate configurations. Ties go to the earlier entry
/// of [`PREFERENCE`].
pub fn optimal_configuration(
    loads: &LoadDistribution,
    sys: &System,
    mode: AccountingMode,
) -> Result<(Configuration, ThroughputBreakdown)> {
    let mut best: Option<ThroughputBreakdown> = None;
    for cfg in PREFERENCE {
        let b = average_throughput(&cfg, loads, sys, mode)?;
        if best.as_ref().is_none_or(|cur| b.total > cur.total) {
            best = Some(b);
        }
    }
    let best = best.expect("non-empty candidate set");
    Ok((best.config, best))
}
