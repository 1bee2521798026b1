//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls the library's probability code.
#![allow(dead_code)]

use uav_twoway::pairing::{pair_counts, AccountingMode};
use uav_twoway::rates::RateSet;
use uav_twoway::{Configuration, RawConfig, System};

pub fn system_with_users(n: u32) -> System {
    let mut raw = RawConfig::defaults();
    raw.set("n_users", f64::from(n));
    System::from_raw(&raw).expect("valid parameters")
}

/// Poisson pmf for 0..=m_max by recurrence.
fn poisson_row(lambda: f64, m_max: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(m_max + 1);
    let mut p = (-lambda).exp();
    row.push(p);
    for m in 1..=m_max {
        p *= lambda / m as f64;
        row.push(p);
    }
    row
}

/// P(X1 - X2 = k) by direct convolution of two Poisson laws.
pub fn skellam_by_convolution(k: i64, lambda1: f64, lambda2: f64) -> f64 {
    const M: usize = 400;
    let p1 = poisson_row(lambda1, M + 200);
    let p2 = poisson_row(lambda2, M + 200);
    (0..=M as i64)
        .filter(|&m| m + k >= 0)
        .map(|m| p1[(m + k) as usize] * p2[m as usize])
        .sum()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Frame throughput for one (K1, K2) from the pair counts and the rates.
pub fn frame_throughput(k1: u32, k2: u32, cfg: &Configuration, sys: &System, mode: AccountingMode) -> f64 {
    let k = i64::from(k1) - i64::from(k2);
    let c = pair_counts(k, k2, cfg.h1, cfg.h2, mode).expect("candidate configuration");
    let rates = RateSet::new(cfg, sys);
    let individual = if k > 0 { rates.individual_1 } else { rates.individual_2 };
    let units = c.a_d + c.a_s + c.b;
    if units == 0 {
        return 0.0;
    }
    (f64::from(c.a_d) * rates.cochannel_diff + f64::from(c.a_s) * rates.cochannel_same + f64::from(c.b) * individual)
        / (2.0 * f64::from(units))
}

/// Average throughput as a plain double sum over (K1, K2) in [1, N]^2.
/// Each cell carries the imbalance probability times its binomial share
/// of the diagonal K1 - K2 = k.
pub fn brute_force_throughput(
    cfg: &Configuration,
    lambda1: f64,
    lambda2: f64,
    sys: &System,
    mode: AccountingMode,
) -> f64 {
    let n = sys.n_users();
    let mut total = 0.0;
    for k1 in 1..=n {
        for k2 in 1..=n {
            let k = i64::from(k1) - i64::from(k2);
            let diagonal: f64 = (1..=n)
                .flat_map(|a| (1..=n).map(move |b| (a, b)))
                .filter(|&(a, b)| i64::from(a) - i64::from(b) == k)
                .map(|(a, b)| binomial(n, a) * binomial(n, b))
                .sum();
            let share = binomial(n, k1) * binomial(n, k2) / diagonal;
            total += skellam_by_convolution(k, lambda1, lambda2) * share * frame_throughput(k1, k2, cfg, sys, mode);
        }
    }
    total
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
