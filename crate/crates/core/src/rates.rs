//! Two-way sum-rates in bits/s/Hz (band normalised to 1 Hz).

use crate::params::System;
use crate::sinr::{
    sinr_dl_diff, sinr_dl_same, sinr_ul_diff, sinr_ul_same, snr_individual, Altitude, Configuration, Link,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// Co-channel pair in different cells.
    pub cochannel_diff: f64,
    /// Co-channel pair in the same cell.
    pub cochannel_same: f64,
    /// Individually served user of UAV1.
    pub individual_1: f64,
    /// Individually served user of UAV2.
    pub individual_2: f64,
}

impl RateSet {
    pub fn new(cfg: &Configuration, sys: &System) -> Self {
        Self {
            cochannel_diff: rate_cochannel_diff(cfg, sys),
            cochannel_same: rate_cochannel_same(cfg, sys),
            individual_1: rate_individual(cfg.h1, sys),
            individual_2: rate_individual(cfg.h2, sys),
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn rate_cochannel_diff(cfg: &Configuration, sys: &System) -> f64 {
    [Link::One, Link::Two]
        .iter()
        .map(|&l| log2_1p(sinr_dl_diff(cfg, sys, l)) + log2_1p(sinr_ul_diff(cfg, sys, l)))
        .sum()
}

pub fn rate_cochannel_same(cfg: &Configuration, sys: &System) -> f64 {
    [Link::One, Link::Two]
        .iter()
        .map(|&l| log2_1p(sinr_dl_same(cfg, sys, l)) + log2_1p(sinr_ul_same(cfg, sys, l)))
        .sum()
}

pub fn rate_individual(h: Altitude, sys: &System) -> f64 {
    let (dl, ul) = snr_individual(h, sys);
    log2_1p(dl) + log2_1p(ul)
}
