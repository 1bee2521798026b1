//! Lower-bound SINR expressions for the two co-channel two-way links.
//!
//! Every bound places the served user at the edge of the serving UAV's main
//! lobe, the interfering UAV directly overhead, and a co-channel ground
//! interferer at the minimal user separation. Shadowing is taken at its mean.

use std::fmt;

use crate::channel::{rx_power_ground_to_ground, rx_power_ground_to_uav, rx_power_uav_to_ground, Shadowing};
use crate::error::{Error, Result};
use crate::params::System;

/// One of the two admissible UAV altitude levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Altitude {
    Low,
    High,
}

impl Altitude {
    pub fn meters(self, sys: &System) -> f64 {
        match self {
            Altitude::Low => sys.derived().h_low,
            Altitude::High => sys.derived().h_high,
        }
    }

    /// The altitude indicator t(h): 0 at the low level, 1 at the high level.
    pub fn indicator(self) -> f64 {
        match self {
            Altitude::Low => 0.0,
            Altitude::High => 1.0,
        }
    }

    /// Classify a numeric altitude via (h - H_l) / (H_h - H_l), which must be 0 or 1.
    pub fn from_meters(h: f64, sys: &System) -> Result<Self> {
        let d = sys.derived();
        let t = (h - d.h_low) / (d.h_high - d.h_low);
        if t.abs() < 1e-9 {
            Ok(Altitude::Low)
        } else if (t - 1.0).abs() < 1e-9 {
            Ok(Altitude::High)
        } else {
            Err(Error::NotAnAltitudeLevel(h))
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Altitude::Low => "H_l",
            Altitude::High => "H_h",
        }
    }
}

/// Relative spin r = p1 XOR p2 of the two links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelativeSpin {
    /// r = 0: both links transmit in the same direction in every slot.
    Aligned,
    /// r = 1: the links transmit in opposite directions.
    Opposite,
}

impl RelativeSpin {
    pub fn value(self) -> f64 {
        match self {
            RelativeSpin::Aligned => 0.0,
            RelativeSpin::Opposite => 1.0,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            RelativeSpin::Aligned => 0,
            RelativeSpin::Opposite => 1,
        }
    }
}

/// Slot ordering of a single two-way link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkSpin {
    /// p = 0: downlink in the first slot of a unit, uplink in the second.
    DownlinkFirst,
    /// p = 1: uplink first.
    UplinkFirst,
}

impl LinkSpin {
    fn bit(self) -> u8 {
        match self {
            LinkSpin::DownlinkFirst => 0,
            LinkSpin::UplinkFirst => 1,
        }
    }
}

/// Which UAV serves: link 1 is UAV1, link 2 is UAV2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    One,
    Two,
}

/// The decision variable: relative spin and the two UAV altitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub spin: RelativeSpin,
    pub h1: Altitude,
    pub h2: Altitude,
}

impl Configuration {
    /// Opposite directions, UAV2 high.
    pub const ETA1: Configuration = Configuration::new(RelativeSpin::Opposite, Altitude::Low, Altitude::High);
    /// Opposite directions, UAV1 high.
    pub const ETA2: Configuration = Configuration::new(RelativeSpin::Opposite, Altitude::High, Altitude::Low);
    /// Same direction, both low.
    pub const ETA3: Configuration = Configuration::new(RelativeSpin::Aligned, Altitude::Low, Altitude::Low);

    /// The three candidates searched by the optimizer.
    pub const CANDIDATES: [Configuration; 3] = [Self::ETA1, Self::ETA2, Self::ETA3];

    pub const fn new(spin: RelativeSpin, h1: Altitude, h2: Altitude) -> Self {
        Self { spin, h1, h2 }
    }

    pub fn from_link_spins(p1: LinkSpin, p2: LinkSpin, h1: Altitude, h2: Altitude) -> Self {
        let spin = if p1.bit() ^ p2.bit() == 0 {
            RelativeSpin::Aligned
        } else {
            RelativeSpin::Opposite
        };
        Self { spin, h1, h2 }
    }

    /// Per-link spins realising this configuration, with link 1 fixed at p1 = 0.
    pub fn link_spins(&self) -> (LinkSpin, LinkSpin) {
        let p2 = match self.spin {
            RelativeSpin::Aligned => LinkSpin::DownlinkFirst,
            RelativeSpin::Opposite => LinkSpin::UplinkFirst,
        };
        (LinkSpin::DownlinkFirst, p2)
    }

    /// All eight (r, h1, h2) tuples, in (r, h1, h2) lexicographic order.
    pub fn exhaustive() -> [Configuration; 8] {
        use Altitude::*;
        use RelativeSpin::*;
        let mut out = [Self::ETA3; 8];
        let mut i = 0;
        for spin in [Aligned, Opposite] {
            for h1 in [Low, High] {
                for h2 in [Low, High] {
                    out[i] = Self::new(spin, h1, h2);
                    i += 1;
                }
            }
        }
        out
    }

    /// Short name of a candidate configuration, if it is one.
    pub fn candidate_name(&self) -> Option<&'static str> {
        match *self {
            Self::ETA1 => Some("eta1"),
            Self::ETA2 => Some("eta2"),
            Self::ETA3 => Some("eta3"),
            _ => None,
        }
    }

    /// (serving altitude, other UAV's altitude) for `link`.
    pub fn roles(&self, link: Link) -> (Altitude, Altitude) {
        match link {
            Link::One => (self.h1, self.h2),
            Link::Two => (self.h2, self.h1),
        }
    }

    /// The same physical setup with the two cells relabelled.
    pub fn mirrored(&self) -> Self {
        Self::new(self.spin, self.h2, self.h1)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{r={}, h1={}, h2={}}}", self.spin.bit(), self.h1.symbol(), self.h2.symbol())
    }
}

fn p_dl(d: f64, sys: &System) -> f64 {
    rx_power_uav_to_ground(d, sys, &mut Shadowing::MeanDb)
}

fn p_ul(d: f64, sys: &System) -> f64 {
    rx_power_ground_to_uav(d, sys, &mut Shadowing::MeanDb)
}

fn p_gg(d: f64, sys: &System) -> f64 {
    rx_power_ground_to_ground(d, sys, &mut Shadowing::MeanDb)
}

/// Downlink bound, co-channel users in different cells. The other UAV
/// interferes only from the high altitude with aligned spins.
pub fn sinr_dl_diff(cfg: &Configuration, sys: &System, link: Link) -> f64 {
    let (serve, other) = cfg.roles(link);
    let r = cfg.spin.value();
    let signal = p_dl(sys.lobe_edge_distance(serve.meters(sys)), sys);
    let interference = r * p_gg(sys.derived().d_min, sys)
        + other.indicator() * (1.0 - r) * p_dl(other.meters(sys), sys);
    signal / (interference + sys.params().noise_power)
}

/// Uplink bound, co-channel users in different cells. The other cell's
/// user is heard only by a high UAV with aligned spins.
pub fn sinr_ul_diff(cfg: &Configuration, sys: &System, link: Link) -> f64 {
    let (serve, _) = cfg.roles(link);
    let r = cfg.spin.value();
    let h = serve.meters(sys);
    let signal = p_ul(sys.lobe_edge_distance(h), sys);
    let interference = serve.indicator() * (1.0 - r) * p_ul(h, sys);
    signal / (interference + sys.params().noise_power)
}

/// Downlink bound, both co-channel users in the same cell.
pub fn sinr_dl_same(cfg: &Configuration, sys: &System, link: Link) -> f64 {
    let (serve, other) = cfg.roles(link);
    let r = cfg.spin.value();
    let signal = p_dl(sys.lobe_edge_distance(serve.meters(sys)), sys);
    let interference = r * p_gg(sys.derived().d_min, sys) + (1.0 - r) * p_dl(other.meters(sys), sys);
    signal / (interference + sys.params().noise_power)
}

/// Uplink bound, both co-channel users in the same cell.
pub fn sinr_ul_same(cfg: &Configuration, sys: &System, link: Link) -> f64 {
    let (serve, _) = cfg.roles(link);
    let r = cfg.spin.value();
    let h = serve.meters(sys);
    let signal = p_ul(sys.lobe_edge_distance(h), sys);
    let interference = (1.0 - r) * p_ul(h, sys);
    signal / (interference + sys.params().noise_power)
}

/// Interference-free (downlink, uplink) SNR bounds for a UAV at `h`.
pub fn snr_individual(h: Altitude, sys: &System) -> (f64, f64) {
    let d = sys.lobe_edge_distance(h.meters(sys));
    let noise = sys.params().noise_power;
    (p_dl(d, sys) / noise, p_ul(d, sys) / noise)
}
