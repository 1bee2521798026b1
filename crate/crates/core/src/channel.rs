//! Antenna gain and large-scale received power for the two link types.
//!
//! UAV-ground links are line-of-sight, ground-ground links are
//! non-line-of-sight. Shadowing divides the received power by a factor whose
//! dB value is normally distributed.

use rand::RngCore;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::params::{db_to_linear, System};

/// Relative slack on the main-lobe edge so that distances computed as
/// `h / cos(phi_b)` through another route still land inside.
const LOBE_EDGE_RTOL: f64 = 1e-12;

/// How the shadowing loss of a link is obtained.
pub enum Shadowing<'a> {
    /// Deterministic: loss fixed at the mean dB value.
    MeanDb,
    /// One Normal(mu, sigma^2) dB draw per evaluated link.
    Sampled(&'a mut dyn RngCore),
}

impl Shadowing<'_> {
    /// Linear loss factor for a link with the given dB statistics.
    pub fn loss(&mut self, mean_db: f64, std_db: f64) -> f64 {
        match self {
            Shadowing::MeanDb => db_to_linear(mean_db),
            Shadowing::Sampled(rng) => {
                let db = if std_db > 0.0 {
                    Normal::new(mean_db, std_db)
                        .expect("validated shadowing statistics")
                        .sample(rng)
                } else {
                    mean_db
                };
                db_to_linear(db)
            }
        }
    }
}

/// Directional UAV antenna gain seen by a ground node at `distance` from a
/// UAV flying at `altitude`: `g0 / phi_b^2` inside the main lobe, zero outside.
pub fn antenna_gain(distance: f64, altitude: f64, sys: &System) -> Result<f64> {
    if distance < altitude || altitude <= 0.0 {
        return Err(Error::Geometry { distance, altitude });
    }
    let edge = sys.lobe_edge_distance(altitude);
    if distance <= edge * (1.0 + LOBE_EDGE_RTOL) {
        Ok(main_lobe_gain(sys))
    } else {
        Ok(0.0)
    }
}

pub fn main_lobe_gain(sys: &System) -> f64 {
    let phi = sys.params().phi_b;
    sys.derived().g0 / (phi * phi)
}

fn path_gain(sys: &System, d: f64, exponent: f64) -> f64 {
    (sys.derived().k_freespace * d).powf(-exponent)
}

/// Power received by a ground user from a UAV at distance `d` (inside the
/// UAV's main lobe).
pub fn rx_power_uav_to_ground(d: f64, sys: &System, shadowing: &mut Shadowing<'_>) -> f64 {
    debug_assert!(d > 0.0);
    let p = sys.params();
    let psi = shadowing.loss(p.mu_los, p.sigma_los);
    p.p_u * main_lobe_gain(sys) / psi * path_gain(sys, d, p.n_los)
}

/// Power received by a UAV from a ground user at distance `d`. The ground
/// antenna contributes the flat factor `g0`.
pub fn rx_power_ground_to_uav(d: f64, sys: &System, shadowing: &mut Shadowing<'_>) -> f64 {
    debug_assert!(d > 0.0);
    let p = sys.params();
    let psi = shadowing.loss(p.mu_los, p.sigma_los);
    p.p_g * sys.derived().g0 / psi * path_gain(sys, d, p.n_los)
}

/// Power received by a ground user from another ground user at distance `d`.
pub fn rx_power_ground_to_ground(d: f64, sys: &System, shadowing: &mut Shadowing<'_>) -> f64 {
    debug_assert!(d > 0.0);
    let p = sys.params();
    let psi = shadowing.loss(p.mu_nlos, p.sigma_nlos);
    p.p_g * sys.derived().g0 / psi * path_gain(sys, d, p.n_nlos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{RawConfig, System};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sys() -> System {
        System::defaults()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gain_at_nadir_and_lobe_edge() {
        let s = sys();
        let h = s.derived().h_low;
        let g = antenna_gain(h, h, &s).unwrap();
        assert!((g - 2.083_333_333_333_333).abs() < 1e-12);
        let edge = h / s.params().phi_b.cos();
        assert_eq!(antenna_gain(edge, h, &s).unwrap(), g);
        assert_eq!(antenna_gain(1.001 * edge, h, &s).unwrap(), 0.0);
    }

    #[test]
    fn gain_rejects_impossible_geometry() {
        let s = sys();
        assert!(matches!(antenna_gain(10.0, 20.0, &s), Err(Error::Geometry { .. })));
    }

    #[test]
    fn pinned_received_powers() {
        // Frozen from an independent 40-digit evaluation of the link equations.
        let s = sys();
        let d = s.lobe_edge_distance(s.derived().h_low);
        let p = rx_power_uav_to_ground(d, &s, &mut Shadowing::MeanDb);
        assert!(rel(p, 5.395_927_595_490_393e-8) < 1e-12);
        let pgg = rx_power_ground_to_ground(s.derived().d_min, &s, &mut Shadowing::MeanDb);
        assert!(rel(pgg, 7.404_647_825_753_171e-14) < 1e-12);
    }

    #[test]
    fn distance_scaling_laws() {
        let s = sys();
        let m = &mut Shadowing::MeanDb;
        let d = 150.0;
        assert!(rel(rx_power_uav_to_ground(2.0 * d, &s, m), rx_power_uav_to_ground(d, &s, m) / 4.0) < 1e-12);
        assert!(rel(rx_power_ground_to_uav(2.0 * d, &s, m), rx_power_ground_to_uav(d, &s, m) / 4.0) < 1e-12);
        assert!(
            rel(rx_power_ground_to_ground(2.0 * d, &s, m), rx_power_ground_to_ground(d, &s, m) / 16.0)
                < 1e-12
        );
    }

    #[test]
    fn uplink_downlink_ratio_is_beamwidth_squared() {
        let s = sys();
        let m = &mut Shadowing::MeanDb;
        let ratio = rx_power_ground_to_uav(120.0, &s, m) / rx_power_uav_to_ground(120.0, &s, m);
        let phi = s.params().phi_b;
        assert!(rel(ratio, phi * phi) < 1e-12);
    }

    #[test]
    fn shadowing_mean_and_power_linearity() {
        let mut raw = RawConfig::defaults();
        raw.set("mu_los", 0.0);
        let zero = System::from_raw(&raw).unwrap();
        let one = sys();
        let m = &mut Shadowing::MeanDb;
        let ratio = rx_power_uav_to_ground(100.0, &zero, m) / rx_power_uav_to_ground(100.0, &one, m);
        assert!(rel(ratio, 10f64.powf(0.1)) < 1e-12);

        raw = RawConfig::defaults();
        raw.set("p_g_dbm", 45.0);
        let loud = System::from_raw(&raw).unwrap();
        let r = rx_power_ground_to_uav(80.0, &loud, m) / rx_power_ground_to_uav(80.0, &one, m);
        assert!(rel(r, 10.0) < 1e-12);

        raw = RawConfig::defaults();
        raw.set("noise_dbm", -130.0);
        let quiet = System::from_raw(&raw).unwrap();
        assert_eq!(
            rx_power_ground_to_ground(50.0, &quiet, m),
            rx_power_ground_to_ground(50.0, &one, m)
        );
    }

    #[test]
    fn nlos_vs_los_shadowing_ratio() {
        // Same exponent for both links isolates the 30 dB vs 1 dB means.
        let mut raw = RawConfig::defaults();
        raw.set("n_nlos", 2.0);
        let s = System::from_raw(&raw).unwrap();
        let m = &mut Shadowing::MeanDb;
        let r = rx_power_ground_to_ground(40.0, &s, m) / rx_power_ground_to_uav(40.0, &s, m);
        assert!(rel(r, 10f64.powf(-2.9)) < 1e-12);
    }

    #[test]
    fn powers_decrease_with_distance() {
        let s = sys();
        let m = &mut Shadowing::MeanDb;
        let mut prev = [f64::INFINITY; 3];
        for i in 1..200 {
            let d = i as f64 * 2.5;
            let now = [
                rx_power_uav_to_ground(d, &s, m),
                rx_power_ground_to_uav(d, &s, m),
                rx_power_ground_to_ground(d, &s, m),
            ];
            for (a, b) in now.iter().zip(prev.iter()) {
                assert!(a < b);
            }
            prev = now;
        }
    }

    #[test]
    fn sampled_shadowing_mean_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sh = Shadowing::Sampled(&mut rng);
        let n = 100_000;
        let (mu, sigma) = (30.0, 8.0);
        let mean_db: f64 = (0..n).map(|_| 10.0 * sh.loss(mu, sigma).log10()).sum::<f64>() / n as f64;
        assert!((mean_db - mu).abs() < 3.0 * sigma / (n as f64).sqrt());
    }
}
