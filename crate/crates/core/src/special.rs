//! Log-domain combinatorics and the modified Bessel function of the first
//! kind for integer order.

use std::f64::consts::LN_10;

/// ln(n!) by direct summation.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// ln C(n, j) for every j in 0..=n.
pub fn ln_binomial_row(n: u32) -> Vec<f64> {
    let ln_fact: Vec<f64> = {
        let mut acc = 0.0;
        let mut v = Vec::with_capacity(n as usize + 1);
        v.push(0.0);
        for i in 1..=n {
            acc += f64::from(i).ln();
            v.push(acc);
        }
        v
    };
    (0..=n as usize)
        .map(|j| ln_fact[n as usize] - ln_fact[j] - ln_fact[n as usize - j])
        .collect()
}

/// ln I_order(z) from the ascending power series
/// sum_m (z/2)^(2m+order) / (m! (m+order)!), truncated once a term falls
/// below 1e-17 of the running sum.
pub fn ln_bessel_i(order: u32, z: f64) -> f64 {
    assert!(z >= 0.0 && z.is_finite(), "ln_bessel_i: z = {z}");
    if z == 0.0 {
        return if order == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    const RESCALE: f64 = 1e280;
    let half = 0.5 * z;
    let q = half * half;
    let ln_first = f64::from(order) * half.ln() - ln_factorial(u64::from(order));

    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut ln_scale = 0.0;
    let mut m = 0u64;
    loop {
        m += 1;
        term *= q / (m as f64 * (m + u64::from(order)) as f64);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            ln_scale += 280.0 * LN_10;
        }
    }
    ln_first + sum.ln() + ln_scale
}
