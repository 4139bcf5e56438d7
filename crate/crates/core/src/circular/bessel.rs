//! J₀ via its power series below `Z_MIN` and the Hankel P/Q expansion above.

use std::f64::consts::{FRAC_PI_4, PI};

/// Switch point between the power series and the asymptotic expansion.
pub const Z_MIN: f64 = 12.0;

/// Hankel coefficient `a_k(0) = Π_{j≤k} (-(2j-1)²) / (k! 8^k)`.
fn hankel(k: usize) -> f64 {
    let mut a = 1.0;
    for j in 1..=k {
        let m = (2 * j - 1) as f64;
        a *= -m * m / (j as f64 * 8.0);
    }
    a
}

/// Truncated `P(z) = Σ p_j z^{-2j}` and `Q(z) = Σ q_j z^{-2j-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BesselAsymptotics {
    pub p_coeffs: Vec<f64>,
    pub q_coeffs: Vec<f64>,
    pub z_min: f64,
}

impl BesselAsymptotics {
    /// First `terms` coefficients of each series.
    pub fn new(terms: usize) -> Self {
        let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self {
            p_coeffs: (0..terms).map(|j| sign(j) * hankel(2 * j)).collect(),
            q_coeffs: (0..terms).map(|j| sign(j) * hankel(2 * j + 1)).collect(),
            z_min: Z_MIN,
        }
    }

    pub fn terms(&self) -> usize {
        self.p_coeffs.len()
    }

    pub fn pq(&self, z: f64) -> (f64, f64) {
        let w = 1.0 / (z * z);
        let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &a| acc * w + a);
        (horner(&self.p_coeffs), horner(&self.q_coeffs) / z)
    }
}

/// P and Q summed until the terms stop shrinking (optimal truncation).
pub fn pq_full(z: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0; // a_k / z^k
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let m = (2 * k - 1) as f64;
            term *= -m * m / (k as f64 * 8.0 * z);
        }
        if term.abs() >= last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // i^{-k} pattern: P collects even k with sign (-1)^{k/2}, Q odd k with (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    (p, q)
}

pub fn j0_series(z: f64, terms: usize) -> f64 {
    let x = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        term *= x / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

pub fn j0_asymptotic(z: f64) -> f64 {
    let (p, q) = pq_full(z);
    let phase = z - FRAC_PI_4;
    (2.0 / (PI * z)).sqrt() * (p * phase.cos() - q * phase.sin())
}

pub fn j0(z: f64) -> f64 {
    let z = z.abs();
    if z < Z_MIN {
        j0_series(z, 60)
    } else {
        j0_asymptotic(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficients() {
        let b = BesselAsymptotics::new(3);
        assert_eq!(b.p_coeffs[0], 1.0);
        assert_eq!(b.q_coeffs[0], -0.125);
        assert!((b.p_coeffs[1] + 9.0 / 128.0).abs() < 1e-16);
        assert!((b.q_coeffs[1] - 75.0 / 1024.0).abs() < 1e-16);
    }

    #[test]
    fn seam_agreement() {
        for z in [12.0, 12.5, 13.0] {
            let a = j0_series(z, 40);
            let b = j0_asymptotic(z);
            assert!((a - b).abs() < 1e-10, "z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_values() {
        // tabulated: J0(1), J0(5), first zero, J0(20), J0(100)
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j0(5.0) + 0.177_596_771_314_338_3).abs() < 1e-13);
        assert!(j0(2.404_825_557_695_773).abs() < 1e-13);
        assert!((j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-12);
        assert!((j0(100.0) - 0.019_985_850_304_223_12).abs() < 1e-14);
        assert_eq!(j0(0.0), 1.0);
    }

    #[test]
    fn truncated_matches_full_at_large_argument() {
        let b = BesselAsymptotics::new(6);
        let (p, q) = b.pq(40.0);
        let (pf, qf) = pq_full(40.0);
        assert!((p - pf).abs() < 1e-14 && (q - qf).abs() < 1e-14);
    }
}
