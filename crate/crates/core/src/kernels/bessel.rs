//! Modified Bessel function of the second kind, K_ν(r).
//!
//! Half-integer orders use the terminating closed form. Other orders reduce to
//! |μ| ≤ 1/2, evaluate K_μ and K_{μ+1} with Temme's series for r ≤ 2 or Steed's
//! continued fraction for r > 2, then recur upward in the order.

use std::f64::consts::PI;

use super::special::temme_gammas;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const SERIES_LIMIT: f64 = 2.0;

/// K_ν(r) for real ν and r > 0. Uses K_ν = K_{-ν}.
pub fn bessel_k(nu: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires r > 0, got {r}")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires finite order, got {nu}")));
    }
    let nu = nu.abs();
    if let Some(n) = half_integer_index(nu) {
        return Ok(bessel_k_half_integer(n, r));
    }
    Ok(bessel_k_general(nu, r))
}

/// If ν = n + 1/2, returns n.
pub(crate) fn half_integer_index(nu: f64) -> Option<u32> {
    let shifted = nu - 0.5;
    if shifted >= -1e-14 && (shifted - shifted.round()).abs() < 1e-14 && shifted < 1e6 {
        Some(shifted.round() as u32)
    } else {
        None
    }
}

/// Coefficients (n+k)! / (k! (n-k)! 2^k), k = 0..=n, of the closed form
/// K_{n+1/2}(r) = √(π/2r) e^{-r} Σ_k coeff_k r^{-k}.
pub(crate) fn half_integer_coefficients(n: u32) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    let mut c = 1.0;
    coeffs.push(c);
    for k in 0..n {
        let k = f64::from(k);
        let n = f64::from(n);
        // ratio of consecutive terms: (n+k+1)(n-k) / ((k+1) 2)
        c *= (n + k + 1.0) * (n - k) / (2.0 * (k + 1.0));
        coeffs.push(c);
    }
    coeffs
}

fn bessel_k_half_integer(n: u32, r: f64) -> f64 {
    let coeffs = half_integer_coefficients(n);
    let inv = 1.0 / r;
    let sum = coeffs.iter().rev().fold(0.0, |acc, &c| acc * inv + c);
    (PI / (2.0 * r)).sqrt() * (-r).exp() * sum
}

/// General-order path (no half-integer shortcut). Exposed for cross-validation.
pub fn bessel_k_general(nu: f64, r: f64) -> f64 {
    let nu = nu.abs();
    let steps = (nu + 0.5).floor() as usize;
    let mu = nu - steps as f64;
    let (mut k_mu, mut k_next) = if r <= SERIES_LIMIT {
        temme_series(mu, r)
    } else {
        steed_fraction(mu, r)
    };
    let two_over_r = 2.0 / r;
    for i in 1..=steps {
        let next = (mu + i as f64) * two_over_r * k_next + k_mu;
        k_mu = k_next;
        k_next = next;
    }
    k_mu
}

/// Returns (K_μ(r), K_{μ+1}(r)) for |μ| ≤ 1/2 and r ≤ 2.
fn temme_series(mu: f64, r: f64) -> (f64, f64) {
    let half = 0.5 * r;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -half.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / gampl;
    let mut q = 0.5 / (e * gammi);
    let mut c = 1.0;
    let d = half * half;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..=MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= d / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / r)
}

/// Returns (K_μ(r), K_{μ+1}(r)) for |μ| ≤ 1/2 and r > 2.
fn steed_fraction(mu: f64, r: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + r);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * r)).sqrt() * (-r).exp() / s;
    let k_next = k_mu * (mu + r + 0.5 - h) / r;
    (k_mu, k_next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed with 40-digit arbitrary precision arithmetic.
    const REFERENCE: &[(f64, f64, f64)] = &[
        (0.5, 1.0, 0.461_068_504_447_894_54),
        (0.7, 2.0, 0.126_013_271_306_610_64),
        (1.5, 20.0, 6.065_192_673_442_817e-10),
        (1.0, 1e-6, 999_999.999_992_784_3),
        (1.0, 0.5, 1.656_441_120_003_301),
        (1.0, 2.0, 0.139_865_881_816_522_43),
        (1.0, 2.000_000_1, 0.139_865_863_433_842_4),
        (1.0, 10.0, 1.864_877_345_382_558_5e-5),
        (1.0, 30.0, 2.167_732_001_891_549_5e-14),
        (0.3, 0.1, 2.805_056_475_021_572_3),
        (2.25, 3.7, 0.028_488_576_712_077_742),
        (0.0, 1.0, 0.421_024_438_240_708_34),
        (0.0, 1e-6, 13.931_442_073_626_42),
        (3.5, 0.01, 187_995_240.641_785_2),
        (1.5, 1e-6, 1_253_314_137.314_873_7),
        (0.7, 30.0, 2.149_680_731_791_946_2e-14),
        (4.0, 1.9, 2.775_011_487_387_908_4),
        (4.0, 2.1, 1.753_069_853_984_111_2),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(nu, r, expected) in REFERENCE {
            let got = bessel_k(nu, r).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn general_path_matches_reference() {
        for &(nu, r, expected) in REFERENCE {
            assert_relative_eq!(bessel_k_general(nu, r), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn half_order_closed_form_at_one() {
        let expected = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert_relative_eq!(bessel_k(0.5, 1.0).unwrap(), expected, max_relative = 1e-15);
        assert_relative_eq!(expected, 0.461_068_5, max_relative = 1e-7);
    }

    #[test]
    fn order_symmetry() {
        let a = bessel_k(0.7, 2.0).unwrap();
        let b = bessel_k(-0.7, 2.0).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn half_integer_closed_forms_match_general_path() {
        for &nu in &[0.5, 1.5, 2.5] {
            for i in 0..200 {
                let r = 1e-6 * (30.0f64 / 1e-6).powf(f64::from(i) / 199.0);
                let closed = bessel_k(nu, r).unwrap();
                let general = bessel_k_general(nu, r);
                assert_relative_eq!(closed, general, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn regimes_agree_at_the_seam() {
        for &nu in &[0.0, 0.3, 1.0, 2.7] {
            let below = bessel_k_general(nu, SERIES_LIMIT);
            let above = bessel_k_general(nu, SERIES_LIMIT * (1.0 + 1e-12));
            assert_relative_eq!(below, above, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(bessel_k(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn half_integer_coefficients_small_orders() {
        assert_eq!(half_integer_coefficients(0), vec![1.0]);
        assert_eq!(half_integer_coefficients(1), vec![1.0, 1.0]);
        assert_eq!(half_integer_coefficients(2), vec![1.0, 3.0, 3.0]);
    }
}
