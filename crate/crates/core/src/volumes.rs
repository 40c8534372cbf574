//! Symplectic volume formulas: the one-boundary closed form, the genus-0
//! multinomial sum, the large-genus asymptotic series form, saddle-point
//! estimates, and normalized intersection bounds.

use crate::poisson::{intensity, IntensityParams};
use crate::scaled::{double_factorial_scaled, factorial_scaled, sinh_scaled, ScaledReal};
use crate::series::PolySeries;

/// [z^degree] of prod_i sinh(L_i z) * prod_j sinh(ell_j z), exact zero when
/// the degree parity does not match the factor count.
pub fn sinh_product_coeff(l: &[f64], ell: &[f64], degree: usize) -> ScaledReal {
    let factors: Vec<f64> = l.iter().chain(ell).copied().collect();
    assert!(!factors.is_empty(), "need at least one factor");
    assert!(l.iter().all(|&x| x > 0.0) && ell.iter().all(|&x| x >= 0.0));
    let mut product = PolySeries::sinh_series(factors[0], degree);
    for &c in &factors[1..] {
        product = product.mul_truncated(&PolySeries::sinh_series(c, degree));
        assert!(product.all_nonnegative(), "sinh product coefficients must stay nonnegative");
    }
    product.coeff(degree)
}

/// One-boundary volume: L^(6g-4) / (g! 24^g 2^(3g-2) (3g-2)!).
pub fn exact_volume_g1(g: u32, l: f64) -> ScaledReal {
    assert!(g >= 1 && l > 0.0);
    let numer = ScaledReal::from_f64(l).powi(6 * g as i64 - 4);
    let denom = factorial_scaled(g as u64)
        * ScaledReal::from_u64(24).powi(g as i64)
        * ScaledReal::from_u64(2).powi(3 * g as i64 - 2)
        * factorial_scaled(3 * g as u64 - 2);
    numer / denom
}

fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(remaining: usize, slot: usize, d: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == d.len() {
            d[slot] = remaining;
            f(d);
            return;
        }
        for v in 0..=remaining {
            d[slot] = v;
            rec(remaining - v, slot + 1, d, f);
        }
    }
    let mut d = vec![0usize; parts];
    rec(total, 0, &mut d, f);
}

fn multinomial_u128(total: usize, parts: &[usize]) -> u128 {
    debug_assert_eq!(parts.iter().sum::<usize>(), total);
    let mut numer: u128 = 1;
    for i in 2..=total {
        numer *= i as u128;
    }
    let mut denom: u128 = 1;
    for &p in parts {
        for i in 2..=p {
            denom *= i as u128;
        }
    }
    numer / denom
}

/// Genus-0 volume with n >= 3 boundaries:
/// sum over |d| = n-3 of multinomial(n-3; d) prod_i L_i^(2 d_i) / (2^(d_i) d_i!).
pub fn exact_volume_genus0(l: &[f64]) -> ScaledReal {
    let n = l.len();
    assert!(n >= 3 && l.iter().all(|&x| x > 0.0));
    let m = n - 3;
    let mut sum = ScaledReal::zero();
    for_each_composition(m, n, &mut |d| {
        let mut term = ScaledReal::from_f64(multinomial_u128(m, d) as f64);
        for (i, &di) in d.iter().enumerate() {
            if di > 0 {
                term = term * ScaledReal::from_f64(l[i]).powi(2 * di as i64)
                    / (ScaledReal::from_u64(2).powi(di as i64)
                        * factorial_scaled(di as u64));
            }
        }
        sum = sum + term;
    });
    sum
}

fn assert_stable(g: u32, n: usize) {
    assert!(2 * g as i64 - 2 + n as i64 > 0, "(g, n) = ({g}, {n}) is not stable");
}

/// Large-genus volume form:
/// (6g-5+2n)!! / (g! 24^g) * [z^(6g-6+3n)] prod_i sinh(L_i z) / L_i.
pub fn asymptotic_volume(g: u32, n: usize, l: &[f64]) -> ScaledReal {
    assert_stable(g, n);
    assert_eq!(l.len(), n);
    let degree = (6 * g as i64 - 6 + 3 * n as i64) as usize;
    let prefactor = double_factorial_scaled((6 * g as i64 - 5 + 2 * n as i64) as u64)
        / (factorial_scaled(g as u64) * ScaledReal::from_u64(24).powi(g as i64));
    let coeff = sinh_product_coeff(l, &[], degree);
    let scale = l.iter().fold(ScaledReal::one(), |acc, &x| acc * ScaledReal::from_f64(x));
    prefactor * coeff / scale
}

/// Saddle location (6g-6+3n) / |L|; tends to 1/(2 mu) in the scaling regime.
pub fn saddle_rho(g: u32, n: usize, total_l: f64) -> f64 {
    assert!(total_l > 0.0);
    (6 * g as i64 - 6 + 3 * n as i64) as f64 / total_l
}

/// Saddle-point estimate of the sinh-product coefficient:
/// rho^-(6g-6+3n) / sqrt(3 pi g) * prod_i sinh(L_i rho) * prod_j sinh(ell_j / (2 mu))
/// with mu = |L| / (12 g).
pub fn saddle_point_estimate(g: u32, n: usize, l: &[f64], ell: &[f64]) -> ScaledReal {
    assert!(g >= 1);
    assert_stable(g, n);
    assert_eq!(l.len(), n);
    let total: f64 = l.iter().sum();
    let rho = saddle_rho(g, n, total);
    let mu = total / (12.0 * g as f64);
    let degree = 6 * g as i64 - 6 + 3 * n as i64;
    let mut acc = ScaledReal::from_f64(rho).powi(-degree)
        / ScaledReal::from_f64((3.0 * std::f64::consts::PI * g as f64).sqrt());
    for &li in l {
        acc = acc * sinh_scaled(li * rho);
    }
    for &e in ell {
        acc = acc * sinh_scaled(e / (2.0 * mu));
    }
    acc
}

/// Ratio estimate for trading r handles against r pairs of boundaries:
/// 2^r prod_s (cosh(ell_s / mu) - 1) / ell_s^2.
pub fn volume_ratio_estimate(g: u32, n: usize, r: u32, ell: &[f64], mu: f64) -> f64 {
    assert!(r >= 1 && g > r);
    assert_stable(g, n);
    assert_eq!(ell.len(), r as usize);
    assert!(mu > 0.0);
    let params = IntensityParams::new(mu);
    let product: f64 = ell.iter().map(|&e| intensity(e, &params) / e).product();
    product * 2f64.powi(r as i32)
}

/// Normalized intersection asymptote (6g-5+2n)!! / (g! 24^g).
pub fn aggarwal_normalized(g: u32, n: usize) -> ScaledReal {
    assert_stable(g, n);
    double_factorial_scaled((6 * g as i64 - 5 + 2 * n as i64) as u64)
        / (factorial_scaled(g as u64) * ScaledReal::from_u64(24).powi(g as i64))
}

/// (3/2)^(n-1) times [aggarwal_normalized]: a bound valid at every (g, n),
/// not only asymptotically.
pub fn uniform_bound(g: u32, n: usize) -> ScaledReal {
    assert_stable(g, n);
    ScaledReal::from_f64(1.5).powi(n as i64 - 1) * aggarwal_normalized(g, n)
}
