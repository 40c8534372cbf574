//! The limiting length-spectrum law: intensity, interval means, girth CDF,
//! Poisson probabilities, and factorial-moment predictions.

use thiserror::Error;

use crate::numeric::ln_factorial;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("interval specs must be pairwise disjoint")]
    OverlappingIntervals,
    #[error("interval must satisfy 0 <= a < b")]
    BadInterval,
}

/// Scaling parameter of the limit law. With total boundary length L at genus
/// g, the relevant value is mu = L / (12 g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityParams<F: Scalar> {
    mu: F,
}

impl<F: Scalar> IntensityParams<F> {
    pub fn new(mu: F) -> Self {
        assert!(mu > F::zero(), "mu must be positive");
        Self { mu }
    }

    pub fn mu(&self) -> F {
        self.mu
    }
}

/// Half-open interval [a, b) with a count multiplicity r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpec<F: Scalar> {
    pub a: F,
    pub b: F,
    pub r: u32,
}

impl<F: Scalar> IntervalSpec<F> {
    pub fn new(a: F, b: F, r: u32) -> Result<Self, ModelError> {
        if !(a >= F::zero() && a < b) {
            return Err(ModelError::BadInterval);
        }
        Ok(Self { a, b, r })
    }
}

/// Checks that no two intervals intersect (half-open semantics).
pub fn intervals_disjoint<F: Scalar>(specs: &[IntervalSpec<F>]) -> bool {
    for (i, s) in specs.iter().enumerate() {
        for t in &specs[i + 1..] {
            if s.a < t.b && t.a < s.b {
                return false;
            }
        }
    }
    true
}

/// Intensity of the limiting point process:
/// lambda_mu(l) = (cosh(l/mu) - 1) / l, extended by 0 at l = 0.
///
/// For l/mu < 1e-4 the series l/(2 mu^2) + l^3/(24 mu^4) is used to avoid the
/// cancellation in cosh - 1.
pub fn intensity<F: Scalar>(ell: F, p: &IntensityParams<F>) -> F {
    assert!(ell >= F::zero());
    if ell == F::zero() {
        return F::zero();
    }
    let x = ell / p.mu;
    if x < F::from_f64_exact(1e-4) {
        let mu2 = p.mu * p.mu;
        let two = F::from_f64_exact(2.0);
        let twenty_four = F::from_f64_exact(24.0);
        ell / (two * mu2) + ell * ell * ell / (twenty_four * mu2 * mu2)
    } else {
        (x.cosh() - F::one()) / ell
    }
}

/// Antiderivative of the unit intensity through the origin:
/// Phi(x) = integral of (cosh u - 1)/u from 0 to x = sum_{k>=1} x^{2k} / (2k (2k)!).
fn phi<F: Scalar>(x: F) -> F {
    let x2 = x * x;
    let mut term = x2 / F::from_f64_exact(4.0); // k = 1: x^2 / (2 * 2!)
    let mut sum = term;
    let mut k = 1u64;
    loop {
        k += 1;
        let two_k = F::from_usize_exact(2 * k as usize);
        // term_{k} = term_{k-1} * x^2 * (2k-2) / ((2k-1) * 2k * 2k)
        term = term * x2 * (two_k - F::from_f64_exact(2.0))
            / ((two_k - F::one()) * two_k * two_k);
        sum = sum + term;
        if term < sum * F::from_f64_exact(1e-15) || k > 500 {
            break;
        }
    }
    sum
}

/// Mean number of points in [a, b): integral of the intensity,
/// Phi(b/mu) - Phi(a/mu).
pub fn expected_count<F: Scalar>(a: F, b: F, p: &IntensityParams<F>) -> F {
    assert!(a >= F::zero() && b >= a);
    if a == b {
        return F::zero();
    }
    phi(b / p.mu) - phi(a / p.mu)
}

/// CDF of the girth under the limit law: 1 - exp(-integral_0^t lambda).
pub fn girth_cdf<F: Scalar>(t: F, p: &IntensityParams<F>) -> F {
    assert!(t >= F::zero());
    -(-expected_count(F::zero(), t, p)).exp_m1()
}

/// Poisson probability mass e^{-lambda} lambda^k / k!, evaluated in log space.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    assert!(lambda > 0.0);
    (-lambda + k as f64 * lambda.ln() - ln_factorial(k)).exp()
}

/// Product of interval means raised to their multiplicities: the prediction
/// for the joint factorial moment of the interval counts.
pub fn factorial_moment_prediction<F: Scalar>(
    specs: &[IntervalSpec<F>],
    p: &IntensityParams<F>,
) -> Result<F, ModelError> {
    if !intervals_disjoint(specs) {
        return Err(ModelError::OverlappingIntervals);
    }
    let mut product = F::one();
    for spec in specs {
        let mean = expected_count(spec.a, spec.b, p);
        for _ in 0..spec.r {
            product = product * mean;
        }
    }
    Ok(product)
}
