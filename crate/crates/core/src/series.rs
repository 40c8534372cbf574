//! Truncated power series over scaled reals, sized for coefficient
//! extraction from sinh products at degrees near 1500.

use crate::scaled::ScaledReal;

/// Coefficients c_0..c_D; multiplication truncates at the common degree D.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySeries {
    coeffs: Vec<ScaledReal>,
}

impl PolySeries {
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![ScaledReal::zero(); degree + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<ScaledReal>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    /// sinh(c z) truncated: c^(2k+1) z^(2k+1) / (2k+1)! for all 2k+1 <= D.
    pub fn sinh_series(c: f64, degree: usize) -> Self {
        assert!(c >= 0.0);
        let mut s = Self::zero(degree);
        if c == 0.0 || degree < 1 {
            return s;
        }
        let c2 = ScaledReal::from_f64(c) * ScaledReal::from_f64(c);
        let mut term = ScaledReal::from_f64(c);
        let mut k = 1usize;
        s.coeffs[1] = term;
        while k + 2 <= degree {
            term = term * c2 / ScaledReal::from_f64(((k + 1) * (k + 2)) as f64);
            k += 2;
            s.coeffs[k] = term;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, d: usize) -> ScaledReal {
        self.coeffs[d]
    }

    /// Truncated convolution at the shared degree.
    pub fn mul_truncated(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        let d = self.degree();
        let mut out = Self::zero(d);
        for i in 0..=d {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=d - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j] + self.coeffs[i] * other.coeffs[j];
            }
        }
        out
    }

    pub fn all_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c.signum() >= 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinh_series_coefficients() {
        let s = PolySeries::sinh_series(1.0, 7);
        assert!(s.coeff(0).is_zero() && s.coeff(2).is_zero());
        assert_relative_eq!(s.coeff(1).as_f64(), 1.0);
        assert_relative_eq!(s.coeff(3).as_f64(), 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(s.coeff(5).as_f64(), 1.0 / 120.0, max_relative = 1e-14);
        assert_relative_eq!(s.coeff(7).as_f64(), 1.0 / 5040.0, max_relative = 1e-14);

        let t = PolySeries::sinh_series(2.0, 5);
        assert_relative_eq!(t.coeff(3).as_f64(), 8.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(t.coeff(5).as_f64(), 32.0 / 120.0, max_relative = 1e-14);
    }

    #[test]
    fn high_degree_single_factor_matches_closed_form() {
        // [z^k] sinh(c z) = c^k / k!
        let s = PolySeries::sinh_series(12.0, 765);
        let expected = ScaledReal::from_f64(12.0).powi(765)
            / crate::scaled::factorial_scaled(765);
        let ratio = (s.coeff(765) / expected).as_f64();
        assert!((ratio - 1.0).abs() < 1e-11, "ratio {ratio}");
    }

    #[test]
    fn truncated_product_of_sinh_squares() {
        let s = PolySeries::sinh_series(1.0, 8);
        let p = s.mul_truncated(&s);
        assert_relative_eq!(p.coeff(2).as_f64(), 1.0);
        assert!(p.coeff(3).is_zero());
        assert_relative_eq!(p.coeff(4).as_f64(), 1.0 / 3.0, max_relative = 1e-14);
        // sinh^2 = (cosh(2z) - 1)/2 so [z^6] = 2^5/6! = 32/720
        assert_relative_eq!(p.coeff(6).as_f64(), 32.0 / 720.0, max_relative = 1e-13);
        assert!(p.all_nonnegative());
    }

    #[test]
    fn multiplication_truncates_and_commutes() {
        let a = PolySeries::sinh_series(1.5, 6);
        let b = PolySeries::sinh_series(0.5, 6);
        let ab = a.mul_truncated(&b);
        let ba = b.mul_truncated(&a);
        for d in 0..=6 {
            assert_eq!(ab.coeff(d).signum(), ba.coeff(d).signum());
            if !ab.coeff(d).is_zero() {
                assert_relative_eq!(
                    ab.coeff(d).as_f64(),
                    ba.coeff(d).as_f64(),
                    max_relative = 1e-14
                );
            }
        }
        assert_eq!(ab.degree(), 6);
        assert!(PolySeries::sinh_series(0.0, 4).all_nonnegative());
    }
}
