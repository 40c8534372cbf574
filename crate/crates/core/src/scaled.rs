//! Base-10 scaled floating arithmetic for quantities far outside the f64
//! range, such as double factorials and sinh products near genus 200.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

const LN_10: f64 = std::f64::consts::LN_10;

/// sign * mantissa * 10^exp with mantissa in [1, 10), or exactly zero.
/// Exponents combine exactly under multiplication and division; addition
/// aligns exponents and drops addends more than 17 decades below the larger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReal {
    sign: i8,
    mantissa: f64,
    exp: i64,
}

impl ScaledReal {
    pub const fn zero() -> Self {
        Self { sign: 0, mantissa: 0.0, exp: 0 }
    }

    pub const fn one() -> Self {
        Self { sign: 1, mantissa: 1.0, exp: 0 }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "scaled value must be finite");
        if x == 0.0 {
            return Self::zero();
        }
        let sign = if x > 0.0 { 1 } else { -1 };
        let a = x.abs();
        let mut exp = a.log10().floor() as i64;
        // two-step scaling keeps 10^exp within range for subnormal inputs
        let half = (exp / 2) as i32;
        let mut mantissa = (a / 10f64.powi(half)) / 10f64.powi(exp as i32 - half);
        while mantissa >= 10.0 {
            mantissa /= 10.0;
            exp += 1;
        }
        while mantissa < 1.0 {
            mantissa *= 10.0;
            exp -= 1;
        }
        Self { sign, mantissa, exp }
    }

    pub fn from_u64(n: u64) -> Self {
        Self::from_f64(n as f64)
    }

    /// e^x, exact in the exponent decomposition x/ln(10).
    pub fn from_exp(x: f64) -> Self {
        assert!(x.is_finite());
        let t = x / LN_10;
        let mut exp = t.floor() as i64;
        let mut mantissa = ((t - t.floor()) * LN_10).exp();
        if mantissa >= 10.0 {
            mantissa /= 10.0;
            exp += 1;
        }
        Self { sign: 1, mantissa, exp }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    pub fn signum(&self) -> i8 {
        self.sign
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn abs(self) -> Self {
        Self { sign: self.sign.abs(), ..self }
    }

    pub fn recip(self) -> Self {
        Self::one() / self
    }

    /// Natural log; requires a positive value.
    pub fn ln(self) -> f64 {
        assert!(self.sign > 0, "ln of a non-positive value");
        self.mantissa.ln() + self.exp as f64 * LN_10
    }

    /// Collapses to f64, overflowing to infinity or underflowing to zero
    /// outside the native range.
    pub fn as_f64(self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let half = (self.exp / 2) as i32;
        let v = self.mantissa * 10f64.powi(half) * 10f64.powi(self.exp as i32 - half);
        self.sign as f64 * v
    }

    /// Integer power by repeated squaring; negative k inverts.
    pub fn powi(self, k: i64) -> Self {
        if k == 0 {
            return Self::one();
        }
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut base = self;
        let mut acc = Self::one();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    fn normalized(sign: i8, mut mantissa: f64, mut exp: i64) -> Self {
        debug_assert!(sign != 0 && mantissa > 0.0);
        while mantissa >= 10.0 {
            mantissa /= 10.0;
            exp += 1;
        }
        while mantissa < 1.0 {
            mantissa *= 10.0;
            exp -= 1;
        }
        Self { sign, mantissa, exp }
    }
}

/// k! in scaled arithmetic.
pub fn factorial_scaled(k: u64) -> ScaledReal {
    (2..=k).fold(ScaledReal::one(), |acc, i| acc * ScaledReal::from_u64(i))
}

/// k!! = k (k-2) (k-4) ... ending at 1 or 2; 0!! = 1.
pub fn double_factorial_scaled(k: u64) -> ScaledReal {
    let mut acc = ScaledReal::one();
    let mut i = k;
    while i >= 2 {
        acc = acc * ScaledReal::from_u64(i);
        i -= 2;
    }
    acc
}

/// sinh(x) for x >= 0, switching to the exponential form once e^x leaves the
/// native range.
pub fn sinh_scaled(x: f64) -> ScaledReal {
    assert!(x >= 0.0 && x.is_finite());
    if x < 700.0 {
        ScaledReal::from_f64(x.sinh())
    } else {
        ScaledReal::from_exp(x) * ScaledReal::from_f64((1.0 - (-2.0 * x).exp()) / 2.0)
    }
}

impl Mul for ScaledReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let sign = self.sign * rhs.sign;
        if sign == 0 {
            return Self::zero();
        }
        Self::normalized(sign, self.mantissa * rhs.mantissa, self.exp + rhs.exp)
    }
}

impl Div for ScaledReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division by zero");
        if self.sign == 0 {
            return Self::zero();
        }
        Self::normalized(self.sign * rhs.sign, self.mantissa / rhs.mantissa, self.exp - rhs.exp)
    }
}

impl Add for ScaledReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = hi.exp - lo.exp;
        if shift > 17 {
            return hi;
        }
        // 10^shift is exact for shift <= 17, so the alignment rounds once
        let aligned = lo.sign as f64 * lo.mantissa / 10f64.powi(shift as i32);
        let s = hi.sign as f64 * hi.mantissa + aligned;
        if s == 0.0 {
            return Self::zero();
        }
        Self::normalized(if s > 0.0 { 1 } else { -1 }, s.abs(), hi.exp)
    }
}

impl Sub for ScaledReal {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ScaledReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self { sign: -self.sign, ..self }
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.sign != other.sign {
            return Some(self.sign.cmp(&other.sign));
        }
        if self.sign == 0 {
            return Some(Ordering::Equal);
        }
        let mag = self.exp.cmp(&other.exp).then(self.mantissa.partial_cmp(&other.mantissa)?);
        Some(if self.sign > 0 { mag } else { mag.reverse() })
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        let sign = if self.sign < 0 { "-" } else { "" };
        write!(f, "{}{:.16}e{}", sign, self.mantissa, self.exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: ScaledReal, b: ScaledReal, tol: f64) {
        assert_eq!(a.signum(), b.signum(), "{a} vs {b}");
        if a.is_zero() {
            return;
        }
        let ratio = (a / b).as_f64();
        assert!((ratio - 1.0).abs() < tol, "{a} vs {b}: ratio {ratio}");
    }

    #[test]
    fn roundtrips_and_normalization() {
        for &x in &[1.0, -2.5, 0.001, 9.999, 123456.789, 1e-300, 2.3e300] {
            let s = ScaledReal::from_f64(x);
            assert_relative_eq!(s.as_f64(), x, max_relative = 1e-14);
            assert!(s.mantissa() >= 1.0 && s.mantissa() < 10.0);
        }
        assert!(ScaledReal::from_f64(0.0).is_zero());
        assert_eq!(ScaledReal::from_f64(100.0).exponent(), 2);
        assert_eq!(ScaledReal::from_f64(100.0).mantissa(), 1.0);
    }

    #[test]
    fn products_extend_past_native_range() {
        let a = ScaledReal::from_f64(3e200);
        let b = ScaledReal::from_f64(4e180);
        let p = a * b;
        assert_relative_eq!(p.mantissa(), 1.2, max_relative = 1e-13);
        assert_eq!(p.exponent(), 381);
        let q = p / b;
        close(q, a, 1e-13);
        assert!(p.as_f64().is_infinite());
    }

    #[test]
    fn addition_aligns_and_cancels() {
        let one = ScaledReal::one();
        assert_eq!((one + one).as_f64(), 2.0);
        let big = ScaledReal::from_f64(1e20);
        close(big + one, big, 1e-14);
        assert!((one - one).is_zero());
        let x = ScaledReal::from_f64(7.25e-3);
        assert!((x + (-x)).is_zero());
        assert_relative_eq!(
            (ScaledReal::from_f64(1.5) + ScaledReal::from_f64(-0.25)).as_f64(),
            1.25
        );
        // far-apart addends leave the larger untouched
        let tiny = ScaledReal::from_f64(1e-30);
        assert_eq!(one + tiny, one);
    }

    #[test]
    fn ordering_follows_sign_then_magnitude() {
        let vals = [-3e5, -1.0, 0.0, 2e-8, 1.0, 9.0, 10.0, 3e5];
        for (i, &x) in vals.iter().enumerate() {
            for (j, &y) in vals.iter().enumerate() {
                let (sx, sy) = (ScaledReal::from_f64(x), ScaledReal::from_f64(y));
                assert_eq!(
                    sx.partial_cmp(&sy),
                    i.partial_cmp(&j),
                    "{x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn exp_constructor_matches_ln() {
        assert_eq!(ScaledReal::from_exp(0.0), ScaledReal::one());
        let ten = ScaledReal::from_exp(LN_10);
        assert_relative_eq!(ten.as_f64(), 10.0, max_relative = 1e-14);
        let huge = ScaledReal::from_exp(1000.0);
        assert_eq!(huge.exponent(), 434);
        assert_relative_eq!(huge.ln(), 1000.0, max_relative = 1e-13);
        let e40 = ScaledReal::from_exp(40.0);
        assert_relative_eq!(e40.as_f64(), 40f64.exp(), max_relative = 1e-13);
    }

    #[test]
    fn powers_by_squaring() {
        assert_relative_eq!(ScaledReal::from_f64(2.0).powi(10).as_f64(), 1024.0);
        assert_eq!(ScaledReal::from_f64(10.0).powi(300).exponent(), 300);
        let half = ScaledReal::from_f64(2.0).powi(-1);
        assert_relative_eq!(half.as_f64(), 0.5);
        assert_eq!(ScaledReal::from_f64(7.0).powi(0), ScaledReal::one());
        let big = ScaledReal::from_f64(3.0).powi(1000);
        assert_relative_eq!(big.ln(), 1000.0 * 3f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn factorials_beyond_f64() {
        assert_eq!(factorial_scaled(0), ScaledReal::one());
        assert_relative_eq!(factorial_scaled(10).as_f64(), 3628800.0, max_relative = 1e-13);
        let f200 = factorial_scaled(200);
        assert_eq!(f200.exponent(), 374);
        assert_relative_eq!(f200.mantissa(), 7.886578673647905, max_relative = 1e-12);

        assert_eq!(double_factorial_scaled(0), ScaledReal::one());
        assert_eq!(double_factorial_scaled(1), ScaledReal::one());
        assert_relative_eq!(double_factorial_scaled(7).as_f64(), 105.0, max_relative = 1e-14);
        assert_relative_eq!(double_factorial_scaled(8).as_f64(), 384.0, max_relative = 1e-14);
        // (2k)!! = 2^k k!
        let lhs = double_factorial_scaled(240);
        let rhs = ScaledReal::from_f64(2.0).powi(120) * factorial_scaled(120);
        close(lhs, rhs, 1e-12);
        // (2k+1)!! = (2k+1)! / (2^k k!)
        let lhs = double_factorial_scaled(241);
        let rhs = factorial_scaled(241) / (ScaledReal::from_f64(2.0).powi(120) * factorial_scaled(120));
        close(lhs, rhs, 1e-12);
    }

    #[test]
    fn sinh_tracks_native_then_exponential() {
        for &x in &[0.0, 1e-8, 0.5, 3.0, 100.0, 699.0] {
            assert_relative_eq!(sinh_scaled(x).as_f64(), x.sinh(), max_relative = 1e-13);
        }
        assert!(sinh_scaled(0.0).is_zero());
        let s = sinh_scaled(800.0);
        assert_relative_eq!(s.ln(), 800.0 - std::f64::consts::LN_2, max_relative = 1e-13);
        // continuity across the switch point
        let below = sinh_scaled(699.9999);
        let above = sinh_scaled(700.0001);
        close(below, above, 1e-3);
    }

    #[test]
    fn display_formats_sign_mantissa_exponent() {
        assert_eq!(format!("{}", ScaledReal::zero()), "0");
        let s = format!("{}", ScaledReal::from_f64(-250.0));
        assert!(s.starts_with("-2.50") && s.ends_with("e2"), "{s}");
        let t = format!("{}", ScaledReal::from_f64(0.02));
        assert!(t.ends_with("e-2"), "{t}");
    }
}
