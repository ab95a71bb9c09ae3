//! Double-double arithmetic.
//!
//! A [`Dd`] is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 32 significant decimal digits. Interpolatory weights on nodes that
//! are not arcsine-distributed are exponentially sensitive to the nodes, so node
//! generation and the weight solve are carried out in this type.
//!
//! Error-free transforms follow Dekker and Knuth; multiplication uses a fused
//! multiply-add for the exact product residual.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Builds a value from two components, renormalising them.
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest `f64`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::ZERO
            } else {
                Dd::from_f64(f64::NAN)
            };
        }
        // One Newton step from the f64 root doubles the number of correct digits.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let residual = self - Dd::from_f64(ax).sqr();
        let (hi, lo) = two_sum(ax, residual.hi * (x * 0.5));
        Dd { hi, lo }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = (self.hi / std::f64::consts::FRAC_PI_2).round();
        let r = self - Dd::FRAC_PI_2 * k;
        let (s, c) = sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn powi(self, mut e: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }
}

/// Taylor series for `|r| <= pi/4`.
fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
    let r2 = r.sqr();
    let eps = 1e-35;

    let mut sin = r;
    let mut term = r;
    let mut k = 1.0;
    loop {
        term = -(term * r2) / ((k + 1.0) * (k + 2.0));
        sin += term;
        k += 2.0;
        if term.hi.abs() < eps {
            break;
        }
    }

    let mut cos = Dd::ONE;
    let mut term = Dd::ONE;
    let mut k = 0.0;
    loop {
        term = -(term * r2) / ((k + 1.0) * (k + 2.0));
        cos += term;
        k += 2.0;
        if term.hi.abs() < eps {
            break;
        }
    }
    (sin, cos)
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl From<Dd> for f64 {
    fn from(x: Dd) -> f64 {
        x.to_f64()
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let f = f - e + self.lo;
        let q2 = (s + f) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

/// Complex number over [`Dd`]; only what the Joukowski map needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub fn new(re: Dd, im: Dd) -> Self {
        DdComplex { re, im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    pub fn norm(self) -> Dd {
        self.norm_sqr().sqrt()
    }

    pub fn recip(self) -> Self {
        let d = self.norm_sqr();
        DdComplex::new(self.re / d, -self.im / d)
    }

    /// Principal square root.
    pub fn sqrt(self) -> Self {
        if self.im.hi() == 0.0 && self.im.lo() == 0.0 {
            return if self.re.hi() >= 0.0 {
                DdComplex::new(self.re.sqrt(), Dd::ZERO)
            } else {
                DdComplex::new(Dd::ZERO, (-self.re).sqrt())
            };
        }
        let r = self.norm();
        let u = ((r + self.re) * 0.5).sqrt();
        let v = ((r - self.re) * 0.5).sqrt();
        if self.im.hi() >= 0.0 {
            DdComplex::new(u, v)
        } else {
            DdComplex::new(u, -v)
        }
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, b: DdComplex) -> DdComplex {
        DdComplex::new(self.re + b.re, self.im + b.im)
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, b: DdComplex) -> DdComplex {
        DdComplex::new(
            self.re * b.re - self.im * b.im,
            self.re * b.im + self.im * b.re,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_carries_extra_digits() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * 3.0 - 1.0;
        assert!(back.to_f64().abs() < 1e-31);
        // 1 + 2^-80 survives in the low word.
        let tiny = 2f64.powi(-80);
        let x = Dd::ONE + tiny;
        assert_eq!((x - 1.0).to_f64(), tiny);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = Dd::from_f64(2.0).sqrt();
        assert!((r.sqr() - 2.0).to_f64().abs() < 1e-31);
    }

    #[test]
    fn trig_identities_hold_to_double_double_precision() {
        for &(p, q) in &[
            (1.0, 7.0),
            (3.0, 128.0),
            (127.0, 128.0),
            (1.0, 3.0),
            (5.0, 4.0),
        ] {
            let a = Dd::PI * p / q;
            let (s, c) = a.sin_cos();
            assert!((s.sqr() + c.sqr() - 1.0).to_f64().abs() < 1e-30);
            assert!((s.to_f64() - a.to_f64().sin()).abs() < 1e-15);
            assert!((c.to_f64() - a.to_f64().cos()).abs() < 1e-15);
        }
        // cos(pi/3) = 1/2 exactly.
        let c = (Dd::PI / 3.0).cos();
        assert!((c - 0.5).to_f64().abs() < 1e-31);
        // sin(pi/6) = 1/2.
        let s = (Dd::PI / 6.0).sin();
        assert!((s - 0.5).to_f64().abs() < 1e-31);
    }

    #[test]
    fn complex_sqrt_squares_back() {
        let z = DdComplex::new(Dd::from_f64(-3.0), Dd::from_f64(4.0));
        let r = z.sqrt();
        let back = r * r;
        assert!((back.re + 3.0).to_f64().abs() < 1e-30);
        assert!((back.im - 4.0).to_f64().abs() < 1e-30);
        assert!(r.re.hi() > 0.0);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let x = Dd::from_f64(1.1);
        let mut acc = Dd::ONE;
        for _ in 0..13 {
            acc *= x;
        }
        assert!((x.powi(13) - acc).to_f64().abs() < 1e-29);
    }
}
