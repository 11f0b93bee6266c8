//! Exact elements of a real quadratic field, `(a + b*sqrt(d)) / c`.

use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::bigfloat::BigFloat;

/// `(a + b*sqrt(d)) / c` with `c > 0` and `gcd(a, b, c) = 1`.
///
/// `d` is squarefree and greater than one whenever `b != 0`. Rationals are
/// stored with `b = 0, d = 1` and combine with any field.
#[derive(Clone, Debug)]
pub struct QuadSurd {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

/// Sign of `a + b*sqrt(d)` for `d > 0` not a perfect square (or `b = 0`).
pub fn surd_sign(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.sign_i32();
    let sb = b.sign_i32();
    if sb == 0 {
        return sa.cmp(&0);
    }
    if sa == 0 {
        return sb.cmp(&0);
    }
    if sa == sb {
        return sa.cmp(&0);
    }
    // opposite signs: compare a^2 with b^2 d
    let lhs = a * a;
    let rhs = b * b * BigInt::from(d);
    let o = lhs.cmp(&rhs);
    if sa > 0 {
        o
    } else {
        o.reverse()
    }
}

trait SignI32 {
    fn sign_i32(&self) -> i32;
}

impl SignI32 for BigInt {
    fn sign_i32(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// Splits `n = s^2 * f` with `f` squarefree; returns `(s, f)`.
pub fn square_part(mut n: u64) -> (u64, u64) {
    assert!(n > 0);
    let mut s = 1u64;
    let mut f = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= p;
        }
        if e % 2 == 1 {
            f *= p;
        }
        p += 1;
    }
    (s, f * n)
}

impl QuadSurd {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        if b.is_zero() || d == 1 {
            let a = if d == 1 { a + b } else { a };
            return Self::normalize(a, BigInt::zero(), c, 1);
        }
        assert!(d > 0, "negative radicand");
        let (s, f) = square_part(d);
        let b = b * BigInt::from(s);
        if f == 1 {
            return Self::normalize(a + b, BigInt::zero(), c, 1);
        }
        Self::normalize(a, b, c, f)
    }

    fn normalize(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: u64) -> Self {
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        if b.is_zero() {
            d = 1;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadSurd { a, b, c, d }
    }

    pub fn from_int(n: i64) -> Self {
        Self::normalize(BigInt::from(n), BigInt::zero(), BigInt::one(), 1)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::normalize(n, BigInt::zero(), BigInt::one(), 1)
    }

    pub fn from_ratio(n: BigInt, m: BigInt) -> Self {
        Self::normalize(n, BigInt::zero(), m, 1)
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_ratio(r.numer().clone(), r.denom().clone())
    }

    /// `sqrt(n)` for a non-negative integer.
    pub fn sqrt_int(n: u64) -> Self {
        if n == 0 {
            return Self::from_int(0);
        }
        Self::new(BigInt::zero(), BigInt::one(), BigInt::one(), n)
    }

    /// The golden ratio `(1 + sqrt(5)) / 2`.
    pub fn golden() -> Self {
        Self::new(BigInt::one(), BigInt::one(), BigInt::from(2), 5)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Whether the two values live in a common quadratic field.
    pub fn compatible(&self, other: &Self) -> bool {
        self.d == other.d || self.is_rational() || other.is_rational()
    }

    fn field(&self, other: &Self) -> u64 {
        if self.is_rational() {
            other.d
        } else {
            self.d
        }
    }

    pub fn sign(&self) -> Ordering {
        surd_sign(&self.a, &self.b, self.d)
    }

    pub fn neg(&self) -> Self {
        QuadSurd { a: -&self.a, b: -&self.b, c: self.c.clone(), d: self.d }
    }

    pub fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Sum, or `None` when the fields differ.
    pub fn add(&self, o: &Self) -> Option<Self> {
        if !self.compatible(o) {
            return None;
        }
        let d = self.field(o);
        if self.c == o.c {
            return Some(Self::normalize(&self.a + &o.a, &self.b + &o.b, self.c.clone(), d));
        }
        let a = &self.a * &o.c + &o.a * &self.c;
        let b = &self.b * &o.c + &o.b * &self.c;
        Some(Self::normalize(a, b, &self.c * &o.c, d))
    }

    pub fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Option<Self> {
        if !self.compatible(o) {
            return None;
        }
        let d = self.field(o);
        let a = &self.a * &o.a + &self.b * &o.b * BigInt::from(d);
        let b = &self.a * &o.b + &self.b * &o.a;
        Some(Self::normalize(a, b, &self.c * &o.c, d))
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::normalize(&self.a * k, &self.b * k, self.c.clone(), self.d)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // c / (a + b r) = c (a - b r) / (a^2 - b^2 d)
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        Some(Self::normalize(&self.c * &self.a, -(&self.c * &self.b), norm, self.d))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        self.mul(&o.recip()?)
    }

    /// Exact comparison, or `None` across fields.
    pub fn cmp_exact(&self, o: &Self) -> Option<Ordering> {
        Some(self.sub(o)?.sign())
    }

    /// `floor` of the value.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.div_floor(&self.c);
        }
        // b sqrt(d) = sign(b) sqrt(b^2 d); its floor
        let r2 = &self.b * &self.b * BigInt::from(self.d);
        let s = r2.sqrt();
        let bsd_floor = if self.b.is_positive() { s } else { -s - 1 };
        let mut n = (&self.a + bsd_floor).div_floor(&self.c);
        // adjust until n <= x < n+1
        loop {
            let below = surd_sign(&(&self.a - &n * &self.c), &self.b, self.d);
            if below == Ordering::Less {
                n -= 1;
                continue;
            }
            let above = surd_sign(&(&self.a - (&n + 1) * &self.c), &self.b, self.d);
            if above != Ordering::Less {
                n += 1;
                continue;
            }
            return n;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Nearest integer with halves rounded down, so the distance is in `[0, 1/2]`.
    pub fn nearest_int(&self) -> BigInt {
        let n = self.floor();
        // frac > 1/2  <=>  2(a - n c) - c + 2 b sqrt(d) > 0
        let two = BigInt::from(2);
        let lhs = (&self.a - &n * &self.c) * &two - &self.c;
        if surd_sign(&lhs, &(&self.b * &two), self.d) == Ordering::Greater {
            n + 1
        } else {
            n
        }
    }

    /// Distance to the nearest integer, exactly.
    pub fn dist_to_nearest_int(&self) -> Self {
        let n = self.nearest_int();
        let diff = Self::normalize(&self.a - &n * &self.c, self.b.clone(), self.c.clone(), self.d);
        diff.abs()
    }

    pub fn to_bigfloat(&self, prec: u32) -> BigFloat {
        let p = prec + 16;
        let mut v = BigFloat::from_bigint(&self.a, p);
        if !self.b.is_zero() {
            let r = BigFloat::from_i64(self.d as i64, p + 32).sqrt();
            v = v.add(&r.mul(&BigFloat::from_bigint(&self.b, p + 32)));
        }
        v.div(&BigFloat::from_bigint(&self.c, p)).with_prec(prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_bigfloat(80).to_f64()
    }
}

impl core::fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.b.is_zero() {
            if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            }
        } else {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            let babs = self.b.abs();
            if self.c.is_one() {
                write!(f, "{}{}{}*sqrt({})", self.a, sign, babs, self.d)
            } else {
                write!(f, "({}{}{}*sqrt({}))/{}", self.a, sign, babs, self.d, self.c)
            }
        }
    }
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c && self.d == other.d
    }
}
impl Eq for QuadSurd {}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: u64) -> QuadSurd {
        QuadSurd::new(BigInt::from(a), BigInt::from(b), BigInt::from(c), d)
    }

    #[test]
    fn sign_cases() {
        let s = |a: i64, b: i64, d| surd_sign(&BigInt::from(a), &BigInt::from(b), d);
        assert_eq!(s(0, 0, 2), Ordering::Equal);
        assert_eq!(s(3, -2, 2), Ordering::Greater); // 9 > 8
        assert_eq!(s(-3, 2, 2), Ordering::Less);
        assert_eq!(s(1, -1, 2), Ordering::Less);
        assert_eq!(s(-1, 1, 2), Ordering::Greater);
        assert_eq!(s(-5, -1, 3), Ordering::Less);
        assert_eq!(s(0, 7, 11), Ordering::Greater);
    }

    #[test]
    fn normalization() {
        let x = q(2, 4, 6, 8); // (2 + 8 sqrt 2)/6 = (1 + 4 sqrt 2)/3
        assert_eq!(
            (x.a().clone(), x.b().clone(), x.c().clone(), x.d()),
            (BigInt::from(1), BigInt::from(4), BigInt::from(3), 2)
        );
        assert!(q(1, 1, 1, 4).is_rational()); // 1 + 2
        assert_eq!(q(1, 1, 1, 4), QuadSurd::from_int(3));
        assert_eq!(q(1, 2, -2, 3), q(-1, -2, 2, 3));
    }

    #[test]
    fn field_arithmetic() {
        let r2 = QuadSurd::sqrt_int(2);
        assert_eq!(r2.mul(&r2).unwrap(), QuadSurd::from_int(2));
        let g = QuadSurd::golden();
        // g^2 = g + 1
        assert_eq!(g.mul(&g).unwrap(), g.add(&QuadSurd::from_int(1)).unwrap());
        assert_eq!(g.mul(&g.recip().unwrap()).unwrap(), QuadSurd::from_int(1));
        assert!(r2.add(&QuadSurd::sqrt_int(3)).is_none());
        assert!(r2.add(&QuadSurd::from_int(5)).is_some());
    }

    #[test]
    fn floor_and_distance() {
        let r2 = QuadSurd::sqrt_int(2);
        assert_eq!(r2.floor(), BigInt::from(1));
        assert_eq!(r2.neg().floor(), BigInt::from(-2));
        // ||sqrt 2|| = sqrt 2 - 1
        assert_eq!(r2.dist_to_nearest_int(), q(-1, 1, 1, 2));
        // ||2 sqrt 2|| = 3 - 2 sqrt 2
        assert_eq!(r2.mul_int(&BigInt::from(2)).dist_to_nearest_int(), q(3, -2, 1, 2));
        assert_eq!(
            QuadSurd::from_ratio(BigInt::from(7), BigInt::from(2)).dist_to_nearest_int(),
            QuadSurd::from_ratio(BigInt::from(1), BigInt::from(2))
        );
        let g = QuadSurd::golden();
        assert!((g.dist_to_nearest_int().to_f64() - 0.3819660112501051).abs() < 1e-15);
    }

    #[test]
    fn floor_matches_float_on_many_values() {
        for a in -30i64..30 {
            for b in [-7i64, -3, -1, 1, 2, 5] {
                for c in [1i64, 2, 3, 7] {
                    for d in [2u64, 3, 5, 7] {
                        let x = q(a, b, c, d);
                        let f = (a as f64 + b as f64 * (d as f64).sqrt()) / c as f64;
                        assert_eq!(x.floor(), BigInt::from(f.floor() as i64));
                        let dist = x.dist_to_nearest_int().to_f64();
                        assert!((dist - (f - f.round()).abs()).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn square_parts() {
        assert_eq!(square_part(8), (2, 2));
        assert_eq!(square_part(12), (2, 3));
        assert_eq!(square_part(49), (7, 1));
        assert_eq!(square_part(30), (1, 30));
    }
}
