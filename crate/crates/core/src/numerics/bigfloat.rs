//! Binary floating point with a BigInt mantissa.
//!
//! Values are `mant * 2^exp` with `|mant| < 2^prec`. Every operation rounds to
//! nearest and sets `inexact` when information was lost; the flag is sticky
//! through later operations.

use core::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const DEFAULT_PRECISION: u32 = 192;
pub const MIN_PRECISION: u32 = 128;

#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
    inexact: bool,
}

fn bits(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// Shift right by `k` bits with round-half-even. Returns (result, lost_bits).
fn shr_round(x: &BigInt, k: u64) -> (BigInt, bool) {
    if k == 0 {
        return (x.clone(), false);
    }
    let neg = x.is_negative();
    let mag = x.abs();
    let q: BigInt = &mag >> k;
    let rem: BigInt = &mag - (&q << k);
    if rem.is_zero() {
        let q = if neg { -q } else { q };
        return (q, false);
    }
    let half: BigInt = BigInt::one() << (k - 1);
    let q = match rem.cmp(&half) {
        Ordering::Greater => q + 1,
        Ordering::Less => q,
        Ordering::Equal => {
            if q.is_odd() {
                q + 1
            } else {
                q
            }
        }
    };
    (if neg { -q } else { q }, true)
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { mant: BigInt::zero(), exp: 0, prec, inexact: false }
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        Self::from_parts(n.clone(), 0, prec, false)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_bigint(&BigInt::from(n), prec)
    }

    /// Nearest value to `num / den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::from_bigint(num, prec + 8).div(&Self::from_bigint(den, prec + 8)).with_prec(prec)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "non-finite input");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let (m, e) = libm::frexp(x);
        let scaled = libm::ldexp(m, 53) as i64;
        Self::from_parts(BigInt::from(scaled), e as i64 - 53, prec, false)
    }

    /// Builds `mant * 2^exp` and rounds to `prec` bits.
    pub fn from_parts(mant: BigInt, exp: i64, prec: u32, inexact: bool) -> Self {
        let mut r = BigFloat { mant, exp, prec, inexact };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let b = bits(&self.mant);
        if b > self.prec as i64 {
            let k = (b - self.prec as i64) as u64;
            let (m, lost) = shr_round(&self.mant, k);
            self.mant = m;
            self.exp += k as i64;
            self.inexact |= lost;
            // rounding may carry into a new bit
            if bits(&self.mant) > self.prec as i64 {
                let (m, lost) = shr_round(&self.mant, 1);
                self.mant = m;
                self.exp += 1;
                self.inexact |= lost;
            }
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_inexact(&self) -> bool {
        self.inexact
    }

    pub fn mark_inexact(mut self) -> Self {
        self.inexact = true;
        self
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::from_parts(self.mant.clone(), self.exp, prec, self.inexact)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Position of the leading bit: `2^(top-1) <= |x| < 2^top`.
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN / 4
        } else {
            self.exp + bits(&self.mant)
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mant: -&self.mant, exp: self.exp, prec: self.prec, inexact: self.inexact }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mant: self.mant.abs(), exp: self.exp, prec: self.prec, inexact: self.inexact }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        let inexact = self.inexact || other.inexact;
        if self.is_zero() {
            return other.with_prec(prec).set_inexact(inexact);
        }
        if other.is_zero() {
            return self.with_prec(prec).set_inexact(inexact);
        }
        // Drop an operand that lies entirely below the rounding position.
        let gap = prec as i64 + 4;
        if other.top() + gap < self.exp.min(self.top() - gap) {
            return self.with_prec(prec).set_inexact(true);
        }
        if self.top() + gap < other.exp.min(other.top() - gap) {
            return other.with_prec(prec).set_inexact(true);
        }
        let e = self.exp.min(other.exp);
        let a: BigInt = &self.mant << (self.exp - e) as u64;
        let b: BigInt = &other.mant << (other.exp - e) as u64;
        Self::from_parts(a + b, e, prec, inexact)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        Self::from_parts(&self.mant * &other.mant, self.exp + other.exp, prec, self.inexact || other.inexact)
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Self::zero(prec).set_inexact(self.inexact || other.inexact);
        }
        let shift = (prec as i64 + 2 + bits(&other.mant) - bits(&self.mant)).max(0) as u64;
        let num: BigInt = &self.mant << shift;
        let (q, r) = num.div_rem(&other.mant);
        // A sticky bit keeps round-half-even honest for the discarded remainder.
        let (q, lost) = if r.is_zero() {
            (q, false)
        } else {
            let s = if (r.is_negative()) != (other.mant.is_negative()) { -1 } else { 1 };
            ((q << 1u32) + s, true)
        };
        let extra = if lost { 1 } else { 0 };
        Self::from_parts(q, self.exp - shift as i64 - other.exp - extra, prec, self.inexact || other.inexact || lost)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Self::from_parts(&self.mant * k, self.exp, self.prec, self.inexact)
    }

    /// Multiplies by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        BigFloat {
            mant: self.mant.clone(),
            exp: if self.is_zero() { 0 } else { self.exp + k },
            prec: self.prec,
            inexact: self.inexact,
        }
    }

    pub fn recip(&self) -> Self {
        BigFloat::from_i64(1, self.prec).div(self)
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.signum() >= 0, "sqrt of negative value");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec;
        let mut e = self.exp;
        let mut m = self.mant.clone();
        // want mantissa with >= 2*prec+2 bits and even exponent
        let want = 2 * prec as i64 + 4;
        let mut sh = (want - bits(&m)).max(0);
        if (e - sh) % 2 != 0 {
            sh += 1;
        }
        m <<= sh as u64;
        e -= sh;
        let r = m.sqrt();
        let exact = &r * &r == m;
        let (r, lost) = if exact { (r, false) } else { ((r << 1u32) + 1, true) };
        let re = e / 2 - if lost { 1 } else { 0 };
        Self::from_parts(r, re, prec, self.inexact || lost)
    }

    fn set_inexact(mut self, flag: bool) -> Self {
        self.inexact |= flag;
        self
    }

    /// Exact comparison of the represented values.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            let o = ta.cmp(&tb);
            return if sa > 0 { o } else { o.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a: BigInt = &self.mant << (self.exp - e) as u64;
        let b: BigInt = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            let d = BigInt::one() << (-self.exp) as u64;
            self.mant.div_floor(&d)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Nearest integer, halves rounded up.
    pub fn round(&self) -> BigInt {
        self.add(&BigFloat::from_parts(BigInt::one(), -1, self.prec.max(8), false)).floor()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = bits(&self.mant);
        let (m, e) = if b > 60 {
            let (m, _) = shr_round(&self.mant, (b - 60) as u64);
            (m, self.exp + b - 60)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_i64().unwrap() as f64;
        if e > 2000 {
            return if mf > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if e < -2200 {
            return 0.0;
        }
        libm::ldexp(mf, e as i32)
    }

    // -------- transcendental functions (fixed point internally) --------

    /// Fixed-point value `round(x * 2^w)`.
    fn to_fixed(&self, w: u64) -> BigInt {
        let sh = self.exp + w as i64;
        if sh >= 0 {
            &self.mant << sh as u64
        } else {
            shr_round(&self.mant, (-sh) as u64).0
        }
    }

    fn from_fixed(x: BigInt, w: u64, prec: u32) -> Self {
        Self::from_parts(x, -(w as i64), prec, true)
    }

    pub fn ln2(prec: u32) -> Self {
        let w = prec as u64 + 32;
        Self::from_fixed(ln2_fixed(w), w, prec)
    }

    pub fn pi(prec: u32) -> Self {
        let w = prec as u64 + 32;
        let a = atan_inv_fixed(5, w);
        let b = atan_inv_fixed(239, w);
        Self::from_fixed(a * 16 - b * 4, w, prec)
    }

    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return Self::from_i64(1, prec).set_inexact(self.inexact);
        }
        // x = k ln2 + r
        let top = self.top().max(0) as u64;
        let w = prec as u64 + 40 + top;
        let ln2 = ln2_fixed(w);
        let xf = self.to_fixed(w);
        let half = &ln2 >> 1u32;
        let k = (&xf + &half).div_floor(&ln2);
        let r = &xf - &k * &ln2;
        // scale r down by 2^s, Taylor series, then square back
        let s: u64 = 12;
        let w2 = w + s;
        let one = BigInt::one() << w2;
        // the same integer read at w2 bits is r / 2^s
        let rs = r;
        let mut term = one.clone();
        let mut sum = one.clone();
        let mut n = 1u64;
        loop {
            term = (&term * &rs) >> w2;
            term /= n;
            if term.is_zero() {
                break;
            }
            sum += &term;
            n += 1;
        }
        for _ in 0..s {
            sum = (&sum * &sum) >> w2;
        }
        let kk = k.to_i64().expect("exponent overflow");
        Self::from_parts(sum, kk - w2 as i64, prec, true)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        assert!(self.signum() > 0, "log of non-positive value");
        let prec = self.prec;
        // x = m * 2^e with m in [1/sqrt2, sqrt2)
        let w = prec as u64 + 40;
        let mut e = self.top() - 1;
        let m = self.ldexp(-e).with_prec(prec + 40);
        let mut mf = m.to_fixed(w);
        let one = BigInt::one() << w;
        // sqrt(2) threshold
        let sqrt2: BigInt = (BigInt::from(2u32) << (2 * w)).sqrt();
        if mf > sqrt2 {
            mf >>= 1u32;
            e += 1;
        }
        if mf == one && e == 0 {
            return Self::zero(prec).set_inexact(self.inexact);
        }
        // ln m = 2 atanh((m-1)/(m+1))
        let z = ((&mf - &one) << w) / (&mf + &one);
        let z2 = (&z * &z) >> w;
        let mut term = z.clone();
        let mut sum = z;
        let mut n = 1u64;
        loop {
            term = (&term * &z2) >> w;
            n += 2;
            let t = &term / n;
            if t.is_zero() {
                break;
            }
            sum += t;
        }
        let lnm = sum << 1u32;
        let total = lnm + ln2_fixed(w) * e;
        Self::from_fixed(total, w, prec)
    }

    /// `x^y` for positive `x`.
    pub fn pow(&self, y: &Self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prec.max(y.prec);
        let hi = self.with_prec(p + 32);
        hi.ln().mul(&y.with_prec(p + 32)).exp().with_prec(p)
    }

    /// `x^n` for integer `n` (exact rounding per multiplication).
    pub fn powi(&self, n: i64) -> Self {
        let mut base = self.with_prec(self.prec + 16);
        let mut acc = Self::from_i64(1, self.prec + 16);
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        let r = if n < 0 { acc.recip() } else { acc };
        r.with_prec(self.prec)
    }

    /// Positive real `n`-th root.
    pub fn root(&self, n: u32) -> Self {
        assert!(n > 0);
        if n == 1 || self.is_zero() {
            return self.clone();
        }
        if n == 2 {
            return self.sqrt();
        }
        let p = self.prec;
        let y = BigFloat::from_ratio(&BigInt::one(), &BigInt::from(n), p + 32);
        self.with_prec(p + 32).pow(&y).with_prec(p)
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

fn ln2_fixed(w: u64) -> BigInt {
    // ln 2 = sum_{k>=1} 1 / (k 2^k)
    let w2 = w + 16;
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    loop {
        let t: BigInt = (BigInt::one() << (w2 - k.min(w2))) / k;
        if t.is_zero() {
            break;
        }
        sum += t;
        k += 1;
    }
    shr_round(&sum, 16).0
}

/// atan(1/k) in fixed point.
fn atan_inv_fixed(k: u64, w: u64) -> BigInt {
    let w2 = w + 16;
    let k2 = BigInt::from(k * k);
    let mut power: BigInt = (BigInt::one() << w2) / k;
    let mut sum = power.clone();
    let mut n = 1u64;
    let mut sign = -1i32;
    loop {
        power /= &k2;
        n += 2;
        let t = &power / n;
        if t.is_zero() {
            break;
        }
        if sign < 0 {
            sum -= t;
        } else {
            sum += t;
        }
        sign = -sign;
    }
    shr_round(&sum, 16).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn bf(x: f64) -> BigFloat {
        BigFloat::from_f64(x, DEFAULT_PRECISION)
    }

    #[test]
    fn arithmetic_matches_f64() {
        let a = bf(1.75);
        let b = bf(-0.3125);
        assert_eq!(a.add(&b).to_f64(), 1.4375);
        assert_eq!(a.mul(&b).to_f64(), -0.546875);
        assert!(!a.mul(&b).is_inexact());
        let q = a.div(&bf(3.0));
        assert!(q.is_inexact());
        assert!((q.to_f64() - 1.75 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn sqrt_two_digits() {
        let s = bf(2.0).sqrt();
        // square back to within the last couple of bits
        let err = s.mul(&s).sub(&bf(2.0)).abs();
        assert!(err.top() < -185);
        assert!(bf(9.0).sqrt() == bf(3.0));
        assert!(!bf(9.0).sqrt().is_inexact());
    }

    #[test]
    fn constants() {
        assert!((BigFloat::pi(DEFAULT_PRECISION).to_f64() - core::f64::consts::PI).abs() < 1e-15);
        assert!((BigFloat::ln2(DEFAULT_PRECISION).to_f64() - core::f64::consts::LN_2).abs() < 1e-16);
        // 256-bit pi against its known decimal expansion (first 40 digits)
        let pi = BigFloat::pi(256);
        let scaled = pi.mul(&BigFloat::from_bigint(&BigInt::from(10u32).pow(39), 256)).floor();
        assert_eq!(scaled.to_string(), "3141592653589793238462643383279502884197");
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[0.5, 1.0, 2.0, 10.0, 1e-5, 123.456] {
            let v = bf(x);
            let back = v.ln().exp();
            let rel = back.sub(&v).abs().div(&v);
            assert!(rel.is_zero() || rel.top() < -170, "x={x}");
            assert!((v.ln().to_f64() - libm::log(x)).abs() < 1e-14);
        }
        assert!((bf(-3.5).exp().to_f64() - libm::exp(-3.5)).abs() < 1e-16);
        assert!((bf(1.0).exp().to_f64() - core::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn roots_and_powers() {
        let r = bf(8.0).root(3);
        assert!((r.to_f64() - 2.0).abs() < 1e-30_f64.max(1e-16));
        assert_eq!(bf(3.0).powi(4).to_f64(), 81.0);
        assert!((bf(2.0).powi(-2).to_f64() - 0.25).abs() < 1e-18);
        assert!((bf(2.0).pow(&bf(0.5)).to_f64() - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn floor_and_round() {
        assert_eq!(bf(-2.5).floor(), BigInt::from(-3));
        assert_eq!(bf(-2.5).ceil(), BigInt::from(-2));
        assert_eq!(bf(2.5).round(), BigInt::from(3));
        assert_eq!(bf(2.4999).round(), BigInt::from(2));
        assert_eq!(bf(7.0).floor(), BigInt::from(7));
    }

    #[test]
    fn comparison_is_exact() {
        let a = bf(1.0);
        let b = a.add(&bf(1.0).ldexp(-150));
        assert_eq!(a.cmp_value(&b), Ordering::Less);
        assert_eq!(bf(-1.0).cmp_value(&bf(-2.0)), Ordering::Greater);
    }
}
