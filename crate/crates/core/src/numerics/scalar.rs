//! Real scalars: exact quadratic surds where possible, big floats otherwise.

use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::bigfloat::{BigFloat, DEFAULT_PRECISION, MIN_PRECISION};
use super::surd::QuadSurd;
use crate::error::{Error, Result};

/// Rejects precisions below the supported minimum.
pub fn check_precision(bits: u32) -> Result<u32> {
    if bits < MIN_PRECISION {
        return Err(Error::Domain(alloc::format!("precision {bits} below minimum {MIN_PRECISION}")));
    }
    Ok(bits)
}

/// Magnitude below which a float coordinate counts as zero.
pub const ZERO_THRESHOLD_LOG2: i64 = -100;

#[derive(Clone, Debug)]
pub enum RealScalar {
    Exact(QuadSurd),
    Approx(BigFloat),
}

use RealScalar::{Approx, Exact};

impl RealScalar {
    pub fn int(n: i64) -> Self {
        Exact(QuadSurd::from_int(n))
    }

    pub fn bigint(n: BigInt) -> Self {
        Exact(QuadSurd::from_bigint(n))
    }

    pub fn ratio(n: i64, m: i64) -> Self {
        Exact(QuadSurd::from_ratio(BigInt::from(n), BigInt::from(m)))
    }

    pub fn sqrt_int(n: u64) -> Self {
        Exact(QuadSurd::sqrt_int(n))
    }

    pub fn golden() -> Self {
        Exact(QuadSurd::golden())
    }

    pub fn float(x: BigFloat) -> Self {
        Approx(x)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        Approx(BigFloat::from_f64(x, prec))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Exact(_))
    }

    pub fn as_exact(&self) -> Option<&QuadSurd> {
        match self {
            Exact(q) => Some(q),
            Approx(_) => None,
        }
    }

    /// True when a float result lost information to rounding.
    pub fn is_rounded(&self) -> bool {
        match self {
            Exact(_) => false,
            Approx(f) => f.is_inexact(),
        }
    }

    fn prec_hint(&self, other: &Self) -> u32 {
        match (self, other) {
            (Approx(a), Approx(b)) => a.prec().max(b.prec()),
            (Approx(a), _) | (_, Approx(a)) => a.prec(),
            _ => DEFAULT_PRECISION,
        }
    }

    pub fn to_bigfloat(&self, prec: u32) -> BigFloat {
        match self {
            Exact(q) => q.to_bigfloat(prec),
            Approx(f) => f.with_prec(prec),
        }
    }

    pub fn to_float(&self) -> BigFloat {
        match self {
            Exact(q) => q.to_bigfloat(DEFAULT_PRECISION),
            Approx(f) => f.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exact(q) => q.to_f64(),
            Approx(f) => f.to_f64(),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Exact(q) => Exact(q.neg()),
            Approx(f) => Approx(f.neg()),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Exact(q) => Exact(q.abs()),
            Approx(f) => Approx(f.abs()),
        }
    }

    fn binop(
        &self,
        o: &Self,
        exact: impl Fn(&QuadSurd, &QuadSurd) -> Option<QuadSurd>,
        float: impl Fn(&BigFloat, &BigFloat) -> BigFloat,
    ) -> Self {
        if let (Exact(a), Exact(b)) = (self, o) {
            if let Some(r) = exact(a, b) {
                return Exact(r);
            }
        }
        let p = self.prec_hint(o);
        Approx(float(&self.to_bigfloat(p), &o.to_bigfloat(p)))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a.add(b), |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a.sub(b), |a, b| a.sub(b))
    }

    pub fn mul(&self, o: &Self) -> Self {
        // exact zero absorbs anything
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::int(0);
        }
        self.binop(o, |a, b| a.mul(b), |a, b| a.mul(b))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        match self {
            Exact(q) => Exact(q.mul_int(&BigInt::from(k))),
            Approx(f) => Approx(f.mul_i64(k)),
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_exact_zero() || matches!(o, Approx(f) if f.is_zero()) {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self.binop(o, |a, b| a.div(b), |a, b| a.div(b)))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::int(1).div(self)
    }

    /// Sum that must stay exact.
    pub fn add_exact(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Exact(a), Exact(b)) => a.add(b).map(Exact).ok_or(Error::MixedField),
            _ => Err(Error::MixedField),
        }
    }

    pub fn mul_exact(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Exact(a), Exact(b)) => a.mul(b).map(Exact).ok_or(Error::MixedField),
            _ => Err(Error::MixedField),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        match self {
            Exact(q) => q.is_zero(),
            Approx(f) => f.is_zero() && !f.is_inexact(),
        }
    }

    /// Zero test used for supports. Floats below `2^-100` count as zero;
    /// the second component reports whether the threshold was needed.
    pub fn is_zero_thresholded(&self) -> (bool, bool) {
        match self {
            Exact(q) => (q.is_zero(), false),
            Approx(f) => {
                if f.is_zero() {
                    (true, f.is_inexact())
                } else if f.top() <= ZERO_THRESHOLD_LOG2 {
                    (true, true)
                } else {
                    (false, false)
                }
            }
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Exact(q) => match q.sign() {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            },
            Approx(f) => f.signum(),
        }
    }

    /// Exact when both sides share a field; float comparison otherwise.
    pub fn cmp(&self, o: &Self) -> Ordering {
        if let (Exact(a), Exact(b)) = (self, o) {
            if let Some(r) = a.cmp_exact(b) {
                return r;
            }
        }
        let p = self.prec_hint(o);
        self.to_bigfloat(p).cmp_value(&o.to_bigfloat(p))
    }

    pub fn lt(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Less
    }

    pub fn le(&self, o: &Self) -> bool {
        self.cmp(o) != Ordering::Greater
    }

    pub fn floor(&self) -> BigInt {
        match self {
            Exact(q) => q.floor(),
            Approx(f) => f.floor(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match self {
            Exact(q) => q.ceil(),
            Approx(f) => f.ceil(),
        }
    }

    pub fn nearest_int(&self) -> BigInt {
        match self {
            Exact(q) => q.nearest_int(),
            Approx(f) => f.round(),
        }
    }

    /// `||x||`, in `[0, 1/2]`.
    pub fn dist_to_nearest_int(&self) -> Self {
        match self {
            Exact(q) => Exact(q.dist_to_nearest_int()),
            Approx(f) => {
                let n = f.round();
                Approx(f.sub(&BigFloat::from_bigint(&n, f.prec())).abs())
            }
        }
    }

    /// Square root; exact when the radicand is a rational whose
    /// numerator times denominator fits a machine word.
    pub fn sqrt(&self) -> Self {
        if let Exact(q) = self {
            if let Some(r) = q.to_rational() {
                assert!(!r.is_negative(), "sqrt of negative value");
                let prod = r.numer() * r.denom();
                if let Some(n) = prod.to_u64() {
                    // sqrt(p/q) = sqrt(p q) / q
                    let s = QuadSurd::sqrt_int(n);
                    return Exact(s.div(&QuadSurd::from_bigint(r.denom().clone())).unwrap());
                }
            }
        }
        Approx(self.to_float().sqrt())
    }

    /// Rational value, if exactly rational.
    pub fn to_rational(&self) -> Option<num_rational::BigRational> {
        self.as_exact().and_then(|q| q.to_rational())
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == 0
    }
}

impl From<QuadSurd> for RealScalar {
    fn from(q: QuadSurd) -> Self {
        Exact(q)
    }
}

impl From<BigFloat> for RealScalar {
    fn from(f: BigFloat) -> Self {
        Approx(f)
    }
}

impl core::fmt::Display for RealScalar {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Exact(q) => write!(f, "{q}"),
            Approx(x) => write!(f, "{:e}", x.to_f64()),
        }
    }
}

/// `sum_j row_j q_j`, exact. Fails with `MixedField` when the row does not
/// live in a single quadratic field.
pub fn row_value(row: &[RealScalar], q: &[i64]) -> Result<RealScalar> {
    if row.len() != q.len() {
        return Err(Error::Dimension(alloc::format!("row of length {} against q of length {}", row.len(), q.len())));
    }
    let mut acc = RealScalar::int(0);
    for (l, &qj) in row.iter().zip(q) {
        if qj == 0 {
            continue;
        }
        acc = acc.add_exact(&l.mul_int(qj))?;
    }
    Ok(acc)
}

/// `sum_j row_j q_j`, exact when possible and a float otherwise.
pub fn row_value_any(row: &[RealScalar], q: &[i64], prec: u32) -> RealScalar {
    match row_value(row, q) {
        Ok(v) => v,
        Err(_) => {
            let p = prec + 32;
            let mut acc = BigFloat::zero(p);
            for (l, &qj) in row.iter().zip(q) {
                acc = acc.add(&l.to_bigfloat(p).mul_i64(qj));
            }
            Approx(acc.with_prec(p - 32))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_value_exact_and_mixed() {
        let row = [RealScalar::sqrt_int(2), RealScalar::ratio(1, 3)];
        let v = row_value(&row, &[3, 3]).unwrap();
        assert!(v.is_exact());
        assert!((v.to_f64() - (3.0 * 2f64.sqrt() + 1.0)).abs() < 1e-14);
        let mixed = [RealScalar::sqrt_int(2), RealScalar::sqrt_int(3)];
        assert_eq!(row_value(&mixed, &[1, 1]).unwrap_err(), Error::MixedField);
        let v = row_value_any(&mixed, &[1, 1], DEFAULT_PRECISION);
        assert!(!v.is_exact());
        assert!((v.to_f64() - (2f64.sqrt() + 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn exact_sqrt_of_rationals() {
        let half = RealScalar::ratio(1, 2);
        let s = half.sqrt();
        assert!(s.is_exact());
        assert_eq!(s.mul(&s).cmp(&half), Ordering::Equal);
        assert!(RealScalar::int(9).sqrt().to_rational().is_some());
    }

    #[test]
    fn mixed_comparison_falls_back_to_floats() {
        let a = RealScalar::sqrt_int(2);
        let b = RealScalar::sqrt_int(3);
        assert_eq!(a.cmp(&b), Ordering::Less);
        assert!(a.add(&b).to_f64() > 3.1);
    }

    #[test]
    fn distances() {
        let x = RealScalar::golden().mul_int(2);
        assert!((x.dist_to_nearest_int().to_f64() - (libm::sqrt(5.0) - 2.0)).abs() < 1e-15);
        let f = RealScalar::from_f64(2.75, DEFAULT_PRECISION);
        assert_eq!(f.dist_to_nearest_int().to_f64(), 0.25);
    }

    #[test]
    fn precision_floor() {
        assert!(check_precision(64).is_err());
        assert_eq!(check_precision(256).unwrap(), 256);
    }
}
