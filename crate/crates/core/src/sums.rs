//! `S_L(Q) = sum over q != 0 in the box of prod_i 1/||L_i q||`, its dyadic
//! upper bound, the envelope expressions and the empirical profile of
//! `prod_j max(1, |q_j|) prod_i ||L_i q||`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::counting::{count_m_direct, for_each_in_box, CountInstance};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, SystemMatrix};
use crate::numerics::{row_value, BigFloat, RealScalar};

/// Extra bits carried by the row entries over the working precision.
const GUARD_BITS: u32 = 64;

struct RowEval {
    rows: Vec<Vec<BigFloat>>,
    mags: Vec<Vec<f64>>,
    prec: u32,
}

impl RowEval {
    fn new(l: &SystemMatrix, prec: u32) -> Self {
        let p = prec + GUARD_BITS;
        let rows = l.rows().iter().map(|r| r.iter().map(|x| x.to_bigfloat(p)).collect()).collect();
        let mags = l.rows().iter().map(|r| r.iter().map(|x| libm::fabs(x.to_f64())).collect()).collect();
        RowEval { rows, mags, prec }
    }

    /// `||L_i q||`, or `None` when it is zero or too small to certify.
    fn dist(&self, l: &SystemMatrix, i: usize, q: &[i64]) -> Option<BigFloat> {
        let p = self.prec + GUARD_BITS;
        let mut v = BigFloat::zero(p);
        for (a, &b) in self.rows[i].iter().zip(q) {
            if b != 0 {
                v = v.add(&a.mul_i64(b));
            }
        }
        let d = v.sub(&BigFloat::from_bigint(&v.round(), p)).abs();
        let mag: f64 = self.mags[i].iter().zip(q).map(|(a, &b)| a * libm::fabs(b as f64)).sum::<f64>() + 1.0;
        // a few ulps of the entries times the size of the sum
        let err_log2 = libm::ceil(libm::log2(mag)) as i64 + 8 - p as i64;
        if d.is_zero() || d.top() <= err_log2 + 2 {
            // too close to an integer for the float path
            if let Ok(exact) = row_value(l.row(i), q) {
                let e = exact.dist_to_nearest_int();
                if e.is_exact_zero() {
                    return None;
                }
                return Some(e.to_bigfloat(p));
            }
            return None;
        }
        Some(d)
    }
}

#[derive(Clone, Debug)]
pub struct SumReport {
    pub q: Vec<RealScalar>,
    pub value: BigFloat,
    pub terms: u64,
}

/// Partial sum over `q_1` in `first`, in lexicographic order of `q`.
pub fn sum_reciprocals_chunk(
    l: &SystemMatrix,
    q: &BoxSpec,
    first: RangeInclusive<i64>,
    prec: u32,
) -> Result<(BigFloat, u64)> {
    let ev = RowEval::new(l, prec);
    let p = prec + GUARD_BITS;
    let mut total = BigFloat::zero(p);
    let mut terms = 0u64;
    let mut err = None;
    for_each_in_box(&q.int_bounds(), first, |qv| {
        if err.is_some() || qv.iter().all(|&x| x == 0) {
            return;
        }
        let mut prod = BigFloat::from_i64(1, p);
        for i in 0..l.m() {
            match ev.dist(l, i, qv) {
                Some(d) => prod = prod.mul(&d),
                None => {
                    err = Some(Error::DivisionByZero { row: i, q: qv.to_vec() });
                    return;
                }
            }
        }
        total = total.add(&prod.recip());
        terms += 1;
    });
    match err {
        Some(e) => Err(e),
        None => Ok((total, terms)),
    }
}

pub fn sum_reciprocals(l: &SystemMatrix, q: &BoxSpec, budget: u64, prec: u32) -> Result<SumReport> {
    if l.n() != q.n() {
        return Err(Error::Dimension("box and matrix disagree".into()));
    }
    let size: f64 = q.int_bounds().iter().map(|&b| 2.0 * b as f64 + 1.0).product();
    if size > budget as f64 {
        return Err(Error::BudgetExceeded { budget });
    }
    let b = q.int_bounds()[0];
    let (value, terms) = sum_reciprocals_chunk(l, q, -b..=b, prec)?;
    Ok(SumReport { q: q.sides().to_vec(), value: value.with_prec(prec), terms })
}

/// Exact value of `S_L(Q)` when all rows share one quadratic field.
pub fn sum_reciprocals_exact(l: &SystemMatrix, q: &BoxSpec) -> Result<RealScalar> {
    let mut total = RealScalar::int(0);
    let mut err = None;
    let b = q.int_bounds()[0];
    for_each_in_box(&q.int_bounds(), -b..=b, |qv| {
        if err.is_some() || qv.iter().all(|&x| x == 0) {
            return;
        }
        let step = || -> Result<RealScalar> {
            let mut prod = RealScalar::int(1);
            for i in 0..l.m() {
                let d = row_value(l.row(i), qv)?.dist_to_nearest_int();
                if d.is_exact_zero() {
                    return Err(Error::DivisionByZero { row: i, q: qv.to_vec() });
                }
                prod = prod.mul_exact(&d)?;
            }
            prod.recip()
        };
        match step().and_then(|t| total.add_exact(&t)) {
            Ok(v) => total = v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

#[derive(Clone, Debug)]
pub struct DyadicReport {
    /// Last index `k` of the truncated sum.
    pub k_max: i64,
    /// `#M(L, 2^-k, 1/2, Q)` for `k = 0..=k_max`.
    pub counts: Vec<u64>,
    pub value: BigInt,
}

/// `sum_{k=0}^{floor(log2(Q^N/phi))} 2^(k+1) #M(L, 2^-k, 1/2, Q)`.
pub fn dyadic_upper(
    l: &SystemMatrix,
    q: &BoxSpec,
    phi_at_q: &RealScalar,
    budget: u64,
    prec: u32,
) -> Result<DyadicReport> {
    if q.q_geo(prec).lt(&RealScalar::int(2)) {
        return Err(Error::PrecondViolation("dyadic bound needs Q >= 2".into()));
    }
    if phi_at_q.signum() <= 0 {
        return Err(Error::Domain("phi must be positive".into()));
    }
    let vol = q.product();
    // largest k with 2^k phi <= Q^N
    let mut k_max: i64 = -1;
    let mut pow = phi_at_q.clone();
    while pow.le(&vol) {
        k_max += 1;
        pow = pow.mul_int(2);
    }
    let mut counts = Vec::new();
    let mut value = BigInt::zero();
    for k in 0..=k_max {
        let eps = RealScalar::int(1).div(&RealScalar::bigint(BigInt::one() << k as u64))?;
        let inst = CountInstance::new(l.clone(), eps, RealScalar::ratio(1, 2), q.clone())?;
        let c = count_m_direct(&inst, budget, prec)?;
        value += BigInt::from(c) << (k as u64 + 1);
        counts.push(c);
    }
    Ok(DyadicReport { k_max, counts, value })
}

/// `(Q^N log(Q)^M, Q^N log(Q/phi)^M + Q^N/phi log(Q/phi)^(M-1))` with `Q` the
/// geometric mean of the sides.
pub fn envelope(m: usize, q: &BoxSpec, phi_at_q: &RealScalar, prec: u32) -> Result<(BigFloat, BigFloat)> {
    let p = prec + 32;
    let q_geo = q.q_geo(p).to_bigfloat(p);
    if q_geo.cmp_value(&BigFloat::from_i64(2, p)) == Ordering::Less {
        return Err(Error::PrecondViolation("envelope needs Q >= 2".into()));
    }
    if phi_at_q.signum() <= 0 {
        return Err(Error::Domain("phi must be positive".into()));
    }
    let vol = q.product().to_bigfloat(p);
    let phi = phi_at_q.to_bigfloat(p);
    let m = m as i64;
    let lower = vol.mul(&q_geo.ln().powi(m));
    let lq = q_geo.div(&phi).ln();
    let upper = vol.mul(&lq.powi(m)).add(&vol.div(&phi).mul(&lq.powi(m - 1)));
    Ok((lower.with_prec(prec), upper.with_prec(prec)))
}

#[derive(Clone, Debug)]
pub struct PhiProfile {
    pub grid: Vec<RealScalar>,
    pub values: Vec<RealScalar>,
    pub argmin: Vec<Vec<i64>>,
}

/// `prod_j max(1, |q_j|)`.
pub fn weight(q: &[i64]) -> u64 {
    q.iter().map(|&x| x.unsigned_abs().max(1)).product()
}

/// Calls `f` on each `q != 0` with `weight(q) <= w_max` whose first nonzero
/// coordinate is positive, in lexicographic order.
pub fn for_each_weighted(n: usize, w_max: u64, mut f: impl FnMut(&[i64])) {
    fn rec(j: usize, rem: u64, q: &mut Vec<i64>, lead_zero: bool, f: &mut dyn FnMut(&[i64])) {
        if j == q.len() {
            if !lead_zero {
                f(q);
            }
            return;
        }
        let b = rem as i64;
        let lo = if lead_zero { 0 } else { -b };
        for v in lo..=b {
            q[j] = v;
            let w = v.unsigned_abs().max(1);
            rec(j + 1, rem / w, q, lead_zero && v == 0, f);
        }
        q[j] = 0;
    }
    let mut q = vec![0i64; n];
    rec(0, w_max, &mut q, true, &mut f);
}

/// Running minimum of `weight(q) prod_i ||L_i q||` over `weight(q) <= X^N`.
pub fn phi_profile(l: &SystemMatrix, grid: &[RealScalar], budget: u64, prec: u32) -> Result<PhiProfile> {
    let n = l.n();
    if grid.is_empty() {
        return Err(Error::Domain("empty height grid".into()));
    }
    if grid.windows(2).any(|w| w[1].lt(&w[0])) {
        return Err(Error::Domain("height grid must be ascending".into()));
    }
    if grid[0].lt(&RealScalar::int(1)) {
        return Err(Error::Domain("heights must be at least 1".into()));
    }
    let caps: Vec<u64> = grid
        .iter()
        .map(|x| {
            let mut pw = RealScalar::int(1);
            for _ in 0..n {
                pw = pw.mul(x);
            }
            pw.floor().to_u64().ok_or_else(|| Error::Domain("height too large".into()))
        })
        .collect::<Result<_>>()?;
    let w_max = *caps.last().unwrap();
    let est = 2.0 * w_max as f64 * libm::pow(2.0 + 2.0 * libm::log(w_max as f64 + 1.0), n as f64 - 1.0);
    if est > budget as f64 {
        return Err(Error::BudgetExceeded { budget });
    }
    let ev = RowEval::new(l, prec);
    let p = prec + GUARD_BITS;
    let mut pts: Vec<(u64, Vec<i64>, BigFloat)> = Vec::new();
    let mut err = None;
    for_each_weighted(n, w_max, |q| {
        if err.is_some() {
            return;
        }
        let mut v = BigFloat::from_i64(weight(q) as i64, p);
        for i in 0..l.m() {
            match ev.dist(l, i, q) {
                Some(d) => v = v.mul(&d),
                None => {
                    err = Some(Error::DivisionByZero { row: i, q: q.to_vec() });
                    return;
                }
            }
        }
        pts.push((weight(q), q.to_vec(), v));
    });
    if let Some(e) = err {
        return Err(e);
    }
    // stable sort keeps lexicographic order among equal weights
    pts.sort_by_key(|t| t.0);
    let mut values = Vec::with_capacity(grid.len());
    let mut argmin = Vec::with_capacity(grid.len());
    let mut best: Option<(Vec<i64>, BigFloat)> = None;
    let mut it = pts.into_iter().peekable();
    for &cap in &caps {
        while let Some((w, _, _)) = it.peek() {
            if *w > cap {
                break;
            }
            let (_, q, v) = it.next().unwrap();
            let better = match &best {
                None => true,
                Some((bq, bv)) => match v.cmp_value(bv) {
                    Ordering::Less => true,
                    Ordering::Equal => refine_less(l, &q, bq, p),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((q, v));
            }
        }
        let (q, v) = best.clone().ok_or_else(|| Error::Domain("no admissible q".into()))?;
        values.push(exact_profile_value(l, &q).unwrap_or(RealScalar::Approx(v.with_prec(prec))));
        argmin.push(q);
    }
    Ok(PhiProfile { grid: grid.to_vec(), values, argmin })
}

/// Tie-break between equal float values using exact arithmetic when possible.
fn refine_less(l: &SystemMatrix, a: &[i64], b: &[i64], _p: u32) -> bool {
    match (exact_profile_value(l, a), exact_profile_value(l, b)) {
        (Some(x), Some(y)) => x.lt(&y),
        _ => false,
    }
}

/// `weight(q) prod_i ||L_i q||` in exact arithmetic, when the rows allow it.
pub fn exact_profile_value(l: &SystemMatrix, q: &[i64]) -> Option<RealScalar> {
    let mut v = RealScalar::int(weight(q) as i64);
    for i in 0..l.m() {
        let d = row_value(l.row(i), q).ok()?.dist_to_nearest_int();
        v = v.mul_exact(&d).ok()?;
    }
    Some(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxShape {
    /// `(Q, ..., Q)`.
    Sym,
    /// `(Q^N, 1, ..., 1)`.
    Skew,
    /// `(1, ..., 1, Q^N)`.
    ReverseSkew,
}

impl BoxShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(BoxShape::Sym),
            "skew" => Ok(BoxShape::Skew),
            "rskew" | "reverse-skew" => Ok(BoxShape::ReverseSkew),
            _ => Err(Error::Parse(format!("unknown box shape '{s}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoxShape::Sym => "sym",
            BoxShape::Skew => "skew",
            BoxShape::ReverseSkew => "rskew",
        }
    }

    /// Integer sides with geometric mean `q_geo`.
    pub fn sides(&self, q_geo: i64, n: usize) -> Vec<i64> {
        let vol = q_geo.pow(n as u32);
        match self {
            BoxShape::Sym => vec![q_geo; n],
            BoxShape::Skew => {
                let mut v = vec![1; n];
                v[0] = vol;
                v
            }
            BoxShape::ReverseSkew => {
                let mut v = vec![1; n];
                v[n - 1] = vol;
                v
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub q: Vec<i64>,
    pub q_geo: f64,
    pub shape: String,
    pub s: BigFloat,
    pub phi: RealScalar,
    pub lower: BigFloat,
    pub upper: BigFloat,
    pub dyadic: BigInt,
    pub dyadic_k_max: i64,
    pub c_low: f64,
    pub c_up: f64,
}

impl SweepRow {
    /// `S <= dyadic`, decided exactly against the integer bound.
    pub fn dyadic_dominates(&self) -> bool {
        let d = BigFloat::from_bigint(&self.dyadic, self.s.prec());
        self.s.cmp_value(&d) != Ordering::Greater
    }
}

/// One sweep point: the sum, `phi` from the profile at `X = Q`, both
/// envelopes and the dyadic bound.
pub fn sweep_point(l: &SystemMatrix, sides: &[i64], shape: &str, budget: u64, prec: u32) -> Result<SweepRow> {
    let q = BoxSpec::new(sides.iter().map(|&x| RealScalar::int(x)).collect())?;
    let q_geo = q.q_geo(prec);
    let prof = phi_profile(l, core::slice::from_ref(&q_geo), budget, prec)?;
    let phi = prof.values[0].clone();
    let sum = sum_reciprocals(l, &q, budget, prec)?;
    let (lower, upper) = envelope(l.m(), &q, &phi, prec)?;
    let dy = dyadic_upper(l, &q, &phi, budget, prec)?;
    let c_low = sum.value.div(&lower).to_f64();
    let c_up = sum.value.div(&upper).to_f64();
    Ok(SweepRow {
        q: sides.to_vec(),
        q_geo: q_geo.to_f64(),
        shape: shape.into(),
        s: sum.value,
        phi,
        lower,
        upper,
        dyadic: dy.value,
        dyadic_k_max: dy.k_max,
        c_low,
        c_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::DEFAULT_BUDGET;
    use crate::numerics::{parse_matrix, DecimalMode, QuadSurd, DEFAULT_PRECISION};

    const P: u32 = DEFAULT_PRECISION;

    fn mat(s: &str) -> SystemMatrix {
        SystemMatrix::new(parse_matrix(s, DecimalMode::Exact).unwrap()).unwrap()
    }

    fn box1(q: i64) -> BoxSpec {
        BoxSpec::new(vec![RealScalar::int(q)]).unwrap()
    }

    fn dist(x: f64) -> f64 {
        libm::fabs(x - libm::round(x))
    }

    #[test]
    fn sqrt2_unit_box_is_exact() {
        let l = mat("sqrt(2)");
        let exact = sum_reciprocals_exact(&l, &box1(1)).unwrap();
        // 2 / (sqrt 2 - 1) = 2 sqrt 2 + 2
        let two = BigInt::from(2);
        assert_eq!(exact.as_exact().unwrap(), &QuadSurd::new(two.clone(), two, BigInt::one(), 2));
        let f = sum_reciprocals(&l, &box1(1), DEFAULT_BUDGET, P).unwrap();
        assert!((f.value.to_f64() - 4.828_427_124_746_19).abs() < 1e-14);
    }

    #[test]
    fn sqrt2_ten_matches_brute_force() {
        let l = mat("sqrt(2)");
        let oracle: f64 = (1..=10).map(|q| 2.0 / dist(q as f64 * core::f64::consts::SQRT_2)).sum();
        let f = sum_reciprocals(&l, &box1(10), DEFAULT_BUDGET, P).unwrap();
        assert!((f.value.to_f64() - oracle).abs() < 1e-10 * oracle);
        let e = sum_reciprocals_exact(&l, &box1(10)).unwrap();
        assert!(e.to_bigfloat(P).sub(&f.value).abs().to_f64() < 1e-40);
        assert_eq!(f.terms, 20);
    }

    #[test]
    fn chunked_sum_is_order_independent_in_value() {
        let l = mat("sqrt(2),sqrt(3)");
        let q = BoxSpec::new(vec![RealScalar::int(6), RealScalar::int(4)]).unwrap();
        let full = sum_reciprocals(&l, &q, DEFAULT_BUDGET, P).unwrap().value;
        let mut acc = BigFloat::zero(P + GUARD_BITS);
        for r in [-6..=-2, -1..=3, 4..=6] {
            acc = acc.add(&sum_reciprocals_chunk(&l, &q, r, P).unwrap().0);
        }
        assert!(acc.sub(&full).abs().to_f64() < 1e-45 * full.to_f64());
    }

    #[test]
    fn unit_box_has_eight_terms() {
        let l = mat("sqrt(2),sqrt(3)");
        let q = BoxSpec::new(vec![RealScalar::int(1), RealScalar::int(1)]).unwrap();
        assert_eq!(sum_reciprocals(&l, &q, DEFAULT_BUDGET, P).unwrap().terms, 8);
    }

    #[test]
    fn rational_row_hits_zero() {
        let l = mat("1/3");
        let e = sum_reciprocals(&l, &box1(3), DEFAULT_BUDGET, P).unwrap_err();
        assert!(matches!(e, Error::DivisionByZero { row: 0, ref q } if q == &vec![-3]));
    }

    #[test]
    fn golden_profile() {
        let l = mat("golden");
        let grid: Vec<RealScalar> = [1, 10, 100, 10000].iter().map(|&x| RealScalar::int(x)).collect();
        let prof = phi_profile(&l, &grid, DEFAULT_BUDGET, P).unwrap();
        let expect = RealScalar::Exact(QuadSurd::new(BigInt::from(3), BigInt::from(-1), BigInt::from(2), 5));
        for (v, q) in prof.values.iter().zip(&prof.argmin) {
            assert_eq!(v.cmp(&expect), Ordering::Equal);
            assert_eq!(q, &vec![1]);
        }
    }

    #[test]
    fn sqrt2_profile_running_min() {
        let l = mat("sqrt(2)");
        let grid: Vec<RealScalar> = [1, 2, 10, 100, 1000, 10000].iter().map(|&x| RealScalar::int(x)).collect();
        let prof = phi_profile(&l, &grid, DEFAULT_BUDGET, P).unwrap();
        // brute-force oracle in doubles
        for (x, v) in [1i64, 2, 10, 100, 1000, 10000].iter().zip(&prof.values) {
            let m = (1..=*x).map(|q| q as f64 * dist(q as f64 * core::f64::consts::SQRT_2)).fold(f64::MAX, f64::min);
            assert!((v.to_f64() - m).abs() < 1e-12);
            assert!(v.to_f64() >= 0.34);
        }
        assert!((prof.values[1].to_f64() - 0.343145750507619).abs() < 1e-14);
        assert_eq!(prof.argmin[1], vec![2]);
        assert!(prof.values.windows(2).all(|w| w[1].le(&w[0])));
    }

    #[test]
    fn weighted_enumeration() {
        let mut n = 0;
        for_each_weighted(2, 2, |q| {
            assert!(weight(q) <= 2);
            n += 1;
        });
        // half of the 2-D weighted box: (0,1),(0,2),(1,*)x5,(2,-1..1)x3
        assert_eq!(n, 10);
    }

    #[test]
    fn envelope_example() {
        let (lo, up) = envelope(1, &box1(4), &RealScalar::ratio(2, 5), P).unwrap();
        assert!((lo.to_f64() - 4.0 * libm::log(4.0)).abs() < 1e-12);
        assert!((up.to_f64() - (4.0 * libm::log(10.0) + 10.0)).abs() < 1e-12);
        // phi = 1
        let (_, up) = envelope(2, &box1(4), &RealScalar::int(1), P).unwrap();
        let lq = libm::log(4.0);
        assert!((up.to_f64() - (4.0 * lq * lq + 4.0 * lq)).abs() < 1e-12);
    }

    #[test]
    fn golden_dyadic_truncation() {
        let l = mat("golden");
        let phi = RealScalar::Exact(QuadSurd::new(BigInt::from(3), BigInt::from(-1), BigInt::from(2), 5));
        let d = dyadic_upper(&l, &box1(8), &phi, DEFAULT_BUDGET, P).unwrap();
        assert_eq!(d.k_max, 4);
        let s = sum_reciprocals(&l, &box1(8), DEFAULT_BUDGET, P).unwrap();
        assert!(s.value.cmp_value(&BigFloat::from_bigint(&d.value, P)).is_le());
        // one step past the truncation, eps Q / phi < 1 and the set is empty
        let inst = CountInstance::new(l, RealScalar::ratio(1, 32), RealScalar::ratio(1, 2), box1(8)).unwrap();
        assert_eq!(count_m_direct(&inst, DEFAULT_BUDGET, P).unwrap(), 0);
    }

    #[test]
    fn shapes() {
        assert_eq!(BoxShape::Sym.sides(4, 2), vec![4, 4]);
        assert_eq!(BoxShape::Skew.sides(4, 2), vec![16, 1]);
        assert_eq!(BoxShape::parse("rskew").unwrap().sides(4, 2), vec![1, 16]);
        assert!(BoxShape::parse("round").is_err());
    }
}
