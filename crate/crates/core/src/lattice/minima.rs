//! Successive minima by enumeration, and the Minkowski sandwich.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::basis::LatticeBasis;
use super::reduce::{enumerate_outside, gram_schmidt, lll};
use crate::error::{Error, Result};
use crate::numerics::{BigFloat, RealScalar};

pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug)]
pub struct MinimaReport {
    pub lambdas: Vec<RealScalar>,
    pub lambda_sq: Vec<RealScalar>,
    pub witnesses: Vec<Vec<RealScalar>>,
    /// Integer coefficients of each witness in the input basis.
    pub coefficients: Vec<Vec<i64>>,
    /// Squared radius of the final search, i.e. `lambda_n^2`.
    pub radius_sq: RealScalar,
    pub nodes: u64,
}

pub fn norm_sq(v: &[RealScalar]) -> RealScalar {
    v.iter().fold(RealScalar::int(0), |acc, x| acc.add(&x.mul(x)))
}

/// Incremental rank test over the rationals.
pub struct RankTracker {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl RankTracker {
    pub fn new() -> Self {
        RankTracker { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `z` if it is independent of the vectors seen so far.
    pub fn insert(&mut self, z: &[i64]) -> bool {
        let mut v: Vec<BigRational> = z.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = &v[*p] / &row[*p];
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &f * y;
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

impl Default for RankTracker {
    fn default() -> Self {
        Self::new()
    }
}

fn canonical_sign(z: &mut [i64]) {
    if let Some(&first) = z.iter().find(|&&x| x != 0) {
        if first < 0 {
            for x in z.iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn lex_cmp(a: &[i64], b: &[i64]) -> Ordering {
    a.cmp(b)
}

fn overflow() -> Error {
    Error::InvariantViolation("coefficient overflow in the minima search".into())
}

/// Replaces columns `i`, `j` of `u` by `u M^{-T}` where `M` is the unimodular
/// column operation `[[x, -bg], [y, ag]]` applied to the coefficient rows.
fn combine(u: &mut [Vec<i64>], i: usize, j: usize, (ag, bg): (i64, i64), (x, y): (i64, i64)) -> Result<()> {
    for r in 0..u[i].len() {
        let (ui, uj) = (u[i][r], u[j][r]);
        let ni = ag.checked_mul(ui).and_then(|p| bg.checked_mul(uj).and_then(|q| p.checked_add(q)));
        let nj = x.checked_mul(uj).and_then(|p| y.checked_mul(ui).and_then(|q| p.checked_sub(q)));
        u[i][r] = ni.ok_or_else(overflow)?;
        u[j][r] = nj.ok_or_else(overflow)?;
    }
    Ok(())
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i64, 0i64, 0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// A unimodular basis (as coefficient columns) whose first `rows.len()`
/// columns span the integer points of the rational span of `rows`.
///
/// Column operations bring the rows to `[H | 0]`; the same operations,
/// inverse-transposed, are applied to the identity.
fn completion(rows: &[Vec<i64>], n: usize) -> Result<Vec<Vec<i64>>> {
    let mut a: Vec<Vec<i64>> = rows.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|k| (0..n).map(|i| i64::from(i == k)).collect()).collect();
    for (p, _) in rows.iter().enumerate() {
        for j in p + 1..n {
            let (x0, y0) = (a[p][p], a[p][j]);
            if y0 == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(x0, y0);
            let (ag, bg) = (x0 / g, y0 / g);
            for row in a.iter_mut() {
                let (ci, cj) = (row[p], row[j]);
                let ni = x.checked_mul(ci).and_then(|q| y.checked_mul(cj).and_then(|r| q.checked_add(r)));
                let nj = ag.checked_mul(cj).and_then(|q| bg.checked_mul(ci).and_then(|r| q.checked_sub(r)));
                row[p] = ni.ok_or_else(overflow)?;
                row[j] = nj.ok_or_else(overflow)?;
            }
            combine(&mut u, p, j, (ag, bg), (x, y))?;
        }
        if a[p][p] == 0 {
            return Err(Error::InvariantViolation("dependent witnesses in the minima search".into()));
        }
    }
    Ok(u)
}

fn apply(u: &[Vec<i64>], t: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = u[0].len();
    t.iter()
        .map(|c| {
            let mut z = alloc::vec![0i64; n];
            for (k, &ck) in c.iter().enumerate() {
                if ck == 0 {
                    continue;
                }
                for i in 0..n {
                    z[i] = ck.checked_mul(u[k][i]).and_then(|p| z[i].checked_add(p)).ok_or_else(overflow)?;
                }
            }
            Ok(z)
        })
        .collect()
}

/// LLL on the first `s` columns, then on the projections of the rest
/// orthogonal to them.
fn reduce_blocks(basis: &LatticeBasis, u: Vec<Vec<i64>>, s: usize) -> Result<Vec<Vec<i64>>> {
    let as_f64 = |u: &[Vec<i64>]| -> Vec<Vec<f64>> {
        u.iter().map(|z| basis.lattice_vector(z).iter().map(|x| x.to_f64()).collect()).collect()
    };
    let (head, tail) = u.split_at(s);
    let mut out = if s > 0 { apply(head, &lll(&as_f64(head)))? } else { Vec::new() };
    if tail.is_empty() {
        return Ok(out);
    }
    let mut proj = as_f64(tail);
    if s > 0 {
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for v in as_f64(&out) {
            let mut w = v;
            for o in &ortho {
                let m = dot(&w, o) / dot(o, o);
                w.iter_mut().zip(o).for_each(|(x, y)| *x -= m * y);
            }
            ortho.push(w);
        }
        for v in proj.iter_mut() {
            for o in &ortho {
                let m = dot(v, o) / dot(o, o);
                v.iter_mut().zip(o).for_each(|(x, y)| *x -= m * y);
            }
        }
    }
    out.extend(apply(tail, &lll(&proj))?);
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact successive minima. Witnesses with equal norm are ordered by their
/// coefficient vectors, each normalized to have a positive first nonzero entry.
///
/// Step `s` searches for the shortest vector outside the span of the first
/// `s` witnesses, in a basis whose leading block spans that sublattice.
pub fn successive_minima(basis: &LatticeBasis, max_nodes: u64) -> Result<MinimaReport> {
    let n = basis.dim();
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {n} exceeds the enumeration cap {MAX_DIM}")));
    }
    let slack = 1e-6;
    let mut chosen: Vec<(RealScalar, Vec<i64>)> = Vec::with_capacity(n);
    let mut nodes = 0u64;
    for s in 0..n {
        let rows: Vec<Vec<i64>> = chosen.iter().map(|c| c.1.clone()).collect();
        let u = reduce_blocks(basis, completion(&rows, n)?, s)?;
        let cols: Vec<Vec<f64>> =
            u.iter().map(|z| basis.lattice_vector(z).iter().map(|x| x.to_f64()).collect()).collect();
        let gs = gram_schmidt(&cols);
        let r0 = cols[s..].iter().map(|v| dot(v, v)).fold(f64::INFINITY, f64::min);
        let e = enumerate_outside(&gs, s, r0 * (1.0 + slack) + f64::MIN_POSITIVE, slack, max_nodes, nodes)
            .ok_or(Error::BudgetExceeded { budget: max_nodes })?;
        nodes = e.nodes;
        let mut best: Option<(RealScalar, Vec<i64>)> = None;
        for (y, _) in &e.points {
            let mut z = apply(&u, core::slice::from_ref(y))?.pop().expect("one column");
            canonical_sign(&mut z);
            let nsq = norm_sq(&basis.lattice_vector(&z));
            let better = match &best {
                None => true,
                Some((b, bz)) => nsq.cmp(b).then_with(|| lex_cmp(&z, bz)) == Ordering::Less,
            };
            if better {
                best = Some((nsq, z));
            }
        }
        let pick =
            best.ok_or_else(|| Error::InvariantViolation("no lattice vector found outside the sublattice".into()))?;
        chosen.push(pick);
    }
    let mut report = MinimaReport {
        lambdas: Vec::new(),
        lambda_sq: Vec::new(),
        witnesses: Vec::new(),
        coefficients: Vec::new(),
        radius_sq: RealScalar::int(0),
        nodes,
    };
    for (nsq, z) in chosen {
        report.lambdas.push(nsq.sqrt());
        report.witnesses.push(basis.lattice_vector(&z));
        report.lambda_sq.push(nsq);
        report.coefficients.push(z);
    }
    report.radius_sq = report.lambda_sq.last().cloned().unwrap_or(RealScalar::int(0));
    Ok(report)
}

/// Volume of the Euclidean unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize, prec: u32) -> BigFloat {
    let pi = BigFloat::pi(prec + 16);
    let fact = |k: usize| (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let v = if n.is_multiple_of(2) {
        let h = n / 2;
        pi.powi(h as i64).div(&BigFloat::from_bigint(&fact(h), prec + 16))
    } else {
        let h = (n - 1) / 2;
        let num = BigFloat::from_bigint(&(BigInt::from(2).pow(n as u32) * fact(h)), prec + 16);
        pi.powi(h as i64).mul(&num).div(&BigFloat::from_bigint(&fact(n), prec + 16))
    };
    v.with_prec(prec)
}

/// `(lambda_1 ... lambda_n) vol(B^n) / (2^n |det|)`, which must lie in `[1/n!, 1]`.
pub fn minkowski_check(report: &MinimaReport, det: &RealScalar, prec: u32) -> Result<BigFloat> {
    let n = report.lambdas.len();
    let p = prec + 32;
    let prod = report.lambdas.iter().fold(BigFloat::from_i64(1, p), |acc, l| acc.mul(&l.to_bigfloat(p)));
    let r = prod.mul(&unit_ball_volume(n, p)).div(&det.abs().to_bigfloat(p)).ldexp(-(n as i64));
    let slack = BigFloat::from_i64(1, p).ldexp(-100);
    let one = BigFloat::from_i64(1, p);
    let fact = (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let lower = BigFloat::from_bigint(&BigInt::one(), p).div(&BigFloat::from_bigint(&fact, p));
    let upper_ok = r.cmp_value(&one.add(&slack)) != Ordering::Greater;
    let lower_ok = r.cmp_value(&lower.mul(&one.sub(&slack))) != Ordering::Less;
    if !(upper_ok && lower_ok) {
        return Err(Error::InvariantViolation(format!("Minkowski ratio {:.6e} outside [1/{n}!, 1]", r.to_f64())));
    }
    Ok(r.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::basis::{build_unipotent_lattice, SystemMatrix};
    use crate::numerics::DEFAULT_PRECISION;
    use alloc::vec;

    fn basis(cols: Vec<Vec<RealScalar>>) -> LatticeBasis {
        LatticeBasis::new(cols).unwrap()
    }

    #[test]
    fn unit_lattice() {
        let b = LatticeBasis::from_int_columns(&[vec![1, 0], vec![0, 1]]).unwrap();
        let r = successive_minima(&b, 10_000).unwrap();
        assert!(r.lambdas.iter().all(|l| l.cmp(&RealScalar::int(1)) == Ordering::Equal));
        let ratio = minkowski_check(&r, b.det(), DEFAULT_PRECISION).unwrap();
        assert!((ratio.to_f64() - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let b1 = LatticeBasis::from_int_columns(&[vec![1]]).unwrap();
        let r1 = successive_minima(&b1, 100).unwrap();
        assert!((minkowski_check(&r1, b1.det(), DEFAULT_PRECISION).unwrap().to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn axis_aligned() {
        let b = basis(vec![
            vec![RealScalar::ratio(1, 2), RealScalar::int(0)],
            vec![RealScalar::int(0), RealScalar::int(3)],
        ]);
        let r = successive_minima(&b, 10_000).unwrap();
        assert_eq!(r.lambdas[0].cmp(&RealScalar::ratio(1, 2)), Ordering::Equal);
        assert_eq!(r.lambdas[1].cmp(&RealScalar::int(3)), Ordering::Equal);
    }

    #[test]
    fn diagonal_half_lattice() {
        let b = basis(vec![
            vec![RealScalar::int(1), RealScalar::int(0)],
            vec![RealScalar::ratio(1, 2), RealScalar::ratio(1, 2)],
        ]);
        let r = successive_minima(&b, 10_000).unwrap();
        let half_sqrt2 = RealScalar::sqrt_int(2).div(&RealScalar::int(2)).unwrap();
        for l in &r.lambdas {
            assert!(l.is_exact());
            assert_eq!(l.cmp(&half_sqrt2), Ordering::Equal);
        }
        // (1/2, 1/2) first, then (1/2, -1/2)
        assert_eq!(r.witnesses[0][1].cmp(&RealScalar::ratio(1, 2)), Ordering::Equal);
        assert_eq!(r.witnesses[1][1].cmp(&RealScalar::ratio(-1, 2)), Ordering::Equal);
    }

    #[test]
    fn brute_force_oracle_on_unipotent_lattice() {
        // lambda_1 of the lattice of sqrt 2 by scanning |coefficients| <= 6
        let l = SystemMatrix::new(vec![vec![RealScalar::sqrt_int(2)]]).unwrap();
        let b = build_unipotent_lattice(&l);
        let r = successive_minima(&b, 10_000).unwrap();
        let mut best = f64::INFINITY;
        for p in -6i64..=6 {
            for q in -6i64..=6 {
                if p == 0 && q == 0 {
                    continue;
                }
                let x = p as f64 + q as f64 * core::f64::consts::SQRT_2;
                best = best.min(x * x + (q * q) as f64);
            }
        }
        assert!((r.lambda_sq[0].to_f64() - best).abs() < 1e-12);
        assert!(minkowski_check(&r, b.det(), DEFAULT_PRECISION).is_ok());
    }

    #[test]
    fn budget_is_enforced() {
        let b = LatticeBasis::from_int_columns(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(matches!(successive_minima(&b, 2), Err(Error::BudgetExceeded { budget: 2 })));
    }

    #[test]
    fn completion_spans_saturation() {
        // (2, 4, 0) has saturation generated by (1, 2, 0)
        let rows = vec![vec![2, 4, 0], vec![0, 3, 3]];
        let u = completion(&rows, 3).unwrap();
        let det = u[0][0] * (u[1][1] * u[2][2] - u[1][2] * u[2][1]) - u[1][0] * (u[0][1] * u[2][2] - u[0][2] * u[2][1])
            + u[2][0] * (u[0][1] * u[1][2] - u[0][2] * u[1][1]);
        assert_eq!(det.abs(), 1);
        let mut t = RankTracker::new();
        t.insert(&u[0]);
        t.insert(&u[1]);
        for r in &rows {
            assert!(!t.insert(r));
        }
        assert!(t.insert(&u[2]));
        let mut sat = RankTracker::new();
        sat.insert(&[1, 2, 0]);
        sat.insert(&[0, 1, 1]);
        assert!(!sat.insert(&u[0]) && !sat.insert(&u[1]));
    }

    #[test]
    fn skewed_minima_match_scan() {
        // one long and three short minima
        let b = basis(vec![
            vec![RealScalar::int(25), RealScalar::int(0), RealScalar::int(0), RealScalar::int(0)],
            vec![RealScalar::int(0), RealScalar::ratio(1, 2), RealScalar::int(0), RealScalar::int(0)],
            vec![RealScalar::int(0), RealScalar::int(0), RealScalar::ratio(3, 5), RealScalar::int(0)],
            vec![RealScalar::int(25), RealScalar::ratio(-3, 1), RealScalar::ratio(-4, 5), RealScalar::ratio(1, 50)],
        ]);
        let r = successive_minima(&b, 1_000_000).unwrap();
        assert!(r.nodes < 10_000);
        let sq: Vec<f64> = r.lambda_sq.iter().map(|x| x.to_f64()).collect();
        // greedy independent picks over a coefficient box
        let mut all = Vec::new();
        for e in -12i64..=12 {
            for a in -e - 1..=-e + 1 {
                for c in -80i64..=80 {
                    for d in -30i64..=30 {
                        let v = [
                            25.0 * (a + e) as f64,
                            0.5 * c as f64 - 3.0 * e as f64,
                            0.6 * d as f64 - 0.8 * e as f64,
                            0.02 * e as f64,
                        ];
                        let nsq: f64 = v.iter().map(|x| x * x).sum();
                        if nsq > 0.0 {
                            all.push((nsq, [a, c, d, e]));
                        }
                    }
                }
            }
        }
        all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut t = RankTracker::new();
        let mut expect = Vec::new();
        for (nsq, z) in &all {
            if t.insert(z) {
                expect.push(*nsq);
            }
            if expect.len() == 4 {
                break;
            }
        }
        for (x, y) in sq.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-9 * y.max(1.0), "{sq:?} vs {expect:?}");
        }
        assert!(minkowski_check(&r, b.det(), DEFAULT_PRECISION).is_ok());
    }

    #[test]
    fn ball_volumes() {
        let v3 = unit_ball_volume(3, 128).to_f64();
        assert!((v3 - 4.0 / 3.0 * core::f64::consts::PI).abs() < 1e-14);
        let v4 = unit_ball_volume(4, 128).to_f64();
        assert!((v4 - core::f64::consts::PI * core::f64::consts::PI / 2.0).abs() < 1e-14);
    }
}
