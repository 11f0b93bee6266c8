//! Exact counts of `M(L, eps, T, Q)`: integer `q` in the box, `q != 0`, and
//! `p` with `|L_i q + p_i| <= T` and `prod_i |L_i q + p_i| < eps`.
//!
//! Every comparison is first made with doubles widened by an error guard; only
//! undecided cases are redone in the scalars' own arithmetic, so the counts
//! are exact for exact inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::lattice::{
    build_unipotent_lattice, determinant, successive_minima, theta, BoxSpec, LatticeBasis, SystemMatrix,
};
use crate::normal::{normalize, SupportCase};
use crate::numerics::{row_value_any, BigFloat, RealScalar};
use crate::partition::{extend_and_compose, Partition};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

const REL_GUARD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CountInstance {
    pub l: SystemMatrix,
    pub eps: RealScalar,
    pub t: RealScalar,
    pub q: BoxSpec,
}

impl CountInstance {
    pub fn new(l: SystemMatrix, eps: RealScalar, t: RealScalar, q: BoxSpec) -> Result<Self> {
        if eps.signum() <= 0 || t.signum() <= 0 {
            return Err(Error::Domain("eps and T must be positive".into()));
        }
        if q.n() != l.n() {
            return Err(Error::Dimension(format!("box has {} sides, matrix has {} columns", q.n(), l.n())));
        }
        Ok(CountInstance { l, eps, t, q })
    }

    pub fn m(&self) -> usize {
        self.l.m()
    }

    pub fn n(&self) -> usize {
        self.l.n()
    }

    /// Upper estimate of the enumeration work.
    pub fn work(&self) -> f64 {
        let t = self.t.to_f64();
        let boxes: f64 = self.q.int_bounds().iter().map(|&b| 2.0 * b as f64 + 1.0).product();
        boxes * libm::pow(2.0 * libm::floor(t) + 3.0, self.m() as f64)
    }

    pub fn check_budget(&self, budget: u64) -> Result<()> {
        if self.work() > budget as f64 {
            return Err(Error::BudgetExceeded { budget });
        }
        Ok(())
    }
}

/// Integer `floor` of `x` if it is the same across `[x - g, x + g]`.
fn floor_certain(x: f64, g: f64) -> Option<i64> {
    let (a, b) = (libm::floor(x - g), libm::floor(x + g));
    (a == b).then_some(a as i64)
}

fn ceil_certain(x: f64, g: f64) -> Option<i64> {
    let (a, b) = (libm::ceil(x - g), libm::ceil(x + g));
    (a == b).then_some(a as i64)
}

/// Three-way outcome of an interval test.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Decide {
    Yes,
    No,
    Unsure,
}

/// `prod |d_i| < eps` for values known to within `guards`.
fn product_below(d: &[f64], guards: &[f64], eps: f64) -> Decide {
    let mut lo = 1.0;
    let mut hi = 1.0;
    for (x, g) in d.iter().zip(guards) {
        let a = libm::fabs(*x);
        lo *= (a - g).max(0.0);
        hi *= a + g;
    }
    let (e_lo, e_hi) = (eps * (1.0 - 1e-14), eps * (1.0 + 1e-14));
    if hi < e_lo {
        Decide::Yes
    } else if lo >= e_hi {
        Decide::No
    } else {
        Decide::Unsure
    }
}

struct DirectCounter<'a> {
    inst: &'a CountInstance,
    rows_f: Vec<Vec<f64>>,
    eps_f: f64,
    t_f: f64,
    prec: u32,
    exact_fallbacks: u64,
}

impl<'a> DirectCounter<'a> {
    fn new(inst: &'a CountInstance, prec: u32) -> Self {
        let rows_f = inst.l.rows().iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect();
        DirectCounter { inst, rows_f, eps_f: inst.eps.to_f64(), t_f: inst.t.to_f64(), prec, exact_fallbacks: 0 }
    }

    /// Number of `p` for a fixed `q`.
    fn count_q(&mut self, q: &[i64]) -> u64 {
        let m = self.inst.m();
        let mut v = Vec::with_capacity(m);
        let mut g = Vec::with_capacity(m);
        for row in &self.rows_f {
            let s: f64 = row.iter().zip(q).map(|(a, &b)| a * b as f64).sum();
            let mag: f64 = row.iter().zip(q).map(|(a, &b)| libm::fabs(a * b as f64)).sum();
            v.push(s);
            g.push(REL_GUARD * (1.0 + mag + self.t_f));
        }
        let mut exact: Vec<Option<RealScalar>> = vec![None; m];
        let mut ranges = Vec::with_capacity(m);
        for i in 0..m {
            let lo = ceil_certain(-v[i] - self.t_f, g[i]);
            let hi = floor_certain(-v[i] + self.t_f, g[i]);
            let (lo, hi) = match (lo, hi) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    let e = self.exact_value(&mut exact, i, q);
                    let lo = e.neg().sub(&self.inst.t).ceil();
                    let hi = e.neg().add(&self.inst.t).floor();
                    (lo.to_i64().unwrap(), hi.to_i64().unwrap())
                }
            };
            if lo > hi {
                return 0;
            }
            ranges.push((lo, hi));
        }
        let mut p: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut d = vec![0.0; m];
        let mut total = 0u64;
        loop {
            for i in 0..m {
                d[i] = v[i] + p[i] as f64;
            }
            let ok = match product_below(&d, &g, self.eps_f) {
                Decide::Yes => true,
                Decide::No => false,
                Decide::Unsure => self.exact_product_below(&mut exact, q, &p),
            };
            total += ok as u64;
            // odometer over the p box
            let mut i = 0;
            loop {
                if i == m {
                    return total;
                }
                if p[i] < ranges[i].1 {
                    p[i] += 1;
                    break;
                }
                p[i] = ranges[i].0;
                i += 1;
            }
        }
    }

    fn exact_value(&self, cache: &mut [Option<RealScalar>], i: usize, q: &[i64]) -> RealScalar {
        cache[i].get_or_insert_with(|| row_value_any(self.inst.l.row(i), q, self.prec)).clone()
    }

    fn exact_product_below(&mut self, cache: &mut [Option<RealScalar>], q: &[i64], p: &[i64]) -> bool {
        self.exact_fallbacks += 1;
        let mut prod = RealScalar::int(1);
        for (i, &pi) in p.iter().enumerate() {
            let e = self.exact_value(cache, i, q);
            prod = prod.mul(&e.add(&RealScalar::int(pi)).abs());
        }
        prod.lt(&self.inst.eps)
    }
}

/// Calls `f` on every integer vector in `prod_j [-b_j, b_j]` whose first
/// coordinate lies in `first`.
pub fn for_each_in_box(bounds: &[i64], first: RangeInclusive<i64>, mut f: impl FnMut(&[i64])) {
    let n = bounds.len();
    let lo0 = (*first.start()).max(-bounds[0]);
    let hi0 = (*first.end()).min(bounds[0]);
    if lo0 > hi0 {
        return;
    }
    let mut q: Vec<i64> = bounds.iter().map(|&b| -b).collect();
    q[0] = lo0;
    loop {
        f(&q);
        let mut j = n - 1;
        loop {
            let top = if j == 0 { hi0 } else { bounds[j] };
            if q[j] < top {
                q[j] += 1;
                break;
            }
            if j == 0 {
                return;
            }
            q[j] = -bounds[j];
            j -= 1;
        }
    }
}

/// Count restricted to `q_1` in `first`; summing over a partition of
/// `[-Q_1, Q_1]` gives the full count.
pub fn count_m_direct_chunk(inst: &CountInstance, first: RangeInclusive<i64>, prec: u32) -> u64 {
    let mut c = DirectCounter::new(inst, prec);
    let mut total = 0;
    for_each_in_box(&inst.q.int_bounds(), first, |q| {
        if q.iter().any(|&x| x != 0) {
            total += c.count_q(q);
        }
    });
    total
}

pub fn count_m_direct(inst: &CountInstance, budget: u64, prec: u32) -> Result<u64> {
    inst.check_budget(budget)?;
    let b = inst.q.int_bounds()[0];
    Ok(count_m_direct_chunk(inst, -b..=b, prec))
}

/// Contribution of each `q`, for callers that need per-`q` detail.
pub fn count_for_q(inst: &CountInstance, q: &[i64], prec: u32) -> u64 {
    DirectCounter::new(inst, prec).count_q(q)
}

/// Points `B z` of a lattice with upper-triangular basis matrix
/// (`vectors[k][h] = 0` for `h > k`) inside `prod_h [-bound_h, bound_h]`,
/// filtered by `keep`. `keep` receives `z` and a closure returning the exact
/// point.
pub fn count_triangular_box(
    basis: &LatticeBasis,
    bounds: &[RealScalar],
    budget: u64,
    mut keep: impl FnMut(&[i64], &[f64], f64, &dyn Fn() -> Vec<RealScalar>) -> bool,
) -> Result<u64> {
    let n = basis.dim();
    if bounds.len() != n {
        return Err(Error::Dimension("one bound per coordinate".into()));
    }
    for k in 0..n {
        for h in k + 1..n {
            if !basis.vector(k)[h].is_exact_zero() {
                return Err(Error::PrecondViolation("basis matrix is not upper triangular".into()));
            }
        }
        if basis.vector(k)[k].signum() == 0 {
            return Err(Error::PrecondViolation("zero on the diagonal".into()));
        }
    }
    let cols: Vec<Vec<f64>> = basis.vectors().iter().map(|v| v.iter().map(|x| x.to_f64()).collect()).collect();
    let bounds_f: Vec<f64> = bounds.iter().map(|b| b.to_f64()).collect();
    let mut z = vec![0i64; n];
    let mut x = vec![0.0; n];
    let mut nodes = 0u64;
    let mut count = 0u64;
    let scale: f64 = cols.iter().flatten().map(|v| libm::fabs(*v)).fold(1.0, f64::max);
    let mut ctx = TriCtx { basis, bounds, cols: &cols, bounds_f: &bounds_f, scale };
    ctx.rec(n, &mut z, &mut x, &mut nodes, budget, &mut count, &mut keep)?;
    Ok(count)
}

struct TriCtx<'a> {
    basis: &'a LatticeBasis,
    bounds: &'a [RealScalar],
    cols: &'a [Vec<f64>],
    bounds_f: &'a [f64],
    scale: f64,
}

type Keep<'k> = dyn FnMut(&[i64], &[f64], f64, &dyn Fn() -> Vec<RealScalar>) -> bool + 'k;

impl TriCtx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        &mut self,
        level: usize,
        z: &mut Vec<i64>,
        x: &mut Vec<f64>,
        nodes: &mut u64,
        budget: u64,
        count: &mut u64,
        keep: &mut Keep<'_>,
    ) -> Result<()> {
        let n = z.len();
        let mag: f64 = z.iter().map(|v| libm::fabs(*v as f64)).sum::<f64>() + 1.0;
        let guard = REL_GUARD * self.scale * mag;
        if level == 0 {
            let basis = self.basis;
            let zz = z.clone();
            let exact = move || basis.lattice_vector(&zz);
            if keep(z, x, guard, &exact) {
                *count += 1;
            }
            return Ok(());
        }
        let h = level - 1;
        // x_h = d z_h + r
        let r: f64 = (h + 1..n).map(|k| self.cols[k][h] * z[k] as f64).sum();
        let d = self.cols[h][h];
        let b = self.bounds_f[h];
        let (lo, hi) = {
            let (a, c) = ((-b - r) / d, (b - r) / d);
            let (a, c) = if d > 0.0 { (a, c) } else { (c, a) };
            let g = guard / libm::fabs(d) + REL_GUARD * (libm::fabs(a) + libm::fabs(c));
            match (ceil_certain(a, g), floor_certain(c, g)) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => self.exact_range(h, z),
            }
        };
        for v in lo..=hi {
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::BudgetExceeded { budget });
            }
            z[h] = v;
            x[h] = d * v as f64 + r;
            self.rec(h, z, x, nodes, budget, count, keep)?;
        }
        z[h] = 0;
        x[h] = 0.0;
        Ok(())
    }

    fn exact_range(&self, h: usize, z: &[i64]) -> (i64, i64) {
        let n = z.len();
        let mut r = RealScalar::int(0);
        for k in h + 1..n {
            if z[k] != 0 {
                r = r.add(&self.basis.vector(k)[h].mul_int(z[k]));
            }
        }
        let d = &self.basis.vector(h)[h];
        let b = &self.bounds[h];
        let a = b.neg().sub(&r).div(d).unwrap();
        let c = b.sub(&r).div(d).unwrap();
        let (a, c) = if d.signum() > 0 { (a, c) } else { (c, a) };
        (a.ceil().to_i64().unwrap(), c.floor().to_i64().unwrap())
    }
}

/// Count of the lattice points of the unipotent lattice of `L` in
/// `Z = H x prod [-Q_j, Q_j]` off the subspace `y = 0`.
pub fn count_via_lattice(inst: &CountInstance, budget: u64) -> Result<u64> {
    inst.check_budget(budget)?;
    let (m, n) = (inst.m(), inst.n());
    let basis = build_unipotent_lattice(&inst.l);
    let mut bounds = vec![inst.t.clone(); m];
    bounds.extend(inst.q.sides().iter().cloned());
    let eps_f = inst.eps.to_f64();
    let eps = inst.eps.clone();
    count_triangular_box(&basis, &bounds, budget.saturating_mul(4), |z, x, guard, exact| {
        if z[m..m + n].iter().all(|&v| v == 0) {
            return false;
        }
        let guards = vec![guard; m];
        match product_below(&x[..m], &guards, eps_f) {
            Decide::Yes => true,
            Decide::No => false,
            Decide::Unsure => {
                let pt = exact();
                let prod = pt[..m].iter().fold(RealScalar::int(1), |acc, v| acc.mul(&v.abs()));
                prod.lt(&eps)
            }
        }
    })
}

/// Lattice points of `Z` on `y = 0`: integer `p` with `|p_i| <= T` and
/// `prod |p_i| < eps`.
pub fn count_on_c(inst: &CountInstance) -> u64 {
    let m = inst.m();
    let t = inst.t.floor().to_i64().unwrap_or(0);
    let mut total = 0u64;
    let bounds = vec![t; m];
    if t < 0 {
        return 0;
    }
    for_each_in_box(&bounds, -t..=t, |p| {
        let prod = p.iter().fold(BigInt::from(1), |acc, &v| acc * BigInt::from(v.abs()));
        if RealScalar::bigint(prod).lt(&inst.eps) {
            total += 1;
        }
    });
    total
}

/// Where the value of `phi(Q)` came from.
#[derive(Clone, Debug)]
pub enum PhiSource {
    /// Supplied by the user.
    Asserted(RealScalar),
    /// Smallest observed value over the box.
    Empirical(RealScalar),
}

impl PhiSource {
    pub fn value(&self) -> &RealScalar {
        match self {
            PhiSource::Asserted(v) | PhiSource::Empirical(v) => v,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhiSource::Asserted(_) => "asserted",
            PhiSource::Empirical(_) => "empirical",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RatioRow {
    pub k: Vec<u32>,
    pub s: usize,
    pub lhs: f64,
    /// Bound for the case the cell falls into.
    pub rhs: f64,
    /// The case-free bound `1 + T^(M+N-1) + eps Q^N + (eps Q^N / phi)^((M+N-1)/(M+N))`.
    pub rhs_total: f64,
    pub case: SupportCase,
    pub fitted: f64,
}

#[derive(Clone, Debug)]
pub struct RatioBoundReport {
    pub rows: Vec<RatioRow>,
    pub phi: PhiSource,
    /// Largest `lhs / rhs` over all rows.
    pub fitted_max: f64,
    /// Largest `lhs / rhs_total` over all rows.
    pub fitted_total_max: f64,
}

pub fn case_label(c: &SupportCase) -> String {
    match c {
        SupportCase::Quick => "quick".into(),
        SupportCase::Slow(s) => format!("slow({s})"),
        SupportCase::ZeroQ(s) => format!("zero_q({s})"),
    }
}

/// Case bound for `(eps Q^N)^(s/(M+N)) / (lambda_1 ... lambda_s)`.
fn case_rhs(case: &SupportCase, h1: usize, s: usize, m: usize, n: usize, t: f64, x: f64, y: f64) -> f64 {
    let dim = m + n;
    match case {
        SupportCase::ZeroQ(_) => libm::pow(t, s as f64),
        _ => {
            let s0 = if let SupportCase::Slow(s0) = case { *s0 } else { dim };
            if s >= s0 {
                x
            } else if s >= m {
                1.0 + libm::pow(y, s as f64 / (s as f64 + 1.0))
            } else {
                1.0 + libm::pow(y, s as f64 / (m + h1.max(1)) as f64)
            }
        }
    }
}

/// Minima ratios of one partition cell against the case bounds, for `s = 1..=M+N`.
pub fn cell_ratio_rows(
    inst: &CountInstance,
    partition: &Partition,
    idx: usize,
    phi: &RealScalar,
    max_nodes: u64,
    prec: u32,
) -> Result<Vec<RatioRow>> {
    let (m, n) = (inst.m(), inst.n());
    let dim = m + n;
    let p = prec + 32;
    let x = inst.eps.to_bigfloat(p).mul(&inst.q.product().to_bigfloat(p));
    let phi_v = phi.to_bigfloat(p);
    if phi_v.signum() <= 0 {
        return Err(Error::Domain("phi must be positive".into()));
    }
    let (xf, yf, tf) = (x.to_f64(), x.div(&phi_v).to_f64(), inst.t.to_f64());
    let rhs_total = 1.0 + libm::pow(tf, (dim - 1) as f64) + xf + libm::pow(yf, (dim - 1) as f64 / dim as f64);
    let cell = partition.cells.get(idx).ok_or_else(|| Error::Domain(format!("cell index {idx} out of range")))?;
    let basis = extend_and_compose(partition, cell, &inst.l, &inst.q, prec)?;
    let rep = successive_minima(&basis, max_nodes)?;
    let (_, ladder) = normalize(&basis, &rep, m)?;
    let h1 = ladder.h.first().copied().unwrap_or(0);
    let mut prod = BigFloat::from_i64(1, p);
    let mut rows = Vec::with_capacity(dim);
    for s in 1..=dim {
        prod = prod.mul(&rep.lambdas[s - 1].to_bigfloat(p));
        let num = x.pow(&BigFloat::from_ratio(&BigInt::from(s), &BigInt::from(dim), p));
        let lhs = num.div(&prod).to_f64();
        let rhs = case_rhs(&ladder.case, h1, s, m, n, tf, xf, yf);
        rows.push(RatioRow { k: cell.k.clone(), s, lhs, rhs, rhs_total, case: ladder.case, fitted: lhs / rhs });
    }
    Ok(rows)
}

impl RatioBoundReport {
    pub fn from_rows(rows: Vec<RatioRow>, phi: PhiSource) -> Self {
        let fitted_max = rows.iter().map(|r| r.fitted).fold(0.0, f64::max);
        let fitted_total_max = rows.iter().map(|r| r.lhs / r.rhs_total).fold(0.0, f64::max);
        RatioBoundReport { rows, phi, fitted_max, fitted_total_max }
    }
}

/// Per-cell minima ratios against the case bounds.
pub fn ratio_bounds(
    inst: &CountInstance,
    partition: &Partition,
    phi: PhiSource,
    max_nodes: u64,
    prec: u32,
) -> Result<RatioBoundReport> {
    let mut rows = Vec::new();
    for idx in 0..partition.cells.len() {
        rows.extend(cell_ratio_rows(inst, partition, idx, phi.value(), max_nodes, prec)?);
    }
    Ok(RatioBoundReport::from_rows(rows, phi))
}

/// `(1+T)^(M+N-1) log(T^M/eps)^(M-1) [eps Q^N + (eps Q^N / phi)^((M+N-1)/(M+N))]`.
pub fn prop14_bound(inst: &CountInstance, phi_at_q: &RealScalar, prec: u32) -> Result<RealScalar> {
    let (m, n) = (inst.m() as i64, inst.n() as i64);
    let p = prec + 32;
    let t = inst.t.to_bigfloat(p);
    let eps = inst.eps.to_bigfloat(p);
    let log_ratio = t.powi(m).div(&eps).ln();
    if log_ratio.cmp_value(&BigFloat::from_i64(m, p)).is_lt() {
        return Err(Error::PrecondViolation("needs T^M/eps >= e^M".into()));
    }
    if phi_at_q.signum() <= 0 {
        return Err(Error::Domain("phi must be positive".into()));
    }
    let x = eps.mul(&inst.q.product().to_bigfloat(p));
    let y = x.div(&phi_at_q.to_bigfloat(p));
    let bracket = x.add(&y.pow(&BigFloat::from_ratio(&BigInt::from(m + n - 1), &BigInt::from(m + n), p)));
    let one_t = BigFloat::from_i64(1, p).add(&t).powi(m + n - 1);
    let out = one_t.mul(&log_ratio.powi(m - 1)).mul(&bracket);
    Ok(RealScalar::Approx(out.with_prec(prec)))
}

/// Determinant of the leading `s0 x s0` block of the basis matrix.
pub fn corner_determinant(basis: &LatticeBasis, s0: usize) -> RealScalar {
    let rows: Vec<Vec<RealScalar>> = (0..s0).map(|h| (0..s0).map(|k| basis.vector(k)[h].clone()).collect()).collect();
    determinant(&rows)
}

/// `theta^(M(1 - (s0-M)/N)) prod_{j <= s0-M} Q/Q_j`.
pub fn slow_case_determinant(eps: &RealScalar, q: &BoxSpec, m: usize, s0: usize, prec: u32) -> Result<BigFloat> {
    let n = q.n();
    if s0 < m || s0 > m + n {
        return Err(Error::Domain(format!("s0 = {s0} outside [M, M+N]")));
    }
    let p = prec + 32;
    let q_geo = q.q_geo(p);
    let th = theta(eps, &q_geo, m, n, p)?.to_bigfloat(p);
    let e = BigFloat::from_ratio(&BigInt::from((m * (n + m) - m * s0) as i64), &BigInt::from(n as i64), p);
    let mut out = th.pow(&e);
    let qg = q_geo.to_bigfloat(p);
    for qj in &q.sides()[..s0 - m] {
        out = out.mul(&qg.div(&qj.to_bigfloat(p)));
    }
    Ok(out.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{parse_real, DecimalMode, DEFAULT_PRECISION};
    use crate::partition::{build_partition, HyperbolicRegion};

    const P: u32 = DEFAULT_PRECISION;

    fn exact(s: &str) -> RealScalar {
        parse_real(s, DecimalMode::Exact).unwrap()
    }

    fn inst(l: &[&[&str]], eps: &str, t: &str, q: &[i64]) -> CountInstance {
        let rows = l.iter().map(|r| r.iter().map(|e| exact(e)).collect()).collect();
        let q = BoxSpec::new(q.iter().map(|&x| RealScalar::int(x)).collect()).unwrap();
        CountInstance::new(SystemMatrix::new(rows).unwrap(), exact(eps), exact(t), q).unwrap()
    }

    /// Direct float oracle for one row with a single column.
    fn oracle_1x1(alpha: f64, eps: f64, t: f64, q: i64) -> u64 {
        let mut c = 0;
        for qq in -q..=q {
            if qq == 0 {
                continue;
            }
            let v = alpha * qq as f64;
            let lo = libm::ceil(-v - t) as i64;
            let hi = libm::floor(-v + t) as i64;
            for p in lo..=hi {
                if libm::fabs(v + p as f64) < eps {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn sqrt2_example() {
        let i = inst(&[&["sqrt(2)"]], "0.3", "0.5", &[5]);
        assert_eq!(count_m_direct(&i, DEFAULT_BUDGET, P).unwrap(), 6);
        assert_eq!(count_via_lattice(&i, DEFAULT_BUDGET).unwrap(), 6);
        assert_eq!(oracle_1x1(core::f64::consts::SQRT_2, 0.3, 0.5, 5), 6);
    }

    #[test]
    fn large_eps_counts_every_q() {
        // T = 1/2, eps = 1: exactly one p per row and q
        let i = inst(&[&["sqrt(2)", "sqrt(3)"]], "1", "1/2", &[3, 2]);
        assert_eq!(count_m_direct(&i, DEFAULT_BUDGET, P).unwrap(), 7 * 5 - 1);
        assert_eq!(count_via_lattice(&i, DEFAULT_BUDGET).unwrap(), 7 * 5 - 1);
    }

    #[test]
    fn boundary_points_are_decided_exactly() {
        // rational row: |q/2 + p| hits T = 1/2 and eps = 1/2 exactly
        let i = inst(&[&["1/2"]], "1/2", "1/2", &[4]);
        // q even: p = -q/2 gives 0 < 1/2; q odd: |.| = 1/2 twice, not < 1/2
        assert_eq!(count_m_direct(&i, DEFAULT_BUDGET, P).unwrap(), 4);
        assert_eq!(count_via_lattice(&i, DEFAULT_BUDGET).unwrap(), 4);
    }

    #[test]
    fn chunks_add_up() {
        let i = inst(&[&["sqrt(2)"], &["golden"]], "1/8", "2", &[9]);
        let full = count_m_direct(&i, DEFAULT_BUDGET, P).unwrap();
        let parts: u64 = [-9..=-4, -3..=0, 1..=9].into_iter().map(|r| count_m_direct_chunk(&i, r, P)).sum();
        assert_eq!(full, parts);
        assert_eq!(full, count_via_lattice(&i, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let i = inst(&[&["sqrt(2)"]], "0.3", "0.5", &[1000]);
        assert!(matches!(count_m_direct(&i, 100, P), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn points_on_c() {
        let i = inst(&[&["sqrt(2)"], &["sqrt(3)"]], "1/2", "2", &[1]);
        // only p with a zero coordinate: 5*5 - 4*4
        assert_eq!(count_on_c(&i), 9);
        let i = inst(&[&["sqrt(2)"], &["sqrt(3)"]], "5", "2", &[1]);
        assert_eq!(count_on_c(&i), 25);
    }

    #[test]
    fn single_cell_ratios_are_finite() {
        let i = inst(&[&["sqrt(2)"]], "1/4", "1", &[4]);
        let r = HyperbolicRegion::new(1, i.eps.clone(), i.t.clone()).unwrap();
        let part = build_partition(&r, P).unwrap();
        let rep = ratio_bounds(&i, &part, PhiSource::Asserted(exact("1/3")), 1_000_000, P).unwrap();
        assert_eq!(rep.rows.len(), 2);
        for row in &rep.rows {
            assert!(row.lhs.is_finite() && row.lhs > 0.0);
            assert!(row.fitted.is_finite() && row.fitted > 0.0);
        }
    }

    #[test]
    fn prop14_formula() {
        // M = N = 1, T = 1, eps = 1/8, Q = 4, phi = 3/10
        let i = inst(&[&["sqrt(2)"]], "1/8", "1", &[4]);
        let v = prop14_bound(&i, &exact("3/10"), P).unwrap().to_f64();
        let x: f64 = 0.5;
        let expect = 2.0 * (x + libm::pow(x / 0.3, 0.5));
        assert!((v - expect).abs() < 1e-12);
        // T/eps = 2 < e
        let i = inst(&[&["sqrt(2)"]], "1/2", "1", &[4]);
        assert!(matches!(prop14_bound(&i, &exact("3/10"), P), Err(Error::PrecondViolation(_))));
        // T/eps = 2.7183 just above e
        let i = inst(&[&["sqrt(2)"]], "1/2.7183", "1", &[4]);
        assert!(prop14_bound(&i, &exact("3/10"), P).is_ok());
    }

    #[test]
    fn prop14_first_term_is_linear_in_volume() {
        let a = inst(&[&["sqrt(2)"]], "1/8", "1", &[4]);
        let b = inst(&[&["sqrt(2)"]], "1/8", "1", &[8]);
        // phi huge makes the second bracket term negligible
        let phi = exact("1000000000000000000000000000000000000");
        let va = prop14_bound(&a, &phi, P).unwrap().to_f64();
        let vb = prop14_bound(&b, &phi, P).unwrap().to_f64();
        assert!((vb / va - 2.0).abs() < 1e-9);
    }

    #[test]
    fn slow_determinant_matches_corner() {
        let i = inst(&[&["sqrt(2)", "sqrt(3)"]], "1/16", "1", &[2, 8]);
        let p = P;
        let q_geo = i.q.q_geo(p);
        let th = theta(&i.eps, &q_geo, 1, 2, p).unwrap();
        let thy = th.to_bigfloat(p).powi(-1).sqrt();
        let mu = vec![th.clone()];
        let nu: Vec<RealScalar> =
            i.q.sides()
                .iter()
                .map(|qj| RealScalar::Approx(thy.mul(&q_geo.to_bigfloat(p)).div(&qj.to_bigfloat(p))))
                .collect();
        let b = crate::lattice::scale_lattice(&build_unipotent_lattice(&i.l), &mu, &nu).unwrap();
        for s0 in 1..=3 {
            let corner = corner_determinant(&b, s0).to_bigfloat(p);
            let formula = slow_case_determinant(&i.eps, &i.q, 1, s0, p).unwrap();
            let rel = corner.sub(&formula).div(&formula).abs().to_f64();
            assert!(rel < 1e-40, "s0={s0} rel={rel}");
        }
    }
}
